#include <cmath>
#include <filesystem>
#include <numbers>
#include <stdexcept>

#include "doctest.h"
#include "oracles.hpp"
#include "quadtomo/states.hpp"

using namespace quadtomo;
using doctest::Approx;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("vacuum state") {
  const GaussianState vac = vacuum();
  CHECK(vac.mean().x == 0.0);
  CHECK(vac.mean().p == 0.0);
  CHECK(vac.cov().xx == 0.5);
  CHECK(vac.cov().xp == 0.0);
  CHECK(vac.cov().pp == 0.5);
  CHECK(vac.cov().det() == 0.25);

  for (double theta : {0.0, 0.3, kPi / 4, 1.1, kPi, 5.0}) {
    CHECK(marginal(vac, theta).variance == Approx(0.5).epsilon(1e-15));
  }
}

TEST_CASE("squeezed vacuum covariance") {
  CHECK_THROWS_AS(squeezed_vacuum(-0.1, 0.0), std::invalid_argument);

  SUBCASE("r = 0 is the vacuum") {
    const GaussianState s = squeezed_vacuum(0.0, 0.0);
    CHECK(s.cov().xx == 0.5);
    CHECK(s.cov().pp == 0.5);
    CHECK(s.cov().xp == 0.0);
  }

  SUBCASE("r = 1 along the X axis") {
    const GaussianState s = squeezed_vacuum(1.0, 0.0);
    CHECK(s.cov().xx == Approx(0.5 * std::exp(-2.0)).epsilon(1e-15));
    CHECK(s.cov().pp == Approx(0.5 * std::exp(2.0)).epsilon(1e-15));
    CHECK(s.cov().xx == Approx(0.0676676416183063).epsilon(1e-12));
    CHECK(s.cov().pp == Approx(3.6945280494653251).epsilon(1e-12));
    CHECK(s.cov().xx * s.cov().pp == Approx(0.25).epsilon(1e-12));
  }

  SUBCASE("rotating by pi/2 swaps the variances") {
    const GaussianState s = squeezed_vacuum(1.0, kPi / 2);
    CHECK(s.cov().xx == Approx(0.5 * std::exp(2.0)).epsilon(1e-12));
    CHECK(s.cov().pp == Approx(0.5 * std::exp(-2.0)).epsilon(1e-12));
  }

  SUBCASE("uncertainty product is minimal for every r and phi") {
    for (double r : {0.1, 0.5, 1.0, 1.7, 2.5}) {
      for (double phi : {0.0, 0.4, kPi / 3, 1.9}) {
        const GaussianState s = squeezed_vacuum(r, phi);
        const double v1 = marginal(s, phi).variance;
        const double v2 = marginal(s, phi + kPi / 2).variance;
        CHECK(v1 * v2 == Approx(0.25).epsilon(1e-12));
        CHECK(s.cov().det() >= 0.25 - 1e-12);
      }
    }
  }
}

TEST_CASE("state constructor invariants") {
  CHECK_THROWS_AS(GaussianState(Vec2{}, Mat2Sym{-1.0, 0.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(GaussianState(Vec2{}, Mat2Sym{1.0, 1.5, 1.0}), std::invalid_argument);
  // positive definite but below the minimum-uncertainty determinant
  CHECK_THROWS_AS(GaussianState(Vec2{}, Mat2Sym{0.1, 0.0, 0.1}), std::invalid_argument);
}

TEST_CASE("marginal projections") {
  const GaussianState s = squeezed_vacuum(1.0, 0.0);

  CHECK(marginal(s, 0.0).variance == Approx(0.5 * std::exp(-2.0)).epsilon(1e-15));
  CHECK(marginal(s, kPi / 2).variance == Approx(0.5 * std::exp(2.0)).epsilon(1e-13));
  const double mid = 0.25 * (std::exp(2.0) + std::exp(-2.0));
  CHECK(marginal(s, kPi / 4).variance == Approx(mid).epsilon(1e-12));
  CHECK(marginal(s, kPi / 4).variance == Approx(1.8810978455418157).epsilon(1e-12));

  SUBCASE("mean projects onto the measured quadrature") {
    const GaussianState displaced(Vec2{1.5, -0.5}, Mat2Sym{0.5, 0.0, 0.5});
    CHECK(marginal(displaced, 0.0).mean == 1.5);
    CHECK(marginal(displaced, kPi / 2).mean == Approx(-0.5).epsilon(1e-12));
    const double expected = 1.5 * std::cos(0.8) - 0.5 * std::sin(0.8);
    CHECK(marginal(displaced, 0.8).mean == Approx(expected).epsilon(1e-15));
  }

  SUBCASE("invariant under a half turn") {
    for (double r : {0.0, 0.7, 1.3}) {
      const GaussianState state = squeezed_vacuum(r, 0.6);
      for (double theta : {0.0, 0.35, 1.0, 2.2}) {
        CHECK(marginal(state, theta).variance ==
              Approx(marginal(state, theta + kPi).variance).epsilon(1e-12));
      }
    }
  }

  SUBCASE("matches integrating the sampled Wigner function over P") {
    const WignerGrid grid = wigner_eval(s, GridSpec::for_state(s));
    const auto density = oracles::grid_marginal_x(grid);
    CHECK(oracles::density_variance_x(grid, density) ==
          Approx(marginal(s, 0.0).variance).epsilon(1e-3));

    // pointwise agreement with the analytic marginal
    const MarginalDensity m = marginal(s, 0.0);
    double max_diff = 0.0;
    for (int i = 0; i < grid.spec().nx; ++i) {
      max_diff = std::max(max_diff,
                          std::abs(density[static_cast<std::size_t>(i)] - m.pdf(grid.spec().x_center(i))));
    }
    CHECK(max_diff < 1e-8);
  }
}

TEST_CASE("wigner evaluation") {
  const GaussianState vac = vacuum();

  CHECK(wigner_value(vac, 0.0, 0.0) == Approx(1.0 / kPi).epsilon(1e-15));

  const WignerGrid grid = wigner_eval(vac, GridSpec::square(6.0, 256));
  double peak = 0.0;
  for (double v : grid.values()) peak = std::max(peak, v);
  // cell centers straddle the origin, so the sampled peak sits slightly low
  CHECK(peak == Approx(1.0 / kPi).epsilon(2e-3));
  CHECK(oracles::grid_integral(grid) == Approx(1.0).epsilon(1e-6));
  // summation order differs between the two implementations
  CHECK(grid.trapezoid_integral() == Approx(oracles::grid_integral(grid)).epsilon(1e-12));

  SUBCASE("normalization holds on state-fitted grids") {
    for (double r : {0.5, 1.0, 1.5}) {
      const GaussianState s = squeezed_vacuum(r, 0.9);
      const WignerGrid g = wigner_eval(s, GridSpec::for_state(s));
      CHECK(oracles::grid_integral(g) == Approx(1.0).epsilon(1e-6));
    }
  }

  SUBCASE("row parallel evaluation is bit identical") {
    const GaussianState s = squeezed_vacuum(1.0, 0.4);
    const GridSpec spec = GridSpec::for_state(s, 128, 128);
    const WignerGrid a = wigner_eval(s, spec, 1);
    const WignerGrid b = wigner_eval(s, spec, 2);
    CHECK(a.values() == b.values());
  }

  SUBCASE("grid moments match the state") {
    const GaussianState s = squeezed_vacuum(0.8, 0.3);
    const GridMoments moments = grid_moments(wigner_eval(s, GridSpec::for_state(s)));
    CHECK(moments.integral == Approx(1.0).epsilon(1e-6));
    CHECK(moments.cov.xx == Approx(s.cov().xx).epsilon(1e-6));
    CHECK(moments.cov.xp == Approx(s.cov().xp).epsilon(1e-5));
    CHECK(moments.cov.pp == Approx(s.cov().pp).epsilon(1e-6));
  }

  SUBCASE("rejects degenerate inputs") {
    CHECK_THROWS_AS(GridSpec::square(6.0, 4), std::invalid_argument);
    GridSpec bad{1.0, -1.0, -6.0, 6.0, 64, 64};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    CHECK_THROWS_AS(gaussian_wigner_grid(Vec2{}, Mat2Sym{1.0, 2.0, 1.0}, GridSpec::square(6.0, 64)),
                    std::invalid_argument);
  }
}

TEST_CASE("wigner grid file round trip") {
  const GaussianState s = squeezed_vacuum(0.6, 1.1);
  const WignerGrid grid = wigner_eval(s, GridSpec::for_state(s, 32, 48));

  const auto path = (std::filesystem::temp_directory_path() / "quadtomo_grid_test.txt").string();
  save_wigner_grid(path, grid);
  const WignerGrid loaded = load_wigner_grid(path);

  CHECK(loaded.spec().nx == grid.spec().nx);
  CHECK(loaded.spec().ny == grid.spec().ny);
  CHECK(loaded.spec().x_min == grid.spec().x_min);
  CHECK(loaded.spec().p_max == grid.spec().p_max);
  CHECK(loaded.values() == grid.values());
  std::filesystem::remove(path);
}
