#include "quadtomo/states.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "parallel.hpp"
#include "text_io.hpp"

namespace quadtomo {

namespace {
constexpr double kHeisenbergTol = 1e-12;
constexpr double kMinUncertaintyDet = 0.25;
}  // namespace

double Mat2Sym::eig_max() const noexcept {
  const double half_trace = 0.5 * (xx + pp);
  const double radius = std::hypot(0.5 * (xx - pp), xp);
  return half_trace + radius;
}

double Mat2Sym::eig_min() const noexcept {
  const double half_trace = 0.5 * (xx + pp);
  const double radius = std::hypot(0.5 * (xx - pp), xp);
  return half_trace - radius;
}

Mat2Sym Mat2Sym::rotated_diag(double a, double b, double phi) noexcept {
  const double c = std::cos(phi);
  const double s = std::sin(phi);
  return Mat2Sym{a * c * c + b * s * s, (a - b) * c * s, a * s * s + b * c * c};
}

GaussianState::GaussianState(Vec2 mean, Mat2Sym cov) : mean_(mean), cov_(cov) {
  if (!(cov.xx > 0.0) || !(cov.det() > 0.0)) {
    throw std::invalid_argument("covariance must be positive definite");
  }
  if (cov.det() < kMinUncertaintyDet - kHeisenbergTol) {
    throw std::invalid_argument("covariance violates the minimum-uncertainty bound");
  }
}

double MarginalDensity::pdf(double x) const noexcept {
  const double d = x - mean;
  return std::exp(-0.5 * d * d / variance) / std::sqrt(2.0 * std::numbers::pi * variance);
}

void GridSpec::validate() const {
  if (!(x_max > x_min) || !(p_max > p_min)) {
    throw std::invalid_argument("grid bounds must be increasing");
  }
  if (nx < 8 || ny < 8) {
    throw std::invalid_argument("grid needs at least 8 points per axis");
  }
}

GridSpec GridSpec::square(double half_extent, int n) {
  GridSpec spec{-half_extent, half_extent, -half_extent, half_extent, n, n};
  spec.validate();
  return spec;
}

GridSpec GridSpec::for_state(const GaussianState& state, int nx, int ny) {
  const double half_extent = std::max(6.0, 6.0 * std::sqrt(2.0 * state.cov().eig_max()));
  GridSpec spec{-half_extent, half_extent, -half_extent, half_extent, nx, ny};
  spec.validate();
  return spec;
}

WignerGrid::WignerGrid(GridSpec spec) : spec_(spec) {
  spec_.validate();
  values_.assign(static_cast<std::size_t>(spec_.nx) * spec_.ny, 0.0);
}

double WignerGrid::trapezoid_integral() const noexcept {
  const int nx = spec_.nx;
  const int ny = spec_.ny;
  double sum = 0.0;
  for (int i = 0; i < nx; ++i) {
    const double wx = (i == 0 || i == nx - 1) ? 0.5 : 1.0;
    double row = 0.0;
    for (int j = 0; j < ny; ++j) {
      const double wy = (j == 0 || j == ny - 1) ? 0.5 : 1.0;
      row += wy * at(i, j);
    }
    sum += wx * row;
  }
  return sum * spec_.dx() * spec_.dy();
}

double WignerGrid::max_abs() const noexcept {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

GridMoments grid_moments(const WignerGrid& grid) {
  const GridSpec& spec = grid.spec();
  double norm = 0.0, mx = 0.0, mp = 0.0, sxx = 0.0, sxp = 0.0, spp = 0.0;
  for (int i = 0; i < spec.nx; ++i) {
    const double wx = (i == 0 || i == spec.nx - 1) ? 0.5 : 1.0;
    const double x = spec.x_center(i);
    for (int j = 0; j < spec.ny; ++j) {
      const double wy = (j == 0 || j == spec.ny - 1) ? 0.5 : 1.0;
      const double p = spec.p_center(j);
      const double w = wx * wy * grid.at(i, j);
      norm += w;
      mx += w * x;
      mp += w * p;
      sxx += w * x * x;
      sxp += w * x * p;
      spp += w * p * p;
    }
  }
  GridMoments moments;
  const double cell = spec.dx() * spec.dy();
  moments.integral = norm * cell;
  if (norm != 0.0) {
    mx /= norm;
    mp /= norm;
    moments.mean = Vec2{mx, mp};
    moments.cov = Mat2Sym{sxx / norm - mx * mx, sxp / norm - mx * mp, spp / norm - mp * mp};
  }
  return moments;
}

GaussianState vacuum() {
  return GaussianState{Vec2{}, Mat2Sym{0.5, 0.0, 0.5}};
}

GaussianState squeezed_vacuum(double r, double phi) {
  if (r < 0.0) throw std::invalid_argument("squeezing parameter must be nonnegative");
  const double low = 0.5 * std::exp(-2.0 * r);
  const double high = 0.5 * std::exp(2.0 * r);
  return GaussianState{Vec2{}, Mat2Sym::rotated_diag(low, high, phi)};
}

MarginalDensity marginal(const GaussianState& state, double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const Mat2Sym& cov = state.cov();
  MarginalDensity density;
  density.theta = theta;
  density.mean = state.mean().x * c + state.mean().p * s;
  density.variance = c * c * cov.xx + 2.0 * c * s * cov.xp + s * s * cov.pp;
  return density;
}

namespace {

double gaussian_wigner_value(const Vec2& mean, const Mat2Sym& cov, double x, double p) {
  const double det = cov.det();
  const double dx = x - mean.x;
  const double dp = p - mean.p;
  // inverse of the covariance via the adjugate
  const double quad = (cov.pp * dx * dx - 2.0 * cov.xp * dx * dp + cov.xx * dp * dp) / det;
  return std::exp(-0.5 * quad) / (2.0 * std::numbers::pi * std::sqrt(det));
}

}  // namespace

double wigner_value(const GaussianState& state, double x, double p) {
  return gaussian_wigner_value(state.mean(), state.cov(), x, p);
}

WignerGrid gaussian_wigner_grid(const Vec2& mean, const Mat2Sym& cov, const GridSpec& spec,
                                unsigned threads) {
  if (!(cov.xx > 0.0) || !(cov.det() > 0.0)) {
    throw std::invalid_argument("covariance must be positive definite");
  }
  spec.validate();
  WignerGrid grid(spec);
  detail::parallel_ranges(static_cast<std::size_t>(spec.nx), threads,
                          [&](std::size_t begin, std::size_t end) {
                            for (std::size_t i = begin; i < end; ++i) {
                              const double x = spec.x_center(static_cast<int>(i));
                              for (int j = 0; j < spec.ny; ++j) {
                                grid.at(static_cast<int>(i), j) =
                                    gaussian_wigner_value(mean, cov, x, spec.p_center(j));
                              }
                            }
                          });
  return grid;
}

WignerGrid wigner_eval(const GaussianState& state, const GridSpec& spec, unsigned threads) {
  return gaussian_wigner_grid(state.mean(), state.cov(), spec, threads);
}

void save_wigner_grid(const std::string& path, const WignerGrid& grid) {
  const GridSpec& spec = grid.spec();
  nlohmann::json header{{"x_min", spec.x_min}, {"x_max", spec.x_max},
                        {"p_min", spec.p_min}, {"p_max", spec.p_max},
                        {"nx", spec.nx},       {"ny", spec.ny}};
  std::string out = header.dump();
  out += '\n';
  for (int i = 0; i < spec.nx; ++i) {
    for (int j = 0; j < spec.ny; ++j) {
      if (j) out += ',';
      out += detail::format_double(grid.at(i, j));
    }
    out += '\n';
  }
  detail::write_text_file(path, out);
}

WignerGrid load_wigner_grid(const std::string& path) {
  std::istringstream in(detail::read_text_file(path));
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty grid file: " + path);
  const nlohmann::json header = nlohmann::json::parse(line);
  GridSpec spec{header.at("x_min").get<double>(), header.at("x_max").get<double>(),
                header.at("p_min").get<double>(), header.at("p_max").get<double>(),
                header.at("nx").get<int>(),       header.at("ny").get<int>()};
  WignerGrid grid(spec);
  for (int i = 0; i < spec.nx; ++i) {
    if (!std::getline(in, line)) throw std::runtime_error("truncated grid file: " + path);
    std::istringstream row(line);
    std::string token;
    for (int j = 0; j < spec.ny; ++j) {
      if (!std::getline(row, token, ',')) throw std::runtime_error("short row in grid file: " + path);
      grid.at(i, j) = detail::parse_double(token, path);
    }
  }
  return grid;
}

}  // namespace quadtomo
