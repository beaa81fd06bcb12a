#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "quadtomo/analysis.hpp"
#include "quadtomo/channels.hpp"
#include "quadtomo/detector.hpp"
#include "quadtomo/errors.hpp"

using namespace quadtomo;
using doctest::Approx;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("loss-model variance prediction") {
  CHECK_THROWS_AS(predict_loss_variances(-0.1, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(predict_loss_variances(1.0, 1.5), std::invalid_argument);

  SUBCASE("vacuum fixed point") {
    for (double eta : {0.0, 0.3, 1.0}) {
      const auto [qp, qm] = predict_loss_variances(0.0, eta);
      CHECK(qp == Approx(0.5).epsilon(1e-15));
      CHECK(qm == Approx(0.5).epsilon(1e-15));
    }
  }

  SUBCASE("pure and half-lossy squeezed state") {
    const auto [qp1, qm1] = predict_loss_variances(1.0, 1.0);
    CHECK(qp1 == Approx(3.6945280494653251).epsilon(1e-12));
    CHECK(qm1 == Approx(0.0676676416183063).epsilon(1e-12));
    CHECK(qp1 * qm1 == Approx(0.25).epsilon(1e-12));

    const auto [qp2, qm2] = predict_loss_variances(1.0, 0.5);
    CHECK(qp2 == Approx(2.0972640247326626).epsilon(1e-12));
    CHECK(qm2 == Approx(0.2838338208091532).epsilon(1e-12));
  }
}

TEST_CASE("efficiency inference") {
  SUBCASE("round trips through the prediction") {
    const auto [qp1, qm1] = predict_loss_variances(1.0, 1.0);
    CHECK(infer_efficiency(qp1, qm1) == Approx(1.0).epsilon(1e-12));
    const auto [qp2, qm2] = predict_loss_variances(1.0, 0.5);
    CHECK(infer_efficiency(qp2, qm2) == Approx(0.5).epsilon(1e-12));
  }

  SUBCASE("the squeezing parameter cancels exactly") {
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
      const double r = 0.05 + (2.5 - 0.05) * i / 49.0;
      for (int j = 0; j < 50; ++j) {
        const double eta = 0.05 + (1.0 - 0.05) * j / 49.0;
        const auto [qp, qm] = predict_loss_variances(r, eta);
        worst = std::max(worst, std::abs(infer_efficiency(qp, qm) - eta));
      }
    }
    CHECK(worst < 1e-12);
  }

  SUBCASE("vacuum input is indeterminate") {
    CHECK_THROWS_AS(infer_efficiency(0.5, 0.5), consistency_error);
    CHECK_THROWS_AS(infer_efficiency(0.7, 0.3 + 1e-12), consistency_error);
  }

  SUBCASE("inputs without squeezing are rejected") {
    CHECK_THROWS_AS(infer_efficiency(0.8, 0.6), std::invalid_argument);
    CHECK_THROWS_AS(infer_efficiency(0.4, 0.2), std::invalid_argument);
    CHECK_THROWS_AS(infer_efficiency(0.8, -0.1), std::invalid_argument);
  }

  SUBCASE("below-bound pairs raise a consistency error") {
    // moment sum below the vacuum level
    CHECK_THROWS_AS(infer_efficiency(0.6, 0.1), consistency_error);
    // product far below the minimum-uncertainty limit
    CHECK_THROWS_AS(infer_efficiency(3.0, 0.05), consistency_error);
  }

  SUBCASE("a supra-unity result inside the tolerance passes through") {
    const double eta = infer_efficiency(3.0, 0.05, 0.2);
    CHECK(eta == Approx(0.9 * 5.0 / 4.1).epsilon(1e-12));
    CHECK(eta > 1.0);
  }
}

TEST_CASE("loss correction") {
  SUBCASE("unit transmission is the identity") {
    const auto [qp, qm] = correct_for_loss(1.7, 0.3, 1.0);
    CHECK(qp == 1.7);
    CHECK(qm == 0.3);
  }

  SUBCASE("inverts the loss map") {
    const auto [qp, qm] = correct_for_loss(2.0972640247326626, 0.2838338208091532, 0.5);
    CHECK(qp == Approx(3.6945280494653251).epsilon(1e-12));
    CHECK(qm == Approx(0.0676676416183063).epsilon(1e-12));
    CHECK(qp * qm == Approx(0.25).epsilon(1e-12));
  }

  SUBCASE("correction composed with prediction recovers the pure moments") {
    for (double r : {0.2, 0.8, 1.6}) {
      for (double eta : {0.3, 0.7, 1.0}) {
        const auto [qp, qm] = predict_loss_variances(r, eta);
        const auto [pp, pm] = correct_for_loss(qp, qm, eta);
        CHECK(pp == Approx(0.5 * std::exp(2.0 * r)).epsilon(1e-12));
        CHECK(pm == Approx(0.5 * std::exp(-2.0 * r)).epsilon(1e-12));
        CHECK(pp * pm == Approx(0.25).epsilon(1e-12));
      }
    }
  }

  SUBCASE("moments at the vacuum floor are rejected") {
    CHECK_THROWS_AS(correct_for_loss(0.2, 0.1, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(correct_for_loss(1.0, 0.25, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(correct_for_loss(1.0, 0.3, 0.0), std::invalid_argument);
  }
}

TEST_CASE("extreme variances from a phase scan") {
  SUBCASE("constant data") {
    std::vector<PhaseVariance> points;
    for (double theta : {0.0, kPi / 4, kPi / 2, 3 * kPi / 4}) {
      points.push_back(PhaseVariance{theta, 0.5});
    }
    const auto [qp, qm] = extreme_variances(points);
    CHECK(qp == Approx(0.5).epsilon(1e-12));
    CHECK(qm == Approx(0.5).epsilon(1e-12));
  }

  SUBCASE("exact lossy squeezed curve") {
    const GaussianState s = apply_loss_cov(squeezed_vacuum(1.0, 0.0), 0.5);
    std::vector<PhaseVariance> points;
    for (int k = 0; k < 12; ++k) {
      const double theta = kPi * k / 12.0;
      points.push_back(PhaseVariance{theta, marginal(s, theta).variance});
    }
    const auto [qp, qm] = extreme_variances(points);
    CHECK(qp == Approx(2.0972640247326626).epsilon(1e-9));
    CHECK(qm == Approx(0.2838338208091532).epsilon(1e-9));
  }

  SUBCASE("noisy Monte Carlo curve stays within its statistics") {
    const GaussianState s = apply_loss_cov(squeezed_vacuum(1.0, 0.0), 0.5);
    const std::size_t per_phase = 100000;
    std::vector<PhaseVariance> points;
    for (int k = 0; k < 12; ++k) {
      const double theta = kPi * k / 12.0;
      CounterRng rng(404, CounterRng::stream_id("extreme") ^ static_cast<std::uint64_t>(k));
      double acc = 0.0;
      for (std::size_t i = 0; i < per_phase; ++i) {
        const double x = sample_quadrature(s, theta, rng);
        acc += x * x;
      }
      points.push_back(PhaseVariance{theta, acc / static_cast<double>(per_phase)});
    }
    const auto [qp, qm] = extreme_variances(points);
    const double band_p = oracles::moment_band(2.0972640247326626, per_phase);
    const double band_m = oracles::moment_band(0.2838338208091532, per_phase);
    CHECK(std::abs(qp - 2.0972640247326626) < band_p);
    CHECK(std::abs(qm - 0.2838338208091532) < band_m);
  }

  SUBCASE("input validation") {
    std::vector<PhaseVariance> one{PhaseVariance{0.0, 0.5}};
    CHECK_THROWS_AS(extreme_variances(one), std::invalid_argument);

    std::vector<PhaseVariance> narrow{PhaseVariance{0.0, 0.5}, PhaseVariance{0.1, 0.6}};
    CHECK_THROWS_AS(extreme_variances(narrow), std::invalid_argument);
  }

  SUBCASE("non-sinusoidal data fails the residual check") {
    std::vector<PhaseVariance> points{PhaseVariance{0.0, 1.0}, PhaseVariance{kPi / 4, 1.0},
                                      PhaseVariance{kPi / 2, 1.0}, PhaseVariance{3 * kPi / 4, 5.0}};
    CHECK_THROWS_AS(extreme_variances(points), consistency_error);
  }
}

TEST_CASE("snr sweep experiment") {
  SUBCASE("validation") {
    SweepConfig bad;
    bad.snr_linear = {};
    CHECK_THROWS_AS(snr_sweep_experiment(bad), std::invalid_argument);
    bad.snr_linear = {0.5};
    CHECK_THROWS_AS(snr_sweep_experiment(bad), std::invalid_argument);
  }

  SUBCASE("prediction column follows the equivalence law") {
    SweepConfig config;
    config.r = 1.5;
    config.optical_eta = 0.51;
    config.snr_linear = {100.0};
    config.n_per_trace = 50000;
    config.seed = 7;
    const auto rows = snr_sweep_experiment(config);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].eta_predicted == Approx(0.5049).epsilon(1e-12));
    CHECK(rows[0].report.snr_db == Approx(20.0).epsilon(1e-12));
  }

  SUBCASE("noiseless limit infers full transmission") {
    SweepConfig config;
    config.r = 1.0;
    config.optical_eta = 1.0;
    config.snr_linear = {1e9};
    config.n_per_trace = 100000;
    config.seed = 11;
    const auto rows = snr_sweep_experiment(config);
    REQUIRE(rows.size() == 1);
    CHECK(std::abs(rows[0].report.eta - 1.0) < 3.0 * rows[0].report.eta_sigma);
  }

  SUBCASE("inferred efficiencies track the prediction across the sweep") {
    SweepConfig config;
    config.r = 1.5;
    config.optical_eta = 0.51;
    config.snr_linear = {2.0, 4.0, 10.0, 31.6, 100.0};
    config.n_per_trace = 200000;
    config.seed = 2026;
    const auto rows = snr_sweep_experiment(config);
    REQUIRE(rows.size() == 5);
    double prev = 0.0;
    for (const auto& row : rows) {
      CHECK(std::abs(row.report.eta - row.eta_predicted) < 3.0 * row.report.eta_sigma);
      CHECK(row.report.eta_sigma > 0.0);
      CHECK(row.eta_predicted > prev);
      prev = row.eta_predicted;
    }
  }

  SUBCASE("optical and electronic losses multiply") {
    SweepConfig config;
    config.r = 1.0;
    config.optical_eta = 0.7;
    config.snr_linear = {5.0};  // equivalent transmission 0.8
    config.n_per_trace = 400000;
    config.seed = 31;
    const auto rows = snr_sweep_experiment(config);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].eta_predicted == Approx(0.7 * 0.8).epsilon(1e-12));
    CHECK(std::abs(rows[0].report.eta - 0.56) < 3.0 * rows[0].report.eta_sigma);
  }

  SUBCASE("sweep output is reproducible") {
    SweepConfig config;
    config.r = 1.2;
    config.optical_eta = 0.8;
    config.snr_linear = {4.0, 16.0};
    config.n_per_trace = 30000;
    config.seed = 5;
    const auto a = snr_sweep_experiment(config);
    config.threads = 2;
    const auto b = snr_sweep_experiment(config);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].report.eta == b[i].report.eta);
      CHECK(a[i].report.eta_sigma == b[i].report.eta_sigma);
    }
  }
}
