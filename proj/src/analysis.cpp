#include "quadtomo/analysis.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "quadtomo/channels.hpp"
#include "quadtomo/detector.hpp"
#include "quadtomo/errors.hpp"
#include "quadtomo/rng.hpp"
#include "quadtomo/states.hpp"
#include "lsq.hpp"

namespace quadtomo {

namespace {
constexpr double kIndeterminateTol = 1e-9;
}

std::pair<double, double> predict_loss_variances(double r, double eta) {
  if (r < 0.0) throw std::invalid_argument("squeezing parameter must be nonnegative");
  if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("transmission must lie in [0, 1]");
  const double floor = 0.5 * (1.0 - eta);
  return {eta * 0.5 * std::exp(2.0 * r) + floor, eta * 0.5 * std::exp(-2.0 * r) + floor};
}

double infer_efficiency(double q_plus_sq, double q_minus_sq, double unphysical_tol) {
  const double den = 2.0 * (q_plus_sq + q_minus_sq - 1.0);
  if (std::abs(den) < kIndeterminateTol) {
    throw consistency_error("efficiency is indeterminate for vacuum-like moments");
  }
  if (!(q_minus_sq > 0.0)) throw std::invalid_argument("quadrature moments must be positive");
  if (!(q_minus_sq < 0.5)) throw std::invalid_argument("no squeezing observed: q_minus >= 1/2");
  if (!(q_plus_sq > 0.5)) throw std::invalid_argument("no anti-squeezing observed: q_plus <= 1/2");
  if (den < 0.0) {
    throw consistency_error("moment pair lies below the minimum-uncertainty bound");
  }
  const double eta = (2.0 * q_plus_sq - 1.0) * (1.0 - 2.0 * q_minus_sq) / den;
  if (eta > 1.0 + unphysical_tol) {
    throw consistency_error("inferred transmission exceeds 1: moment pair is unphysical");
  }
  return eta;
}

std::pair<double, double> correct_for_loss(double q_plus_sq, double q_minus_sq, double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) throw std::invalid_argument("transmission must lie in (0, 1]");
  const double floor = 0.5 * (1.0 - eta);
  if (!(q_plus_sq > floor) || !(q_minus_sq > floor)) {
    throw std::invalid_argument("moment at or below the vacuum floor (1-eta)/2");
  }
  return {(q_plus_sq - floor) / eta, (q_minus_sq - floor) / eta};
}

namespace {

struct ExtremeFit {
  double q_plus = 0.0;
  double q_minus = 0.0;
  std::array<double, 4> cov{};  // covariance of (q_plus, q_minus)
  double rms_residual = 0.0;
  double level = 0.0;  // fitted mean level A
};

// Sinusoid fit of variance(theta) = A + B cos(2 theta) + C sin(2 theta) with
// optional per-point variances and a fully correlated relative variance
// (shared calibration error) folded into the extreme-value covariance.
ExtremeFit fit_extremes(std::span<const PhaseVariance> points,
                        std::span<const double> var_points,
                        double common_rel_var) {
  if (points.size() < 2) throw std::invalid_argument("extreme fit needs at least 2 phases");
  double lo = points[0].theta, hi = points[0].theta;
  for (const auto& pt : points) {
    lo = std::min(lo, pt.theta);
    hi = std::max(hi, pt.theta);
  }
  if (hi - lo < 0.5 * std::numbers::pi - 1e-9) {
    throw std::invalid_argument("phase coverage must span at least pi/2");
  }

  std::vector<double> v(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) v[i] = points[i].variance;
  const detail::LinearFit fit = detail::fit_linear(
      v, var_points, 3, [&](std::size_t i) {
        return std::array<double, 3>{1.0, std::cos(2.0 * points[i].theta),
                                     std::sin(2.0 * points[i].theta)};
      });

  const double a = fit.beta[0];
  const double b = fit.beta[1];
  const double c = fit.beta[2];
  const double radius = std::hypot(b, c);

  ExtremeFit out;
  out.level = a;
  out.q_plus = a + radius;
  out.q_minus = a - radius;
  out.rms_residual = fit.rms_residual;

  // Jacobian of (q_plus, q_minus) w.r.t. (A, B, C)
  const double jb = radius > 0.0 ? b / radius : 0.0;
  const double jc = radius > 0.0 ? c / radius : 0.0;
  const double j[2][3] = {{1.0, jb, jc}, {1.0, -jb, -jc}};
  for (int r = 0; r < 2; ++r) {
    for (int s = 0; s < 2; ++s) {
      double acc = 0.0;
      for (int m = 0; m < 3; ++m) {
        for (int n = 0; n < 3; ++n) {
          acc += j[r][m] * fit.cov[static_cast<std::size_t>(m) * 3 + n] * j[s][n];
        }
      }
      out.cov[static_cast<std::size_t>(r) * 2 + s] = acc;
    }
  }
  if (common_rel_var > 0.0) {
    // a shared rescaling of every point moves the extremes proportionally
    const double q[2] = {out.q_plus, out.q_minus};
    for (int r = 0; r < 2; ++r) {
      for (int s = 0; s < 2; ++s) {
        out.cov[static_cast<std::size_t>(r) * 2 + s] += common_rel_var * q[r] * q[s];
      }
    }
  }
  return out;
}

double efficiency_sigma(const ExtremeFit& fit) {
  const double n1 = 2.0 * fit.q_plus - 1.0;
  const double n2 = 1.0 - 2.0 * fit.q_minus;
  const double den = 2.0 * (fit.q_plus + fit.q_minus - 1.0);
  if (std::abs(den) < kIndeterminateTol) return 0.0;
  const double g_plus = -2.0 * n2 * n2 / (den * den);
  const double g_minus = -2.0 * n1 * n1 / (den * den);
  const double var = g_plus * g_plus * fit.cov[0] + g_minus * g_minus * fit.cov[3] +
                     2.0 * g_plus * g_minus * fit.cov[1];
  return std::sqrt(std::max(0.0, var));
}

}  // namespace

std::pair<double, double> extreme_variances(std::span<const PhaseVariance> points,
                                            double max_rel_residual) {
  const ExtremeFit fit = fit_extremes(points, {}, 0.0);
  if (!(fit.level > 0.0)) throw consistency_error("fitted noise level is not positive");
  if (fit.rms_residual > max_rel_residual * fit.level) {
    throw consistency_error("phase-resolved variances are not sinusoidal in 2*theta");
  }
  return {fit.q_plus, fit.q_minus};
}

std::vector<SweepRow> snr_sweep_experiment(const SweepConfig& config) {
  if (config.snr_linear.empty()) throw std::invalid_argument("sweep needs SNR points");
  for (double s : config.snr_linear) {
    if (!(s > 1.0)) throw std::invalid_argument("every sweep SNR must exceed 1");
  }
  if (config.n_phases < 3) throw std::invalid_argument("sweep needs at least 3 phases");
  if (config.n_per_trace < 10 * config.n_phases) {
    throw std::invalid_argument("sweep traces are too short for per-phase statistics");
  }

  const GaussianState source = apply_loss_cov(squeezed_vacuum(config.r, 0.0), config.optical_eta);
  const PhaseSchedule schedule = PhaseSchedule::uniform(config.n_phases);

  std::vector<SweepRow> rows;
  rows.reserve(config.snr_linear.size());
  CounterRng point_seeds(config.seed, CounterRng::stream_id("sweep-points"));
  for (std::size_t point = 0; point < config.snr_linear.size(); ++point) {
    const double s = config.snr_linear[point];
    const double t_noise = config.alpha * config.alpha / (s - 1.0);
    const DetectorModel detector(config.alpha, t_noise);

    point_seeds.skip_to(point);
    const std::uint64_t seed = point_seeds.next_u64();
    const auto en = acquire_trace(detector, std::nullopt, TraceKind::ElectronicNoise,
                                  PhaseSchedule::constant(0.0), config.n_per_trace, seed,
                                  config.threads);
    const auto shot = acquire_trace(detector, std::nullopt, TraceKind::ShotNoise,
                                    PhaseSchedule::constant(0.0), config.n_per_trace, seed,
                                    config.threads);
    const auto signal = acquire_trace(detector, source, TraceKind::Signal, schedule,
                                      config.n_per_trace, seed, config.threads);

    const double alpha_prime = calibration_factor(shot.samples);
    const std::vector<double> rescaled = rescale_trace(signal, alpha_prime);

    // per-phase second moments of the calibrated samples
    std::vector<PhaseVariance> points_v(config.n_phases);
    std::vector<double> var_points(config.n_phases);
    std::vector<double> sums(config.n_phases, 0.0);
    std::vector<std::size_t> counts(config.n_phases, 0);
    for (std::size_t i = 0; i < rescaled.size(); ++i) {
      const std::size_t k = i % config.n_phases;
      sums[k] += rescaled[i] * rescaled[i];
      ++counts[k];
    }
    for (std::size_t k = 0; k < config.n_phases; ++k) {
      const double q = sums[k] / static_cast<double>(counts[k]);
      points_v[k] = PhaseVariance{schedule.values[k], q};
      var_points[k] = 2.0 * q * q / static_cast<double>(counts[k]);
    }

    const double common_rel_var = 2.0 / static_cast<double>(shot.samples.size());
    const ExtremeFit fit = fit_extremes(points_v, var_points, common_rel_var);
    const double sigma = efficiency_sigma(fit);
    // a supra-unity estimate within its own statistics is reported, not
    // rejected, so the noiseless limit stays usable
    const double eta = infer_efficiency(fit.q_plus, fit.q_minus, 1e-9 + 6.0 * sigma);

    SweepRow row;
    row.report = EfficiencyReport{fit.q_plus, fit.q_minus, eta, sigma, 10.0 * std::log10(s)};
    row.eta_predicted = config.optical_eta * equivalent_efficiency_from_snr(s);
    row.snr_measured_db = 10.0 * std::log10(estimate_snr(shot, en));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace quadtomo
