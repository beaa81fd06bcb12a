#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace quadtomo {

/// Result of a squeezing efficiency measurement. Quadrature moments are
/// shot-noise normalized (vacuum = 1/2).
struct EfficiencyReport {
  double q_plus_sq = 0.0;
  double q_minus_sq = 0.0;
  double eta = 0.0;
  double eta_sigma = 0.0;
  double snr_db = 0.0;
};

/// Extreme quadrature moments of a pure squeezed state of parameter r after
/// transmission eta: (eta*exp(+2r)/2 + (1-eta)/2, eta*exp(-2r)/2 + (1-eta)/2).
std::pair<double, double> predict_loss_variances(double r, double eta);

/// Transmission a pure squeezed state must have suffered to show the given
/// extreme moments:
///   eta = (2*q_plus - 1)(1 - 2*q_minus) / (2*q_plus + 2*q_minus - 2).
/// Requires q_plus > 1/2 > q_minus. Raises consistency_error when the
/// denominator is indeterminate (vacuum-like input) or the result exceeds
/// 1 + unphysical_tol (below-minimum-uncertainty data).
double infer_efficiency(double q_plus_sq, double q_minus_sq, double unphysical_tol = 1e-9);

/// Invert the loss map: Q_pure = (Q - (1-eta)/2) / eta. Inputs at or below
/// the vacuum floor (1-eta)/2 are rejected.
std::pair<double, double> correct_for_loss(double q_plus_sq, double q_minus_sq, double eta);

struct PhaseVariance {
  double theta = 0.0;
  double variance = 0.0;
};

/// Extreme values of a sinusoidal fit variance(theta) = A + B*cos(2*theta + phi0)
/// over the given points. Needs >= 2 entries spanning >= pi/2 of phase; raises
/// consistency_error when residuals exceed max_rel_residual of the mean level.
std::pair<double, double> extreme_variances(std::span<const PhaseVariance> points,
                                            double max_rel_residual = 0.1);

struct SweepConfig {
  double r = 1.5;                  // squeezing of the pure source
  double optical_eta = 1.0;        // transmission ahead of the detector
  double alpha = 1.0;              // detector gain, volts per quadrature unit
  std::vector<double> snr_linear;  // detector SNR per sweep point, each > 1
  std::size_t n_per_trace = 1000000;
  std::size_t n_phases = 12;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

struct SweepRow {
  EfficiencyReport report;       // measured moments and inferred efficiency
  double eta_predicted = 0.0;    // optical_eta * (S-1)/S
  double snr_measured_db = 0.0;  // from the acquired traces
};

/// Simulate the three-trace protocol per SNR point: electronic noise, shot
/// noise, squeezed signal through the optical loss; calibrate on the shot
/// trace, rescale, fit the phase-resolved moments and infer the efficiency.
std::vector<SweepRow> snr_sweep_experiment(const SweepConfig& config);

}  // namespace quadtomo
