#pragma once

#include <span>
#include <string>

#include "quadtomo/states.hpp"

namespace quadtomo {

/// Homodyne detector: gain alpha (volts per quadrature unit) and electronic
/// noise parameter t_noise (volts^2). The noise voltage is zero-mean Gaussian
/// with variance t_noise / 2, so a vacuum measurement has second moment
/// (alpha^2 + t_noise) / 2.
class DetectorModel {
 public:
  DetectorModel(double alpha, double t_noise);

  double alpha() const noexcept { return alpha_; }
  double t_noise() const noexcept { return t_noise_; }

  /// Conversion factor a vacuum calibration would report: sqrt(alpha^2 + t_noise).
  double alpha_prime() const noexcept;

  /// (alpha^2 + t_noise) / t_noise; +infinity when t_noise is zero.
  double snr() const noexcept;

  std::string to_json() const;
  static DetectorModel from_json(const std::string& text);

 private:
  double alpha_;
  double t_noise_;
};

/// Beam-splitter loss of transmission eta applied to a Gaussian state:
/// cov -> eta * cov + (1 - eta)/2 * I, mean -> sqrt(eta) * mean.
GaussianState apply_loss_cov(const GaussianState& state, double eta);

/// Loss channel evaluated on a Wigner grid: amplitudes rescale by sqrt(eta)
/// and the result is blurred by an isotropic Gaussian of per-axis variance
/// (1 - eta)/2. eta = 0 returns the vacuum grid, eta = 1 a copy.
WignerGrid apply_loss_wigner(const WignerGrid& grid, double eta, unsigned threads = 1);

/// Electronic-noise channel as seen after vacuum calibration: amplitudes
/// rescale by alpha/alpha' and the blur variance per axis is
/// t_noise / (2 alpha'^2). t_noise = 0 returns a copy.
WignerGrid apply_en_wigner(const WignerGrid& grid, const DetectorModel& detector, unsigned threads = 1);

/// Voltage distribution a vacuum measurement produces, noise included.
MarginalDensity en_vacuum_distribution(const DetectorModel& detector);

/// Calibration factor from vacuum-trace voltages: sqrt(2 * mean(V^2)).
double calibration_factor(std::span<const double> vacuum_samples);

/// alpha^2 / (alpha^2 + t_noise).
double equivalent_efficiency_from_gain(const DetectorModel& detector);

double snr(const DetectorModel& detector);

/// (S - 1) / S for S > 1 in linear units; rejects S <= 1.
double equivalent_efficiency_from_snr(double s);

}  // namespace quadtomo
