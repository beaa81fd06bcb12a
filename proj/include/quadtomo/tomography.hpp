#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "quadtomo/states.hpp"

namespace quadtomo {

/// Binned quadrature samples at one phase. Out-of-range samples go to the
/// overflow tally, never silently dropped.
struct MarginalHistogram {
  double theta = 0.0;
  std::vector<double> bin_edges;
  std::vector<std::uint64_t> counts;
  std::uint64_t total = 0;  // in-range samples
  std::uint64_t overflow = 0;

  std::size_t bins() const noexcept { return counts.size(); }
  bool uniform_bins(double* width = nullptr) const noexcept;

  /// Bin-center moments. Uniform binning gets the standard quadratic
  /// correction for the bin width.
  double mean() const;
  double variance() const;
};

MarginalHistogram histogram(std::span<const double> samples, double theta,
                            std::size_t nbins, double lo, double hi);
MarginalHistogram histogram(std::span<const double> samples, double theta,
                            std::vector<double> edges);

/// 1-D density sampled at uniform points.
struct SampledDensity {
  double lo = 0.0;
  double step = 0.0;
  std::vector<double> values;

  double x_at(std::size_t i) const noexcept { return lo + static_cast<double>(i) * step; }
  double integral() const noexcept;
  double mean() const noexcept;
  double variance() const noexcept;
};

/// Line integral of the grid along the direction rotated by theta, i.e. the
/// distribution of X*cos(theta) + P*sin(theta). step defaults to half the
/// smaller cell size; steps above two cells are rejected.
SampledDensity radon_project(const WignerGrid& grid, double theta, double step = 0.0);

/// Filtered back-projection from histograms at >= 8 distinct phases in
/// [0, pi). Histograms must share one uniform binning and hold >= 1000
/// samples each. Ramp filter with a hard cutoff at the binning Nyquist
/// frequency; the output is zero outside the inscribed disk of the measured
/// support, where the projections do not determine it.
WignerGrid inverse_radon(const std::vector<MarginalHistogram>& histograms,
                         const GridSpec& spec, unsigned threads = 1);
WignerGrid inverse_radon(const std::vector<MarginalHistogram>& histograms,
                         unsigned threads = 1);

/// Moment fit of a Gaussian state to per-phase histogram means/variances.
/// Noisy data may legitimately land below the minimum-uncertainty bound, so
/// the result carries the covariance and a flag instead of enforcing the
/// constructor invariant.
struct FittedState {
  Vec2 mean;
  Mat2Sym cov;
  Vec2 mean_sigma;      // standard errors of the fitted means
  Mat2Sym cov_sigma;    // standard errors of the fitted covariance entries
  bool heisenberg_ok = false;

  /// Throws consistency_error if the fitted covariance is not an admissible
  /// state covariance.
  GaussianState to_state() const;
};

FittedState fit_gaussian_state(const std::vector<MarginalHistogram>& histograms);

/// CSV columns bin_lo,bin_hi,count with '#' header lines (theta_rad, total,
/// overflow).
void save_histogram(const std::string& path, const MarginalHistogram& hist);
MarginalHistogram load_histogram(const std::string& path);

}  // namespace quadtomo
