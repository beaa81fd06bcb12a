#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace quadtomo {

struct Vec2 {
  double x = 0.0;
  double p = 0.0;
};

/// Symmetric 2x2 matrix, stored as its three independent entries.
struct Mat2Sym {
  double xx = 0.0;
  double xp = 0.0;
  double pp = 0.0;

  double det() const noexcept { return xx * pp - xp * xp; }
  double trace() const noexcept { return xx + pp; }
  double eig_max() const noexcept;
  double eig_min() const noexcept;

  /// diag(a, b) conjugated by a rotation of angle phi.
  static Mat2Sym rotated_diag(double a, double b, double phi) noexcept;
};

/// Gaussian state of a single mode: mean quadrature vector and covariance.
/// Convention: the vacuum state has variance 1/2 in every quadrature.
class GaussianState {
 public:
  /// Rejects non-positive-definite covariances and covariances below the
  /// minimum-uncertainty determinant 1/4 (tolerance 1e-12).
  GaussianState(Vec2 mean, Mat2Sym cov);

  const Vec2& mean() const noexcept { return mean_; }
  const Mat2Sym& cov() const noexcept { return cov_; }

 private:
  Vec2 mean_;
  Mat2Sym cov_;
};

/// Gaussian quadrature distribution at a fixed phase.
struct MarginalDensity {
  double theta = 0.0;
  double mean = 0.0;
  double variance = 0.0;

  double pdf(double x) const noexcept;
};

/// Rectangular phase-space grid; samples live at cell centers.
struct GridSpec {
  double x_min = -6.0;
  double x_max = 6.0;
  double p_min = -6.0;
  double p_max = 6.0;
  int nx = 256;
  int ny = 256;

  void validate() const;
  double dx() const noexcept { return (x_max - x_min) / nx; }
  double dy() const noexcept { return (p_max - p_min) / ny; }
  double x_center(int i) const noexcept { return x_min + (i + 0.5) * dx(); }
  double p_center(int j) const noexcept { return p_min + (j + 0.5) * dy(); }

  static GridSpec square(double half_extent, int n);

  /// Symmetric grid wide enough that the truncated mass of `state` is
  /// negligible: half extent max(6, 6 * sqrt(2 * largest eigenvalue)).
  static GridSpec for_state(const GaussianState& state, int nx = 256, int ny = 256);
};

/// Sampled Wigner function. values are row-major with x as the slow index.
class WignerGrid {
 public:
  explicit WignerGrid(GridSpec spec);

  const GridSpec& spec() const noexcept { return spec_; }
  double& at(int ix, int ip) noexcept { return values_[static_cast<std::size_t>(ix) * spec_.ny + ip]; }
  double at(int ix, int ip) const noexcept { return values_[static_cast<std::size_t>(ix) * spec_.ny + ip]; }
  const std::vector<double>& values() const noexcept { return values_; }
  std::vector<double>& values() noexcept { return values_; }

  double trapezoid_integral() const noexcept;
  double max_abs() const noexcept;

 private:
  GridSpec spec_;
  std::vector<double> values_;
};

/// Trapezoid-rule moments of a sampled Wigner function.
struct GridMoments {
  double integral = 0.0;
  Vec2 mean;
  Mat2Sym cov;
};

GridMoments grid_moments(const WignerGrid& grid);

GaussianState vacuum();

/// Squeezed vacuum with quadrature variances exp(-2r)/2 and exp(+2r)/2 along
/// the axis pair rotated by phi. r must be nonnegative.
GaussianState squeezed_vacuum(double r, double phi = 0.0);

/// Distribution of the quadrature X*cos(theta) + P*sin(theta).
MarginalDensity marginal(const GaussianState& state, double theta);

/// Wigner function value at a phase-space point.
double wigner_value(const GaussianState& state, double x, double p);

WignerGrid wigner_eval(const GaussianState& state, const GridSpec& spec, unsigned threads = 1);

/// Gaussian phase-space density for a bare positive-definite covariance.
/// Unlike wigner_eval this does not require an admissible state, which lets
/// estimator output below the minimum-uncertainty bound be rendered.
WignerGrid gaussian_wigner_grid(const Vec2& mean, const Mat2Sym& cov, const GridSpec& spec,
                                unsigned threads = 1);

/// File form: one JSON header line (bounds and shape) followed by nx CSV rows
/// of ny values each.
void save_wigner_grid(const std::string& path, const WignerGrid& grid);
WignerGrid load_wigner_grid(const std::string& path);

}  // namespace quadtomo
