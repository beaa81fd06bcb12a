#pragma once

// Reference computations for the test suite, kept independent of the library
// code paths they are used to check.

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "quadtomo/states.hpp"

namespace oracles {

inline double sample_mean(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc / static_cast<double>(v.size());
}

inline double sample_mean_square(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return acc / static_cast<double>(v.size());
}

inline double sample_variance(std::span<const double> v) {
  const double mu = sample_mean(v);
  double acc = 0.0;
  for (double x : v) acc += (x - mu) * (x - mu);
  return acc / static_cast<double>(v.size() - 1);
}

/// 3-sigma band for a Gaussian second-moment estimate from n samples.
inline double moment_band(double moment, std::size_t n) {
  return 3.0 * moment * std::sqrt(2.0 / static_cast<double>(n));
}

/// Plain 2-D trapezoid quadrature of a sampled grid.
inline double grid_integral(const quadtomo::WignerGrid& grid) {
  const auto& spec = grid.spec();
  double acc = 0.0;
  for (int i = 0; i < spec.nx; ++i) {
    const double wx = (i == 0 || i == spec.nx - 1) ? 0.5 : 1.0;
    for (int j = 0; j < spec.ny; ++j) {
      const double wy = (j == 0 || j == spec.ny - 1) ? 0.5 : 1.0;
      acc += wx * wy * grid.at(i, j);
    }
  }
  return acc * spec.dx() * spec.dy();
}

struct AxisMoments {
  double mean_x = 0.0;
  double mean_p = 0.0;
  double var_x = 0.0;
  double var_p = 0.0;
  double cov_xp = 0.0;
};

/// Second moments of a grid by direct quadrature.
inline AxisMoments grid_axis_moments(const quadtomo::WignerGrid& grid) {
  const auto& spec = grid.spec();
  double norm = 0.0, mx = 0.0, mp = 0.0, sxx = 0.0, spp = 0.0, sxp = 0.0;
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
      spp += w * p * p;
      sxp += w * x * p;
    }
  }
  AxisMoments m;
  m.mean_x = mx / norm;
  m.mean_p = mp / norm;
  m.var_x = sxx / norm - m.mean_x * m.mean_x;
  m.var_p = spp / norm - m.mean_p * m.mean_p;
  m.cov_xp = sxp / norm - m.mean_x * m.mean_p;
  return m;
}

/// Marginal density along X obtained by integrating the grid over P.
inline std::vector<double> grid_marginal_x(const quadtomo::WignerGrid& grid) {
  const auto& spec = grid.spec();
  std::vector<double> density(static_cast<std::size_t>(spec.nx), 0.0);
  for (int i = 0; i < spec.nx; ++i) {
    double acc = 0.0;
    for (int j = 0; j < spec.ny; ++j) {
      const double wy = (j == 0 || j == spec.ny - 1) ? 0.5 : 1.0;
      acc += wy * grid.at(i, j);
    }
    density[static_cast<std::size_t>(i)] = acc * spec.dy();
  }
  return density;
}

/// Variance of a density sampled on the grid's X centers.
inline double density_variance_x(const quadtomo::WignerGrid& grid, std::span<const double> density) {
  const auto& spec = grid.spec();
  double norm = 0.0, m1 = 0.0, m2 = 0.0;
  for (int i = 0; i < spec.nx; ++i) {
    const double w = (i == 0 || i == spec.nx - 1) ? 0.5 : 1.0;
    const double x = spec.x_center(i);
    norm += w * density[static_cast<std::size_t>(i)];
    m1 += w * density[static_cast<std::size_t>(i)] * x;
    m2 += w * density[static_cast<std::size_t>(i)] * x * x;
  }
  m1 /= norm;
  return m2 / norm - m1 * m1;
}

/// Largest |a - b| over a grid pair, relative to the reference peak.
inline double max_rel_diff(const quadtomo::WignerGrid& a, const quadtomo::WignerGrid& b) {
  double peak = 0.0;
  for (double v : b.values()) peak = std::max(peak, std::abs(v));
  double diff = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i) {
    diff = std::max(diff, std::abs(a.values()[i] - b.values()[i]));
  }
  return diff / peak;
}

}  // namespace oracles
