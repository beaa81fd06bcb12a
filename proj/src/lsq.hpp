#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>

namespace quadtomo::detail {

/// Dense symmetric matrix inverse for n <= 3 via diagonal-pivot Gauss-Jordan.
/// A pivot below tol relative to the largest diagonal zeroes its row and
/// column, which drops that unknown from a rank-deficient fit instead of
/// amplifying noise.
inline std::array<double, 9> invert_sym(std::array<double, 9> a, int n, double tol = 1e-12) {
  std::array<double, 9> inv{};
  for (int i = 0; i < n; ++i) inv[static_cast<std::size_t>(i) * 3 + i] = 1.0;
  double scale = 0.0;
  for (int i = 0; i < n; ++i) scale = std::max(scale, std::abs(a[static_cast<std::size_t>(i) * 3 + i]));
  if (scale == 0.0) return inv;  // all-zero system: identity times zeroed rows below

  auto at = [](std::array<double, 9>& m, int r, int c) -> double& {
    return m[static_cast<std::size_t>(r) * 3 + c];
  };
  for (int k = 0; k < n; ++k) {
    const double pivot = at(a, k, k);
    if (std::abs(pivot) <= tol * scale) {
      for (int j = 0; j < n; ++j) {
        at(a, k, j) = 0.0;
        at(a, j, k) = 0.0;
        at(inv, k, j) = 0.0;
        at(inv, j, k) = 0.0;
      }
      continue;
    }
    const double inv_pivot = 1.0 / pivot;
    for (int j = 0; j < n; ++j) {
      at(a, k, j) *= inv_pivot;
      at(inv, k, j) *= inv_pivot;
    }
    for (int i = 0; i < n; ++i) {
      if (i == k) continue;
      const double factor = at(a, i, k);
      if (factor == 0.0) continue;
      for (int j = 0; j < n; ++j) {
        at(a, i, j) -= factor * at(a, k, j);
        at(inv, i, j) -= factor * at(inv, k, j);
      }
    }
  }
  return inv;
}

/// Unweighted linear least squares with up to 3 parameters and optional
/// propagation of independent per-point variances into the parameter
/// covariance.
struct LinearFit {
  std::array<double, 3> beta{};
  std::array<double, 9> cov{};   // parameter covariance
  double rms_residual = 0.0;
};

template <typename RowFn>
LinearFit fit_linear(std::span<const double> y, std::span<const double> var_y, int n_params,
                     const RowFn& row_at) {
  if (y.empty()) throw std::invalid_argument("least-squares fit needs data");
  std::array<double, 9> normal{};
  std::array<double, 3> rhs{};
  for (std::size_t i = 0; i < y.size(); ++i) {
    const std::array<double, 3> x = row_at(i);
    for (int r = 0; r < n_params; ++r) {
      rhs[static_cast<std::size_t>(r)] += x[static_cast<std::size_t>(r)] * y[i];
      for (int c = 0; c < n_params; ++c) {
        normal[static_cast<std::size_t>(r) * 3 + c] += x[static_cast<std::size_t>(r)] * x[static_cast<std::size_t>(c)];
      }
    }
  }
  const std::array<double, 9> ninv = invert_sym(normal, n_params);

  LinearFit fit;
  for (int r = 0; r < n_params; ++r) {
    double acc = 0.0;
    for (int c = 0; c < n_params; ++c) acc += ninv[static_cast<std::size_t>(r) * 3 + c] * rhs[static_cast<std::size_t>(c)];
    fit.beta[static_cast<std::size_t>(r)] = acc;
  }

  double ss = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const std::array<double, 3> x = row_at(i);
    double pred = 0.0;
    for (int r = 0; r < n_params; ++r) pred += x[static_cast<std::size_t>(r)] * fit.beta[static_cast<std::size_t>(r)];
    const double res = y[i] - pred;
    ss += res * res;

    if (!var_y.empty()) {
      // w = Ninv * x maps the point's variance into parameter space
      std::array<double, 3> w{};
      for (int r = 0; r < n_params; ++r) {
        double acc = 0.0;
        for (int c = 0; c < n_params; ++c) acc += ninv[static_cast<std::size_t>(r) * 3 + c] * x[static_cast<std::size_t>(c)];
        w[static_cast<std::size_t>(r)] = acc;
      }
      for (int r = 0; r < n_params; ++r) {
        for (int c = 0; c < n_params; ++c) {
          fit.cov[static_cast<std::size_t>(r) * 3 + c] += var_y[i] * w[static_cast<std::size_t>(r)] * w[static_cast<std::size_t>(c)];
        }
      }
    }
  }
  fit.rms_residual = std::sqrt(ss / static_cast<double>(y.size()));
  return fit;
}

}  // namespace quadtomo::detail
