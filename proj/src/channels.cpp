#include "quadtomo/channels.hpp"

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "json.hpp"
#include "quadtomo/errors.hpp"
#include "parallel.hpp"

namespace quadtomo {

namespace {

constexpr double kKernelReach = 8.0;   // kernel support, in standard deviations
constexpr int kMaxRefine = 4096;

// Catmull-Rom value at fraction t in [0,1) between p1 and p2.
inline double cubic_interp(double p0, double p1, double p2, double p3, double t) noexcept {
  const double a = -p0 + 3.0 * p1 - 3.0 * p2 + p3;
  const double b = 2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3;
  const double c = p2 - p0;
  return p1 + 0.5 * t * (c + t * (b + t * a));
}

// One axis of the rescale-and-blur map,
//   g(x_i) = integral f(u) * N(x_i - scale*u; sigma2) du,
// with f the cubic interpolant of the samples (zero outside the axis range)
// and both x_i and u on the cell-center lattice c_k = origin + (k+1/2)*step.
// When the kernel is narrower than the sampling step the source lattice is
// refined until the quadrature resolves it.
class AxisBlur {
 public:
  AxisBlur(double origin, double step, int n, double scale, double sigma2)
      : step_(step), scale_(scale), n_(n) {
    const double sigma = std::sqrt(sigma2);
    const int refine = static_cast<int>(std::ceil(2.0 * step * scale / sigma));
    if (refine > kMaxRefine) {
      throw resolution_error("blur kernel is too narrow for this grid resolution");
    }
    refine_ = refine < 1 ? 1 : refine;
    fine_step_ = step_ / refine_;
    first_center_ = origin + 0.5 * step_;
    sigma_ = sigma;
    inv_two_sigma2_ = 0.5 / sigma2;
    norm_ = fine_step_ / (sigma * std::sqrt(2.0 * std::numbers::pi));
    fine_count_ = static_cast<std::size_t>(n_ - 1) * refine_ + 1;
  }

  void apply(const double* f, std::ptrdiff_t stride_in, double* g, std::ptrdiff_t stride_out) const {
    // refined source values
    std::vector<double> fine(fine_count_);
    if (refine_ == 1) {
      for (int j = 0; j < n_; ++j) fine[static_cast<std::size_t>(j)] = f[j * stride_in];
    } else {
      for (std::size_t k = 0; k < fine_count_; ++k) {
        const int j = static_cast<int>(k / static_cast<std::size_t>(refine_));
        const int m = static_cast<int>(k % static_cast<std::size_t>(refine_));
        if (m == 0) {
          fine[k] = f[j * stride_in];
          continue;
        }
        const double p0 = j > 0 ? f[(j - 1) * stride_in] : 0.0;
        const double p1 = f[j * stride_in];
        const double p2 = j + 1 < n_ ? f[(j + 1) * stride_in] : 0.0;
        const double p3 = j + 2 < n_ ? f[(j + 2) * stride_in] : 0.0;
        fine[k] = cubic_interp(p0, p1, p2, p3, static_cast<double>(m) / refine_);
      }
    }

    const double reach = kKernelReach * sigma_;
    for (int i = 0; i < n_; ++i) {
      const double x = first_center_ + i * step_;
      const double t_lo = (x - reach) / scale_;
      const double t_hi = (x + reach) / scale_;
      std::ptrdiff_t k_lo = static_cast<std::ptrdiff_t>(std::ceil((t_lo - first_center_) / fine_step_));
      std::ptrdiff_t k_hi = static_cast<std::ptrdiff_t>(std::floor((t_hi - first_center_) / fine_step_));
      if (k_lo < 0) k_lo = 0;
      if (k_hi >= static_cast<std::ptrdiff_t>(fine_count_)) k_hi = static_cast<std::ptrdiff_t>(fine_count_) - 1;
      double acc = 0.0;
      for (std::ptrdiff_t k = k_lo; k <= k_hi; ++k) {
        const double t = first_center_ + static_cast<double>(k) * fine_step_;
        const double d = x - scale_ * t;
        acc += fine[static_cast<std::size_t>(k)] * std::exp(-d * d * inv_two_sigma2_);
      }
      g[i * stride_out] = acc * norm_;
    }
  }

 private:
  double step_;
  double scale_;
  int n_;
  int refine_ = 1;
  double fine_step_ = 0.0;
  double first_center_ = 0.0;
  double sigma_ = 0.0;
  double inv_two_sigma2_ = 0.0;
  double norm_ = 0.0;
  std::size_t fine_count_ = 0;
};

// Separable application over both grid axes.
WignerGrid scaled_gaussian_channel(const WignerGrid& in, double scale, double sigma2, unsigned threads) {
  const GridSpec& spec = in.spec();
  const AxisBlur blur_p(spec.p_min, spec.dy(), spec.ny, scale, sigma2);
  const AxisBlur blur_x(spec.x_min, spec.dx(), spec.nx, scale, sigma2);

  WignerGrid mid(spec);
  detail::parallel_ranges(static_cast<std::size_t>(spec.nx), threads,
                          [&](std::size_t begin, std::size_t end) {
                            for (std::size_t i = begin; i < end; ++i) {
                              const double* row = in.values().data() + i * static_cast<std::size_t>(spec.ny);
                              double* out = mid.values().data() + i * static_cast<std::size_t>(spec.ny);
                              blur_p.apply(row, 1, out, 1);
                            }
                          });

  WignerGrid out(spec);
  detail::parallel_ranges(static_cast<std::size_t>(spec.ny), threads,
                          [&](std::size_t begin, std::size_t end) {
                            for (std::size_t j = begin; j < end; ++j) {
                              const double* col = mid.values().data() + j;
                              double* dst = out.values().data() + j;
                              blur_x.apply(col, spec.ny, dst, spec.ny);
                            }
                          });
  return out;
}

}  // namespace

DetectorModel::DetectorModel(double alpha, double t_noise) : alpha_(alpha), t_noise_(t_noise) {
  if (!(alpha > 0.0)) throw std::invalid_argument("detector gain must be positive");
  if (t_noise < 0.0) throw std::invalid_argument("electronic-noise parameter must be nonnegative");
}

double DetectorModel::alpha_prime() const noexcept {
  return std::sqrt(alpha_ * alpha_ + t_noise_);
}

double DetectorModel::snr() const noexcept {
  if (t_noise_ == 0.0) return std::numeric_limits<double>::infinity();
  return (alpha_ * alpha_ + t_noise_) / t_noise_;
}

std::string DetectorModel::to_json() const {
  return nlohmann::json{{"alpha", alpha_}, {"t_noise", t_noise_}}.dump();
}

DetectorModel DetectorModel::from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  return DetectorModel(j.at("alpha").get<double>(), j.at("t_noise").get<double>());
}

GaussianState apply_loss_cov(const GaussianState& state, double eta) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("transmission must lie in [0, 1]");
  const double noise = 0.5 * (1.0 - eta);
  const Mat2Sym& cov = state.cov();
  const double root = std::sqrt(eta);
  return GaussianState{Vec2{root * state.mean().x, root * state.mean().p},
                       Mat2Sym{eta * cov.xx + noise, eta * cov.xp, eta * cov.pp + noise}};
}

WignerGrid apply_loss_wigner(const WignerGrid& grid, double eta, unsigned threads) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("transmission must lie in [0, 1]");
  if (eta == 1.0) return grid;
  if (eta == 0.0) return wigner_eval(vacuum(), grid.spec(), threads);
  return scaled_gaussian_channel(grid, std::sqrt(eta), 0.5 * (1.0 - eta), threads);
}

WignerGrid apply_en_wigner(const WignerGrid& grid, const DetectorModel& detector, unsigned threads) {
  if (detector.t_noise() == 0.0) return grid;
  const double alpha_prime = detector.alpha_prime();
  const double scale = detector.alpha() / alpha_prime;
  const double sigma2 = detector.t_noise() / (2.0 * alpha_prime * alpha_prime);
  return scaled_gaussian_channel(grid, scale, sigma2, threads);
}

MarginalDensity en_vacuum_distribution(const DetectorModel& detector) {
  MarginalDensity density;
  density.theta = 0.0;
  density.mean = 0.0;
  density.variance = 0.5 * (detector.alpha() * detector.alpha() + detector.t_noise());
  return density;
}

double calibration_factor(std::span<const double> vacuum_samples) {
  if (vacuum_samples.size() < 2) {
    throw std::invalid_argument("calibration needs at least two samples");
  }
  double sum_sq = 0.0;
  for (double v : vacuum_samples) sum_sq += v * v;
  const double mean_sq = sum_sq / static_cast<double>(vacuum_samples.size());
  if (!(mean_sq > 0.0)) throw std::invalid_argument("calibration samples have zero power");
  return std::sqrt(2.0 * mean_sq);
}

double equivalent_efficiency_from_gain(const DetectorModel& detector) {
  const double a2 = detector.alpha() * detector.alpha();
  return a2 / (a2 + detector.t_noise());
}

double snr(const DetectorModel& detector) {
  return detector.snr();
}

double equivalent_efficiency_from_snr(double s) {
  if (std::isinf(s) && s > 0.0) return 1.0;
  if (!(s > 1.0)) throw std::invalid_argument("signal-to-noise ratio must exceed 1");
  return (s - 1.0) / s;
}

}  // namespace quadtomo
