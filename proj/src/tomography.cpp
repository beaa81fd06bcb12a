#include "quadtomo/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

#include "quadtomo/errors.hpp"
#include "lsq.hpp"
#include "parallel.hpp"
#include "text_io.hpp"

namespace quadtomo {

namespace {
constexpr double kPhaseTol = 1e-9;
}

bool MarginalHistogram::uniform_bins(double* width) const noexcept {
  if (bin_edges.size() < 2) return false;
  const double w = bin_edges[1] - bin_edges[0];
  for (std::size_t i = 1; i + 1 < bin_edges.size(); ++i) {
    if (std::abs((bin_edges[i + 1] - bin_edges[i]) - w) > 1e-9 * std::abs(w)) return false;
  }
  if (width != nullptr) *width = w;
  return true;
}

double MarginalHistogram::mean() const {
  if (total == 0) throw std::invalid_argument("histogram is empty");
  double acc = 0.0;
  for (std::size_t m = 0; m < counts.size(); ++m) {
    acc += static_cast<double>(counts[m]) * 0.5 * (bin_edges[m] + bin_edges[m + 1]);
  }
  return acc / static_cast<double>(total);
}

double MarginalHistogram::variance() const {
  const double mu = mean();
  double acc = 0.0;
  for (std::size_t m = 0; m < counts.size(); ++m) {
    const double d = 0.5 * (bin_edges[m] + bin_edges[m + 1]) - mu;
    acc += static_cast<double>(counts[m]) * d * d;
  }
  double var = acc / static_cast<double>(total);
  double width = 0.0;
  if (uniform_bins(&width)) {
    // binning inflates the second moment by width^2/12
    const double corrected = var - width * width / 12.0;
    if (corrected > 0.0) var = corrected;
  }
  return var;
}

MarginalHistogram histogram(std::span<const double> samples, double theta,
                            std::size_t nbins, double lo, double hi) {
  if (nbins == 0) throw std::invalid_argument("histogram needs at least one bin");
  if (!(hi > lo)) throw std::invalid_argument("histogram range must be increasing");
  std::vector<double> edges(nbins + 1);
  const double width = (hi - lo) / static_cast<double>(nbins);
  for (std::size_t i = 0; i <= nbins; ++i) edges[i] = lo + width * static_cast<double>(i);
  edges.back() = hi;
  return histogram(samples, theta, std::move(edges));
}

MarginalHistogram histogram(std::span<const double> samples, double theta,
                            std::vector<double> edges) {
  if (samples.empty()) throw std::invalid_argument("histogram needs samples");
  if (edges.size() < 2) throw std::invalid_argument("histogram needs at least two edges");
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    if (!(edges[i + 1] > edges[i])) throw std::invalid_argument("histogram edges must increase");
  }

  MarginalHistogram hist;
  hist.theta = theta;
  hist.bin_edges = std::move(edges);
  hist.counts.assign(hist.bin_edges.size() - 1, 0);
  for (double x : samples) {
    if (x < hist.bin_edges.front() || x > hist.bin_edges.back()) {
      ++hist.overflow;
      continue;
    }
    auto it = std::upper_bound(hist.bin_edges.begin(), hist.bin_edges.end(), x);
    std::size_t idx = static_cast<std::size_t>(it - hist.bin_edges.begin());
    idx = idx == 0 ? 0 : idx - 1;
    if (idx >= hist.counts.size()) idx = hist.counts.size() - 1;  // x == last edge
    ++hist.counts[idx];
    ++hist.total;
  }
  if (hist.total == 0) {
    throw std::invalid_argument("every sample fell outside the histogram range");
  }
  return hist;
}

double SampledDensity::integral() const noexcept {
  if (values.size() < 2) return 0.0;
  double acc = 0.5 * (values.front() + values.back());
  for (std::size_t i = 1; i + 1 < values.size(); ++i) acc += values[i];
  return acc * step;
}

double SampledDensity::mean() const noexcept {
  if (values.size() < 2) return 0.0;
  double norm = 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double w = (i == 0 || i + 1 == values.size()) ? 0.5 : 1.0;
    norm += w * values[i];
    acc += w * values[i] * x_at(i);
  }
  return acc / norm;
}

double SampledDensity::variance() const noexcept {
  if (values.size() < 2) return 0.0;
  const double mu = mean();
  double norm = 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double w = (i == 0 || i + 1 == values.size()) ? 0.5 : 1.0;
    const double d = x_at(i) - mu;
    norm += w * values[i];
    acc += w * values[i] * d * d;
  }
  return acc / norm;
}

namespace {

inline double cubic_interp(double p0, double p1, double p2, double p3, double t) noexcept {
  const double a = -p0 + 3.0 * p1 - 3.0 * p2 + p3;
  const double b = 2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3;
  const double c = p2 - p0;
  return p1 + 0.5 * t * (c + t * (b + t * a));
}

// Separable Catmull-Rom sample on the cell-center lattice; zero outside its
// hull. Cubic rather than bilinear so projection moments are not inflated by
// the interpolation stencil.
double sample_grid(const WignerGrid& grid, double x, double p) {
  const GridSpec& spec = grid.spec();
  const double fx = (x - spec.x_min) / spec.dx() - 0.5;
  const double fp = (p - spec.p_min) / spec.dy() - 0.5;
  if (fx < 0.0 || fp < 0.0 || fx > spec.nx - 1 || fp > spec.ny - 1) return 0.0;
  const int i0 = std::min(static_cast<int>(fx), spec.nx - 2);
  const int j0 = std::min(static_cast<int>(fp), spec.ny - 2);
  const double tx = fx - i0;
  const double tp = fp - j0;
  auto value = [&](int i, int j) {
    return (i < 0 || j < 0 || i >= spec.nx || j >= spec.ny) ? 0.0 : grid.at(i, j);
  };
  double rows[4];
  for (int di = -1; di <= 2; ++di) {
    rows[di + 1] = cubic_interp(value(i0 + di, j0 - 1), value(i0 + di, j0),
                                value(i0 + di, j0 + 1), value(i0 + di, j0 + 2), tp);
  }
  return cubic_interp(rows[0], rows[1], rows[2], rows[3], tx);
}

}  // namespace

SampledDensity radon_project(const WignerGrid& grid, double theta, double step) {
  const GridSpec& spec = grid.spec();
  const double min_cell = std::min(spec.dx(), spec.dy());
  if (step <= 0.0) step = 0.5 * min_cell;
  if (step > 2.0 * min_cell) {
    throw resolution_error("projection sampling step exceeds two grid cells");
  }

  const double c = std::cos(theta);
  const double s = std::sin(theta);
  double u_min = 0.0, u_max = 0.0, v_min = 0.0, v_max = 0.0;
  bool first = true;
  for (double x : {spec.x_min, spec.x_max}) {
    for (double p : {spec.p_min, spec.p_max}) {
      const double u = x * c + p * s;
      const double v = -x * s + p * c;
      if (first) {
        u_min = u_max = u;
        v_min = v_max = v;
        first = false;
      } else {
        u_min = std::min(u_min, u);
        u_max = std::max(u_max, u);
        v_min = std::min(v_min, v);
        v_max = std::max(v_max, v);
      }
    }
  }

  const std::size_t n_u = static_cast<std::size_t>(std::max(spec.nx, spec.ny));
  const double du = (u_max - u_min) / static_cast<double>(n_u);
  const std::size_t n_v = static_cast<std::size_t>(std::ceil((v_max - v_min) / step)) + 1;

  SampledDensity density;
  density.lo = u_min + 0.5 * du;
  density.step = du;
  density.values.assign(n_u, 0.0);
  for (std::size_t k = 0; k < n_u; ++k) {
    const double u = density.x_at(k);
    double acc = 0.0;
    for (std::size_t j = 0; j < n_v; ++j) {
      const double v = v_min + step * static_cast<double>(j);
      const double w = (j == 0 || j + 1 == n_v) ? 0.5 : 1.0;
      acc += w * sample_grid(grid, u * c - v * s, u * s + v * c);
    }
    density.values[k] = acc * step;
  }
  return density;
}

namespace {

struct CommonBinning {
  double lo = 0.0;
  double width = 0.0;
  std::size_t nbins = 0;
};

CommonBinning validate_reconstruction_input(const std::vector<MarginalHistogram>& histograms) {
  if (histograms.empty()) throw std::invalid_argument("reconstruction needs histograms");
  std::set<double> distinct;
  for (const auto& h : histograms) {
    if (h.theta < -kPhaseTol || h.theta >= std::numbers::pi + kPhaseTol) {
      throw std::invalid_argument("reconstruction phases must lie in [0, pi)");
    }
    if (h.total < 1000) {
      throw std::invalid_argument("each histogram needs at least 1000 samples");
    }
    distinct.insert(std::round(h.theta / kPhaseTol) * kPhaseTol);
  }
  if (distinct.size() < 8) {
    throw std::invalid_argument("reconstruction needs at least 8 distinct phases");
  }

  CommonBinning binning;
  const auto& ref = histograms.front().bin_edges;
  for (const auto& h : histograms) {
    if (h.bin_edges.size() != ref.size()) {
      throw std::invalid_argument("histograms have inconsistent bin supports");
    }
    for (std::size_t i = 0; i < ref.size(); ++i) {
      if (std::abs(h.bin_edges[i] - ref[i]) > 1e-9 * (1.0 + std::abs(ref[i]))) {
        throw std::invalid_argument("histograms have inconsistent bin supports");
      }
    }
  }
  double width = 0.0;
  if (!histograms.front().uniform_bins(&width)) {
    throw std::invalid_argument("reconstruction needs uniform bin widths");
  }
  binning.lo = ref.front();
  binning.width = width;
  binning.nbins = histograms.front().bins();
  return binning;
}

}  // namespace

WignerGrid inverse_radon(const std::vector<MarginalHistogram>& histograms,
                         const GridSpec& spec, unsigned threads) {
  const CommonBinning binning = validate_reconstruction_input(histograms);
  spec.validate();

  // Every back-projected point queries the filtered projection at
  // s = x cos(theta) + p sin(theta); the filtered projection must cover that
  // whole range, not just the measured support, because the ramp filter puts
  // slowly decaying negative tails outside it. Truncating them there biases
  // the reconstructed moments upward.
  const double w = binning.width;
  double s_reach = 0.0;
  for (double x : {spec.x_min, spec.x_max}) {
    for (double p : {spec.p_min, spec.p_max}) {
      s_reach = std::max(s_reach, std::hypot(x, p));
    }
  }
  const double support_half = 0.5 * w * static_cast<double>(binning.nbins);
  const double support_mid = binning.lo + support_half;
  const std::size_t pad =
      static_cast<std::size_t>(std::max(0.0, std::ceil((s_reach - (support_half - std::abs(support_mid))) / w))) + 2;
  const std::size_t n_ext = binning.nbins + 2 * pad;

  // Ramp filter sampled at bin offsets, hard cutoff at the binning Nyquist
  // frequency pi/width: zero at even offsets, -2/(pi m^2 w^2) at odd ones.
  std::vector<double> kernel(n_ext, 0.0);
  kernel[0] = std::numbers::pi / (2.0 * w * w);
  for (std::size_t m = 1; m < kernel.size(); ++m) {
    if (m % 2 == 1) kernel[m] = -2.0 / (std::numbers::pi * static_cast<double>(m * m) * w * w);
  }

  // order phases ascending so accumulation order is reproducible
  std::vector<std::size_t> order(histograms.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return histograms[a].theta < histograms[b].theta;
  });

  struct FilteredProjection {
    double cos_t = 0.0;
    double sin_t = 0.0;
    std::vector<double> values;  // on the padded lattice
  };
  std::vector<FilteredProjection> filtered(histograms.size());
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    const MarginalHistogram& h = histograms[order[rank]];
    std::vector<double> density(binning.nbins);
    for (std::size_t m = 0; m < binning.nbins; ++m) {
      density[m] = static_cast<double>(h.counts[m]) / (static_cast<double>(h.total) * w);
    }
    FilteredProjection& proj = filtered[rank];
    proj.cos_t = std::cos(h.theta);
    proj.sin_t = std::sin(h.theta);
    proj.values.assign(n_ext, 0.0);
    for (std::size_t i = 0; i < n_ext; ++i) {
      double acc = 0.0;
      for (std::size_t m = 0; m < binning.nbins; ++m) {
        const std::size_t mp = m + pad;
        const std::size_t off = i > mp ? i - mp : mp - i;
        acc += density[m] * kernel[off];
      }
      proj.values[i] = acc * w;
    }
  }

  const double s_first = binning.lo + 0.5 * w - w * static_cast<double>(pad);
  const double weight = 0.5 / static_cast<double>(histograms.size());
  // Points outside the inscribed disk of the measured support are not
  // determined by the projections; they carry only few-angle streaks, so they
  // are masked to zero.
  const double mask_radius = support_half;
  WignerGrid grid(spec);
  detail::parallel_ranges(static_cast<std::size_t>(spec.nx), threads,
                          [&](std::size_t begin, std::size_t end) {
                            for (std::size_t i = begin; i < end; ++i) {
                              const double x = spec.x_center(static_cast<int>(i));
                              for (int j = 0; j < spec.ny; ++j) {
                                const double p = spec.p_center(j);
                                const double px = x - support_mid;
                                const double pp = p - support_mid;
                                if (px * px + pp * pp > mask_radius * mask_radius) continue;
                                double acc = 0.0;
                                for (const FilteredProjection& proj : filtered) {
                                  const double s = x * proj.cos_t + p * proj.sin_t;
                                  const double f = (s - s_first) / w;
                                  if (f < 0.0 || f > static_cast<double>(n_ext - 1)) continue;
                                  const std::size_t m = std::min<std::size_t>(
                                      static_cast<std::size_t>(f), n_ext - 2);
                                  const double t = f - static_cast<double>(m);
                                  acc += (1.0 - t) * proj.values[m] + t * proj.values[m + 1];
                                }
                                grid.at(static_cast<int>(i), j) = weight * acc;
                              }
                            }
                          });
  return grid;
}

WignerGrid inverse_radon(const std::vector<MarginalHistogram>& histograms, unsigned threads) {
  const CommonBinning binning = validate_reconstruction_input(histograms);
  const double lo = binning.lo;
  const double hi = binning.lo + binning.width * static_cast<double>(binning.nbins);
  GridSpec spec{lo, hi, lo, hi, static_cast<int>(binning.nbins), static_cast<int>(binning.nbins)};
  return inverse_radon(histograms, spec, threads);
}

GaussianState FittedState::to_state() const {
  if (!(cov.xx > 0.0) || !(cov.det() > 0.0) || cov.det() < 0.25 - 1e-12) {
    throw consistency_error("fitted covariance is not an admissible state covariance");
  }
  return GaussianState{mean, cov};
}

FittedState fit_gaussian_state(const std::vector<MarginalHistogram>& histograms) {
  if (histograms.empty()) throw std::invalid_argument("fit needs histograms");
  std::set<double> distinct;
  for (const auto& h : histograms) {
    double folded = std::fmod(h.theta, std::numbers::pi);
    if (folded < 0.0) folded += std::numbers::pi;
    distinct.insert(std::round(folded / kPhaseTol) * kPhaseTol);
  }
  if (distinct.size() < 3) {
    throw std::invalid_argument("fit needs at least 3 distinct phases modulo pi");
  }

  const std::size_t n = histograms.size();
  std::vector<double> theta(n), v(n), var_v(n), m(n), var_m(n);
  for (std::size_t i = 0; i < n; ++i) {
    theta[i] = histograms[i].theta;
    v[i] = histograms[i].variance();
    m[i] = histograms[i].mean();
    const double cnt = static_cast<double>(histograms[i].total);
    var_v[i] = 2.0 * v[i] * v[i] / cnt;
    var_m[i] = v[i] / cnt;
  }

  // variance(theta) = A + B cos(2 theta) + C sin(2 theta)
  const detail::LinearFit vfit = detail::fit_linear(
      v, var_v, 3, [&](std::size_t i) {
        return std::array<double, 3>{1.0, std::cos(2.0 * theta[i]), std::sin(2.0 * theta[i])};
      });
  // mean(theta) = mx cos(theta) + mp sin(theta)
  const detail::LinearFit mfit = detail::fit_linear(
      m, var_m, 2, [&](std::size_t i) {
        return std::array<double, 3>{std::cos(theta[i]), std::sin(theta[i]), 0.0};
      });

  FittedState fitted;
  fitted.mean = Vec2{mfit.beta[0], mfit.beta[1]};
  fitted.mean_sigma = Vec2{std::sqrt(std::max(0.0, mfit.cov[0])), std::sqrt(std::max(0.0, mfit.cov[4]))};
  const double a = vfit.beta[0];
  const double b = vfit.beta[1];
  const double c = vfit.beta[2];
  fitted.cov = Mat2Sym{a + b, c, a - b};
  const double var_a = vfit.cov[0];
  const double var_b = vfit.cov[4];
  const double cov_ab = vfit.cov[1];
  fitted.cov_sigma = Mat2Sym{std::sqrt(std::max(0.0, var_a + var_b + 2.0 * cov_ab)),
                             std::sqrt(std::max(0.0, vfit.cov[8])),
                             std::sqrt(std::max(0.0, var_a + var_b - 2.0 * cov_ab))};
  if (!(fitted.cov.xx > 0.0) || !(fitted.cov.det() > 0.0)) {
    throw consistency_error("fitted covariance is degenerate");
  }
  fitted.heisenberg_ok = fitted.cov.det() >= 0.25 - 1e-12;
  return fitted;
}

void save_histogram(const std::string& path, const MarginalHistogram& hist) {
  std::string out;
  out += "# theta_rad: " + detail::format_double(hist.theta) + "\n";
  out += "# total: " + std::to_string(hist.total) + "\n";
  out += "# overflow: " + std::to_string(hist.overflow) + "\n";
  out += "bin_lo,bin_hi,count\n";
  for (std::size_t m = 0; m < hist.counts.size(); ++m) {
    out += detail::format_double(hist.bin_edges[m]);
    out += ',';
    out += detail::format_double(hist.bin_edges[m + 1]);
    out += ',';
    out += std::to_string(hist.counts[m]);
    out += '\n';
  }
  detail::write_text_file(path, out);
}

MarginalHistogram load_histogram(const std::string& path) {
  std::istringstream in(detail::read_text_file(path));
  std::string line;
  auto next_line = [&]() {
    if (!std::getline(in, line)) throw std::runtime_error("truncated histogram file: " + path);
    return line;
  };
  auto header_value = [&](const std::string& key) {
    const std::string prefix = "# " + key + ": ";
    const std::string text = next_line();
    if (text.rfind(prefix, 0) != 0) throw std::runtime_error("expected '" + prefix + "...' in " + path);
    return text.substr(prefix.size());
  };

  MarginalHistogram hist;
  hist.theta = detail::parse_double(header_value("theta_rad"), path);
  hist.total = std::stoull(header_value("total"));
  hist.overflow = std::stoull(header_value("overflow"));
  if (next_line() != "bin_lo,bin_hi,count") throw std::runtime_error("expected column header in " + path);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string lo_s, hi_s, count_s;
    if (!std::getline(row, lo_s, ',') || !std::getline(row, hi_s, ',') || !std::getline(row, count_s)) {
      throw std::runtime_error("bad data row in " + path);
    }
    const double lo = detail::parse_double(lo_s, path);
    const double hi = detail::parse_double(hi_s, path);
    if (hist.bin_edges.empty()) {
      hist.bin_edges.push_back(lo);
    } else if (std::abs(hist.bin_edges.back() - lo) > 1e-12 * (1.0 + std::abs(lo))) {
      throw std::runtime_error("non-contiguous bins in " + path);
    }
    hist.bin_edges.push_back(hi);
    hist.counts.push_back(std::stoull(count_s));
  }
  if (hist.counts.empty()) throw std::runtime_error("histogram file has no bins: " + path);
  std::uint64_t total = 0;
  for (auto c : hist.counts) total += c;
  if (total != hist.total) throw std::runtime_error("count total mismatch in " + path);
  return hist;
}

}  // namespace quadtomo
