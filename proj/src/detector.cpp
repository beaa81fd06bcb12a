#include "quadtomo/detector.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "parallel.hpp"
#include "text_io.hpp"

namespace quadtomo {

std::string to_string(TraceKind kind) {
  switch (kind) {
    case TraceKind::ElectronicNoise: return "electronic_noise";
    case TraceKind::ShotNoise: return "shot_noise";
    case TraceKind::Signal: return "signal";
  }
  throw std::logic_error("unreachable trace kind");
}

TraceKind trace_kind_from_string(const std::string& name) {
  if (name == "electronic_noise") return TraceKind::ElectronicNoise;
  if (name == "shot_noise") return TraceKind::ShotNoise;
  if (name == "signal") return TraceKind::Signal;
  throw std::invalid_argument("unknown trace kind: " + name);
}

PhaseSchedule PhaseSchedule::constant(double theta) {
  PhaseSchedule s;
  s.kind = Kind::Constant;
  s.theta = theta;
  return s;
}

PhaseSchedule PhaseSchedule::ramp() {
  PhaseSchedule s;
  s.kind = Kind::Ramp;
  return s;
}

PhaseSchedule PhaseSchedule::list(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("phase list must not be empty");
  PhaseSchedule s;
  s.kind = Kind::List;
  s.values = std::move(values);
  return s;
}

PhaseSchedule PhaseSchedule::uniform(std::size_t k) {
  if (k == 0) throw std::invalid_argument("phase count must be positive");
  std::vector<double> v(k);
  for (std::size_t i = 0; i < k; ++i) v[i] = std::numbers::pi * static_cast<double>(i) / static_cast<double>(k);
  return list(std::move(v));
}

double PhaseSchedule::at(std::size_t i, std::size_t n) const {
  switch (kind) {
    case Kind::Constant: return theta;
    case Kind::Ramp: return 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
    case Kind::List: return values[i % values.size()];
  }
  throw std::logic_error("unreachable schedule kind");
}

double QuadratureTrace::mean_square() const {
  if (samples.empty()) throw std::invalid_argument("trace has no samples");
  double sum = 0.0;
  for (double v : samples) sum += v * v;
  return sum / static_cast<double>(samples.size());
}

double sample_quadrature(const GaussianState& state, double theta, CounterRng& rng) {
  const MarginalDensity density = marginal(state, theta);
  return density.mean + std::sqrt(density.variance) * rng.next_normal();
}

double measure_voltage(const DetectorModel& detector, double x, CounterRng& rng) {
  const double noise = std::sqrt(0.5 * detector.t_noise()) * rng.next_normal();
  return detector.alpha() * x + noise;
}

QuadratureTrace acquire_trace(const DetectorModel& detector,
                              const std::optional<GaussianState>& source,
                              TraceKind kind,
                              const PhaseSchedule& schedule,
                              std::size_t n,
                              std::uint64_t seed,
                              unsigned threads) {
  if (n == 0) throw std::invalid_argument("trace length must be positive");
  if (kind == TraceKind::Signal && !source.has_value()) {
    throw std::invalid_argument("signal trace needs a source state");
  }
  if (kind != TraceKind::Signal && source.has_value()) {
    throw std::invalid_argument(to_string(kind) + " trace takes no source state");
  }

  QuadratureTrace trace;
  trace.kind = kind;
  trace.seed = seed;
  trace.detector = detector;
  trace.samples.assign(n, 0.0);
  if (schedule.kind == PhaseSchedule::Kind::Constant) {
    trace.phases.assign(1, schedule.theta);
  } else {
    trace.phases.resize(n);
    for (std::size_t i = 0; i < n; ++i) trace.phases[i] = schedule.at(i, n);
  }

  const std::uint64_t stream = CounterRng::stream_id(to_string(kind));
  const GaussianState vac = vacuum();
  const GaussianState* state = nullptr;
  if (kind == TraceKind::ShotNoise) state = &vac;
  if (kind == TraceKind::Signal) state = &*source;

  // Sample i owns counters [4i, 4i+2) for the optical draw and [4i+2, 4i+4)
  // for the electronic noise.
  detail::parallel_ranges(n, threads, [&](std::size_t begin, std::size_t end) {
    CounterRng rng(seed, stream);
    for (std::size_t i = begin; i < end; ++i) {
      double volts = 0.0;
      if (state != nullptr) {
        rng.skip_to(4 * i);
        volts = detector.alpha() * sample_quadrature(*state, schedule.at(i, n), rng);
      }
      rng.skip_to(4 * i + 2);
      volts += std::sqrt(0.5 * detector.t_noise()) * rng.next_normal();
      trace.samples[i] = volts;
    }
  });
  return trace;
}

double estimate_snr(const QuadratureTrace& shot, const QuadratureTrace& en) {
  const double en_power = en.mean_square();
  if (!(en_power > 0.0)) throw std::invalid_argument("electronic-noise trace has zero power");
  return shot.mean_square() / en_power;
}

std::vector<double> rescale_trace(const QuadratureTrace& trace, double alpha_prime) {
  if (!(alpha_prime > 0.0)) throw std::invalid_argument("calibration factor must be positive");
  std::vector<double> out(trace.samples.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = trace.samples[i] / alpha_prime;
  return out;
}

std::string trace_to_csv(const QuadratureTrace& trace) {
  std::string out;
  out.reserve(trace.samples.size() * 24 + 128);
  out += "# kind: " + to_string(trace.kind) + "\n";
  out += "# seed: " + std::to_string(trace.seed) + "\n";
  out += "# alpha: " + detail::format_double(trace.detector.alpha()) + "\n";
  out += "# t_noise: " + detail::format_double(trace.detector.t_noise()) + "\n";
  out += "phase_rad,volts\n";
  for (std::size_t i = 0; i < trace.samples.size(); ++i) {
    out += detail::format_double(trace.phase_at(i));
    out += ',';
    out += detail::format_double(trace.samples[i]);
    out += '\n';
  }
  return out;
}

void save_trace(const std::string& path, const QuadratureTrace& trace) {
  detail::write_text_file(path, trace_to_csv(trace));
}

namespace {

std::string header_value(const std::string& line, const std::string& key, const std::string& path) {
  const std::string prefix = "# " + key + ": ";
  if (line.rfind(prefix, 0) != 0) {
    throw std::runtime_error("expected '" + prefix + "...' in " + path);
  }
  return line.substr(prefix.size());
}

}  // namespace

QuadratureTrace load_trace(const std::string& path) {
  std::istringstream in(detail::read_text_file(path));
  std::string line;
  auto next_line = [&]() {
    if (!std::getline(in, line)) throw std::runtime_error("truncated trace file: " + path);
    return line;
  };

  QuadratureTrace trace;
  trace.kind = trace_kind_from_string(header_value(next_line(), "kind", path));
  trace.seed = std::stoull(header_value(next_line(), "seed", path));
  const double alpha = detail::parse_double(header_value(next_line(), "alpha", path), path);
  const double t_noise = detail::parse_double(header_value(next_line(), "t_noise", path), path);
  trace.detector = DetectorModel(alpha, t_noise);
  if (next_line() != "phase_rad,volts") {
    throw std::runtime_error("expected column header in " + path);
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::size_t comma = line.find(',');
    if (comma == std::string::npos) throw std::runtime_error("bad data row in " + path);
    trace.phases.push_back(detail::parse_double(line.substr(0, comma), path));
    trace.samples.push_back(detail::parse_double(line.substr(comma + 1), path));
  }
  if (trace.samples.empty()) throw std::runtime_error("trace file has no samples: " + path);
  return trace;
}

}  // namespace quadtomo
