#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "quadtomo/channels.hpp"
#include "quadtomo/rng.hpp"
#include "quadtomo/states.hpp"

namespace quadtomo {

enum class TraceKind { ElectronicNoise, ShotNoise, Signal };

std::string to_string(TraceKind kind);
TraceKind trace_kind_from_string(const std::string& name);

/// Local-oscillator phase as a function of sample index.
struct PhaseSchedule {
  enum class Kind { Constant, Ramp, List };

  Kind kind = Kind::Constant;
  double theta = 0.0;
  std::vector<double> values;

  static PhaseSchedule constant(double theta);
  /// 2*pi*i/n over the trace.
  static PhaseSchedule ramp();
  /// Explicit phases, cycled over the trace.
  static PhaseSchedule list(std::vector<double> values);
  /// k phases evenly spaced over [0, pi).
  static PhaseSchedule uniform(std::size_t k);

  double at(std::size_t i, std::size_t n) const;
};

/// Recorded detector-output samples (volts) with their phase schedule.
struct QuadratureTrace {
  TraceKind kind = TraceKind::ElectronicNoise;
  std::vector<double> phases;  // one entry, or one per sample
  std::vector<double> samples;
  std::uint64_t seed = 0;
  DetectorModel detector{1.0, 0.0};

  double phase_at(std::size_t i) const { return phases.size() == 1 ? phases[0] : phases.at(i); }
  double mean_square() const;
};

/// One draw of the quadrature X*cos(theta) + P*sin(theta). Consumes two
/// counter values.
double sample_quadrature(const GaussianState& state, double theta, CounterRng& rng);

/// V = alpha * x + e with e zero-mean Gaussian of variance t_noise / 2.
/// Consumes two counter values.
double measure_voltage(const DetectorModel& detector, double x, CounterRng& rng);

/// Generate a trace of n samples. ElectronicNoise and ShotNoise reject a
/// source state; Signal requires one. Sample i occupies counters [4i, 4i+4)
/// of the stream named by the trace kind, so generation is bit-identical for
/// any thread count.
QuadratureTrace acquire_trace(const DetectorModel& detector,
                              const std::optional<GaussianState>& source,
                              TraceKind kind,
                              const PhaseSchedule& schedule,
                              std::size_t n,
                              std::uint64_t seed,
                              unsigned threads = 1);

/// Ratio of mean squares: shot trace over electronic-noise trace.
double estimate_snr(const QuadratureTrace& shot, const QuadratureTrace& en);

/// Divide every sample by the calibration factor, producing quadrature units.
std::vector<double> rescale_trace(const QuadratureTrace& trace, double alpha_prime);

/// CSV with '#'-prefixed header lines (kind, seed, alpha, t_noise) and columns
/// phase_rad,volts. Round-trips bit-exactly.
std::string trace_to_csv(const QuadratureTrace& trace);
void save_trace(const std::string& path, const QuadratureTrace& trace);
QuadratureTrace load_trace(const std::string& path);

}  // namespace quadtomo
