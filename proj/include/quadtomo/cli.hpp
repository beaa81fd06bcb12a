#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "quadtomo/channels.hpp"
#include "quadtomo/detector.hpp"
#include "quadtomo/states.hpp"

namespace quadtomo::cli {

class config_error : public std::runtime_error {
 public:
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

class data_error : public std::runtime_error {
 public:
  explicit data_error(const std::string& what) : std::runtime_error(what) {}
};

struct StateSpec {
  std::string kind = "squeezed";  // vacuum | squeezed
  double r = 0.55;
  double phi = 0.0;
};

struct DetectorSpec {
  double alpha = 1.0;
  std::optional<double> t_noise;  // exactly one of t_noise / snr_db
  std::optional<double> snr_db;

  DetectorModel resolve() const;
};

/// Strict-schema configuration; unknown JSON keys are rejected. CLI flags
/// override file values and QUADTOMO_SEED overrides the seed field.
struct ExperimentConfig {
  std::uint64_t seed = 1;
  StateSpec state;
  DetectorSpec detector;
  double optical_eta = 1.0;
  std::size_t n_samples = 100000;
  PhaseSchedule phases = PhaseSchedule::uniform(12);
  std::optional<GridSpec> grid;  // defaults to the state-fitting rule
  std::string output_dir = "quadtomo_out";
  std::vector<double> snr_db_list;  // sweep points

  static ExperimentConfig from_json_text(const std::string& text);
  std::string to_json_text() const;

  GaussianState make_source_state() const;
  GridSpec resolve_grid(const GaussianState& state) const;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumerical = 4;

/// Entry point shared by the binary and the tests. args excludes argv[0].
int run(const std::vector<std::string>& args);

}  // namespace quadtomo::cli
