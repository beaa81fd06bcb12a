#include "quadtomo/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "quadtomo/analysis.hpp"
#include "quadtomo/errors.hpp"
#include "quadtomo/tomography.hpp"
#include "text_io.hpp"

namespace quadtomo::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void require_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw config_error(where + " must be a JSON object");
  for (const auto& item : obj.items()) {
    if (!allowed.contains(item.key())) {
      throw config_error("unknown key '" + item.key() + "' in " + where);
    }
  }
}

double snr_db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

json detector_to_json(const DetectorSpec& spec) {
  json j{{"alpha", spec.alpha}};
  if (spec.t_noise) j["t_noise"] = *spec.t_noise;
  if (spec.snr_db) j["snr_db"] = *spec.snr_db;
  return j;
}

json phases_to_json(const PhaseSchedule& schedule) {
  switch (schedule.kind) {
    case PhaseSchedule::Kind::Constant:
      return json{{"kind", "constant"}, {"theta", schedule.theta}};
    case PhaseSchedule::Kind::Ramp:
      return json{{"kind", "ramp"}};
    case PhaseSchedule::Kind::List:
      return json{{"kind", "list"}, {"values", schedule.values}};
  }
  throw std::logic_error("unreachable schedule kind");
}

PhaseSchedule phases_from_json(const json& j) {
  require_keys(j, "phases", {"kind", "theta", "values", "count"});
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "constant") return PhaseSchedule::constant(j.value("theta", 0.0));
  if (kind == "ramp") return PhaseSchedule::ramp();
  if (kind == "uniform") return PhaseSchedule::uniform(j.value("count", std::size_t{12}));
  if (kind == "list") {
    if (!j.contains("values")) throw config_error("phases.values is required for kind 'list'");
    return PhaseSchedule::list(j.at("values").get<std::vector<double>>());
  }
  throw config_error("phases.kind must be constant, ramp, uniform or list");
}

GridSpec grid_from_json(const json& j) {
  require_keys(j, "grid", {"x_min", "x_max", "p_min", "p_max", "nx", "ny"});
  GridSpec spec{j.at("x_min").get<double>(), j.at("x_max").get<double>(),
                j.at("p_min").get<double>(), j.at("p_max").get<double>(),
                j.at("nx").get<int>(),       j.at("ny").get<int>()};
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw config_error(e.what());
  }
  return spec;
}

}  // namespace

DetectorModel DetectorSpec::resolve() const {
  if (t_noise && snr_db) {
    throw config_error("detector takes either t_noise or snr_db, not both");
  }
  if (!(alpha > 0.0)) throw config_error("detector.alpha must be positive");
  double t = 0.1;
  if (t_noise) {
    if (*t_noise < 0.0) throw config_error("detector.t_noise must be nonnegative");
    t = *t_noise;
  } else if (snr_db) {
    const double s = snr_db_to_linear(*snr_db);
    if (!(s > 1.0)) throw config_error("detector.snr_db must exceed 0 dB");
    t = alpha * alpha / (s - 1.0);
  }
  return DetectorModel(alpha, t);
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw config_error(std::string("config is not valid JSON: ") + e.what());
  }
  require_keys(j, "config",
               {"seed", "state", "detector", "optical_eta", "n_samples", "phases", "grid",
                "output_dir", "snr_db_list"});

  ExperimentConfig config;
  if (j.contains("seed")) config.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("state")) {
    const json& s = j.at("state");
    require_keys(s, "state", {"kind", "r", "phi"});
    config.state.kind = s.value("kind", std::string("squeezed"));
    config.state.r = s.value("r", 0.55);
    config.state.phi = s.value("phi", 0.0);
    if (config.state.kind != "vacuum" && config.state.kind != "squeezed") {
      throw config_error("state.kind must be vacuum or squeezed");
    }
    if (config.state.r < 0.0) throw config_error("state.r must be nonnegative");
  }
  if (j.contains("detector")) {
    const json& d = j.at("detector");
    require_keys(d, "detector", {"alpha", "t_noise", "snr_db"});
    config.detector.alpha = d.value("alpha", 1.0);
    if (d.contains("t_noise")) config.detector.t_noise = d.at("t_noise").get<double>();
    if (d.contains("snr_db")) config.detector.snr_db = d.at("snr_db").get<double>();
  }
  if (j.contains("optical_eta")) config.optical_eta = j.at("optical_eta").get<double>();
  if (!(config.optical_eta > 0.0 && config.optical_eta <= 1.0)) {
    throw config_error("optical_eta must lie in (0, 1]");
  }
  if (j.contains("n_samples")) config.n_samples = j.at("n_samples").get<std::size_t>();
  if (config.n_samples == 0) throw config_error("n_samples must be positive");
  if (j.contains("phases")) {
    try {
      config.phases = phases_from_json(j.at("phases"));
    } catch (const std::invalid_argument& e) {
      throw config_error(e.what());
    }
  }
  if (j.contains("grid") && !j.at("grid").is_null()) config.grid = grid_from_json(j.at("grid"));
  if (j.contains("output_dir")) config.output_dir = j.at("output_dir").get<std::string>();
  if (j.contains("snr_db_list")) {
    config.snr_db_list = j.at("snr_db_list").get<std::vector<double>>();
    for (double db : config.snr_db_list) {
      if (!(snr_db_to_linear(db) > 1.0)) throw config_error("snr_db_list entries must exceed 0 dB");
    }
  }
  config.detector.resolve();  // validates the pair of fields
  return config;
}

std::string ExperimentConfig::to_json_text() const {
  json j{{"seed", seed},
         {"state", json{{"kind", state.kind}, {"r", state.r}, {"phi", state.phi}}},
         {"detector", detector_to_json(detector)},
         {"optical_eta", optical_eta},
         {"n_samples", n_samples},
         {"phases", phases_to_json(phases)},
         {"output_dir", output_dir}};
  if (grid) {
    j["grid"] = json{{"x_min", grid->x_min}, {"x_max", grid->x_max}, {"p_min", grid->p_min},
                     {"p_max", grid->p_max}, {"nx", grid->nx},       {"ny", grid->ny}};
  } else {
    j["grid"] = nullptr;
  }
  if (!snr_db_list.empty()) j["snr_db_list"] = snr_db_list;
  return j.dump(2);
}

GaussianState ExperimentConfig::make_source_state() const {
  if (state.kind == "vacuum") return vacuum();
  return squeezed_vacuum(state.r, state.phi);
}

GridSpec ExperimentConfig::resolve_grid(const GaussianState& source) const {
  return grid ? *grid : GridSpec::for_state(source);
}

namespace {

struct CommonOptions {
  std::string config_path;
  unsigned threads = 1;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> n_samples;
  std::optional<double> optical_eta;
  std::optional<std::string> output_dir;
  std::optional<std::string> state_kind;
  std::optional<double> r;
  std::optional<double> phi;
  std::optional<double> alpha;
  std::optional<double> t_noise;
  std::optional<double> snr_db;
  std::vector<double> snr_db_list;
};

void add_common_options(CLI::App* cmd, CommonOptions& opts, bool with_sweep_list) {
  cmd->add_option("--config", opts.config_path, "JSON configuration file");
  cmd->add_option("--threads", opts.threads, "worker threads (default 1)");
  cmd->add_option("--seed", opts.seed, "override the RNG seed");
  cmd->add_option("--n-samples", opts.n_samples, "samples per trace");
  cmd->add_option("--optical-eta", opts.optical_eta, "optical transmission in (0,1]");
  cmd->add_option("--output-dir", opts.output_dir, "output directory");
  cmd->add_option("--state-kind", opts.state_kind, "vacuum or squeezed");
  cmd->add_option("--r", opts.r, "squeezing parameter");
  cmd->add_option("--phi", opts.phi, "squeezing axis angle (rad)");
  cmd->add_option("--alpha", opts.alpha, "detector gain, volts per quadrature unit");
  cmd->add_option("--t-noise", opts.t_noise, "electronic-noise parameter (volts^2)");
  cmd->add_option("--snr-db", opts.snr_db, "detector SNR in dB (alternative to --t-noise)");
  if (with_sweep_list) {
    cmd->add_option("--snr-db-list", opts.snr_db_list, "sweep SNR points in dB");
  }
}

ExperimentConfig build_config(const CommonOptions& opts) {
  ExperimentConfig config;
  if (!opts.config_path.empty()) {
    std::string text;
    try {
      text = detail::read_text_file(opts.config_path);
    } catch (const std::exception& e) {
      throw config_error(e.what());
    }
    config = ExperimentConfig::from_json_text(text);
  }
  if (const char* env = std::getenv("QUADTOMO_SEED")) {
    try {
      config.seed = std::stoull(env);
    } catch (const std::exception&) {
      throw config_error("QUADTOMO_SEED is not an unsigned integer");
    }
  }
  if (opts.seed) config.seed = *opts.seed;
  if (opts.n_samples) config.n_samples = *opts.n_samples;
  if (opts.optical_eta) config.optical_eta = *opts.optical_eta;
  if (opts.output_dir) config.output_dir = *opts.output_dir;
  if (opts.state_kind) config.state.kind = *opts.state_kind;
  if (opts.r) config.state.r = *opts.r;
  if (opts.phi) config.state.phi = *opts.phi;
  if (opts.alpha) config.detector.alpha = *opts.alpha;
  if (opts.t_noise) {
    config.detector.t_noise = *opts.t_noise;
    config.detector.snr_db.reset();
  }
  if (opts.snr_db) {
    config.detector.snr_db = *opts.snr_db;
    config.detector.t_noise.reset();
  }
  if (!opts.snr_db_list.empty()) config.snr_db_list = opts.snr_db_list;

  if (config.state.kind != "vacuum" && config.state.kind != "squeezed") {
    throw config_error("state kind must be vacuum or squeezed");
  }
  if (config.state.r < 0.0) throw config_error("squeezing parameter must be nonnegative");
  if (!(config.optical_eta > 0.0 && config.optical_eta <= 1.0)) {
    throw config_error("optical_eta must lie in (0, 1]");
  }
  if (config.n_samples == 0) throw config_error("n_samples must be positive");
  for (double db : config.snr_db_list) {
    if (!(snr_db_to_linear(db) > 1.0)) throw config_error("snr_db_list entries must exceed 0 dB");
  }
  config.detector.resolve();
  return config;
}

QuadratureTrace load_trace_checked(const std::string& path) {
  try {
    return load_trace(path);
  } catch (const std::exception& e) {
    throw data_error(e.what());
  }
}

void write_checked(const std::string& path, const std::string& content) {
  try {
    detail::write_text_file(path, content);
  } catch (const std::exception& e) {
    throw data_error(e.what());
  }
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw data_error("cannot create output directory " + dir + ": " + ec.message());
}

int cmd_simulate(const CommonOptions& opts) {
  const ExperimentConfig config = build_config(opts);
  const DetectorModel detector = config.detector.resolve();
  const GaussianState source = apply_loss_cov(config.make_source_state(), config.optical_eta);

  const auto en = acquire_trace(detector, std::nullopt, TraceKind::ElectronicNoise,
                                PhaseSchedule::constant(0.0), config.n_samples, config.seed,
                                opts.threads);
  const auto shot = acquire_trace(detector, std::nullopt, TraceKind::ShotNoise,
                                  PhaseSchedule::constant(0.0), config.n_samples, config.seed,
                                  opts.threads);
  const auto signal = acquire_trace(detector, source, TraceKind::Signal, config.phases,
                                    config.n_samples, config.seed, opts.threads);

  json manifest{{"config", json::parse(config.to_json_text())},
                {"derived",
                 json{{"alpha_prime", detector.alpha_prime()},
                      {"snr_linear", detector.snr()},
                      {"snr_db", 10.0 * std::log10(detector.snr())},
                      {"eta_eq", equivalent_efficiency_from_gain(detector)}}},
                {"files", json{{"electronic_noise", "en.csv"},
                               {"shot_noise", "shot.csv"},
                               {"signal", "signal.csv"}}}};

  // render everything before touching the filesystem
  const std::string en_text = trace_to_csv(en);
  const std::string shot_text = trace_to_csv(shot);
  const std::string signal_text = trace_to_csv(signal);
  const std::string manifest_text = manifest.dump(2) + "\n";

  ensure_dir(config.output_dir);
  const fs::path dir(config.output_dir);
  write_checked((dir / "en.csv").string(), en_text);
  write_checked((dir / "shot.csv").string(), shot_text);
  write_checked((dir / "signal.csv").string(), signal_text);
  write_checked((dir / "manifest.json").string(), manifest_text);

  std::cout << "wrote en.csv, shot.csv, signal.csv, manifest.json to " << config.output_dir
            << " (seed " << config.seed << ")\n";
  return kExitOk;
}

int cmd_calibrate(const std::string& trace_path, const std::string& out_path) {
  const QuadratureTrace trace = load_trace_checked(trace_path);
  double alpha_prime = 0.0;
  try {
    alpha_prime = calibration_factor(trace.samples);
  } catch (const std::invalid_argument& e) {
    throw data_error(e.what());
  }

  // standard error from the empirical fourth moment
  const double n = static_cast<double>(trace.samples.size());
  double m2 = 0.0, m4 = 0.0;
  for (double v : trace.samples) {
    m2 += v * v;
    m4 += v * v * v * v;
  }
  m2 /= n;
  m4 /= n;
  const double var_m2 = std::max(0.0, (m4 - m2 * m2) / n);
  const double std_error = std::sqrt(var_m2) / alpha_prime;

  json report{{"trace", trace_path},
              {"n_samples", trace.samples.size()},
              {"alpha_prime", alpha_prime},
              {"std_error", std_error}};
  std::cout << "alpha_prime = " << detail::format_double(alpha_prime) << " +/- "
            << detail::format_double(std_error) << " (n = " << trace.samples.size() << ")\n";
  if (!out_path.empty()) write_checked(out_path, report.dump(2) + "\n");
  return kExitOk;
}

struct PhaseGroup {
  double theta = 0.0;
  std::vector<double> samples;
};

// Fold phases into [0, pi) with the matching sign flip of the quadrature and
// group samples per folded phase; many distinct phases (a scanned schedule)
// fall back to uniform phase bins.
std::vector<PhaseGroup> group_by_phase(const QuadratureTrace& trace,
                                       std::span<const double> rescaled,
                                       std::size_t phase_bins) {
  const double pi = std::numbers::pi;
  std::map<double, std::vector<double>> exact;
  std::vector<std::pair<double, double>> folded(rescaled.size());
  std::set<double> distinct;
  for (std::size_t i = 0; i < rescaled.size(); ++i) {
    double theta = std::fmod(trace.phase_at(i), 2.0 * pi);
    if (theta < 0.0) theta += 2.0 * pi;
    double x = rescaled[i];
    if (theta >= pi) {
      theta -= pi;
      x = -x;
    }
    folded[i] = {theta, x};
    if (distinct.size() <= 64) distinct.insert(theta);
  }

  std::vector<PhaseGroup> groups;
  if (distinct.size() <= 64) {
    for (const auto& [theta, x] : folded) exact[theta].push_back(x);
    groups.reserve(exact.size());
    for (auto& [theta, samples] : exact) {
      groups.push_back(PhaseGroup{theta, std::move(samples)});
    }
  } else {
    groups.assign(phase_bins, PhaseGroup{});
    for (std::size_t k = 0; k < phase_bins; ++k) {
      groups[k].theta = pi * (static_cast<double>(k) + 0.5) / static_cast<double>(phase_bins);
    }
    for (const auto& [theta, x] : folded) {
      auto k = static_cast<std::size_t>(theta / pi * static_cast<double>(phase_bins));
      if (k >= phase_bins) k = phase_bins - 1;
      groups[k].samples.push_back(x);
    }
    std::erase_if(groups, [](const PhaseGroup& g) { return g.samples.empty(); });
  }
  return groups;
}

int cmd_reconstruct(const CommonOptions& opts, const std::string& signal_path,
                    const std::string& shot_path, const std::string& method, std::size_t bins,
                    std::size_t phase_bins, const std::string& out_prefix) {
  if (method != "fbp" && method != "gaussfit") {
    throw config_error("method must be fbp or gaussfit");
  }
  if (bins < 8) throw config_error("need at least 8 histogram bins");

  const QuadratureTrace signal = load_trace_checked(signal_path);
  const QuadratureTrace shot = load_trace_checked(shot_path);
  double alpha_prime = 0.0;
  try {
    alpha_prime = calibration_factor(shot.samples);
  } catch (const std::invalid_argument& e) {
    throw data_error(e.what());
  }
  const std::vector<double> rescaled = rescale_trace(signal, alpha_prime);

  const std::vector<PhaseGroup> groups = group_by_phase(signal, rescaled, phase_bins);

  double max_abs = 0.0;
  for (double x : rescaled) max_abs = std::max(max_abs, std::abs(x));
  const double range = 1.05 * max_abs;

  std::vector<MarginalHistogram> hists;
  hists.reserve(groups.size());
  for (const auto& group : groups) {
    hists.push_back(histogram(group.samples, group.theta, bins, -range, range));
  }

  json report{{"signal", signal_path},
              {"shot", shot_path},
              {"method", method},
              {"alpha_prime", alpha_prime},
              {"n_phases", hists.size()},
              {"bins", bins}};
  const std::string grid_path = out_prefix + "_wigner.txt";

  WignerGrid grid{GridSpec::square(6.0, 8)};
  if (method == "fbp") {
    grid = inverse_radon(hists, opts.threads);
    const GridMoments moments = grid_moments(grid);
    report["moments"] = json{{"integral", moments.integral},
                             {"mean_x", moments.mean.x},
                             {"mean_p", moments.mean.p},
                             {"var_x", moments.cov.xx},
                             {"cov_xp", moments.cov.xp},
                             {"var_p", moments.cov.pp}};
  } else {
    const FittedState fit = fit_gaussian_state(hists);
    report["fit"] = json{{"mean_x", fit.mean.x},
                         {"mean_p", fit.mean.p},
                         {"mean_x_sigma", fit.mean_sigma.x},
                         {"mean_p_sigma", fit.mean_sigma.p},
                         {"var_x", fit.cov.xx},
                         {"cov_xp", fit.cov.xp},
                         {"var_p", fit.cov.pp},
                         {"var_x_sigma", fit.cov_sigma.xx},
                         {"cov_xp_sigma", fit.cov_sigma.xp},
                         {"var_p_sigma", fit.cov_sigma.pp},
                         {"heisenberg_ok", fit.heisenberg_ok},
                         {"marginal_var_min", fit.cov.eig_min()},
                         {"marginal_var_max", fit.cov.eig_max()}};
    const double half_extent = std::max(6.0, 6.0 * std::sqrt(2.0 * fit.cov.eig_max()));
    grid = gaussian_wigner_grid(fit.mean, fit.cov, GridSpec::square(half_extent, 256),
                                opts.threads);
  }
  report["wigner_grid"] = grid_path;

  try {
    save_wigner_grid(grid_path, grid);
  } catch (const std::exception& e) {
    throw data_error(e.what());
  }
  write_checked(out_prefix + "_report.json", report.dump(2) + "\n");
  std::cout << "wrote " << grid_path << " and " << out_prefix << "_report.json\n";
  return kExitOk;
}

int cmd_sweep(const CommonOptions& opts) {
  const ExperimentConfig config = build_config(opts);
  if (config.snr_db_list.empty()) {
    throw config_error("sweep needs snr_db_list (config) or --snr-db-list");
  }
  if (config.state.kind != "squeezed") {
    throw config_error("sweep needs a squeezed source state");
  }

  SweepConfig sweep;
  sweep.r = config.state.r;
  sweep.optical_eta = config.optical_eta;
  sweep.alpha = config.detector.alpha;
  sweep.n_per_trace = config.n_samples;
  sweep.seed = config.seed;
  sweep.threads = opts.threads;
  if (config.phases.kind == PhaseSchedule::Kind::List) {
    sweep.n_phases = config.phases.values.size();
  }
  sweep.snr_linear.reserve(config.snr_db_list.size());
  for (double db : config.snr_db_list) sweep.snr_linear.push_back(snr_db_to_linear(db));

  const std::vector<SweepRow> rows = snr_sweep_experiment(sweep);

  std::string csv = "snr_db,eta_inferred,eta_sigma,eta_predicted\n";
  json rows_json = json::array();
  for (const SweepRow& row : rows) {
    csv += detail::format_double(row.report.snr_db) + "," +
           detail::format_double(row.report.eta) + "," +
           detail::format_double(row.report.eta_sigma) + "," +
           detail::format_double(row.eta_predicted) + "\n";
    rows_json.push_back(json{{"snr_db", row.report.snr_db},
                             {"eta_inferred", row.report.eta},
                             {"eta_sigma", row.report.eta_sigma},
                             {"eta_predicted", row.eta_predicted},
                             {"snr_measured_db", row.snr_measured_db},
                             {"q_plus_sq", row.report.q_plus_sq},
                             {"q_minus_sq", row.report.q_minus_sq}});
  }

  // densely sampled prediction for plotting
  const auto [db_lo, db_hi] = std::minmax_element(config.snr_db_list.begin(), config.snr_db_list.end());
  std::string curve = "snr_db,eta_predicted\n";
  const int samples = 200;
  for (int i = 0; i <= samples; ++i) {
    const double db = *db_lo + (*db_hi - *db_lo) * static_cast<double>(i) / samples;
    const double eta = config.optical_eta * equivalent_efficiency_from_snr(snr_db_to_linear(db));
    curve += detail::format_double(db) + "," + detail::format_double(eta) + "\n";
  }

  json summary{{"config", json::parse(config.to_json_text())}, {"rows", rows_json}};
  const std::string summary_text = summary.dump(2) + "\n";

  ensure_dir(config.output_dir);
  const fs::path dir(config.output_dir);
  write_checked((dir / "sweep.csv").string(), csv);
  write_checked((dir / "theory_curve.csv").string(), curve);
  write_checked((dir / "sweep.json").string(), summary_text);
  std::cout << "wrote sweep.csv, theory_curve.csv, sweep.json to " << config.output_dir << "\n";
  return kExitOk;
}

int cmd_equivalence_check(const CommonOptions& opts, const std::string& out_path) {
  const ExperimentConfig config = build_config(opts);
  const DetectorModel detector = config.detector.resolve();
  const GaussianState state = config.make_source_state();
  const GridSpec spec = config.resolve_grid(state);

  const WignerGrid source = wigner_eval(state, spec, opts.threads);
  const WignerGrid noisy = apply_en_wigner(source, detector, opts.threads);
  const double eta_eq = equivalent_efficiency_from_gain(detector);
  const WignerGrid lossy = apply_loss_wigner(source, eta_eq, opts.threads);

  double max_diff = 0.0;
  for (std::size_t i = 0; i < noisy.values().size(); ++i) {
    max_diff = std::max(max_diff, std::abs(noisy.values()[i] - lossy.values()[i]));
  }
  const double peak = lossy.max_abs();
  const double rel = peak > 0.0 ? max_diff / peak : max_diff;
  const bool pass = rel < 1e-9;

  const double s = detector.snr();
  std::cout << "eta_eq = " << detail::format_double(eta_eq) << "\n";
  std::cout << "snr_linear = " << detail::format_double(s) << "\n";
  std::cout << "snr_db = " << detail::format_double(10.0 * std::log10(s)) << "\n";
  std::cout << "max_rel_diff = " << detail::format_double(rel) << "\n";
  std::cout << (pass ? "PASS" : "FAIL") << ": noise channel vs equivalent loss channel\n";

  if (!out_path.empty()) {
    json report{{"eta_eq", eta_eq},
                {"snr_linear", s},
                {"snr_db", 10.0 * std::log10(s)},
                {"max_rel_diff", rel},
                {"pass", pass},
                {"grid", json{{"nx", spec.nx}, {"ny", spec.ny}}}};
    write_checked(out_path, report.dump(2) + "\n");
  }
  return pass ? kExitOk : kExitNumerical;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Homodyne tomography simulator: optical loss, detector noise and "
               "vacuum calibration"};
  app.require_subcommand(1);

  CommonOptions sim_opts;
  CLI::App* sim = app.add_subcommand("simulate", "generate the three-trace protocol");
  add_common_options(sim, sim_opts, false);

  std::string cal_trace, cal_out;
  unsigned cal_threads = 1;
  CLI::App* cal = app.add_subcommand("calibrate", "estimate the calibration factor from a trace");
  cal->add_option("--trace", cal_trace, "shot-noise (vacuum) trace CSV")->required();
  cal->add_option("--out", cal_out, "write a JSON report here");
  cal->add_option("--threads", cal_threads, "worker threads (calibration is sequential)");

  CommonOptions rec_opts;
  std::string rec_signal, rec_shot, rec_method = "fbp", rec_prefix = "recon";
  std::size_t rec_bins = 201, rec_phase_bins = 12;
  CLI::App* rec = app.add_subcommand("reconstruct", "reconstruct a state from traces");
  rec->add_option("--signal", rec_signal, "signal trace CSV")->required();
  rec->add_option("--shot", rec_shot, "shot-noise trace CSV for calibration")->required();
  rec->add_option("--method", rec_method, "fbp or gaussfit");
  rec->add_option("--bins", rec_bins, "histogram bins");
  rec->add_option("--phase-bins", rec_phase_bins, "phase bins for scanned schedules");
  rec->add_option("--out-prefix", rec_prefix, "output file prefix");
  rec->add_option("--threads", rec_opts.threads, "worker threads");

  CommonOptions sweep_opts;
  CLI::App* sweep = app.add_subcommand("sweep", "efficiency vs detector SNR");
  add_common_options(sweep, sweep_opts, true);

  CommonOptions eq_opts;
  std::string eq_out;
  CLI::App* eq = app.add_subcommand("equivalence-check",
                                    "compare the noise channel against the equivalent loss");
  add_common_options(eq, eq_opts, false);
  eq->add_option("--out", eq_out, "write a JSON report here");

  std::vector<const char*> argv;
  argv.push_back("quadtomo");
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (sim->parsed()) return cmd_simulate(sim_opts);
    if (cal->parsed()) return cmd_calibrate(cal_trace, cal_out);
    if (rec->parsed()) {
      return cmd_reconstruct(rec_opts, rec_signal, rec_shot, rec_method, rec_bins, rec_phase_bins,
                             rec_prefix);
    }
    if (sweep->parsed()) return cmd_sweep(sweep_opts);
    if (eq->parsed()) return cmd_equivalence_check(eq_opts, eq_out);
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const data_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const resolution_error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const consistency_error& e) {
    std::cerr << "consistency error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitConfig;
}

}  // namespace quadtomo::cli
