#pragma once

// Command-line front end. Subcommands: calibrate, sweep-snr, roc,
// noise-uncertainty, gamma, cooperative. Every subcommand accepts --config
// with a flat key=value file mirroring its flags; command-line values win.
// Results go to CSV; reruns with identical flags produce identical bytes.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "specsense/calibration.hpp"
#include "specsense/harness.hpp"

namespace specsense {

namespace cli_detail {

/// Grid syntax: "start:stop:step", a comma list, or a single value.
inline std::vector<double> parse_grid(const std::string& text) {
  if (text.empty()) throw ConfigError("empty grid");
  if (text.find(':') != std::string::npos) {
    const auto first = text.find(':');
    const auto second = text.find(':', first + 1);
    if (second == std::string::npos) throw ConfigError("grid must be start:stop:step");
    const double start = parse_double(trim(std::string_view(text).substr(0, first)));
    const double stop = parse_double(trim(std::string_view(text).substr(first + 1, second - first - 1)));
    double step = parse_double(trim(std::string_view(text).substr(second + 1)));
    if (!(step > 0.0)) throw ConfigError("grid step must be positive");
    if (stop < start) step = -step;
    const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    std::vector<double> grid(count);
    for (std::size_t i = 0; i < count; ++i) grid[i] = start + static_cast<double>(i) * step;
    return grid;
  }
  std::vector<double> grid;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const auto end = comma == std::string::npos ? text.size() : comma;
    grid.push_back(parse_double(trim(std::string_view(text).substr(pos, end - pos))));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return grid;
}

struct ScenarioFlags {
  std::size_t frame_len = 1024;
  std::size_t bins = 15;
  double symbol_rate_hz = 1e6;
  double sample_rate_hz = 64e6;
  double noise_dbmw = -95.0;
  std::string channel = "rayleigh";
  std::string config_path;  // consumed by merge_config_file before parsing
  double snr_db = -12.0;

  ScenarioConfig scenario() const {
    ScenarioConfig sc;
    sc.signal.symbol_rate_hz = symbol_rate_hz;
    sc.signal.sample_rate_hz = sample_rate_hz;
    sc.signal.frame_len = frame_len;
    sc.noise.nominal_power_dbmw = noise_dbmw;
    sc.snr_db = snr_db;
    if (channel == "rayleigh")
      sc.channel = ChannelKind::rayleigh_block;
    else if (channel == "awgn")
      sc.channel = ChannelKind::awgn_only;
    else
      throw ConfigError("unknown channel '" + channel + "' (use rayleigh or awgn)");
    return sc;
  }

  std::string id() const {
    return "n" + std::to_string(frame_len) + "-L" + std::to_string(bins) + "-" + channel;
  }
};

inline void add_scenario_flags(CLI::App& cmd, ScenarioFlags& flags) {
  cmd.add_option("--n", flags.frame_len, "samples per frame (power of two)");
  cmd.add_option("--bins", flags.bins, "histogram bin count L");
  cmd.add_option("--symbol-rate", flags.symbol_rate_hz, "primary symbol rate, Hz");
  cmd.add_option("--sample-rate", flags.sample_rate_hz, "receiver sample rate, Hz");
  cmd.add_option("--noise-dbm", flags.noise_dbmw, "nominal noise power, dBmW");
  cmd.add_option("--channel", flags.channel, "rayleigh | awgn");
  cmd.add_option("--config", flags.config_path,
                 "flat key=value file mirroring these flags; command line wins");
}

/// Calibration sources for a measuring subcommand: stored records win over
/// inline calibration; calibrate-trials 0 disables the inline path.
struct CalibrationSources {
  std::vector<std::string> record_paths;
  std::size_t calibrate_trials = 20000;

  void add_flags(CLI::App& cmd, bool with_inline_default = true) {
    cmd.add_option("--calibration", record_paths,
                   "calibration record file(s) written by 'calibrate'");
    auto* opt = cmd.add_option("--calibrate-trials", calibrate_trials,
                               "H0 trials for inline calibration (0 disables)");
    if (!with_inline_default) {
      calibrate_trials = 0;
      opt->description("H0 trials for inline calibration (required here)");
    }
  }

  /// Thresholds for `kind`, from a matching record or inline calibration.
  Thresholds resolve(DetectorKind kind, const ScenarioConfig& scenario, std::size_t bins,
                     double delta0, double target_pf, std::uint64_t seed) const {
    Thresholds th;
    th.delta0 = delta0;
    for (const auto& path : record_paths) {
      const auto record = load_calibration(path);
      if (record.detector != kind) continue;
      if (record.frame_len != scenario.signal.frame_len || record.bins != bins)
        throw ConfigError("calibration record " + path + " was made for n=" +
                          std::to_string(record.frame_len) + ", L=" + std::to_string(record.bins));
      if (std::abs(record.target_pf - target_pf) > 1e-12)
        throw ConfigError("calibration record " + path + " targets pf=" +
                          format_double(record.target_pf));
      if (kind == DetectorKind::two_stage && std::abs(record.delta0 - delta0) > 1e-12)
        throw ConfigError("calibration record " + path + " uses delta0=" +
                          format_double(record.delta0));
      th.lambda = record.lambda;
      th.energy_lambda = record.energy_lambda;
      return th;
    }
    if (calibrate_trials == 0)
      throw ConfigError(std::string("no calibration record for detector '") + to_string(kind) +
                        "': pass --calibration <record> or --calibrate-trials N");
    CalibrationSpec cal;
    cal.detector = kind;
    cal.target_pf = target_pf;
    cal.trials = calibrate_trials;
    cal.delta0 = delta0;
    cal.scenario = scenario;
    cal.bins = bins;
    const StreamKey key = master_stream(seed ^ 0xca11b8a7edull).child(static_cast<int>(kind));
    switch (kind) {
      case DetectorKind::entropy_amplitude:
      case DetectorKind::entropy_power:
        th.lambda = calibrate_one_stage(cal, key);
        break;
      case DetectorKind::two_stage:
        th.lambda = calibrate_two_stage(cal, key);
        break;
      case DetectorKind::energy:
        th.energy_lambda = calibrate_energy(cal, key);
        break;
    }
    return th;
  }
};

/// Flat key=value config support: for every `key = value` line whose --key is
/// not already present on the command line, appends "--key value" to the
/// argument list. Command-line values therefore always win.
inline std::vector<std::string> merge_config_file(const std::vector<std::string>& args) {
  std::string path;
  for (std::size_t i = 0; i + 1 < args.size(); ++i)
    if (args[i] == "--config") path = args[i + 1];
  if (path.empty()) return args;

  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path);
  std::vector<std::string> merged = args;
  std::string line;
  while (std::getline(in, line)) {
    const auto text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("config file " + path + ": expected key=value, got '" +
                        std::string(text) + "'");
    const std::string key = "--" + std::string(trim(text.substr(0, eq)));
    const std::string value(trim(text.substr(eq + 1)));
    if (std::find(merged.begin(), merged.end(), key) != merged.end()) continue;
    merged.push_back(key);
    merged.push_back(value);
  }
  return merged;
}

inline DetectorKind parse_detector(const std::string& name) {
  const auto kind = detector_from_string(name);
  if (!kind)
    throw ConfigError("unknown detector '" + name +
                      "' (use entropy-amplitude, entropy-power, energy, or two-stage)");
  return *kind;
}

inline std::vector<FusionRule> parse_rules(const std::string& text) {
  std::vector<FusionRule> rules;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const auto end = comma == std::string::npos ? text.size() : comma;
    const auto name = trim(std::string_view(text).substr(pos, end - pos));
    const auto kind = fusion_rule_from_string(name);
    if (!kind) throw ConfigError("unknown fusion rule '" + std::string(name) + "'");
    rules.push_back({*kind, 0});
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (rules.empty()) throw ConfigError("no fusion rules given");
  return rules;
}

}  // namespace cli_detail

inline int run_cli(int argc, const char* const argv[]) {
  using namespace cli_detail;

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    args = merge_config_file(args);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  std::vector<const char*> merged_argv{argc > 0 ? argv[0] : "specsense"};
  for (const auto& a : args) merged_argv.push_back(a.c_str());

  CLI::App app{"entropy-based spectrum sensing simulator"};
  app.require_subcommand(1);

  // ---- calibrate ----------------------------------------------------------
  auto* calibrate = app.add_subcommand("calibrate", "calibrate a detector threshold under H0");
  ScenarioFlags cal_flags;
  add_scenario_flags(*calibrate, cal_flags);
  std::string cal_detector = "entropy-power";
  double cal_pf = 0.1, cal_delta0 = 0.0;
  std::size_t cal_trials = 100000;
  std::uint64_t cal_seed = 1;
  std::string cal_out;
  calibrate->add_option("--detector", cal_detector, "detector kind");
  calibrate->add_option("--pf", cal_pf, "target false-alarm probability");
  calibrate->add_option("--delta0", cal_delta0, "doubted-region half width (two-stage)");
  calibrate->add_option("--trials", cal_trials, "H0 trials");
  calibrate->add_option("--seed", cal_seed, "master seed");
  calibrate->add_option("--out", cal_out, "calibration record path")->required();

  // ---- sweep-snr ----------------------------------------------------------
  auto* sweep = app.add_subcommand("sweep-snr", "Pd/Pf against an SNR grid");
  ScenarioFlags sweep_flags;
  add_scenario_flags(*sweep, sweep_flags);
  std::string sweep_detector = "two-stage", sweep_grid = "-16:-6:1", sweep_out;
  double sweep_pf = 0.1, sweep_delta0 = 0.3;
  std::size_t sweep_trials = 10000;
  std::uint64_t sweep_seed = 1;
  CalibrationSources sweep_cal;
  sweep->add_option("--detector", sweep_detector, "detector kind");
  sweep->add_option("--snr", sweep_grid, "SNR grid, dB (start:stop:step or comma list)");
  sweep->add_option("--pf", sweep_pf, "target false-alarm probability");
  sweep->add_option("--delta0", sweep_delta0, "doubted-region half width (two-stage)");
  sweep->add_option("--trials", sweep_trials, "trials per grid point and hypothesis");
  sweep->add_option("--seed", sweep_seed, "master seed");
  sweep->add_option("--out", sweep_out, "output CSV path")->required();
  sweep_cal.add_flags(*sweep);

  // ---- roc ----------------------------------------------------------------
  auto* roc = app.add_subcommand("roc", "ROC curve at a fixed SNR");
  ScenarioFlags roc_flags;
  add_scenario_flags(*roc, roc_flags);
  std::string roc_detector = "entropy-power", roc_pf_grid = "0.02,0.05,0.1,0.2,0.3,0.5", roc_out;
  double roc_snr = -10.0, roc_delta0 = 0.3;
  std::size_t roc_trials = 10000, roc_cal_trials = 0;
  std::uint64_t roc_seed = 1;
  roc->add_option("--detector", roc_detector, "detector kind");
  roc->add_option("--snr", roc_snr, "SNR, dB");
  roc->add_option("--pf-grid", roc_pf_grid, "target Pf grid (comma list in (0,1))");
  roc->add_option("--delta0", roc_delta0, "doubted-region half width (two-stage)");
  roc->add_option("--trials", roc_trials, "trials per grid point and hypothesis");
  roc->add_option("--calibrate-trials", roc_cal_trials,
                  "H0 trials for the per-point calibration (required)");
  roc->add_option("--seed", roc_seed, "master seed");
  roc->add_option("--out", roc_out, "output CSV path")->required();

  // ---- noise-uncertainty --------------------------------------------------
  auto* noise = app.add_subcommand("noise-uncertainty",
                                   "fixed thresholds against offset noise power");
  ScenarioFlags noise_flags;
  add_scenario_flags(*noise, noise_flags);
  std::string noise_offsets = "-2:2:1", noise_detectors = "two-stage,energy", noise_out;
  double noise_snr = -12.0, noise_pf = 0.1, noise_delta0 = 0.3;
  std::size_t noise_trials = 10000;
  std::uint64_t noise_seed = 1;
  CalibrationSources noise_cal;
  noise->add_option("--offsets", noise_offsets, "noise-power offsets, dB");
  noise->add_option("--detectors", noise_detectors, "comma list of detectors to evaluate");
  noise->add_option("--snr", noise_snr, "SNR, dB");
  noise->add_option("--pf", noise_pf, "target false-alarm probability");
  noise->add_option("--delta0", noise_delta0, "doubted-region half width (two-stage)");
  noise->add_option("--trials", noise_trials, "trials per offset and hypothesis");
  noise->add_option("--seed", noise_seed, "master seed");
  noise->add_option("--out", noise_out, "output CSV path")->required();
  noise_cal.add_flags(*noise);

  // ---- gamma --------------------------------------------------------------
  auto* gamma = app.add_subcommand("gamma", "two-stage complexity ratio against SNR");
  ScenarioFlags gamma_flags;
  add_scenario_flags(*gamma, gamma_flags);
  std::string gamma_grid = "-16:-6:1", gamma_hypothesis = "h1", gamma_out;
  double gamma_pf = 0.1, gamma_delta0 = 0.3;
  std::size_t gamma_trials = 10000;
  std::uint64_t gamma_seed = 1;
  CalibrationSources gamma_cal;
  gamma->add_option("--snr", gamma_grid, "SNR grid, dB");
  gamma->add_option("--hypothesis", gamma_hypothesis, "population: h1 | h0");
  gamma->add_option("--pf", gamma_pf, "target false-alarm probability");
  gamma->add_option("--delta0", gamma_delta0, "doubted-region half width");
  gamma->add_option("--trials", gamma_trials, "trials per grid point");
  gamma->add_option("--seed", gamma_seed, "master seed");
  gamma->add_option("--out", gamma_out, "output CSV path")->required();
  gamma_cal.add_flags(*gamma);

  // ---- cooperative --------------------------------------------------------
  auto* coop = app.add_subcommand("cooperative", "fused detection, Pf equalized per rule");
  ScenarioFlags coop_flags;
  add_scenario_flags(*coop, coop_flags);
  std::string coop_rules = "two-bit,and,or,voting", coop_grid = "-12", coop_mode = "common",
              coop_out;
  int coop_users = 5;
  double coop_pf = 0.1, coop_delta0 = 0.3;
  std::size_t coop_trials = 10000, coop_cal_trials = 20000;
  std::uint64_t coop_seed = 1;
  coop->add_option("--rules", coop_rules, "comma list: two-bit, and, or, voting");
  coop->add_option("--users", coop_users, "number of cooperating users");
  coop->add_option("--snr", coop_grid, "SNR grid, dB");
  coop->add_option("--pf", coop_pf, "target FUSED false-alarm probability");
  coop->add_option("--delta0", coop_delta0, "doubted-region half width (two-bit locals)");
  coop->add_option("--trials", coop_trials, "trials per grid point and hypothesis");
  coop->add_option("--calibrate-trials", coop_cal_trials, "H0 trials for fused-Pf bisection");
  coop->add_option("--user-channel", coop_mode,
                   "common (one faded signal, per-user noise) | independent");
  coop->add_option("--seed", coop_seed, "master seed");
  coop->add_option("--out", coop_out, "output CSV path")->required();

  try {
    app.parse(static_cast<int>(merged_argv.size()), merged_argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (app.got_subcommand(calibrate)) {
      const DetectorKind kind = parse_detector(cal_detector);
      CalibrationSpec spec;
      spec.detector = kind;
      spec.target_pf = cal_pf;
      spec.trials = cal_trials;
      spec.delta0 = cal_delta0;
      spec.scenario = cal_flags.scenario();
      spec.bins = cal_flags.bins;
      const StreamKey key = master_stream(cal_seed);
      CalibrationRecord record;
      record.detector = kind;
      record.frame_len = cal_flags.frame_len;
      record.bins = cal_flags.bins;
      record.delta0 = cal_delta0;
      record.target_pf = cal_pf;
      record.trials = cal_trials;
      record.seed = cal_seed;
      record.noise_dbmw = cal_flags.noise_dbmw;
      switch (kind) {
        case DetectorKind::entropy_amplitude:
        case DetectorKind::entropy_power:
          record.lambda = calibrate_one_stage(spec, key);
          break;
        case DetectorKind::two_stage:
          record.lambda = calibrate_two_stage(spec, key);
          break;
        case DetectorKind::energy:
          record.energy_lambda = calibrate_energy(spec, key);
          break;
      }
      save_calibration(record, cal_out);
      std::cout << "calibrate: " << cal_detector << " lambda="
                << format_double(kind == DetectorKind::energy ? record.energy_lambda
                                                              : record.lambda)
                << " (pf=" << format_double(cal_pf) << ", trials=" << cal_trials << ") -> "
                << cal_out << '\n';
      return 0;
    }

    if (app.got_subcommand(sweep)) {
      const DetectorKind kind = parse_detector(sweep_detector);
      SweepSpec spec;
      spec.scenario = sweep_flags.scenario();
      spec.detector = kind;
      spec.bins = sweep_flags.bins;
      spec.snr_grid_db = parse_grid(sweep_grid);
      spec.target_pf = sweep_pf;
      spec.trials = sweep_trials;
      spec.seed = sweep_seed;
      spec.scenario_id = sweep_flags.id();
      spec.th = sweep_cal.resolve(kind, spec.scenario, spec.bins, sweep_delta0, sweep_pf,
                                  sweep_seed);
      const auto rows = sweep_snr(spec);
      write_csv_file(sweep_out, rows);
      std::cout << "sweep-snr: wrote " << rows.size() << " rows to " << sweep_out
                << " (detector=" << sweep_detector << ", trials=" << sweep_trials
                << ", seed=" << sweep_seed << ")\n";
      return 0;
    }

    if (app.got_subcommand(roc)) {
      const DetectorKind kind = parse_detector(roc_detector);
      if (roc_cal_trials == 0)
        throw ConfigError(
            "roc has no calibration: pass --calibrate-trials N "
            "(a stored record cannot cover a Pf grid)");
      BoundPoint base;
      base.scenario = roc_flags.scenario();
      base.scenario.snr_db = roc_snr;
      base.detector = kind;
      base.th.delta0 = roc_delta0;
      base.bins = roc_flags.bins;
      base.scenario_id = roc_flags.id();
      const auto grid = parse_grid(roc_pf_grid);
      const auto rows = roc_curve(base, grid, roc_trials, roc_cal_trials, roc_seed);
      write_csv_file(roc_out, rows);
      std::cout << "roc: wrote " << rows.size() << " rows to " << roc_out
                << " (detector=" << roc_detector << ", snr=" << format_double(roc_snr)
                << " dB)\n";
      return 0;
    }

    if (app.got_subcommand(noise)) {
      NoiseSweepSpec spec;
      spec.scenario = noise_flags.scenario();
      spec.scenario.snr_db = noise_snr;
      spec.bins = noise_flags.bins;
      spec.offsets_db = parse_grid(noise_offsets);
      spec.target_pf = noise_pf;
      spec.trials = noise_trials;
      spec.seed = noise_seed;
      spec.scenario_id = noise_flags.id();
      spec.detectors.clear();
      std::size_t pos = 0;
      while (pos <= noise_detectors.size()) {
        const auto comma = noise_detectors.find(',', pos);
        const auto end = comma == std::string::npos ? noise_detectors.size() : comma;
        spec.detectors.push_back(parse_detector(
            std::string(trim(std::string_view(noise_detectors).substr(pos, end - pos)))));
        if (comma == std::string::npos) break;
        pos = comma + 1;
      }
      for (const auto kind : spec.detectors) {
        const auto th = noise_cal.resolve(kind, spec.scenario, spec.bins, noise_delta0, noise_pf,
                                          noise_seed);
        if (kind == DetectorKind::energy)
          spec.th.energy_lambda = th.energy_lambda;
        else {
          spec.th.lambda = th.lambda;
          spec.th.delta0 = th.delta0;
        }
      }
      const auto rows = noise_uncertainty_sweep(spec);
      write_csv_file(noise_out, rows);
      std::cout << "noise-uncertainty: wrote " << rows.size() << " rows to " << noise_out
                << " (offsets=" << noise_offsets << ")\n";
      return 0;
    }

    if (app.got_subcommand(gamma)) {
      SweepSpec spec;
      spec.scenario = gamma_flags.scenario();
      spec.detector = DetectorKind::two_stage;
      spec.bins = gamma_flags.bins;
      spec.snr_grid_db = parse_grid(gamma_grid);
      spec.target_pf = gamma_pf;
      spec.trials = gamma_trials;
      spec.seed = gamma_seed;
      spec.scenario_id = gamma_flags.id();
      spec.th = gamma_cal.resolve(DetectorKind::two_stage, spec.scenario, spec.bins, gamma_delta0,
                                  gamma_pf, gamma_seed);
      Hypothesis population;
      if (gamma_hypothesis == "h1")
        population = Hypothesis::h1;
      else if (gamma_hypothesis == "h0")
        population = Hypothesis::h0;
      else
        throw ConfigError("unknown hypothesis '" + gamma_hypothesis + "' (use h1 or h0)");
      const auto rows = gamma_sweep(spec, population);
      write_csv_file(gamma_out, rows);
      std::cout << "gamma: wrote " << rows.size() << " rows to " << gamma_out
                << " (delta0=" << format_double(gamma_delta0) << ", " << gamma_hypothesis
                << ")\n";
      return 0;
    }

    if (app.got_subcommand(coop)) {
      CooperativeSpec spec;
      spec.scenario = coop_flags.scenario();
      spec.rules = parse_rules(coop_rules);
      spec.users = coop_users;
      spec.delta0 = coop_delta0;
      spec.bins = coop_flags.bins;
      spec.target_pf = coop_pf;
      spec.trials = coop_trials;
      spec.cal_trials = coop_cal_trials;
      spec.seed = coop_seed;
      spec.scenario_id = coop_flags.id();
      if (coop_mode == "common")
        spec.channel_mode = UserChannelMode::common_signal;
      else if (coop_mode == "independent")
        spec.channel_mode = UserChannelMode::independent;
      else
        throw ConfigError("unknown user-channel mode '" + coop_mode + "'");
      const auto grid = parse_grid(coop_grid);
      const auto rows = cooperative_sweep(spec, grid);
      write_csv_file(coop_out, rows);
      std::cout << "cooperative: wrote " << rows.size() << " rows to " << coop_out << " (users="
                << coop_users << ", rules=" << coop_rules << ")\n";
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  std::cerr << "error: no subcommand\n";
  return 1;
}

}  // namespace specsense
