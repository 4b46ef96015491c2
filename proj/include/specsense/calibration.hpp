#pragma once

// Empirical threshold calibration under H0. Entropy thresholds come from the
// lower-tail quantile of the statistic; the energy threshold from the upper
// tail at the nominal noise power; the two-stage threshold from monotone
// bisection on the false-alarm rate of the full two-stage pipeline.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "specsense/detectors.hpp"
#include "specsense/errors.hpp"
#include "specsense/parallel.hpp"
#include "specsense/text.hpp"

namespace specsense {

struct CalibrationSpec {
  DetectorKind detector = DetectorKind::entropy_power;
  double target_pf = 0.1;
  std::size_t trials = 100000;
  double delta0 = 0.0;      // two-stage only
  ScenarioConfig scenario;  // H0 generation parameters; snr_db is ignored
  std::size_t bins = 15;
};

inline void validate(const CalibrationSpec& spec) {
  if (!(spec.target_pf > 0.0) || !(spec.target_pf < 1.0))
    throw DomainError("calibration: target_pf must lie in (0, 1)");
  if (spec.trials < 1000) throw InsufficientTrialsError("calibration: trials must be >= 1000");
  if (spec.bins == 0) throw DomainError("calibration: bins must be >= 1");
  if (!(spec.delta0 >= 0.0)) throw DomainError("calibration: delta0 must be >= 0");
  validate(spec.scenario);
}

namespace detail {

/// Nearest-rank quantile of an unsorted sample (sorts in place).
inline double nearest_rank_quantile(std::vector<double>& sample, double q) {
  std::sort(sample.begin(), sample.end());
  const auto n = sample.size();
  auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
  rank = std::clamp<std::size_t>(rank, 1, n);
  return sample[rank - 1];
}

/// Two-stage decision over a precomputed entropy pair.
inline bool two_stage_is_h1(double h1, double h2, double lambda, double delta0) {
  if (h1 <= lambda - delta0) return true;
  if (h1 > lambda + delta0) return false;
  return (h1 + h2) / 2.0 <= lambda;
}

}  // namespace detail

/// Lower-tail quantile threshold for the one-stage entropy detectors:
/// P(statistic <= lambda | H0) is approximately target_pf.
inline double calibrate_one_stage(const CalibrationSpec& spec, StreamKey key) {
  validate(spec);
  if (spec.detector != DetectorKind::entropy_amplitude &&
      spec.detector != DetectorKind::entropy_power)
    throw ConfigError("calibrate_one_stage: detector must be entropy-amplitude or entropy-power");
  if (spec.target_pf * static_cast<double>(spec.trials) < 20.0)
    throw InsufficientTrialsError("calibrate_one_stage: target_pf * trials must be >= 20");

  const bool use_amplitude = spec.detector == DetectorKind::entropy_amplitude;
  std::vector<double> stats(spec.trials);
  parallel_for(spec.trials, [&](std::size_t t) {
    Rng rng = key.child(t).rng();
    const Frame frame = make_frame(Hypothesis::h0, spec.scenario, rng);
    stats[t] = use_amplitude ? amplitude_entropy_statistic(frame, spec.bins)
                             : power_entropy_statistic(frame, spec.bins);
  });
  return detail::nearest_rank_quantile(stats, spec.target_pf);
}

/// Upper-tail quantile of the energy statistic at the NOMINAL noise power
/// (the fixed-threshold assumption; any later uncertainty offset is exactly
/// what this detector is fragile against).
inline double calibrate_energy(const CalibrationSpec& spec, StreamKey key) {
  validate(spec);
  if (spec.detector != DetectorKind::energy)
    throw ConfigError("calibrate_energy: detector must be energy");
  if (spec.target_pf * static_cast<double>(spec.trials) < 20.0)
    throw InsufficientTrialsError("calibrate_energy: target_pf * trials must be >= 20");

  ScenarioConfig nominal = spec.scenario;
  nominal.noise.uncertainty_offset_db = 0.0;
  std::vector<double> stats(spec.trials);
  parallel_for(spec.trials, [&](std::size_t t) {
    Rng rng = key.child(t).rng();
    stats[t] = energy_statistic(make_frame(Hypothesis::h0, nominal, rng));
  });
  return detail::nearest_rank_quantile(stats, 1.0 - spec.target_pf);
}

/// Threshold for the full two-stage pipeline, found by bisection on the
/// empirical Pf over a fixed set of H0 entropy pairs. With common random
/// numbers the empirical Pf is non-decreasing in lambda, so bisection is
/// exact up to the +-0.005 tolerance.
inline double calibrate_two_stage(const CalibrationSpec& spec, StreamKey key) {
  validate(spec);
  if (spec.detector != DetectorKind::two_stage)
    throw ConfigError("calibrate_two_stage: detector must be two-stage");
  if (spec.target_pf * static_cast<double>(spec.trials) < 20.0)
    throw InsufficientTrialsError("calibrate_two_stage: target_pf * trials must be >= 20");

  std::vector<double> h1(spec.trials), h2(spec.trials);
  parallel_for(spec.trials, [&](std::size_t t) {
    Rng rng = key.child(t).rng();
    h1[t] = power_entropy_statistic(make_frame(Hypothesis::h0, spec.scenario, rng), spec.bins);
    h2[t] = power_entropy_statistic(make_frame(Hypothesis::h0, spec.scenario, rng), spec.bins);
  });

  const auto pf_at = [&](double lambda) {
    std::size_t hits = 0;
    for (std::size_t t = 0; t < spec.trials; ++t)
      hits += detail::two_stage_is_h1(h1[t], h2[t], lambda, spec.delta0);
    return static_cast<double>(hits) / static_cast<double>(spec.trials);
  };

  double lo = 0.0;
  double hi = std::log(static_cast<double>(spec.bins)) + 1.0;
  if (pf_at(lo) > spec.target_pf || pf_at(hi) < spec.target_pf)
    throw CalibrationRangeError("calibrate_two_stage: target Pf not bracketed by lambda range");

  constexpr double kTolerance = 0.005;
  for (int iter = 0; iter < 40; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double pf = pf_at(mid);
    if (std::abs(pf - spec.target_pf) <= kTolerance) return mid;
    (pf < spec.target_pf ? lo : hi) = mid;
  }
  throw CalibrationRangeError("calibrate_two_stage: bisection did not converge in 40 iterations");
}

// ---------------------------------------------------------------------------
// calibration records (key = value text files consumed by the CLI)

struct CalibrationRecord {
  DetectorKind detector = DetectorKind::entropy_power;
  std::size_t frame_len = 1024;
  std::size_t bins = 15;
  double delta0 = 0.0;
  double target_pf = 0.1;
  double lambda = 0.0;         // nats; entropy detectors
  double energy_lambda = 0.0;  // linear mW; energy detector
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  double noise_dbmw = -95.0;
};

inline void save_calibration(const CalibrationRecord& record, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write calibration record: " + path.string());
  out << "detector = " << to_string(record.detector) << '\n'
      << "frame_len = " << record.frame_len << '\n'
      << "bins = " << record.bins << '\n'
      << "delta0 = " << format_double(record.delta0) << '\n'
      << "target_pf = " << format_double(record.target_pf) << '\n'
      << "lambda = " << format_double(record.lambda) << '\n'
      << "energy_lambda = " << format_double(record.energy_lambda) << '\n'
      << "trials = " << record.trials << '\n'
      << "seed = " << record.seed << '\n'
      << "noise_dbmw = " << format_double(record.noise_dbmw) << '\n';
  if (!out.flush()) throw ConfigError("failed writing calibration record: " + path.string());
}

inline CalibrationRecord load_calibration(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read calibration record: " + path.string());
  std::map<std::string, std::string> fields;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    fields[std::string(trim(std::string_view(line).substr(0, eq)))] =
        std::string(trim(std::string_view(line).substr(eq + 1)));
  }
  const auto need = [&](const char* name) -> const std::string& {
    const auto it = fields.find(name);
    if (it == fields.end())
      throw ConfigError("calibration record " + path.string() + " is missing '" + name + "'");
    return it->second;
  };

  CalibrationRecord record;
  const auto kind = detector_from_string(need("detector"));
  if (!kind) throw ConfigError("calibration record: unknown detector '" + need("detector") + "'");
  record.detector = *kind;
  record.frame_len = static_cast<std::size_t>(parse_double(need("frame_len")));
  record.bins = static_cast<std::size_t>(parse_double(need("bins")));
  record.delta0 = parse_double(need("delta0"));
  record.target_pf = parse_double(need("target_pf"));
  record.lambda = parse_double(need("lambda"));
  record.energy_lambda = parse_double(need("energy_lambda"));
  record.trials = static_cast<std::size_t>(parse_double(need("trials")));
  record.seed = static_cast<std::uint64_t>(parse_double(need("seed")));
  record.noise_dbmw = parse_double(need("noise_dbmw"));
  return record;
}

}  // namespace specsense
