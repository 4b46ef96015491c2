#pragma once

// Monte-Carlo experiment drivers behind the CLI: Pd/Pf estimation with
// Wilson bounds, SNR sweeps, ROC tracing, the noise-uncertainty experiment,
// complexity-ratio sweeps, and the cooperative comparison.
//
// Stream layout is fixed so that output is byte-identical for any worker
// count: point index -> trial index -> (0 = H0 run, 1 = H1 run). Two
// detectors evaluated with the same seed therefore see the same frames,
// which is what makes paired (common-random-number) comparisons valid.

#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "specsense/calibration.hpp"
#include "specsense/cooperative.hpp"
#include "specsense/detectors.hpp"
#include "specsense/metrics.hpp"
#include "specsense/parallel.hpp"

namespace specsense {

/// A scenario bound to a calibrated detector, ready to measure.
struct BoundPoint {
  ScenarioConfig scenario;
  DetectorKind detector = DetectorKind::entropy_power;
  Thresholds th;
  std::size_t bins = 15;
  double target_pf = 0.1;
  std::string scenario_id;
};

inline void validate_thresholds(DetectorKind kind, const Thresholds& th) {
  switch (kind) {
    case DetectorKind::entropy_amplitude:
    case DetectorKind::entropy_power:
      if (!(th.lambda > 0.0)) throw ConfigError("thresholds not calibrated: lambda missing");
      return;
    case DetectorKind::two_stage:
      if (!(th.lambda > 0.0)) throw ConfigError("thresholds not calibrated: lambda missing");
      if (!(th.delta0 >= 0.0)) throw ConfigError("delta0 must be >= 0");
      return;
    case DetectorKind::energy:
      if (!(th.energy_lambda > 0.0))
        throw ConfigError("thresholds not calibrated: energy_lambda missing");
      return;
  }
  throw ConfigError("unknown detector kind");
}

namespace detail {

struct PopulationOutcome {
  std::vector<std::uint8_t> decided_h1;
  std::vector<std::uint8_t> second_stage;
};

/// Runs `trials` independent sensing events under one hypothesis.
/// Trial t draws from key.child(t).child(truth).
inline PopulationOutcome run_population(const BoundPoint& point, Hypothesis truth,
                                        std::size_t trials, StreamKey key) {
  PopulationOutcome out;
  out.decided_h1.assign(trials, 0);
  out.second_stage.assign(trials, 0);
  parallel_for(trials, [&](std::size_t t) {
    Rng rng = key.child(t).child(static_cast<std::uint64_t>(truth)).rng();
    TrialFrameSource source(truth, point.scenario, rng);
    const Decision d = run_detector(point.detector, point.th, point.bins, source);
    out.decided_h1[t] = d.is_h1;
    out.second_stage[t] = d.stages_used == 2;
  });
  return out;
}

inline double mean_of(std::span<const std::uint8_t> bits) {
  std::size_t sum = 0;
  for (const auto b : bits) sum += b;
  return bits.empty() ? 0.0 : static_cast<double>(sum) / static_cast<double>(bits.size());
}

inline std::size_t count_of(std::span<const std::uint8_t> bits) {
  std::size_t sum = 0;
  for (const auto b : bits) sum += b;
  return sum;
}

}  // namespace detail

/// Pd over `trials` H1 events and Pf over `trials` H0 events, with Wilson
/// bounds. For the two-stage detector the complexity ratio (1 + probability
/// of a second stage) is reported separately per hypothesis.
inline MetricsRow estimate_pd_pf(const BoundPoint& point, std::size_t trials, StreamKey key,
                                 std::uint64_t seed_for_row = 0) {
  if (trials < 1) throw DomainError("estimate_pd_pf: trials must be >= 1");
  validate_thresholds(point.detector, point.th);
  validate(point.scenario);

  const auto h1 = detail::run_population(point, Hypothesis::h1, trials, key);
  const auto h0 = detail::run_population(point, Hypothesis::h0, trials, key);

  MetricsRow row;
  row.scenario = point.scenario_id;
  row.detector = to_string(point.detector);
  row.snr_db = point.scenario.snr_db;
  row.pf_target = point.target_pf;
  row.trials = trials;
  row.seed = seed_for_row;

  const std::size_t pd_hits = detail::count_of(h1.decided_h1);
  const std::size_t pf_hits = detail::count_of(h0.decided_h1);
  const auto pd_ci = wilson_interval(pd_hits, trials);
  const auto pf_ci = wilson_interval(pf_hits, trials);
  row.pd_hat = static_cast<double>(pd_hits) / static_cast<double>(trials);
  row.pd_lo = pd_ci.lo;
  row.pd_hi = pd_ci.hi;
  row.pf_hat = static_cast<double>(pf_hits) / static_cast<double>(trials);
  row.pf_lo = pf_ci.lo;
  row.pf_hi = pf_ci.hi;
  if (point.detector == DetectorKind::two_stage) {
    row.gamma_h1 = 1.0 + detail::mean_of(h1.second_stage);
    row.gamma_h0 = 1.0 + detail::mean_of(h0.second_stage);
  }
  return row;
}

/// Sweep specification shared by the SNR and complexity-ratio experiments.
struct SweepSpec {
  ScenarioConfig scenario;  // template; snr_db is overwritten per grid point
  DetectorKind detector = DetectorKind::two_stage;
  Thresholds th;
  std::size_t bins = 15;
  std::vector<double> snr_grid_db;
  double target_pf = 0.1;
  std::size_t trials = 10000;
  std::uint64_t seed = 0;
  std::string scenario_id;
};

inline void validate(const SweepSpec& spec) {
  if (spec.snr_grid_db.empty()) throw EmptyRequestError("sweep: SNR grid must not be empty");
  if (spec.trials < 100) throw DomainError("sweep: trials must be >= 100");
  validate(spec.scenario);
}

/// One row per SNR grid point; rows are deterministic in (spec, seed).
inline std::vector<MetricsRow> sweep_snr(const SweepSpec& spec) {
  validate(spec);
  validate_thresholds(spec.detector, spec.th);
  const StreamKey master = master_stream(spec.seed);
  std::vector<MetricsRow> rows;
  rows.reserve(spec.snr_grid_db.size());
  for (std::size_t i = 0; i < spec.snr_grid_db.size(); ++i) {
    BoundPoint point{spec.scenario, spec.detector, spec.th, spec.bins, spec.target_pf,
                     spec.scenario_id};
    point.scenario.snr_db = spec.snr_grid_db[i];
    rows.push_back(estimate_pd_pf(point, spec.trials, master.child(i), spec.seed));
  }
  return rows;
}

/// Complexity-ratio sweep for the two-stage detector: gamma per SNR point for
/// the requested hypothesis population (H0 rows ignore the grid value except
/// as a label).
inline std::vector<MetricsRow> gamma_sweep(const SweepSpec& spec, Hypothesis population) {
  validate(spec);
  if (spec.detector != DetectorKind::two_stage)
    throw ConfigError("gamma_sweep: only the two-stage detector has a complexity ratio");
  validate_thresholds(spec.detector, spec.th);

  const StreamKey master = master_stream(spec.seed);
  std::vector<MetricsRow> rows;
  rows.reserve(spec.snr_grid_db.size());
  for (std::size_t i = 0; i < spec.snr_grid_db.size(); ++i) {
    BoundPoint point{spec.scenario, spec.detector, spec.th, spec.bins, spec.target_pf,
                     spec.scenario_id};
    point.scenario.snr_db = spec.snr_grid_db[i];
    const auto outcome = detail::run_population(point, population, spec.trials, master.child(i));

    MetricsRow row;
    row.scenario = spec.scenario_id;
    row.detector = to_string(spec.detector);
    row.snr_db = spec.snr_grid_db[i];
    row.pf_target = spec.target_pf;
    row.trials = spec.trials;
    row.seed = spec.seed;
    const std::size_t hits = detail::count_of(outcome.decided_h1);
    const auto ci = wilson_interval(hits, spec.trials);
    const double rate = static_cast<double>(hits) / static_cast<double>(spec.trials);
    const double gamma = 1.0 + detail::mean_of(outcome.second_stage);
    if (population == Hypothesis::h1) {
      row.pd_hat = rate;
      row.pd_lo = ci.lo;
      row.pd_hi = ci.hi;
      row.gamma_h1 = gamma;
    } else {
      row.pf_hat = rate;
      row.pf_lo = ci.lo;
      row.pf_hi = ci.hi;
      row.gamma_h0 = gamma;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

/// ROC tracing at a fixed SNR: for every target Pf, calibrate the detector
/// afresh and then measure (pf_hat, pd_hat). Stream layout keeps calibration
/// and measurement independent per grid point.
inline std::vector<MetricsRow> roc_curve(const BoundPoint& base, std::span<const double> pf_grid,
                                         std::size_t trials, std::size_t cal_trials,
                                         std::uint64_t seed) {
  if (pf_grid.empty()) throw EmptyRequestError("roc_curve: Pf grid must not be empty");
  const StreamKey master = master_stream(seed);
  std::vector<MetricsRow> rows;
  rows.reserve(pf_grid.size());
  for (std::size_t i = 0; i < pf_grid.size(); ++i) {
    const double pf = pf_grid[i];
    if (!(pf > 0.0) || !(pf < 1.0)) throw DomainError("roc_curve: target Pf must lie in (0, 1)");

    CalibrationSpec cal;
    cal.detector = base.detector;
    cal.target_pf = pf;
    cal.trials = cal_trials;
    cal.delta0 = base.th.delta0;
    cal.scenario = base.scenario;
    cal.bins = base.bins;

    BoundPoint point = base;
    point.target_pf = pf;
    const StreamKey cal_key = master.child(2 * i);
    switch (base.detector) {
      case DetectorKind::entropy_amplitude:
      case DetectorKind::entropy_power:
        point.th.lambda = calibrate_one_stage(cal, cal_key);
        break;
      case DetectorKind::two_stage:
        point.th.lambda = calibrate_two_stage(cal, cal_key);
        break;
      case DetectorKind::energy:
        point.th.energy_lambda = calibrate_energy(cal, cal_key);
        break;
    }
    rows.push_back(estimate_pd_pf(point, trials, master.child(2 * i + 1), seed));
  }
  return rows;
}

/// Noise-uncertainty experiment: thresholds stay fixed at their nominal
/// calibration while the generated noise power is offset per grid point.
/// Every offset reuses the same trial streams, so the entropy detectors see
/// exactly rescaled frames and their decisions cannot change; the
/// fixed-threshold energy detector collapses.
struct NoiseSweepSpec {
  ScenarioConfig scenario;  // uncertainty_offset_db is overwritten per point
  Thresholds th;            // two-stage lambda/delta0 and energy_lambda, both nominal
  std::size_t bins = 15;
  std::vector<double> offsets_db;
  std::vector<DetectorKind> detectors{DetectorKind::two_stage, DetectorKind::energy};
  double target_pf = 0.1;
  std::size_t trials = 10000;
  std::uint64_t seed = 0;
  std::string scenario_id;
};

inline std::vector<MetricsRow> noise_uncertainty_sweep(const NoiseSweepSpec& spec) {
  if (spec.offsets_db.empty()) throw EmptyRequestError("offsets grid must not be empty");
  if (spec.detectors.empty()) throw EmptyRequestError("detector list must not be empty");
  if (spec.trials < 100) throw DomainError("trials must be >= 100");

  const StreamKey master = master_stream(spec.seed);  // shared across offsets on purpose
  std::vector<MetricsRow> rows;
  rows.reserve(spec.offsets_db.size() * spec.detectors.size());
  for (const double offset : spec.offsets_db) {
    for (const auto kind : spec.detectors) {
      BoundPoint point{spec.scenario, kind, spec.th, spec.bins, spec.target_pf,
                       spec.scenario_id + "/offset" + format_double(offset) + "dB"};
      point.scenario.noise.uncertainty_offset_db = offset;
      rows.push_back(estimate_pd_pf(point, spec.trials, master, spec.seed));
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// cooperative comparison (the complexity-matched four-rule experiment)

/// Cooperative comparison at one SNR. Local two-stage detectors run on
/// N-sample blocks; the n-out-of-K baselines run one-stage power detectors on
/// 2N-sample blocks, so every scheme consumes the same 2N received samples
/// per user and trial. Local thresholds are bisected until the FUSED Pf hits
/// the target.
struct CooperativeSpec {
  ScenarioConfig scenario;  // frame_len = N, the two-stage local block length
  std::vector<FusionRule> rules{{FusionRuleKind::two_bit},
                                {FusionRuleKind::and_rule},
                                {FusionRuleKind::or_rule},
                                {FusionRuleKind::voting}};
  int users = 5;
  double delta0 = 0.3;
  std::size_t bins = 15;
  double target_pf = 0.1;
  std::size_t trials = 10000;
  std::size_t cal_trials = 20000;
  std::uint64_t seed = 0;
  UserChannelMode channel_mode = UserChannelMode::common_signal;
  std::string scenario_id;
};

/// Per-rule fused decisions on shared trials, for paired comparisons.
struct CooperativePoint {
  std::vector<std::string> rule_names;
  std::vector<double> local_lambda;
  std::vector<std::vector<std::uint8_t>> h1_decisions;  // [rule][trial]
  std::vector<std::vector<std::uint8_t>> h0_decisions;
};

namespace detail {

/// Entropy statistics of one user-trial: the two-stage pair on the two
/// N-blocks and the one-stage statistic on the full 2N block, all computed
/// from the same received samples.
struct UserStats {
  double ts1 = 0.0;
  double ts2 = 0.0;
  double os2n = 0.0;
};

inline std::vector<UserStats> cooperative_stats(const CooperativeSpec& spec, Hypothesis truth,
                                                std::size_t trials, StreamKey key) {
  const std::size_t n = spec.scenario.signal.frame_len;
  const std::size_t users = static_cast<std::size_t>(spec.users);
  std::vector<UserStats> stats(trials * users);
  parallel_for(trials, [&](std::size_t t) {
    const StreamKey trial = key.child(t);
    std::vector<double> signal;  // gain-scaled primary signal over 2N samples
    if (truth == Hypothesis::h1 && spec.channel_mode == UserChannelMode::common_signal) {
      Rng chan = trial.child(0).rng();
      const double gain = draw_channel_gain(spec.scenario.channel, chan);
      signal = synth_primary(spec.scenario.signal, 2 * n, spec.scenario.amplitude(), chan);
      for (auto& s : signal) s *= gain;
    }
    const double sigma = std::sqrt(spec.scenario.noise.actual_power_mw());
    std::vector<double> x(2 * n);
    for (std::size_t u = 0; u < users; ++u) {
      Rng rng = trial.child(u + 1).rng();
      if (truth == Hypothesis::h1 && spec.channel_mode == UserChannelMode::independent) {
        // per-user channel: gain and symbols precede the noise draws
        const double gain = draw_channel_gain(spec.scenario.channel, rng);
        signal = synth_primary(spec.scenario.signal, 2 * n, spec.scenario.amplitude(), rng);
        for (auto& s : signal) s *= gain;
      }
      for (std::size_t i = 0; i < 2 * n; ++i) {
        const double s = truth == Hypothesis::h1 ? signal[i] : 0.0;
        x[i] = s + sigma * rng.normal();
      }
      auto& us = stats[t * users + u];
      const std::span<const double> all(x);
      us.ts1 = spectrum_entropy(power_density(dft(all.first(n))).values, spec.bins);
      us.ts2 = spectrum_entropy(power_density(dft(all.subspan(n))).values, spec.bins);
      us.os2n = spectrum_entropy(power_density(dft(all)).values, spec.bins);
    }
  });
  return stats;
}

inline bool fused_decision(const CooperativeSpec& spec, const FusionRule& rule,
                           std::span<const UserStats> trial_stats, double lambda) {
  if (rule.kind == FusionRuleKind::two_bit) {
    Thresholds th{lambda, spec.delta0, 0.0};
    std::vector<TwoBitCode> codes;
    codes.reserve(trial_stats.size());
    for (const auto& us : trial_stats) {
      const double ts2 = us.ts2;
      codes.push_back(two_stage_rule(us.ts1, [ts2] { return ts2; }, th).two_bit);
    }
    return fuse_two_bit(codes).decision == Hypothesis::h1;
  }
  std::vector<int> bits;
  bits.reserve(trial_stats.size());
  for (const auto& us : trial_stats) bits.push_back(us.os2n <= lambda);
  return fuse_n_out_of_k(bits, rule.resolve_n(spec.users)).decision == Hypothesis::h1;
}

inline std::vector<std::uint8_t> fused_decisions(const CooperativeSpec& spec,
                                                 const FusionRule& rule,
                                                 std::span<const UserStats> stats,
                                                 std::size_t trials, double lambda) {
  const std::size_t users = static_cast<std::size_t>(spec.users);
  std::vector<std::uint8_t> out(trials);
  for (std::size_t t = 0; t < trials; ++t)
    out[t] = fused_decision(spec, rule, stats.subspan(t * users, users), lambda);
  return out;
}

/// Bisects the LOCAL threshold until the fused Pf over the calibration
/// population is within +-0.005 of the target.
inline double calibrate_fused(const CooperativeSpec& spec, const FusionRule& rule,
                              std::span<const UserStats> cal_stats, std::size_t cal_trials) {
  const auto pf_at = [&](double lambda) {
    const auto dec = fused_decisions(spec, rule, cal_stats, cal_trials, lambda);
    return mean_of(dec);
  };
  double lo = 0.0;
  double hi = std::log(static_cast<double>(spec.bins)) + 1.0;
  if (pf_at(lo) > spec.target_pf || pf_at(hi) < spec.target_pf)
    throw CalibrationRangeError(std::string("cooperative calibration: rule '") +
                                to_string(rule.kind) + "' cannot reach the target Pf");
  constexpr double kTolerance = 0.005;
  for (int iter = 0; iter < 40; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double pf = pf_at(mid);
    if (std::abs(pf - spec.target_pf) <= kTolerance) return mid;
    (pf < spec.target_pf ? lo : hi) = mid;
  }
  throw CalibrationRangeError("cooperative calibration did not converge in 40 iterations");
}

}  // namespace detail

inline CooperativePoint run_cooperative_point(const CooperativeSpec& spec) {
  if (spec.users < 1) throw DomainError("cooperative: users must be >= 1");
  if (spec.rules.empty()) throw EmptyRequestError("cooperative: no fusion rules selected");
  if (spec.trials < 100) throw DomainError("cooperative: trials must be >= 100");
  if (spec.cal_trials < 1000) throw InsufficientTrialsError("cooperative: cal_trials must be >= 1000");
  validate(spec.scenario);

  const StreamKey master = master_stream(spec.seed);
  const auto cal_stats =
      detail::cooperative_stats(spec, Hypothesis::h0, spec.cal_trials, master.child(0));
  const auto h0_stats =
      detail::cooperative_stats(spec, Hypothesis::h0, spec.trials, master.child(1));
  const auto h1_stats =
      detail::cooperative_stats(spec, Hypothesis::h1, spec.trials, master.child(2));

  CooperativePoint point;
  for (const auto& rule : spec.rules) {
    const double lambda = detail::calibrate_fused(spec, rule, cal_stats, spec.cal_trials);
    point.rule_names.emplace_back(to_string(rule.kind));
    point.local_lambda.push_back(lambda);
    point.h1_decisions.push_back(
        detail::fused_decisions(spec, rule, h1_stats, spec.trials, lambda));
    point.h0_decisions.push_back(
        detail::fused_decisions(spec, rule, h0_stats, spec.trials, lambda));
  }
  return point;
}

/// One row per (SNR, rule); all rules at one SNR share trial streams.
inline std::vector<MetricsRow> cooperative_sweep(const CooperativeSpec& spec,
                                                 std::span<const double> snr_grid_db) {
  if (snr_grid_db.empty()) throw EmptyRequestError("cooperative: SNR grid must not be empty");
  std::vector<MetricsRow> rows;
  for (std::size_t i = 0; i < snr_grid_db.size(); ++i) {
    CooperativeSpec at_snr = spec;
    at_snr.scenario.snr_db = snr_grid_db[i];
    at_snr.seed = spec.seed + i;  // distinct streams per grid point
    const auto point = run_cooperative_point(at_snr);
    for (std::size_t r = 0; r < point.rule_names.size(); ++r) {
      MetricsRow row;
      row.scenario = spec.scenario_id;
      row.detector = point.rule_names[r] == "two-bit" ? to_string(DetectorKind::two_stage)
                                                      : to_string(DetectorKind::entropy_power);
      row.rule = point.rule_names[r];
      row.users = spec.users;
      row.snr_db = snr_grid_db[i];
      row.pf_target = spec.target_pf;
      row.trials = spec.trials;
      row.seed = spec.seed;
      const std::size_t pd_hits = detail::count_of(point.h1_decisions[r]);
      const std::size_t pf_hits = detail::count_of(point.h0_decisions[r]);
      const auto pd_ci = wilson_interval(pd_hits, spec.trials);
      const auto pf_ci = wilson_interval(pf_hits, spec.trials);
      row.pd_hat = static_cast<double>(pd_hits) / static_cast<double>(spec.trials);
      row.pd_lo = pd_ci.lo;
      row.pd_hi = pd_ci.hi;
      row.pf_hat = static_cast<double>(pf_hits) / static_cast<double>(spec.trials);
      row.pf_lo = pf_ci.lo;
      row.pf_hi = pf_ci.hi;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace specsense
