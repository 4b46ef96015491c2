#pragma once

// Decision fusion at the common receiver: classical n-out-of-K rules over
// one-bit local decisions, and signed fusion of two-bit two-stage verdicts.

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "specsense/detectors.hpp"
#include "specsense/errors.hpp"

namespace specsense {

enum class FusionRuleKind { and_rule, or_rule, voting, n_out_of_k, two_bit };

inline const char* to_string(FusionRuleKind kind) {
  switch (kind) {
    case FusionRuleKind::and_rule: return "and";
    case FusionRuleKind::or_rule: return "or";
    case FusionRuleKind::voting: return "voting";
    case FusionRuleKind::n_out_of_k: return "n-out-of-k";
    case FusionRuleKind::two_bit: return "two-bit";
  }
  return "?";
}

inline std::optional<FusionRuleKind> fusion_rule_from_string(std::string_view name) {
  if (name == "and") return FusionRuleKind::and_rule;
  if (name == "or") return FusionRuleKind::or_rule;
  if (name == "voting") return FusionRuleKind::voting;
  if (name == "n-out-of-k") return FusionRuleKind::n_out_of_k;
  if (name == "two-bit") return FusionRuleKind::two_bit;
  return std::nullopt;
}

struct FusionRule {
  FusionRuleKind kind = FusionRuleKind::voting;
  int n = 0;  // only used by n_out_of_k

  /// The vote threshold this rule resolves to for a given user count.
  /// OR is 1-out-of-K, AND is K-out-of-K, VOTING is the smallest integer
  /// larger than K/2.
  int resolve_n(int users) const {
    switch (kind) {
      case FusionRuleKind::and_rule: return users;
      case FusionRuleKind::or_rule: return 1;
      case FusionRuleKind::voting: return users / 2 + 1;
      case FusionRuleKind::n_out_of_k: return n;
      case FusionRuleKind::two_bit: throw ConfigError("two-bit rule has no vote threshold");
    }
    throw ConfigError("unknown fusion rule");
  }
};

struct FusionResult {
  Hypothesis decision = Hypothesis::h0;
  int aggregate = 0;  // sum of one-bit decisions, or sum of signed two-bit values
};

/// Signed image of a two-bit verdict: 11 -> 2, 10 -> 1, 01 -> -1, 00 -> -2.
inline int map_two_bit_to_int(TwoBitCode code) {
  switch (code) {
    case TwoBitCode::strong_h1: return 2;
    case TwoBitCode::weak_h1: return 1;
    case TwoBitCode::weak_h0: return -1;
    case TwoBitCode::strong_h0: return -2;
  }
  throw ConfigError("unknown two-bit code");
}

/// Z = sum of signed values; Z > 0 decides H1 and Z < 0 decides H0. A tie
/// goes to H1 only when strictly more than half the users reported positive.
inline FusionResult fuse_two_bit(std::span<const TwoBitCode> reports) {
  if (reports.empty()) throw EmptyRequestError("fuse_two_bit: no reports");
  int z = 0;
  std::size_t positives = 0;
  for (const auto code : reports) {
    const int f = map_two_bit_to_int(code);
    z += f;
    if (f > 0) ++positives;
  }
  Hypothesis decision;
  if (z > 0) {
    decision = Hypothesis::h1;
  } else if (z < 0) {
    decision = Hypothesis::h0;
  } else {
    decision = 2 * positives > reports.size() ? Hypothesis::h1 : Hypothesis::h0;
  }
  return {decision, z};
}

/// H1 iff at least n of the one-bit decisions are 1.
inline FusionResult fuse_n_out_of_k(std::span<const int> decisions, int n) {
  if (decisions.empty()) throw EmptyRequestError("fuse_n_out_of_k: no decisions");
  if (n < 1 || static_cast<std::size_t>(n) > decisions.size())
    throw DomainError("fuse_n_out_of_k: n must lie in [1, K]");
  int votes = 0;
  for (const int d : decisions) votes += d != 0;
  return {votes >= n ? Hypothesis::h1 : Hypothesis::h0, votes};
}

/// How the cooperating users' observations are coupled. With `independent`
/// every user draws its own fading gain and symbol stream; with
/// `common_signal` one faded primary-signal realization is shared by all
/// users and only the noise is per-user. The latter reproduces cooperative
/// results where the diversity across sensors comes from noise alone.
enum class UserChannelMode { independent, common_signal };

struct CooperativeConfig {
  FusionRule rule;
  DetectorKind local_detector = DetectorKind::two_stage;
  Thresholds th;
  std::size_t bins = 15;
  int users = 5;
  UserChannelMode channel_mode = UserChannelMode::independent;
};

namespace detail {

/// Frames over a fixed primary-signal realization; noise is fresh per frame.
class SharedSignalFrameSource {
 public:
  SharedSignalFrameSource(const ScenarioConfig& scenario, Hypothesis truth,
                          std::span<const double> scaled_signal, double gain, Rng rng,
                          std::size_t max_frames)
      : scenario_(&scenario),
        truth_(truth),
        signal_(scaled_signal),
        gain_(gain),
        rng_(rng),
        frames_left_(max_frames) {}

  Frame next() {
    const std::size_t n = scenario_->signal.frame_len;
    if (frames_left_ == 0 || (truth_ == Hypothesis::h1 && offset_ + n > signal_.size()))
      throw InsufficientDataError("shared-signal frame source exhausted");
    Frame frame;
    frame.truth = truth_;
    frame.gain = gain_;
    frame.actual_noise_power = scenario_->noise.actual_power_mw();
    frame.samples.resize(n);
    const double sigma = std::sqrt(frame.actual_noise_power);
    for (std::size_t i = 0; i < n; ++i) {
      const double s = truth_ == Hypothesis::h1 ? signal_[offset_ + i] : 0.0;
      frame.samples[i] = s + sigma * rng_.normal();
    }
    if (truth_ == Hypothesis::h1) offset_ += n;
    --frames_left_;
    return frame;
  }

 private:
  const ScenarioConfig* scenario_;
  Hypothesis truth_;
  std::span<const double> signal_;
  double gain_;
  Rng rng_;
  std::size_t offset_ = 0;
  std::size_t frames_left_;
};

}  // namespace detail

/// One fusion round: every user senses the same hypothesis and reports its
/// local decision over an error-free channel. Stream layout: trial.child(0)
/// drives the shared channel realization (common_signal mode), trial.child(u+1)
/// drives user u.
inline FusionResult run_cooperative_round(const ScenarioConfig& scenario,
                                          const CooperativeConfig& config, Hypothesis truth,
                                          StreamKey trial) {
  if (config.users < 1) throw DomainError("run_cooperative_round: users must be >= 1");
  if (config.rule.kind == FusionRuleKind::two_bit &&
      config.local_detector != DetectorKind::two_stage)
    throw ConfigError("two-bit fusion requires two-stage local detectors");
  validate(scenario);

  const std::size_t frames_per_user = config.local_detector == DetectorKind::two_stage ? 2 : 1;

  // Shared faded signal, prepared once when users observe a common channel.
  std::vector<double> shared_signal;
  double shared_gain = 1.0;
  if (config.channel_mode == UserChannelMode::common_signal && truth == Hypothesis::h1) {
    Rng chan = trial.child(0).rng();
    shared_gain = draw_channel_gain(scenario.channel, chan);
    shared_signal = synth_primary(scenario.signal, frames_per_user * scenario.signal.frame_len,
                                  scenario.amplitude(), chan);
    for (auto& s : shared_signal) s *= shared_gain;
  }

  std::vector<TwoBitCode> codes;
  std::vector<int> bits;
  for (int u = 0; u < config.users; ++u) {
    Rng user_rng = trial.child(static_cast<std::uint64_t>(u) + 1).rng();
    const auto sense = [&](auto& source) {
      if (config.rule.kind == FusionRuleKind::two_bit)
        codes.push_back(two_stage_two_bit(source, config.th, config.bins));
      else
        bits.push_back(run_detector(config.local_detector, config.th, config.bins, source).is_h1);
    };
    if (config.channel_mode == UserChannelMode::common_signal) {
      detail::SharedSignalFrameSource source(scenario, truth, shared_signal, shared_gain,
                                             user_rng, frames_per_user);
      sense(source);
    } else {
      TrialFrameSource source(truth, scenario, user_rng);
      sense(source);
    }
  }

  if (config.rule.kind == FusionRuleKind::two_bit) return fuse_two_bit(codes);
  return fuse_n_out_of_k(bits, config.rule.resolve_n(config.users));
}

}  // namespace specsense
