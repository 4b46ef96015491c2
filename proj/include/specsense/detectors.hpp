#pragma once

// Single-sensor decision rules: one-stage entropy detectors on the spectrum
// amplitude and on the spectrum power density, a fixed-threshold energy
// baseline, and the two-stage entropy detector with its two-bit verdict.
//
// All entropy rules decide H1 when the statistic is <= the threshold,
// boundary included.

#include <concepts>
#include <cstddef>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "specsense/entropy.hpp"
#include "specsense/errors.hpp"
#include "specsense/signal.hpp"
#include "specsense/spectral.hpp"

namespace specsense {

enum class DetectorKind { entropy_amplitude, entropy_power, energy, two_stage };

inline const char* to_string(DetectorKind kind) {
  switch (kind) {
    case DetectorKind::entropy_amplitude: return "entropy-amplitude";
    case DetectorKind::entropy_power: return "entropy-power";
    case DetectorKind::energy: return "energy";
    case DetectorKind::two_stage: return "two-stage";
  }
  return "?";
}

inline std::optional<DetectorKind> detector_from_string(std::string_view name) {
  if (name == "entropy-amplitude") return DetectorKind::entropy_amplitude;
  if (name == "entropy-power") return DetectorKind::entropy_power;
  if (name == "energy") return DetectorKind::energy;
  if (name == "two-stage") return DetectorKind::two_stage;
  return std::nullopt;
}

/// Calibrated decision constants. lambda/delta0 are in nats; energy_lambda is
/// a linear power and is used only by the energy detector.
struct Thresholds {
  double lambda = 0.0;
  double delta0 = 0.0;
  double energy_lambda = 0.0;
};

struct OneStageResult {
  double statistic = 0.0;
  Hypothesis decision = Hypothesis::h0;
};

/// Two-bit local verdict: value equals the wire code (11, 10, 01, 00).
enum class TwoBitCode : unsigned {
  strong_h0 = 0b00,
  weak_h0 = 0b01,
  weak_h1 = 0b10,
  strong_h1 = 0b11,
};

inline const char* to_string(TwoBitCode code) {
  switch (code) {
    case TwoBitCode::strong_h0: return "00";
    case TwoBitCode::weak_h0: return "01";
    case TwoBitCode::weak_h1: return "10";
    case TwoBitCode::strong_h1: return "11";
  }
  return "?";
}

inline bool favors_h1(TwoBitCode code) {
  return code == TwoBitCode::strong_h1 || code == TwoBitCode::weak_h1;
}

struct TwoStageResult {
  double h_l1 = 0.0;
  std::optional<double> h_l2;
  int stages_used = 1;
  Hypothesis decision = Hypothesis::h0;
  TwoBitCode two_bit = TwoBitCode::strong_h0;
};

// ---------------------------------------------------------------------------
// statistics

inline double amplitude_entropy_statistic(const Frame& frame, std::size_t bins) {
  return spectrum_entropy(amplitude(dft(frame)).values, bins);
}

inline double power_entropy_statistic(const Frame& frame, std::size_t bins) {
  return spectrum_entropy(power_density(dft(frame)).values, bins);
}

/// Mean squared sample, a linear power in the same units as the noise model.
inline double energy_statistic(const Frame& frame) {
  double acc = 0.0;
  for (const double x : frame.samples) acc += x * x;
  return frame.samples.empty() ? 0.0 : acc / static_cast<double>(frame.samples.size());
}

// ---------------------------------------------------------------------------
// one-stage rules

inline OneStageResult detect_entropy_amplitude(const Frame& frame, double lambda,
                                               std::size_t bins) {
  const double h = amplitude_entropy_statistic(frame, bins);
  return {h, h <= lambda ? Hypothesis::h1 : Hypothesis::h0};
}

inline OneStageResult detect_entropy_power(const Frame& frame, double lambda, std::size_t bins) {
  const double h = power_entropy_statistic(frame, bins);
  return {h, h <= lambda ? Hypothesis::h1 : Hypothesis::h0};
}

inline OneStageResult detect_energy(const Frame& frame, double energy_lambda) {
  if (!(energy_lambda > 0.0)) throw DomainError("detect_energy: threshold must be positive");
  const double t = energy_statistic(frame);
  return {t, t >= energy_lambda ? Hypothesis::h1 : Hypothesis::h0};
}

// ---------------------------------------------------------------------------
// two-stage rule

/// Core two-stage rule on entropy values. `second_stage` is invoked at most
/// once, only when the first entropy lands in the doubted region
/// (lambda - delta0, lambda + delta0].
///
/// Stage-1 exits and confident stage-2 exits yield the strong codes; otherwise
/// the mean of the two entropies against lambda decides and yields a weak
/// code. The binary decision is the H1/H0 class of the code, which coincides
/// with the mean rule.
template <typename SecondStage>
  requires std::convertible_to<std::invoke_result_t<SecondStage&>, double>
TwoStageResult two_stage_rule(double h_l1, SecondStage&& second_stage, const Thresholds& th) {
  if (!(th.delta0 >= 0.0)) throw DomainError("two-stage: delta0 must be >= 0");

  TwoStageResult result;
  result.h_l1 = h_l1;
  if (h_l1 <= th.lambda - th.delta0) {
    result.decision = Hypothesis::h1;
    result.two_bit = TwoBitCode::strong_h1;
    return result;
  }
  if (h_l1 > th.lambda + th.delta0) {
    result.decision = Hypothesis::h0;
    result.two_bit = TwoBitCode::strong_h0;
    return result;
  }

  const double h_l2 = second_stage();
  result.h_l2 = h_l2;
  result.stages_used = 2;
  if (h_l2 <= th.lambda - th.delta0) {
    result.two_bit = TwoBitCode::strong_h1;
  } else if (h_l2 > th.lambda + th.delta0) {
    result.two_bit = TwoBitCode::strong_h0;
  } else {
    result.two_bit = (h_l1 + h_l2) / 2.0 <= th.lambda ? TwoBitCode::weak_h1 : TwoBitCode::weak_h0;
  }
  result.decision = favors_h1(result.two_bit) ? Hypothesis::h1 : Hypothesis::h0;
  return result;
}

/// Anything that can hand out observation frames on demand. Sources must
/// throw InsufficientDataError when exhausted.
template <typename S>
concept FrameSource = requires(S source) {
  { source.next() } -> std::convertible_to<Frame>;
};

template <FrameSource S>
TwoStageResult two_stage_detect(S& frames, const Thresholds& th, std::size_t bins) {
  const double h_l1 = power_entropy_statistic(frames.next(), bins);
  return two_stage_rule(
      h_l1, [&] { return power_entropy_statistic(frames.next(), bins); }, th);
}

template <FrameSource S>
TwoBitCode two_stage_two_bit(S& frames, const Thresholds& th, std::size_t bins) {
  return two_stage_detect(frames, th, bins).two_bit;
}

// ---------------------------------------------------------------------------
// frame sources

/// Replays a fixed list of frames; used by tests and by anything that wants
/// to feed recorded observations through a detector.
class FrameList {
 public:
  explicit FrameList(std::vector<Frame> frames) : frames_(std::move(frames)) {}

  Frame next() {
    if (pos_ >= frames_.size())
      throw InsufficientDataError("frame source exhausted after " + std::to_string(pos_) +
                                  " frame(s)");
    return frames_[pos_++];
  }

 private:
  std::vector<Frame> frames_;
  std::size_t pos_ = 0;
};

/// Generates the frames of one sensing event. The channel gain is drawn once
/// per event, so both blocks of a two-stage trial see the same fade; symbols
/// and noise are fresh per block.
class TrialFrameSource {
 public:
  TrialFrameSource(Hypothesis truth, const ScenarioConfig& scenario, Rng rng)
      : truth_(truth),
        scenario_(&scenario),
        rng_(rng),
        gain_(truth == Hypothesis::h1 ? draw_channel_gain(scenario.channel, rng_) : 1.0) {}

  Frame next() { return make_frame_with_gain(truth_, *scenario_, gain_, rng_); }

  double gain() const { return gain_; }

 private:
  Hypothesis truth_;
  const ScenarioConfig* scenario_;
  Rng rng_;  // declared before gain_ so the gain is the first draw
  double gain_;
};

// ---------------------------------------------------------------------------
// uniform front-end used by the Monte-Carlo drivers

struct Decision {
  bool is_h1 = false;
  int stages_used = 1;
};

template <FrameSource S>
Decision run_detector(DetectorKind kind, const Thresholds& th, std::size_t bins, S& frames) {
  switch (kind) {
    case DetectorKind::entropy_amplitude: {
      const auto r = detect_entropy_amplitude(frames.next(), th.lambda, bins);
      return {r.decision == Hypothesis::h1, 1};
    }
    case DetectorKind::entropy_power: {
      const auto r = detect_entropy_power(frames.next(), th.lambda, bins);
      return {r.decision == Hypothesis::h1, 1};
    }
    case DetectorKind::energy: {
      const auto r = detect_energy(frames.next(), th.energy_lambda);
      return {r.decision == Hypothesis::h1, 1};
    }
    case DetectorKind::two_stage: {
      const auto r = two_stage_detect(frames, th, bins);
      return {r.decision == Hypothesis::h1, r.stages_used};
    }
  }
  throw ConfigError("run_detector: unknown detector kind");
}

}  // namespace specsense
