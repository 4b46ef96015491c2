#pragma once

// Observation-frame synthesis under the binary hypotheses: rectangular-pulse
// BPSK primary signal, Rayleigh block fading, and AWGN whose generated power
// may deviate from the nominal value by a noise-uncertainty offset.

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "specsense/errors.hpp"
#include "specsense/rng.hpp"

namespace specsense {

enum class Hypothesis : int { h0 = 0, h1 = 1 };

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

constexpr bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

struct SignalParams {
  double symbol_rate_hz = 1e6;
  double sample_rate_hz = 64e6;
  std::size_t frame_len = 1024;

  /// Samples per symbol; the sample rate must be an integer multiple of the
  /// symbol rate.
  std::size_t samples_per_symbol() const {
    if (!(symbol_rate_hz > 0.0) || !(sample_rate_hz > 0.0))
      throw DomainError("SignalParams: rates must be positive");
    const double ratio = sample_rate_hz / symbol_rate_hz;
    const double rounded = std::round(ratio);
    if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * ratio)
      throw DomainError("SignalParams: sample rate must be an integer multiple of the symbol rate");
    return static_cast<std::size_t>(rounded);
  }
};

struct NoiseModel {
  double nominal_power_dbmw = -95.0;
  double uncertainty_offset_db = 0.0;

  double nominal_power_mw() const { return db_to_linear(nominal_power_dbmw); }
  /// Power of the noise actually generated, in linear milliwatt.
  double actual_power_mw() const { return db_to_linear(nominal_power_dbmw + uncertainty_offset_db); }
};

enum class ChannelKind { awgn_only, rayleigh_block };

struct ScenarioConfig {
  SignalParams signal;
  NoiseModel noise;
  ChannelKind channel = ChannelKind::rayleigh_block;
  double snr_db = -12.0;

  /// Signal amplitude such that the average received SNR over fading
  /// (E[gain^2] = 1) equals snr_db relative to the generated noise power.
  double amplitude() const { return std::sqrt(noise.actual_power_mw() * db_to_linear(snr_db)); }
};

/// One block of real time-domain samples, the unit of detection.
struct Frame {
  std::vector<double> samples;
  Hypothesis truth = Hypothesis::h0;
  double gain = 1.0;               // realized channel gain; 1.0 under AWGN-only
  double actual_noise_power = 0.0; // linear mW
};

inline void validate(const SignalParams& params) {
  if (!is_power_of_two(params.frame_len))
    throw DomainError("SignalParams: frame_len must be a power of two, got " +
                      std::to_string(params.frame_len));
  params.samples_per_symbol();
}

inline void validate(const ScenarioConfig& scenario) {
  validate(scenario.signal);
  if (!std::isfinite(scenario.snr_db))
    throw DomainError("ScenarioConfig: snr_db must be finite");
  if (!std::isfinite(scenario.noise.nominal_power_dbmw) ||
      !std::isfinite(scenario.noise.uncertainty_offset_db))
    throw DomainError("ScenarioConfig: noise powers must be finite");
}

/// Independent equiprobable +1/-1 symbols.
inline std::vector<int> gen_bpsk_symbols(std::size_t count, Rng& rng) {
  if (count == 0) throw EmptyRequestError("gen_bpsk_symbols: count must be >= 1");
  std::vector<int> symbols(count);
  for (auto& s : symbols) s = rng.sign();
  return symbols;
}

/// Rectangular-pulse baseband BPSK: every sample is +amplitude or -amplitude,
/// constant within a symbol interval.
inline std::vector<double> synth_primary(const SignalParams& params, std::size_t num_samples,
                                         double amplitude, Rng& rng) {
  if (num_samples == 0) throw EmptyRequestError("synth_primary: num_samples must be >= 1");
  if (!(amplitude >= 0.0)) throw DomainError("synth_primary: amplitude must be >= 0");
  const std::size_t sps = params.samples_per_symbol();
  const auto symbols = gen_bpsk_symbols((num_samples + sps - 1) / sps, rng);
  std::vector<double> out(num_samples);
  for (std::size_t i = 0; i < num_samples; ++i) out[i] = amplitude * symbols[i / sps];
  return out;
}

inline double draw_channel_gain(ChannelKind kind, Rng& rng) {
  return kind == ChannelKind::rayleigh_block ? rng.rayleigh_gain() : 1.0;
}

/// Frame with an externally chosen channel gain. Draw order under H1 is
/// symbols first, then noise.
inline Frame make_frame_with_gain(Hypothesis truth, const ScenarioConfig& scenario, double gain,
                                  Rng& rng) {
  validate(scenario);
  const std::size_t n = scenario.signal.frame_len;
  Frame frame;
  frame.truth = truth;
  frame.actual_noise_power = scenario.noise.actual_power_mw();
  frame.samples.resize(n);
  const double sigma = std::sqrt(frame.actual_noise_power);
  if (truth == Hypothesis::h1) {
    frame.gain = gain;
    const auto signal = synth_primary(scenario.signal, n, scenario.amplitude(), rng);
    for (std::size_t i = 0; i < n; ++i) frame.samples[i] = gain * signal[i] + sigma * rng.normal();
  } else {
    frame.gain = 1.0;
    for (auto& x : frame.samples) x = sigma * rng.normal();
  }
  return frame;
}

/// Frame under the given hypothesis; the fading gain (if any) is drawn first.
inline Frame make_frame(Hypothesis truth, const ScenarioConfig& scenario, Rng& rng) {
  const double gain =
      truth == Hypothesis::h1 ? draw_channel_gain(scenario.channel, rng) : 1.0;
  return make_frame_with_gain(truth, scenario, gain, rng);
}

}  // namespace specsense
