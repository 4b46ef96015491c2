#pragma once

// Shared helpers for the test suites: scenario builders and the brute-force
// transform oracle the fast path is checked against.

#include <complex>
#include <numbers>
#include <span>
#include <vector>

#include "specsense/signal.hpp"

namespace testsupport {

inline specsense::ScenarioConfig make_scenario(std::size_t frame_len, double snr_db,
                                               specsense::ChannelKind channel,
                                               double noise_dbmw = -95.0,
                                               double offset_db = 0.0) {
  specsense::ScenarioConfig sc;
  sc.signal.symbol_rate_hz = 1e6;
  sc.signal.sample_rate_hz = 64e6;
  sc.signal.frame_len = frame_len;
  sc.noise.nominal_power_dbmw = noise_dbmw;
  sc.noise.uncertainty_offset_db = offset_db;
  sc.channel = channel;
  sc.snr_db = snr_db;
  return sc;
}

/// Direct O(N^2) evaluation of bins[k] = (1/N) sum_n x(n) exp(-j 2 pi k n / N).
/// Deliberately independent of the radix-2 implementation.
inline std::vector<std::complex<double>> direct_dft(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> bins(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) {
      const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) *
                           static_cast<double>(i) / static_cast<double>(n);
      acc += x[i] * std::complex<double>(std::cos(angle), std::sin(angle));
    }
    bins[k] = acc / static_cast<double>(n);
  }
  return bins;
}

/// Random unit-scale samples (standard normal), handy where the scenario
/// machinery would just get in the way.
inline std::vector<double> random_samples(std::size_t n, specsense::Rng& rng) {
  std::vector<double> x(n);
  for (auto& v : x) v = rng.normal();
  return x;
}

}  // namespace testsupport
