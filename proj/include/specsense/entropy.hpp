#pragma once

// Histogram-based information entropy (natural log) over a spectrum
// observable, plus the closed-form white-noise entropy constants used as
// regression anchors.
//
// The estimator bins over the empirical [min, max] range, so it is invariant
// under positive rescaling of the input. That invariance is what makes the
// entropy detectors immune to noise-power uncertainty.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "specsense/errors.hpp"

namespace specsense {

/// Uniform-width histogram over [y_min, y_max]; the maximum value is assigned
/// to the last bin. A degenerate range (all values equal) puts everything in
/// the first bin.
struct Histogram {
  std::size_t bin_count = 0;
  double y_min = 0.0;
  double y_max = 0.0;
  std::vector<std::size_t> counts;

  double bin_width() const {
    return bin_count ? (y_max - y_min) / static_cast<double>(bin_count) : 0.0;
  }
};

inline Histogram build_histogram(std::span<const double> values, std::size_t bin_count) {
  if (values.empty()) throw EmptyRequestError("build_histogram: need at least one value");
  if (bin_count == 0) throw DomainError("build_histogram: bin count must be >= 1");

  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  Histogram hist{bin_count, *lo, *hi, std::vector<std::size_t>(bin_count, 0)};
  if (hist.y_max == hist.y_min) {
    hist.counts[0] = values.size();
    return hist;
  }
  const double scale = static_cast<double>(bin_count) / (hist.y_max - hist.y_min);
  for (const double v : values) {
    const auto idx = static_cast<std::size_t>((v - hist.y_min) * scale);
    hist.counts[std::min(idx, bin_count - 1)] += 1;
  }
  return hist;
}

/// H = -sum_i (k_i/N) ln(k_i/N), with 0 ln 0 := 0. Always in [0, ln L].
inline double estimate_entropy(const Histogram& hist) {
  double total = 0.0;
  for (const auto c : hist.counts) total += static_cast<double>(c);
  if (total < 1.0) throw EmptyRequestError("estimate_entropy: histogram is empty");
  double entropy = 0.0;
  for (const auto c : hist.counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / total;
    entropy -= p * std::log(p);
  }
  return entropy;
}

/// The complete estimator: histogram over the empirical range, then entropy.
inline double spectrum_entropy(std::span<const double> values, std::size_t bin_count) {
  return estimate_entropy(build_histogram(values, bin_count));
}

namespace detail {

inline void check_rho(double rho) {
  if (!(rho > 0.0) || !(rho < 1.0)) throw DomainError("rho must lie in (0, 1)");
}

}  // namespace detail

/// Entropy of the spectrum amplitude of white Gaussian noise with L bins:
/// ln(L / (C1 sqrt(2))) + gamma/2 + 1, where C1 = sqrt(-2 ln(1 - rho)) and
/// gamma is the Euler-Mascheroni constant. Independent of the noise power.
inline double theoretical_amplitude_entropy(std::size_t bin_count, double rho) {
  if (bin_count == 0) throw DomainError("bin count must be >= 1");
  detail::check_rho(rho);
  const double c1 = std::sqrt(-2.0 * std::log1p(-rho));
  return std::log(static_cast<double>(bin_count) / (c1 * std::numbers::sqrt2)) +
         std::numbers::egamma / 2.0 + 1.0;
}

/// Entropy of the spectrum power density of white Gaussian noise with L bins:
/// 1 + ln(2 L / C2), where C2 = -2 ln(1 - rho). Independent of the noise
/// power; one square root cheaper per bin than the amplitude route.
inline double theoretical_power_entropy(std::size_t bin_count, double rho) {
  if (bin_count == 0) throw DomainError("bin count must be >= 1");
  detail::check_rho(rho);
  const double c2 = -2.0 * std::log1p(-rho);
  return 1.0 + std::log(2.0 * static_cast<double>(bin_count) / c2);
}

}  // namespace specsense
