#pragma once

// Length-N complex spectrum with the 1/N forward normalization, and the
// amplitude / power-density observables derived from it.

#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "specsense/errors.hpp"
#include "specsense/signal.hpp"

namespace specsense {

struct Spectrum {
  std::vector<std::complex<double>> bins;
};

struct AmplitudeSpectrum {
  std::vector<double> values;  // sqrt(re^2 + im^2) per bin
};

struct PowerSpectrum {
  std::vector<double> values;  // re^2 + im^2 per bin, no square root
};

namespace detail {

// Forward twiddle factors exp(-2*pi*i*j/n), j < n/2, cached per thread.
inline const std::vector<std::complex<double>>& twiddle_table(std::size_t n) {
  thread_local std::unordered_map<std::size_t, std::vector<std::complex<double>>> cache;
  auto& table = cache[n];
  if (table.empty() && n >= 2) {
    table.resize(n / 2);
    for (std::size_t j = 0; j < n / 2; ++j)
      table[j] = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(j) /
                                     static_cast<double>(n));
  }
  return table;
}

}  // namespace detail

/// Normalized transform: bins[k] = (1/N) sum_n x(n) exp(-j 2 pi k n / N).
/// Radix-2 only; other lengths raise UnsupportedLengthError.
inline Spectrum dft(std::span<const double> samples) {
  const std::size_t n = samples.size();
  if (!is_power_of_two(n))
    throw UnsupportedLengthError("dft: length must be a power of two, got " + std::to_string(n));

  std::vector<std::complex<double>> a(samples.begin(), samples.end());
  if (n == 1) return {std::move(a)};

  // bit-reversal permutation
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }

  const auto& tw = detail::twiddle_table(n);
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len >> 1;
    const std::size_t stride = n / len;
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const auto w = tw[k * stride];
        const auto u = a[start + k];
        const auto v = a[start + k + half] * w;
        a[start + k] = u + v;
        a[start + k + half] = u - v;
      }
    }
  }

  const double scale = 1.0 / static_cast<double>(n);
  for (auto& bin : a) bin *= scale;
  return {std::move(a)};
}

inline Spectrum dft(const Frame& frame) { return dft(std::span<const double>(frame.samples)); }

inline AmplitudeSpectrum amplitude(const Spectrum& spec) {
  AmplitudeSpectrum out;
  out.values.reserve(spec.bins.size());
  for (const auto& bin : spec.bins) out.values.push_back(std::abs(bin));
  return out;
}

inline PowerSpectrum power_density(const Spectrum& spec) {
  PowerSpectrum out;
  out.values.reserve(spec.bins.size());
  for (const auto& bin : spec.bins) out.values.push_back(std::norm(bin));
  return out;
}

}  // namespace specsense
