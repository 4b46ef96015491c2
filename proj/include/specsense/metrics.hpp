#pragma once

// Measurement bookkeeping shared by all experiments: Wilson score intervals,
// paired-difference intervals for common-random-number comparisons, and the
// fixed CSV row format.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "specsense/errors.hpp"
#include "specsense/text.hpp"

namespace specsense {

inline constexpr double kZ95 = 1.959963984540054;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Wilson score interval for a binomial proportion.
inline Interval wilson_interval(std::size_t successes, std::size_t trials, double z = kZ95) {
  if (trials == 0) throw DomainError("wilson_interval: trials must be >= 1");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double zz = z * z;
  const double denom = 1.0 + zz / n;
  const double center = (p + zz / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + zz / (4.0 * n * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

struct PairedDiff {
  double mean = 0.0;
  double lo = 0.0;
  double hi = 0.0;

  bool excludes_zero() const { return lo > 0.0 || hi < 0.0; }
  double width() const { return hi - lo; }
};

/// Normal-approximation interval on mean(a - b) for paired binary outcomes.
inline PairedDiff paired_diff_interval(std::span<const std::uint8_t> a,
                                       std::span<const std::uint8_t> b, double z = kZ95) {
  if (a.size() != b.size()) throw DomainError("paired_diff_interval: size mismatch");
  if (a.size() < 2) throw DomainError("paired_diff_interval: need at least two pairs");
  const double n = static_cast<double>(a.size());
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    sum += d;
    sum_sq += d * d;
  }
  const double mean = sum / n;
  const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
  const double half = z * std::sqrt(var / n);
  return {mean, mean - half, mean + half};
}

/// One Monte-Carlo measurement point. Optional fields stay empty in the CSV.
struct MetricsRow {
  std::string scenario;
  std::string detector;
  std::string rule;
  std::optional<int> users;
  double snr_db = 0.0;
  double pf_target = 0.0;
  std::optional<double> pd_hat, pd_lo, pd_hi;
  std::optional<double> pf_hat, pf_lo, pf_hi;
  std::optional<double> gamma_h1, gamma_h0;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
};

inline constexpr const char* kCsvHeader =
    "scenario,detector,rule,users,snr_db,pf_target,pd_hat,pd_lo,pd_hi,"
    "pf_hat,pf_lo,pf_hi,gamma_h1,gamma_h0,trials,seed";

inline std::string to_csv_line(const MetricsRow& row) {
  const auto opt = [](const std::optional<double>& v) {
    return v ? format_double(*v) : std::string();
  };
  std::string line;
  line += row.scenario;
  line += ',';
  line += row.detector;
  line += ',';
  line += row.rule;
  line += ',';
  line += row.users ? std::to_string(*row.users) : std::string();
  line += ',';
  line += format_double(row.snr_db);
  line += ',';
  line += format_double(row.pf_target);
  line += ',';
  line += opt(row.pd_hat);
  line += ',';
  line += opt(row.pd_lo);
  line += ',';
  line += opt(row.pd_hi);
  line += ',';
  line += opt(row.pf_hat);
  line += ',';
  line += opt(row.pf_lo);
  line += ',';
  line += opt(row.pf_hi);
  line += ',';
  line += opt(row.gamma_h1);
  line += ',';
  line += opt(row.gamma_h0);
  line += ',';
  line += std::to_string(row.trials);
  line += ',';
  line += std::to_string(row.seed);
  return line;
}

inline std::string to_csv(std::span<const MetricsRow> rows) {
  std::string text = kCsvHeader;
  text += '\n';
  for (const auto& row : rows) {
    text += to_csv_line(row);
    text += '\n';
  }
  return text;
}

inline void write_csv_file(const std::filesystem::path& path, std::span<const MetricsRow> rows) {
  std::ofstream out(path, std::ios::binary);  // binary keeps the byte-for-byte contract
  if (!out) throw ConfigError("cannot write CSV: " + path.string());
  out << to_csv(rows);
  if (!out.flush()) throw ConfigError("failed writing CSV: " + path.string());
}

}  // namespace specsense
