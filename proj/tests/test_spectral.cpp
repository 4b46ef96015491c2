#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "specsense/spectral.hpp"
#include "support/helpers.hpp"

using namespace specsense;
using testsupport::direct_dft;
using testsupport::make_scenario;
using testsupport::random_samples;
using Catch::Approx;

TEST_CASE("constant input concentrates in the DC bin") {
  const std::vector<double> x(16, 3.25);
  const auto spec = dft(std::span<const double>(x));
  REQUIRE(std::abs(spec.bins[0] - std::complex<double>(3.25, 0.0)) < 1e-12);
  for (std::size_t k = 1; k < 16; ++k) REQUIRE(std::abs(spec.bins[k]) < 1e-12);
}

TEST_CASE("fast transform matches the direct evaluation") {
  Rng rng(21);
  for (const std::size_t n : {std::size_t{8}, std::size_t{64}, std::size_t{256}}) {
    const auto x = random_samples(n, rng);
    const auto fast = dft(std::span<const double>(x));
    const auto slow = direct_dft(x);
    for (std::size_t k = 0; k < n; ++k) REQUIRE(std::abs(fast.bins[k] - slow[k]) < 1e-12);
  }
}

TEST_CASE("Parseval identity under the 1/N normalization") {
  Rng rng(22);
  const auto x = random_samples(1024, rng);
  const auto spec = dft(std::span<const double>(x));
  double lhs = 0.0;
  for (const auto& bin : spec.bins) lhs += std::norm(bin);
  double rhs = 0.0;
  for (const double v : x) rhs += v * v;
  rhs /= static_cast<double>(x.size());
  REQUIRE(lhs == Approx(rhs).epsilon(1e-9));
}

TEST_CASE("real input gives a conjugate-symmetric spectrum") {
  Rng rng(23);
  const auto x = random_samples(128, rng);
  const auto spec = dft(std::span<const double>(x));
  for (std::size_t k = 1; k < 128; ++k) {
    const auto diff = spec.bins[k] - std::conj(spec.bins[128 - k]);
    REQUIRE(std::abs(diff) < 1e-12);
  }
}

TEST_CASE("transform is linear") {
  Rng rng(24);
  const auto x = random_samples(64, rng);
  const auto y = random_samples(64, rng);
  const double a = 1.7, b = -0.4;
  std::vector<double> combo(64);
  for (std::size_t i = 0; i < 64; ++i) combo[i] = a * x[i] + b * y[i];
  const auto sx = dft(std::span<const double>(x));
  const auto sy = dft(std::span<const double>(y));
  const auto sc = dft(std::span<const double>(combo));
  for (std::size_t k = 0; k < 64; ++k) {
    const auto expected = a * sx.bins[k] + b * sy.bins[k];
    REQUIRE(std::abs(sc.bins[k] - expected) < 1e-9 * (1.0 + std::abs(expected)));
  }
}

TEST_CASE("scaling the input scales spectrum and power density") {
  Rng rng(25);
  const auto x = random_samples(64, rng);
  std::vector<double> scaled(64);
  const double c = 3.5;
  for (std::size_t i = 0; i < 64; ++i) scaled[i] = c * x[i];
  const auto s1 = dft(std::span<const double>(x));
  const auto s2 = dft(std::span<const double>(scaled));
  const auto p1 = power_density(s1);
  const auto p2 = power_density(s2);
  for (std::size_t k = 0; k < 64; ++k) {
    REQUIRE(std::abs(s2.bins[k] - c * s1.bins[k]) < 1e-12 * (1.0 + std::abs(s1.bins[k])));
    REQUIRE(p2.values[k] == Approx(c * c * p1.values[k]).margin(1e-15));
  }
}

TEST_CASE("non-power-of-two lengths are rejected") {
  const std::vector<double> x(100, 0.0);
  REQUIRE_THROWS_AS(dft(std::span<const double>(x)), UnsupportedLengthError);
  REQUIRE_THROWS_AS(dft(std::span<const double>()), UnsupportedLengthError);
}

TEST_CASE("amplitude is the elementwise modulus") {
  Spectrum spec{{{3.0, 4.0}, {0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}}};
  const auto amp = amplitude(spec);
  REQUIRE(amp.values == std::vector<double>{5.0, 0.0, 0.0, 0.0});
}

TEST_CASE("amplitude of the zero spectrum is zero") {
  Spectrum spec{std::vector<std::complex<double>>(8, {0.0, 0.0})};
  for (const double v : amplitude(spec).values) REQUIRE(v == 0.0);
}

TEST_CASE("conjugate bin pairs have equal amplitude") {
  Rng rng(26);
  const auto x = random_samples(32, rng);
  const auto amp = amplitude(dft(std::span<const double>(x)));
  for (std::size_t k = 1; k < 32; ++k)
    REQUIRE(amp.values[k] == Approx(amp.values[32 - k]).margin(1e-12));
}

TEST_CASE("power density is the squared modulus, no square root") {
  Spectrum spec{{{3.0, 4.0}}};
  REQUIRE(power_density(spec).values == std::vector<double>{25.0});
}

TEST_CASE("power density equals amplitude squared") {
  Rng rng(27);
  const auto x = random_samples(64, rng);
  const auto spec = dft(std::span<const double>(x));
  const auto amp = amplitude(spec);
  const auto pow = power_density(spec);
  for (std::size_t k = 0; k < 64; ++k)
    REQUIRE(pow.values[k] == Approx(amp.values[k] * amp.values[k]).epsilon(1e-12));
}

TEST_CASE("H0 bin power matches the white-noise model") {
  // Mean of X^2(k) over the non-DC, non-Nyquist bins of pure noise frames is
  // sigma0^2 / N (twice the per-component variance sigma0^2 / 2N).
  const auto sc = make_scenario(1024, 0.0, ChannelKind::awgn_only, -95.0);
  Rng rng(28);
  const double sigma_sq = sc.noise.actual_power_mw();
  double sum = 0.0;
  std::size_t count = 0;
  for (int f = 0; f < 100; ++f) {
    const auto pow = power_density(dft(make_frame(Hypothesis::h0, sc, rng)));
    for (std::size_t k = 1; k < 1024; ++k) {
      if (k == 512) continue;
      sum += pow.values[k];
      ++count;
    }
  }
  REQUIRE(count >= 100000);
  const double expected = sigma_sq / 1024.0;
  REQUIRE(sum / static_cast<double>(count) == Approx(expected).epsilon(0.03));
}
