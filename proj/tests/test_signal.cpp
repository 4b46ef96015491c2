#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "specsense/signal.hpp"
#include "support/helpers.hpp"

using namespace specsense;
using testsupport::make_scenario;
using Catch::Approx;

TEST_CASE("gen_bpsk_symbols is reproducible under a fixed seed") {
  Rng a(99), b(99);
  const auto s1 = gen_bpsk_symbols(4, a);
  const auto s2 = gen_bpsk_symbols(4, b);
  REQUIRE(s1 == s2);
  for (const int s : s1) REQUIRE((s == 1 || s == -1));
}

TEST_CASE("gen_bpsk_symbols rejects an empty request") {
  Rng rng(1);
  REQUIRE_THROWS_AS(gen_bpsk_symbols(0, rng), EmptyRequestError);
}

TEST_CASE("gen_bpsk_symbols is balanced in the large-sample limit") {
  Rng rng(5);
  const auto symbols = gen_bpsk_symbols(100000, rng);
  double sum = 0.0;
  for (const int s : symbols) sum += s;
  REQUIRE(sum / static_cast<double>(symbols.size()) == Approx(0.0).margin(0.02));
}

TEST_CASE("gen_bpsk_symbols single draw is in the alphabet") {
  Rng rng(6);
  const auto s = gen_bpsk_symbols(1, rng);
  REQUIRE(s.size() == 1);
  REQUIRE((s[0] == 1 || s[0] == -1));
}

TEST_CASE("synth_primary with zero amplitude is the all-zero vector") {
  Rng rng(7);
  const auto x = synth_primary(SignalParams{}, 256, 0.0, rng);
  for (const double v : x) REQUIRE(v == 0.0);
}

TEST_CASE("synth_primary lays out symbol plateaus of samples_per_symbol") {
  Rng rng(8);
  SignalParams params;  // 64 MHz over 1 Mbps: 64 samples per symbol
  REQUIRE(params.samples_per_symbol() == 64);
  const auto x = synth_primary(params, 128, 1.0, rng);
  for (std::size_t i = 0; i < 64; ++i) REQUIRE(x[i] == x[0]);
  for (std::size_t i = 64; i < 128; ++i) REQUIRE(x[i] == x[64]);
}

TEST_CASE("synth_primary is constant-modulus") {
  Rng rng(9);
  const auto x = synth_primary(SignalParams{}, 1024, 2.0, rng);
  double sum_sq = 0.0;
  for (const double v : x) {
    REQUIRE(std::abs(v) == 2.0);
    sum_sq += v * v;
  }
  REQUIRE(sum_sq / static_cast<double>(x.size()) == 4.0);
}

TEST_CASE("synth_primary precondition violations") {
  Rng rng(10);
  REQUIRE_THROWS_AS(synth_primary(SignalParams{}, 0, 1.0, rng), EmptyRequestError);
  REQUIRE_THROWS_AS(synth_primary(SignalParams{}, 16, -1.0, rng), DomainError);
}

TEST_CASE("signal params validation") {
  SignalParams bad;
  bad.frame_len = 1000;  // not a power of two
  REQUIRE_THROWS_AS(validate(bad), DomainError);
  bad.frame_len = 1024;
  bad.sample_rate_hz = 1.5e6;  // 1.5 samples per symbol
  REQUIRE_THROWS_AS(validate(bad), DomainError);
}

TEST_CASE("H0 frames hit the configured noise power") {
  const auto sc = make_scenario(1024, -12.0, ChannelKind::awgn_only, -95.0);
  Rng rng(11);
  double sum_sq = 0.0;
  std::size_t count = 0;
  for (int f = 0; f < 10000; ++f) {
    const Frame frame = make_frame(Hypothesis::h0, sc, rng);
    REQUIRE(frame.samples.size() == 1024);
    REQUIRE(frame.truth == Hypothesis::h0);
    for (const double x : frame.samples) sum_sq += x * x;
    count += frame.samples.size();
  }
  const double measured = sum_sq / static_cast<double>(count);
  const double expected = std::pow(10.0, -9.5);
  REQUIRE(measured == Approx(expected).epsilon(0.03));
}

TEST_CASE("H1 frames at +30 dB have the right per-frame power ratio") {
  const auto sc = make_scenario(1024, 30.0, ChannelKind::awgn_only, -95.0);
  Rng rng(12);
  const Frame frame = make_frame(Hypothesis::h1, sc, rng);
  const double noise = frame.actual_noise_power;
  double sum_sq = 0.0;
  for (const double x : frame.samples) sum_sq += x * x;
  const double ratio = (sum_sq / static_cast<double>(frame.samples.size()) - noise) / noise;
  REQUIRE(10.0 * std::log10(ratio) == Approx(30.0).margin(1.0));
}

TEST_CASE("non-finite SNR is rejected") {
  auto sc = make_scenario(1024, -std::numeric_limits<double>::infinity(),
                          ChannelKind::awgn_only);
  Rng rng(13);
  REQUIRE_THROWS_AS(make_frame(Hypothesis::h1, sc, rng), DomainError);
}

TEST_CASE("frames are bit-reproducible under a fixed stream") {
  const auto sc = make_scenario(256, -10.0, ChannelKind::rayleigh_block);
  Rng a(14), b(14);
  const Frame f1 = make_frame(Hypothesis::h1, sc, a);
  const Frame f2 = make_frame(Hypothesis::h1, sc, b);
  REQUIRE(f1.gain == f2.gain);
  REQUIRE(f1.samples == f2.samples);
}

TEST_CASE("rayleigh block gains average to unit power across frames") {
  const auto sc = make_scenario(8, -10.0, ChannelKind::rayleigh_block);
  Rng rng(15);
  double sum_sq = 0.0;
  const int n = 100000;
  for (int f = 0; f < n; ++f) {
    const Frame frame = make_frame(Hypothesis::h1, sc, rng);
    sum_sq += frame.gain * frame.gain;
  }
  REQUIRE(sum_sq / n >= 0.98);
  REQUIRE(sum_sq / n <= 1.02);
}

TEST_CASE("awgn-only frames carry unit gain") {
  const auto sc = make_scenario(64, 0.0, ChannelKind::awgn_only);
  Rng rng(16);
  REQUIRE(make_frame(Hypothesis::h1, sc, rng).gain == 1.0);
}
