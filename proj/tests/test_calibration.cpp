#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <vector>

#include "specsense/calibration.hpp"
#include "specsense/parallel.hpp"
#include "support/helpers.hpp"

using namespace specsense;
using testsupport::make_scenario;
using Catch::Approx;

namespace {

CalibrationSpec base_spec(DetectorKind kind, std::size_t frame_len, std::size_t trials,
                          double pf = 0.1, double delta0 = 0.0) {
  CalibrationSpec spec;
  spec.detector = kind;
  spec.target_pf = pf;
  spec.trials = trials;
  spec.delta0 = delta0;
  spec.scenario = make_scenario(frame_len, 0.0, ChannelKind::awgn_only);
  spec.bins = 15;
  return spec;
}

/// Fresh-sample false-alarm rate of a calibrated detector.
double measure_pf(DetectorKind kind, const Thresholds& th, const ScenarioConfig& sc,
                  std::size_t trials, StreamKey key) {
  std::vector<std::uint8_t> hits(trials, 0);
  parallel_for(trials, [&](std::size_t t) {
    TrialFrameSource source(Hypothesis::h0, sc, key.child(t).rng());
    hits[t] = run_detector(kind, th, 15, source).is_h1;
  });
  std::size_t total = 0;
  for (const auto h : hits) total += h;
  return static_cast<double>(total) / static_cast<double>(trials);
}

}  // namespace

TEST_CASE("pf = 0.5 returns the empirical median") {
  const auto spec = base_spec(DetectorKind::entropy_power, 256, 2000, 0.5);
  const StreamKey key = master_stream(70);
  const double lambda = calibrate_one_stage(spec, key);

  // recompute the statistic population independently
  std::vector<double> stats(spec.trials);
  for (std::size_t t = 0; t < spec.trials; ++t) {
    Rng rng = key.child(t).rng();
    stats[t] = power_entropy_statistic(make_frame(Hypothesis::h0, spec.scenario, rng), 15);
  }
  std::sort(stats.begin(), stats.end());
  REQUIRE(lambda == stats[spec.trials / 2 - 1]);  // nearest rank at q = 0.5
}

TEST_CASE("calibration round-trips to the target false-alarm rate") {
  const auto sc = make_scenario(512, 0.0, ChannelKind::awgn_only);
  const StreamKey cal_key = master_stream(71);
  const StreamKey fresh = master_stream(72);

  SECTION("entropy-power") {
    auto spec = base_spec(DetectorKind::entropy_power, 512, 20000);
    Thresholds th;
    th.lambda = calibrate_one_stage(spec, cal_key);
    const double pf = measure_pf(DetectorKind::entropy_power, th, sc, 10000, fresh);
    REQUIRE(pf >= 0.08);
    REQUIRE(pf <= 0.12);
  }
  SECTION("entropy-amplitude") {
    auto spec = base_spec(DetectorKind::entropy_amplitude, 512, 20000);
    Thresholds th;
    th.lambda = calibrate_one_stage(spec, cal_key);
    const double pf = measure_pf(DetectorKind::entropy_amplitude, th, sc, 10000, fresh);
    REQUIRE(pf >= 0.08);
    REQUIRE(pf <= 0.12);
  }
  SECTION("energy") {
    auto spec = base_spec(DetectorKind::energy, 512, 20000);
    Thresholds th;
    th.energy_lambda = calibrate_energy(spec, cal_key);
    const double pf = measure_pf(DetectorKind::energy, th, sc, 10000, fresh);
    REQUIRE(pf >= 0.08);
    REQUIRE(pf <= 0.12);
  }
  SECTION("two-stage") {
    auto spec = base_spec(DetectorKind::two_stage, 512, 20000, 0.1, 0.3);
    Thresholds th;
    th.lambda = calibrate_two_stage(spec, cal_key);
    th.delta0 = 0.3;
    const double pf = measure_pf(DetectorKind::two_stage, th, sc, 10000, fresh);
    REQUIRE(pf >= 0.08);
    REQUIRE(pf <= 0.12);
  }
}

TEST_CASE("energy threshold matches the Gaussian tail approximation") {
  // Mean-square of N=1024 zero-mean Gaussians: the (1 - 0.1)-quantile is
  // close to sigma0^2 (1 + 1.2816 sqrt(2/1024)).
  auto spec = base_spec(DetectorKind::energy, 1024, 30000);
  const double lambda_e = calibrate_energy(spec, master_stream(73));
  const double sigma_sq = spec.scenario.noise.nominal_power_mw();
  const double expected = sigma_sq * (1.0 + 1.2816 * std::sqrt(2.0 / 1024.0));
  REQUIRE(lambda_e == Approx(expected).epsilon(0.01));
}

TEST_CASE("two-stage calibration with delta0 = 0 matches the one-stage quantile") {
  auto one = base_spec(DetectorKind::entropy_power, 512, 20000);
  auto two = base_spec(DetectorKind::two_stage, 512, 20000, 0.1, 0.0);
  const double lambda_one = calibrate_one_stage(one, master_stream(74));
  const double lambda_two = calibrate_two_stage(two, master_stream(74));
  REQUIRE(lambda_two == Approx(lambda_one).margin(0.01));
}

TEST_CASE("entropy calibration is independent of the H0 noise power") {
  auto spec = base_spec(DetectorKind::entropy_power, 512, 5000);
  spec.scenario.noise.nominal_power_dbmw = -95.0;
  const double lambda_a = calibrate_one_stage(spec, master_stream(75));
  spec.scenario.noise.nominal_power_dbmw = -91.0;
  const double lambda_b = calibrate_one_stage(spec, master_stream(75));
  REQUIRE(lambda_a == lambda_b);  // same underlying draws, exactly rescaled
}

TEST_CASE("energy threshold scales linearly with the calibration noise power") {
  auto spec = base_spec(DetectorKind::energy, 512, 5000);
  spec.scenario.noise.nominal_power_dbmw = -95.0;
  const double lambda_a = calibrate_energy(spec, master_stream(76));
  spec.scenario.noise.nominal_power_dbmw = -92.0;
  const double lambda_b = calibrate_energy(spec, master_stream(76));
  REQUIRE(lambda_b / lambda_a == Approx(std::pow(10.0, 0.3)).epsilon(1e-9));
}

TEST_CASE("calibration input validation") {
  REQUIRE_THROWS_AS(calibrate_one_stage(base_spec(DetectorKind::entropy_power, 256, 500),
                                        master_stream(77)),
                    InsufficientTrialsError);
  // quantile needs target_pf * trials >= 20
  REQUIRE_THROWS_AS(
      calibrate_one_stage(base_spec(DetectorKind::entropy_power, 256, 1000, 0.01),
                          master_stream(77)),
      InsufficientTrialsError);
  REQUIRE_THROWS_AS(
      calibrate_one_stage(base_spec(DetectorKind::energy, 256, 2000), master_stream(77)),
      ConfigError);
  REQUIRE_THROWS_AS(
      calibrate_energy(base_spec(DetectorKind::two_stage, 256, 2000), master_stream(77)),
      ConfigError);
  REQUIRE_THROWS_AS(
      calibrate_two_stage(base_spec(DetectorKind::energy, 256, 2000), master_stream(77)),
      ConfigError);
  auto bad_pf = base_spec(DetectorKind::entropy_power, 256, 2000, 1.0);
  REQUIRE_THROWS_AS(calibrate_one_stage(bad_pf, master_stream(77)), DomainError);
}

TEST_CASE("calibration records round-trip through disk") {
  CalibrationRecord record;
  record.detector = DetectorKind::two_stage;
  record.frame_len = 1024;
  record.bins = 15;
  record.delta0 = 0.3;
  record.target_pf = 0.1;
  record.lambda = 1.6295142485312448;
  record.trials = 100000;
  record.seed = 42;
  record.noise_dbmw = -95.0;

  const auto path = std::filesystem::temp_directory_path() / "specsense_cal_test.txt";
  save_calibration(record, path);
  const auto loaded = load_calibration(path);
  REQUIRE(loaded.detector == record.detector);
  REQUIRE(loaded.frame_len == record.frame_len);
  REQUIRE(loaded.bins == record.bins);
  REQUIRE(loaded.delta0 == record.delta0);
  REQUIRE(loaded.lambda == record.lambda);  // bit-exact through the text format
  REQUIRE(loaded.trials == record.trials);
  REQUIRE(loaded.seed == record.seed);
  std::filesystem::remove(path);

  REQUIRE_THROWS_AS(load_calibration("/nonexistent/specsense.cal"), ConfigError);
}
