#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "specsense/rng.hpp"

using namespace specsense;
using Catch::Approx;

TEST_CASE("same seed reproduces the same stream") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) REQUIRE(a.next() == b.next());
}

TEST_CASE("child streams are order-independent") {
  const StreamKey master = master_stream(7);
  const auto k1 = master.child(3).child(11);
  const auto k2 = master.child(3).child(11);
  REQUIRE(k1.key == k2.key);
  REQUIRE(master.child(3).key != master.child(4).key);
  REQUIRE(master.child(3).child(0).key != master.child(3).child(1).key);
}

TEST_CASE("sibling streams do not collide over a trial-sized range") {
  const StreamKey master = master_stream(123);
  std::set<std::uint64_t> keys;
  for (std::uint64_t t = 0; t < 20000; ++t) keys.insert(master.child(t).key);
  REQUIRE(keys.size() == 20000);
}

TEST_CASE("uniform01 lies in [0,1) with the right mean") {
  Rng rng(1);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform01();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  REQUIRE(sum / n == Approx(0.5).margin(0.01));
}

TEST_CASE("normal draws have zero mean and unit variance") {
  Rng rng(2);
  const int n = 200000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sum_sq += z * z;
  }
  const double mean = sum / n;
  REQUIRE(mean == Approx(0.0).margin(0.01));
  REQUIRE(sum_sq / n - mean * mean == Approx(1.0).margin(0.02));
}

TEST_CASE("rayleigh gain has unit mean-square") {
  Rng rng(3);
  const int n = 100000;
  double sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double g = rng.rayleigh_gain();
    REQUIRE(g > 0.0);
    sum_sq += g * g;
  }
  const double mean_sq = sum_sq / n;
  REQUIRE(mean_sq >= 0.98);
  REQUIRE(mean_sq <= 1.02);
}

TEST_CASE("sign is equiprobable") {
  Rng rng(4);
  int pos = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const int s = rng.sign();
    REQUIRE((s == 1 || s == -1));
    pos += s == 1;
  }
  REQUIRE(static_cast<double>(pos) / n == Approx(0.5).margin(0.01));
}
