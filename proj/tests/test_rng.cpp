#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "drystack/rng.hpp"

using drystack::Rng;

TEST_CASE("rng: identical seeds give identical streams") {
  Rng a(1234), b(1234);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
  Rng c(1234), d(4321);
  bool all_equal = true;
  for (int i = 0; i < 16; ++i) all_equal &= c.next_u64() == d.next_u64();
  CHECK_FALSE(all_equal);
}

TEST_CASE("rng: uniform moments and range") {
  Rng rng(7);
  const int n = 200000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.uniform();
    REQUIRE(x >= 0.0);
    REQUIRE(x < 1.0);
    sum += x;
    sum2 += x * x;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  CHECK(mean == doctest::Approx(0.5).epsilon(0.01));
  CHECK(var == doctest::Approx(1.0 / 12.0).epsilon(0.02));
}

TEST_CASE("rng: normal moments") {
  Rng rng(11);
  const int n = 200000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    sum += x;
    sum2 += x * x;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  CHECK(std::abs(mean) < 0.01);
  CHECK(var == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("rng: next_below is in range and roughly uniform") {
  Rng rng(3);
  std::vector<int> counts(10, 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const auto x = rng.next_below(10);
    REQUIRE(x < 10);
    ++counts[static_cast<int>(x)];
  }
  for (int c : counts) CHECK(std::abs(c - n / 10) < 600);
}

TEST_CASE("rng: shuffle yields a permutation, deterministic per seed") {
  std::vector<int> v(50);
  std::iota(v.begin(), v.end(), 0);
  Rng rng(99);
  rng.shuffle(v);
  auto w = v;
  std::sort(w.begin(), w.end());
  for (int i = 0; i < 50; ++i) CHECK(w[i] == i);

  std::vector<int> v2(50);
  std::iota(v2.begin(), v2.end(), 0);
  Rng rng2(99);
  rng2.shuffle(v2);
  CHECK(v == v2);
}

TEST_CASE("rng: forked streams are deterministic and distinct") {
  Rng a(5), b(5);
  Rng fa = a.fork(1), fb = b.fork(1);
  for (int i = 0; i < 100; ++i) CHECK(fa.next_u64() == fb.next_u64());

  Rng c(5);
  Rng f1 = c.fork(1);
  // Note: fork advances the parent, so fork ids are compared on one parent.
  Rng d(5);
  (void)d.next_u64();
  Rng f2 = d.fork(2);
  bool same = true;
  for (int i = 0; i < 8; ++i) same &= f1.next_u64() == f2.next_u64();
  CHECK_FALSE(same);
}
