#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <vector>

#include "doctest.h"
#include "setassoc/rng.hpp"

using namespace setassoc;

TEST_CASE("fnv1a64 matches the published test vectors") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ull);
}

TEST_CASE("streams are deterministic per key tuple") {
  Stream a{1, 2, 3};
  Stream b{1, 2, 3};
  Stream c{1, 2, 4};
  bool all_equal = true;
  bool any_differ = false;
  for (int i = 0; i < 100; ++i) {
    const auto va = a.next_u64();
    all_equal = all_equal && va == b.next_u64();
    any_differ = any_differ || va != c.next_u64();
  }
  CHECK(all_equal);
  CHECK(any_differ);
}

TEST_CASE("next_unit lies in [0,1) with the right mean") {
  Stream s{42};
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = s.next_unit();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  // SE of the mean is 1/sqrt(12 n) ~ 0.0009
  CHECK(std::abs(sum / n - 0.5) < 0.004);
}

TEST_CASE("next_below is unbiased over small ranges") {
  Stream s{7};
  const std::uint64_t range = 6;
  const int n = 60000;
  std::vector<long> counts(range, 0);
  for (int i = 0; i < n; ++i) {
    const auto v = s.next_below(range);
    REQUIRE(v < range);
    ++counts[v];
  }
  // expected 10000 per cell, sd ~ 91; allow 5 sigma
  for (const long c : counts) CHECK(std::abs(c - 10000) < 460);
}

TEST_CASE("next_normal has standard moments") {
  Stream s{99};
  const int n = 100000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = s.next_normal();
    sum += x;
    sum2 += x * x;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  CHECK(std::abs(mean) < 0.02);        // ~6 SEs
  CHECK(std::abs(var - 1.0) < 0.03);   // ~6 SEs of the variance estimate
}

TEST_CASE("fisher_yates produces every permutation uniformly") {
  Stream s{5};
  std::map<std::vector<int>, long> counts;
  const int trials = 24000;
  for (int t = 0; t < trials; ++t) {
    std::vector<int> v{0, 1, 2, 3};
    fisher_yates(v, s);
    ++counts[v];
  }
  REQUIRE(counts.size() == 24);
  for (const auto& [perm, c] : counts) {
    (void)perm;
    CHECK(std::abs(c - 1000) < 160);  // 5 sigma ~ 155
  }
}

TEST_CASE("keyed_permutation is a function of its keys only") {
  const auto p1 = keyed_permutation(11, fnv1a64("probeA"), 3, 12);
  const auto p2 = keyed_permutation(11, fnv1a64("probeA"), 3, 12);
  const auto p3 = keyed_permutation(11, fnv1a64("probeA"), 4, 12);
  const auto p4 = keyed_permutation(11, fnv1a64("probeB"), 3, 12);
  const auto p5 = keyed_permutation(12, fnv1a64("probeA"), 3, 12);
  CHECK(p1 == p2);
  CHECK(p1 != p3);
  CHECK(p1 != p4);
  CHECK(p1 != p5);

  std::vector<int> sorted = p1;
  std::sort(sorted.begin(), sorted.end());
  std::vector<int> identity(12);
  std::iota(identity.begin(), identity.end(), 0);
  CHECK(sorted == identity);
}
