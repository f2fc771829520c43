#include "doctest.h"

#include <cmath>
#include <set>
#include <vector>

#include "mspretest/rng.hpp"

using namespace mspretest;

TEST_CASE("philox4x32-10 known-answer vectors") {
  // Random123 kat_vectors.
  CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) ==
        PhiloxCounter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                      {0xffffffffu, 0xffffffffu}) ==
        PhiloxCounter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                      {0xa4093822u, 0x299f31d0u}) ==
        PhiloxCounter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("streams are reproducible and distinct") {
  auto a = RngStream::derive(42, "scenario:normal-null", 7);
  auto b = RngStream::derive(42, "scenario:normal-null", 7);
  auto c = RngStream::derive(42, "scenario:normal-null", 8);
  auto d = RngStream::derive(43, "scenario:normal-null", 7);
  auto e = RngStream::derive(42, "scenario:t3-null", 7);
  std::vector<std::uint64_t> va, vb, vc, vd, ve;
  for (int i = 0; i < 16; ++i) {
    va.push_back(a.next_u64());
    vb.push_back(b.next_u64());
    vc.push_back(c.next_u64());
    vd.push_back(d.next_u64());
    ve.push_back(e.next_u64());
  }
  CHECK(va == vb);
  CHECK(va != vc);
  CHECK(va != vd);
  CHECK(va != ve);
}

TEST_CASE("copied stream continues identically") {
  auto a = RngStream::derive(1, "x", 0);
  a.normal();  // leaves a cached spare
  auto b = a;
  for (int i = 0; i < 9; ++i) CHECK(a.normal() == b.normal());
}

TEST_CASE("uniform stays in the open unit interval with the right mean") {
  auto s = RngStream::derive(5, "uniform", 0);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = s.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  // sd of the mean is sqrt(1/12/n) ~ 6.5e-4
  CHECK(std::fabs(sum / n - 0.5) < 5 * std::sqrt(1.0 / 12.0 / n));
}

TEST_CASE("below is unbiased over a small range") {
  auto s = RngStream::derive(9, "below", 0);
  std::vector<int> counts(7, 0);
  const int n = 70000;
  for (int i = 0; i < n; ++i) {
    const auto v = s.below(7);
    REQUIRE(v < 7);
    ++counts[v];
  }
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - 10000.0) * (c - 10000.0) / 10000.0;
  CHECK(chi2 < 22.46);  // chi-square(6) 0.999 quantile
}

TEST_CASE("normal variates have unit variance") {
  auto s = RngStream::derive(11, "normal", 3);
  const int n = 200000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = s.normal();
    sum += z;
    sq += z * z;
  }
  const double mean = sum / n;
  CHECK(std::fabs(mean) < 5.0 / std::sqrt(n));
  CHECK(std::fabs(sq / n - mean * mean - 1.0) < 5.0 * std::sqrt(2.0 / n));
}
