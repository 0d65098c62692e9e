#include <doctest.h>

#include <cmath>
#include <vector>

#include "ou/parallel.hpp"
#include "ou/rng.hpp"

using namespace ou::rng;

TEST_CASE("same seed and label give the same stream") {
  const auto a = seed_stream(42, "spde", 3);
  const auto b = seed_stream(42, "spde", 3);
  CHECK(a == b);
  CounterStream sa(a), sb(b);
  for (std::uint64_t c = 0; c < 1000; ++c) CHECK(sa.bits(c) == sb.bits(c));
}

TEST_CASE("keys differ across seed, label and index") {
  CHECK(!(seed_stream(1, "a") == seed_stream(2, "a")));
  CHECK(!(seed_stream(1, "a") == seed_stream(1, "b")));
  CHECK(!(seed_stream(1, "a", 0) == seed_stream(1, "a", 1)));
}

TEST_CASE("seed 0 is an ordinary seed") {
  const auto key = seed_stream(0, "sample");
  CHECK(key.value == mix64(mix64(0) ^ fnv1a64("sample") ^ mix64(0 ^ kIndexSalt)));
  CHECK(key.value != 0);
  CounterStream s(key);
  CHECK(std::isfinite(s.normal(0)));
}

TEST_CASE("documented constants") {
  CHECK(fnv1a64("") == 0xCBF29CE484222325ULL);
  CHECK(fnv1a64("a") == 0xAF63DC4C8601EC8CULL);
  // First SplitMix64 output from state 0.
  CHECK(mix64(kGolden) == 0xE220A8397B1DCDAFULL);
}

TEST_CASE("distinct labels pass the cross-correlation smoke test") {
  CounterStream a(seed_stream(7, "alpha")), b(seed_stream(7, "beta"));
  const std::uint64_t n = 100000;
  double sab = 0, sa = 0, sb = 0, saa = 0, sbb = 0;
  for (std::uint64_t c = 0; c < n; ++c) {
    const double x = a.normal(c), y = b.normal(c);
    sab += x * y;
    sa += x;
    sb += y;
    saa += x * x;
    sbb += y * y;
  }
  const double cov = sab / n - (sa / n) * (sb / n);
  const double corr = cov / std::sqrt((saa / n - sa * sa / n / n) * (sbb / n - sb * sb / n / n));
  CHECK(std::abs(corr) < 0.01);
}

TEST_CASE("uniform and normal moments") {
  CounterStream s(seed_stream(3, "moments"));
  const std::uint64_t n = 200000;
  double su = 0, sn = 0, sn2 = 0;
  for (std::uint64_t c = 0; c < n; ++c) {
    const double u = s.uniform(c);
    CHECK_UNARY(u > 0.0);
    CHECK_UNARY(u < 1.0);
    su += u;
    const double z = s.normal(c);
    sn += z;
    sn2 += z * z;
  }
  CHECK(std::abs(su / n - 0.5) < 4 * std::sqrt(1.0 / 12 / n));
  CHECK(std::abs(sn / n) < 4 / std::sqrt(double(n)));
  CHECK(std::abs(sn2 / n - 1.0) < 4 * std::sqrt(2.0 / n));
}

TEST_CASE("fill_normals matches single draws at any offset") {
  CounterStream s(seed_stream(11, "fill"));
  for (std::uint64_t first : {0ULL, 1ULL, 5ULL}) {
    std::vector<double> v(9);
    fill_normals(s, first, v.size(), v.begin());
    for (std::size_t i = 0; i < v.size(); ++i) CHECK(v[i] == s.normal(first + i));
  }
}

TEST_CASE("parallel_for visits every index once for any worker count") {
  for (int workers : {1, 3, 8}) {
    ou::set_worker_count(workers);
    std::vector<int> hits(1000, 0);
    ou::parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; });
    for (int h : hits) CHECK(h == 1);
  }
  ou::set_worker_count(1);
  CHECK(ou::chunk_count(4097) == 2);
}
