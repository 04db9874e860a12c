#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "smc/rng.hpp"

// Reference values computed with an independent implementation of the
// published splitmix64 / xoshiro256++ algorithms. The first splitmix64
// output for seed 0 is the widely circulated check value e220a8397b1dcdaf.

TEST_CASE("splitmix64 matches the published sequence") {
  std::uint64_t state = 0;
  CHECK(smc::splitmix64_next(state) == 0xe220a8397b1dcdafULL);
  CHECK(smc::splitmix64_next(state) == 0x6e789e6aa1b965f4ULL);
  CHECK(smc::splitmix64_next(state) == 0x06c45d188009454fULL);
  CHECK(smc::splitmix64_next(state) == 0xf88bb8a8724c81ecULL);
  state = 42;
  CHECK(smc::splitmix64_next(state) == 0xbdd732262feb6e95ULL);
  CHECK(smc::splitmix64_next(state) == 0x28efe333b266f103ULL);
}

TEST_CASE("xoshiro256++ seeded via splitmix64 matches reference outputs") {
  smc::Rng a(0);
  CHECK(a.next_u64() == 0x53175d61490b23dfULL);
  CHECK(a.next_u64() == 0x61da6f3dc380d507ULL);
  CHECK(a.next_u64() == 0x5c0fdf91ec9a7bfcULL);
  CHECK(a.next_u64() == 0x02eebf8c3bbe5e1aULL);
  CHECK(a.next_u64() == 0x7eca04ebaf4a5eeaULL);

  smc::Rng b(12345);
  CHECK(b.next_u64() == 0x8d948a82def8a568ULL);
  CHECK(b.next_u64() == 0x3477f953796702a0ULL);
}

TEST_CASE("uniform01 is the top-53-bit mapping") {
  smc::Rng a(0);
  CHECK(a.uniform01() == doctest::Approx(0.3245752680314067).epsilon(1e-15));
  smc::Rng b(12345);
  CHECK(b.uniform01() == doctest::Approx(0.5530478066930038).epsilon(1e-15));
  smc::Rng c(99);
  for (int i = 0; i < 100000; ++i) {
    const double u = c.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("substream derivation is seed + (rep+1) * golden gamma") {
  smc::Rng s0 = smc::Rng::substream(777, 0);
  smc::Rng s1 = smc::Rng::substream(777, 1);
  CHECK(s0.next_u64() == 0xf325de7eff3eb836ULL);
  CHECK(s1.next_u64() == 0xacf4ee64839d478aULL);
}

TEST_CASE("same seed reproduces the same stream") {
  smc::Rng a(2024), b(2024);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
  smc::Rng c = smc::Rng::substream(5, 3), d = smc::Rng::substream(5, 3);
  for (int i = 0; i < 100; ++i) CHECK(c.normal() == d.normal());
}

TEST_CASE("normal variates have roughly standard moments") {
  smc::Rng rng(31337);
  const int n = 200000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    CHECK(std::isfinite(z));
    sum += z;
    sumsq += z * z;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK(std::abs(mean) < 0.02);
  CHECK(std::abs(var - 1.0) < 0.05);
}

TEST_CASE("distinct substreams decorrelate") {
  smc::Rng a = smc::Rng::substream(123, 0);
  smc::Rng b = smc::Rng::substream(123, 1);
  int agree = 0;
  for (int i = 0; i < 64; ++i)
    if (a.next_u64() == b.next_u64()) ++agree;
  CHECK(agree == 0);
}
