#include <distsynth/rng.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <set>
#include <vector>

using namespace distsynth;

TEST_CASE("streams are deterministic in (seed, stream_id)") {
  Stream a(42), b(42);
  for (int i = 0; i < 16; ++i) CHECK(a.next_u64() == b.next_u64());

  Stream c(43);
  Stream d(42, 1);
  Stream e(42);
  CHECK(c.next_u64() != e.next_u64());
  Stream e2(42);
  CHECK(d.next_u64() != e2.next_u64());
}

TEST_CASE("substreams are reproducible and do not disturb the parent") {
  Stream parent(5);
  const std::uint64_t child_first = parent.substream(3).next_u64();
  CHECK(Stream(5).substream(3).next_u64() == child_first);
  CHECK(parent.next_u64() == Stream(5).next_u64());
  CHECK(Stream(5).substream(3).next_u64() != Stream(5).substream(4).next_u64());
}

TEST_CASE("unit draws stay inside their intervals") {
  Stream rng(1);
  double sum = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.next_unit();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    const double v = rng.next_unit_open();
    CHECK(v > 0.0);
    CHECK(v < 1.0);
    sum += u;
  }
  CHECK(sum / 1000.0 == Catch::Approx(0.5).margin(0.05));
}

TEST_CASE("next_below is unbiased in range") {
  Stream rng(2);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    const std::uint64_t x = rng.next_below(10);
    CHECK(x < 10);
    seen.insert(x);
  }
  CHECK(seen.size() == 10);
  CHECK(rng.next_below(1) == 0);
}

TEST_CASE("high nibble of next_u64 is roughly uniform") {
  Stream rng(3);
  std::vector<long> counts(16, 0);
  const int n = 16000;
  for (int i = 0; i < n; ++i) ++counts[rng.next_u64() >> 60];
  double chi2 = 0.0;
  const double expected = n / 16.0;
  for (const long c : counts) {
    const double d = c - expected;
    chi2 += d * d / expected;
  }
  // chi-square, 15 degrees of freedom, 0.999 quantile.
  CHECK(chi2 < 37.7);
}
