#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "serw/rng.hpp"

namespace serw {
namespace {

using Counter = Philox4x32::Counter;

// Known-answer vectors from the Random123 distribution.
TEST(Philox, KnownAnswerZero) {
  EXPECT_EQ(Philox4x32::generate({0, 0, 0, 0}, {0, 0}),
            (Counter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
}

TEST(Philox, KnownAnswerAllOnes) {
  EXPECT_EQ(Philox4x32::generate({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                                 {0xffffffff, 0xffffffff}),
            (Counter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
}

TEST(Philox, KnownAnswerPi) {
  EXPECT_EQ(Philox4x32::generate({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                                 {0xa4093822, 0x299f31d0}),
            (Counter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(Philox, UsableAtCompileTime) {
  constexpr auto block = Philox4x32::generate({0, 0, 0, 0}, {0, 0});
  static_assert(block[0] == 0x6627e8d5);
}

TEST(UnitInterval, Range) {
  EXPECT_EQ(to_unit_interval(0), 0.0);
  EXPECT_LT(to_unit_interval(~std::uint64_t{0}), 1.0);
  EXPECT_EQ(to_unit_interval(~std::uint64_t{0}), 1.0 - 0x1.0p-53);
}

TEST(CounterRng, DistinctStreamsAndCounters) {
  const CounterRng rng(42);
  std::set<double> seen;
  for (std::uint64_t s = 0; s < 8; ++s)
    for (std::uint64_t c = 0; c < 64; ++c) {
      const auto d = rng.draw(s, c);
      seen.insert(d.move);
      seen.insert(d.xi);
    }
  EXPECT_EQ(seen.size(), 8u * 64u * 2u);
}

TEST(CounterRng, SeedChangesOutput) {
  EXPECT_NE(CounterRng(1).draw(0, 0).move, CounterRng(2).draw(0, 0).move);
  EXPECT_NE(CounterRng(1).draw(0, 0).move, CounterRng(1ull << 32 | 1).draw(0, 0).move);
}

TEST(WalkerStream, ReadsConsecutiveCounters) {
  const CounterRng rng(9);
  WalkerStream s(9, 5, 3);
  for (std::uint64_t c = 3; c < 20; ++c) {
    const auto d = s.next_draw();
    EXPECT_EQ(d.move, rng.draw(5, c).move);
    EXPECT_EQ(d.xi, rng.draw(5, c).xi);
  }
  EXPECT_EQ(s.position(), 20u);
}

TEST(FillUniforms, MatchesScalarPath) {
  const CounterRng rng(0x0123456789abcdefull);
  for (std::size_t count : {0u, 1u, 7u, 16u, 31u, 32u, 33u, 100u, 257u}) {
    for (std::uint64_t first : {0ull, 5ull, 0xfffffff0ull, (1ull << 40) - 3}) {
      const std::uint64_t stream = 0xdeadbeefcafeull + count;
      std::vector<double> m1(count), x1(count), m2(count), x2(count);
      fill_uniforms(rng, stream, first, count, m1.data(), x1.data());
      fill_uniforms_portable(rng, stream, first, count, m2.data(), x2.data());
      EXPECT_EQ(m1, m2) << "count=" << count << " first=" << first;
      EXPECT_EQ(x1, x2) << "count=" << count << " first=" << first;
      for (std::size_t i = 0; i < count; ++i) {
        const auto d = rng.draw(stream, first + i);
        ASSERT_EQ(m2[i], d.move);
        ASSERT_EQ(x2[i], d.xi);
      }
    }
  }
}

TEST(BufferedWalkerStream, MatchesWalkerStream) {
  BufferedWalkerStream buffered(77, 123);
  WalkerStream plain(77, 123);
  for (int i = 0; i < 3 * static_cast<int>(BufferedWalkerStream::kBatch) + 11; ++i) {
    const auto a = buffered.next_draw();
    const auto b = plain.next_draw();
    ASSERT_EQ(a.move, b.move) << i;
    ASSERT_EQ(a.xi, b.xi) << i;
    ASSERT_EQ(buffered.position(), plain.position());
  }
}

TEST(CounterRng, UniformMoments) {
  // Mean and variance of 1e5 draws against 1/2 and 1/12, at 5 standard errors.
  const CounterRng rng(2024);
  const int n = 100000;
  double sum = 0, sum2 = 0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.draw(0, static_cast<std::uint64_t>(i)).move;
    sum += u;
    sum2 += u * u;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  EXPECT_NEAR(mean, 0.5, 5 * std::sqrt(1.0 / 12 / n));
  EXPECT_NEAR(var, 1.0 / 12, 5 * std::sqrt(1.0 / 180 / n));
}

}  // namespace
}  // namespace serw
