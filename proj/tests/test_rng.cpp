#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "cryptic/parallel.hpp"
#include "cryptic/rng.hpp"

using namespace cryptic;

// Known-answer vectors for Philox4x32-10 published with the Random123 suite.
TEST(Philox, KnownAnswerZero) {
  const auto out = Philox4x32::bijection({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(out, (Philox4x32::Counter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
}

TEST(Philox, KnownAnswerOnes) {
  const auto out = Philox4x32::bijection({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                         {0xffffffffu, 0xffffffffu});
  EXPECT_EQ(out, (Philox4x32::Counter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
}

TEST(Philox, KnownAnswerPi) {
  const auto out = Philox4x32::bijection({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                         {0xa4093822u, 0x299f31d0u});
  EXPECT_EQ(out, (Philox4x32::Counter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(StreamRng, SameKeySameStream) {
  StreamRng a(7, Stream::kHazard, 42, 3), b(7, Stream::kHazard, 42, 3);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u32(), b.next_u32());
}

TEST(StreamRng, DistinctTagsGiveDistinctStreams) {
  std::set<std::uint64_t> firsts;
  for (auto s : {Stream::kHazard, Stream::kQueries, Stream::kPurchases}) {
    for (std::uint64_t e : {0ull, 1ull, 1ull << 40}) {
      for (std::uint32_t sub : {0u, 1u}) firsts.insert(StreamRng(1, s, e, sub).next_u64());
    }
  }
  EXPECT_EQ(firsts.size(), 18u);
  EXPECT_NE(StreamRng(1, Stream::kHazard, 0).next_u64(), StreamRng(2, Stream::kHazard, 0).next_u64());
}

TEST(StreamRng, UniformMomentsAndRange) {
  StreamRng rng(11, Stream::kSampling, 0);
  double sum = 0.0, sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    sq += u * u;
  }
  EXPECT_NEAR(sum / n, 0.5, 0.005);
  EXPECT_NEAR(sq / n - (sum / n) * (sum / n), 1.0 / 12.0, 0.002);
}

TEST(StreamRng, BelowIsUnbiased) {
  StreamRng rng(3, Stream::kSampling, 9);
  std::vector<int> hist(7, 0);
  const int n = 70000;
  for (int i = 0; i < n; ++i) ++hist[rng.below(7)];
  for (int c : hist) EXPECT_NEAR(c, n / 7, 400);
}

TEST(StreamRng, NormalAndPoissonMoments) {
  StreamRng rng(5, Stream::kDemographics, 1);
  double s = 0, s2 = 0, p = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s += z;
    s2 += z * z;
    p += rng.poisson(3.0);
  }
  EXPECT_NEAR(s / n, 0.0, 0.02);
  EXPECT_NEAR(s2 / n, 1.0, 0.02);
  EXPECT_NEAR(p / n, 3.0, 0.03);
}

TEST(StreamRng, WeightedDrawSkipsZeroWeights) {
  StreamRng rng(1, Stream::kRegions, 0);
  const std::vector<double> w{0.0, 1.0, 0.0, 3.0};
  std::vector<int> hist(4, 0);
  for (int i = 0; i < 40000; ++i) ++hist[draw_weighted(rng, w)];
  EXPECT_EQ(hist[0], 0);
  EXPECT_EQ(hist[2], 0);
  EXPECT_NEAR(hist[3] / 40000.0, 0.75, 0.01);
}

TEST(Parallel, CoversEveryIndexOnce) {
  for (unsigned jobs : {1u, 2u, 5u, 16u}) {
    std::vector<std::atomic<int>> hits(1001);
    parallel_for(hits.size(), jobs, [&](std::size_t i) { ++hits[i]; });
    for (auto& h : hits) EXPECT_EQ(h.load(), 1);
  }
}

TEST(Parallel, PropagatesExceptions) {
  EXPECT_THROW(parallel_for(100, 4,
                            [](std::size_t i) {
                              if (i == 77) throw std::runtime_error("boom");
                            }),
               std::runtime_error);
}

TEST(Parallel, ResultsIndependentOfJobCount) {
  auto run = [](unsigned jobs) {
    std::vector<std::uint64_t> out(500);
    parallel_for(out.size(), jobs,
                 [&](std::size_t i) { out[i] = StreamRng(9, Stream::kHazard, i).next_u64(); });
    return out;
  };
  EXPECT_EQ(run(1), run(8));
}
