#include "robarb/rng.hpp"

#include <cmath>
#include <set>

#include <gtest/gtest.h>

namespace robarb {
namespace {

TEST(Rng, StreamsAreReproducibleAndDistinct) {
  auto a = Rng::stream(5, "perturbation");
  auto b = Rng::stream(5, "perturbation");
  auto c = Rng::stream(5, "partition");
  auto d = Rng::stream(6, "perturbation");
  auto e = Rng::stream(5, "perturbation", 1);
  std::set<std::uint64_t> firsts;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    EXPECT_EQ(x, b.next_u64());
  }
  firsts.insert(Rng::stream(5, "perturbation").next_u64());
  firsts.insert(c.next_u64());
  firsts.insert(d.next_u64());
  firsts.insert(e.next_u64());
  EXPECT_EQ(firsts.size(), 4u);
}

TEST(Rng, UniformRangesAndMoments) {
  auto r = Rng::stream(1, "test");
  double sum = 0.0, sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    const double v = r.uniform_open();
    ASSERT_GT(v, 0.0);
    ASSERT_LT(v, 1.0);
    sum += u;
    sq += u * u;
  }
  EXPECT_NEAR(sum / n, 0.5, 0.005);
  EXPECT_NEAR(sq / n - 0.25, 1.0 / 12.0, 0.005);
}

TEST(Rng, NormalMoments) {
  auto r = Rng::stream(2, "test");
  double sum = 0.0, sq = 0.0, quart = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    ASSERT_TRUE(std::isfinite(z));
    sum += z;
    sq += z * z;
    quart += z * z * z * z;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(sq / n, 1.0, 0.02);
  EXPECT_NEAR(quart / n, 3.0, 0.1);
}

TEST(Fnv1a, KnownVectors) {
  EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a("foobar"), 0x85944171f73967e8ULL);
}

}  // namespace
}  // namespace robarb
