#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "deepdim/spectrum.hpp"

namespace deepdim {
namespace {

TEST(DetectDrop, SingleConstructedDrop) {
  const auto r = detect_drop(SingularSpectrum({1e2, 10, 1, 1e-7, 1e-8}), 1e5);
  EXPECT_EQ(r.dimension, 3u);
  ASSERT_TRUE(r.drop_index);
  EXPECT_EQ(*r.drop_index, 3u);
  ASSERT_TRUE(r.drop_ratio);
  EXPECT_NEAR(*r.drop_ratio, 1e7, 1e-3);
  EXPECT_FALSE(r.full_space);
  EXPECT_EQ(r.theta, 1e5);
}

TEST(DetectDrop, NoDropMeansFullSpace) {
  const auto r = detect_drop(SingularSpectrum({3, 2, 1}), 1e5);
  EXPECT_TRUE(r.full_space);
  EXPECT_EQ(r.dimension, 3u);
  EXPECT_FALSE(r.drop_index);
  EXPECT_FALSE(r.drop_ratio);
  EXPECT_FALSE(r.degenerate());
}

TEST(DetectDrop, TrailingZeroIsInfiniteRatio) {
  const auto r = detect_drop(SingularSpectrum({5, 0}));
  EXPECT_EQ(r.dimension, 1u);
  ASSERT_TRUE(r.drop_ratio);
  EXPECT_TRUE(std::isinf(*r.drop_ratio));
}

TEST(DetectDrop, ZeroRunAfterDropDoesNotMatter) {
  const auto r = detect_drop(SingularSpectrum({4, 3, 2, 0, 0, 0}));
  EXPECT_EQ(r.dimension, 3u);
}

TEST(DetectDrop, AllZeroIsDegenerate) {
  const auto r = detect_drop(SingularSpectrum({0, 0, 0}));
  EXPECT_EQ(r.dimension, 0u);
  EXPECT_FALSE(r.full_space);
  EXPECT_FALSE(r.drop_index);
  EXPECT_FALSE(r.drop_ratio);
  EXPECT_TRUE(r.degenerate());
}

TEST(DetectDrop, SingleValue) {
  EXPECT_TRUE(detect_drop(SingularSpectrum({2})).full_space);
  EXPECT_EQ(detect_drop(SingularSpectrum({2})).dimension, 1u);
}

TEST(DetectDrop, FirstOfSeveralDrops) {
  const auto r = detect_drop(SingularSpectrum({1, 1e-6, 1e-7, 1e-13}), 1e5);
  EXPECT_EQ(r.dimension, 1u);
}

TEST(DetectDrop, Errors) {
  EXPECT_THROW(detect_drop(SingularSpectrum(), 1e5), InvalidInput);
  EXPECT_THROW(detect_drop(SingularSpectrum({1}), 1.0), InvalidInput);
  EXPECT_THROW(detect_drop(SingularSpectrum({1}), 0.5), InvalidInput);
  EXPECT_THROW(detect_drop(SingularSpectrum({1}), std::numeric_limits<double>::quiet_NaN()), InvalidInput);
}

TEST(LogSpectrum, Examples) {
  const auto a = log_spectrum(SingularSpectrum({100, 10, 1}));
  ASSERT_EQ(a.size(), 3u);
  EXPECT_DOUBLE_EQ(a[0], 2.0);
  EXPECT_DOUBLE_EQ(a[1], 1.0);
  EXPECT_DOUBLE_EQ(a[2], 0.0);

  const auto b = log_spectrum(SingularSpectrum({1, 0}));
  EXPECT_DOUBLE_EQ(b[0], 0.0);
  EXPECT_EQ(b[1], log_zero_sentinel);
  EXPECT_EQ(log_zero_sentinel, -320.0);

  for (double v : log_spectrum(SingularSpectrum({1, 1, 1})))
    EXPECT_EQ(v, 0.0);
  for (double v : log_spectrum(singular_values(Matrix::identity(3))))
    EXPECT_NEAR(v, 0.0, 1e-15);
}

TEST(LogSpectrum, SubnormalsFloorAtSentinel) {
  const auto v = log_spectrum(SingularSpectrum({1, std::numeric_limits<double>::denorm_min()}));
  EXPECT_EQ(v[1], log_zero_sentinel);
}

/// Random spectra with planted gaps of random size.
SingularSpectrum random_spectrum(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> len(1, 30);
  std::uniform_real_distribution<double> step(0.0, 9.0); // log10 decrement between neighbours
  std::bernoulli_distribution zero(0.05);
  const int n = len(rng);
  std::vector<double> v;
  double lg = 3.0;
  for (int i = 0; i < n; ++i) {
    if (!v.empty() && zero(rng)) {
      v.push_back(0.0);
      continue;
    }
    if (!v.empty() && v.back() == 0.0) {
      v.push_back(0.0);
      continue;
    }
    v.push_back(std::pow(10.0, lg));
    lg -= step(rng);
  }
  return SingularSpectrum(std::move(v));
}

TEST(DetectDropProperties, MonotoneInTheta) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 300; ++t) {
    const auto s = random_spectrum(rng);
    std::size_t prev = 0;
    for (double theta : {2.0, 10.0, 1e3, 1e5, 1e7, 1e9}) {
      const auto d = detect_drop(s, theta).dimension;
      EXPECT_LE(prev, d);
      prev = d;
    }
  }
}

TEST(DetectDropProperties, ScaleInvariant) {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 300; ++t) {
    const auto s = random_spectrum(rng);
    const auto base = detect_drop(s, 1e5);
    for (double c : {0.5, 4.0, 1e3}) {
      const auto r = detect_drop(s.scaled(c), 1e5);
      EXPECT_EQ(r.dimension, base.dimension);
      EXPECT_EQ(r.drop_index, base.drop_index);
    }
  }
}

TEST(DetectDropProperties, FirstDropAndInvariants) {
  std::mt19937_64 rng(13);
  for (int t = 0; t < 300; ++t) {
    const auto s = random_spectrum(rng);
    const auto r = detect_drop(s, 1e5);
    if (r.degenerate()) {
      EXPECT_EQ(s.largest(), 0.0);
      continue;
    }
    EXPECT_EQ(r.full_space, !r.drop_index.has_value());
    if (r.full_space) {
      EXPECT_EQ(r.dimension, s.size());
    } else {
      EXPECT_EQ(r.dimension, *r.drop_index);
      EXPECT_GT(*r.drop_ratio, r.theta);
    }
    const std::size_t stop = r.drop_index.value_or(s.size());
    for (std::size_t j = 1; j < stop; ++j)
      EXPECT_LE(drop_ratio_at(s, j), 1e5);
  }
}

TEST(DetectDropProperties, AppendedZeroAlwaysDrops) {
  std::mt19937_64 rng(14);
  for (int t = 0; t < 200; ++t) {
    auto s = random_spectrum(rng);
    if (s.largest() == 0.0 || s[s.size() - 1] == 0.0)
      continue;
    std::vector<double> v(s.values().begin(), s.values().end());
    v.push_back(0.0);
    const auto r = detect_drop(SingularSpectrum(v), 1e5);
    EXPECT_FALSE(r.full_space);
    EXPECT_TRUE(r.drop_index.has_value());
  }
}

} // namespace
} // namespace deepdim
