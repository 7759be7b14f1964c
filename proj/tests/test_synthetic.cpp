#include <gtest/gtest.h>

#include <cmath>

#include "deepdim/linalg.hpp"
#include "deepdim/spectrum.hpp"
#include "deepdim/synthetic.hpp"

namespace deepdim {
namespace {

TEST(Hyperplane, NoiselessHasExactRank) {
  const Matrix m = sample_hyperplane_cluster({.ambient_dim = 5, .intrinsic_dim = 2, .cluster_size = 10, .seed = 3});
  const auto s = singular_values(m);
  EXPECT_EQ(numerical_rank(s, 1e-12), 2u);
  EXPECT_EQ(detect_drop(s).dimension, 2u);
}

// Oracle: the noiseless construction has numerical rank 37; the estimator must
// find the same number with 1e-10 noise added.
TEST(Hyperplane, RecoversThirtySevenInFiveTwelve) {
  HyperplaneSpec spec{.ambient_dim = 512, .intrinsic_dim = 37, .cluster_size = 200, .noise_scale = 0.0,
                      .coefficient_scale = 1.0, .seed = 99};
  EXPECT_EQ(numerical_rank(singular_values(sample_hyperplane_cluster(spec)), 1e-9), 37u);
  spec.noise_scale = 1e-10;
  const auto r = detect_drop(singular_values(sample_hyperplane_cluster(spec)), 1e5);
  EXPECT_EQ(r.dimension, 37u);
  EXPECT_FALSE(r.full_space);
}

TEST(Hyperplane, LargeNoiseFloodsTheGap) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const HyperplaneSpec spec{.ambient_dim = 100, .intrinsic_dim = 10, .cluster_size = 80, .noise_scale = 1.0,
                              .coefficient_scale = 1.0, .seed = seed};
    const auto r = detect_drop(singular_values(sample_hyperplane_cluster(spec)), 1e5);
    EXPECT_TRUE(r.full_space);
    EXPECT_EQ(r.dimension, 80u);
  }
}

TEST(Hyperplane, OrthonormalBasis) {
  Rng rng(5);
  const Matrix b = random_orthonormal_columns(60, 20, rng);
  for (std::size_t i = 0; i < 20; ++i)
    for (std::size_t j = 0; j < 20; ++j) {
      double dot = 0.0;
      for (std::size_t r = 0; r < 60; ++r)
        dot += b(r, i) * b(r, j);
      EXPECT_NEAR(dot, i == j ? 1.0 : 0.0, 1e-10);
    }
}

TEST(Hyperplane, DeterministicInSeed) {
  const HyperplaneSpec spec{.ambient_dim = 30, .intrinsic_dim = 4, .cluster_size = 12, .noise_scale = 1e-3, .seed = 8};
  EXPECT_EQ(sample_hyperplane_cluster(spec), sample_hyperplane_cluster(spec));
  HyperplaneSpec other = spec;
  other.seed = 9;
  EXPECT_NE(sample_hyperplane_cluster(spec), sample_hyperplane_cluster(other));
}

TEST(Hyperplane, InvalidSpecs) {
  EXPECT_THROW(sample_hyperplane_cluster({.ambient_dim = 10, .intrinsic_dim = 0, .cluster_size = 5}), InvalidInput);
  EXPECT_THROW(sample_hyperplane_cluster({.ambient_dim = 10, .intrinsic_dim = 6, .cluster_size = 5}), InvalidInput);
  EXPECT_THROW(sample_hyperplane_cluster({.ambient_dim = 4, .intrinsic_dim = 5, .cluster_size = 50}), InvalidInput);
  EXPECT_THROW(sample_hyperplane_cluster(
                   {.ambient_dim = 10, .intrinsic_dim = 2, .cluster_size = 5, .noise_scale = -1.0}),
               InvalidInput);
  EXPECT_THROW(sample_hyperplane_cluster(
                   {.ambient_dim = 10, .intrinsic_dim = 2, .cluster_size = 5, .coefficient_scale = 0.0}),
               InvalidInput);
}

// d recovered for every (D, d, n) with n >= 2d and tiny noise.
TEST(Hyperplane, RecoveryAcrossShapes) {
  int trials = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed + 1000);
    std::uniform_int_distribution<std::size_t> dd(1, 20);
    const std::size_t d = dd(rng);
    std::uniform_int_distribution<std::size_t> nn(2 * d, 4 * d + 10);
    const std::size_t n = nn(rng);
    std::uniform_int_distribution<std::size_t> DD(d, 120);
    const std::size_t D = DD(rng);
    const HyperplaneSpec spec{.ambient_dim = D, .intrinsic_dim = d, .cluster_size = n, .noise_scale = 1e-8,
                              .coefficient_scale = 1.0, .seed = seed};
    EXPECT_EQ(detect_drop(singular_values(sample_hyperplane_cluster(spec)), 1e5).dimension, d)
        << "D=" << D << " d=" << d << " n=" << n;
    ++trials;
  }
  EXPECT_EQ(trials, 100);
}

TEST(Blocks, IndependentRanksAdd) {
  const std::vector<std::size_t> ranks{3, 4};
  const auto blocks = sample_independent_blocks(ranks, 10, 20, 1);
  ASSERT_EQ(blocks.size(), 2u);
  EXPECT_EQ(numerical_rank(singular_values(blocks[0]), 1e-9), 3u);
  EXPECT_EQ(numerical_rank(singular_values(blocks[1]), 1e-9), 4u);
  EXPECT_EQ(numerical_rank(singular_values(vstack(blocks)), 1e-9), 7u);
}

TEST(Blocks, SingleBlock) {
  const std::vector<std::size_t> ranks{5};
  const auto blocks = sample_independent_blocks(ranks, 8, 12, 2);
  EXPECT_EQ(detect_drop(singular_values(blocks[0])).dimension, 5u);
}

TEST(Blocks, SharedSubspaceIsNegativeControl) {
  const std::vector<std::size_t> ranks{2, 2};
  const auto blocks = sample_shared_blocks(ranks, 6, 20, 3);
  EXPECT_EQ(numerical_rank(singular_values(blocks[0]), 1e-9), 2u);
  EXPECT_EQ(numerical_rank(singular_values(blocks[1]), 1e-9), 2u);
  EXPECT_EQ(numerical_rank(singular_values(vstack(blocks)), 1e-9), 2u);
}

TEST(Blocks, InfeasibleRanks) {
  const std::vector<std::size_t> too_many{5, 6};
  EXPECT_THROW(sample_independent_blocks(too_many, 10, 10, 0), InvalidInput);
  const std::vector<std::size_t> too_tall{5};
  EXPECT_THROW(sample_independent_blocks(too_tall, 4, 10, 0), InvalidInput);
  const std::vector<std::size_t> zero{0};
  EXPECT_THROW(sample_independent_blocks(zero, 4, 10, 0), InvalidInput);
  EXPECT_THROW(sample_independent_blocks({}, 4, 10, 0), InvalidInput);
}

} // namespace
} // namespace deepdim
