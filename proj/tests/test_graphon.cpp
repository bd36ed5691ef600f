#include <doctest.h>

#include "oracles.hpp"

using namespace mixsbm;

namespace {

SbmParams constant(double g) { return {Eigen::VectorXd::Ones(1), Eigen::MatrixXd::Constant(1, 1, g)}; }

}  // namespace

TEST_CASE("graphon_of") {
  const StepGraphon k1 = graphon_of(constant(0.4));
  CHECK(k1.breaks == std::vector<double>{0.0, 1.0});
  CHECK(k1(0.3, 0.9) == 0.4);
  SbmParams p{Eigen::Vector2d(0.3, 0.7), Eigen::Matrix2d()};
  p.gamma << 0.1, 0.2, 0.3, 0.4;
  const StepGraphon g = graphon_of(p);
  CHECK(g.breaks[1] == doctest::Approx(0.3));
  CHECK(g.breaks[2] == 1.0);
  CHECK(g(0.2, 0.5) == 0.2);
  CHECK(g(0.5, 0.1) == 0.3);
}

TEST_CASE("permuting blocks rearranges the graphon") {
  Rng rng(61);
  const SbmParams p = oracle::random_params(3, rng);
  const BlockPermutation sigma{{2, 0, 1}};
  const SbmParams q = p.permuted(sigma);
  const StepGraphon gp = graphon_of(p);
  const StepGraphon gq = graphon_of(q);
  // The interval of block sigma[k] in q starts where its predecessors end.
  for (int k = 0; k < 3; ++k)
    for (int l = 0; l < 3; ++l) {
      const double u = 0.5 * (gq.breaks[k] + gq.breaks[k + 1]);
      const double v = 0.5 * (gq.breaks[l] + gq.breaks[l + 1]);
      const double u0 = 0.5 * (gp.breaks[sigma[k]] + gp.breaks[sigma[k] + 1]);
      const double v0 = 0.5 * (gp.breaks[sigma[l]] + gp.breaks[sigma[l] + 1]);
      CHECK(gq(u, v) == gp(u0, v0));
    }
  CHECK(graphon_distance(p, q) > 0.0);
}

TEST_CASE("distance examples") {
  CHECK(graphon_distance(constant(0.5), constant(0.3)) == doctest::Approx(0.2));
  const SbmParams split{Eigen::Vector2d(0.5, 0.5), Eigen::Matrix2d::Constant(0.5)};
  CHECK(graphon_distance(constant(0.5), split) == doctest::Approx(0.0).scale(1e-12));
  Rng rng(67);
  const SbmParams p = oracle::random_params(3, rng);
  CHECK(graphon_distance(p, p) == 0.0);
}

TEST_CASE("distance matches grid quadrature") {
  Rng rng(71);
  for (int trial = 0; trial < 10; ++trial) {
    const SbmParams p = oracle::random_params(2, rng);
    const SbmParams q = oracle::random_params(3, rng);
    CHECK(graphon_distance_squared(p, q) ==
          doctest::Approx(oracle::graphon_distance_squared_grid(p, q, 1000)).epsilon(1e-2));
  }
}

TEST_CASE("refinement invariance") {
  Rng rng(73);
  for (int trial = 0; trial < 20; ++trial) {
    const SbmParams p = oracle::random_params(3, rng);
    const SbmParams other = oracle::random_params(2, rng);
    // Split block 1 into two copies with identical rows and columns.
    const double w = 0.3;
    SbmParams s{Eigen::VectorXd(4), Eigen::MatrixXd(4, 4)};
    const int src[4] = {0, 1, 1, 2};
    s.pi << p.pi(0), w * p.pi(1), (1 - w) * p.pi(1), p.pi(2);
    for (int k = 0; k < 4; ++k)
      for (int l = 0; l < 4; ++l) s.gamma(k, l) = p.gamma(src[k], src[l]);
    CHECK(std::abs(graphon_distance(s, other) - graphon_distance(p, other)) < 1e-12);
  }
}

TEST_CASE("triangle inequality on random triples") {
  Rng rng(79);
  for (int trial = 0; trial < 100; ++trial) {
    const SbmParams a = oracle::random_params(1 + trial % 4, rng);
    const SbmParams b = oracle::random_params(1 + (trial / 4) % 4, rng);
    const SbmParams c = oracle::random_params(1 + (trial / 16) % 4, rng);
    CHECK(graphon_distance(a, c) <= graphon_distance(a, b) + graphon_distance(b, c) + 1e-12);
    CHECK(graphon_distance(a, b) == graphon_distance(b, a));
  }
}

TEST_CASE("canonical permutation") {
  SbmParams p{Eigen::Vector2d(0.5, 0.5), Eigen::Matrix2d()};
  p.gamma << 0.2, 0.2, 0.6, 0.6;  // out-marginals 0.2 and 0.6
  CHECK(canonical_permutation(p) == BlockPermutation{{1, 0}});
  const SbmParams c = p.permuted(canonical_permutation(p));
  CHECK(canonical_permutation(c).is_identity());

  Rng rng(83);
  for (int trial = 0; trial < 50; ++trial) {
    const SbmParams q = oracle::random_params(1 + trial % 5, rng);
    const SbmParams cq = q.permuted(canonical_permutation(q));
    CHECK(canonical_permutation(cq).is_identity());
    const SbmParams shuffled = q.permuted(oracle::random_permutation(q.K(), rng));
    CHECK(shuffled.permuted(canonical_permutation(shuffled)) == cq);
  }
}

TEST_CASE("canonical ties fall back to in-marginal, then pi") {
  SbmParams p{Eigen::Vector2d(0.5, 0.5), Eigen::Matrix2d()};
  p.gamma << 0.4, 0.4, 0.2, 0.6;  // equal out-marginals 0.4; in-marginals 0.3, 0.5
  CHECK(canonical_permutation(p) == BlockPermutation{{1, 0}});
  SbmParams q{Eigen::Vector2d(0.3, 0.7), Eigen::Matrix2d::Constant(0.5)};
  CHECK(canonical_permutation(q) == BlockPermutation{{1, 0}});
}

TEST_CASE("match_blocks") {
  Rng rng(89);
  SUBCASE("permuted copies match exactly") {
    for (int trial = 0; trial < 30; ++trial) {
      const SbmParams p = oracle::random_params(1 + trial % 4, rng);
      const SbmParams q = p.permuted(oracle::random_permutation(p.K(), rng));
      const BlockMatch m = match_blocks(p, q);
      CHECK(m.exhaustive);
      CHECK(m.distance == 0.0);
      CHECK(graphon_distance(p.permuted(m.first), q.permuted(m.second)) == 0.0);
    }
  }
  SUBCASE("identical inputs give the identity pair") {
    const SbmParams p = oracle::random_params(3, rng);
    const BlockMatch m = match_blocks(p, p);
    CHECK(m.first.is_identity());
    CHECK(m.second.is_identity());
  }
  SUBCASE("argmin dominates the identity and reports its own distance") {
    for (int trial = 0; trial < 20; ++trial) {
      const SbmParams p = oracle::random_params(2, rng);
      const SbmParams q = oracle::random_params(3, rng);
      const BlockMatch m = match_blocks(p, q);
      CHECK(m.distance <= graphon_distance(p, q) + 1e-15);
      CHECK(m.distance == doctest::Approx(graphon_distance(p.permuted(m.first), q.permuted(m.second))));
    }
  }
  SUBCASE("over budget the canonical orders are used") {
    const SbmParams p = oracle::random_params(5, rng);
    const SbmParams q = oracle::random_params(5, rng);
    const BlockMatch m = match_blocks(p, q, 100);
    CHECK_FALSE(m.exhaustive);
    CHECK(m.first == canonical_permutation(p));
    CHECK(m.second == canonical_permutation(q));
  }
}

TEST_CASE("block degrees") {
  const BlockDegrees d1 = block_degrees(constant(0.3));
  CHECK(d1.in(0) == doctest::Approx(0.3));
  CHECK(d1.out(0) == doctest::Approx(0.3));
  SbmParams p{Eigen::Vector2d(0.5, 0.5), Eigen::Matrix2d()};
  p.gamma << 0, 1, 0, 0;
  const BlockDegrees d = block_degrees(p);
  CHECK(d.out(0) == doctest::Approx(0.5));
  CHECK(d.out(1) == doctest::Approx(0.0));
  CHECK(d.in(0) == doctest::Approx(0.0));
  CHECK(d.in(1) == doctest::Approx(0.5));
  Rng rng(97);
  for (int trial = 0; trial < 20; ++trial) {
    const SbmParams q = oracle::random_params(1 + trial % 5, rng);
    const BlockDegrees dq = block_degrees(q);
    CHECK(q.pi.dot(dq.out) == doctest::Approx(q.pi.dot(dq.in)).epsilon(1e-12));
  }
}
