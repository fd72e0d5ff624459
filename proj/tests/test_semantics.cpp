#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

using namespace trajsynth;

namespace {

DirectionFrame unit_frame(std::size_t d) { return {std::vector<double>(d, 0.0), std::vector<double>(d, 1.0)}; }

// Random frame whose diagonal spans typical score ranges.
DirectionFrame random_frame(std::mt19937_64& rng, std::size_t d) {
  std::uniform_real_distribution<double> v(-10, 10), u(0.5, 20);
  DirectionFrame f;
  for (std::size_t i = 0; i < d; ++i) {
    f.v.push_back(v(rng));
    f.u.push_back(u(rng));
  }
  return f;
}

std::vector<double> random_theta(std::mt19937_64& rng, std::size_t d) {
  std::uniform_real_distribution<double> th(-6, 6);
  std::vector<double> t(d);
  for (auto& x : t) x = th(rng);
  return t;
}

}  // namespace

TEST(Golden, SequenceOfSpeedsOnZ1) {
  const Registry reg = support::golden_registry();
  const auto z1 = support::golden_z1();
  const Query q = substitute(support::golden_sketch(), {0.5, 0.6});
  EXPECT_TRUE(eval_sat(q, reg, z1));
  EXPECT_FALSE(eval_sat(substitute(support::golden_sketch(), {0.6, 0.6}), reg, z1));
  EXPECT_TRUE(eval_sat(substitute(support::golden_sketch(), {0.6, 0.6}), reg, support::golden_z0()));
}

TEST(Golden, QuantitativeValueAlongUnitDiagonal) {
  const Registry reg = support::golden_registry();
  const auto f = unit_frame(2);
  EXPECT_DOUBLE_EQ(eval_quant(support::golden_sketch(), reg, f, support::golden_z0()), 0.6);
  EXPECT_DOUBLE_EQ(eval_quant(support::golden_sketch(), reg, f, support::golden_z1()), 0.5);
  EXPECT_DOUBLE_EQ(eval_quant_fast(support::golden_sketch(), reg, f, support::golden_z1()), 0.5);
}

TEST(Golden, MatrixEntries) {
  const Registry reg = support::golden_registry();
  const auto z0 = support::golden_z0();
  const QuantMatrix m = eval_matrix(support::golden_sketch(), reg, unit_frame(2), z0);
  EXPECT_DOUBLE_EQ(m(0, 2), 0.6);
  EXPECT_EQ(m(0, 1), -kInf);
  EXPECT_TRUE(m.upper_triangular());
}

TEST(SubConvention, WrapsWithAnyOnBothSides) {
  EXPECT_EQ(print_query(wrap_sub(pred("None"))), "Any ; None ; Any");
  const Registry reg = support::golden_registry();
  const auto z = support::velocity_traj("s", {0.1, 0.9, 0.1});
  const Query q = pred_fixed("VelGt", 0.8, {'A'});
  EXPECT_FALSE(eval_sat(q, reg, z));
  EXPECT_TRUE(eval_sat_sub(q, reg, z));
}

TEST(Semantics, CompleteQueryQuantIsInfinite) {
  const Registry reg = support::golden_registry();
  const Query q = substitute(support::golden_sketch(), {0.5, 0.6});
  EXPECT_EQ(eval_quant(q, reg, unit_frame(0), support::golden_z1()), kInf);
  const Query r = substitute(support::golden_sketch(), {0.95, 0.6});
  EXPECT_EQ(eval_quant(r, reg, unit_frame(0), support::golden_z0()), -kInf);
  EXPECT_EQ(eval_quant_fast(r, reg, unit_frame(0), support::golden_z0()), -kInf);
}

TEST(Semantics, FrameDimensionMismatchThrows) {
  const Registry reg = support::golden_registry();
  EXPECT_THROW(eval_quant(support::golden_sketch(), reg, unit_frame(1), support::golden_z0()), SemanticsError);
}

TEST(Semantics, EmptyTrajectory) {
  const Registry reg = support::golden_registry();
  Trajectory z;
  z.id = "e";
  EXPECT_TRUE(eval_sat(pred("Any"), reg, z));
  EXPECT_FALSE(eval_sat(pred_fixed("VelGt", 0, {'A'}), reg, z));
  EXPECT_TRUE(eval_sat(star(pred_fixed("VelGt", 0, {'A'})), reg, z));
}

TEST(Semantics, SatisfactionMatchesSplitOracle) {
  const Registry reg = support::random_registry();
  std::mt19937_64 rng(61);
  support::SketchOptions opt;
  opt.allow_star = opt.allow_neg = opt.allow_dashv = true;
  for (int iter = 0; iter < 400; ++iter) {
    const Query sk = support::random_sketch(rng, opt, 0, 4);
    const auto theta = random_theta(rng, hole_order(sk).size());
    const auto z = support::random_traj(rng, iter % 6, 0.1);
    const bool expect = support::SatOracle(reg, z).sat(sk, theta);
    const Query q = substitute(sk, theta);
    ASSERT_EQ(eval_sat(q, reg, z), expect) << print_query(q);
    ASSERT_EQ(eval_sat_at(CompiledQuery(sk, reg), theta, z), expect) << print_query(sk);
  }
}

TEST(Semantics, NegationIsExactComplement) {
  const Registry reg = support::random_registry();
  std::mt19937_64 rng(67);
  support::SketchOptions opt;
  opt.allow_star = opt.allow_neg = opt.allow_dashv = true;
  for (int iter = 0; iter < 300; ++iter) {
    const Query sk = support::random_sketch(rng, opt, 0, 3);
    const Query q = substitute(sk, random_theta(rng, hole_order(sk).size()));
    const auto z = support::random_traj(rng, iter % 7, 0.1);
    ASSERT_EQ(eval_sat(neg(q), reg, z), !eval_sat(q, reg, z)) << print_query(q);
    ASSERT_EQ(eval_sat(neg(neg(q)), reg, z), eval_sat(q, reg, z)) << print_query(q);
  }
}

TEST(Semantics, FastAgreesWithMatrix) {
  const Registry reg = support::random_registry();
  std::mt19937_64 rng(71);
  support::SketchOptions opt;
  opt.allow_star = opt.allow_neg = opt.allow_dashv = true;
  for (int iter = 0; iter < 200; ++iter) {
    const Query sk = support::random_sketch(rng, opt, 1, 3);
    const auto f = random_frame(rng, hole_order(sk).size());
    const auto z = support::random_traj(rng, 1 + iter % 12, 0.1);
    const CompiledQuery cq(sk, reg);
    const QuantMatrix m = eval_matrix(cq, f, z);
    ASSERT_TRUE(m.upper_triangular());
    ASSERT_EQ(eval_quant_fast(cq, f, z), m(0, z.size())) << print_query(sk);
    ASSERT_EQ(eval_quant(cq, f, z), m(0, z.size())) << print_query(sk);
  }
}

TEST(Semantics, MatrixEntryIsValueOnWindow) {
  const Registry reg = support::random_registry();
  std::mt19937_64 rng(73);
  support::SketchOptions opt;
  opt.allow_star = opt.allow_neg = true;
  for (int iter = 0; iter < 100; ++iter) {
    const Query sk = support::random_sketch(rng, opt, 1, 3);
    const auto f = random_frame(rng, hole_order(sk).size());
    const auto z = support::random_traj(rng, 1 + iter % 8, 0.1);
    const CompiledQuery cq(sk, reg);
    const QuantMatrix m = eval_matrix(cq, f, z);
    for (std::size_t i = 0; i <= z.size(); ++i)
      for (std::size_t j = i; j <= z.size(); ++j) {
        ASSERT_EQ(m(i, j), eval_quant(cq, f, materialize(subtrajectory(z, i, j)))) << print_query(sk);
        ASSERT_EQ(m(i, j), eval_quant_window(cq, f, z, i, j)) << print_query(sk);
      }
  }
}

TEST(Semantics, WindowOperatorReadsWholeSuffix) {
  // Dashv entries look past j, so they differ from the materialized window.
  const Registry reg = support::golden_registry();
  const auto z = support::velocity_traj("w", {0.9, 0.9, 0.1});
  const Query q = dashv(seq(pred_fixed("VelGt", 0.5, {'A'}), pred("Any")), 0, 2);
  const QuantMatrix m = eval_matrix(q, reg, unit_frame(0), z);
  EXPECT_EQ(m(0, 1), kInf);
  // The suffix from frame 2 is too slow.
  EXPECT_EQ(m(0, 2), -kInf);
  EXPECT_EQ(m(1, 3), -kInf);
  EXPECT_EQ(eval_quant(q, reg, unit_frame(0), materialize(subtrajectory(z, 0, 1))), -kInf);
  EXPECT_EQ(eval_quant_window(CompiledQuery(q, reg), unit_frame(0), z, 0, 1), kInf);
}

TEST(Semantics, IterateEqualsRepeatedSequence) {
  const Registry reg = support::random_registry();
  std::mt19937_64 rng(79);
  support::SketchOptions opt;
  for (int iter = 0; iter < 100; ++iter) {
    Query sk = iterate(support::random_sketch(rng, opt, 1, 2), 2 + iter % 3);
    sk = renumber_holes(sk);
    const auto f = random_frame(rng, hole_order(sk).size());
    const auto z = support::random_traj(rng, iter % 8, 0.1);
    ASSERT_EQ(eval_quant(sk, reg, f, z), eval_quant(desugar(sk), reg, f, z)) << print_query(sk);
    ASSERT_EQ(eval_quant_fast(sk, reg, f, z), eval_quant(desugar(sk), reg, f, z)) << print_query(sk);
  }
}

TEST(Semantics, StarMatchesBruteForceOnShortTrajectories) {
  const Registry reg = support::random_registry();
  std::mt19937_64 rng(83);
  support::SketchOptions opt;
  opt.max_depth = 2;
  opt.allow_neg = true;
  for (int iter = 0; iter < 150; ++iter) {
    const Query body = support::random_sketch(rng, opt, 0, 2);
    const Query sk = star(body);
    const auto theta = random_theta(rng, hole_order(sk).size());
    const auto z = support::random_traj(rng, iter % 7, 0.1);
    ASSERT_EQ(eval_sat(substitute(sk, theta), reg, z), support::SatOracle(reg, z).sat(sk, theta))
        << print_query(sk);
  }
}

TEST(Semantics, DiagonalBoundary) {
  // Q at theta = t u + v holds exactly for t at or below the value (strictly
  // below under negation).
  const Registry reg = support::random_registry();
  std::mt19937_64 rng(89);
  support::SketchOptions opt;
  opt.allow_star = opt.allow_neg = opt.allow_dashv = true;
  int checked = 0;
  for (int iter = 0; iter < 300; ++iter) {
    const Query sk = support::random_sketch(rng, opt, 1, 3);
    const auto f = random_frame(rng, hole_order(sk).size());
    const auto z = support::random_traj(rng, 1 + iter % 8, 0.1);
    const CompiledQuery cq(sk, reg);
    const double t = eval_quant(cq, f, z);
    if (!std::isfinite(t)) continue;
    ++checked;
    const double eps = 1e-7 * std::max(1.0, std::abs(t));
    ASSERT_TRUE(eval_sat_at(cq, support::along(f, t - eps), z)) << print_query(sk);
    ASSERT_FALSE(eval_sat_at(cq, support::along(f, t + eps), z)) << print_query(sk);
  }
  EXPECT_GT(checked, 50);
}

TEST(Semantics, CachedAndUncachedAgree) {
  const Registry reg = support::random_registry();
  std::mt19937_64 rng(97);
  // The cache keys on trajectory addresses, so every trajectory stays alive.
  std::vector<Trajectory> zs;
  for (int k = 0; k < 10; ++k) zs.push_back(support::random_traj(rng, 6, 0.1));
  ScoreCache cache;
  support::SketchOptions opt;
  for (int iter = 0; iter < 50; ++iter) {
    const Query sk = support::random_sketch(rng, opt, 1, 2);
    const auto f = random_frame(rng, hole_order(sk).size());
    const auto& z = zs[static_cast<std::size_t>(iter % 10)];
    const CompiledQuery cq(sk, reg);
    ASSERT_EQ(eval_quant_fast(cq, f, z, &cache), eval_quant_fast(cq, f, z));
  }
  EXPECT_GT(cache.size(), 0u);
}

TEST(MaxMin, ProductAndVectorForm) {
  QuantMatrix x(1), y(1);
  x(0, 0) = 1;
  x(0, 1) = 3;
  x(1, 1) = 2;
  y(0, 0) = 5;
  y(0, 1) = 0;
  y(1, 1) = 4;
  const QuantMatrix p = maxmin_product(x, y);
  EXPECT_EQ(p(0, 0), 1);
  EXPECT_EQ(p(0, 1), 3);
  EXPECT_EQ(p(1, 1), 2);
  const auto v = maxmin_vecmat({x(0, 0), x(0, 1)}, y);
  EXPECT_EQ(v[0], p(0, 0));
  EXPECT_EQ(v[1], p(0, 1));
}
