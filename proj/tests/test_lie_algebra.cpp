#include "pdruin/lie_algebra.hpp"

#include <gtest/gtest.h>

#include <chrono>
#include <random>

using namespace pdruin;

namespace {

Eigen::MatrixXd m2(double a, double b, double c, double d) {
  Eigen::MatrixXd m(2, 2);
  m << a, b, c, d;
  return m;
}

ModelSpec exp_model(double lambda, double q, double mu) {
  ModelSpec m;
  m.jump_rate = lambda;
  m.kill_rate = q;
  m.jumps = PhaseType::exponential(mu);
  m.drift = DriftSpec::constant(1.0);
  return m;
}

std::vector<Eigen::MatrixXd> gl2() {
  return {m2(1, 0, 0, 0), m2(0, 1, 0, 0), m2(0, 0, 1, 0), m2(0, 0, 0, 1)};
}

}  // namespace

TEST(Commutator, SelfAndShapes) {
  const Eigen::MatrixXd a = m2(1, 2, 3, 4);
  EXPECT_EQ(commutator(a, a).norm(), 0.0);
  EXPECT_THROW(commutator(a, Eigen::MatrixXd::Zero(3, 3)), std::invalid_argument);
}

TEST(Commutator, ReferenceRelations) {
  const Eigen::MatrixXd t1 = m2(1, -1, 0, 0), t2 = m2(0, 0, 1, -1);
  EXPECT_LT((commutator(t1, t2) - (-t1 - t2)).norm(), 1e-15);
  // U1 = [[(lambda + q) / lambda, -1], [0, 0]] with lambda = q = 1
  const Eigen::MatrixXd u1 = m2(2, -1, 0, 0), u3 = m2(0, 1, 0, 0);
  EXPECT_LT((commutator(u1, u3) - m2(0, 2, 0, 0)).norm(), 1e-15);
}

TEST(Commutator, JacobiIdentity) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (int n = 2; n <= 5; ++n) {
    for (int rep = 0; rep < 10; ++rep) {
      Eigen::MatrixXd a(n, n), b(n, n), c(n, n);
      for (auto* m : {&a, &b, &c})
        for (int i = 0; i < n * n; ++i) m->data()[i] = g(rng);
      const Eigen::MatrixXd j =
          commutator(a, commutator(b, c)) + commutator(b, commutator(c, a)) + commutator(c, commutator(a, b));
      EXPECT_LT(j.norm(), 1e-10);
    }
  }
}

TEST(Generators, ExponentialCase) {
  const auto g = build_generators(exp_model(1.0, 0.0, 2.0));
  EXPECT_LT((g.t1 - m2(1, -1, 0, 0)).norm(), 1e-15);
  EXPECT_LT((g.t2 - m2(0, 0, 2, -2)).norm(), 1e-15);
  const auto gq = build_generators(exp_model(2.0, 1.0, 2.0));
  EXPECT_LT((gq.t1 - m2(1.5, -1, 0, 0)).norm(), 1e-15);
  auto up = exp_model(1.0, 0.0, 2.0);
  up.direction = JumpDirection::upward;
  EXPECT_LT((build_generators(up).t2 - m2(0, 0, -2, 2)).norm(), 1e-15);
  EXPECT_THROW(build_generators(exp_model(0.0, 0.0, 2.0)), std::invalid_argument);
}

TEST(Generators, ErlangBlocks) {
  ModelSpec m = exp_model(1.0, 0.0, 1.0);
  m.jumps = PhaseType::erlang(2, 3.0);
  const auto g = build_generators(m);
  ASSERT_EQ(g.t1.rows(), 3);
  EXPECT_DOUBLE_EQ(g.t1(0, 1), -1.0);
  EXPECT_DOUBLE_EQ(g.t1(0, 2), 0.0);
  EXPECT_DOUBLE_EQ(g.t2(1, 0), 0.0);
  EXPECT_DOUBLE_EQ(g.t2(2, 0), 3.0);
  EXPECT_DOUBLE_EQ(g.t2(1, 2), 3.0);
  EXPECT_DOUBLE_EQ(g.t2(2, 2), -3.0);
}

TEST(Closure, QZeroIsTwoDimensionalSolvable) {
  const auto g = build_generators(exp_model(1.0, 0.0, 1.0));
  const auto rep = closure({g.t1, g.t2});
  EXPECT_EQ(rep.dimension, 2);
  EXPECT_TRUE(rep.closed);
  EXPECT_TRUE(rep.solvable);
  EXPECT_EQ(rep.derived_series_dims, (std::vector<int>{2, 1, 0}));
}

TEST(Closure, PositiveKillingGivesGl2) {
  for (double q : {0.1, 0.5, 1.0, 10.0}) {
    const auto g = build_generators(exp_model(1.0, q, 1.0));
    const auto rep = closure({g.t1, g.t2});
    EXPECT_EQ(rep.dimension, 4) << q;
    EXPECT_TRUE(rep.closed);
    EXPECT_FALSE(rep.solvable);
    EXPECT_TRUE(rep.dimension_cap_reached);
    EXPECT_EQ(rep.derived_series_dims, (std::vector<int>{4, 3, 3}));
    EXPECT_TRUE(spans_equal(rep.basis, gl2()));
  }
}

TEST(Closure, SingleGeneratorAndDependentOnes) {
  const Eigen::MatrixXd a = m2(1, 2, 3, 4);
  const auto rep = closure({a});
  EXPECT_EQ(rep.dimension, 1);
  EXPECT_TRUE(rep.closed);
  EXPECT_TRUE(rep.solvable);

  const auto dep = closure({a, 2.0 * a});
  EXPECT_EQ(dep.dimension, 1);
  ASSERT_FALSE(dep.notes.empty());
  EXPECT_NE(dep.notes.front().find("dependent"), std::string::npos);
}

TEST(Closure, IdempotentAndOrderIndependent) {
  ModelSpec m = exp_model(1.0, 0.0, 1.0);
  m.jumps = PhaseType::erlang(2, 1.0);
  const auto g = build_generators(m);
  const auto a = closure({g.t1, g.t2});
  const auto b = closure({g.t2, g.t1});
  EXPECT_EQ(a.dimension, b.dimension);
  EXPECT_TRUE(spans_equal(a.basis, b.basis));
  EXPECT_EQ(closure(a.basis).dimension, a.dimension);
  EXPECT_TRUE(a.closed);
  // invariants of the report
  EXPECT_LE(a.dimension, 9);
  for (std::size_t i = 1; i + 1 < a.derived_series_dims.size(); ++i)
    EXPECT_LT(a.derived_series_dims[i], a.derived_series_dims[i - 1]);
  EXPECT_EQ(a.solvable, a.derived_series_dims.back() == 0);
}

TEST(Closure, Errors) {
  EXPECT_THROW(closure({}), std::invalid_argument);
  EXPECT_THROW(closure({Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(3, 3)}), std::invalid_argument);
}

TEST(Solvability, DerivedSeries) {
  const Eigen::MatrixXd t1 = m2(1, -1, 0, 0), t2 = m2(0, 0, 1, -1);
  auto rep = is_solvable({t1, t2});
  EXPECT_TRUE(rep.solvable);
  EXPECT_EQ(rep.derived_series_dims, (std::vector<int>{2, 1, 0}));

  rep = is_solvable(gl2());
  EXPECT_FALSE(rep.solvable);
  EXPECT_EQ(rep.derived_series_dims, (std::vector<int>{4, 3, 3}));

  rep = is_solvable({m2(0, 1, 0, 0)});
  EXPECT_TRUE(rep.solvable);
  EXPECT_EQ(rep.derived_series_dims, (std::vector<int>{1, 0}));

  EXPECT_THROW(is_solvable({m2(0, 1, 0, 0), m2(0, 0, 1, 0)}), std::invalid_argument);
}

TEST(Closure, FastEnough) {
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < 100; ++i) {
    const auto g = build_generators(exp_model(1.0, 0.5, 1.0));
    closure({g.t1, g.t2});
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_LT(secs, 1.0);
}
