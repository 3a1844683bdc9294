#include "pipgd/core.hpp"

#include <gtest/gtest.h>

#include "pipgd/problems.hpp"
#include "pipgd/rng.hpp"

namespace pipgd {
namespace {

TEST(MetricDistance, CoincidentPointsAreAtZero) {
  Rng rng(1);
  State z(rng.normal_vector(4), rng.normal_vector(2));
  BlockMetric metric(3.0, 4, 2);
  EXPECT_EQ(metric_distance(z, z, metric), 0.0);
}

TEST(MetricDistance, UnitWeightReducesToEuclidean) {
  BlockMetric metric(1.0, 3, 2);
  Rng rng(2);
  for (int rep = 0; rep < 50; ++rep) {
    State z1(rng.normal_vector(3), rng.normal_vector(2));
    State z2(rng.normal_vector(3), rng.normal_vector(2));
    const double expected = (z1.stacked() - z2.stacked()).norm();
    EXPECT_NEAR(metric_distance(z1, z2, metric), expected, 1e-14);
  }
  // a unit difference in any single coordinate has distance one
  State z1(Vector::Zero(3), Vector::Zero(2));
  State z2(Vector::Zero(3), Vector::Zero(2));
  z2.lambda[1] = 1.0;
  EXPECT_DOUBLE_EQ(metric_distance(z1, z2, metric), 1.0);
}

TEST(MetricDistance, WeightedHandValue) {
  // p = 4, x-difference (3, 0), lambda equal: sqrt(4 * 9) = 6
  BlockMetric metric(4.0, 2, 1);
  State z1((Vector(2) << 3.0, 0.0).finished(), Vector::Zero(1));
  State z2(Vector::Zero(2), Vector::Zero(1));
  EXPECT_DOUBLE_EQ(metric_distance(z1, z2, metric), 6.0);
}

TEST(MetricDistance, TriangleInequalityOnRandomTriples) {
  Rng rng(3);
  BlockMetric metric(2.5, 5, 3);
  for (int rep = 0; rep < 1000; ++rep) {
    State a(rng.normal_vector(5), rng.normal_vector(3));
    State b(rng.normal_vector(5), rng.normal_vector(3));
    State c(rng.normal_vector(5), rng.normal_vector(3));
    const double ab = metric_distance(a, b, metric);
    const double bc = metric_distance(b, c, metric);
    const double ac = metric_distance(a, c, metric);
    EXPECT_LE(ac, ab + bc + 1e-12 * (ab + bc));
  }
}

TEST(MetricDistance, DimensionMismatchThrows) {
  BlockMetric metric(1.0, 3, 2);
  State z1(Vector::Zero(3), Vector::Zero(2));
  State z2(Vector::Zero(4), Vector::Zero(2));
  EXPECT_THROW(metric_distance(z1, z2, metric), std::invalid_argument);
  EXPECT_THROW(BlockMetric(-1.0, 3, 2), std::invalid_argument);
}

TEST(SolverParams, RejectsNonPositiveFields) {
  SolverParams params;
  params.validate();
  params.gamma = 0.0;
  EXPECT_THROW(params.validate(), std::invalid_argument);
  params.gamma = 0.1;
  params.dt = -1.0;
  EXPECT_THROW(params.validate(), std::invalid_argument);
}

TEST(AffineConstraint, EigenExtremesSandwichAAT) {
  Rng rng(4);
  const Matrix a = rng.normal_matrix(3, 7);
  const auto con = AffineConstraint::make(a, rng.normal_vector(3));
  EXPECT_GT(con.a_min, 0.0);
  const Matrix aat = a * a.transpose();
  const Vector probe = rng.normal_vector(3);
  const double quad = probe.dot(aat * probe) / probe.squaredNorm();
  EXPECT_GE(quad, con.a_min - 1e-9);
  EXPECT_LE(quad, con.a_max + 1e-9);
}

TEST(AffineConstraint, RankDeficientRejected) {
  Matrix a(2, 3);
  a << 1, 0, 0, 1, 0, 0;  // duplicated row
  EXPECT_THROW(AffineConstraint::make(a, Vector::Zero(2)), std::invalid_argument);
}

TEST(CompositeProblem, LassoEvaluatorsSatisfyContracts) {
  const LassoInstance inst = make_constrained_lasso(6, 3, 1.0, 11);
  const CompositeProblem prob = inst.as_problem();
  Rng rng(12);

  // gradient matches value by central differences
  const double h = 1e-6;
  for (int rep = 0; rep < 20; ++rep) {
    const Vector x = rng.normal_vector(6);
    const SmoothEval s = prob.eval_smooth(x);
    for (Index j = 0; j < 6; ++j) {
      Vector e = Vector::Zero(6);
      e[j] = h;
      const double fd =
          (prob.eval_smooth(x + e).value - prob.eval_smooth(x - e).value) / (2 * h);
      EXPECT_NEAR(fd, s.gradient[j], 1e-5 * std::max(1.0, std::abs(s.gradient[j])));
    }
  }

  // constraint Jacobian matches h by finite differences
  for (int rep = 0; rep < 10; ++rep) {
    const Vector x = rng.normal_vector(6);
    const ConstraintEval c = prob.eval_constraint(x);
    for (Index j = 0; j < 6; ++j) {
      Vector e = Vector::Zero(6);
      e[j] = h;
      const Vector fd =
          (prob.eval_constraint(x + e).value - prob.eval_constraint(x - e).value) /
          (2 * h);
      for (Index i = 0; i < 3; ++i)
        EXPECT_NEAR(fd[i], c.jacobian(i, j),
                    1e-5 * std::max(1.0, std::abs(c.jacobian(i, j))));
    }
  }

  // prox is firmly nonexpansive
  for (int rep = 0; rep < 200; ++rep) {
    const Vector u = rng.normal_vector(6);
    const Vector v = rng.normal_vector(6);
    const Vector pu = prob.eval_prox(u, 0.3);
    const Vector pv = prob.eval_prox(v, 0.3);
    EXPECT_GE((pu - pv).dot(u - v), (pu - pv).squaredNorm() - 1e-12);
  }

  // dimension guards
  EXPECT_THROW(prob.eval_smooth(Vector::Zero(5)), std::invalid_argument);
  EXPECT_THROW(prob.eval_prox(Vector::Zero(6), 0.0), std::invalid_argument);
}

TEST(State, StackedRoundTrip) {
  Rng rng(5);
  const State z(rng.normal_vector(4), rng.normal_vector(2));
  const State back = State::from_stacked(z.stacked(), 4, 2);
  EXPECT_EQ(back.x, z.x);
  EXPECT_EQ(back.lambda, z.lambda);
  EXPECT_THROW(State::from_stacked(Vector::Zero(5), 4, 2), std::invalid_argument);
}

}  // namespace
}  // namespace pipgd
