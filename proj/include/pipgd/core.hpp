#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pipgd/eig.hpp"
#include "pipgd/types.hpp"

namespace pipgd {

/// Stacked solver state z = (x, lambda): primal variables plus the
/// multipliers acting as controller state.
struct State {
  Vector x;
  Vector lambda;

  State() = default;
  State(Vector x_, Vector lambda_) : x(std::move(x_)), lambda(std::move(lambda_)) {}

  Index n() const { return x.size(); }
  Index m() const { return lambda.size(); }

  Vector stacked() const {
    Vector z(x.size() + lambda.size());
    z << x, lambda;
    return z;
  }

  static State from_stacked(const Vector& z, Index n, Index m) {
    if (z.size() != n + m)
      throw std::invalid_argument("State::from_stacked: size mismatch");
    return State(z.head(n), z.tail(m));
  }
};

/// Block-diagonal metric P = diag(p I_n, I_m). All trajectory distances and
/// field norms are measured in the induced norm
/// ||z||_P = sqrt(p ||x||^2 + ||lambda||^2).
struct BlockMetric {
  double p_weight = 1.0;
  Index n = 0;
  Index m = 0;

  BlockMetric() = default;
  BlockMetric(double p, Index n_, Index m_) : p_weight(p), n(n_), m(m_) {
    if (p <= 0.0) throw std::invalid_argument("BlockMetric: p_weight must be > 0");
    if (n_ <= 0 || m_ < 0) throw std::invalid_argument("BlockMetric: bad dimensions");
  }

  double norm(const Vector& dx, const Vector& dlambda) const {
    if (dx.size() != n || dlambda.size() != m)
      throw std::invalid_argument("BlockMetric::norm: dimension mismatch");
    return std::sqrt(p_weight * dx.squaredNorm() + dlambda.squaredNorm());
  }

  double norm(const State& dz) const { return norm(dz.x, dz.lambda); }

  /// Dense P, for the lognorm computations.
  Matrix matrix() const {
    Matrix p = Matrix::Identity(n + m, n + m);
    p.topLeftCorner(n, n) *= p_weight;
    return p;
  }
};

inline double metric_distance(const State& z1, const State& z2,
                              const BlockMetric& metric) {
  if (z1.n() != z2.n() || z1.m() != z2.m())
    throw std::invalid_argument("metric_distance: dimension mismatch");
  return metric.norm(z1.x - z2.x, z1.lambda - z2.lambda);
}

struct SmoothEval {
  double value = 0.0;
  Vector gradient;
};

struct ConstraintEval {
  Vector value;     // h(x), m-vector
  Matrix jacobian;  // Dh(x), m x n
};

/// A problem instance as a bundle of black-box evaluators. The dynamics only
/// ever need point evaluations of f, grad f, prox, h and Dh, so no expression
/// structure is kept. Evaluators must be pure (callable concurrently).
struct CompositeProblem {
  Index n = 0;
  Index m = 0;
  /// f(x) and its gradient.
  std::function<SmoothEval(const Vector&)> smooth;
  /// prox_{gamma g}(v) for the nonsmooth term; must be single-valued.
  std::function<Vector(const Vector&, double)> prox;
  /// h(x) and Dh(x).
  std::function<ConstraintEval(const Vector&)> constraint;
  /// Hessian of f, optional. When absent, consumers that need curvature fall
  /// back to finite differences of the gradient.
  std::function<Matrix(const Vector&)> hessian;

  SmoothEval eval_smooth(const Vector& x) const {
    check_x(x);
    SmoothEval s = smooth(x);
    if (s.gradient.size() != n)
      throw std::invalid_argument("CompositeProblem: gradient size mismatch");
    return s;
  }

  Vector eval_prox(const Vector& v, double gamma) const {
    check_x(v);
    if (gamma <= 0.0)
      throw std::invalid_argument("CompositeProblem: gamma must be > 0");
    Vector p = prox(v, gamma);
    if (p.size() != n)
      throw std::invalid_argument("CompositeProblem: prox size mismatch");
    return p;
  }

  ConstraintEval eval_constraint(const Vector& x) const {
    check_x(x);
    ConstraintEval c = constraint(x);
    if (c.value.size() != m || c.jacobian.rows() != m || c.jacobian.cols() != n)
      throw std::invalid_argument("CompositeProblem: constraint size mismatch");
    return c;
  }

 private:
  void check_x(const Vector& x) const {
    if (x.size() != n)
      throw std::invalid_argument("CompositeProblem: x has wrong dimension");
  }
};

/// Affine constraint h(x) = Ax - b with cached extremal eigenvalues of AA^T.
struct AffineConstraint {
  Matrix A;
  Vector b;
  double a_min = 0.0;  // smallest eigenvalue of AA^T
  double a_max = 0.0;  // largest eigenvalue of AA^T

  static AffineConstraint make(Matrix A, Vector b) {
    if (A.rows() != b.size())
      throw std::invalid_argument("AffineConstraint: A rows must match b");
    if (A.rows() > A.cols())
      throw std::invalid_argument("AffineConstraint: need m <= n");
    AffineConstraint c;
    const Vector ev = symmetric_eigenvalues(A * A.transpose());
    c.a_min = ev[0];
    c.a_max = ev[ev.size() - 1];
    if (!(c.a_min > 0.0))
      throw std::invalid_argument("AffineConstraint: A is not full row rank");
    c.A = std::move(A);
    c.b = std::move(b);
    return c;
  }
};

/// Everything the convergence conditions constrain, plus the integration
/// grid. All fields must be strictly positive.
struct SolverParams {
  double gamma = 0.1;    // prox / gradient scale
  double kp = 1.0;       // proportional gain
  double ki = 1.0;       // integral gain
  double p_weight = 1.0; // metric weight p in P = diag(p I_n, I_m)
  double dt = 0.01;      // integration step (flow time)
  double t_end = 10.0;   // horizon
  double eq_tol = 1e-8;  // equilibrium detection threshold on ||zdot||_P

  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0))
        throw std::invalid_argument(std::string("SolverParams: ") + name +
                                    " must be > 0");
    };
    positive(gamma, "gamma");
    positive(kp, "kp");
    positive(ki, "ki");
    positive(p_weight, "p_weight");
    positive(dt, "dt");
    positive(t_end, "t_end");
    positive(eq_tol, "eq_tol");
  }

  BlockMetric metric(Index n, Index m) const {
    return BlockMetric(p_weight, n, m);
  }
};

/// Recorded flow samples. All vectors share the same length; times are
/// strictly increasing. `aborted` is set when integration hit a non-finite
/// value and the record is partial.
struct Trajectory {
  std::vector<double> times;
  std::vector<State> states;
  std::vector<double> residuals;    // ||h(x)||_2 per sample
  std::vector<double> field_norms;  // ||zdot||_P per sample
  bool aborted = false;
  std::string abort_reason;

  std::size_t size() const { return times.size(); }

  const State& back() const {
    if (states.empty()) throw std::runtime_error("Trajectory: empty");
    return states.back();
  }
};

}  // namespace pipgd
