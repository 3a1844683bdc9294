#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

#include "pipgd/core.hpp"
#include "pipgd/dynamics.hpp"
#include "pipgd/eig.hpp"
#include "pipgd/prox.hpp"
#include "pipgd/rng.hpp"

namespace pipgd {

/// Equality-constrained lasso instance:
///   min (1/2) x^T W x + alpha ||x||_1   s.t.  A x = b
/// with W symmetric positive definite and A full row rank. rho and L cache
/// the extremal eigenvalues of W.
struct LassoInstance {
  Matrix W;
  Matrix A;
  Vector b;
  double alpha = 1.0;
  double rho = 0.0;
  double L = 0.0;
  std::uint64_t seed = 0;

  Index n() const { return W.rows(); }
  Index m() const { return A.rows(); }

  CompositeProblem as_problem() const {
    CompositeProblem prob;
    prob.n = n();
    prob.m = m();
    const Matrix w = W;
    const Matrix a = A;
    const Vector rhs = b;
    const double weight = alpha;
    prob.smooth = [w](const Vector& x) {
      SmoothEval s;
      s.gradient = w * x;
      s.value = 0.5 * x.dot(s.gradient);
      return s;
    };
    prob.prox = [weight](const Vector& v, double gamma) {
      return weight > 0.0 ? soft_threshold(v, gamma * weight) : identity_prox(v);
    };
    prob.constraint = [a, rhs](const Vector& x) {
      return ConstraintEval{a * x - rhs, a};
    };
    prob.hessian = [w](const Vector&) { return w; };
    return prob;
  }

  AffineConstraint affine_constraint() const { return AffineConstraint::make(A, b); }
};

/// Draw an instance with W = 10 I + Wt Wt^T and standard-normal Wt, A, b.
/// Deterministic in the seed; A is redrawn until it has full row rank (a
/// standard-normal draw already is, almost surely).
inline LassoInstance make_constrained_lasso(Index n, Index m, double alpha,
                                            std::uint64_t seed) {
  if (n < m || m < 1)
    throw std::invalid_argument("make_constrained_lasso: need n >= m >= 1");
  if (alpha < 0.0)
    throw std::invalid_argument("make_constrained_lasso: alpha must be >= 0");
  Rng rng(seed);
  LassoInstance inst;
  inst.seed = seed;
  inst.alpha = alpha;
  const Matrix wt = rng.normal_matrix(n, n);
  const Matrix gram = wt * wt.transpose();
  // entrywise symmetrization keeps W exactly symmetric in floating point
  inst.W = 10.0 * Matrix::Identity(n, n) + 0.5 * (gram + gram.transpose());
  const Vector ev = symmetric_eigenvalues(inst.W);
  inst.rho = ev[0];
  inst.L = ev[n - 1];
  for (int attempt = 0; attempt < 64; ++attempt) {
    inst.A = rng.normal_matrix(m, n);
    const Vector aev = symmetric_eigenvalues(inst.A * inst.A.transpose());
    if (aev[0] > 1e-12 * aev[m - 1]) break;
    if (attempt == 63)
      throw std::runtime_error("make_constrained_lasso: could not draw full-rank A");
  }
  inst.b = rng.normal_vector(m);
  return inst;
}

/// The fixed three-variable, two-constraint nonconvex test problem:
///   min (x1-1)^2 + (x2-2)^2 + (x3+1)^2 + 0.5 ||x||_1
///   s.t. x1^2 + x2 - 1 = 0,  sin(x2) + x3 - 0.5 = 0.
/// The constraint Jacobian has a constant third column (0, 1)^T, so its rows
/// are independent everywhere (LICQ holds globally).
inline CompositeProblem nonlinear_lasso_instance() {
  CompositeProblem prob;
  prob.n = 3;
  prob.m = 2;
  prob.smooth = [](const Vector& x) {
    SmoothEval s;
    s.value = (x[0] - 1.0) * (x[0] - 1.0) + (x[1] - 2.0) * (x[1] - 2.0) +
              (x[2] + 1.0) * (x[2] + 1.0);
    s.gradient.resize(3);
    s.gradient << 2.0 * (x[0] - 1.0), 2.0 * (x[1] - 2.0), 2.0 * (x[2] + 1.0);
    return s;
  };
  prob.prox = [](const Vector& v, double gamma) {
    return soft_threshold(v, gamma * 0.5);
  };
  prob.constraint = [](const Vector& x) {
    ConstraintEval c;
    c.value.resize(2);
    c.value << x[0] * x[0] + x[1] - 1.0, std::sin(x[1]) + x[2] - 0.5;
    c.jacobian.resize(2, 3);
    c.jacobian << 2.0 * x[0], 1.0, 0.0, 0.0, std::cos(x[1]), 1.0;
    return c;
  };
  prob.hessian = [](const Vector&) {
    return Matrix(2.0 * Matrix::Identity(3, 3));
  };
  return prob;
}

constexpr double kNonlinearLassoAlpha = 0.5;

inline double nonlinear_lasso_cost(const Vector& x) {
  return (x[0] - 1.0) * (x[0] - 1.0) + (x[1] - 2.0) * (x[1] - 2.0) +
         (x[2] + 1.0) * (x[2] + 1.0) + kNonlinearLassoAlpha * x.lpNorm<1>();
}

struct OracleSolution {
  Vector x;
  Vector lambda;
  int iterations = 0;
};

/// Ground-truth solver for LassoInstance by ADMM splitting x = z: the
/// x-block solves the equality-constrained quadratic subproblem through one
/// factorized KKT system [[W + sigma I, A^T], [A, 0]], the z-block is a soft
/// threshold. Returns the sparse iterate and the KKT multiplier; at the
/// requested tolerance the pair satisfies the stationarity conditions of the
/// original problem.
inline OracleSolution admm_oracle(const LassoInstance& inst, int max_iter = 50000,
                                  double tol = 1e-11) {
  const Index n = inst.n(), m = inst.m();
  const double sigma = 1.0;
  Matrix kkt(n + m, n + m);
  kkt.topLeftCorner(n, n) = inst.W + sigma * Matrix::Identity(n, n);
  kkt.topRightCorner(n, m) = inst.A.transpose();
  kkt.bottomLeftCorner(m, n) = inst.A;
  kkt.bottomRightCorner(m, m).setZero();
  const Eigen::PartialPivLU<Matrix> lu(kkt);

  Vector z = Vector::Zero(n);
  Vector u = Vector::Zero(n);
  Vector lambda = Vector::Zero(m);
  Vector rhs(n + m);
  double primal = 0.0, dual = 0.0, feas = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    rhs << sigma * (z - u), inst.b;
    const Vector sol = lu.solve(rhs);
    const Vector x = sol.head(n);
    lambda = sol.tail(m);
    const Vector z_old = z;
    const Vector v = x + u;
    z = inst.alpha > 0.0 ? soft_threshold(v, inst.alpha / sigma) : v;
    u += x - z;
    primal = (x - z).norm();
    dual = sigma * (z - z_old).norm();
    feas = (inst.A * z - inst.b).norm();
    if (primal <= tol && dual <= tol && feas <= tol)
      return {z, lambda, it};
  }
  throw std::runtime_error(
      "admm_oracle: no convergence in " + std::to_string(max_iter) +
      " iterations (primal " + std::to_string(primal) + ", dual " +
      std::to_string(dual) + ", feasibility " + std::to_string(feas) + ")");
}

struct AugLagOptions {
  double gamma = 0.5;      // scale used for the stationarity measure
  double mu0 = 10.0;       // initial penalty weight
  int max_outer = 60;
  int max_inner = 20000;
  double tol = 1e-8;       // target on both stationarity components
};

/// Reference solver for smooth nonlinear equality constraints: an augmented
/// Lagrangian outer loop (lambda <- lambda + mu h(x)), with each subproblem
///   min_x f(x) + g(x) + lambda^T h(x) + (mu/2) ||h(x)||^2
/// solved by proximal gradient with backtracking. Errors out when the
/// constraint violation stalls (e.g. on infeasible problems).
inline OracleSolution augmented_lagrangian_oracle(const CompositeProblem& prob,
                                                  const Vector& x0,
                                                  const AugLagOptions& opts = {}) {
  if (x0.size() != prob.n)
    throw std::invalid_argument("augmented_lagrangian_oracle: x0 dimension mismatch");
  Vector x = x0;
  Vector lambda = Vector::Zero(prob.m);
  double mu = opts.mu0;
  int evals = 0;

  auto merit = [&](const Vector& v, Vector* grad) -> double {
    const SmoothEval s = prob.eval_smooth(v);
    const ConstraintEval c = prob.eval_constraint(v);
    ++evals;
    if (grad)
      *grad = s.gradient + c.jacobian.transpose() * (lambda + mu * c.value);
    return s.value + lambda.dot(c.value) + 0.5 * mu * c.value.squaredNorm();
  };

  double h_prev = prob.eval_constraint(x).value.norm();
  double eta = 1.0;  // nonincreasing within an outer round, so the
                     // proximal-gradient map stays a contraction
  double mu_of_eta = mu;
  int stalled_outers = 0;
  for (int outer = 0; outer < opts.max_outer; ++outer) {
    // when the penalty weight grew, the subproblem curvature grew with it
    if (mu > mu_of_eta) {
      eta *= mu_of_eta / mu;
      mu_of_eta = mu;
    }
    const double inner_tol = std::max(0.2 * opts.tol, 0.02 * h_prev);
    for (int inner = 0; inner < opts.max_inner; ++inner) {
      Vector grad;
      const double value = merit(x, &grad);
      Vector x_next;
      for (int bt = 0; bt < 60; ++bt) {
        x_next = prob.eval_prox(x - eta * grad, eta);
        const Vector step = x_next - x;
        const double quad = value + grad.dot(step) + step.squaredNorm() / (2.0 * eta);
        if (merit(x_next, nullptr) <= quad + 1e-14 * std::max(1.0, std::abs(value)))
          break;
        eta *= 0.5;
      }
      const Vector step = x_next - x;
      const double move = step.norm() / eta;
      x = x_next;
      if (move <= inner_tol) break;
      // floating-point floor: the step is indistinguishable from roundoff
      if (step.norm() <= 8.0 * std::numeric_limits<double>::epsilon() *
                             (1.0 + x.norm()))
        break;
    }

    const Vector h = prob.eval_constraint(x).value;
    lambda += mu * h.eval();
    const State z(x, lambda);
    const StationarityResidual res = stationarity_residual(z, prob, opts.gamma);
    if (res.r_fix <= opts.tol && res.r_feas <= opts.tol)
      return {x, lambda, evals};

    // raise the penalty only while feasibility is both unconverged and
    // decreasing too slowly; escalating near the floor just destroys the
    // subproblem conditioning
    if (h.norm() > opts.tol && h.norm() > 0.5 * h_prev) {
      mu = std::min(mu * 5.0, 1e8);
      ++stalled_outers;
    } else {
      stalled_outers = 0;
    }
    if (stalled_outers >= 8 && h.norm() > std::sqrt(opts.tol))
      throw std::runtime_error(
          "augmented_lagrangian_oracle: constraint violation stalled at " +
          std::to_string(h.norm()) + " (infeasible problem?)");
    h_prev = h.norm();
  }
  throw std::runtime_error("augmented_lagrangian_oracle: no convergence");
}

}  // namespace pipgd
