#pragma once

#include <functional>
#include <stdexcept>
#include <utility>

#include "pipgd/core.hpp"
#include "pipgd/prox.hpp"

namespace pipgd {

/// One evaluation of the closed-loop vector field. `prox_point` caches the
/// prox image so callers (and the dual update itself) never pay for a second
/// prox evaluation.
struct FieldEvaluation {
  Vector dx;
  Vector dlambda;
  Vector prox_point;

  Vector dz() const {
    Vector v(dx.size() + dlambda.size());
    v << dx, dlambda;
    return v;
  }
};

/// Closed-loop dynamics for a general differentiable constraint h:
///
///   xdot      = -x + prox_{gamma g}(x - gamma (grad f(x) + Dh(x)^T lambda))
///   lambdadot = kp Dh(x) xdot + ki h(x)
///
/// The dual update reuses the already computed xdot, so the prox is evaluated
/// exactly once per call.
inline FieldEvaluation field_general(const State& z, const CompositeProblem& prob,
                                     const SolverParams& params) {
  if (z.n() != prob.n || z.m() != prob.m)
    throw std::invalid_argument("field_general: state/problem dimension mismatch");
  if (!(params.gamma > 0.0))
    throw std::invalid_argument("field_general: gamma must be > 0");
  const SmoothEval smooth = prob.eval_smooth(z.x);
  const ConstraintEval con = prob.eval_constraint(z.x);
  FieldEvaluation out;
  out.prox_point = prob.eval_prox(
      z.x - params.gamma * (smooth.gradient + con.jacobian.transpose() * z.lambda),
      params.gamma);
  out.dx = -z.x + out.prox_point;
  out.dlambda = params.kp * (con.jacobian * out.dx) + params.ki * con.value;
  return out;
}

/// Specialization for h(x) = Ax - b:
///
///   xdot      = -x + prox_{gamma g}(x - gamma (grad f(x) + A^T lambda))
///   lambdadot = (ki - kp) A x + kp A prox_point - ki b
///
/// Algebraically identical to field_general on the same problem.
inline FieldEvaluation field_affine(const State& z, const CompositeProblem& prob,
                                    const AffineConstraint& con,
                                    const SolverParams& params) {
  if (z.n() != prob.n || z.m() != con.A.rows() || con.A.cols() != prob.n)
    throw std::invalid_argument("field_affine: dimension mismatch");
  if (!(params.gamma > 0.0))
    throw std::invalid_argument("field_affine: gamma must be > 0");
  const SmoothEval smooth = prob.eval_smooth(z.x);
  FieldEvaluation out;
  out.prox_point = prob.eval_prox(
      z.x - params.gamma * (smooth.gradient + con.A.transpose() * z.lambda),
      params.gamma);
  out.dx = -z.x + out.prox_point;
  out.dlambda = (params.ki - params.kp) * (con.A * z.x) +
                params.kp * (con.A * out.prox_point) - params.ki * con.b;
  return out;
}

/// Inequality constraints q(x) <= 0 handled through slack variables.
struct InequalityConstraint {
  Index r = 0;
  std::function<ConstraintEval(const Vector&)> eval;  // q(x), Dq(x)
};

/// Equivalent equality-constrained problem on the augmented primal (x, s):
/// objective f(x) + g(x) + indicator(s >= 0), constraint
/// h~(x, s) = (h(x), q(x) + s). The slack block of the prox is the
/// nonnegative projection.
inline CompositeProblem make_slack_problem(const CompositeProblem& prob,
                                           const InequalityConstraint& ineq) {
  if (!ineq.eval || ineq.r <= 0)
    throw std::invalid_argument("make_slack_problem: bad inequality evaluator");
  const Index n = prob.n, m = prob.m, r = ineq.r;
  CompositeProblem aug;
  aug.n = n + r;
  aug.m = m + r;
  aug.smooth = [prob, n, r](const Vector& xs) {
    SmoothEval base = prob.eval_smooth(xs.head(n));
    SmoothEval out;
    out.value = base.value;
    out.gradient = Vector::Zero(n + r);
    out.gradient.head(n) = base.gradient;
    return out;
  };
  aug.prox = [prob, n, r](const Vector& v, double gamma) {
    Vector out(n + r);
    out.head(n) = prob.eval_prox(v.head(n), gamma);
    out.tail(r) = nonneg_prox(v.tail(r));
    return out;
  };
  aug.constraint = [prob, ineq, n, m, r](const Vector& xs) {
    const Vector x = xs.head(n);
    const Vector s = xs.tail(r);
    ConstraintEval h = prob.eval_constraint(x);
    ConstraintEval q = ineq.eval(x);
    if (q.value.size() != r || q.jacobian.rows() != r || q.jacobian.cols() != n)
      throw std::invalid_argument("make_slack_problem: q evaluator size mismatch");
    ConstraintEval out;
    out.value.resize(m + r);
    out.value << h.value, q.value + s;
    out.jacobian = Matrix::Zero(m + r, n + r);
    out.jacobian.topLeftCorner(m, n) = h.jacobian;
    out.jacobian.bottomLeftCorner(r, n) = q.jacobian;
    out.jacobian.bottomRightCorner(r, r) = Matrix::Identity(r, r);
    return out;
  };
  return aug;
}

/// Slack-augmented dynamics. The augmented state is packed as
/// x-part (x, s) and dual part (lambda_h, lambda_q); the update is
/// field_general on the augmented problem, which expands to
///
///   xdot        = -x + prox_{gamma g}(x - gamma (grad f + Dh^T l_h + Dq^T l_q))
///   sdot        = -s + ReLU(s - gamma lambda_q)
///   lambda_hdot = kp Dh(x) xdot + ki h(x)
///   lambda_qdot = kp (Dq(x) xdot + sdot) + ki (q(x) + s)
inline FieldEvaluation field_slack(const State& z_aug, const CompositeProblem& prob,
                                   const InequalityConstraint& ineq,
                                   const SolverParams& params) {
  const CompositeProblem aug = make_slack_problem(prob, ineq);
  return field_general(z_aug, aug, params);
}

struct StationarityResidual {
  double r_fix = 0.0;   // || x - prox_{gamma g}(x - gamma (grad f + Dh^T lambda)) ||
  double r_feas = 0.0;  // || h(x) ||
};

/// Both components vanish exactly at the stationary points of the problem
/// (for single-valued prox), independently of gamma > 0.
inline StationarityResidual stationarity_residual(const State& z,
                                                  const CompositeProblem& prob,
                                                  double gamma) {
  if (!(gamma > 0.0))
    throw std::invalid_argument("stationarity_residual: gamma must be > 0");
  const SmoothEval smooth = prob.eval_smooth(z.x);
  const ConstraintEval con = prob.eval_constraint(z.x);
  const Vector prox_point = prob.eval_prox(
      z.x - gamma * (smooth.gradient + con.jacobian.transpose() * z.lambda), gamma);
  return {(z.x - prox_point).norm(), con.value.norm()};
}

// ---- adapters for the integrators ----

using FieldFn = std::function<FieldEvaluation(const State&)>;
using ResidualFn = std::function<double(const State&)>;

inline FieldFn general_field_fn(const CompositeProblem& prob,
                                const SolverParams& params) {
  return [prob, params](const State& z) { return field_general(z, prob, params); };
}

inline FieldFn affine_field_fn(const CompositeProblem& prob,
                               const AffineConstraint& con,
                               const SolverParams& params) {
  return [prob, con, params](const State& z) {
    return field_affine(z, prob, con, params);
  };
}

inline ResidualFn constraint_residual_fn(const CompositeProblem& prob) {
  return [prob](const State& z) { return prob.eval_constraint(z.x).value.norm(); };
}

}  // namespace pipgd
