#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "pipgd/core.hpp"
#include "pipgd/dynamics.hpp"
#include "pipgd/prox.hpp"
#include "pipgd/rng.hpp"

namespace pipgd {

/// Floor applied inside the entropy gradient: the exact flow preserves the
/// open orthant, but the discrete nonnegative projection can reach p_i = 0,
/// so log p is evaluated at max(p_i, kEntropyClamp) to keep the field finite
/// while preserving the projection floor behavior.
constexpr double kEntropyClamp = 1e-12;

/// Discrete entropic transport instance together with its vectorized
/// encoding. The plan matrix P (n x m) is stored column-major in p, i.e.
/// p[j*n + i] = P(i, j); the marginal constraints then read
///   [ 1_m^T (x) I_n ]            row sums   = a
///   [ I_m   (x) 1_n^T ]  p  =    column sums = b
/// One of those n+m rows is redundant, and the last one is dropped to get
/// the full-row-rank pair (A_tilde, d_tilde).
struct OTInstance {
  Index n = 0;
  Index m = 0;
  Matrix C;       // n x m nonnegative cost
  Vector a;       // n-simplex weights
  Vector b;       // m-simplex weights
  double eps = 0.0;
  Vector c;        // vec(C), column-major
  Vector d;        // (a, b)
  Matrix A_tilde;  // (n+m-1) x nm
  Vector d_tilde;  // (n+m-1)
};

/// Full (n+m) x nm marginal constraint matrix for the column-major plan
/// vectorization.
inline Matrix ot_full_constraint_matrix(Index n, Index m) {
  Matrix a = Matrix::Zero(n + m, n * m);
  for (Index j = 0; j < m; ++j) {
    for (Index i = 0; i < n; ++i) {
      a(i, j * n + i) = 1.0;      // row sum i
      a(n + j, j * n + i) = 1.0;  // column sum j
    }
  }
  return a;
}

inline OTInstance make_ot_instance(const Matrix& C, const Vector& a,
                                   const Vector& b, double eps) {
  const Index n = C.rows(), m = C.cols();
  if (a.size() != n || b.size() != m)
    throw std::invalid_argument("make_ot_instance: marginal sizes must match C");
  if (!(eps > 0.0)) throw std::invalid_argument("make_ot_instance: eps must be > 0");
  if (C.minCoeff() < 0.0)
    throw std::invalid_argument("make_ot_instance: cost must be nonnegative");
  if (a.minCoeff() < 0.0 || b.minCoeff() < 0.0 ||
      std::abs(a.sum() - 1.0) > 1e-10 || std::abs(b.sum() - 1.0) > 1e-10)
    throw std::invalid_argument("make_ot_instance: marginals must lie on the simplex");

  OTInstance inst;
  inst.n = n;
  inst.m = m;
  inst.C = C;
  inst.a = a;
  inst.b = b;
  inst.eps = eps;
  inst.c = Eigen::Map<const Vector>(C.data(), n * m);  // column-major vec
  inst.d.resize(n + m);
  inst.d << a, b;
  const Matrix full = ot_full_constraint_matrix(n, m);
  inst.A_tilde = full.topRows(n + m - 1);
  inst.d_tilde = inst.d.head(n + m - 1);
  return inst;
}

/// Random instance: source and target points uniform in the unit square,
/// Euclidean cost, uniform marginals.
inline OTInstance random_ot_instance(Index n, Index m, double eps,
                                     std::uint64_t seed) {
  Rng rng(seed);
  Matrix xs(n, 2), ys(m, 2);
  for (Index i = 0; i < n; ++i)
    for (Index k = 0; k < 2; ++k) xs(i, k) = rng.uniform();
  for (Index j = 0; j < m; ++j)
    for (Index k = 0; k < 2; ++k) ys(j, k) = rng.uniform();
  Matrix cost(n, m);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < m; ++j) cost(i, j) = (xs.row(i) - ys.row(j)).norm();
  return make_ot_instance(cost, Vector::Constant(n, 1.0 / double(n)),
                          Vector::Constant(m, 1.0 / double(m)), eps);
}

/// Entropic objective gradient c + eps log p + eps, with the log clamped at
/// kEntropyClamp.
inline Vector ot_gradient(const Vector& p, const OTInstance& inst) {
  Vector g(p.size());
  for (Index i = 0; i < p.size(); ++i)
    g[i] = inst.c[i] + inst.eps * std::log(std::max(p[i], kEntropyClamp)) + inst.eps;
  return g;
}

/// Closed-loop field for the vectorized transport problem:
///   pdot      = -p + ReLU(p - gamma (eps log p + eps + c + A~^T lambda))
///   lambdadot = (ki - kp) A~ p + kp A~ ReLU(...) - ki d~.
/// Rejects plans with components below -1e-12 (orthant invariance violation).
inline FieldEvaluation ot_field(const Vector& p, const Vector& lambda,
                                const OTInstance& inst, const SolverParams& params) {
  if (p.size() != inst.n * inst.m || lambda.size() != inst.n + inst.m - 1)
    throw std::invalid_argument("ot_field: dimension mismatch");
  if (p.minCoeff() < -1e-12)
    throw std::invalid_argument("ot_field: plan has negative components beyond -1e-12");
  FieldEvaluation out;
  out.prox_point = nonneg_prox(
      p - params.gamma * (ot_gradient(p, inst) + inst.A_tilde.transpose() * lambda));
  out.dx = -p + out.prox_point;
  out.dlambda = (params.ki - params.kp) * (inst.A_tilde * p) +
                params.kp * (inst.A_tilde * out.prox_point) -
                params.ki * inst.d_tilde;
  return out;
}

/// The same problem packaged as a generic composite instance (entropic
/// objective, nonnegativity prox, reduced affine constraint). Used to
/// cross-check ot_field against the generic affine field.
inline CompositeProblem ot_problem(const OTInstance& inst) {
  CompositeProblem prob;
  prob.n = inst.n * inst.m;
  prob.m = inst.n + inst.m - 1;
  prob.smooth = [inst](const Vector& p) {
    SmoothEval s;
    s.value = p.dot(inst.c);
    for (Index i = 0; i < p.size(); ++i)
      if (p[i] > 0.0) s.value += inst.eps * p[i] * std::log(p[i]);
    s.gradient = ot_gradient(p, inst);
    return s;
  };
  prob.prox = [](const Vector& v, double) { return nonneg_prox(v); };
  prob.constraint = [inst](const Vector& p) {
    return ConstraintEval{inst.A_tilde * p - inst.d_tilde, inst.A_tilde};
  };
  prob.hessian = [inst](const Vector& p) {
    Vector diag(p.size());
    for (Index i = 0; i < p.size(); ++i)
      diag[i] = inst.eps / std::max(p[i], kEntropyClamp);
    return Matrix(diag.asDiagonal());
  };
  return prob;
}

enum class SinkhornStatus { kConverged, kStagnated, kNonFinite };

inline const char* to_string(SinkhornStatus s) {
  switch (s) {
    case SinkhornStatus::kConverged: return "converged";
    case SinkhornStatus::kStagnated: return "stagnated";
    case SinkhornStatus::kNonFinite: return "nonfinite";
  }
  return "unknown";
}

struct SinkhornResult {
  Matrix plan;            // n x m coupling diag(u) K diag(v)
  Vector u, v;            // scaling vectors
  SinkhornStatus status = SinkhornStatus::kStagnated;
  int iterations = 0;
  double marginal_error = std::numeric_limits<double>::infinity();
};

/// Classical scaling iterations on the kernel K = exp(-C/eps):
///   u <- a ./ (K v),  v <- b ./ (K^T u),  P = diag(u) K diag(v).
/// Convergence is the l1 marginal criterion ||P 1 - a||_1 + ||P^T 1 - b||_1
/// <= tol. Small-eps breakdown (the kernel underflows and the scalings blow
/// up) is an experiment outcome, so it is reported through the status, never
/// thrown.
inline SinkhornResult sinkhorn(const OTInstance& inst, int max_iter = 20000,
                               double tol = 1e-9) {
  const Matrix kernel = (-inst.C / inst.eps).array().exp();
  SinkhornResult result;
  result.u = Vector::Ones(inst.n);
  result.v = Vector::Ones(inst.m);
  for (int it = 1; it <= max_iter; ++it) {
    result.u = inst.a.cwiseQuotient(kernel * result.v);
    result.v = inst.b.cwiseQuotient(kernel.transpose() * result.u);
    result.iterations = it;
    if (!result.u.allFinite() || !result.v.allFinite()) {
      result.status = SinkhornStatus::kNonFinite;
      return result;
    }
    result.plan = result.u.asDiagonal() * kernel * result.v.asDiagonal();
    if (!result.plan.allFinite()) {
      result.status = SinkhornStatus::kNonFinite;
      return result;
    }
    result.marginal_error = (result.plan.rowwise().sum() - inst.a).lpNorm<1>() +
                            (result.plan.colwise().sum().transpose() - inst.b).lpNorm<1>();
    if (result.marginal_error <= tol) {
      result.status = SinkhornStatus::kConverged;
      return result;
    }
  }
  result.status = SinkhornStatus::kStagnated;
  return result;
}

/// Multipliers for the reduced constraint system recovered from converged
/// Sinkhorn scalings: the duals are -eps log u - eps and -eps log v up to one
/// shared constant, fixed by zeroing the last coordinate before dropping it.
inline Vector sinkhorn_duals(const SinkhornResult& result, const OTInstance& inst) {
  if (result.status != SinkhornStatus::kConverged)
    throw std::invalid_argument("sinkhorn_duals: requires a converged result");
  const double shift = inst.eps * std::log(result.v[inst.m - 1]);
  Vector lambda(inst.n + inst.m);
  for (Index i = 0; i < inst.n; ++i)
    lambda[i] = -inst.eps * std::log(result.u[i]) - inst.eps - shift;
  for (Index j = 0; j < inst.m; ++j)
    lambda[inst.n + j] = -inst.eps * std::log(result.v[j]) + shift;
  return lambda.head(inst.n + inst.m - 1);
}

/// Linear cost plus entropy, with the 0 log 0 = 0 convention.
inline double transport_cost(const Vector& p, const OTInstance& inst) {
  if (p.size() != inst.n * inst.m)
    throw std::invalid_argument("transport_cost: dimension mismatch");
  double cost = 0.0;
  for (Index i = 0; i < p.size(); ++i) {
    cost += p[i] * inst.c[i];
    if (p[i] > 0.0) cost += inst.eps * p[i] * std::log(p[i]);
  }
  return cost;
}

inline double transport_cost(const Matrix& plan, const OTInstance& inst) {
  if (plan.rows() != inst.n || plan.cols() != inst.m)
    throw std::invalid_argument("transport_cost: plan shape mismatch");
  return transport_cost(Vector(Eigen::Map<const Vector>(plan.data(), plan.size())),
                        inst);
}

}  // namespace pipgd
