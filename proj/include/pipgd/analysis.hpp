#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "pipgd/core.hpp"
#include "pipgd/dynamics.hpp"
#include "pipgd/eig.hpp"
#include "pipgd/rng.hpp"

namespace pipgd {

/// Weighted logarithmic norm mu_P(A) = min { b : P A + A^T P <= 2 b P } for
/// symmetric positive-definite P: the largest generalized eigenvalue of the
/// pencil ((P A + A^T P)/2, P), computed by Cholesky reduction to a standard
/// symmetric eigenproblem.
inline double weighted_lognorm(const Matrix& a, const Matrix& p) {
  if (a.rows() != a.cols() || p.rows() != p.cols() || a.rows() != p.rows())
    throw std::invalid_argument("weighted_lognorm: dimension mismatch");
  if ((p - p.transpose()).cwiseAbs().maxCoeff() >
      1e-12 * std::max(1.0, p.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("weighted_lognorm: P must be symmetric");
  Eigen::LLT<Matrix> llt(p);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("weighted_lognorm: P must be positive definite");
  const Matrix s = 0.5 * (p * a + a.transpose() * p);
  // M = L^{-1} S L^{-T}
  Matrix y = llt.matrixL().solve(s);
  Matrix m = llt.matrixL().solve(y.transpose()).transpose();
  m = 0.5 * (m + m.transpose());
  const Vector ev = symmetric_eigenvalues(m);
  return ev[ev.size() - 1];
}

/// Outcome of checking the gain conditions under which the affine closed
/// loop is nonexpansive in || . ||_P. All margins are signed (negative means
/// violated); `certified()` requires every condition to hold.
struct GainCertificate {
  bool gamma_ok = false;
  double gamma_margin = 0.0;  // 1/L - gamma
  double p_lower = 0.0;       // max(kp L / 3, kp (1 - 2 gamma rho) / gamma)
  double p_upper = 0.0;       // kp / gamma
  bool p_ok = false;
  double p_margin_lower = 0.0;  // p - p_lower
  double p_margin_upper = 0.0;  // p_upper - p
  bool kp_eq_ki = false;
  double rho = 0.0;
  double L = 0.0;

  bool certified() const { return gamma_ok && p_ok && kp_eq_ki; }
};

/// Evaluate the nonexpansiveness conditions for a rho-strongly-convex,
/// L-smooth objective: kp = ki, gamma in (0, 1/L], and metric weight p inside
/// the admissible interval [p_lower, p_upper]. Violations are reported, not
/// thrown.
inline GainCertificate validate_gain_conditions(double rho, double L,
                                                const SolverParams& params) {
  if (!(rho > 0.0) || !(L >= rho))
    throw std::invalid_argument("validate_gain_conditions: need 0 < rho <= L");
  GainCertificate cert;
  cert.rho = rho;
  cert.L = L;
  const double kp = params.kp, ki = params.ki, gamma = params.gamma;
  const double p = params.p_weight;

  cert.kp_eq_ki = std::abs(kp - ki) <= 1e-12 * std::max(std::abs(kp), std::abs(ki));
  cert.gamma_margin = 1.0 / L - gamma;
  cert.gamma_ok = gamma > 0.0 && cert.gamma_margin >= -1e-12 / L;

  cert.p_lower = std::max(kp * L / 3.0, kp * (1.0 - 2.0 * gamma * rho) / gamma);
  cert.p_upper = kp / gamma;
  cert.p_margin_lower = p - cert.p_lower;
  cert.p_margin_upper = cert.p_upper - p;
  const double slack = 1e-12 * std::max({1.0, std::abs(cert.p_lower),
                                         std::abs(cert.p_upper), std::abs(p)});
  cert.p_ok = cert.p_margin_lower >= -slack && cert.p_margin_upper >= -slack;
  return cert;
}

struct JacobianResult {
  Matrix matrix;
  bool hessian_from_fd = false;  // curvature came from finite differences
};

namespace detail {

inline Matrix fd_hessian(const CompositeProblem& prob, const Vector& x,
                         double h = 1e-6) {
  const Index n = prob.n;
  Matrix b(n, n);
  Vector e = Vector::Zero(n);
  for (Index j = 0; j < n; ++j) {
    e[j] = h;
    const Vector gp = prob.eval_smooth(x + e).gradient;
    const Vector gm = prob.eval_smooth(x - e).gradient;
    b.col(j) = (gp - gm) / (2.0 * h);
    e[j] = 0.0;
  }
  return 0.5 * (b + b.transpose());
}

}  // namespace detail

/// Jacobian of the affine closed-loop field at z, with the prox generalized
/// derivative modeled by the diagonal matrix G = diag(g_diag):
///
///   [ -I + G (I - gamma B)                     -gamma G A^T        ]
///   [ (ki - kp) A + kp A G (I - gamma B)       -gamma kp A G A^T   ]
///
/// where B is the Hessian of f at x (finite differences of the gradient when
/// no Hessian evaluator is present, flagged in the result).
inline JacobianResult field_jacobian(const State& z, const CompositeProblem& prob,
                                     const AffineConstraint& con,
                                     const SolverParams& params,
                                     const Vector& g_diag) {
  const Index n = prob.n;
  const Index m = con.A.rows();
  if (z.n() != n || z.m() != m || g_diag.size() != n)
    throw std::invalid_argument("field_jacobian: dimension mismatch");
  if (g_diag.minCoeff() < 0.0 || g_diag.maxCoeff() > 1.0)
    throw std::invalid_argument("field_jacobian: g_diag entries must lie in [0,1]");

  JacobianResult result;
  Matrix b;
  if (prob.hessian) {
    b = prob.hessian(z.x);
  } else {
    b = detail::fd_hessian(prob, z.x);
    result.hessian_from_fd = true;
  }
  const double gamma = params.gamma;
  const Matrix g = g_diag.asDiagonal();
  const Matrix core = g * (Matrix::Identity(n, n) - gamma * b);

  result.matrix.resize(n + m, n + m);
  result.matrix.topLeftCorner(n, n) = -Matrix::Identity(n, n) + core;
  result.matrix.topRightCorner(n, m) = -gamma * g * con.A.transpose();
  result.matrix.bottomLeftCorner(m, n) =
      (params.ki - params.kp) * con.A + params.kp * con.A * core;
  result.matrix.bottomRightCorner(m, m) =
      -gamma * params.kp * con.A * g * con.A.transpose();
  return result;
}

/// Symmetric matrix whose positive semidefiniteness certifies mu_P <= 0 for
/// the affine closed loop, given curvature bounds B and prox slopes g:
///
///   Q11 = 2 p (I - G) + p gamma (B G + G B)
///   Q12 = (kp - ki) I + ((gamma p - kp) I + gamma kp B) G
///   Q22 = 2 gamma kp G
inline Matrix weak_contraction_lmi(const Matrix& b, const Vector& g_diag,
                                   const SolverParams& params, double p_weight) {
  const Index n = b.rows();
  if (b.cols() != n || g_diag.size() != n)
    throw std::invalid_argument("weak_contraction_lmi: dimension mismatch");
  const Matrix g = g_diag.asDiagonal();
  const Matrix eye = Matrix::Identity(n, n);
  const double gamma = params.gamma, kp = params.kp, ki = params.ki;
  Matrix q(2 * n, 2 * n);
  q.topLeftCorner(n, n) =
      2.0 * p_weight * (eye - g) + p_weight * gamma * (b * g + g * b);
  q.topRightCorner(n, n) =
      (kp - ki) * eye + ((gamma * p_weight - kp) * eye + gamma * kp * b) * g;
  q.bottomLeftCorner(n, n) = q.topRightCorner(n, n).transpose();
  q.bottomRightCorner(n, n) = 2.0 * gamma * kp * g;
  return q;
}

/// Sample random states and random {0,1} prox slopes, assemble the field
/// Jacobian at each, and return the largest weighted lognorm found. For
/// certified parameters this must be <= 0 up to eigensolver noise.
inline double weak_contraction_spot_check(const CompositeProblem& prob,
                                          const AffineConstraint& con,
                                          const SolverParams& params,
                                          const BlockMetric& metric,
                                          int num_samples, Rng& rng) {
  const Matrix p = metric.matrix();
  double worst = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < num_samples; ++s) {
    State z(rng.normal_vector(prob.n), rng.normal_vector(con.A.rows()));
    Vector g(prob.n);
    for (Index i = 0; i < prob.n; ++i) g[i] = rng.uniform() < 0.5 ? 0.0 : 1.0;
    const JacobianResult jac = field_jacobian(z, prob, con, params, g);
    worst = std::max(worst, weighted_lognorm(jac.matrix, p));
  }
  return worst;
}

/// Spectral abscissa of J; negative means Hurwitz.
inline double hurwitz_check(const Matrix& j) { return spectral_abscissa(j); }

/// Check the matrix inequality
///   gamma (diag(g) X + X diag(g)) + 2 (I - diag(g)) > (3/2) gamma X
/// for symmetric X with x_min I <= X <= x_max I, x_min > 0, gamma <= 1/x_max
/// and slopes g in [0,1]^n. Preconditions are enforced; the return value is
/// the truth of the strict inequality (minimum eigenvalue of LHS - RHS > 0).
inline bool curvature_slope_inequality_holds(const Matrix& x, double gamma,
                                             const Vector& g) {
  const Index n = x.rows();
  if (x.cols() != n || g.size() != n)
    throw std::invalid_argument("curvature_slope_inequality: dimension mismatch");
  if ((x - x.transpose()).cwiseAbs().maxCoeff() >
      1e-10 * std::max(1.0, x.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("curvature_slope_inequality: X must be symmetric");
  if (g.minCoeff() < 0.0 || g.maxCoeff() > 1.0)
    throw std::invalid_argument("curvature_slope_inequality: g must lie in [0,1]^n");
  const Vector ev = symmetric_eigenvalues(x);
  const double x_min = ev[0];
  const double x_max = ev[ev.size() - 1];
  if (!(x_min > 0.0))
    throw std::invalid_argument("curvature_slope_inequality: X must be positive definite");
  if (!(gamma > 0.0) || gamma > 1.0 / x_max + 1e-15)
    throw std::invalid_argument("curvature_slope_inequality: need 0 < gamma <= 1/x_max");
  const Matrix d = g.asDiagonal();
  const Matrix lhs = gamma * (d * x + x * d) + 2.0 * (Matrix::Identity(n, n) - d);
  const Matrix diff = lhs - 1.5 * gamma * x;
  return symmetric_eigenvalues(0.5 * (diff + diff.transpose()))[0] > 0.0;
}

/// Piecewise linear-then-exponential upper envelope of a distance curve:
/// value q - c_lin t up to t_cross, then exponential decay at rate c_exp.
struct EnvelopeFit {
  double q = 0.0;
  double c_lin = 0.0;
  double t_cross = 0.0;
  double c_exp = 0.0;
  double max_violation = 0.0;  // of the envelope with q inflated by 1e-9
};

inline double envelope_value(const EnvelopeFit& fit, double t) {
  if (t <= fit.t_cross) return fit.q - fit.c_lin * t;
  return (fit.q - fit.c_lin * fit.t_cross) * std::exp(-fit.c_exp * (t - fit.t_cross));
}

namespace detail {

inline double ls_slope(const std::vector<double>& t, const std::vector<double>& y,
                       std::size_t first, std::size_t last) {
  double tm = 0.0, ym = 0.0;
  const double count = double(last - first + 1);
  for (std::size_t i = first; i <= last; ++i) {
    tm += t[i];
    ym += y[i];
  }
  tm /= count;
  ym /= count;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = first; i <= last; ++i) {
    sxy += (t[i] - tm) * (y[i] - ym);
    sxx += (t[i] - tm) * (t[i] - tm);
  }
  return sxy / sxx;
}

}  // namespace detail

/// Fit a linear-exponential envelope to a sampled distance-to-equilibrium
/// curve.
///
/// The exponential rate comes from least squares on log-distance over the
/// final 20% of samples. The crossover time is the earliest sample after
/// which the local log-slope stays within 5% of that rate. The linear
/// segment is the steepest line anchored at the initial distance that
/// dominates the curve up to the crossover; the intercept is then lifted by
/// the minimal amount that makes the exponential tail dominate as well, so a
/// successful fit is a genuine upper bound. The reported violation is
/// measured against the envelope with q inflated by 1e-9.
inline EnvelopeFit envelope_fit(const std::vector<double>& times,
                                const std::vector<double>& distances) {
  const std::size_t n = times.size();
  if (distances.size() != n)
    throw std::invalid_argument("envelope_fit: size mismatch");
  if (n < 10) throw std::invalid_argument("envelope_fit: need at least 10 samples");
  std::vector<double> logd(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(distances[i] > 0.0))
      throw std::invalid_argument("envelope_fit: distances must be positive");
    logd[i] = std::log(distances[i]);
  }

  const std::size_t tail_start = static_cast<std::size_t>(0.8 * double(n));
  const double tail_slope = detail::ls_slope(times, logd, tail_start, n - 1);
  EnvelopeFit fit;
  fit.c_exp = -tail_slope;
  if (!(fit.c_exp > 0.0))
    throw std::runtime_error("envelope_fit: non-monotone tail, not converged");

  // earliest sample after which the local slope stays within 5% of the tail
  const std::size_t w = std::max<std::size_t>(2, n / 50);
  const std::size_t last_window = n - w - 1;
  const double slope_tol = 0.05 * std::abs(tail_slope);
  std::size_t kstar = last_window + 1;
  for (std::size_t i = last_window + 1; i-- > 0;) {
    if (std::abs(detail::ls_slope(times, logd, i, i + w) - tail_slope) <= slope_tol)
      kstar = i;
    else
      break;
  }
  fit.t_cross = (kstar <= last_window) ? times[kstar] : times[last_window];

  fit.q = distances[0];
  fit.c_lin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < n && times[i] <= fit.t_cross; ++i)
    fit.c_lin = std::min(fit.c_lin, (fit.q - distances[i]) / times[i]);
  if (!std::isfinite(fit.c_lin)) fit.c_lin = 0.0;

  // lift the intercept until the exponential tail dominates
  double anchor = fit.q - fit.c_lin * fit.t_cross;
  double required = anchor;
  for (std::size_t i = 0; i < n; ++i) {
    if (times[i] > fit.t_cross)
      required = std::max(
          required, distances[i] * std::exp(fit.c_exp * (times[i] - fit.t_cross)));
  }
  fit.q += required - anchor;

  EnvelopeFit inflated = fit;
  inflated.q += 1e-9;
  double violation = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i)
    violation = std::max(violation, distances[i] - envelope_value(inflated, times[i]));
  fit.max_violation = violation;
  return fit;
}

}  // namespace pipgd
