// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one PASS/FAIL line per criterion. Exits nonzero if any
// criterion fails.

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "pipgd/pipgd.hpp"

namespace {

using namespace pipgd;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Criterion {
  int id;
  bool pass;
  std::string detail;
};

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3e", v);
  return buf;
}

SolverParams paper51_params(const LassoInstance& inst) {
  SolverParams params;
  params.gamma = std::min(1.0 / inst.L, 4.0 * inst.rho / (inst.L * inst.L) - 1e-4);
  params.kp = params.ki = 20.0;
  params.p_weight = params.kp / params.gamma;
  params.dt = 0.01;
  params.t_end = 20.0;
  return params;
}

State seeded_state(std::uint64_t seed, Index n, Index m) {
  Rng rng(seed);
  return State(rng.normal_vector(n), rng.normal_vector(m));
}

// criterion 1: terminal residual and oracle agreement at the stated
// parameters (n=10, m=5, alpha=1, dt=0.01, T=20, kp=ki=20,
// gamma=min(1/L, 4 rho/L^2 - 1e-4), p=kp/gamma) across 20 seeds
Criterion criterion_1() {
  const auto start = Clock::now();
  double worst_residual = 0.0, worst_dist = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const LassoInstance inst = make_constrained_lasso(10, 5, 1.0, seed);
    const SolverParams params = paper51_params(inst);
    const CompositeProblem prob = inst.as_problem();
    const AffineConstraint con = inst.affine_constraint();
    const OracleSolution sol = admm_oracle(inst, 100000, 1e-11);
    const Trajectory traj = simulate(
        affine_field_fn(prob, con, params), constraint_residual_fn(prob),
        params.metric(10, 5), seeded_state(1000 + seed, 10, 5), params,
        Method::kEuler, 200);
    if (traj.aborted) return {1, false, "trajectory aborted: " + traj.abort_reason};
    worst_residual = std::max(worst_residual, traj.residuals.back());
    worst_dist = std::max(worst_dist, (traj.back().x - sol.x).norm());
  }
  const double elapsed = seconds_since(start);
  const bool pass = worst_residual < 1e-6 && worst_dist < 1e-4 && elapsed < 10.0;
  return {1, pass,
          "max ||Ax_T - b|| = " + num(worst_residual) + " (tol 1e-6), max ||x_T - x*|| = " +
              num(worst_dist) + " (tol 1e-4), runtime " + num(elapsed) + " s (< 10 s)"};
}

// criterion 2: pairwise trajectory distances nonincreasing in ||.||_P
Criterion criterion_2() {
  const LassoInstance inst = make_constrained_lasso(10, 5, 1.0, 1);
  const SolverParams params = paper51_params(inst);
  if (!validate_gain_conditions(inst.rho, inst.L, params).certified())
    return {2, false, "parameters unexpectedly uncertified"};
  const CompositeProblem prob = inst.as_problem();
  const AffineConstraint con = inst.affine_constraint();
  const BlockMetric metric = params.metric(10, 5);
  const FieldFn field = affine_field_fn(prob, con, params);
  const ResidualFn residual = constraint_residual_fn(prob);

  double worst_increase = -1e300;
  for (std::uint64_t pair = 0; pair < 10; ++pair) {
    const Trajectory t1 = simulate(field, residual, metric,
                                   seeded_state(2000 + 2 * pair, 10, 5), params,
                                   Method::kEuler, 1);
    const Trajectory t2 = simulate(field, residual, metric,
                                   seeded_state(2001 + 2 * pair, 10, 5), params,
                                   Method::kEuler, 1);
    if (t1.aborted || t2.aborted) return {2, false, "trajectory aborted"};
    for (std::size_t k = 0; k + 1 < t1.size(); ++k) {
      const double d0 = metric_distance(t1.states[k], t2.states[k], metric);
      const double d1 = metric_distance(t1.states[k + 1], t2.states[k + 1], metric);
      worst_increase = std::max(worst_increase, d1 - d0);
    }
  }
  return {2, worst_increase <= 1e-6,
          "worst per-sample distance increase = " + num(worst_increase) +
              " (slack 1e-6) over 10 pairs"};
}

// criterion 3: sampled Jacobian lognorms nonpositive, agreeing with the
// direct matrix-inequality certificate at full slopes
Criterion criterion_3() {
  const LassoInstance inst = make_constrained_lasso(10, 5, 1.0, 1);
  const SolverParams params = paper51_params(inst);
  Rng rng(77);
  const double worst = weak_contraction_spot_check(
      inst.as_problem(), inst.affine_constraint(), params, params.metric(10, 5),
      200, rng);
  const Matrix q =
      weak_contraction_lmi(inst.W, Vector::Ones(10), params, params.p_weight);
  const double qmin = symmetric_eigenvalues(0.5 * (q + q.transpose()))[0];
  const bool spot_ok = worst <= 1e-8;
  const bool lmi_ok = qmin >= -1e-10;
  return {3, spot_ok && lmi_ok,
          "max mu_P over 200 samples = " + num(worst) +
              " (tol 1e-8), certificate min eigenvalue = " + num(qmin) +
              " (tol -1e-10), signs agree"};
}

// criterion 4: local exponential stability at the oracle equilibrium
Criterion criterion_4() {
  const LassoInstance inst = make_constrained_lasso(10, 5, 1.0, 1);
  const SolverParams params = paper51_params(inst);
  const OracleSolution sol = admm_oracle(inst, 100000, 1e-11);
  const State zstar(sol.x, sol.lambda);
  const CompositeProblem prob = inst.as_problem();
  const AffineConstraint con = inst.affine_constraint();

  const double abscissa_full =
      hurwitz_check(field_jacobian(zstar, prob, con, params, Vector::Ones(10)).matrix);

  // strict-complementarity slopes at the active set, reported alongside
  const Vector arg =
      sol.x - params.gamma * (inst.W * sol.x + inst.A.transpose() * sol.lambda);
  const Vector g_active = soft_threshold_slope(arg, params.gamma * inst.alpha);
  const double abscissa_active =
      hurwitz_check(field_jacobian(zstar, prob, con, params, g_active).matrix);

  return {4, abscissa_full < -1e-6,
          "alpha(DF) at G=I: " + num(abscissa_full) +
              " (tol -1e-6); at active-set slopes: " + num(abscissa_active)};
}

// criterion 5: every seeded distance curve dominated by its fitted
// linear-exponential envelope, plus parameter recovery on synthetic input
Criterion criterion_5() {
  const LassoInstance inst = make_constrained_lasso(10, 5, 1.0, 1);
  SolverParams params = paper51_params(inst);
  params.t_end = 40.0;  // long enough for a clean exponential tail
  const CompositeProblem prob = inst.as_problem();
  const AffineConstraint con = inst.affine_constraint();
  const BlockMetric metric = params.metric(10, 5);
  const OracleSolution sol = admm_oracle(inst, 100000, 1e-12);
  const State zstar(sol.x, sol.lambda);
  const FieldFn field = affine_field_fn(prob, con, params);
  const ResidualFn residual = constraint_residual_fn(prob);

  int dominated = 0;
  double worst_violation = -1e300;
  for (std::uint64_t trial = 0; trial < 150; ++trial) {
    const Trajectory traj = simulate(field, residual, metric,
                                     seeded_state(3000 + trial, 10, 5), params,
                                     Method::kEuler, 10);
    if (traj.aborted) return {5, false, "trajectory aborted"};
    std::vector<double> dist(traj.size());
    for (std::size_t k = 0; k < traj.size(); ++k)
      dist[k] = metric_distance(traj.states[k], zstar, metric);
    try {
      const EnvelopeFit fit = envelope_fit(traj.times, dist);
      worst_violation = std::max(worst_violation, fit.max_violation);
      if (fit.max_violation <= 1e-9) ++dominated;
    } catch (const std::exception& e) {
      return {5, false, std::string("envelope fit failed: ") + e.what()};
    }
  }

  // synthetic recovery within 5%
  const double q = 5.0, c_lin = 1.0, t_cross = 3.0, c_exp = 2.0;
  std::vector<double> ts, ds;
  for (int i = 0; i <= 1200; ++i) {
    const double t = 0.005 * i;
    ts.push_back(t);
    ds.push_back(t <= t_cross
                     ? q - c_lin * t
                     : (q - c_lin * t_cross) * std::exp(-c_exp * (t - t_cross)));
  }
  const EnvelopeFit syn = envelope_fit(ts, ds);
  const bool recovered = std::abs(syn.q - q) <= 0.05 * q &&
                         std::abs(syn.c_lin - c_lin) <= 0.05 * c_lin &&
                         std::abs(syn.t_cross - t_cross) <= 0.05 * t_cross &&
                         std::abs(syn.c_exp - c_exp) <= 0.05 * c_exp;

  const bool pass = dominated == 150 && recovered;
  return {5, pass,
          std::to_string(dominated) + "/150 curves dominated (worst violation " +
              num(worst_violation) + ", tol 1e-9); synthetic recovery " +
              (recovered ? "within 5%" : "FAILED")};
}

// criterion 6: nonlinear-constraint run at the stated parameters
// (alpha=0.5, gamma=0.5, ki=10, kp=15, T=5, RK4 at dt=1e-3) plus the
// six-pair gain sweep
Criterion criterion_6() {
  const CompositeProblem prob = nonlinear_lasso_instance();
  SolverParams params;
  params.gamma = 0.5;
  params.kp = 15.0;
  params.ki = 10.0;
  params.p_weight = 1.0;
  params.dt = 1e-3;
  params.t_end = 5.0;
  const BlockMetric metric = params.metric(3, 2);

  AugLagOptions al_opts;
  al_opts.gamma = params.gamma;
  al_opts.tol = 1e-8;
  const OracleSolution sol = augmented_lagrangian_oracle(
      prob, (Vector(3) << 0.5, 0.5, 0.0).finished(), al_opts);
  const State zstar(sol.x, sol.lambda);
  const double oracle_cost = nonlinear_lasso_cost(sol.x);

  double worst_h = 0.0, worst_rfix = 0.0, worst_cost_gap = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Trajectory traj =
        simulate(general_field_fn(prob, params), constraint_residual_fn(prob),
                 metric, seeded_state(4000 + seed, 3, 2), params, Method::kRk4, 100);
    if (traj.aborted) return {6, false, "trajectory aborted"};
    const State terminal = traj.back();
    worst_h = std::max(worst_h,
                       prob.eval_constraint(terminal.x).value.cwiseAbs().maxCoeff());
    worst_rfix = std::max(
        worst_rfix, stationarity_residual(terminal, prob, params.gamma).r_fix);
    worst_cost_gap = std::max(
        worst_cost_gap, std::abs(nonlinear_lasso_cost(terminal.x) - oracle_cost));
  }

  // gain sweep: six pairs from (4,4) to (40,40), monotone tails
  const std::vector<std::pair<double, double>> pairs = {
      {4, 4}, {10, 10}, {15, 10}, {20, 20}, {30, 30}, {40, 40}};
  int monotone = 0;
  for (const auto& [kp, ki] : pairs) {
    SolverParams sweep = params;
    sweep.kp = kp;
    sweep.ki = ki;
    const Trajectory traj =
        simulate(general_field_fn(prob, sweep), constraint_residual_fn(prob), metric,
                 seeded_state(4242, 3, 2), sweep, Method::kRk4, 10);
    if (traj.aborted) return {6, false, "gain-sweep trajectory aborted"};
    std::vector<double> dist(traj.size());
    for (std::size_t k = 0; k < traj.size(); ++k)
      dist[k] = metric_distance(traj.states[k], zstar, metric);
    bool tail_ok = true;
    for (std::size_t k = dist.size() * 4 / 5; k + 1 < dist.size(); ++k)
      tail_ok = tail_ok && dist[k + 1] <= dist[k] + 1e-9;
    if (tail_ok) ++monotone;
  }

  const bool pass = worst_h < 1e-4 && worst_rfix < 1e-3 && worst_cost_gap < 1e-3 &&
                    monotone == 6;
  return {6, pass,
          "max ||h||_inf = " + num(worst_h) + " (tol 1e-4), max r_fix = " +
              num(worst_rfix) + " (tol 1e-3), max cost gap = " + num(worst_cost_gap) +
              " (tol 1e-3), monotone tails " + std::to_string(monotone) + "/6"};
}

// criterion 7: entropic transport at desk scale, moderate and small
// regularization
Criterion criterion_7() {
  const auto start = Clock::now();
  const Index n = 10, m = 10;

  // moderate regularization: flow and scaling baseline agree
  const OTInstance mild = random_ot_instance(n, m, 0.1, 3);
  const SinkhornResult sk_mild = sinkhorn(mild, 50000, 1e-9);
  if (sk_mild.status != SinkhornStatus::kConverged)
    return {7, false, "baseline failed to converge at eps = 0.1"};
  SolverParams params_mild;
  params_mild.gamma = 0.05;
  params_mild.kp = params_mild.ki = 20.0;
  params_mild.dt = 0.01;
  params_mild.t_end = 250.0;
  Vector p = Vector::Constant(n * m, 1.0 / double(n * m));
  Vector lambda = Vector::Zero(n + m - 1);
  long steps = std::lround(params_mild.t_end / params_mild.dt);
  for (long k = 0; k < steps; ++k) {
    const FieldEvaluation f = ot_field(p, lambda, mild, params_mild);
    p += params_mild.dt * f.dx;
    lambda += params_mild.dt * f.dlambda;
  }
  const double cost_flow = transport_cost(p, mild);
  const double cost_sk = transport_cost(sk_mild.plan, mild);
  const double rel_gap = std::abs(cost_flow - cost_sk) / std::abs(cost_sk);
  const Matrix plan_flow = Eigen::Map<const Matrix>(p.data(), n, m);
  const double marg_flow = (plan_flow.rowwise().sum() - mild.a).lpNorm<1>() +
                           (plan_flow.colwise().sum().transpose() - mild.b).lpNorm<1>();
  const bool mild_ok =
      rel_gap < 1e-3 && marg_flow < 1e-5 && sk_mild.marginal_error < 1e-5;

  // small regularization at the stated parameters: the flow stays feasible
  // while the scaling baseline breaks down
  const OTInstance sharp = random_ot_instance(n, m, 0.001, 3);
  SolverParams params_sharp;
  params_sharp.gamma = 0.01;
  params_sharp.kp = params_sharp.ki = 100.0;
  params_sharp.dt = 0.002;
  params_sharp.t_end = 400.0;
  p = Vector::Constant(n * m, 1.0 / double(n * m));
  lambda = Vector::Zero(n + m - 1);
  steps = std::lround(params_sharp.t_end / params_sharp.dt);
  for (long k = 0; k < steps; ++k) {
    const FieldEvaluation f = ot_field(p, lambda, sharp, params_sharp);
    p += params_sharp.dt * f.dx;
    lambda += params_sharp.dt * f.dlambda;
  }
  const double feas = (sharp.A_tilde * p - sharp.d_tilde).norm();
  const double mass_err = std::abs(p.sum() - 1.0);
  const SinkhornResult sk_sharp = sinkhorn(sharp, 20000, 1e-9);
  const bool sharp_ok = feas < 1e-5 && mass_err < 1e-6 &&
                        sk_sharp.status != SinkhornStatus::kConverged;
  const double elapsed = seconds_since(start);

  const bool pass = mild_ok && sharp_ok && elapsed < 60.0;
  return {7, pass,
          "eps=0.1: cost gap " + num(rel_gap) + " (tol 1e-3), marginals " +
              num(marg_flow) + "/" + num(sk_mild.marginal_error) +
              " (tol 1e-5); eps=0.001: ||A~p - d~|| = " + num(feas) +
              " (tol 1e-5), |sum p - 1| = " + num(mass_err) +
              " (tol 1e-6), baseline status = " + to_string(sk_sharp.status) +
              "; runtime " + num(elapsed) + " s (< 60 s)"};
}

// criterion 8: the property batteries
Criterion criterion_8() {
  std::string failures;

  // firm nonexpansiveness, 1000 random pairs per prox
  {
    Rng rng(81);
    const auto firm = [&](auto&& prox_fn, const char* name) {
      for (int rep = 0; rep < 1000; ++rep) {
        const Vector u = 2.0 * rng.normal_vector(7);
        const Vector v = 2.0 * rng.normal_vector(7);
        const Vector pu = prox_fn(u);
        const Vector pv = prox_fn(v);
        if ((pu - pv).dot(u - v) < (pu - pv).squaredNorm() - 1e-12) {
          failures += std::string(" firm-nonexpansiveness:") + name;
          return;
        }
      }
    };
    firm([](const Vector& v) { return soft_threshold(v, 0.4); }, "soft");
    firm([](const Vector& v) { return nonneg_prox(v); }, "relu");
    firm([](const Vector& v) { return identity_prox(v); }, "identity");
  }

  // soft-threshold resolvent subgradient identity
  {
    Rng rng(82);
    const double tau = 0.3;
    for (int rep = 0; rep < 1000; ++rep) {
      const Vector v = 2.0 * rng.normal_vector(5);
      const Vector w = soft_threshold(v, tau);
      const Vector sub = (v - w) / tau;
      for (Index i = 0; i < 5; ++i) {
        if (std::abs(sub[i]) > 1.0 + 1e-12 ||
            (w[i] != 0.0 && std::abs(sub[i] - (w[i] > 0 ? 1.0 : -1.0)) > 1e-12)) {
          failures += " resolvent-identity";
          rep = 1000;
          break;
        }
      }
    }
  }

  // finite-difference agreement for gradients and constraint Jacobians
  {
    const LassoInstance inst = make_constrained_lasso(8, 4, 1.0, 83);
    const CompositeProblem lasso = inst.as_problem();
    const CompositeProblem nonlinear = nonlinear_lasso_instance();
    Rng rng(84);
    const double h = 1e-6;
    bool ok = true;
    for (const CompositeProblem* prob : {&lasso, &nonlinear}) {
      for (int rep = 0; rep < 20 && ok; ++rep) {
        const Vector x = rng.normal_vector(prob->n);
        const SmoothEval s = prob->eval_smooth(x);
        const ConstraintEval c = prob->eval_constraint(x);
        for (Index j = 0; j < prob->n; ++j) {
          Vector e = Vector::Zero(prob->n);
          e[j] = h;
          const double fd_grad =
              (prob->eval_smooth(x + e).value - prob->eval_smooth(x - e).value) /
              (2 * h);
          if (std::abs(fd_grad - s.gradient[j]) >
              1e-5 * std::max(1.0, std::abs(s.gradient[j])))
            ok = false;
          const Vector fd_jac = (prob->eval_constraint(x + e).value -
                                 prob->eval_constraint(x - e).value) /
                                (2 * h);
          for (Index i = 0; i < prob->m; ++i)
            if (std::abs(fd_jac[i] - c.jacobian(i, j)) >
                1e-5 * std::max(1.0, std::abs(c.jacobian(i, j))))
              ok = false;
        }
      }
    }
    if (!ok) failures += " finite-difference-agreement";
  }

  // the affine field is the general field, componentwise to 1e-14
  {
    const LassoInstance inst = make_constrained_lasso(10, 5, 1.0, 85);
    const CompositeProblem prob = inst.as_problem();
    const AffineConstraint con = inst.affine_constraint();
    const SolverParams params = paper51_params(inst);
    Rng rng(86);
    for (int rep = 0; rep < 100; ++rep) {
      const State z(3.0 * rng.normal_vector(10), 3.0 * rng.normal_vector(5));
      const Vector fg = field_general(z, prob, params).dz();
      const Vector fa = field_affine(z, prob, con, params).dz();
      bool ok = true;
      for (Index i = 0; i < fg.size(); ++i)
        ok = ok && std::abs(fg[i] - fa[i]) <= 1e-14 * std::max(1.0, std::abs(fa[i]));
      if (!ok) {
        failures += " field-equivalence";
        break;
      }
    }
  }

  // randomized matrix-inequality battery, 500/500
  {
    Rng rng(87);
    int passes = 0;
    for (int rep = 0; rep < 500; ++rep) {
      const Index k = 2 + Index(rng.uniform() * 6);
      Matrix x = rng.normal_matrix(k, k);
      x = x * x.transpose() + (0.1 + rng.uniform()) * Matrix::Identity(k, k);
      const Vector ev = symmetric_eigenvalues(x);
      const double gamma = (0.05 + 0.95 * rng.uniform()) / ev[k - 1];
      Vector g(k);
      for (Index i = 0; i < k; ++i) g[i] = rng.uniform();
      if (curvature_slope_inequality_holds(x, gamma, g)) ++passes;
    }
    if (passes != 500) failures += " matrix-inequality(" + std::to_string(passes) + "/500)";
  }

  // triangle inequality for the weighted metric
  {
    Rng rng(88);
    const BlockMetric metric(17.5, 6, 3);
    for (int rep = 0; rep < 1000; ++rep) {
      const State a(rng.normal_vector(6), rng.normal_vector(3));
      const State b(rng.normal_vector(6), rng.normal_vector(3));
      const State c(rng.normal_vector(6), rng.normal_vector(3));
      const double ab = metric_distance(a, b, metric);
      const double bc = metric_distance(b, c, metric);
      const double ac = metric_distance(a, c, metric);
      if (ac > ab + bc + 1e-12 * (ab + bc)) {
        failures += " triangle-inequality";
        break;
      }
    }
  }

  return {8, failures.empty(),
          failures.empty()
              ? "nonexpansiveness, resolvent identity, finite differences, field "
                "equivalence, matrix inequality 500/500, triangle inequality"
              : "failed:" + failures};
}

}  // namespace

int main() {
  const std::vector<Criterion> results = {
      criterion_1(), criterion_2(), criterion_3(), criterion_4(),
      criterion_5(), criterion_6(), criterion_7(), criterion_8()};
  int failed = 0;
  for (const auto& r : results) {
    std::printf("[criterion %d] %s  %s\n", r.id, r.pass ? "PASS" : "FAIL",
                r.detail.c_str());
    if (!r.pass) ++failed;
  }
  std::printf("%d/%zu criteria passed\n", int(results.size()) - failed,
              results.size());
  return failed == 0 ? 0 : 1;
}
