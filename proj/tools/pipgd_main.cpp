// Command-line front end: runs the constrained-lasso, nonlinear-constraint
// and entropic-transport experiments end to end and emits machine-readable
// traces (CSV) and summaries (JSON).

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pipgd/pipgd.hpp"
#include "pipgd/serialization.hpp"

namespace {

using nlohmann::json;
using namespace pipgd;

constexpr int kExitPass = 0;
constexpr int kExitCheckFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

json checks_to_json(const std::vector<Check>& checks) {
  json arr = json::array();
  for (const auto& c : checks)
    arr.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  return arr;
}

bool all_pass(const std::vector<Check>& checks) {
  return std::all_of(checks.begin(), checks.end(),
                     [](const Check& c) { return c.pass; });
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3e", v);
  return buf;
}

json certificate_to_json(const GainCertificate& cert) {
  return json{{"certified", cert.certified()},
              {"gamma_ok", cert.gamma_ok},
              {"gamma_margin", cert.gamma_margin},
              {"p_lower", cert.p_lower},
              {"p_upper", cert.p_upper},
              {"p_ok", cert.p_ok},
              {"p_margin_lower", cert.p_margin_lower},
              {"p_margin_upper", cert.p_margin_upper},
              {"kp_eq_ki", cert.kp_eq_ki},
              {"rho", cert.rho},
              {"L", cert.L}};
}

json envelope_to_json(const EnvelopeFit& fit) {
  return json{{"q", fit.q},
              {"c_lin", fit.c_lin},
              {"t_cross", fit.t_cross},
              {"c_exp", fit.c_exp},
              {"max_violation", fit.max_violation}};
}

/// Trace rows: t, x_0..x_{n-1}, lambda_0..lambda_{m-1}, h_residual,
/// field_norm_P and, when an oracle equilibrium is known, dist_P.
void write_trace_csv(const std::string& path, const Trajectory& traj,
                     const BlockMetric& metric, const State* oracle) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  const Index n = traj.states.front().n();
  const Index m = traj.states.front().m();
  out << "t";
  for (Index i = 0; i < n; ++i) out << ",x_" << i;
  for (Index i = 0; i < m; ++i) out << ",lambda_" << i;
  out << ",h_residual,field_norm_P";
  if (oracle) out << ",dist_P";
  out << "\n";
  for (std::size_t k = 0; k < traj.size(); ++k) {
    out << fmt(traj.times[k]);
    for (Index i = 0; i < n; ++i) out << "," << fmt(traj.states[k].x[i]);
    for (Index i = 0; i < m; ++i) out << "," << fmt(traj.states[k].lambda[i]);
    out << "," << fmt(traj.residuals[k]) << "," << fmt(traj.field_norms[k]);
    if (oracle) out << "," << fmt(metric_distance(traj.states[k], *oracle, metric));
    out << "\n";
  }
}

void write_matrix_csv(const std::string& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << fmt(m(i, j));
    out << "\n";
  }
}

struct CommonOptions {
  Index n = 10;
  Index m = 5;
  double alpha = 1.0;
  double gamma = -1.0;  // negative means "derive the default"
  double kp = -1.0;
  double ki = -1.0;
  double p_weight = -1.0;
  double dt = -1.0;
  double t_end = -1.0;
  std::uint64_t seed = 1;
  int trials = 1;
  std::string method = "euler";
  std::string out_dir;
  std::string fixture;
  double eps = 0.001;
  bool gain_sweep = false;
  bool appendix_lemma = false;
  int samples = 200;
  bool full_size = false;

  std::filesystem::path resolve_out() const {
    std::string dir = out_dir;
    if (dir.empty()) {
      if (const char* env = std::getenv("PIPGD_OUT")) dir = env;
      if (dir.empty()) dir = ".";
    }
    std::filesystem::create_directories(dir);
    return dir;
  }

  Method parsed_method() const {
    if (method == "euler") return Method::kEuler;
    if (method == "rk4") return Method::kRk4;
    throw CLI::ValidationError("--method must be euler or rk4");
  }
};

void add_common_flags(CLI::App* cmd, CommonOptions& opt) {
  cmd->add_option("--n", opt.n, "primal dimension");
  cmd->add_option("--m", opt.m, "number of equality constraints");
  cmd->add_option("--alpha", opt.alpha, "l1 weight");
  cmd->add_option("--gamma", opt.gamma, "prox/gradient scale");
  cmd->add_option("--kp", opt.kp, "proportional gain");
  cmd->add_option("--ki", opt.ki, "integral gain");
  cmd->add_option("--p-weight", opt.p_weight, "metric weight p");
  cmd->add_option("--dt", opt.dt, "integration step");
  cmd->add_option("--t-end", opt.t_end, "horizon");
  cmd->add_option("--seed", opt.seed, "instance / initial-condition seed");
  cmd->add_option("--trials", opt.trials, "number of seeded trajectories");
  cmd->add_option("--method", opt.method, "integrator: euler or rk4")
      ->check(CLI::IsMember({"euler", "rk4"}));
  cmd->add_option("--out", opt.out_dir, "output directory (default $PIPGD_OUT or .)");
  cmd->add_option("--fixture", opt.fixture, "JSON instance fixture to load");
  cmd->add_option("--eps", opt.eps, "entropic regularization");
  cmd->add_flag("--gain-sweep", opt.gain_sweep, "run the six-gain-pair sweep");
  cmd->add_flag("--appendix-lemma", opt.appendix_lemma,
                "run the randomized matrix-inequality battery");
  cmd->add_option("--samples", opt.samples, "sample count for randomized checks");
  cmd->add_flag("--full-size", opt.full_size, "use the full 100x100 transport size");
}

json config_json(const CommonOptions& opt, const SolverParams& params) {
  return json{{"n", opt.n},
              {"m", opt.m},
              {"alpha", opt.alpha},
              {"gamma", params.gamma},
              {"kp", params.kp},
              {"ki", params.ki},
              {"p_weight", params.p_weight},
              {"dt", params.dt},
              {"t_end", params.t_end},
              {"seed", opt.seed},
              {"trials", opt.trials},
              {"method", opt.method},
              {"eps", opt.eps},
              {"fixture", opt.fixture},
              {"full_size", opt.full_size},
              {"samples", opt.samples},
              {"build_id", PIPGD_BUILD_ID}};
}

struct TrialResult {
  Trajectory traj;
  std::optional<EnvelopeFit> envelope;
  std::string error;
};

// ---------------------------------------------------------------------------
// run-lasso
// ---------------------------------------------------------------------------

int run_lasso(const CommonOptions& opt) {
  const auto out_dir = opt.resolve_out();
  const LassoInstance inst =
      opt.fixture.empty()
          ? make_constrained_lasso(opt.n, opt.m, opt.alpha, opt.seed)
          : lasso_from_json(load_json(opt.fixture));
  const Index n = inst.n(), m = inst.m();

  SolverParams params;
  params.gamma = opt.gamma > 0
                     ? opt.gamma
                     : std::min(1.0 / inst.L, 4.0 * inst.rho / (inst.L * inst.L) - 1e-4);
  params.kp = opt.kp > 0 ? opt.kp : 20.0;
  params.ki = opt.ki > 0 ? opt.ki : 20.0;
  params.p_weight = opt.p_weight > 0 ? opt.p_weight : params.kp / params.gamma;
  params.dt = opt.dt > 0 ? opt.dt : 0.01;
  params.t_end = opt.t_end > 0 ? opt.t_end : 20.0;
  const BlockMetric metric = params.metric(n, m);

  std::vector<Check> checks;
  const GainCertificate cert = validate_gain_conditions(inst.rho, inst.L, params);
  checks.push_back({"gain_certificate", cert.certified(),
                    "gamma_margin=" + fmt3(cert.gamma_margin) +
                        " p_margins=[" + fmt3(cert.p_margin_lower) + "," +
                        fmt3(cert.p_margin_upper) + "] kp_eq_ki=" +
                        (cert.kp_eq_ki ? "true" : "false")});

  json summary;
  summary["config"] = config_json(opt, params);
  summary["certificate"] = certificate_to_json(cert);

  if (!cert.certified()) {
    summary["checks"] = checks_to_json(checks);
    save_json(summary, (out_dir / "lasso_summary.json").string());
    std::cerr << "gain certificate failed; see lasso_summary.json\n";
    return kExitCheckFailure;
  }

  const OracleSolution sol = admm_oracle(inst, 100000, 1e-11);
  const State zstar(sol.x, sol.lambda);
  const double oracle_cost =
      0.5 * sol.x.dot(inst.W * sol.x) + inst.alpha * sol.x.lpNorm<1>();
  const StationarityResidual oracle_res =
      stationarity_residual(zstar, inst.as_problem(), params.gamma);
  checks.push_back({"oracle_stationarity",
                    oracle_res.r_fix < 1e-10 && oracle_res.r_feas < 1e-10,
                    "r_fix=" + fmt3(oracle_res.r_fix) +
                        " r_feas=" + fmt3(oracle_res.r_feas)});

  const CompositeProblem prob = inst.as_problem();
  const AffineConstraint con = inst.affine_constraint();
  const FieldFn field = affine_field_fn(prob, con, params);
  const ResidualFn residual = constraint_residual_fn(prob);
  const Method method = opt.parsed_method();

  // seeded trials, one worker per trajectory, collected before any output
  const int trials = std::max(1, opt.trials);
  std::vector<TrialResult> results(static_cast<std::size_t>(trials));
  {
    std::vector<std::future<TrialResult>> futures;
    futures.reserve(static_cast<std::size_t>(trials));
    for (int trial = 0; trial < trials; ++trial) {
      futures.push_back(std::async(std::launch::async, [&, trial]() {
        TrialResult result;
        Rng rng = Rng(opt.seed).spawn(static_cast<std::uint64_t>(trial));
        const State z0(rng.normal_vector(n), rng.normal_vector(m));
        result.traj = simulate(field, residual, metric, z0, params, method, 1);
        if (result.traj.aborted) {
          result.error = result.traj.abort_reason;
          return result;
        }
        std::vector<double> dist(result.traj.size());
        for (std::size_t k = 0; k < result.traj.size(); ++k)
          dist[k] = metric_distance(result.traj.states[k], zstar, metric);
        try {
          result.envelope = envelope_fit(result.traj.times, dist);
        } catch (const std::exception& e) {
          result.error = e.what();
        }
        return result;
      }));
    }
    for (int trial = 0; trial < trials; ++trial)
      results[static_cast<std::size_t>(trial)] = futures[static_cast<std::size_t>(trial)].get();
  }

  for (const auto& r : results) {
    if (r.traj.aborted) {
      std::cerr << "trajectory aborted: " << r.traj.abort_reason << "\n";
      return kExitNumerical;
    }
  }

  const Trajectory& main_traj = results.front().traj;
  const State terminal = main_traj.back();
  const double final_residual = main_traj.residuals.back();
  const double dist_to_oracle = (terminal.x - sol.x).norm();
  const double terminal_cost =
      0.5 * terminal.x.dot(inst.W * terminal.x) + inst.alpha * terminal.x.lpNorm<1>();

  double worst_residual = 0.0, worst_dist = 0.0;
  for (const auto& r : results) {
    worst_residual = std::max(worst_residual, r.traj.residuals.back());
    worst_dist = std::max(worst_dist, (r.traj.back().x - sol.x).norm());
  }
  checks.push_back({"final_constraint_residual", worst_residual < 1e-6,
                    "max over trials ||Ax_T - b|| = " + fmt3(worst_residual)});
  checks.push_back({"terminal_matches_oracle", worst_dist < 1e-4,
                    "max over trials ||x_T - x*|| = " + fmt3(worst_dist)});

  int dominated = 0, fitted = 0;
  double worst_violation = -1.0;
  for (const auto& r : results) {
    if (r.envelope) {
      ++fitted;
      worst_violation = std::max(worst_violation, r.envelope->max_violation);
      if (r.envelope->max_violation <= 1e-9) ++dominated;
    }
  }
  checks.push_back({"envelopes_dominate",
                    fitted == trials && dominated == trials,
                    std::to_string(dominated) + "/" + std::to_string(trials) +
                        " dominated, worst violation " + fmt3(worst_violation)});

  write_trace_csv((out_dir / "lasso_trace.csv").string(), main_traj, metric, &zstar);

  summary["oracle"] = {{"x", vector_to_json(sol.x)},
                       {"lambda", vector_to_json(sol.lambda)},
                       {"cost", oracle_cost}};
  summary["terminal"] = {{"x", vector_to_json(terminal.x)},
                         {"lambda", vector_to_json(terminal.lambda)},
                         {"cost", terminal_cost},
                         {"residuals",
                          {{"h_residual", final_residual},
                           {"dist_to_oracle", dist_to_oracle},
                           {"field_norm_P", main_traj.field_norms.back()}}}};
  if (results.front().envelope)
    summary["envelope"] = envelope_to_json(*results.front().envelope);
  summary["checks"] = checks_to_json(checks);
  save_json(summary, (out_dir / "lasso_summary.json").string());

  return all_pass(checks) ? kExitPass : kExitCheckFailure;
}

// ---------------------------------------------------------------------------
// run-nonlinear
// ---------------------------------------------------------------------------

int run_nonlinear(const CommonOptions& opt) {
  const auto out_dir = opt.resolve_out();
  const CompositeProblem prob = nonlinear_lasso_instance();

  SolverParams params;
  params.gamma = opt.gamma > 0 ? opt.gamma : 0.5;
  params.kp = opt.kp > 0 ? opt.kp : 15.0;
  params.ki = opt.ki > 0 ? opt.ki : 10.0;
  params.p_weight = opt.p_weight > 0 ? opt.p_weight : 1.0;
  params.dt = opt.dt > 0 ? opt.dt : 1e-3;
  params.t_end = opt.t_end > 0 ? opt.t_end : 5.0;
  const BlockMetric metric = params.metric(3, 2);
  const Method method = opt.method == "euler" ? Method::kEuler : Method::kRk4;

  AugLagOptions al_opts;
  al_opts.gamma = params.gamma;
  al_opts.tol = 1e-8;
  const OracleSolution sol = augmented_lagrangian_oracle(
      prob, (Vector(3) << 0.5, 0.5, 0.0).finished(), al_opts);
  const State zstar(sol.x, sol.lambda);
  const double oracle_cost = nonlinear_lasso_cost(sol.x);

  Rng rng = Rng(opt.seed).spawn(0);
  const State z0(rng.normal_vector(3), rng.normal_vector(2));
  const Trajectory traj = simulate(general_field_fn(prob, params),
                                   constraint_residual_fn(prob), metric, z0, params,
                                   method, 1);
  if (traj.aborted) {
    std::cerr << "trajectory aborted: " << traj.abort_reason << "\n";
    return kExitNumerical;
  }

  const State terminal = traj.back();
  const ConstraintEval terminal_con = prob.eval_constraint(terminal.x);
  const double h_inf = terminal_con.value.cwiseAbs().maxCoeff();
  const StationarityResidual res = stationarity_residual(terminal, prob, params.gamma);
  const double terminal_cost = nonlinear_lasso_cost(terminal.x);

  std::vector<Check> checks;
  checks.push_back({"terminal_constraint_violation", h_inf < 1e-4,
                    "||h(x_T)||_inf = " + fmt3(h_inf)});
  checks.push_back({"terminal_stationarity", res.r_fix < 1e-3,
                    "r_fix = " + fmt3(res.r_fix)});
  checks.push_back({"cost_matches_oracle",
                    std::abs(terminal_cost - oracle_cost) < 1e-3,
                    "|cost - cost*| = " + fmt3(std::abs(terminal_cost - oracle_cost))});

  write_trace_csv((out_dir / "nonlinear_trace.csv").string(), traj, metric, &zstar);
  {
    std::ofstream cost_out((out_dir / "nonlinear_cost.csv").string());
    cost_out << "t,cost\n";
    for (std::size_t k = 0; k < traj.size(); ++k)
      cost_out << fmt(traj.times[k]) << ","
               << fmt(nonlinear_lasso_cost(traj.states[k].x)) << "\n";
  }

  json summary;
  summary["config"] = config_json(opt, params);
  summary["oracle"] = {{"x", vector_to_json(sol.x)},
                       {"lambda", vector_to_json(sol.lambda)},
                       {"cost", oracle_cost}};
  summary["terminal"] = {{"x", vector_to_json(terminal.x)},
                         {"lambda", vector_to_json(terminal.lambda)},
                         {"cost", terminal_cost},
                         {"residuals",
                          {{"h_inf", h_inf},
                           {"r_fix", res.r_fix},
                           {"r_feas", res.r_feas}}}};

  if (opt.gain_sweep) {
    const std::vector<std::pair<double, double>> pairs = {
        {4, 4}, {10, 10}, {15, 10}, {20, 20}, {30, 30}, {40, 40}};
    bool tails_ok = true;
    json sweep = json::array();
    for (const auto& [kp, ki] : pairs) {
      SolverParams sweep_params = params;
      sweep_params.kp = kp;
      sweep_params.ki = ki;
      const Trajectory st =
          simulate(general_field_fn(prob, sweep_params), constraint_residual_fn(prob),
                   metric, z0, sweep_params, method, 1);
      if (st.aborted) {
        std::cerr << "gain-sweep trajectory aborted: " << st.abort_reason << "\n";
        return kExitNumerical;
      }
      char name[64];
      std::snprintf(name, sizeof(name), "gain_sweep_kp%g_ki%g.csv", kp, ki);
      std::ofstream sweep_out((out_dir / name).string());
      sweep_out << "t,dist\n";
      std::vector<double> dist(st.size());
      for (std::size_t k = 0; k < st.size(); ++k) {
        dist[k] = metric_distance(st.states[k], zstar, metric);
        sweep_out << fmt(st.times[k]) << "," << fmt(dist[k]) << "\n";
      }
      // monotone tail: no sample-to-sample increase over the last 20%
      double worst_increase = 0.0;
      for (std::size_t k = st.size() * 4 / 5; k + 1 < st.size(); ++k)
        worst_increase = std::max(worst_increase, dist[k + 1] - dist[k]);
      const bool monotone = worst_increase <= 1e-9;
      tails_ok = tails_ok && monotone;
      sweep.push_back({{"kp", kp},
                       {"ki", ki},
                       {"file", name},
                       {"tail_monotone", monotone},
                       {"worst_tail_increase", worst_increase}});
    }
    summary["gain_sweep"] = sweep;
    checks.push_back({"gain_sweep_monotone_tails", tails_ok,
                      "6 distance curves emitted"});
  }

  summary["checks"] = checks_to_json(checks);
  save_json(summary, (out_dir / "nonlinear_summary.json").string());
  return all_pass(checks) ? kExitPass : kExitCheckFailure;
}

// ---------------------------------------------------------------------------
// run-ot
// ---------------------------------------------------------------------------

int run_ot(const CommonOptions& opt, bool m_given) {
  const auto out_dir = opt.resolve_out();
  // marginal sizes default to n = m = 10; --full-size restores the 100 x 100
  // configuration
  const Index nn = opt.full_size ? 100 : opt.n;
  const Index mm = opt.full_size ? 100 : (m_given ? opt.m : nn);
  const OTInstance inst = opt.fixture.empty()
                              ? random_ot_instance(nn, mm, opt.eps, opt.seed)
                              : ot_from_json(load_json(opt.fixture));

  SolverParams params;
  params.gamma = opt.gamma > 0 ? opt.gamma : 0.01;
  params.kp = opt.kp > 0 ? opt.kp : 100.0;
  params.ki = opt.ki > 0 ? opt.ki : 100.0;
  params.p_weight = opt.p_weight > 0 ? opt.p_weight : 1.0;
  params.dt = opt.dt > 0 ? opt.dt : 0.002;
  params.t_end = opt.t_end > 0 ? opt.t_end : 400.0;

  const Index dim_p = inst.n * inst.m;
  const Index dim_l = inst.n + inst.m - 1;
  const BlockMetric metric = params.metric(dim_p, dim_l);

  const FieldFn field = [&inst, &params](const State& z) {
    return ot_field(z.x, z.lambda, inst, params);
  };
  const ResidualFn residual = [&inst](const State& z) {
    return (inst.A_tilde * z.x - inst.d_tilde).norm();
  };

  const State z0(Vector::Constant(dim_p, 1.0 / double(dim_p)), Vector::Zero(dim_l));
  const long steps = std::lround(params.t_end / params.dt);
  const int stride = int(std::max<long>(1, steps / 2000));
  const Trajectory traj =
      simulate(field, residual, metric, z0, params, Method::kEuler, stride);
  if (traj.aborted) {
    std::cerr << "transport flow aborted: " << traj.abort_reason << "\n";
    return kExitNumerical;
  }

  const Vector p = traj.back().x;
  const double feas = traj.residuals.back();
  const double mass = p.sum();
  const double cost_flow = transport_cost(p, inst);
  const Matrix plan_flow = Eigen::Map<const Matrix>(p.data(), inst.n, inst.m);
  const double marg_flow = (plan_flow.rowwise().sum() - inst.a).lpNorm<1>() +
                           (plan_flow.colwise().sum().transpose() - inst.b).lpNorm<1>();

  const SinkhornResult sk = sinkhorn(inst, 20000, 1e-9);

  std::vector<Check> checks;
  checks.push_back({"flow_feasibility", feas < 1e-5,
                    "||A~p - d~|| = " + fmt3(feas)});
  checks.push_back({"flow_mass", std::abs(mass - 1.0) < 1e-6,
                    "sum(p) - 1 = " + fmt3(mass - 1.0)});
  checks.push_back({"flow_nonnegative", p.minCoeff() >= -1e-10,
                    "min(p) = " + fmt3(p.minCoeff())});
  if (sk.status == SinkhornStatus::kConverged) {
    const double cost_sk = transport_cost(sk.plan, inst);
    const double rel = std::abs(cost_flow - cost_sk) /
                       std::max(1e-300, std::abs(cost_sk));
    checks.push_back({"cost_agreement", rel < 1e-3,
                      "relative gap = " + fmt3(rel)});
    checks.push_back({"sinkhorn_marginals", sk.marginal_error < 1e-5,
                      "l1 error = " + fmt3(sk.marginal_error)});
    checks.push_back({"flow_marginals", marg_flow < 1e-5,
                      "l1 error = " + fmt3(marg_flow)});
  }

  write_trace_csv((out_dir / "ot_trace.csv").string(), traj, metric, nullptr);
  write_matrix_csv((out_dir / "ot_plan_pipgd.csv").string(), plan_flow);
  if (sk.plan.size() > 0)
    write_matrix_csv((out_dir / "ot_plan_sinkhorn.csv").string(), sk.plan);

  json summary;
  summary["config"] = config_json(opt, params);
  summary["flow"] = {{"cost", cost_flow},
                     {"feasibility", feas},
                     {"mass", mass},
                     {"min_component", p.minCoeff()},
                     {"marginal_error_l1", marg_flow}};
  summary["sinkhorn"] = {{"status", to_string(sk.status)},
                         {"iterations", sk.iterations},
                         {"marginal_error_l1", sk.marginal_error}};
  if (sk.status == SinkhornStatus::kConverged)
    summary["sinkhorn"]["cost"] = transport_cost(sk.plan, inst);
  summary["checks"] = checks_to_json(checks);
  save_json(summary, (out_dir / "ot_summary.json").string());
  return all_pass(checks) ? kExitPass : kExitCheckFailure;
}

// ---------------------------------------------------------------------------
// certify
// ---------------------------------------------------------------------------

int certify(const CommonOptions& opt) {
  const LassoInstance inst =
      opt.fixture.empty()
          ? make_constrained_lasso(opt.n, opt.m, opt.alpha, opt.seed)
          : lasso_from_json(load_json(opt.fixture));

  SolverParams params;
  params.gamma = opt.gamma > 0
                     ? opt.gamma
                     : std::min(1.0 / inst.L, 4.0 * inst.rho / (inst.L * inst.L) - 1e-4);
  params.kp = opt.kp > 0 ? opt.kp : 20.0;
  params.ki = opt.ki > 0 ? opt.ki : 20.0;
  params.p_weight = opt.p_weight > 0 ? opt.p_weight : params.kp / params.gamma;

  std::vector<Check> checks;
  const GainCertificate cert = validate_gain_conditions(inst.rho, inst.L, params);
  checks.push_back({"gain_certificate", cert.certified(), ""});

  json report;
  report["config"] = config_json(opt, params);
  report["certificate"] = certificate_to_json(cert);

  if (cert.certified()) {
    Rng rng(opt.seed ^ 0xabcdef);
    const double worst = weak_contraction_spot_check(
        inst.as_problem(), inst.affine_constraint(), params,
        params.metric(inst.n(), inst.m()), opt.samples, rng);
    checks.push_back({"lognorm_spot_check", worst <= 1e-8,
                      "max mu_P over " + std::to_string(opt.samples) +
                          " samples = " + fmt3(worst)});
    report["lognorm_spot_check"] = worst;

    const Matrix q = weak_contraction_lmi(inst.W, Vector::Ones(inst.n()), params,
                                          params.p_weight);
    const double qmin = symmetric_eigenvalues(0.5 * (q + q.transpose()))[0];
    checks.push_back({"lmi_full_slopes", qmin >= -1e-10,
                      "min eigenvalue = " + fmt3(qmin)});
    report["lmi_min_eigenvalue"] = qmin;
  }

  const OracleSolution sol = admm_oracle(inst, 100000, 1e-11);
  const JacobianResult jac =
      field_jacobian(State(sol.x, sol.lambda), inst.as_problem(),
                     inst.affine_constraint(), params, Vector::Ones(inst.n()));
  const double abscissa = hurwitz_check(jac.matrix);
  checks.push_back({"equilibrium_hurwitz", abscissa < -1e-6,
                    "spectral abscissa = " + fmt3(abscissa)});
  report["equilibrium_spectral_abscissa"] = abscissa;

  if (opt.appendix_lemma) {
    Rng rng(opt.seed ^ 0x5eed);
    int pass_count = 0;
    for (int rep = 0; rep < opt.samples; ++rep) {
      const Index k = 2 + Index(rng.uniform() * 7);
      Matrix x = rng.normal_matrix(k, k);
      x = x * x.transpose() + (0.1 + rng.uniform()) * Matrix::Identity(k, k);
      const Vector ev = symmetric_eigenvalues(x);
      const double gamma = (0.05 + 0.95 * rng.uniform()) / ev[k - 1];
      Vector g(k);
      for (Index i = 0; i < k; ++i) g[i] = rng.uniform();
      if (curvature_slope_inequality_holds(x, gamma, g)) ++pass_count;
    }
    checks.push_back({"matrix_inequality_battery", pass_count == opt.samples,
                      std::to_string(pass_count) + "/" +
                          std::to_string(opt.samples) + " hold"});
    report["matrix_inequality_passes"] = pass_count;
  }

  report["checks"] = checks_to_json(checks);
  std::cout << report.dump(2) << "\n";
  return all_pass(checks) ? kExitPass : kExitCheckFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PI proximal-gradient dynamics experiment runner"};
  app.require_subcommand(1);

  CommonOptions opt;
  CLI::App* lasso = app.add_subcommand(
      "run-lasso", "equality-constrained lasso flow vs. the splitting oracle");
  CLI::App* nonlinear = app.add_subcommand(
      "run-nonlinear", "nonlinear-equality lasso flow vs. the multiplier oracle");
  CLI::App* ot = app.add_subcommand(
      "run-ot", "entropic transport flow vs. the scaling baseline");
  CLI::App* cert = app.add_subcommand(
      "certify", "parameter certificate, lognorm and stability checks");
  for (CLI::App* cmd : {lasso, nonlinear, ot, cert}) add_common_flags(cmd, opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? kExitPass : kExitUsage;
  }

  try {
    if (lasso->parsed()) return run_lasso(opt);
    if (nonlinear->parsed()) return run_nonlinear(opt);
    if (ot->parsed()) return run_ot(opt, ot->count("--m") > 0);
    if (cert->parsed()) return certify(opt);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitUsage;
}
