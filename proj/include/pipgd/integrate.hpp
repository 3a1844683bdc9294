#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

#include "pipgd/core.hpp"
#include "pipgd/dynamics.hpp"

namespace pipgd {

enum class Method { kEuler, kRk4 };

namespace detail {

inline void check_finite(const Vector& v, const char* what) {
  for (Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i]))
      throw std::runtime_error(std::string(what) + ": non-finite value at component " +
                               std::to_string(i));
  }
}

inline State axpy(const State& z, double a, const FieldEvaluation& f) {
  return State(z.x + a * f.dx, z.lambda + a * f.dlambda);
}

}  // namespace detail

/// Forward Euler step z' = z + dt * F(z).
inline State euler_step(const FieldFn& field, const State& z, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("euler_step: dt must be > 0");
  const FieldEvaluation f = field(z);
  detail::check_finite(f.dx, "euler_step dx");
  detail::check_finite(f.dlambda, "euler_step dlambda");
  return detail::axpy(z, dt, f);
}

/// Classical fourth-order Runge-Kutta step.
inline State rk4_step(const FieldFn& field, const State& z, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("rk4_step: dt must be > 0");
  const FieldEvaluation k1 = field(z);
  const FieldEvaluation k2 = field(detail::axpy(z, 0.5 * dt, k1));
  const FieldEvaluation k3 = field(detail::axpy(z, 0.5 * dt, k2));
  const FieldEvaluation k4 = field(detail::axpy(z, dt, k3));
  State out = z;
  out.x += (dt / 6.0) * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx);
  out.lambda +=
      (dt / 6.0) * (k1.dlambda + 2.0 * k2.dlambda + 2.0 * k3.dlambda + k4.dlambda);
  detail::check_finite(out.x, "rk4_step x");
  detail::check_finite(out.lambda, "rk4_step lambda");
  return out;
}

/// Fixed-step integration of dz = F(z) over [0, t_end] with per-sample
/// diagnostics. Samples are recorded every `record_stride` steps, always
/// including t = 0 and the final time. On a non-finite value the run aborts
/// and returns the partial record with `aborted` set; divergence is treated
/// as diagnostic signal, never clamped away.
inline Trajectory simulate(const FieldFn& field, const ResidualFn& residual,
                           const BlockMetric& metric, const State& z0,
                           const SolverParams& params, Method method,
                           int record_stride = 1) {
  params.validate();
  if (record_stride < 1)
    throw std::invalid_argument("simulate: record_stride must be >= 1");
  const long steps = std::lround(params.t_end / params.dt);
  if (steps < 1 || std::abs(steps * params.dt - params.t_end) > params.dt)
    throw std::invalid_argument("simulate: dt must divide t_end within one step");

  Trajectory traj;
  State z = z0;

  auto record = [&](long step) -> bool {
    const FieldEvaluation f = field(z);
    const double fnorm = metric.norm(f.dx, f.dlambda);
    const double res = residual(z);
    if (!std::isfinite(fnorm) || !std::isfinite(res)) {
      traj.aborted = true;
      traj.abort_reason = "non-finite diagnostics at t = " +
                          std::to_string(double(step) * params.dt);
      return false;
    }
    traj.times.push_back(double(step) * params.dt);
    traj.states.push_back(z);
    traj.residuals.push_back(res);
    traj.field_norms.push_back(fnorm);
    return true;
  };

  if (!record(0)) return traj;
  for (long k = 1; k <= steps; ++k) {
    try {
      z = (method == Method::kEuler) ? euler_step(field, z, params.dt)
                                     : rk4_step(field, z, params.dt);
    } catch (const std::runtime_error& e) {
      traj.aborted = true;
      traj.abort_reason = e.what();
      return traj;
    }
    if (k % record_stride == 0 || k == steps) {
      if (!record(k)) return traj;
    }
  }
  return traj;
}

/// First recorded state whose field norm stays below eq_tol for 10
/// consecutive samples. Uses ||zdot||_P rather than state deltas so the test
/// is invariant to the step size.
inline std::optional<State> detect_equilibrium(const Trajectory& traj,
                                               double eq_tol) {
  constexpr std::size_t kWindow = 10;
  if (traj.size() < kWindow) return std::nullopt;
  std::size_t run = 0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    run = (traj.field_norms[i] < eq_tol) ? run + 1 : 0;
    if (run == kWindow) return traj.states[i + 1 - kWindow];
  }
  return std::nullopt;
}

}  // namespace pipgd
