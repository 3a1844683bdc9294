#pragma once

#include <cmath>
#include <stdexcept>

#include "pipgd/types.hpp"

namespace pipgd {

/// Scalar soft threshold: v - tau*sign(v) if |v| > tau, else 0. The boundary
/// |v| = tau maps to exactly 0, keeping the map single-valued.
inline double soft_threshold(double v, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("soft_threshold: tau must be > 0");
  if (v > tau) return v - tau;
  if (v < -tau) return v + tau;
  return 0.0;
}

/// Componentwise soft threshold; prox of tau*||.||_1.
inline Vector soft_threshold(const Vector& v, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("soft_threshold: tau must be > 0");
  Vector out(v.size());
  for (Index i = 0; i < v.size(); ++i) {
    const double vi = v[i];
    out[i] = (vi > tau) ? vi - tau : (vi < -tau ? vi + tau : 0.0);
  }
  return out;
}

/// Projection onto the nonnegative orthant; prox of its indicator.
inline Vector nonneg_prox(const Vector& v) { return v.cwiseMax(0.0); }

/// Prox of the zero function (the g = 0 case).
inline Vector identity_prox(const Vector& v) { return v; }

/// Generalized derivative of the soft threshold, one of {0,1} per component,
/// choosing 0 at the kinks |v_i| = tau. Feeds the diagonal G used in the
/// Jacobian assembly.
inline Vector soft_threshold_slope(const Vector& v, double tau) {
  if (!(tau > 0.0))
    throw std::invalid_argument("soft_threshold_slope: tau must be > 0");
  Vector g(v.size());
  for (Index i = 0; i < v.size(); ++i) g[i] = std::abs(v[i]) > tau ? 1.0 : 0.0;
  return g;
}

/// Generalized derivative of the nonnegative projection, 0 at the kink.
inline Vector nonneg_slope(const Vector& v) {
  Vector g(v.size());
  for (Index i = 0; i < v.size(); ++i) g[i] = v[i] > 0.0 ? 1.0 : 0.0;
  return g;
}

}  // namespace pipgd
