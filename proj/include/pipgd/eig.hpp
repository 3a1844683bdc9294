#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <vector>

#include "pipgd/types.hpp"

namespace pipgd {

struct SymmetricEigen {
  Vector eigenvalues;   // ascending
  Matrix eigenvectors;  // column k pairs with eigenvalues[k]
};

/// Cyclic Jacobi diagonalization of a symmetric matrix.
///
/// Deterministic rotation order (row-cyclic with the classical small-element
/// thresholds), so repeated runs on any platform produce identical output.
/// Intended for the dense, desk-scale matrices used here (k <~ 200).
inline SymmetricEigen jacobi_eigensymm(const Matrix& input,
                                       bool with_vectors = true) {
  if (input.rows() != input.cols())
    throw std::invalid_argument("jacobi_eigensymm: matrix must be square");
  const Index n = input.rows();
  Matrix a = 0.5 * (input + input.transpose());
  Matrix v = with_vectors ? Matrix::Identity(n, n) : Matrix();
  Vector b = a.diagonal();
  Vector d = b;
  Vector z = Vector::Zero(n);

  auto rotate = [](Matrix& m, double s, double tau, Index i, Index j, Index k,
                   Index l) {
    const double g = m(i, j);
    const double h = m(k, l);
    m(i, j) = g - s * (h + g * tau);
    m(k, l) = h + s * (g - h * tau);
  };

  bool converged = (n < 2);
  for (int sweep = 0; sweep < 100 && !converged; ++sweep) {
    double off = 0.0;
    for (Index i = 0; i < n - 1; ++i)
      for (Index j = i + 1; j < n; ++j) off += std::abs(a(i, j));
    if (off == 0.0) {
      converged = true;
      break;
    }
    const double thresh = (sweep < 3) ? 0.2 * off / double(n * n) : 0.0;
    for (Index i = 0; i < n - 1; ++i) {
      for (Index j = i + 1; j < n; ++j) {
        const double g = 100.0 * std::abs(a(i, j));
        if (sweep > 3 && std::abs(d[i]) + g == std::abs(d[i]) &&
            std::abs(d[j]) + g == std::abs(d[j])) {
          a(i, j) = 0.0;
        } else if (std::abs(a(i, j)) > thresh) {
          double h = d[j] - d[i];
          double t;
          if (std::abs(h) + g == std::abs(h)) {
            t = a(i, j) / h;
          } else {
            const double theta = 0.5 * h / a(i, j);
            t = 1.0 / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
            if (theta < 0.0) t = -t;
          }
          const double c = 1.0 / std::sqrt(1.0 + t * t);
          const double s = t * c;
          const double tau = s / (1.0 + c);
          h = t * a(i, j);
          z[i] -= h;
          z[j] += h;
          d[i] -= h;
          d[j] += h;
          a(i, j) = 0.0;
          for (Index k = 0; k < i; ++k) rotate(a, s, tau, k, i, k, j);
          for (Index k = i + 1; k < j; ++k) rotate(a, s, tau, i, k, k, j);
          for (Index k = j + 1; k < n; ++k) rotate(a, s, tau, i, k, j, k);
          if (with_vectors)
            for (Index k = 0; k < n; ++k) rotate(v, s, tau, k, i, k, j);
        }
      }
    }
    b += z;
    d = b;
    z.setZero();
  }
  if (!converged) {
    double off = 0.0;
    for (Index i = 0; i < n - 1; ++i)
      for (Index j = i + 1; j < n; ++j) off += std::abs(a(i, j));
    if (off != 0.0)
      throw std::runtime_error("jacobi_eigensymm: no convergence in 100 sweeps");
  }

  // deterministic ascending sort
  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(),
            [&](Index p, Index q) { return d[p] < d[q]; });
  SymmetricEigen out;
  out.eigenvalues.resize(n);
  if (with_vectors) out.eigenvectors.resize(n, n);
  for (Index k = 0; k < n; ++k) {
    out.eigenvalues[k] = d[order[static_cast<std::size_t>(k)]];
    if (with_vectors)
      out.eigenvectors.col(k) = v.col(order[static_cast<std::size_t>(k)]);
  }
  return out;
}

inline Vector symmetric_eigenvalues(const Matrix& input) {
  return jacobi_eigensymm(input, false).eigenvalues;
}

namespace detail {

inline void balance_in_place(Matrix& a) {
  const Index n = a.rows();
  const double radix = 2.0;
  const double sqrdx = radix * radix;
  bool done = false;
  while (!done) {
    done = true;
    for (Index i = 0; i < n; ++i) {
      double r = 0.0, c = 0.0;
      for (Index j = 0; j < n; ++j) {
        if (j != i) {
          c += std::abs(a(j, i));
          r += std::abs(a(i, j));
        }
      }
      if (c != 0.0 && r != 0.0) {
        double g = r / radix;
        double f = 1.0;
        const double s = c + r;
        while (c < g) {
          f *= radix;
          c *= sqrdx;
        }
        g = r * radix;
        while (c > g) {
          f /= radix;
          c /= sqrdx;
        }
        if ((c + r) / f < 0.95 * s) {
          done = false;
          const double ginv = 1.0 / f;
          a.row(i) *= ginv;
          a.col(i) *= f;
        }
      }
    }
  }
}

// reduction to upper Hessenberg by stabilized elimination
inline void hessenberg_in_place(Matrix& a) {
  const Index n = a.rows();
  for (Index m = 1; m + 1 < n; ++m) {
    double x = 0.0;
    Index pivot = m;
    for (Index j = m; j < n; ++j) {
      if (std::abs(a(j, m - 1)) > std::abs(x)) {
        x = a(j, m - 1);
        pivot = j;
      }
    }
    if (pivot != m) {
      for (Index j = m - 1; j < n; ++j) std::swap(a(pivot, j), a(m, j));
      for (Index j = 0; j < n; ++j) std::swap(a(j, pivot), a(j, m));
    }
    if (x != 0.0) {
      for (Index i = m + 1; i < n; ++i) {
        double y = a(i, m - 1);
        if (y != 0.0) {
          y /= x;
          a(i, m - 1) = y;
          for (Index j = m; j < n; ++j) a(i, j) -= y * a(m, j);
          for (Index j = 0; j < n; ++j) a(j, m) += y * a(j, i);
        }
      }
    }
  }
}

inline double sign_of(double magnitude, double sign_source) {
  return sign_source >= 0.0 ? std::abs(magnitude) : -std::abs(magnitude);
}

}  // namespace detail

/// Eigenvalues of a general real square matrix.
///
/// Balancing, elimination to upper Hessenberg form, then the classical
/// Francis double-shift QR iteration. Adequate at desk scale; eigenvectors
/// are not produced.
inline std::vector<std::complex<double>> general_eigenvalues(Matrix a) {
  if (a.rows() != a.cols())
    throw std::invalid_argument("general_eigenvalues: matrix must be square");
  const Index n = a.rows();
  std::vector<std::complex<double>> eig(static_cast<std::size_t>(n));
  if (n == 0) return eig;
  if (n == 1) {
    eig[0] = a(0, 0);
    return eig;
  }
  detail::balance_in_place(a);
  detail::hessenberg_in_place(a);

  double anorm = 0.0;
  for (Index i = 0; i < n; ++i)
    for (Index j = std::max<Index>(i - 1, 0); j < n; ++j)
      anorm += std::abs(a(i, j));

  Index nn = n - 1;
  double t = 0.0;
  while (nn >= 0) {
    int its = 0;
    Index l;
    do {
      for (l = nn; l >= 1; --l) {
        double s = std::abs(a(l - 1, l - 1)) + std::abs(a(l, l));
        if (s == 0.0) s = anorm;
        if (std::abs(a(l, l - 1)) + s == s) {
          a(l, l - 1) = 0.0;
          break;
        }
      }
      if (l < 0) l = 0;
      double x = a(nn, nn);
      if (l == nn) {
        eig[static_cast<std::size_t>(nn)] = {x + t, 0.0};
        --nn;
      } else {
        double y = a(nn - 1, nn - 1);
        double w = a(nn, nn - 1) * a(nn - 1, nn);
        if (l == nn - 1) {
          double p = 0.5 * (y - x);
          double q = p * p + w;
          double z = std::sqrt(std::abs(q));
          x += t;
          if (q >= 0.0) {
            z = p + detail::sign_of(z, p);
            double r1 = x + z;
            double r2 = (z != 0.0) ? x - w / z : x + z;
            eig[static_cast<std::size_t>(nn - 1)] = {r1, 0.0};
            eig[static_cast<std::size_t>(nn)] = {r2, 0.0};
          } else {
            eig[static_cast<std::size_t>(nn - 1)] = {x + p, -z};
            eig[static_cast<std::size_t>(nn)] = {x + p, z};
          }
          nn -= 2;
        } else {
          if (its == 100)
            throw std::runtime_error(
                "general_eigenvalues: QR iteration did not converge");
          if (its != 0 && its % 10 == 0) {
            // exceptional shift
            t += x;
            for (Index i = 0; i <= nn; ++i) a(i, i) -= x;
            const double s =
                std::abs(a(nn, nn - 1)) + std::abs(a(nn - 1, nn - 2));
            y = x = 0.75 * s;
            w = -0.4375 * s * s;
          }
          ++its;
          Index m;
          double p = 0.0, q = 0.0, r = 0.0, z = 0.0;
          for (m = nn - 2; m >= l; --m) {
            z = a(m, m);
            const double rr = x - z;
            const double ss = y - z;
            p = (rr * ss - w) / a(m + 1, m) + a(m, m + 1);
            q = a(m + 1, m + 1) - z - rr - ss;
            r = a(m + 2, m + 1);
            const double scale = std::abs(p) + std::abs(q) + std::abs(r);
            p /= scale;
            q /= scale;
            r /= scale;
            if (m == l) break;
            const double u = std::abs(a(m, m - 1)) * (std::abs(q) + std::abs(r));
            const double v =
                std::abs(p) *
                (std::abs(a(m - 1, m - 1)) + std::abs(z) + std::abs(a(m + 1, m + 1)));
            if (u + v == v) break;
          }
          if (m < l) m = l;
          for (Index i = m + 2; i <= nn; ++i) {
            a(i, i - 2) = 0.0;
            if (i != m + 2) a(i, i - 3) = 0.0;
          }
          for (Index k = m; k <= nn - 1; ++k) {
            if (k != m) {
              p = a(k, k - 1);
              q = a(k + 1, k - 1);
              r = (k != nn - 1) ? a(k + 2, k - 1) : 0.0;
              x = std::abs(p) + std::abs(q) + std::abs(r);
              if (x != 0.0) {
                p /= x;
                q /= x;
                r /= x;
              }
            }
            const double s =
                detail::sign_of(std::sqrt(p * p + q * q + r * r), p);
            if (s != 0.0) {
              if (k == m) {
                if (l != m) a(k, k - 1) = -a(k, k - 1);
              } else {
                a(k, k - 1) = -s * x;
              }
              p += s;
              x = p / s;
              y = q / s;
              z = r / s;
              q /= p;
              r /= p;
              for (Index j = k; j <= nn; ++j) {
                double pp = a(k, j) + q * a(k + 1, j);
                if (k != nn - 1) {
                  pp += r * a(k + 2, j);
                  a(k + 2, j) -= pp * z;
                }
                a(k + 1, j) -= pp * y;
                a(k, j) -= pp * x;
              }
              const Index mmin = std::min(nn, k + 3);
              for (Index i = l; i <= mmin; ++i) {
                double pp = x * a(i, k) + y * a(i, k + 1);
                if (k != nn - 1) {
                  pp += z * a(i, k + 2);
                  a(i, k + 2) -= pp * r;
                }
                a(i, k + 1) -= pp * q;
                a(i, k) -= pp;
              }
            }
          }
        }
      }
    } while (l < nn - 1);
  }
  return eig;
}

/// Largest real part over the spectrum; negative means Hurwitz.
inline double spectral_abscissa(const Matrix& a) {
  const auto eig = general_eigenvalues(a);
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& ev : eig) worst = std::max(worst, ev.real());
  return worst;
}

}  // namespace pipgd
