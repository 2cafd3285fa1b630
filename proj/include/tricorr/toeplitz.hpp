#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "tricorr/errors.hpp"
#include "tricorr/moments.hpp"
#include "tricorr/real.hpp"

namespace tricorr {

enum class CorrelationMethod { Determinant, GarnierRecovery, DPVRecovery, ColumnRecovery };

inline const char* to_string(CorrelationMethod m) {
  switch (m) {
    case CorrelationMethod::Determinant: return "determinant";
    case CorrelationMethod::GarnierRecovery: return "garnier";
    case CorrelationMethod::DPVRecovery: return "dpv";
    case CorrelationMethod::ColumnRecovery: return "column";
  }
  return "unknown";
}

struct CorrelationSeries {
  std::vector<Real> values;  // I_0 .. I_Nmax
  CorrelationMethod method = CorrelationMethod::Determinant;
  int precision = 0;
};

// Determinant of a dense n x n row-major matrix by Gaussian elimination with full pivoting.
// Throws SingularMatrix when the largest remaining pivot is exactly zero.
inline Real determinant(std::vector<Real> a, int n) {
  if (n == 0) return Real(1);
  Real det(1);
  auto at = [&](int i, int j) -> Real& { return a[static_cast<size_t>(i * n + j)]; };
  for (int k = 0; k < n; ++k) {
    int pi = k, pj = k;
    Real best = abs(at(k, k));
    for (int i = k; i < n; ++i)
      for (int j = k; j < n; ++j) {
        Real m = abs(at(i, j));
        if (m > best) {
          best = std::move(m);
          pi = i;
          pj = j;
        }
      }
    if (best.is_zero()) throw Error(ErrorCode::SingularMatrix, "zero pivot at elimination step " + std::to_string(k), n);
    if (pi != k) {
      for (int j = 0; j < n; ++j) std::swap(at(k, j), at(pi, j));
      det = -det;
    }
    if (pj != k) {
      for (int i = 0; i < n; ++i) std::swap(at(i, k), at(i, pj));
      det = -det;
    }
    const Real piv = at(k, k);
    det *= piv;
    for (int i = k + 1; i < n; ++i) {
      Real f = at(i, k) / piv;
      if (f.is_zero()) continue;
      for (int j = k + 1; j < n; ++j) at(i, j) -= f * at(k, j);
    }
  }
  return det;
}

// det[w_{j-k+shift}]_{j,k=0..n-1}; shift = 0 gives I_n.
inline Real toeplitz_determinant(const MomentTable& t, int n, int shift = 0) {
  if (n == 0) return Real(1);
  int need_lo = -(n - 1) + shift, need_hi = n - 1 + shift;
  if (!t.contains(need_lo) || !t.contains(need_hi))
    throw Error(ErrorCode::WindowTooSmall,
                "order " + std::to_string(n) + " needs w_" + std::to_string(need_lo) + "..w_" + std::to_string(need_hi), n);
  std::vector<Real> a;
  a.reserve(static_cast<size_t>(n * n));
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) a.push_back(t.at(j - k + shift));
  try {
    return determinant(std::move(a), n);
  } catch (const Error& e) {
    throw Error(e.code(), "I_" + std::to_string(n) + ": " + e.detail(), n);
  }
}

inline CorrelationSeries determinant_series(const MomentTable& t, int nmax) {
  if (nmax < 0) throw Error(ErrorCode::InvalidInput, "nmax must be non-negative");
  CorrelationSeries s;
  s.method = CorrelationMethod::Determinant;
  s.precision = t.precision();
  for (int n = 0; n <= nmax; ++n) s.values.push_back(toeplitz_determinant(t, n));
  return s;
}

// Reflection coefficients from bordered determinants:
// r_n = (-1)^n det[w_{j-k-1}] / I_n and rbar_n = (-1)^n det[w_{j-k+1}] / I_n.
struct ReflectionPair {
  std::vector<Real> r, rbar;
};

inline ReflectionPair reflection_from_determinants(const MomentTable& t, int nmax) {
  ReflectionPair out;
  for (int n = 0; n <= nmax; ++n) {
    Real I = toeplitz_determinant(t, n);
    if (I.is_zero()) throw Error(ErrorCode::DivisionByZero, "I_" + std::to_string(n) + " = 0", n);
    int sgn = n % 2 == 0 ? 1 : -1;
    out.r.push_back(sgn * toeplitz_determinant(t, n, -1) / I);
    out.rbar.push_back(sgn * toeplitz_determinant(t, n, 1) / I);
  }
  return out;
}

// |I_{n+1} I_{n-1} / I_n^2 - (1 - r_n rbar_n)| for n = 1 .. min(len(I) - 2, len(r) - 1).
inline std::vector<Real> det_ratio_check(const CorrelationSeries& s, const std::vector<Real>& r,
                                         const std::vector<Real>& rbar) {
  std::vector<Real> out;
  const size_t nr = std::min(r.size(), rbar.size());
  if (s.values.size() < 3 || nr < 2) return out;
  size_t top = std::min(s.values.size() - 2, nr - 1);
  for (size_t n = 1; n <= top; ++n) {
    if (s.values[n].is_zero()) throw Error(ErrorCode::DivisionByZero, "I_" + std::to_string(n) + " = 0", static_cast<int>(n));
    Real lhs = s.values[n + 1] * s.values[n - 1] / (s.values[n] * s.values[n]);
    out.push_back(abs(lhs - (1 - r[n] * rbar[n])));
  }
  return out;
}

}  // namespace tricorr
