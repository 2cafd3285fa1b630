#pragma once

#include <algorithm>
#include <string>
#include <variant>
#include <vector>

#include "tricorr/errors.hpp"
#include "tricorr/params.hpp"
#include "tricorr/real.hpp"

namespace tricorr {

struct TriangularWeight {
  Real a, b, c;
  std::array<Real, 3> v;  // e^{-2K_i}, needed by the linear recurrence
};

struct SquareColumnWeight {
  Real alpha1, alpha2;
};

struct SquareDiagonalWeight {
  Real alpha;
};

using Weight = std::variant<TriangularWeight, SquareColumnWeight, SquareDiagonalWeight>;

inline const char* weight_name(const Weight& w) {
  switch (w.index()) {
    case 0: return "triangular";
    case 1: return "square-column";
    default: return "square-diagonal";
  }
}

inline TriangularWeight triangular_weight(const Couplings& c) {
  Real z1 = tanh(c.k1), z2 = tanh(c.k2), z3 = tanh(c.k3);
  TriangularWeight w;
  w.c = (1 - z1 * z1) * (1 - z2 * z2);
  w.b = z3 * z3 * w.c;
  w.a = 2 * z3 * (1 + z1 * z1) * (1 + z2 * z2) + 4 * z1 * z2 * (1 + z3 * z3);
  w.v = {exp(-2 * c.k1), exp(-2 * c.k2), exp(-2 * c.k3)};
  return w;
}

// Column correlations of the square lattice with horizontal coupling K1 and vertical coupling K2.
inline SquareColumnWeight column_weight(const Real& k1, const Real& k2) {
  Real z1 = tanh(k1), z2 = tanh(k2);
  if (z2.is_zero()) throw Error(ErrorCode::InvalidInput, "column weight needs K2 != 0");
  Real r = (1 - z1) / (1 + z1);
  return {z2 * r, r / z2};
}

inline SquareDiagonalWeight diagonal_weight(const Real& k1, const Real& k2) {
  Real z1 = tanh(k1), z2 = tanh(k2);
  if (z1.is_zero() || z2.is_zero()) throw Error(ErrorCode::InvalidInput, "diagonal weight needs K1, K2 != 0");
  return {(1 - z1 * z1) * (1 - z2 * z2) / (4 * z1 * z2)};
}

inline Real column_modulus(const SquareColumnWeight& w) {
  return (1 - w.alpha1 * w.alpha2) / (w.alpha2 - w.alpha1);
}

// The symbol is N(zeta)/|N(zeta)| on the unit circle; x and y are Re N and Im N at angle theta.
inline void symbol_numerator(const Weight& w, const Real& cs, const Real& sn, Real& x, Real& y) {
  if (auto* t = std::get_if<TriangularWeight>(&w)) {
    x = t->a - (t->b + t->c) * cs;
    y = (t->c - t->b) * sn;
  } else if (auto* col = std::get_if<SquareColumnWeight>(&w)) {
    x = 1 + col->alpha1 * col->alpha2 - (col->alpha1 + col->alpha2) * cs;
    y = -(col->alpha1 - col->alpha2) * sn;
  } else {
    const auto& d = std::get<SquareDiagonalWeight>(w);
    x = 1 - d.alpha * cs;
    y = d.alpha * sn;
  }
}

inline Real symbol_scale(const Weight& w) {
  if (auto* t = std::get_if<TriangularWeight>(&w)) return abs(t->a) + abs(t->b) + abs(t->c);
  if (auto* col = std::get_if<SquareColumnWeight>(&w))
    return (1 + abs(col->alpha1)) * (1 + abs(col->alpha2));
  return 1 + abs(std::get<SquareDiagonalWeight>(w).alpha);
}

// Value of the symbol at zeta = 1 through the same evaluation path as the quadrature.
inline Real symbol_at_one(const Weight& w) {
  Real x, y;
  symbol_numerator(w, Real(1), Real(0), x, y);
  return x / sqrt(x * x + y * y);
}

// Distance of the nearest weight singularity from the unit circle, measured as |log|zeta||.
// This is also the half-width of the analyticity strip of the integrand in theta.
inline Real unit_circle_distance(const Weight& w) {
  std::vector<Real> moduli;
  auto add_quadratic = [&](const Real& p2, const Real& p1, const Real& p0) {
    // roots of p2 z^2 - p1 z + p0
    if (p2.is_zero()) {
      if (!p1.is_zero() && !p0.is_zero()) moduli.push_back(abs(p0 / p1));
      return;
    }
    Real disc = p1 * p1 - 4 * p2 * p0;
    if (disc.sign() < 0) {
      moduli.push_back(sqrt(abs(p0 / p2)));
    } else {
      Real s = sqrt(disc);
      Real r1 = (p1 + s) / (2 * p2), r2 = (p1 - s) / (2 * p2);
      if (!r1.is_zero()) moduli.push_back(abs(r1));
      if (!r2.is_zero()) moduli.push_back(abs(r2));
    }
  };
  if (auto* t = std::get_if<TriangularWeight>(&w)) {
    add_quadratic(t->b, t->a, t->c);
    add_quadratic(t->c, t->a, t->b);
  } else if (auto* col = std::get_if<SquareColumnWeight>(&w)) {
    if (!col->alpha1.is_zero()) moduli.push_back(abs(col->alpha1));
    if (!col->alpha2.is_zero()) moduli.push_back(abs(col->alpha2));
  } else {
    const auto& d = std::get<SquareDiagonalWeight>(w);
    if (!d.alpha.is_zero()) moduli.push_back(abs(d.alpha));
  }
  Real best = Real::pow10(9);
  for (const auto& m : moduli) best = min(best, abs(log(m)));
  return best;
}

enum class MomentSource { Quadrature, LinearRecurrence };
enum class QuadratureScheme { Trapezoid, TanhSinh };

inline const char* to_string(MomentSource s) {
  return s == MomentSource::Quadrature ? "quadrature" : "recurrence";
}
inline const char* to_string(QuadratureScheme s) { return s == QuadratureScheme::Trapezoid ? "trapezoid" : "tanh-sinh"; }

struct QuadratureOptions {
  int guard_digits = 10;
  int min_log2_nodes = 6;
  int max_log2_nodes = 20;
  // Below this strip half-width the periodic trapezoid is replaced by tanh-sinh on [0, pi].
  double tanh_sinh_below = 1e-2;
  int max_tanh_sinh_level = 16;
};

class MomentTable {
 public:
  MomentTable(Weight w, int lo, int precision) : weight_(std::move(w)), lo_(lo), precision_(precision) {}

  const Weight& weight() const { return weight_; }
  int lo() const { return lo_; }
  int hi() const { return lo_ + static_cast<int>(values_.size()) - 1; }
  int size() const { return static_cast<int>(values_.size()); }
  int precision() const { return precision_; }
  QuadratureScheme scheme() const { return scheme_; }
  bool contains(int n) const { return n >= lo_ && n <= hi(); }

  const Real& at(int n) const {
    if (!contains(n))
      throw Error(ErrorCode::MissingMoments,
                  "w_" + std::to_string(n) + " outside window [" + std::to_string(lo_) + "," + std::to_string(hi()) + "]",
                  n);
    return values_[static_cast<size_t>(n - lo_)];
  }
  MomentSource source(int n) const {
    at(n);
    return sources_[static_cast<size_t>(n - lo_)];
  }

  void push_back(Real v, MomentSource s) {
    values_.push_back(std::move(v));
    sources_.push_back(s);
  }
  void push_front(Real v, MomentSource s) {
    values_.insert(values_.begin(), std::move(v));
    sources_.insert(sources_.begin(), s);
    --lo_;
  }
  void set(int n, Real v) { values_.at(static_cast<size_t>(n - lo_)) = std::move(v); }
  void set_scheme(QuadratureScheme s) { scheme_ = s; }

 private:
  Weight weight_;
  int lo_;
  int precision_;
  QuadratureScheme scheme_ = QuadratureScheme::Trapezoid;
  std::vector<Real> values_;
  std::vector<MomentSource> sources_;
};

namespace detail {

// Adds f_n(theta) * weight into acc[n - lo] for all n in the window, with
// f_n = (x cos n theta + y sin n theta) / |N|.
inline void accumulate_node(const Weight& w, const Real& cs, const Real& sn, const Real& theta, const Real& weight,
                            int lo, std::vector<Real>& acc, const Real& radicand_floor) {
  Real x, y;
  symbol_numerator(w, cs, sn, x, y);
  Real rad = x * x + y * y;
  if (rad <= radicand_floor) {
    throw Error(ErrorCode::DenominatorVanishes,
                "radicand " + rad.str(6) + " at theta = " + theta.str(20) + " (critical circle)");
  }
  Real inv = weight / sqrt(rad);
  x = x * inv;
  y = y * inv;
  // cos(n theta), sin(n theta) by rotation, starting from n = lo.
  Real c = cos(lo * theta), s = sin(lo * theta);
  for (size_t k = 0; k < acc.size(); ++k) {
    acc[k] += x * c + y * s;
    Real c2 = c * cs - s * sn;
    s = s * cs + c * sn;
    c = std::move(c2);
  }
}

inline bool converged(const std::vector<Real>& a, const std::vector<Real>& b, const Real& tol) {
  for (size_t k = 0; k < a.size(); ++k)
    if (abs(a[k] - b[k]) > tol) return false;
  return true;
}

inline std::vector<Real> trapezoid_window(const Weight& w, int lo, int hi, int target_digits,
                                          const QuadratureOptions& opt) {
  const size_t count = static_cast<size_t>(hi - lo + 1);
  Real scale = symbol_scale(w);
  Real floor = Real::pow10(-(target_digits - opt.guard_digits) / 2) * scale * scale;
  Real tol = Real::pow10(-target_digits);
  Real pi = Real::pi();
  // The integrand is even in theta, so sum over [0, pi] with end weights 1 and interior weights 2.
  std::vector<Real> acc(count, Real(0));
  long M = 1L << opt.min_log2_nodes;
  for (long k = 0; k <= M / 2; ++k) {
    Real theta = 2 * pi * Real(k) / Real(M);
    Real cs, sn;
    sin_cos(theta, sn, cs);
    Real wt = (k == 0 || k == M / 2) ? Real(1) : Real(2);
    accumulate_node(w, cs, sn, theta, wt, lo, acc, floor);
  }
  std::vector<Real> est(count);
  for (size_t k = 0; k < count; ++k) est[k] = acc[k] / Real(M);
  for (int level = opt.min_log2_nodes + 1; level <= opt.max_log2_nodes; ++level) {
    long M2 = 2 * M;
    for (long j = 0; j < M / 2; ++j) {
      Real theta = 2 * pi * Real(2 * j + 1) / Real(M2);
      Real cs, sn;
      sin_cos(theta, sn, cs);
      accumulate_node(w, cs, sn, theta, Real(2), lo, acc, floor);
    }
    M = M2;
    std::vector<Real> next(count);
    for (size_t k = 0; k < count; ++k) next[k] = acc[k] / Real(M);
    bool done = converged(next, est, tol);
    est = std::move(next);
    if (done) return est;
  }
  throw Error(ErrorCode::NoConvergence, "trapezoid did not converge with 2^" + std::to_string(opt.max_log2_nodes) + " nodes");
}

// Tanh-sinh on [0, pi]; handles radicands that vanish at theta = 0 or pi (Curie and Neel circles).
inline std::vector<Real> tanh_sinh_window(const Weight& w, int lo, int hi, int target_digits,
                                          const QuadratureOptions& opt) {
  const size_t count = static_cast<size_t>(hi - lo + 1);
  Real tol = Real::pow10(-target_digits);
  Real tiny = Real::pow10(-(working_digits() + 5));
  Real pi = Real::pi();
  Real half_pi = pi / 2;
  Real zero(0);

  // Node at parameter t >= 0 contributes two symmetric points (one point when t = 0).
  auto add_pair = [&](const Real& t, const Real& weight_factor, std::vector<Real>& acc) -> bool {
    Real u = half_pi * sinh(t);
    Real ch = cosh(u);
    Real jac = half_pi * half_pi * cosh(t) / (ch * ch);
    if (jac < tiny) return false;
    Real wt = jac * weight_factor;
    if (t.is_zero()) {
      accumulate_node(w, Real(0), Real(1), half_pi, wt, lo, acc, zero);
      return true;
    }
    // distance of the nodes from the endpoints, without cancellation
    Real eps = half_pi * 2 / (exp(2 * u) + 1);
    Real ce, se;
    sin_cos(eps, se, ce);
    accumulate_node(w, ce, se, eps, wt, lo, acc, zero);
    accumulate_node(w, -ce, se, pi - eps, wt, lo, acc, zero);
    return true;
  };

  std::vector<Real> acc(count, Real(0));
  Real h(1);
  add_pair(Real(0), Real(1), acc);
  for (int j = 1;; ++j)
    if (!add_pair(h * j, Real(1), acc)) break;
  std::vector<Real> est(count);
  for (size_t k = 0; k < count; ++k) est[k] = acc[k] * h / pi;
  for (int level = 1; level <= opt.max_tanh_sinh_level; ++level) {
    h = h / 2;
    for (long j = 1;; j += 2)
      if (!add_pair(h * Real(j), Real(1), acc)) break;
    std::vector<Real> next(count);
    for (size_t k = 0; k < count; ++k) next[k] = acc[k] * h / pi;
    bool done = level >= 3 && converged(next, est, tol);
    est = std::move(next);
    if (done) return est;
  }
  throw Error(ErrorCode::NoConvergence, "tanh-sinh did not converge by level " + std::to_string(opt.max_tanh_sinh_level));
}

}  // namespace detail

inline QuadratureScheme choose_scheme(const Weight& w, const QuadratureOptions& opt = {}) {
  return unit_circle_distance(w) < Real(opt.tanh_sinh_below) ? QuadratureScheme::TanhSinh : QuadratureScheme::Trapezoid;
}

// Moments w_lo..w_hi, computed at digits + guard and reported as precision `digits`.
inline MomentTable moment_window(const Weight& w, int lo, int hi, int digits, const QuadratureOptions& opt = {}) {
  if (lo > hi) throw Error(ErrorCode::InvalidInput, "empty moment window");
  int target = digits + opt.guard_digits;
  PrecisionScope scope(target + 5);
  if (auto* d = std::get_if<SquareDiagonalWeight>(&w); d && d->alpha.is_zero()) {
    MomentTable t(w, lo, digits);
    for (int n = lo; n <= hi; ++n) t.push_back(Real(n == 0 ? 1 : 0), MomentSource::Quadrature);
    return t;
  }
  QuadratureScheme scheme = choose_scheme(w, opt);
  std::vector<Real> vals = scheme == QuadratureScheme::Trapezoid ? detail::trapezoid_window(w, lo, hi, target, opt)
                                                                 : detail::tanh_sinh_window(w, lo, hi, target, opt);
  MomentTable t(w, lo, digits);
  t.set_scheme(scheme);
  for (auto& v : vals) t.push_back(std::move(v), MomentSource::Quadrature);
  return t;
}

inline Real moment_quadrature(const Weight& w, int n, int digits, const QuadratureOptions& opt = {}) {
  return moment_window(w, n, n, digits, opt).at(n);
}

// One linear relation sum_j coeffs[j] * w_{first + j} = 0.
struct RecurrenceRow {
  int first;
  std::vector<Real> coeffs;
};

// Relation of the linear recurrence labelled by p.
inline RecurrenceRow recurrence_row(const Weight& w, int p) {
  if (auto* t = std::get_if<TriangularWeight>(&w)) {
    const Real &v1 = t->v[0], &v2 = t->v[1], &v3 = t->v[2];
    Real V = v1 * v2, v1s = v1 * v1, v2s = v2 * v2, v3s = v3 * v3, Vs = V * V;
    Real g = 1 + Vs - (v1s + v2s) * v3s;
    Real lead = Vs * (1 - v3s) * (1 - v3s);
    Real mid = (p - 1) * (v1s * v1s + 4 * Vs + v2s * v2s) * v3s * v3s -
               2 * (p - 1) * (v1s + v2s - 6 * Vs + v1s * v1s * v2s + v1s * v2s * v2s) * v3s +
               (p - 1) * (1 + 4 * Vs + Vs * Vs) + 8 * Vs * v3 * (1 + v3s);
    return {p - 3,
            {(p - 3) * lead, -2 * V * g * (v3 + (p - 2) * (1 + v3s)), mid, -2 * V * g * (v3 + p * (1 + v3s)),
             (p + 1) * lead}};
  }
  if (auto* c = std::get_if<SquareColumnWeight>(&w)) {
    const Real &a1 = c->alpha1, &a2 = c->alpha2;
    Real A = a1 * a2;
    return {p - 3,
            {2 * A * (p - 3), -(1 + A) * ((2 * p - 5) * a1 + (2 * p - 3) * a2),
             2 * ((p - 2) * a1 * a1 + p * a2 * a2 + (p - 1) * (1 + A) * (1 + A)),
             -(1 + A) * ((2 * p - 1) * a1 + (2 * p + 1) * a2), 2 * A * (p + 1)}};
  }
  const Real& al = std::get<SquareDiagonalWeight>(w).alpha;
  return {p - 2, {al * (2 * p - 3), -2 * ((al * al + 1) * p - 1), al * (2 * p + 1)}};
}

inline int recurrence_order(const Weight& w) { return std::holds_alternative<SquareDiagonalWeight>(w) ? 2 : 4; }

// Residual of relation p divided by the sum of the magnitudes of its terms.
inline Real recurrence_residual(const MomentTable& t, int p) {
  RecurrenceRow row = recurrence_row(t.weight(), p);
  Real sum(0), mag(0);
  for (size_t j = 0; j < row.coeffs.size(); ++j) {
    if (row.coeffs[j].is_zero()) continue;
    Real term = row.coeffs[j] * t.at(row.first + static_cast<int>(j));
    sum += term;
    mag += abs(term);
  }
  return mag.is_zero() ? Real(0) : abs(sum) / mag;
}

namespace detail {

inline Real solve_row(const MomentTable& t, const RecurrenceRow& row, size_t target) {
  int index = row.first + static_cast<int>(target);
  if (index == 0) {
    if (std::holds_alternative<SquareDiagonalWeight>(t.weight()))
      throw Error(ErrorCode::MissingMoments, "w_0 is a normalisation and is never produced by recurrence", 0);
    throw Error(ErrorCode::OrderDropIndex, "the recurrence drops w_0 at this index; w_0 must come from quadrature", 0);
  }
  if (row.coeffs[target].is_zero())
    throw Error(ErrorCode::LeadingCoefficientZero, "vanishing coefficient of w_" + std::to_string(index), index);
  Real sum(0);
  for (size_t j = 0; j < row.coeffs.size(); ++j) {
    if (j == target || row.coeffs[j].is_zero()) continue;
    sum += row.coeffs[j] * t.at(row.first + static_cast<int>(j));
  }
  return -sum / row.coeffs[target];
}

}  // namespace detail

// Extends the window to [new_lo, new_hi] by solving the linear recurrence for the outermost index.
inline MomentTable extend_by_recurrence(const MomentTable& t, int new_lo, int new_hi) {
  if (t.size() < recurrence_order(t.weight()) && !(new_lo >= t.lo() && new_hi <= t.hi()))
    throw Error(ErrorCode::WindowTooSmall, "need " + std::to_string(recurrence_order(t.weight())) +
                                               " contiguous moments to extend, have " + std::to_string(t.size()));
  PrecisionScope scope(t.precision() + 15);
  MomentTable out = t;
  const int K = recurrence_order(t.weight());
  for (int m = t.hi() + 1; m <= new_hi; ++m) {
    RecurrenceRow row = recurrence_row(t.weight(), K == 4 ? m - 1 : m);
    out.push_back(detail::solve_row(out, row, static_cast<size_t>(K)), MomentSource::LinearRecurrence);
  }
  for (int m = t.lo() - 1; m >= new_lo; --m) {
    RecurrenceRow row = recurrence_row(t.weight(), K == 4 ? m + 3 : m + 2);
    out.push_front(detail::solve_row(out, row, 0), MomentSource::LinearRecurrence);
  }
  return out;
}

}  // namespace tricorr
