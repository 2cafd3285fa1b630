#pragma once

#include <array>
#include <cmath>
#include <future>
#include <optional>
#include <string>
#include <vector>

#include "tricorr/errors.hpp"
#include "tricorr/garnier.hpp"
#include "tricorr/moments.hpp"
#include "tricorr/params.hpp"
#include "tricorr/real.hpp"
#include "tricorr/toeplitz.hpp"

namespace tricorr {

struct ColumnParams {
  Real alpha1, alpha2, k;

  static ColumnParams from_alphas(const Real& a1, const Real& a2) {
    return {a1, a2, column_modulus({a1, a2})};
  }
  static ColumnParams from_couplings(const Real& k1, const Real& k2) {
    SquareColumnWeight w = column_weight(k1, k2);
    return from_alphas(w.alpha1, w.alpha2);
  }
  SquareColumnWeight weight() const { return {alpha1, alpha2}; }
  // (zeta_1, zeta_2, zeta_3, zeta_4) = (1/alpha1, alpha2, 1/alpha2, alpha1).
  std::array<Real, 4> singular_points() const { return {1 / alpha1, alpha2, 1 / alpha2, alpha1}; }
  // The ordering of the singular points that holds on either side of k = 1.
  bool ordering_holds() const {
    Real one(1);
    if (k > 1) return alpha1.sign() > 0 && alpha1 <= alpha2 && alpha2 <= one;
    return alpha1.sign() > 0 && alpha1 <= 1 / alpha2 && 1 / alpha2 <= one;
  }
};

// Column-correlation specialisation of the Lax-pair system, real arithmetic throughout.
class ColumnSystem {
 public:
  using scalar_type = Real;

  explicit ColumnSystem(const ColumnParams& p, std::optional<Real> tol_guard = std::nullopt)
      : a1_(p.alpha1), a2_(p.alpha2), A_(p.alpha1 * p.alpha2), tol_(tol_guard ? *tol_guard : default_tol_guard()) {
    if (a1_.is_zero() || a2_.is_zero()) throw Error(ErrorCode::InvalidInput, "alpha1, alpha2 must be nonzero");
  }

  const Real& tol_guard() const { return tol_; }

  GarnierState<Real> init_state(const MomentTable& t) const {
    for (int n = -2; n <= 2; ++n)
      if (!t.contains(n)) throw Error(ErrorCode::MissingMoments, "initial values need w_-2 .. w_2", n);
    const Real &wm2 = t.at(-2), &wm1 = t.at(-1), &w0 = t.at(0), &w1 = t.at(1), &w2 = t.at(2);
    const Real &a1 = a1_, &a2 = a2_, &A = A_;
    Real den = 4 * a1 * a2 * a2 * wm2 - a2 * (3 * a1 + a2 + A * (3 * a1 - a2)) * wm1 + (a1 - a2) * (1 + A) * w0 +
               2 * A * w1;
    Real den1 = 4 * a1 * a2 * a2 * wm2 - a2 * (a2 * (1 + 3 * a1 * a1) + a1 * (3 - a2 * a2)) * wm1 +
                (a1 * (1 - a2 * a2) - a2 * (1 - a1 * a1)) * w0 + 2 * A * w1;
    Real scale = abs(wm2) + abs(wm1) + abs(w0) + abs(w1);
    detail::guard(den, scale, tol_, ErrorCode::InitDenominatorZero, "f2/f3 initial denominator", 0, "");
    detail::guard(den1, scale, tol_, ErrorCode::InitDenominatorZero, "f1 initial denominator", 0, "");
    if (w0.is_zero() || wm1.is_zero())
      throw Error(ErrorCode::InitDenominatorZero, "g-initial values divide by w_0 and w_-1", 0);
    GarnierState<Real> s;
    s.f[0] = a1 / a2 *
             (4 * a1 * a1 * a2 * wm2 - a1 * (a2 * (1 + a1 * a1) + a1 * (3 + a2 * a2)) * wm1 -
              (a2 * (1 - a1 * a1) - a1 * (1 - a2 * a2)) * w0 + 2 * A * w1) /
             den1;
    s.f[1] = 1 / (a2 * a2 * a2) *
             (4 * A * wm2 - (a1 + a2 + A * (3 * a1 + a2)) * wm1 + a2 * (a1 - a2) * (1 + A) * w0 + 2 * a1 * a2 * a2 * w1) /
             den;
    s.f[2] = 1 / (a1 * a1 * a2) *
             (4 * A * wm2 - (3 * a1 - a2 + A * (3 * a1 + a2)) * wm1 + a1 * (a1 - a2) * (1 + A) * w0 +
              2 * a1 * a1 * a2 * w1) /
             den;
    s.g[0] = -((a1 * (1 - a2 * a2) - a2 * (1 - a1 * a1)) * w0 + 2 * A * w1) / (2 * A * w0);
    s.g[1] = (2 * (a1 * a1 - a2 * a2) * wm1 * w0 + (a1 + 3 * a2) * (1 + A) * wm1 * w1 - 4 * A * wm1 * w2 +
              (a1 - a2) * (1 + A) * w0 * w0 + 2 * A * w0 * w1) /
             (2 * A * wm1 * w0);
    s.g[2] = (4 * A * wm2 * w0 - 2 * A * wm1 * wm1 - (a1 * (3 + a2 * a2) + a2 * (1 + 3 * a1 * a1)) * w0 * wm1) /
             (2 * A * wm1 * w0);
    return s;
  }

  // L, M, P, Q: the f-linear combinations of the second Lax pair (L and M must not vanish).
  std::array<Real, 4> LMPQ(const std::array<Real, 3>& f, std::array<Real, 4>* scales = nullptr) const {
    const Real &a1 = a1_, &a2 = a2_;
    const Real &f1 = f[0], &f2 = f[1], &f3 = f[2];
    Real o1 = 1 - a1 * a1, o2 = 1 - a2 * a2;
    Real a1s = a1 * a1, a2s = a2 * a2;
    Real u = 1 + a1 * (a1 + a2), u2 = 1 + a2 * (a1 + a2);
    Real p = a1 + a2 * (1 + a1s), p2 = a2 + a1 * (1 + a2s);
    std::array<std::array<Real, 4>, 4> terms = {{
        {o1, -o1 * a2s * f2, -o2 * f1, o2 * a1s * f3},
        {a1 * o1, -a1 * o1 * a2s * a2s * f2, -a2 * o2 * f1, a2 * o2 * a1s * a1s * f3},
        {o1 * u, -o1 * p * a2s * a2 * f2, -o2 * u2 * f1, o2 * p2 * a1s * a1 * f3},
        {o1 * p, -o1 * u * a2s * a2 * f2, -o2 * p2 * f1, o2 * u2 * a1s * a1 * f3},
    }};
    std::array<Real, 4> out;
    for (int i = 0; i < 4; ++i) {
      out[i] = terms[i][0] + terms[i][1] + terms[i][2] + terms[i][3];
      if (scales) (*scales)[i] = abs(terms[i][0]) + abs(terms[i][1]) + abs(terms[i][2]) + abs(terms[i][3]);
    }
    return out;
  }

  std::array<Real, 3> step_f(const GarnierState<Real>& s) const {
    const int n = s.n;
    const Real &a1 = a1_, &a2 = a2_;
    const auto& g = s.g;
    const std::string ctx = snapshot(s);
    auto X = [&](const Real& a) { return a * g[0] + a * a * g[1] + a * a * a * g[2]; };
    auto Y = [&](const Real& a) { return a * a * a * g[0] + a * a * g[1] + a * g[2]; };
    Real half = Real(1) / 2, three_half = Real(3) / 2;
    Real a14 = pow(a1, 4), a24 = pow(a2, 4);
    Real x2 = X(a2);
    Real scale = abs(a2 * g[0]) + abs(a2 * a2 * g[1]) + abs(a2 * a2 * a2 * g[2]) + a24 + Real(n) + 1;
    Real d1 = x2 + a24 - n;
    Real d2 = x2 - n + half + a24 / 2 - a2 / (2 * a1) * (1 + a1 * a1) * (1 - a2 * a2);
    detail::guard(d1, scale, tol_, ErrorCode::GuardBracketZero, "bracket [X(alpha2) + alpha2^4 - n]", n, ctx);
    detail::guard(d2, scale, tol_, ErrorCode::GuardBracketZero, "shifted bracket of X(alpha2)", n, ctx);
    for (int j = 0; j < 3; ++j)
      detail::guard(s.f[j], Real(1), tol_, ErrorCode::ZeroF, "f" + std::to_string(j + 1), n, ctx);
    Real dd = d1 * d2;
    Real x1 = X(a1), y1 = Y(a1), y2 = Y(a2);
    std::array<Real, 3> out;
    out[0] = (x1 + a14 - n) * (x1 - n - half + three_half * a14 + a1 / (2 * a2) * (1 - a1 * a1) * (1 + a2 * a2)) / dd /
             (a1 / a2 * s.f[0]);
    out[1] = (y2 - n * a24 + 1) * (y2 - (n + half) * a24 + three_half - a2 / (2 * a1) * (1 + a1 * a1) * (1 - a2 * a2)) /
             dd / (pow(a2, 6) * s.f[1]);
    out[2] = (y1 - n * a14 + 1) * (y1 - (n - half) * a14 + half + a1 / (2 * a2) * (1 - a1 * a1) * (1 + a2 * a2)) / dd /
             (pow(a1, 7) / a2 * s.f[2]);
    return out;
  }

  std::array<Real, 3> step_g(const std::array<Real, 3>& f_next, const GarnierState<Real>& s) const {
    const int n = s.n + 1;
    std::array<Real, 4> sc;
    auto [L, M, P, Q] = LMPQ(f_next, &sc);
    GarnierState<Real> probe{n, f_next, s.g};
    const std::string ctx = snapshot(probe);
    detail::guard(L, sc[0], tol_, ErrorCode::GuardSZero, "L", n, ctx);
    detail::guard(M, sc[1], tol_, ErrorCode::GuardSZero, "M", n, ctx);
    const Real &a1 = a1_, &a2 = a2_, &A = A_;
    Real br = (1 + A) / (2 * A) * ((2 * n - 3) * a1 + (2 * n - 1) * a2);
    std::array<Real, 3> g;
    g[0] = -s.g[0] + br - (n + 1) / A * M / L + n * P / M;
    g[1] = -s.g[1] - (a2 * a2 - a1 * a1) / A - (n - 1) / A * (a1 * a1 + a2 * a2 + (1 + A) * (1 + A)) - n * Q / M +
           (n + 1) / A * P / L;
    g[2] = -s.g[2] + br + A * n * L / M - (n + 1) / A * Q / L;
    return g;
  }

  RecoveryIncrement<Real> recover(const GarnierState<Real>& s, const Real& lam_n, const Real& lamb_n,
                                  const Real& r_n) const {
    const int n = s.n;
    std::array<Real, 4> sc;
    auto [L, M, P, Q] = LMPQ(s.f, &sc);
    detail::guard(L, sc[0], tol_, ErrorCode::GuardSZero, "L", n, snapshot(s));
    // M vanishes identically at n = 0, where it only appears as a numerator.
    if (n > 0) detail::guard(M, sc[1], tol_, ErrorCode::GuardSZero, "M", n, snapshot(s));
    (void)P;
    const Real &a1 = a1_, &a2 = a2_, &A = A_;
    Real lam = (n * lam_n + s.g[2] - (a1 + a2) * (1 + A) / A * n + (n + 1) / A * Q / L) / (n + 1);
    Real r = n == 0 ? lam - lam_n : r_n * A * n / (n + 1) * L / M;
    Real lamb = (n * lamb_n + s.g[0] - (1 + A) / (2 * A) * ((2 * n - 1) * a1 + (2 * n + 1) * a2) + (n + 1) / A * M / L) /
                (n + 1);
    return {lam, r, lamb};
  }

 private:
  Real a1_, a2_, A_;
  Real tol_;
};

struct DPVState {
  int n = 0;
  Real alpha, f, g;
};

struct DPVRun {
  std::vector<DPVState> states;
  std::vector<Real> I, r, rbar, lambda;
};

// Square-lattice diagonal limit: the discrete Painleve V pair in (f_n, g_n).
class DPVSystem {
 public:
  explicit DPVSystem(const Real& alpha, std::optional<Real> tol_guard = std::nullopt)
      : al_(alpha), tol_(tol_guard ? *tol_guard : default_tol_guard()) {
    if (alpha.is_zero())
      throw Error(ErrorCode::InvalidInput, "alpha = 0 is the frozen (T = 0) weight; the determinant gives I_n = 1");
  }

  DPVState init_state(const MomentTable& t) const {
    const Real &wm1 = t.at(-1), &w0 = t.at(0);
    Real den = al_ * wm1 + w0;
    detail::guard(den, abs(al_ * wm1) + abs(w0), tol_, ErrorCode::InitDenominatorZero, "alpha w_-1 + w_0", 0, "");
    if (wm1.is_zero() || w0.is_zero()) throw Error(ErrorCode::InitDenominatorZero, "g_0 divides by w_-1 and w_0", 0);
    return {0, al_, al_ * (wm1 + al_ * w0) / den, (wm1 / w0 - w0 / wm1) / 2};
  }

  DPVState step(const DPVState& s) const {
    const int m = s.n;
    const int n = m + 1;
    const Real& a = al_;
    Real half = Real(1) / 2;
    Real inv = 1 / a;
    std::string ctx = "n=" + std::to_string(m) + " f=" + s.f.str(12) + " g=" + s.g.str(12);
    Real scale = abs(s.g) + (m + 1) * (abs(a) + abs(inv));
    Real b1 = s.g + m * inv;
    Real b2 = s.g + (m + half) * inv - half * a;
    detail::guard(b1, scale, tol_, ErrorCode::GuardBracketZero, "g_n + n/alpha", m, ctx);
    detail::guard(b2, scale, tol_, ErrorCode::GuardBracketZero, "g_n + (n+1/2)/alpha - alpha/2", m, ctx);
    detail::guard(s.f, Real(1), tol_, ErrorCode::ZeroF, "f", m, ctx);
    Real f = a * a * (s.g + n * a - inv) * (s.g + (n - half) * a - half * inv) / (b1 * b2) / s.f;
    Real one_minus = 1 - f, a2_minus = a * a - f;
    detail::guard(one_minus, Real(1) + abs(f), tol_, ErrorCode::GuardBracketZero, "1 - f_n", n, ctx);
    detail::guard(a2_minus, abs(a * a) + abs(f), tol_, ErrorCode::GuardBracketZero, "alpha^2 - f_n", n, ctx);
    Real g = -s.g - 2 * n * inv + (a + inv) / 2 - (n + half) * (a * a - 1) * inv / one_minus -
             (n + half) * a * (a * a - 1) / a2_minus;
    return {n, a, f, g};
  }

  DPVRun iterate(const MomentTable& t, int nmax) const {
    DPVRun run;
    Real half = Real(1) / 2;
    const Real& a = al_;
    run.r = {Real(1)};
    run.rbar = {Real(1)};
    run.lambda = {Real(0)};
    run.I = {Real(1), t.at(0)};
    DPVState s = init_state(t);
    for (int n = 0; n <= nmax; ++n) {
      if (n > 0) s = step(s);
      run.states.push_back(s);
      std::string ctx = "n=" + std::to_string(n) + " f=" + s.f.str(12);
      Real one_minus = 1 - s.f;
      Real q = a - s.f / a;
      detail::guard(one_minus, Real(1) + abs(s.f), tol_, ErrorCode::GuardBracketZero, "1 - f_n (r-ratio pole)", n, ctx);
      detail::guard(q, abs(a) + abs(s.f / a), tol_, ErrorCode::GuardBracketZero, "alpha - f_n/alpha", n, ctx);
      run.r.push_back(run.r[static_cast<size_t>(n)] * q / one_minus);
      run.lambda.push_back(((n - half) * run.lambda[static_cast<size_t>(n)] - n * (a + 1 / a) - s.g +
                            (n + half) * one_minus / q) /
                           (n + half));
      if (n > 0) {
        size_t k = static_cast<size_t>(n);
        if (run.r[k + 1].is_zero()) throw Error(ErrorCode::DivisionByZero, "r_" + std::to_string(n + 1) + " = 0", n + 1);
        run.rbar.push_back((run.lambda[k + 1] - run.lambda[k]) / run.r[k + 1]);
        run.I.push_back(run.I[k] * run.I[k] * (1 - run.r[k] * run.rbar[k]) / run.I[k - 1]);
      }
    }
    return run;
  }

 private:
  Real al_;
  Real tol_;
};

// Column correlations by the Lax-pair recurrences with the determinant as the reference.
inline GarnierReport column_correlations(const ColumnParams& p, int nmax, int digits, const GarnierOptions& opt = {}) {
  if (nmax < 0) throw Error(ErrorCode::InvalidInput, "nmax must be non-negative");
  GarnierReport rep;
  rep.regime = p.k > 1 ? Regime::FerroOrdered : Regime::FerroDisordered;
  detail::escalate(digits, nmax, opt, rep, [&](int prec) {
    std::optional<Real> tol;
    if (opt.tol_guard) tol = Real(*opt.tol_guard);
    ColumnSystem sys(p, tol);
    int span = std::max(nmax, 2);
    MomentTable t = moment_window(p.weight(), -span, span, prec, opt.quad);
    if (opt.moment_hook) opt.moment_hook(t);
    rep.determinant = determinant_series(t, nmax);
    GarnierRun<Real> run = iterate(sys, t, nmax);
    rep.garnier = CorrelationSeries{{}, CorrelationMethod::ColumnRecovery, prec};
    rep.r.clear();
    rep.rbar.clear();
    rep.rbar_dual.clear();
    for (int n = 0; n <= nmax; ++n) {
      const auto& st = run.recovery[static_cast<size_t>(n)];
      rep.garnier.values.push_back(st.I);
      rep.r.push_back(st.r);
      rep.rbar.push_back(st.rbar);
      rep.rbar_dual.push_back(run.rbar_dual[static_cast<size_t>(n)]);
    }
    rep.max_rbar_gap = rbar_route_gap(run);
    rep.max_imag = Real(0);
  });
  return rep;
}

// Square-lattice diagonal correlations by the dPV recurrences, alpha = 1/k.
inline GarnierReport dpv_correlations(const Real& alpha, int nmax, int digits, const GarnierOptions& opt = {}) {
  if (nmax < 0) throw Error(ErrorCode::InvalidInput, "nmax must be non-negative");
  GarnierReport rep;
  rep.regime = abs(alpha) < 1 ? Regime::FerroOrdered : Regime::FerroDisordered;
  detail::escalate(digits, nmax, opt, rep, [&](int prec) {
    std::optional<Real> tol;
    if (opt.tol_guard) tol = Real(*opt.tol_guard);
    DPVSystem sys(alpha, tol);
    int span = std::max(nmax, 1);
    MomentTable t = moment_window(SquareDiagonalWeight{alpha}, -span, span, prec, opt.quad);
    if (opt.moment_hook) opt.moment_hook(t);
    rep.determinant = determinant_series(t, nmax);
    DPVRun run = sys.iterate(t, nmax);
    rep.garnier = CorrelationSeries{{}, CorrelationMethod::DPVRecovery, prec};
    rep.garnier.values.assign(run.I.begin(), run.I.begin() + nmax + 1);
    rep.r.assign(run.r.begin(), run.r.begin() + nmax + 1);
    rep.rbar.assign(run.rbar.begin(), run.rbar.begin() + nmax + 1);
    rep.rbar_dual.clear();
    rep.max_rbar_gap = Real(0);
    rep.max_imag = Real(0);
  });
  return rep;
}

inline Real diagonal_alpha(const Real& k1, const Real& k2) { return diagonal_weight(k1, k2).alpha; }

struct LimitReport {
  std::vector<Real> k3;  // the small parameter of the sweep
  std::vector<std::vector<Real>> diff;  // |I_n(tri, k3) - I_n(dpv)| for n = 0..nmax
  std::vector<Real> max_diff;
  std::vector<int> precision_used;
  double order = 0;  // least-squares slope of log max_diff against log k3
};

namespace detail {

// Runs the triangular engine at each small parameter x (couplings built by make(x)) against fixed
// reference values and fits the decay order of the largest difference.
template <class Make>
LimitReport limit_sweep(const std::vector<Real>& reference, const std::vector<Real>& xs, Make&& make, int nmax,
                        int digits, const GarnierOptions& opt) {
  LimitReport rep;
  for (const Real& x : xs) {
    GarnierReport tri = garnier_correlations(make(x), nmax, digits, opt);
    if (!tri.converged)
      throw Error(ErrorCode::PrecisionExhausted,
                  "triangular route at " + x.str(6) + " did not reach the determinant within escalation");
    PrecisionScope scope(digits + opt.guard_digits);
    std::vector<Real> row;
    Real mx(0);
    for (int n = 0; n <= nmax; ++n) {
      row.push_back(abs(tri.garnier.values[static_cast<size_t>(n)] - reference[static_cast<size_t>(n)]));
      mx = max(mx, row.back());
    }
    rep.k3.push_back(x);
    rep.diff.push_back(row);
    rep.max_diff.push_back(mx);
    rep.precision_used.push_back(tri.attempts.back().precision);
  }
  if (rep.k3.size() >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = static_cast<double>(rep.k3.size());
    for (size_t i = 0; i < rep.k3.size(); ++i) {
      double lx = std::log(std::fabs(rep.k3[i].to_double()));
      double ly = std::log(rep.max_diff[i].to_double());
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
    }
    rep.order = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  }
  return rep;
}

}  // namespace detail

// Triangular engine at small k3 against the dPV values at k3 = 0 with the same K1, K2.
inline LimitReport triangular_limit_check(const Real& k1, const Real& k2, const std::vector<Real>& k3s, int nmax,
                                          int digits, const GarnierOptions& opt = {}) {
  std::vector<Real> dpv;
  {
    PrecisionScope scope(digits + opt.guard_digits);
    GarnierReport d = dpv_correlations(diagonal_alpha(k1, k2), nmax, digits, opt);
    if (!d.converged) throw Error(ErrorCode::PrecisionExhausted, "dPV route did not match its determinant");
    dpv = d.garnier.values;
  }
  return detail::limit_sweep(dpv, k3s, [&](const Real& k3) { return Couplings{k1, k2, k3}; }, nmax, digits, opt);
}

// Column correlations at (K1, K2) against the triangular engine at (K1, atanh z, K2) for small z:
// switching off the middle coupling leaves a square lattice whose diagonal is a column.
inline LimitReport column_limit_check(const Real& k1, const Real& k2, const std::vector<Real>& zs, int nmax,
                                      int digits, const GarnierOptions& opt = {}) {
  std::vector<Real> col;
  {
    PrecisionScope scope(digits + opt.guard_digits);
    GarnierReport c = column_correlations(ColumnParams::from_couplings(k1, k2), nmax, digits, opt);
    if (!c.converged) throw Error(ErrorCode::PrecisionExhausted, "column route did not match its determinant");
    col = c.garnier.values;
  }
  return detail::limit_sweep(col, zs, [&](const Real& z) { return Couplings{k1, atanh(z), k2}; }, nmax, digits, opt);
}

// I_N(t) for the square-lattice diagonal weight with t = alpha^2 = k^{-2}, by the determinant route.
inline Real diagonal_correlation(int N, const Real& t, int digits, const QuadratureOptions& quad = {}) {
  if (t.sign() <= 0) throw Error(ErrorCode::InvalidInput, "t must be positive");
  if (N == 0) return Real(1);
  MomentTable tab = moment_window(SquareDiagonalWeight{sqrt(t)}, -(N - 1), N - 1, digits, quad);
  return toeplitz_determinant(tab, N);
}

struct SigmaReport {
  int N = 0;
  Real t, h;
  Real sigma, dsigma, d2sigma;
  Real residual;             // with Richardson-extrapolated derivatives (steps h and h/2)
  Real residual_plain;       // with the step-h/2 fourth-order differences alone
};

namespace detail {

struct Derivs {
  Real d1, d2, d3;
};

// Fourth-order central differences on a 7-point stencil.
inline Derivs central_derivs(const std::array<Real, 7>& L, const Real& h) {
  Real eighth = Real(1) / 8;
  Derivs d;
  d.d1 = (L[1] - 8 * L[2] + 8 * L[4] - L[5]) / (12 * h);
  d.d2 = (-L[1] + 16 * L[2] - 30 * L[3] + 16 * L[4] - L[5]) / (12 * h * h);
  d.d3 = (eighth * L[0] - L[1] + 13 * eighth * L[2] - 13 * eighth * L[4] + L[5] - eighth * L[6]) / (h * h * h);
  return d;
}

inline Real sigma_residual(int N, const Real& t, const Derivs& d, SigmaReport* out = nullptr) {
  Real quarter = Real(1) / 4;
  Real s = t * (t - 1) * d.d1 - quarter * t;
  Real s1 = (2 * t - 1) * d.d1 + t * (t - 1) * d.d2 - quarter;
  Real s2 = 2 * d.d1 + 2 * (2 * t - 1) * d.d2 + t * (t - 1) * d.d3;
  if (out) {
    out->sigma = s;
    out->dsigma = s1;
    out->d2sigma = s2;
  }
  Real lhs = t * (t - 1) * s2;
  Real a = (t - 1) * s1 - s;
  return abs(lhs * lhs - N * N * a * a + 4 * s1 * (a - quarter) * (t * s1 - s));
}

}  // namespace detail

// Residual of the sigma-form Painleve VI equation for sigma_N(t) = t(t-1) d/dt log I_N - t/4,
// from finite-difference derivatives of the determinant route.
inline SigmaReport sigma_pvi_residual(const Real& t, int N, int digits, std::optional<Real> step = std::nullopt,
                                      const QuadratureOptions& quad = {}) {
  if (N < 0) throw Error(ErrorCode::InvalidInput, "N must be non-negative");
  int work = digits + quad.guard_digits;
  PrecisionScope scope(work);
  // Rounding in the third difference grows like eps/h^3 and truncation like h^4.
  Real h = step ? *step : Real::pow10(-static_cast<long>(std::lround(work / 7.0)));
  if (t.sign() <= 0) throw Error(ErrorCode::InvalidInput, "t must be positive");
  if (t - 3 * h <= 1 && t + 3 * h >= 1)
    throw Error(ErrorCode::StencilCrossesCritical, "stencil around t = " + t.str(10) + " straddles t = 1");
  // Stencil points are independent determinants; each runs on its own thread at the same precision.
  auto stencil = [&](const Real& hh) {
    std::array<std::future<Real>, 7> jobs;
    for (int j = -3; j <= 3; ++j) {
      Real tj = t + j * hh;
      jobs[static_cast<size_t>(j + 3)] = std::async(std::launch::async, [tj, N, work, &quad] {
        PrecisionScope inner(work);
        Real I = diagonal_correlation(N, tj, work, quad);
        if (I.sign() <= 0) throw Error(ErrorCode::NonFinite, "I_N <= 0 on the stencil; log undefined");
        return log(I);
      });
    }
    std::array<Real, 7> L;
    for (size_t j = 0; j < 7; ++j) L[j] = jobs[j].get();
    return detail::central_derivs(L, hh);
  };
  detail::Derivs coarse = stencil(h);
  detail::Derivs fine = stencil(h / 2);
  detail::Derivs rich{(16 * fine.d1 - coarse.d1) / 15, (16 * fine.d2 - coarse.d2) / 15, (16 * fine.d3 - coarse.d3) / 15};
  SigmaReport rep;
  rep.N = N;
  rep.t = t;
  rep.h = h;
  rep.residual_plain = detail::sigma_residual(N, t, fine);
  rep.residual = detail::sigma_residual(N, t, rich, &rep);
  return rep;
}

// Same check at the diagonal modulus of the square lattice with couplings K1, K2; t = alpha^2 = k^{-2}.
inline SigmaReport sigma_pvi_residual(const Real& k1, const Real& k2, int N, int digits,
                                      std::optional<Real> step = std::nullopt, const QuadratureOptions& quad = {}) {
  RegimeReport rr = classify_couplings({k1, k2, Real(0)});
  if (rr.regime == Regime::CuriePoint)
    throw Error(ErrorCode::RegimeRefused, "regime=CuriePoint; sigma_N is not defined at t = 1");
  Real t;
  {
    PrecisionScope scope(digits + quad.guard_digits);
    Real a = diagonal_alpha(k1, k2);
    t = a * a;
  }
  return sigma_pvi_residual(t, N, digits, step, quad);
}

// (1/2)_N (3/2)_N / (4 [(N+1)!]^2), the coefficient of t^{N+1} in I_N(t) - (1-t)^{1/4} as t -> 0.
inline Real boundary_series_exact(int N) {
  Real num(1), fact(1);
  for (int j = 0; j < N; ++j) num *= (Real(2 * j + 1) / 2) * (Real(2 * j + 3) / 2);
  for (int j = 2; j <= N + 1; ++j) fact *= Real(j);
  return num / (4 * fact * fact);
}

// Estimate of that coefficient from D(t) = (I_N(t) - (1-t)^{1/4}) / t^{N+1} at t1 and 2 t1,
// eliminating the linear term: 2 D(t1) - D(2 t1).
inline Real boundary_series_estimate(int N, const Real& t1, int digits, const QuadratureOptions& quad = {}) {
  PrecisionScope scope(digits + quad.guard_digits);
  auto D = [&](const Real& t) {
    Real I = diagonal_correlation(N, t, digits, quad);
    return (I - pow(1 - t, Real(1) / 4)) / pow(t, N + 1);
  };
  return 2 * D(t1) - D(2 * t1);
}

}  // namespace tricorr
