#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

#include "tricorr/errors.hpp"
#include "tricorr/moments.hpp"
#include "tricorr/params.hpp"
#include "tricorr/real.hpp"
#include "tricorr/toeplitz.hpp"

namespace tricorr {

template <class S>
struct GarnierState {
  int n = 0;
  std::array<S, 3> f;
  std::array<S, 3> g;
};

template <class S>
struct AuxRS {
  std::array<S, 4> R;
  std::array<S, 4> S_;
};

template <class S>
struct RecoveryState {
  int n = 0;
  S r, rbar, lambda, lambdabar, I;
};

inline std::string short_str(const Real& x) { return x.str(12); }
inline std::string short_str(const ComplexReal& z) { return "(" + z.re.str(12) + "," + z.im.str(12) + ")"; }

template <class S>
std::string snapshot(const GarnierState<S>& s) {
  std::string out = "n=" + std::to_string(s.n) + " f=[";
  for (int j = 0; j < 3; ++j) out += (j ? ", " : "") + short_str(s.f[j]);
  out += "] g=[";
  for (int j = 0; j < 3; ++j) out += (j ? ", " : "") + short_str(s.g[j]);
  return out + "]";
}

// Guard threshold 10^{-P/2} at the current working precision.
inline Real default_tol_guard() { return Real::pow10(-(working_digits() / 2)); }

namespace detail {

template <class S>
void guard(const S& value, const Real& scale, const Real& tol, ErrorCode code, const std::string& what, int n,
           const std::string& context) {
  if (!is_finite(value))
    throw Error(ErrorCode::NonFinite, what + " is not finite at step " + std::to_string(n) + "; " + context, n);
  if (abs(value) <= tol * scale)
    throw Error(code, what + " = " + short_str(value) + " (scale " + scale.str(6) + ") at step " + std::to_string(n) +
                          "; " + context,
                n);
}

}  // namespace detail

template <class S>
struct RecoveryIncrement {
  S lambda, r, lambdabar;
};

// Discrete Garnier system of the triangular-lattice diagonal correlations.
// S is Real when Delta^2 >= 0 and ComplexReal otherwise.
template <class S>
class TriangularGarnier {
 public:
  using scalar_type = S;

  explicit TriangularGarnier(const LatticeData& d, std::optional<Real> tol_guard = std::nullopt)
      : tol_(tol_guard ? *tol_guard : default_tol_guard()) {
    v1_ = S(d.v[0]);
    v2_ = S(d.v[1]);
    v3_ = S(d.v[2]);
    V_ = v1_ * v2_;
    G_ = S(d.gamma);
    if constexpr (std::is_same_v<S, Real>) {
      if (d.complex_discriminant())
        throw Error(ErrorCode::ComplexDiscriminant, "Delta^2 = " + d.delta_sq.str(12) + " < 0 in the real engine");
      D_ = d.delta.re;
    } else {
      D_ = d.delta;
    }
    const S one(1);
    S p = one + v3_, m = one - v3_;
    p2_ = p * p;
    m2_ = m * m;
    S GD_p = G_ + D_, GD_m = G_ - D_;
    x_ = {GD_m / (2 * V_ * p2_), GD_p / (2 * V_ * p2_), GD_p / (2 * V_ * m2_), GD_m / (2 * V_ * m2_)};
    for (int i = 0; i < 4; ++i) {
      xp_[i][0] = x_[i];
      for (int k = 1; k < 4; ++k) xp_[i][k] = xp_[i][k - 1] * x_[i];
    }
    S v3s = v3_ * v3_;
    A_ = 2 * G_ * v3_ + D_ * (one + v3s);
    B_ = 2 * G_ * v3_ - D_ * (one + v3s);
    q2_ = m2_ / p2_;
    q4_ = q2_ * q2_;
    Pm_ = G_ * (3 * v3s - 2 * v3_ + 3);
    Pp_ = G_ * (3 * v3s + 2 * v3_ + 3);
    S Vs = V_ * V_;
    S p6 = p2_ * p2_ * p2_, m6 = m2_ * m2_ * m2_;
    S Ds = D_ * D_;
    S cp = 2 * (Ds - 4 * Vs * v3_ * p2_), cm = 2 * (Ds + 4 * Vs * v3_ * m2_);
    shift_ = {2 * v3_ * D_ / (Vs * p6) * (cp / GD_p - D_), -2 * v3_ * D_ / (Vs * p6) * (cp / GD_m + D_),
              -2 * v3_ * D_ / (Vs * m6) * (cm / GD_m + D_), 2 * v3_ * D_ / (Vs * m6) * (cm / GD_p - D_)};
    pre_ = {q2_, q2_ * GD_p / GD_m, GD_p / GD_m};
    S om = one - v3s;
    k_ = V_ * om * om;
    S v1s = v1_ * v1_, v2s = v2_ * v2_;
    e2_ = (one + 4 * Vs + Vs * Vs - 2 * (v1s + v2s - 6 * Vs + v1s * v1s * v2s + v1s * v2s * v2s) * v3s +
           (v1s * v1s + 4 * Vs + v2s * v2s) * v3s * v3s) /
          (Vs * om * om);
    m2const_ = -8 * v3_ * (one + v3s) / (om * om);
  }

  const Real& tol_guard() const { return tol_; }

  // Initial values at n = 0 from w_{-2} .. w_2.
  GarnierState<S> init_state(const MomentTable& t) const {
    for (int n = -2; n <= 2; ++n)
      if (!t.contains(n)) throw Error(ErrorCode::MissingMoments, "initial values need w_-2 .. w_2", n);
    const S wm2(t.at(-2)), wm1(t.at(-1)), w0(t.at(0)), w1(t.at(1)), w2(t.at(2));
    const S one(1);
    S v3s = v3_ * v3_;
    auto brk = [&](const S& GD, const S& s1, const S& s2) {
      return GD / (V_ * s1) * wm2 + GD / (4 * V_ * V_ * s1 * s1) * (GD - 4 * (one - v3_ + v3s) / s2 * G_) * wm1 -
             2 * v3_ * G_ / k_ * w0 + w1;
    };
    S GD_p = G_ + D_, GD_m = G_ - D_;
    S den0 = brk(GD_m, m2_, p2_);
    Real scale = abs(GD_m / (V_ * m2_) * wm2) + abs(w1) + abs(w0);
    detail::guard(den0, scale, tol_, ErrorCode::InitDenominatorZero, "f-initial denominator", 0, "");
    for (const S* w : {&w0, &wm1})
      if (abs(*w).is_zero()) throw Error(ErrorCode::InitDenominatorZero, "g-initial values divide by w_0 and w_-1", 0);
    GarnierState<S> s;
    s.n = 0;
    s.f = {q2_ * brk(GD_m, p2_, m2_) / den0, q2_ * GD_p / GD_m * brk(GD_p, p2_, m2_) / den0,
           GD_p / GD_m * brk(GD_p, m2_, p2_) / den0};
    S gk = G_ / k_;
    s.g = {2 * v3_ * gk - w1 / w0,
           m2const_ - 2 * v3_ * gk * w0 / wm1 + 2 * (one + v3_ + v3s) * gk * w1 / w0 + w1 / wm1 - 2 * w2 / w0,
           2 * wm2 / wm1 - wm1 / w0 - 2 * (one - v3_ + v3s) * gk};
    return s;
  }

  S R(const std::array<S, 3>& g, int i) const {
    return xp_[i][0] * g[0] + xp_[i][1] * g[1] + xp_[i][2] * g[2] + xp_[i][3];
  }
  Real R_scale(const std::array<S, 3>& g, int i) const {
    return abs(xp_[i][0] * g[0]) + abs(xp_[i][1] * g[1]) + abs(xp_[i][2] * g[2]) + abs(xp_[i][3]);
  }

  std::array<S, 4> S_values(const std::array<S, 3>& f, std::array<Real, 4>* scales = nullptr) const {
    const S one(1);
    const S& f1 = f[0];
    const S& f2 = f[1];
    const S& f3 = f[2];
    S gp = G_ + D_, gm = G_ - D_;
    S gp2 = gp * gp, gm2 = gm * gm;
    S Dp = D_ * p2_, Dm = D_ * m2_;
    std::array<std::array<S, 4>, 4> terms = {{
        {A_ * q2_ * gp, -A_ * gm * f2, B_ * gp * f1, -B_ * q2_ * gm * f3},
        {A_ * q4_ * gp2, -A_ * gm2 * f2, B_ * gp2 * f1, -B_ * q4_ * gm2 * f3},
        {A_ * q2_ * (Pm_ + Dp) * gp, -A_ * (Pp_ - Dm) * gm * f2, B_ * (Pp_ + Dm) * gp * f1,
         -B_ * q2_ * (Pm_ - Dp) * gm * f3},
        {A_ * q4_ * (Pp_ - Dm) * gp2, -A_ * (Pm_ + Dp) * gm2 * f2, B_ * (Pm_ - Dp) * gp2 * f1,
         -B_ * q4_ * (Pp_ + Dm) * gm2 * f3},
    }};
    std::array<S, 4> out;
    for (int i = 0; i < 4; ++i) {
      out[i] = terms[i][0] + terms[i][1] + terms[i][2] + terms[i][3];
      if (scales) (*scales)[i] = abs(terms[i][0]) + abs(terms[i][1]) + abs(terms[i][2]) + abs(terms[i][3]);
    }
    return out;
  }

  AuxRS<S> aux_rs(const GarnierState<S>& s) const {
    AuxRS<S> a;
    for (int i = 0; i < 4; ++i) a.R[i] = R(s.g, i);
    a.S_ = S_values(s.f);
    return a;
  }

  // f at step n + 1 from the first Lax pair.
  std::array<S, 3> step_f(const GarnierState<S>& s) const {
    const int n = s.n;
    const std::string ctx = snapshot(s);
    std::array<S, 4> Rv;
    for (int i = 0; i < 4; ++i) Rv[i] = R(s.g, i);
    Real sc4 = R_scale(s.g, 3) + Real(n);
    S b1 = Rv[3] - n, b2 = Rv[3] - n + shift_[3];
    detail::guard(b1, sc4, tol_, ErrorCode::GuardBracketZero, "bracket [R4 - n]", n, ctx);
    detail::guard(b2, sc4 + abs(shift_[3]), tol_, ErrorCode::GuardBracketZero, "bracket [R4 - n + c4]", n, ctx);
    S den = b1 * b2;
    std::array<S, 3> out;
    for (int j = 0; j < 3; ++j) {
      detail::guard(s.f[j], Real(1), tol_, ErrorCode::ZeroF, "f" + std::to_string(j + 1), n, ctx);
      out[j] = (Rv[j] - n) * (Rv[j] - n + shift_[j]) / den / (pre_[j] * s.f[j]);
    }
    return out;
  }

  // g at step n + 1 from the second Lax pair, consuming f at n + 1 and g at n.
  std::array<S, 3> step_g(const std::array<S, 3>& f_next, const GarnierState<S>& s) const {
    const int n = s.n + 1;
    std::array<Real, 4> sc;
    std::array<S, 4> Sv = S_values(f_next, &sc);
    GarnierState<S> probe{n, f_next, s.g};
    const std::string ctx = snapshot(probe);
    detail::guard(Sv[0], sc[0], tol_, ErrorCode::GuardSZero, "S1", n, ctx);
    detail::guard(Sv[1], sc[1], tol_, ErrorCode::GuardSZero, "S2", n, ctx);
    const S one(1);
    S v3s = v3_ * v3_;
    S om = one - v3s;
    S br = S(2 * n - 1) + (2 * n - 3) * q2_;
    S h = G_ / (2 * V_ * m2_);
    std::array<S, 3> g;
    g[0] = -s.g[0] + h * br - S(n + 1) / (2 * V_ * m2_) * Sv[1] / Sv[0] + S(n) / (2 * V_ * om * om) * Sv[3] / Sv[1];
    g[1] = -s.g[1] + m2const_ - e2_ * (n - 1) + S(n + 1) / (4 * V_ * V_ * p2_ * m2_ * m2_) * Sv[3] / Sv[0] -
           S(n) / p2_ * Sv[2] / Sv[1];
    g[2] = -s.g[2] + h * br - S(n + 1) / (2 * V_ * om * om) * Sv[2] / Sv[0] + 2 * n * V_ * m2_ * Sv[0] / Sv[1];
    return g;
  }

  // lambda_{n+1} from lambda_n and the state at n.
  S lambda_next(const GarnierState<S>& s, const S& lambda_n, const std::array<S, 4>& Sv) const {
    const int n = s.n;
    const S one(1);
    S v3s = v3_ * v3_;
    return (n * lambda_n - 2 * n * (one + v3s) * G_ / k_ + s.g[2] + S(n + 1) / (2 * k_) * Sv[2] / Sv[0]) / S(n + 1);
  }

  S lambdabar_next(const GarnierState<S>& s, const S& lambdabar_n, const std::array<S, 4>& Sv) const {
    const int n = s.n;
    return (n * lambdabar_n + s.g[0] - G_ / (2 * V_ * m2_) * (S(2 * n + 1) + (2 * n - 1) * q2_) +
            S(n + 1) / (2 * V_ * m2_) * Sv[1] / Sv[0]) /
           S(n + 1);
  }

  // r_{n+1} / r_n, valid for n >= 1.
  S r_ratio(int n, const std::array<S, 4>& Sv) const { return 2 * n * V_ * m2_ / S(n + 1) * Sv[0] / Sv[1]; }

  // lambda_{n+1}, r_{n+1} and lambdabar_{n+1} from the state at n. At n = 0 the ratio formula
  // does not apply and r_1 = lambda_1 - lambda_0 follows from rbar_0 = 1.
  RecoveryIncrement<S> recover(const GarnierState<S>& s, const S& lam_n, const S& lamb_n, const S& r_n) const {
    std::array<Real, 4> sc;
    std::array<S, 4> Sv = S_values(s.f, &sc);
    detail::guard(Sv[0], sc[0], tol_, ErrorCode::GuardSZero, "S1", s.n, snapshot(s));
    S lam = lambda_next(s, lam_n, Sv);
    S r = s.n == 0 ? lam - lam_n : r_n * r_ratio(s.n, Sv);
    return {lam, r, lambdabar_next(s, lamb_n, Sv)};
  }

 private:
  Real tol_;
  S v1_, v2_, v3_, V_, G_, D_;
  S p2_, m2_, q2_, q4_, A_, B_, Pm_, Pp_, k_, e2_, m2const_;
  std::array<S, 4> x_;
  std::array<std::array<S, 4>, 4> xp_;
  std::array<S, 4> shift_;
  std::array<S, 3> pre_;
};

template <class S>
struct GarnierRun {
  std::vector<GarnierState<S>> states;      // n = 0 .. Nmax
  std::vector<RecoveryState<S>> recovery;   // n = 0 .. Nmax
  std::vector<S> I;                         // I_0 .. I_{Nmax+1}
  std::vector<S> rbar_dual;                 // rbar_n from the lambdabar route, n = 0 .. Nmax+1
};

namespace detail {

// Shared bookkeeping: r, rbar, lambda, lambdabar and I from per-step increments.
template <class S>
struct RecoveryBook {
  std::vector<S> r{S(1)}, rb{S(1)}, lam{S(0)}, lamb{S(0)}, I, rb_dual{S(1)};

  explicit RecoveryBook(const S& w0) : I{S(1), w0} {}

  void advance(int n, const S& lam_next, const S& r_next, const S& lamb_next) {
    lam.push_back(lam_next);
    r.push_back(r_next);
    if (abs(r_next).is_zero())
      throw Error(ErrorCode::DivisionByZero, "r_" + std::to_string(n + 1) + " = 0 in the recovery", n + 1);
    if (n > 0) {
      rb.push_back((lam[n + 1] - lam[n]) / r[n + 1]);
      if (abs(I[n - 1]).is_zero()) throw Error(ErrorCode::DivisionByZero, "I_" + std::to_string(n - 1) + " = 0", n);
      I.push_back(I[n] * I[n] * (S(1) - r[n] * rb[n]) / I[n - 1]);
    }
    lamb.push_back(lamb_next);
    rb_dual.push_back((lamb[n + 1] - lamb[n]) / r[n]);
  }
};

}  // namespace detail

// Iterates states n = 0 .. nmax of a Lax-pair system with recovery carried alongside.
// The system supplies init_state, step_f, step_g and recover.
template <class System, class S = typename System::scalar_type>
GarnierRun<S> iterate(const System& sys, const MomentTable& t, int nmax) {
  GarnierRun<S> run;
  detail::RecoveryBook<S> book(S(t.at(0)));
  GarnierState<S> s = sys.init_state(t);
  for (int n = 0; n <= nmax; ++n) {
    if (n > 0) {
      std::array<S, 3> f = sys.step_f(s);
      std::array<S, 3> g = sys.step_g(f, s);
      s = GarnierState<S>{n, f, g};
    }
    run.states.push_back(s);
    RecoveryIncrement<S> inc = sys.recover(s, book.lam[n], book.lamb[n], book.r[n]);
    book.advance(n, inc.lambda, inc.r, inc.lambdabar);
  }
  for (int n = 0; n <= nmax; ++n)
    run.recovery.push_back({n, book.r[n], book.rb[n], book.lam[n], book.lamb[n], book.I[n]});
  run.I = book.I;
  run.rbar_dual = book.rb_dual;
  return run;
}

struct GarnierOptions {
  Tolerances tol;
  // Relative guard threshold; 10^{-P/2} at the working precision when unset.
  std::optional<double> tol_guard;
  // Run the Delta^2 < 0 regime in complex arithmetic instead of refusing it.
  bool allow_complex = true;
  int max_escalations = 2;
  // Matching digits against the determinant needed to accept an attempt at precision p; p/3 when unset.
  std::optional<double> required_digits;
  int guard_digits = 10;
  QuadratureOptions quad;
  // Test hook applied to each moment table after quadrature, used for fault injection.
  std::function<void(MomentTable&)> moment_hook;
};

struct EscalationAttempt {
  int precision = 0;
  std::vector<double> digit_loss;  // per n, precision minus matching digits
  double min_matching = 0;
  double required = 0;
  bool accepted = false;
};

struct GarnierReport {
  Regime regime = Regime::Unphysical;
  bool complex_engine = false;
  bool converged = false;
  CorrelationSeries garnier;
  CorrelationSeries determinant;
  std::vector<EscalationAttempt> attempts;
  std::vector<Real> r, rbar, rbar_dual;
  std::vector<Real> irecur_residual;  // Garnier r, rbar against determinant I
  Real max_rbar_gap;                  // relative gap between the two rbar routes
  Real max_imag;                      // largest |Im I_n| / |I_n| in the complex engine
};

// Largest discrepancy between the lambda-route and lambdabar-route rbar_n, n >= 1. The lambdabar route
// forms (lambdabar_n - lambdabar_{n-1}) / r_{n-1}, so the gap is measured against the size of the
// terms in that difference rather than against rbar_n, which can be far smaller.
template <class S>
Real rbar_route_gap(const GarnierRun<S>& run) {
  Real gap(0);
  for (size_t n = 1; n < run.recovery.size(); ++n) {
    const auto& cur = run.recovery[n];
    const auto& prev = run.recovery[n - 1];
    Real scale = (abs(cur.lambdabar) + abs(prev.lambdabar)) / abs(prev.r);
    scale = max(scale, abs(cur.rbar));
    if (scale.is_zero()) continue;
    gap = max(gap, abs(cur.rbar - run.rbar_dual[n]) / scale);
  }
  return gap;
}

namespace detail {

template <class S>
void run_garnier_attempt(const LatticeData& d, const MomentTable& t, int nmax, const GarnierOptions& opt,
                         GarnierReport& rep) {
  std::optional<Real> tol;
  if (opt.tol_guard) tol = Real(*opt.tol_guard);
  TriangularGarnier<S> sys(d, tol);
  GarnierRun<S> run = iterate(sys, t, nmax);
  rep.garnier = CorrelationSeries{{}, CorrelationMethod::GarnierRecovery, t.precision()};
  rep.max_imag = Real(0);
  for (int n = 0; n <= nmax; ++n) {
    rep.garnier.values.push_back(real_part(run.I[static_cast<size_t>(n)]));
    if constexpr (!std::is_same_v<S, Real>) {
      const auto& z = run.I[static_cast<size_t>(n)];
      if (!abs(z.re).is_zero()) rep.max_imag = max(rep.max_imag, abs(z.im) / abs(z.re));
    }
  }
  rep.r.clear();
  rep.rbar.clear();
  rep.rbar_dual.clear();
  rep.max_rbar_gap = Real(0);
  for (const auto& st : run.recovery) {
    rep.r.push_back(real_part(st.r));
    rep.rbar.push_back(real_part(st.rbar));
  }
  for (int n = 0; n <= nmax; ++n) rep.rbar_dual.push_back(real_part(run.rbar_dual[static_cast<size_t>(n)]));
  rep.max_rbar_gap = rbar_route_gap(run);
}

}  // namespace detail

namespace detail {

// Runs attempt(p) at precisions p = P, 2P, 4P, ... until the route matches the determinant to the
// required number of digits. attempt fills rep.garnier, rep.determinant, rep.r and rep.rbar.
template <class Attempt>
void escalate(int digits, int nmax, const GarnierOptions& opt, GarnierReport& rep, Attempt&& attempt) {
  int p = digits;
  for (int k = 0; k <= opt.max_escalations; ++k, p *= 2) {
    PrecisionScope scope(p + opt.guard_digits);
    attempt(p);
    rep.irecur_residual = det_ratio_check(rep.determinant, rep.r, rep.rbar);
    EscalationAttempt a;
    a.precision = p;
    a.required = opt.required_digits ? *opt.required_digits * p / digits : p / 3.0;
    a.min_matching = static_cast<double>(p);
    for (int n = 0; n <= nmax; ++n) {
      double m = matching_digits(rep.garnier.values[static_cast<size_t>(n)],
                                 rep.determinant.values[static_cast<size_t>(n)], static_cast<double>(p));
      a.digit_loss.push_back(p - m);
      a.min_matching = std::min(a.min_matching, m);
    }
    a.accepted = a.min_matching >= a.required;
    rep.attempts.push_back(a);
    if (a.accepted) {
      rep.converged = true;
      return;
    }
  }
}

}  // namespace detail

// Diagonal correlations by the discrete Garnier recurrences, checked against the determinant route
// at each precision and escalated P -> 2P -> 4P on mismatch.
inline GarnierReport garnier_correlations(const Couplings& c, int nmax, int digits, const GarnierOptions& opt = {}) {
  if (nmax < 0) throw Error(ErrorCode::InvalidInput, "nmax must be non-negative");
  GarnierReport rep;
  detail::escalate(digits, nmax, opt, rep, [&](int p) {
    LatticeData d = derive(c, opt.tol);
    rep.regime = d.regime;
    if (!is_generic(d.regime))
      throw Error(ErrorCode::RegimeRefused, std::string("regime=") + to_string(d.regime) +
                                                "; the nonlinear recurrences need a generic phase");
    rep.complex_engine = d.complex_discriminant();
    if (rep.complex_engine && !opt.allow_complex)
      throw Error(ErrorCode::ComplexDiscriminant, "Delta^2 = " + d.delta_sq.str(12) + " < 0");
    Weight w = [&] {
      PrecisionScope wider(p + opt.guard_digits + 5);
      return Weight(triangular_weight(c));
    }();
    int span = std::max(nmax, 2);
    MomentTable t = moment_window(w, -span, span, p, opt.quad);
    if (opt.moment_hook) opt.moment_hook(t);
    rep.determinant = determinant_series(t, nmax);
    if (rep.complex_engine)
      detail::run_garnier_attempt<ComplexReal>(d, t, nmax, opt, rep);
    else
      detail::run_garnier_attempt<Real>(d, t, nmax, opt, rep);
  });
  return rep;
}

}  // namespace tricorr
