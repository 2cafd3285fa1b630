#pragma once

#include <algorithm>
#include <chrono>
#include <future>
#include <set>
#include <string>
#include <vector>

#include "tricorr/errors.hpp"
#include "tricorr/garnier.hpp"
#include "tricorr/moments.hpp"
#include "tricorr/params.hpp"
#include "tricorr/real.hpp"
#include "tricorr/square_lattice.hpp"
#include "tricorr/toeplitz.hpp"

namespace tricorr {

struct GridPoint {
  const char* k1;
  const char* k2;
  const char* k3;
  Regime expected;

  Couplings couplings() const { return Couplings::parse(k1, k2, k3); }
  std::string label() const { return std::string("(") + k1 + "," + k2 + "," + k3 + ")"; }
};

// Both phases of class A (one with two negative couplings) and the three antiferromagnetic regimes.
// Every point is at least 1e-2 away from the critical manifolds in the normalised regime residual.
inline const std::vector<GridPoint>& verification_grid() {
  static const std::vector<GridPoint> grid = {
      {"0.5", "0.4", "0.3", Regime::FerroOrdered},
      {"0.3", "0.2", "0.1", Regime::FerroDisordered},
      {"1.2", "1.0", "-0.5", Regime::AntiferroLowT},
      {"0.6", "0.5", "-0.2", Regime::AntiferroIntermediate},
      {"0.3", "0.3", "-0.1", Regime::AntiferroHighT},
      {"0.8", "-0.3", "-0.2", Regime::FerroOrdered},
  };
  return grid;
}

struct Check {
  std::string group;
  std::string point;
  std::string name;
  int criterion = 0;  // acceptance criterion the check feeds, 0 for auxiliary checks
  bool pass = false;
  std::string value;
  std::string threshold;
  std::string detail;
  double seconds = 0;
};

struct VerifyOptions {
  int digits = 60;
  std::set<std::string> only;  // empty runs every group
  // Perturbs w_3 by a relative 1e-30 before the Garnier run; the Irecur check must then fail.
  bool inject_moment_fault = false;
};

struct VerifyReport {
  int digits = 0;
  std::vector<Check> checks;
  bool all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
  }
};

inline const std::vector<std::string>& verify_groups() {
  static const std::vector<std::string> g = {"structural", "moments", "symmetry", "garnier", "column",
                                             "dpv",        "series",  "sigma",    "gating"};
  return g;
}

namespace detail {

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

inline Real tol_digits(double d) { return Real::pow10(-std::lround(d)); }

inline Check make_check(std::string group, std::string point, std::string name, int criterion, bool pass,
                        const Real& value, const Real& threshold, std::string detail = {}) {
  Check c;
  c.group = std::move(group);
  c.point = std::move(point);
  c.name = std::move(name);
  c.criterion = criterion;
  c.pass = pass;
  c.value = value.str(3);
  c.threshold = threshold.str(3);
  c.detail = std::move(detail);
  return c;
}

inline Check failed_check(std::string group, std::string point, std::string name, int criterion,
                          const std::exception& e) {
  Check c;
  c.group = std::move(group);
  c.point = std::move(point);
  c.name = std::move(name);
  c.criterion = criterion;
  c.pass = false;
  c.value = "error";
  c.detail = e.what();
  return c;
}

inline Real rel_diff(const Real& a, const Real& b) {
  Real s = max(abs(a), abs(b));
  return s.is_zero() ? Real(0) : abs(a - b) / s;
}

inline Real rel_diff(const ComplexReal& a, const ComplexReal& b) {
  Real s = max(abs(a), abs(b));
  return s.is_zero() ? Real(0) : abs(a - b) / s;
}

inline std::vector<Check> check_structural(const GridPoint& gp, int P) {
  std::vector<Check> out;
  PrecisionScope scope(P + 10);
  const std::string G = "structural", pt = gp.label();
  Real tol = tol_digits(P - 10);
  try {
    Couplings c = gp.couplings();
    LatticeData d = derive(c);
    out.push_back(make_check(G, pt, "regime", 0, d.regime == gp.expected, Real(0), Real(0),
                             std::string("got ") + to_string(d.regime) + ", expected " + to_string(gp.expected)));
    const auto& z = d.zeta;
    Real prod = abs(z[0] * z[1] * z[2] * z[3] - 1);
    out.push_back(make_check(G, pt, "zeta product = 1", 8, prod <= tol, prod, tol));
    Real pair = max(abs(z[2] * z[1] - 1), abs(z[3] * z[0] - 1));
    out.push_back(make_check(G, pt, "zeta3 zeta2 = zeta4 zeta1 = 1", 8, pair <= tol, pair, tol));
    Real z3s = d.z[2] * d.z[2];
    Real rel = max(rel_diff(z[2], z[0] * z3s), rel_diff(z[3], z[1] * z3s));
    out.push_back(make_check(G, pt, "zeta3 = z3^2 zeta1, zeta4 = z3^2 zeta2", 8, rel <= tol, rel, tol));
    bool same = mpfr_equal_p(d.e[1].raw(), d.e[3].raw()) && mpfr_equal_p(d.m[1].raw(), d.m[3].raw()) &&
                d.e[4] == 1 && d.e[0] == 1 && d.m[0].is_zero();
    out.push_back(make_check(G, pt, "e1 = e3, m1 = m3, e0 = e4 = 1, m0 = 0 (bitwise)", 8, same, Real(same ? 0 : 1),
                             Real(0)));
    const Real& v3 = d.v[2];
    Real v3s = v3 * v3;
    Real dbar = ((1 + v3s) * (1 + v3s) * d.delta_sq - 4 * v3s * d.gamma * d.gamma) / ((1 - v3s) * (1 - v3s));
    Real dbar_rel = rel_diff(dbar, d.delta_bar_sq);
    out.push_back(make_check(G, pt, "Delta-bar^2 two forms", 0, dbar_rel <= tol, dbar_rel, tol));
    ComplexReal dsq = d.d_script * d.d_script;
    Real drel = rel_diff(dsq, ComplexReal(d.d_script_sq_zform));
    out.push_back(make_check(G, pt, "script-D^2 v-form vs z-form", 0, drel <= tol, drel, tol));
    LatticeData s = derive({c.k2, c.k1, c.k3});
    Real sw = max(rel_diff(s.gamma, d.gamma), max(rel_diff(s.delta_sq, d.delta_sq), rel_diff(s.delta_bar_sq, d.delta_bar_sq)));
    for (int i = 0; i < 4; ++i) sw = max(sw, rel_diff(s.zeta[i], d.zeta[i]));
    for (int i = 0; i < 5; ++i) sw = max(sw, rel_diff(s.e[i], d.e[i]));
    for (int i = 0; i < 4; ++i) sw = max(sw, rel_diff(s.m[i], d.m[i]));
    out.push_back(make_check(G, pt, "derive invariant under v1 <-> v2", 0, sw <= tol, sw, tol));
  } catch (const std::exception& e) {
    out.push_back(failed_check(G, pt, "derive", 8, e));
  }
  return out;
}

inline std::vector<Check> check_moments(const GridPoint& gp, int P) {
  std::vector<Check> out;
  const std::string G = "moments", pt = gp.label();
  PrecisionScope scope(P + 10);
  Real tol = tol_digits(2.0 * P / 3);
  auto t0 = Clock::now();
  try {
    Weight w = [&] {
      PrecisionScope wider(P + 15);
      return Weight(triangular_weight(gp.couplings()));
    }();
    MomentTable q = moment_window(w, -5, 10, P);
    MomentTable seed = moment_window(w, -1, 2, P);
    MomentTable rec = extend_by_recurrence(seed, -5, 10);
    Real worst(0);
    int at = 0;
    for (int n = -5; n <= 10; ++n) {
      Real r = relative_error(rec.at(n), q.at(n));
      if (r > worst) {
        worst = r;
        at = n;
      }
    }
    Check c = make_check(G, pt, "quadrature vs recurrence, n in [-5, 10]", 1, worst <= tol, worst, tol,
                         "worst n = " + std::to_string(at) + ", scheme " + to_string(q.scheme()));
    c.seconds = seconds_since(t0);
    out.push_back(c);
    Real res(0);
    for (int p = -2; p <= 9; ++p) {
      RecurrenceRow row = recurrence_row(w, p);
      if (row.first < q.lo() || row.first + static_cast<int>(row.coeffs.size()) - 1 > q.hi()) continue;
      res = max(res, recurrence_residual(q, p));
    }
    Real rtol = tol_digits(P - 10);
    out.push_back(make_check(G, pt, "linear recurrence residual on quadrature window", 0, res <= rtol, res, rtol));
  } catch (const std::exception& e) {
    out.push_back(failed_check(G, pt, "quadrature vs recurrence", 1, e));
  }
  return out;
}

inline std::vector<Check> check_symmetry(const GridPoint& gp, int P) {
  std::vector<Check> out;
  const std::string G = "symmetry", pt = gp.label();
  PrecisionScope scope(P + 10);
  Real tol = tol_digits(P - 10);
  Couplings c = gp.couplings();
  auto window = [&](const Couplings& cc, int lo, int hi) {
    Weight w = [&] {
      PrecisionScope wider(P + 15);
      return Weight(triangular_weight(cc));
    }();
    return moment_window(w, lo, hi, P);
  };
  try {
    MomentTable base = window(c, -5, 10);
    Real scale(0);
    for (int n = -5; n <= 10; ++n) scale = max(scale, abs(base.at(n)));
    const std::array<std::array<int, 3>, 3> flips = {{{-1, -1, 1}, {-1, 1, -1}, {1, -1, -1}}};
    for (const auto& f : flips) {
      SymmetryImage img = symmetry_transform(c, f);
      MomentTable other = window(img.couplings, -5, 10);
      Real worst(0);
      for (int n = -5; n <= 10; ++n) worst = max(worst, abs(base.at(n) - img.sign(n) * other.at(n)));
      worst = worst / scale;
      std::string name = std::string("w_n sign identity (") + (f[0] < 0 ? "-" : "+") + (f[1] < 0 ? "-" : "+") +
                         (f[2] < 0 ? "-" : "+") + ")";
      out.push_back(make_check(G, pt, name, 7, worst <= tol, worst, tol,
                               img.parity == Parity::Even ? "parity +1" : "parity (-1)^(n+1)"));
    }
    MomentTable a = window(c, -12, 12), b = window({c.k2, c.k1, c.k3}, -12, 12);
    CorrelationSeries sa = determinant_series(a, 12), sb = determinant_series(b, 12);
    Real worst(0);
    for (int n = 0; n <= 12; ++n) worst = max(worst, relative_error(sb.values[n], sa.values[n]));
    Real stol = tol_digits(P - 15);
    out.push_back(make_check(G, pt, "I_n invariant under K1 <-> K2, n <= 12", 7, worst <= stol, worst, stol));
  } catch (const std::exception& e) {
    out.push_back(failed_check(G, pt, "symmetry", 7, e));
  }
  return out;
}

inline std::string digit_loss_log(const EscalationAttempt& a) {
  std::string s = "P=" + std::to_string(a.precision) + " loss[n]=";
  for (size_t n = 0; n < a.digit_loss.size(); ++n) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%.1f", n ? "," : "", a.digit_loss[n]);
    s += buf;
  }
  return s;
}

inline std::vector<Check> check_garnier(const GridPoint& gp, int P, bool inject) {
  std::vector<Check> out;
  const std::string G = "garnier", pt = gp.label();
  const int nmax = 12;
  PrecisionScope scope(P + 10);
  GarnierOptions opt;
  if (inject) {
    opt.max_escalations = 0;
    opt.moment_hook = [](MomentTable& t) {
      if (t.contains(3)) t.set(3, t.at(3) * (1 + Real::pow10(-30)));
    };
  }
  auto t0 = Clock::now();
  try {
    GarnierReport rep = garnier_correlations(gp.couplings(), nmax, P, opt);
    double secs = seconds_since(t0);
    const EscalationAttempt& first = rep.attempts.front();
    double need = P / 3.0;
    Check c = make_check(G, pt, "Garnier vs determinant I_n, n <= 12", 2, first.min_matching >= need,
                         Real(first.min_matching), Real(need),
                         std::string(rep.complex_engine ? "complex engine; " : "") + digit_loss_log(first));
    c.value = std::to_string(first.min_matching).substr(0, 5) + " digits";
    c.threshold = std::to_string(static_cast<int>(need)) + " digits";
    c.seconds = secs;
    out.push_back(c);
    Real gtol = tol_digits(P / 2.0);
    out.push_back(make_check(G, pt, "dual rbar routes agree", 8, rep.max_rbar_gap <= gtol, rep.max_rbar_gap, gtol));
    Real irec(0);
    for (const Real& x : rep.irecur_residual) irec = max(irec, x);
    Real itol = tol_digits(3.0 * P / 4);
    out.push_back(make_check(G, pt, "Irecur residual (Garnier r, rbar vs determinant I)", 8, irec < itol, irec, itol));
    if (rep.complex_engine) {
      Real imtol = tol_digits(P / 2.0);
      out.push_back(make_check(G, pt, "imaginary parts of I_n vanish", 0, rep.max_imag <= imtol, rep.max_imag, imtol));
    }
    if (gp.expected == Regime::FerroOrdered && rep.regime == Regime::FerroOrdered) {
      // r_n rbar_n < 0 here, so the ratio exceeds 1: |I_n| falls monotonically onto its limit.
      bool ok = true;
      Real worst(1);
      const auto& I = rep.determinant.values;
      for (int n = 1; n < nmax; ++n) {
        Real ratio = I[n + 1] * I[n - 1] / (I[n] * I[n]);
        ok = ok && ratio.sign() > 0 && abs(I[n + 1]) <= abs(I[n]);
        worst = min(worst, ratio);
      }
      out.push_back(make_check(G, pt, "ordered phase: |I_n| decreasing, I_{n+1} I_{n-1} / I_n^2 > 0", 0, ok, worst,
                               Real(0)));
    }
    if (!inject) {
      auto t1 = Clock::now();
      GarnierReport hi = garnier_correlations(gp.couplings(), nmax, 2 * P, opt);
      double hneed = 2.0 * P / 3;
      Check e = make_check(G, pt, "precision " + std::to_string(2 * P) + " restores digits", 2,
                           hi.attempts.front().min_matching >= hneed, Real(0), Real(0),
                           digit_loss_log(hi.attempts.front()));
      e.value = std::to_string(hi.attempts.front().min_matching).substr(0, 5) + " digits";
      e.threshold = std::to_string(static_cast<int>(hneed)) + " digits";
      e.seconds = seconds_since(t1);
      out.push_back(e);
    }
  } catch (const std::exception& e) {
    out.push_back(failed_check(G, pt, "Garnier route", 2, e));
  }
  return out;
}

inline std::vector<Check> check_column(int P) {
  std::vector<Check> out;
  const std::string G = "column";
  PrecisionScope scope(P + 10);
  const char* pts[4][2] = {{"0.2", "0.5"}, {"0.3", "0.7"}, {"0.2", "2.0"}, {"0.4", "1.6"}};
  for (const auto& p : pts) {
    std::string label = std::string("alpha=(") + p[0] + "," + p[1] + ")";
    try {
      ColumnParams cp = ColumnParams::from_alphas(Real(p[0]), Real(p[1]));
      out.push_back(make_check(G, label, "ordering inequalities for k " + std::string(cp.k > 1 ? "> 1" : "< 1"), 0,
                               cp.ordering_holds(), cp.k, Real(1)));
      auto t0 = Clock::now();
      GarnierReport rep = column_correlations(cp, 10, P);
      const auto& a = rep.attempts.front();
      double need = P / 3.0;
      Check c = make_check(G, label, "column recurrences vs determinant I_n, n <= 10", 3, a.min_matching >= need,
                           Real(0), Real(0), digit_loss_log(a));
      c.value = std::to_string(a.min_matching).substr(0, 5) + " digits";
      c.threshold = std::to_string(static_cast<int>(need)) + " digits";
      c.seconds = seconds_since(t0);
      out.push_back(c);
      Real irec(0);
      for (const Real& x : rep.irecur_residual) irec = max(irec, x);
      Real itol = tol_digits(3.0 * P / 4);
      out.push_back(make_check(G, label, "Irecur residual", 0, irec < itol, irec, itol));
    } catch (const std::exception& e) {
      out.push_back(failed_check(G, label, "column route", 3, e));
    }
  }
  const char* kk[2][2] = {{"0.5", "0.4"}, {"0.3", "0.2"}};
  for (const auto& p : kk) {
    std::string label = std::string("K=(") + p[0] + "," + p[1] + ")";
    Real k1(p[0]), k2(p[1]);
    ColumnParams cp = ColumnParams::from_couplings(k1, k2);
    Real k = sinh(2 * k1) * sinh(2 * k2);
    Real r = relative_error(cp.k, k);
    Real tol = tol_digits(P - 10);
    out.push_back(make_check(G, label, "k from alphas = sinh 2K1 sinh 2K2", 0, r <= tol, r, tol));
  }
  try {
    auto t0 = Clock::now();
    LimitReport lim = column_limit_check(Real("0.5"), Real("0.3"), {Real("1e-3"), Real("1e-4")}, 8, P);
    std::string det = "max|dI| = " + lim.max_diff[0].str(3) + ", " + lim.max_diff[1].str(3);
    Check c = make_check(G, "K=(0.5,z,0.3)", "triangular -> column as z -> 0, fitted order", 0,
                         lim.order >= 0.8 && lim.order <= 1.2, Real(lim.order), Real(1), det);
    c.value = std::to_string(lim.order).substr(0, 5);
    c.threshold = "[0.8, 1.2]";
    c.seconds = seconds_since(t0);
    out.push_back(c);
  } catch (const std::exception& e) {
    out.push_back(failed_check(G, "K=(0.5,z,0.3)", "column limit", 0, e));
  }
  return out;
}

inline std::vector<Check> check_dpv(int P) {
  std::vector<Check> out;
  const std::string G = "dpv";
  PrecisionScope scope(P + 10);
  for (const char* a : {"0.5", "2"}) {
    std::string label = std::string("alpha=") + a;
    try {
      auto t0 = Clock::now();
      GarnierReport rep = dpv_correlations(Real(a), 12, P);
      const auto& at = rep.attempts.front();
      double need = P / 3.0;
      Check c = make_check(G, label, "dPV recurrences vs determinant I_n, n <= 12", 4, at.min_matching >= need, Real(0),
                           Real(0), digit_loss_log(at));
      c.value = std::to_string(at.min_matching).substr(0, 5) + " digits";
      c.threshold = std::to_string(static_cast<int>(need)) + " digits";
      c.seconds = seconds_since(t0);
      out.push_back(c);
    } catch (const std::exception& e) {
      out.push_back(failed_check(G, label, "dPV route", 4, e));
    }
  }
  try {
    auto t0 = Clock::now();
    LimitReport lim = triangular_limit_check(Real("0.6"), Real("0.5"), {Real("1e-3"), Real("1e-4")}, 8, P);
    std::string det = "max|dI| = " + lim.max_diff[0].str(3) + ", " + lim.max_diff[1].str(3) + "; precision " +
                      std::to_string(lim.precision_used[0]) + ", " + std::to_string(lim.precision_used[1]);
    Check c = make_check(G, "K=(0.6,0.5,k3)", "triangular -> dPV as k3 -> 0, fitted order", 4,
                         lim.order >= 0.8 && lim.order <= 1.2, Real(lim.order), Real(1), det);
    c.value = std::to_string(lim.order).substr(0, 5);
    c.threshold = "[0.8, 1.2]";
    c.seconds = seconds_since(t0);
    out.push_back(c);
  } catch (const std::exception& e) {
    out.push_back(failed_check(G, "K=(0.6,0.5,k3)", "dPV limit", 4, e));
  }
  try {
    bool refused = false;
    try {
      DPVSystem sys{Real(0)};
    } catch (const Error& e) {
      refused = e.code() == ErrorCode::InvalidInput;
    }
    MomentTable t = moment_window(SquareDiagonalWeight{Real(0)}, -8, 8, P);
    CorrelationSeries s = determinant_series(t, 8);
    Real worst(0);
    for (const Real& x : s.values) worst = max(worst, abs(x - 1));
    Real tol = tol_digits(P - 10);
    out.push_back(make_check(G, "alpha=0", "frozen weight: I_n = 1 and dPV refuses", 0, refused && worst <= tol, worst,
                             tol));
  } catch (const std::exception& e) {
    out.push_back(failed_check(G, "alpha=0", "frozen weight", 0, e));
  }
  return out;
}

inline std::vector<Check> check_series(int P) {
  std::vector<Check> out;
  PrecisionScope scope(P + 10);
  for (int N = 1; N <= 4; ++N) {
    std::string label = "N=" + std::to_string(N);
    try {
      Real exact = boundary_series_exact(N);
      Real est = boundary_series_estimate(N, Real("1e-3"), P);
      Real rel = relative_error(est, exact);
      Real tol("1e-2");
      out.push_back(make_check("series", label, "t^(N+1) coefficient vs (1/2)_N (3/2)_N / (4 ((N+1)!)^2)", 5,
                               rel <= tol, rel, tol, "estimate " + est.str(10) + ", exact " + exact.str(10)));
    } catch (const std::exception& e) {
      out.push_back(failed_check("series", label, "boundary series", 5, e));
    }
  }
  return out;
}

inline std::vector<Check> check_sigma(int P, const char* t) {
  std::vector<Check> out;
  PrecisionScope scope(P + 10);
  Real tol = tol_digits(P / 3.0);
  for (int N = 0; N <= 6; ++N) {
    std::string label = std::string("t=") + t + " N=" + std::to_string(N);
    try {
      auto t0 = Clock::now();
      SigmaReport s = sigma_pvi_residual(Real(t), N, P);
      Check c = make_check("sigma", label, "sigma-form PVI residual", 6, s.residual < tol, s.residual, tol,
                           "h = " + s.h.str(2) + ", sigma = " + s.sigma.str(12));
      c.seconds = seconds_since(t0);
      out.push_back(c);
    } catch (const std::exception& e) {
      out.push_back(failed_check("sigma", label, "sigma-form PVI residual", 6, e));
    }
  }
  return out;
}

struct CriticalPoint {
  std::string label;
  Couplings c;
  Regime expected;
};

// Exact points on the three critical manifolds at the working precision.
inline std::vector<CriticalPoint> critical_points() {
  Real k(Real(3) / 10);
  Real u = exp(-2 * k);
  Real curie = -log((1 - u * u) / (2 * u)) / 2;
  Real a = exp(Real(2)), b = exp(Real(16) / 10);
  Real neel = log((a * b - 1) / (a + b)) / 2;
  Real disorder = -atanh(tanh(k) * tanh(k));
  return {
      {"Curie (0.3,0.3,k3)", {k, k, curie}, Regime::CuriePoint},
      {"Neel (1,0.8,k3)", {Real(1), Real(8) / 10, -neel}, Regime::NeelPoint},
      {"disorder (0.3,0.3,k3)", {k, k, disorder}, Regime::DisorderPoint},
  };
}

inline std::vector<Check> check_gating(int P) {
  std::vector<Check> out;
  const std::string G = "gating";
  PrecisionScope scope(P + 10);
  Real rtol("1e-12");
  for (const CriticalPoint& cp : critical_points()) {
    try {
      RegimeReport rr = classify_couplings(cp.c);
      Real res = cp.expected == Regime::CuriePoint  ? abs(rr.curie_residual)
                 : cp.expected == Regime::NeelPoint ? abs(rr.neel_residual)
                                                    : abs(rr.disorder_residual);
      out.push_back(make_check(G, cp.label, std::string("detected as ") + to_string(cp.expected), 9,
                               rr.regime == cp.expected && res <= rtol, res, rtol,
                               std::string("classified ") + to_string(rr.regime)));
      std::string want = std::string("regime=") + to_string(cp.expected);
      bool refused = false;
      std::string msg = "not refused";
      try {
        garnier_correlations(cp.c, 4, P);
      } catch (const Error& e) {
        refused = e.code() == ErrorCode::RegimeRefused && e.detail().find(want) != std::string::npos;
        msg = e.what();
      }
      out.push_back(make_check(G, cp.label, "Garnier engine refuses", 9, refused, Real(refused ? 0 : 1), Real(0), msg));
      Weight w = [&] {
        PrecisionScope wider(P + 15);
        return Weight(triangular_weight(cp.c));
      }();
      MomentTable t = moment_window(w, -4, 4, P);
      CorrelationSeries s = determinant_series(t, 4);
      bool finite = std::all_of(s.values.begin(), s.values.end(), [](const Real& x) { return x.is_finite(); });
      out.push_back(make_check(G, cp.label, "determinant route still runs", 9, finite, s.values[4], Real(0),
                               std::string("scheme ") + to_string(t.scheme()) + ", I_4 = " + s.values[4].str(12)));
    } catch (const std::exception& e) {
      out.push_back(failed_check(G, cp.label, "gating", 9, e));
    }
  }
  return out;
}

}  // namespace detail

// Runs the invariant suite; grid points and independent groups run concurrently and the
// result order is fixed regardless of completion order.
inline VerifyReport run_verification(const VerifyOptions& opt = {}) {
  for (const auto& g : opt.only)
    if (std::find(verify_groups().begin(), verify_groups().end(), g) == verify_groups().end())
      throw Error(ErrorCode::InvalidInput, "unknown verification group '" + g + "'");
  auto wanted = [&](const std::string& g) { return opt.only.empty() || opt.only.count(g) > 0; };
  const int P = opt.digits;
  using Job = std::future<std::vector<Check>>;
  std::vector<Job> jobs;
  auto launch = [&](auto fn) { jobs.push_back(std::async(std::launch::async, fn)); };
  for (const GridPoint& gp : verification_grid()) {
    if (wanted("structural")) launch([gp, P] { return detail::check_structural(gp, P); });
    if (wanted("moments")) launch([gp, P] { return detail::check_moments(gp, P); });
    if (wanted("symmetry")) launch([gp, P] { return detail::check_symmetry(gp, P); });
    if (wanted("garnier")) launch([gp, P, &opt] { return detail::check_garnier(gp, P, opt.inject_moment_fault); });
  }
  if (wanted("column")) launch([P] { return detail::check_column(P); });
  if (wanted("dpv")) launch([P] { return detail::check_dpv(P); });
  if (wanted("series")) launch([P] { return detail::check_series(P); });
  if (wanted("sigma")) {
    launch([P] { return detail::check_sigma(P, "0.25"); });
    launch([P] { return detail::check_sigma(P, "4"); });
  }
  if (wanted("gating")) launch([P] { return detail::check_gating(P); });

  VerifyReport rep;
  rep.digits = P;
  for (auto& j : jobs) {
    std::vector<Check> part = j.get();
    rep.checks.insert(rep.checks.end(), part.begin(), part.end());
  }
  std::stable_sort(rep.checks.begin(), rep.checks.end(), [](const Check& a, const Check& b) {
    auto rank = [](const std::string& g) {
      return std::find(verify_groups().begin(), verify_groups().end(), g) - verify_groups().begin();
    };
    return rank(a.group) < rank(b.group);
  });
  return rep;
}

}  // namespace tricorr
