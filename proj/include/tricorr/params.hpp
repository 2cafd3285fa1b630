#pragma once

#include <algorithm>
#include <array>
#include <string>

#include "tricorr/errors.hpp"
#include "tricorr/real.hpp"

namespace tricorr {

struct Couplings {
  Real k1;
  Real k2;
  Real k3;

  static Couplings parse(const std::string& a, const std::string& b, const std::string& c) {
    return {Real(a), Real(b), Real(c)};
  }
};

enum class Regime {
  FerroOrdered,
  FerroDisordered,
  AntiferroLowT,
  AntiferroIntermediate,
  AntiferroHighT,
  CuriePoint,
  NeelPoint,
  DisorderPoint,
  ZeroT,
  InfiniteT,
  Unphysical,
};

inline const char* to_string(Regime r) {
  switch (r) {
    case Regime::FerroOrdered: return "FerroOrdered";
    case Regime::FerroDisordered: return "FerroDisordered";
    case Regime::AntiferroLowT: return "AntiferroLowT";
    case Regime::AntiferroIntermediate: return "AntiferroIntermediate";
    case Regime::AntiferroHighT: return "AntiferroHighT";
    case Regime::CuriePoint: return "CuriePoint";
    case Regime::NeelPoint: return "NeelPoint";
    case Regime::DisorderPoint: return "DisorderPoint";
    case Regime::ZeroT: return "ZeroT";
    case Regime::InfiniteT: return "InfiniteT";
    case Regime::Unphysical: return "Unphysical";
  }
  return "Unknown";
}

inline bool is_generic(Regime r) {
  return r == Regime::FerroOrdered || r == Regime::FerroDisordered || r == Regime::AntiferroLowT ||
         r == Regime::AntiferroIntermediate || r == Regime::AntiferroHighT;
}

// Phases in which the weight has no winding, so the symbol is +1 at zeta = 1.
inline bool is_ordered(Regime r) { return r == Regime::FerroOrdered || r == Regime::AntiferroLowT; }

struct Tolerances {
  double regime = 1e-12;
  double sep = 1e-10;
};

struct RegimeReport {
  Regime regime = Regime::Unphysical;
  // 'A' when K1*K2*K3 >= 0 (ferromagnetic up to a sign flip of two couplings), else 'B'.
  char lattice_class = 'A';
  // Critical-condition residuals, normalised by the sum of the magnitudes of their terms.
  // The Neel and disorder residuals are only meaningful for class B, the Curie one for class A.
  Real curie_residual = Real::nan();
  Real neel_residual = Real::nan();
  Real disorder_residual = Real::nan();
  Real min_separation = Real::nan();
};

struct LatticeData {
  std::array<Real, 3> z;
  std::array<Real, 3> v;
  Real gamma;
  Real delta_sq;
  ComplexReal delta;
  Real delta_bar_sq;
  ComplexReal d_script;
  Real d_script_sq_zform;
  std::array<ComplexReal, 4> zeta;
  std::array<Real, 4> rho;
  std::array<Real, 5> e;
  std::array<Real, 4> m;
  RegimeReport report;
  Regime regime = Regime::Unphysical;

  bool complex_discriminant() const { return delta_sq.sign() < 0; }
};

namespace detail {

inline void check_couplings(const Couplings& c) {
  if (!c.k1.is_finite() || !c.k2.is_finite() || !c.k3.is_finite())
    throw Error(ErrorCode::NonFiniteInput, "couplings must be finite");
  if (c.k1.is_zero() && c.k2.is_zero() && c.k3.is_zero())
    throw Error(ErrorCode::InvalidInput, "at least one coupling must be nonzero");
}

}  // namespace detail

// Classification from the couplings alone; works on the square-lattice plane k3 = 0 too.
inline RegimeReport classify_couplings(const Couplings& c, const Tolerances& tol = {}) {
  detail::check_couplings(c);
  RegimeReport rep;
  std::array<Real, 3> k{abs(c.k1), abs(c.k2), abs(c.k3)};
  int negatives = (c.k1.sign() < 0) + (c.k2.sign() < 0) + (c.k3.sign() < 0);
  bool any_zero = c.k1.is_zero() || c.k2.is_zero() || c.k3.is_zero();
  rep.lattice_class = (any_zero || negatives % 2 == 0) ? 'A' : 'B';

  Real kmax = max(k[0], max(k[1], k[2]));
  if (kmax <= Real(tol.sep)) {
    rep.regime = Regime::InfiniteT;
    return rep;
  }

  Real rtol(tol.regime);
  if (rep.lattice_class == 'A') {
    std::array<Real, 3> u{exp(-2 * k[0]), exp(-2 * k[1]), exp(-2 * k[2])};
    Real terms = u[0] * u[1] + u[0] * u[2] + u[1] * u[2];
    rep.curie_residual = (terms - 1) / (terms + 1);
    if (u[0].is_zero() || u[1].is_zero() || u[2].is_zero())
      rep.regime = Regime::Unphysical;
    else if (abs(rep.curie_residual) <= rtol)
      rep.regime = Regime::CuriePoint;
    else
      rep.regime = rep.curie_residual.sign() < 0 ? Regime::FerroOrdered : Regime::FerroDisordered;
    return rep;
  }

  std::sort(k.begin(), k.end(), [](const Real& a, const Real& b) { return a > b; });
  std::array<Real, 3> u{exp(2 * k[0]), exp(2 * k[1]), exp(2 * k[2])};
  Real ab = u[0] * u[1];
  Real cab = u[2] * (u[0] + u[1]);
  Real scale = ab + cab + 1;
  rep.neel_residual = (ab - cab - 1) / scale;
  rep.disorder_residual = (cab - ab - 1) / scale;
  bool neel = abs(rep.neel_residual) <= rtol;
  bool disorder = abs(rep.disorder_residual) <= rtol;
  if (neel && disorder)
    throw Error(ErrorCode::AmbiguousRegime, "Neel residual " + rep.neel_residual.str(6) + " and disorder residual " +
                                                rep.disorder_residual.str(6) + " both within tolerance");
  if (!u[0].is_finite() || !u[1].is_finite() || !u[2].is_finite())
    rep.regime = Regime::Unphysical;
  else if (neel)
    rep.regime = Regime::NeelPoint;
  else if (disorder)
    rep.regime = Regime::DisorderPoint;
  else if (rep.neel_residual.sign() > 0)
    rep.regime = Regime::AntiferroLowT;
  else if (rep.disorder_residual.sign() > 0)
    rep.regime = Regime::AntiferroHighT;
  else
    rep.regime = Regime::AntiferroIntermediate;
  return rep;
}

inline Couplings couplings_from_v(const std::array<Real, 3>& v) {
  return {-log(v[0]) / 2, -log(v[1]) / 2, -log(v[2]) / 2};
}

inline Regime classify(const LatticeData& d, const Tolerances& tol = {}) {
  return classify_couplings(couplings_from_v(d.v), tol).regime;
}

inline LatticeData derive(const Couplings& c, const Tolerances& tol = {}) {
  detail::check_couplings(c);
  if (c.k3.is_zero())
    throw Error(ErrorCode::SquareDiagonalLimit, "k3 = 0 is the square-lattice diagonal case; use the dPV route");

  LatticeData d;
  d.z = {tanh(c.k1), tanh(c.k2), tanh(c.k3)};
  d.v = {exp(-2 * c.k1), exp(-2 * c.k2), exp(-2 * c.k3)};
  const Real& v1 = d.v[0];
  const Real& v2 = d.v[1];
  const Real& v3 = d.v[2];
  Real V = v1 * v2;
  Real v1s = v1 * v1, v2s = v2 * v2, v3s = v3 * v3;
  Real om = 1 - v3s;
  Real om2 = om * om;

  d.gamma = 1 + V * V - (v1s + v2s) * v3s;
  d.delta_sq = (1 + V - v1 * v3 - v2 * v3) * (1 - V - v1 * v3 + v2 * v3) * (1 - V + v1 * v3 - v2 * v3) *
               (1 + V + v1 * v3 + v2 * v3);
  d.delta = sqrt(ComplexReal(d.delta_sq));
  d.delta_bar_sq = (1 - V + v1 * v3 + v2 * v3) * (1 + V + v1 * v3 - v2 * v3) * (1 + V - v1 * v3 + v2 * v3) *
                   (1 - V - v1 * v3 - v2 * v3);
  Real pv = (1 + v1) * (1 + v2) * (1 + v3);
  d.d_script = d.delta * Real(4) / (pv * pv);
  const Real& z1 = d.z[0];
  const Real& z2 = d.z[1];
  const Real& z3 = d.z[2];
  d.d_script_sq_zform = (z1 + z2 * z3) * (z2 + z1 * z3) * (z3 + z1 * z2) * (1 + z1 * z2 * z3);

  Real dm = 2 * V * (1 - v3) * (1 - v3);
  Real dp = 2 * V * (1 + v3) * (1 + v3);
  ComplexReal gp = d.delta + d.gamma;
  ComplexReal gm = ComplexReal(d.gamma) - d.delta;
  d.zeta = {gp / dm, gm / dm, gp / dp, gm / dp};
  Real half = Real(1) / 2;
  d.rho = {half, half, -half, -half};

  Real s = (v1s + v2s) * v3s - V * V - 1;
  Real e1 = -2 * (1 + v3s) * s / (V * om2);
  Real e2 = ((v1s * v1s + 4 * V * V + v2s * v2s) * v3s * v3s -
             2 * (v1s * v1s * v2s + v1s * v2s * v2s - 6 * V * V + v1s + v2s) * v3s + V * V * V * V + 4 * V * V + 1) /
            (V * V * om2);
  d.e = {Real(1), e1, e2, e1, Real(1)};
  Real m1 = 2 * v3 * s / (V * om2);
  d.m = {Real(0), m1, -8 * v3 * (1 + v3s) / om2, m1};

  d.report = classify_couplings(c, tol);
  Real zmax(0);
  for (const auto& x : d.zeta) zmax = max(zmax, abs(x));
  Real sep = zmax;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) sep = min(sep, abs(d.zeta[i] - d.zeta[j]));
  d.report.min_separation = sep / zmax;
  if (is_generic(d.report.regime) && d.report.min_separation <= Real(tol.sep)) {
    Real kmax = max(abs(c.k1), max(abs(c.k2), abs(c.k3)));
    d.report.regime = kmax < 1 ? Regime::InfiniteT : Regime::ZeroT;
  }
  d.regime = d.report.regime;
  return d;
}

enum class Parity { Even, Alternating };

struct SymmetryImage {
  Couplings couplings;
  Parity parity;

  // Sign s(n) with w_n(original) = s(n) * w_n(transformed).
  int sign(int n) const {
    if (parity == Parity::Even) return 1;
    return (n % 2 == 0) ? -1 : 1;
  }
};

inline SymmetryImage symmetry_transform(const Couplings& c, const std::array<int, 3>& flips) {
  for (int f : flips)
    if (f != 1 && f != -1) throw Error(ErrorCode::InvalidFlipPattern, "flip entries must be +1 or -1");
  Couplings out{flips[0] < 0 ? -c.k1 : c.k1, flips[1] < 0 ? -c.k2 : c.k2, flips[2] < 0 ? -c.k3 : c.k3};
  int neg = (flips[0] < 0) + (flips[1] < 0) + (flips[2] < 0);
  if (neg == 0) return {out, Parity::Even};
  if (neg == 2) return {out, flips[2] > 0 ? Parity::Even : Parity::Alternating};
  throw Error(ErrorCode::InvalidFlipPattern, "an odd number of sign flips is not a symmetry of the weight");
}

}  // namespace tricorr
