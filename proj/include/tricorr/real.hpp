#pragma once

#include <mpfr.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace tricorr {

// Working precision is per thread so that concurrent parameter points can run
// at different precisions. MPFR's own default precision is process-wide.
inline int& working_digits_slot() {
  thread_local int digits = 50;
  return digits;
}

inline int working_digits() { return working_digits_slot(); }

inline mpfr_prec_t bits_for_digits(int digits) {
  return static_cast<mpfr_prec_t>(std::ceil(digits * 3.3219280948873623)) + 4;
}

inline mpfr_prec_t working_bits() { return bits_for_digits(working_digits()); }

class PrecisionScope {
 public:
  explicit PrecisionScope(int digits) : saved_(working_digits_slot()) {
    if (digits < 5) throw std::invalid_argument("precision below 5 digits");
    working_digits_slot() = digits;
  }
  ~PrecisionScope() { working_digits_slot() = saved_; }
  PrecisionScope(const PrecisionScope&) = delete;
  PrecisionScope& operator=(const PrecisionScope&) = delete;

 private:
  int saved_;
};

class Real {
 public:
  Real() {
    mpfr_init2(v_, working_bits());
    mpfr_set_zero(v_, 1);
  }
  Real(int x) {
    mpfr_init2(v_, working_bits());
    mpfr_set_si(v_, x, MPFR_RNDN);
  }
  Real(long x) {
    mpfr_init2(v_, working_bits());
    mpfr_set_si(v_, x, MPFR_RNDN);
  }
  explicit Real(double x) {
    mpfr_init2(v_, working_bits());
    mpfr_set_d(v_, x, MPFR_RNDN);
  }
  explicit Real(std::string_view text) {
    mpfr_init2(v_, working_bits());
    std::string s(text);
    char* end = nullptr;
    if (!s.empty()) mpfr_strtofr(v_, s.c_str(), &end, 10, MPFR_RNDN);
    if (s.empty() || end == s.c_str() || *end != '\0' || !mpfr_number_p(v_)) {
      mpfr_clear(v_);
      throw std::invalid_argument("not a decimal number: '" + s + "'");
    }
  }
  Real(const Real& o) {
    mpfr_init2(v_, mpfr_get_prec(o.v_));
    mpfr_set(v_, o.v_, MPFR_RNDN);
  }
  Real(Real&& o) noexcept {
    mpfr_init2(v_, MPFR_PREC_MIN);
    mpfr_swap(v_, o.v_);
  }
  Real& operator=(const Real& o) {
    if (this != &o) {
      mpfr_set_prec(v_, mpfr_get_prec(o.v_));
      mpfr_set(v_, o.v_, MPFR_RNDN);
    }
    return *this;
  }
  Real& operator=(Real&& o) noexcept {
    mpfr_swap(v_, o.v_);
    return *this;
  }
  ~Real() { mpfr_clear(v_); }

  mpfr_ptr raw() { return v_; }
  mpfr_srcptr raw() const { return v_; }

  // Re-round onto the current working precision.
  Real rounded() const {
    Real r;
    mpfr_set(r.v_, v_, MPFR_RNDN);
    return r;
  }

  double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }
  bool is_finite() const { return mpfr_number_p(v_) != 0; }
  bool is_zero() const { return mpfr_zero_p(v_) != 0; }
  int sign() const { return mpfr_sgn(v_); }
  int digits() const { return static_cast<int>(static_cast<double>(mpfr_get_prec(v_)) / 3.3219280948873623); }

  // Decimal scientific rendering with a fixed number of significant digits.
  std::string str(int significant) const {
    if (mpfr_nan_p(v_)) return "nan";
    if (mpfr_inf_p(v_)) return mpfr_sgn(v_) > 0 ? "inf" : "-inf";
    if (significant < 1) significant = 1;
    char* buf = nullptr;
    if (mpfr_zero_p(v_)) {
      Real z = Real(0);
      mpfr_asprintf(&buf, "%.*Re", significant - 1, z.v_);
    } else {
      mpfr_asprintf(&buf, "%.*Re", significant - 1, v_);
    }
    std::string out(buf);
    mpfr_free_str(buf);
    return out;
  }

  Real operator-() const {
    Real r;
    mpfr_neg(r.v_, v_, MPFR_RNDN);
    return r;
  }

  Real& operator+=(const Real& o) { return *this = *this + o; }
  Real& operator-=(const Real& o) { return *this = *this - o; }
  Real& operator*=(const Real& o) { return *this = *this * o; }
  Real& operator/=(const Real& o) { return *this = *this / o; }

#define TRICORR_REAL_BINOP(OP, FN, FN_SI, FN_SI_REV)                                   \
  friend Real operator OP(const Real& a, const Real& b) {                              \
    Real r;                                                                            \
    FN(r.v_, a.v_, b.v_, MPFR_RNDN);                                                   \
    return r;                                                                          \
  }                                                                                    \
  friend Real operator OP(const Real& a, long b) {                                     \
    Real r;                                                                            \
    FN_SI(r.v_, a.v_, b, MPFR_RNDN);                                                   \
    return r;                                                                          \
  }                                                                                    \
  friend Real operator OP(const Real& a, int b) { return a OP static_cast<long>(b); } \
  friend Real operator OP(long a, const Real& b) {                                     \
    Real r;                                                                            \
    FN_SI_REV;                                                                         \
    return r;                                                                          \
  }                                                                                    \
  friend Real operator OP(int a, const Real& b) { return static_cast<long>(a) OP b; }

  TRICORR_REAL_BINOP(+, mpfr_add, mpfr_add_si, mpfr_add_si(r.v_, b.v_, a, MPFR_RNDN))
  TRICORR_REAL_BINOP(-, mpfr_sub, mpfr_sub_si, mpfr_si_sub(r.v_, a, b.v_, MPFR_RNDN))
  TRICORR_REAL_BINOP(*, mpfr_mul, mpfr_mul_si, mpfr_mul_si(r.v_, b.v_, a, MPFR_RNDN))
  TRICORR_REAL_BINOP(/, mpfr_div, mpfr_div_si, mpfr_si_div(r.v_, a, b.v_, MPFR_RNDN))
#undef TRICORR_REAL_BINOP

  friend bool operator<(const Real& a, const Real& b) { return mpfr_less_p(a.v_, b.v_); }
  friend bool operator>(const Real& a, const Real& b) { return mpfr_greater_p(a.v_, b.v_); }
  friend bool operator<=(const Real& a, const Real& b) { return mpfr_lessequal_p(a.v_, b.v_); }
  friend bool operator>=(const Real& a, const Real& b) { return mpfr_greaterequal_p(a.v_, b.v_); }
  friend bool operator==(const Real& a, const Real& b) { return mpfr_equal_p(a.v_, b.v_); }
  friend bool operator!=(const Real& a, const Real& b) { return !mpfr_equal_p(a.v_, b.v_); }
  friend bool operator<(const Real& a, int b) { return mpfr_cmp_si(a.v_, b) < 0; }
  friend bool operator>(const Real& a, int b) { return mpfr_cmp_si(a.v_, b) > 0; }
  friend bool operator<=(const Real& a, int b) { return mpfr_cmp_si(a.v_, b) <= 0; }
  friend bool operator>=(const Real& a, int b) { return mpfr_cmp_si(a.v_, b) >= 0; }
  friend bool operator==(const Real& a, int b) { return mpfr_cmp_si(a.v_, b) == 0; }
  friend bool operator!=(const Real& a, int b) { return mpfr_cmp_si(a.v_, b) != 0; }

  friend std::ostream& operator<<(std::ostream& os, const Real& x) {
    return os << x.str(static_cast<int>(os.precision()));
  }

#define TRICORR_REAL_UNARY(NAME, FN) \
  friend Real NAME(const Real& x) {  \
    Real r;                          \
    FN(r.v_, x.v_, MPFR_RNDN);       \
    return r;                        \
  }
  TRICORR_REAL_UNARY(sqrt, mpfr_sqrt)
  TRICORR_REAL_UNARY(abs, mpfr_abs)
  TRICORR_REAL_UNARY(exp, mpfr_exp)
  TRICORR_REAL_UNARY(log, mpfr_log)
  TRICORR_REAL_UNARY(log10, mpfr_log10)
  TRICORR_REAL_UNARY(log1p, mpfr_log1p)
  TRICORR_REAL_UNARY(expm1, mpfr_expm1)
  TRICORR_REAL_UNARY(sin, mpfr_sin)
  TRICORR_REAL_UNARY(cos, mpfr_cos)
  TRICORR_REAL_UNARY(tanh, mpfr_tanh)
  TRICORR_REAL_UNARY(sinh, mpfr_sinh)
  TRICORR_REAL_UNARY(cosh, mpfr_cosh)
  TRICORR_REAL_UNARY(atanh, mpfr_atanh)
  TRICORR_REAL_UNARY(asinh, mpfr_asinh)
  TRICORR_REAL_UNARY(atan, mpfr_atan)
#undef TRICORR_REAL_UNARY

  friend Real atan2(const Real& y, const Real& x) {
    Real r;
    mpfr_atan2(r.v_, y.v_, x.v_, MPFR_RNDN);
    return r;
  }
  friend Real hypot(const Real& x, const Real& y) {
    Real r;
    mpfr_hypot(r.v_, x.v_, y.v_, MPFR_RNDN);
    return r;
  }
  friend Real pow(const Real& x, long k) {
    Real r;
    mpfr_pow_si(r.v_, x.v_, k, MPFR_RNDN);
    return r;
  }
  friend Real pow(const Real& x, int k) { return pow(x, static_cast<long>(k)); }
  friend Real pow(const Real& x, const Real& y) {
    Real r;
    mpfr_pow(r.v_, x.v_, y.v_, MPFR_RNDN);
    return r;
  }
  friend void sin_cos(const Real& x, Real& s, Real& c) {
    s = Real();
    c = Real();
    mpfr_sin_cos(s.v_, c.v_, x.v_, MPFR_RNDN);
  }
  friend Real ldexp(const Real& x, long e) {
    Real r;
    mpfr_mul_2si(r.v_, x.v_, e, MPFR_RNDN);
    return r;
  }

  static Real pi() {
    Real r;
    mpfr_const_pi(r.v_, MPFR_RNDN);
    return r;
  }
  static Real nan() {
    Real r;
    mpfr_set_nan(r.v_);
    return r;
  }
  // 10^e at working precision.
  static Real pow10(long e) {
    Real r;
    mpfr_ui_pow_ui(r.v_, 10, static_cast<unsigned long>(e < 0 ? -e : e), MPFR_RNDN);
    if (e < 0) mpfr_ui_div(r.v_, 1, r.v_, MPFR_RNDN);
    return r;
  }

 private:
  mpfr_t v_;
};

inline Real max(const Real& a, const Real& b) { return a < b ? b : a; }
inline Real min(const Real& a, const Real& b) { return b < a ? b : a; }

// Number of agreeing significant decimal digits between two values, clipped to [0, cap].
inline double matching_digits(const Real& approx, const Real& exact, double cap = 1e6) {
  Real diff = abs(approx - exact);
  if (diff.is_zero()) return cap;
  Real scale = abs(exact).is_zero() ? Real(1) : abs(exact);
  double d = -log10(diff / scale).to_double();
  if (d < 0) return 0;
  return d > cap ? cap : d;
}

inline Real relative_error(const Real& approx, const Real& exact) {
  Real diff = abs(approx - exact);
  if (exact.is_zero()) return diff;
  return diff / abs(exact);
}

template <class T>
struct Complex {
  T re;
  T im;

  Complex() : re(0), im(0) {}
  Complex(int x) : re(x), im(0) {}
  Complex(const T& r) : re(r), im(0) {}
  Complex(const T& r, const T& i) : re(r), im(i) {}

  Complex operator-() const { return {-re, -im}; }
  Complex& operator+=(const Complex& o) { return *this = *this + o; }
  Complex& operator-=(const Complex& o) { return *this = *this - o; }
  Complex& operator*=(const Complex& o) { return *this = *this * o; }
  Complex& operator/=(const Complex& o) { return *this = *this / o; }

  friend Complex operator+(const Complex& a, const Complex& b) { return {a.re + b.re, a.im + b.im}; }
  friend Complex operator-(const Complex& a, const Complex& b) { return {a.re - b.re, a.im - b.im}; }
  friend Complex operator*(const Complex& a, const Complex& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
  }
  friend Complex operator/(const Complex& a, const Complex& b) {
    T den = b.re * b.re + b.im * b.im;
    return {(a.re * b.re + a.im * b.im) / den, (a.im * b.re - a.re * b.im) / den};
  }
  friend Complex operator+(const Complex& a, const T& b) { return {a.re + b, a.im}; }
  friend Complex operator+(const T& a, const Complex& b) { return {a + b.re, b.im}; }
  friend Complex operator-(const Complex& a, const T& b) { return {a.re - b, a.im}; }
  friend Complex operator-(const T& a, const Complex& b) { return {a - b.re, -b.im}; }
  friend Complex operator*(const Complex& a, const T& b) { return {a.re * b, a.im * b}; }
  friend Complex operator*(const T& a, const Complex& b) { return {a * b.re, a * b.im}; }
  friend Complex operator/(const Complex& a, const T& b) { return {a.re / b, a.im / b}; }
  friend Complex operator/(const T& a, const Complex& b) { return Complex(a) / b; }
  friend Complex operator+(const Complex& a, int b) { return {a.re + b, a.im}; }
  friend Complex operator+(int a, const Complex& b) { return {a + b.re, b.im}; }
  friend Complex operator-(const Complex& a, int b) { return {a.re - b, a.im}; }
  friend Complex operator-(int a, const Complex& b) { return {a - b.re, -b.im}; }
  friend Complex operator*(const Complex& a, int b) { return {a.re * b, a.im * b}; }
  friend Complex operator*(int a, const Complex& b) { return {a * b.re, a * b.im}; }
  friend Complex operator/(const Complex& a, int b) { return {a.re / b, a.im / b}; }
  friend Complex operator/(int a, const Complex& b) { return Complex(a) / b; }

  friend bool operator==(const Complex& a, const Complex& b) { return a.re == b.re && a.im == b.im; }

  friend T abs(const Complex& z) { return hypot(z.re, z.im); }
  friend Complex conj(const Complex& z) { return {z.re, -z.im}; }
  friend Complex pow(const Complex& z, int k) {
    Complex base = k < 0 ? Complex(1) / z : z;
    unsigned e = static_cast<unsigned>(k < 0 ? -k : k);
    Complex out(1);
    while (e) {
      if (e & 1u) out = out * base;
      base = base * base;
      e >>= 1;
    }
    return out;
  }
  // Principal branch.
  friend Complex sqrt(const Complex& z) {
    if (z.im.is_zero()) {
      if (z.re.sign() >= 0) return {sqrt(z.re), T(0)};
      return {T(0), sqrt(-z.re)};
    }
    T m = abs(z);
    T a = sqrt((m + z.re) / 2);
    T b = z.im / (2 * a);
    return {a, b};
  }
};

using ComplexReal = Complex<Real>;

inline const Real& real_part(const Real& x) { return x; }
inline Real imag_part(const Real&) { return Real(0); }
inline const Real& real_part(const ComplexReal& z) { return z.re; }
inline const Real& imag_part(const ComplexReal& z) { return z.im; }
inline bool is_finite(const Real& x) { return x.is_finite(); }
inline bool is_finite(const ComplexReal& z) { return z.re.is_finite() && z.im.is_finite(); }

}  // namespace tricorr
