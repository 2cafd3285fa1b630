#pragma once

#include <gtest/gtest.h>

#include <string>

#include "tricorr/tricorr.hpp"

namespace tricorr::testing {

// Relative agreement to at least `digits` significant digits.
inline ::testing::AssertionResult agree(const Real& got, const std::string& want, double digits) {
  Real ref(want);
  double m = matching_digits(got, ref);
  if (m >= digits) return ::testing::AssertionSuccess();
  return ::testing::AssertionFailure() << got.str(30) << " vs " << want.substr(0, 32) << ": " << m << " digits, need "
                                       << digits;
}

inline ::testing::AssertionResult agree(const Real& got, const Real& want, double digits) {
  double m = matching_digits(got, want);
  if (m >= digits) return ::testing::AssertionSuccess();
  return ::testing::AssertionFailure() << got.str(30) << " vs " << want.str(30) << ": " << m << " digits, need "
                                       << digits;
}

template <class F>
::testing::AssertionResult throws_code(F&& f, ErrorCode want) {
  try {
    f();
  } catch (const Error& e) {
    if (e.code() == want) return ::testing::AssertionSuccess();
    return ::testing::AssertionFailure() << "threw " << to_string(e.code()) << ": " << e.what();
  }
  return ::testing::AssertionFailure() << "did not throw " << to_string(want);
}

inline Couplings K(const char* a, const char* b, const char* c) { return Couplings::parse(a, b, c); }

}  // namespace tricorr::testing
