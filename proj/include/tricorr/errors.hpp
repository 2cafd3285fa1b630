#pragma once

#include <stdexcept>
#include <string>

namespace tricorr {

enum class ErrorCode {
  NonFiniteInput,
  InvalidInput,
  SquareDiagonalLimit,
  ComplexDiscriminant,
  AmbiguousRegime,
  InvalidFlipPattern,
  RegimeRefused,
  DenominatorVanishes,
  NoConvergence,
  MissingMoments,
  WindowTooSmall,
  OrderDropIndex,
  LeadingCoefficientZero,
  SingularMatrix,
  DivisionByZero,
  InitDenominatorZero,
  ZeroF,
  GuardBracketZero,
  GuardSZero,
  NonFinite,
  StencilCrossesCritical,
  PrecisionExhausted,
};

inline const char* to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::SquareDiagonalLimit: return "SquareDiagonalLimit";
    case ErrorCode::ComplexDiscriminant: return "ComplexDiscriminant";
    case ErrorCode::AmbiguousRegime: return "AmbiguousRegime";
    case ErrorCode::InvalidFlipPattern: return "InvalidFlipPattern";
    case ErrorCode::RegimeRefused: return "RegimeRefused";
    case ErrorCode::DenominatorVanishes: return "DenominatorVanishes";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::MissingMoments: return "MissingMoments";
    case ErrorCode::WindowTooSmall: return "WindowTooSmall";
    case ErrorCode::OrderDropIndex: return "OrderDropIndex";
    case ErrorCode::LeadingCoefficientZero: return "LeadingCoefficientZero";
    case ErrorCode::SingularMatrix: return "SingularMatrix";
    case ErrorCode::DivisionByZero: return "DivisionByZero";
    case ErrorCode::InitDenominatorZero: return "InitDenominatorZero";
    case ErrorCode::ZeroF: return "ZeroF";
    case ErrorCode::GuardBracketZero: return "GuardBracketZero";
    case ErrorCode::GuardSZero: return "GuardSZero";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::StencilCrossesCritical: return "StencilCrossesCritical";
    case ErrorCode::PrecisionExhausted: return "PrecisionExhausted";
  }
  return "Unknown";
}

// Refusals caused by the input lying outside a route's domain map to exit
// code 2 in the CLI; everything else is a numerical failure.
inline bool is_domain_refusal(ErrorCode c) {
  switch (c) {
    case ErrorCode::NonFiniteInput:
    case ErrorCode::InvalidInput:
    case ErrorCode::SquareDiagonalLimit:
    case ErrorCode::ComplexDiscriminant:
    case ErrorCode::AmbiguousRegime:
    case ErrorCode::InvalidFlipPattern:
    case ErrorCode::RegimeRefused:
    case ErrorCode::StencilCrossesCritical:
      return true;
    default:
      return false;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail, int index = -1)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code), index_(index),
        detail_(detail) {}

  ErrorCode code() const { return code_; }
  // Step or moment index at which the failure happened, -1 when not applicable.
  int index() const { return index_; }
  const std::string& detail() const { return detail_; }

 private:
  ErrorCode code_;
  int index_;
  std::string detail_;
};

}  // namespace tricorr
