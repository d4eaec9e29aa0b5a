#pragma once

#include <stdexcept>
#include <string>

namespace dupinlab {

enum class ErrorCode {
  SignatureMismatch,
  OrderOutOfRange,
  OrderUnavailable,
  DivisionNearZero,
  DomainError,
  DimensionMismatch,
  SyntaxError,
  ArityError,
  UnknownIdentifier,
  PointOutsideDomain,
  RankDeficient,
  GroupingAmbiguous,
  DegenerateDenominator,
  MetricNotPositive,
  FrameMismatch,
  UmbilicPoint,
  PointAtInfinity,
  PatternMismatch,
  VanishingPrincipalCurvature,
  SameGroup,
  TolAmbiguous,
  InvalidCloud,
  BadDimensions,
  DegenerateAngle,
  PoleProximity,
  BadKappa,
  ConfigError,
};

inline const char* to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::SignatureMismatch: return "SignatureMismatch";
    case ErrorCode::OrderOutOfRange: return "OrderOutOfRange";
    case ErrorCode::OrderUnavailable: return "OrderUnavailable";
    case ErrorCode::DivisionNearZero: return "DivisionNearZero";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::ArityError: return "ArityError";
    case ErrorCode::UnknownIdentifier: return "UnknownIdentifier";
    case ErrorCode::PointOutsideDomain: return "PointOutsideDomain";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::GroupingAmbiguous: return "GroupingAmbiguous";
    case ErrorCode::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorCode::MetricNotPositive: return "MetricNotPositive";
    case ErrorCode::FrameMismatch: return "FrameMismatch";
    case ErrorCode::UmbilicPoint: return "UmbilicPoint";
    case ErrorCode::PointAtInfinity: return "PointAtInfinity";
    case ErrorCode::PatternMismatch: return "PatternMismatch";
    case ErrorCode::VanishingPrincipalCurvature: return "VanishingPrincipalCurvature";
    case ErrorCode::SameGroup: return "SameGroup";
    case ErrorCode::TolAmbiguous: return "TolAmbiguous";
    case ErrorCode::InvalidCloud: return "InvalidCloud";
    case ErrorCode::BadDimensions: return "BadDimensions";
    case ErrorCode::DegenerateAngle: return "DegenerateAngle";
    case ErrorCode::PoleProximity: return "PoleProximity";
    case ErrorCode::BadKappa: return "BadKappa";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }
  const char* name() const noexcept { return to_string(code_); }

 private:
  ErrorCode code_;
};

// Parse failure with a 1-based source position.
class SyntaxError : public Error {
 public:
  SyntaxError(int line, int column, std::string expected)
      : Error(ErrorCode::SyntaxError, "line " + std::to_string(line) + ", column " +
                                          std::to_string(column) + ": expected " + expected),
        line(line), column(column), expected(std::move(expected)) {}
  int line;
  int column;
  std::string expected;
};

// Errors that indicate the input geometry itself is unusable, as opposed to
// malformed input text or configuration.
inline bool is_geometric(ErrorCode c) {
  switch (c) {
    case ErrorCode::RankDeficient:
    case ErrorCode::UmbilicPoint:
    case ErrorCode::PointAtInfinity:
    case ErrorCode::PatternMismatch:
    case ErrorCode::VanishingPrincipalCurvature:
    case ErrorCode::GroupingAmbiguous:
    case ErrorCode::DegenerateDenominator:
    case ErrorCode::MetricNotPositive:
    case ErrorCode::DivisionNearZero:
    case ErrorCode::DomainError:
    case ErrorCode::PoleProximity:
    case ErrorCode::TolAmbiguous:
    case ErrorCode::SameGroup:
      return true;
    default:
      return false;
  }
}

}  // namespace dupinlab
