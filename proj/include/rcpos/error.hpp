#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rcpos {

enum class ErrorCode {
  NotHermitian,
  NoConvergence,
  BadParameter,
  ParseError,
  NonHermitianSpec,
  MissingDiagonal,
  UnknownCatalogEntry,
  OutOfDomain,
  SingularExpression,
  NotPositiveDefinite,
  SingularMetric,
  RankMismatch,
  RankOverflow,
  BadIndexSet,
  FrameDegenerate,
  GaugeFailure,
  DimensionMismatch,
  NotKahler,
  ConfigError,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotHermitian: return "NotHermitian";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::BadParameter: return "BadParameter";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::NonHermitianSpec: return "NonHermitianSpec";
    case ErrorCode::MissingDiagonal: return "MissingDiagonal";
    case ErrorCode::UnknownCatalogEntry: return "UnknownCatalogEntry";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::SingularExpression: return "SingularExpression";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::SingularMetric: return "SingularMetric";
    case ErrorCode::RankMismatch: return "RankMismatch";
    case ErrorCode::RankOverflow: return "RankOverflow";
    case ErrorCode::BadIndexSet: return "BadIndexSet";
    case ErrorCode::FrameDegenerate: return "FrameDegenerate";
    case ErrorCode::GaugeFailure: return "GaugeFailure";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotKahler: return "NotKahler";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Parse failures additionally record where in the source they happened (1-based).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line, int column)
      : Error(ErrorCode::ParseError,
              "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

}  // namespace rcpos
