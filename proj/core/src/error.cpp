#include "algcalc/error.hpp"

namespace algcalc {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonSmoothPoint: return "NonSmoothPoint";
    case ErrorCode::OrderExceeded: return "OrderExceeded";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::UnknownIdentifier: return "UnknownIdentifier";
    case ErrorCode::ArityError: return "ArityError";
    case ErrorCode::SingularFrame: return "SingularFrame";
    case ErrorCode::SingularTransition: return "SingularTransition";
    case ErrorCode::SingularMetric: return "SingularMetric";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::AntisymmetryViolation: return "AntisymmetryViolation";
    case ErrorCode::DependenceViolation: return "DependenceViolation";
    case ErrorCode::EmptyBox: return "EmptyBox";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ShapeError: return "ShapeError";
  }
  return "Error";
}

namespace {

std::string syntax_message(std::size_t offset, const std::vector<std::string>& expected,
                           const std::string& found) {
  std::string msg = "syntax error at offset " + std::to_string(offset) + ": expected ";
  if (expected.size() > 1) msg += "one of ";
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (i) msg += ", ";
    msg += expected[i];
  }
  msg += " but found " + found;
  return msg;
}

}  // namespace

SyntaxError::SyntaxError(std::size_t offset, std::vector<std::string> expected,
                         const std::string& found)
    : Error(ErrorCode::SyntaxError, syntax_message(offset, expected, found)),
      offset_(offset),
      expected_(std::move(expected)) {}

UnknownIdentifier::UnknownIdentifier(std::string name, std::size_t offset)
    : Error(ErrorCode::UnknownIdentifier,
            "unknown identifier '" + name + "' at offset " + std::to_string(offset)),
      name_(std::move(name)),
      offset_(offset) {}

}  // namespace algcalc
