#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace algcalc {

enum class ErrorCode {
  DimensionMismatch,
  NonSmoothPoint,
  OrderExceeded,
  SyntaxError,
  UnknownIdentifier,
  ArityError,
  SingularFrame,
  SingularTransition,
  SingularMetric,
  IndexOutOfRange,
  AntisymmetryViolation,
  DependenceViolation,
  EmptyBox,
  ParseError,
  ShapeError,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

template <ErrorCode C>
class CodedError : public Error {
 public:
  explicit CodedError(const std::string& message) : Error(C, message) {}
};

using DimensionMismatch = CodedError<ErrorCode::DimensionMismatch>;
using NonSmoothPoint = CodedError<ErrorCode::NonSmoothPoint>;
using OrderExceeded = CodedError<ErrorCode::OrderExceeded>;
using ArityError = CodedError<ErrorCode::ArityError>;
using SingularFrame = CodedError<ErrorCode::SingularFrame>;
using SingularTransition = CodedError<ErrorCode::SingularTransition>;
using SingularMetric = CodedError<ErrorCode::SingularMetric>;
using IndexOutOfRange = CodedError<ErrorCode::IndexOutOfRange>;
using AntisymmetryViolation = CodedError<ErrorCode::AntisymmetryViolation>;
using DependenceViolation = CodedError<ErrorCode::DependenceViolation>;
using EmptyBox = CodedError<ErrorCode::EmptyBox>;
using ParseError = CodedError<ErrorCode::ParseError>;
using ShapeError = CodedError<ErrorCode::ShapeError>;

// Carries the byte offset of the offending token and what would have been accepted there.
class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t offset, std::vector<std::string> expected, const std::string& found);
  std::size_t offset() const { return offset_; }
  const std::vector<std::string>& expected() const { return expected_; }

 private:
  std::size_t offset_;
  std::vector<std::string> expected_;
};

class UnknownIdentifier : public Error {
 public:
  UnknownIdentifier(std::string name, std::size_t offset);
  const std::string& name() const { return name_; }
  std::size_t offset() const { return offset_; }

 private:
  std::string name_;
  std::size_t offset_;
};

}  // namespace algcalc
