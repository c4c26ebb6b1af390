#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace inkeval {

enum class ErrorKind {
  InvalidValue,
  NoScoreFound,
  ScoreOutOfRange,
  NonInteger,
  MalformedJson,
  SchemaMismatch,
  LengthMismatch,
  EmptyInput,
  EmptyGt,
  GroupTooSmall,
  NotAPermutation,
  SizeMismatch,
  EndpointUnavailable,
  AuthError,
  ResponseEmpty,
  RequestRejected,
  ScoreUnparseable,
  NoValidCandidates,
  NonPositiveValuation,
  LabelOutOfRange,
  ConstructorUnavailable,
  ScoreInconsistent,
  NonPositiveDimensions,
  IoFailure,
  SchemaVersionMismatch,
  ValidationFailure,
  Usage,
};

std::string_view to_string(ErrorKind kind);

// True for failures caused by an external service rather than local data.
bool is_external(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail);

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

}  // namespace inkeval
