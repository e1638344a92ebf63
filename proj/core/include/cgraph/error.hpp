#pragma once

#include <cstddef>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cgraph {

enum class ErrorCode {
  InvalidArgument,
  UnknownConcept,
  DuplicateConcept,
  EmptyConcept,
  SelfLoop,
  OrderingMismatch,
  MissingContext,
  UnparseableVerdict,
  MissingLabels,
  InsufficientPositives,
  InsufficientNegatives,
  EmptyQuery,
  NonSquare,
  DimensionMismatch,
  MissingEmbedding,
  DegenerateLabels,
  LengthMismatch,
  EmptyInput,
  EmptyList,
  EmbedderFailure,
  SyntaxError,
  FallbackExhausted,
  Transport,
  RateLimited,
  AuthFailure,
  UnrecognizedPrompt,
  FixtureMiss,
  Io,
  Format,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Base exception for every failure raised by the library. The code lets
/// callers branch on failure class without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised by the query-language parser. `offset` is a byte offset into the
/// input; `expected` lists the token classes that would have been accepted.
class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t offset, std::set<std::string> expected,
              const std::string& message);

  std::size_t offset() const noexcept { return offset_; }
  const std::set<std::string>& expected() const noexcept { return expected_; }

 private:
  std::size_t offset_;
  std::set<std::string> expected_;
};

/// True for transport-class errors that a retry loop may try again.
inline bool is_transient(ErrorCode code) noexcept {
  return code == ErrorCode::Transport || code == ErrorCode::RateLimited;
}

}  // namespace cgraph
