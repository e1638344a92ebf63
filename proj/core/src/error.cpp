#include "cgraph/error.hpp"

namespace cgraph {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::UnknownConcept: return "UnknownConcept";
    case ErrorCode::DuplicateConcept: return "DuplicateConcept";
    case ErrorCode::EmptyConcept: return "EmptyConcept";
    case ErrorCode::SelfLoop: return "SelfLoop";
    case ErrorCode::OrderingMismatch: return "OrderingMismatch";
    case ErrorCode::MissingContext: return "MissingContext";
    case ErrorCode::UnparseableVerdict: return "UnparseableVerdict";
    case ErrorCode::MissingLabels: return "MissingLabels";
    case ErrorCode::InsufficientPositives: return "InsufficientPositives";
    case ErrorCode::InsufficientNegatives: return "InsufficientNegatives";
    case ErrorCode::EmptyQuery: return "EmptyQuery";
    case ErrorCode::NonSquare: return "NonSquare";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::MissingEmbedding: return "MissingEmbedding";
    case ErrorCode::DegenerateLabels: return "DegenerateLabels";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::EmptyList: return "EmptyList";
    case ErrorCode::EmbedderFailure: return "EmbedderFailure";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::FallbackExhausted: return "FallbackExhausted";
    case ErrorCode::Transport: return "Transport";
    case ErrorCode::RateLimited: return "RateLimited";
    case ErrorCode::AuthFailure: return "AuthFailure";
    case ErrorCode::UnrecognizedPrompt: return "UnrecognizedPrompt";
    case ErrorCode::FixtureMiss: return "FixtureMiss";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Format: return "Format";
  }
  return "Unknown";
}

SyntaxError::SyntaxError(std::size_t offset, std::set<std::string> expected,
                         const std::string& message)
    : Error(ErrorCode::SyntaxError, message), offset_(offset), expected_(std::move(expected)) {}

}  // namespace cgraph
