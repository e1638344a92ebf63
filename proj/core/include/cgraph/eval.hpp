#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cgraph/llm.hpp"
#include "cgraph/recovery.hpp"

namespace cgraph {

struct EvalReport {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;
};

/// Derived metrics with the 0/0 -> 0 convention.
EvalReport report_from_counts(std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn);

/// Yes is the positive class. Throws LengthMismatch or EmptyInput.
EvalReport binary_report(std::span<const Verdict> predictions, std::span<const Verdict> gold);

/// Cosine similarity; the shorter vector is zero-padded. Zero vectors give 0.
double cosine(std::span<const double> a, std::span<const double> b);

/// One-hot per distinct normalized text, so cosine is 1 for equal names and
/// 0 otherwise. Dimensions grow as new texts are seen.
class ExactMatchEmbedder final : public Embedder {
 public:
  std::vector<double> embed(std::string_view text) const override;

 private:
  mutable std::mutex mutex_;
  mutable std::unordered_map<std::string, std::size_t> slots_;
};

/// Gaussian vector seeded by a hash of (seed, normalized text).
class SeededHashEmbedder final : public Embedder {
 public:
  SeededHashEmbedder(std::uint64_t seed, std::size_t dim) : seed_(seed), dim_(dim) {}
  std::vector<double> embed(std::string_view text) const override;

 private:
  std::uint64_t seed_;
  std::size_t dim_;
};

/// Signed feature hashing of word tokens and character trigrams. Gives
/// partial credit to overlapping phrasings without an external model.
class TokenHashEmbedder final : public Embedder {
 public:
  explicit TokenHashEmbedder(std::size_t dim = 512) : dim_(dim) {}
  std::vector<double> embed(std::string_view text) const override;

 private:
  std::size_t dim_;
};

/// Precomputed vectors keyed by normalized name; JSON Lines
/// {"concept": text, "vector": [...]}. Unknown texts raise EmbedderFailure.
class TableEmbedder final : public Embedder {
 public:
  static TableEmbedder load(const std::filesystem::path& path);
  void add(std::string_view text, std::vector<double> vector);
  std::vector<double> embed(std::string_view text) const override;

 private:
  std::map<std::string, std::vector<double>> vectors_;
};

inline constexpr double kDefaultSimilarityThreshold = 0.6;

struct SimilarityMatcher {
  const Embedder* embedder = nullptr;
  double threshold = kDefaultSimilarityThreshold;
  /// Count a maximum one-to-one assignment instead of independent
  /// many-to-one matches.
  bool one_to_one = false;
};

struct SimilarityScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t matched_predicted = 0;
  std::size_t matched_relevant = 0;
  std::size_t predicted_count = 0;  // after normalized-name deduplication
  std::size_t relevant_count = 0;
};

/// Similarity-based precision/recall/F1: a predicted concept counts when some
/// relevant concept has cosine > threshold, and vice versa for recall. Lists
/// are deduplicated by normalized name first. Throws EmptyList or
/// EmbedderFailure.
SimilarityScores similarity_f1(const std::vector<std::string>& predicted, const std::vector<std::string>& relevant,
                               const SimilarityMatcher& matcher);

struct ConfusionCounts {
  std::size_t yes = 0;
  std::size_t no = 0;
};

ConfusionCounts confusion_counts(std::span<const EdgeJudgment> judgments);
ConfusionCounts confusion_counts(std::span<const FixtureRecord> fixtures);

struct MentionStats {
  std::size_t unique_count = 0;
  std::size_t total_count = 0;
  std::map<std::string, std::size_t> per_concept;  // only concepts with count >= 1
};

/// Case-insensitive, non-overlapping, longest-match counts of vocabulary
/// names in `text`.
MentionStats concept_mentions(std::string_view text, const std::vector<std::string>& vocabulary);

struct ReportMetadata {
  std::string variant;
  std::optional<double> mu;
  std::string dataset;
};

std::string report_json(const EvalReport& report, const ReportMetadata& meta,
                        const std::optional<ConfusionCounts>& counts = std::nullopt);
/// Two aligned columns, one metric per row.
std::string report_table(const EvalReport& report, const ReportMetadata& meta);

}  // namespace cgraph
