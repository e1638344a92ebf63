#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace cgraph {

struct CorpusDocument {
  std::size_t doc_id = 0;
  std::string text;
  std::string source;

  friend bool operator==(const CorpusDocument&, const CorpusDocument&) = default;
};

inline constexpr std::size_t kDefaultMinWords = 25;

/// Keeps lines with at least `min_words` whitespace-separated tokens, in
/// input order, numbering them from 0.
std::vector<CorpusDocument> ingest(std::istream& lines, std::size_t min_words = kDefaultMinWords,
                                   const std::string& source = {});

struct Posting {
  std::size_t doc_id = 0;
  std::size_t term_frequency = 0;

  friend bool operator==(const Posting&, const Posting&) = default;
};

struct ScoredDocument {
  std::size_t doc_id = 0;
  double score = 0.0;
};

/// TF-IDF index with cosine scoring.
///
/// Term weight is tf * idf with idf = ln((1 + N) / (1 + df)) + 1, so every
/// indexed term has positive weight. Only documents sharing at least one
/// query term are returned.
class RetrievalIndex {
 public:
  RetrievalIndex() = default;
  explicit RetrievalIndex(std::vector<CorpusDocument> documents);

  /// Top-k by descending score, ties by ascending doc_id. Throws EmptyQuery
  /// when the query has no tokens at all.
  std::vector<ScoredDocument> retrieve(std::string_view query, std::size_t k) const;

  std::size_t doc_count() const noexcept { return documents_.size(); }
  const std::vector<CorpusDocument>& documents() const noexcept { return documents_; }
  const CorpusDocument& document(std::size_t doc_id) const { return documents_.at(doc_id); }
  const std::map<std::string, std::size_t>& vocabulary() const noexcept { return document_frequency_; }
  const std::map<std::string, std::vector<Posting>>& postings() const noexcept { return postings_; }
  double idf(const std::string& term) const;

  /// Versioned JSON: {"format": "cgraph-index", "version": 1, ...}.
  std::string to_json() const;
  static RetrievalIndex from_json(std::string_view json);

  void save(const std::filesystem::path& path) const;
  static RetrievalIndex load(const std::filesystem::path& path);

 private:
  void build();

  std::vector<CorpusDocument> documents_;
  std::map<std::string, std::size_t> document_frequency_;
  std::map<std::string, std::vector<Posting>> postings_;
  std::vector<double> norms_;
};

/// True if the token sequence of `name` occurs contiguously in the tokens of `text`.
bool mentions(std::string_view text, std::string_view name);

}  // namespace cgraph
