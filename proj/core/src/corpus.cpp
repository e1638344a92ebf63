#include "cgraph/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <unordered_map>

#include "cgraph/error.hpp"
#include "cgraph/graph_io.hpp"
#include "cgraph/text.hpp"
#include "json.hpp"

namespace cgraph {

using json = nlohmann::json;

namespace {
constexpr int kIndexVersion = 1;
}

std::vector<CorpusDocument> ingest(std::istream& lines, std::size_t min_words, const std::string& source) {
  if (min_words == 0) throw Error(ErrorCode::InvalidArgument, "min_words must be >= 1");
  std::vector<CorpusDocument> documents;
  std::string line;
  while (std::getline(lines, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (word_count(line) < min_words) continue;
    documents.push_back({documents.size(), std::move(line), source});
  }
  return documents;
}

RetrievalIndex::RetrievalIndex(std::vector<CorpusDocument> documents) : documents_(std::move(documents)) {
  for (std::size_t i = 0; i < documents_.size(); ++i) {
    if (documents_[i].doc_id != i) {
      throw Error(ErrorCode::InvalidArgument, "document ids must be sequential from 0");
    }
  }
  build();
}

void RetrievalIndex::build() {
  document_frequency_.clear();
  postings_.clear();
  for (const auto& doc : documents_) {
    std::map<std::string, std::size_t> counts;
    for (auto& token : tokenize(doc.text)) ++counts[std::move(token)];
    for (const auto& [term, tf] : counts) {
      ++document_frequency_[term];
      postings_[term].push_back({doc.doc_id, tf});
    }
  }
  norms_.assign(documents_.size(), 0.0);
  for (const auto& [term, list] : postings_) {
    const double w_idf = idf(term);
    for (const auto& posting : list) {
      const double w = static_cast<double>(posting.term_frequency) * w_idf;
      norms_[posting.doc_id] += w * w;
    }
  }
  for (auto& n : norms_) n = std::sqrt(n);
}

double RetrievalIndex::idf(const std::string& term) const {
  const auto it = document_frequency_.find(term);
  const double df = it == document_frequency_.end() ? 0.0 : static_cast<double>(it->second);
  const double n = static_cast<double>(documents_.size());
  return std::log((1.0 + n) / (1.0 + df)) + 1.0;
}

std::vector<ScoredDocument> RetrievalIndex::retrieve(std::string_view query, std::size_t k) const {
  const auto tokens = tokenize(query);
  if (tokens.empty()) throw Error(ErrorCode::EmptyQuery, "query has no terms");
  if (documents_.empty()) throw Error(ErrorCode::EmptyInput, "index is empty");

  std::map<std::string, std::size_t> query_counts;
  for (const auto& token : tokens) {
    if (document_frequency_.contains(token)) ++query_counts[token];
  }
  if (query_counts.empty() || k == 0) return {};

  double query_norm = 0.0;
  std::unordered_map<std::size_t, double> dot;
  for (const auto& [term, qtf] : query_counts) {
    const double w_idf = idf(term);
    const double qw = static_cast<double>(qtf) * w_idf;
    query_norm += qw * qw;
    for (const auto& posting : postings_.at(term)) {
      dot[posting.doc_id] += qw * static_cast<double>(posting.term_frequency) * w_idf;
    }
  }
  query_norm = std::sqrt(query_norm);

  std::vector<ScoredDocument> scored;
  scored.reserve(dot.size());
  for (const auto& [doc_id, value] : dot) {
    scored.push_back({doc_id, value / (query_norm * norms_[doc_id])});
  }
  const auto order = [](const ScoredDocument& a, const ScoredDocument& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.doc_id < b.doc_id;
  };
  if (scored.size() > k) {
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k), scored.end(), order);
    scored.resize(k);
  } else {
    std::sort(scored.begin(), scored.end(), order);
  }
  return scored;
}

std::string RetrievalIndex::to_json() const {
  json doc_array = json::array();
  for (const auto& d : documents_) {
    doc_array.push_back({{"doc_id", d.doc_id}, {"text", d.text}, {"source", d.source}});
  }
  json postings = json::object();
  for (const auto& [term, list] : postings_) {
    json entries = json::array();
    for (const auto& p : list) entries.push_back({p.doc_id, p.term_frequency});
    postings[term] = std::move(entries);
  }
  json root = {
      {"format", "cgraph-index"},
      {"version", kIndexVersion},
      {"doc_count", documents_.size()},
      {"documents", std::move(doc_array)},
      {"vocabulary", document_frequency_},
      {"postings", std::move(postings)},
  };
  return root.dump() + "\n";
}

RetrievalIndex RetrievalIndex::from_json(std::string_view text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Format, std::string("index is not valid JSON: ") + e.what());
  }
  if (root.value("format", "") != "cgraph-index") throw Error(ErrorCode::Format, "not a cgraph index file");
  if (root.value("version", 0) != kIndexVersion) {
    throw Error(ErrorCode::Format, "unsupported index version " + root.value("version", json()).dump());
  }
  std::vector<CorpusDocument> documents;
  try {
    for (const auto& d : root.at("documents")) {
      documents.push_back({d.at("doc_id").get<std::size_t>(), d.at("text").get<std::string>(),
                           d.value("source", std::string())});
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Format, std::string("malformed index documents: ") + e.what());
  }
  RetrievalIndex index(std::move(documents));
  const auto stored_vocab = root.at("vocabulary").get<std::map<std::string, std::size_t>>();
  if (stored_vocab != index.document_frequency_ || root.value("doc_count", std::size_t{0}) != index.doc_count()) {
    throw Error(ErrorCode::Format, "index vocabulary inconsistent with its documents");
  }
  return index;
}

void RetrievalIndex::save(const std::filesystem::path& path) const { write_file_atomic(path, to_json()); }

RetrievalIndex RetrievalIndex::load(const std::filesystem::path& path) { return from_json(read_file(path)); }

bool mentions(std::string_view text, std::string_view name) {
  const auto needle = tokenize(name);
  if (needle.empty()) return false;
  const auto hay = tokenize(text);
  return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

}  // namespace cgraph
