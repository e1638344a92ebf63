#include "cgraph/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <set>
#include <sstream>

#include "cgraph/error.hpp"
#include "cgraph/random.hpp"
#include "cgraph/text.hpp"
#include "json.hpp"

namespace cgraph {

using json = nlohmann::json;

namespace {

double safe_ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

double harmonic(double p, double r) { return (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

std::vector<std::string> dedupe(const std::vector<std::string>& names) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& n : names) {
    auto key = normalize_name(n);
    if (key.empty() || !seen.insert(key).second) continue;
    out.push_back(n);
  }
  return out;
}

std::vector<std::vector<double>> embed_all(const Embedder& embedder, const std::vector<std::string>& texts) {
  std::vector<std::vector<double>> out;
  out.reserve(texts.size());
  for (const auto& t : texts) {
    std::vector<double> v;
    try {
      v = embedder.embed(t);
    } catch (const std::exception& e) {
      throw Error(ErrorCode::EmbedderFailure, "embedder failed on '" + t + "': " + e.what());
    }
    if (v.empty() || !std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); })) {
      throw Error(ErrorCode::EmbedderFailure, "embedder returned an unusable vector for '" + t + "'");
    }
    out.push_back(std::move(v));
  }
  return out;
}

// Kuhn's augmenting-path bipartite matching.
std::size_t max_matching(const std::vector<std::vector<std::size_t>>& adj, std::size_t right_count) {
  std::vector<std::ptrdiff_t> owner(right_count, -1);
  std::size_t matched = 0;
  for (std::size_t left = 0; left < adj.size(); ++left) {
    std::vector<bool> visited(right_count, false);
    std::function<bool(std::size_t)> augment = [&](std::size_t u) {
      for (const auto v : adj[u]) {
        if (visited[v]) continue;
        visited[v] = true;
        if (owner[v] < 0 || augment(static_cast<std::size_t>(owner[v]))) {
          owner[v] = static_cast<std::ptrdiff_t>(u);
          return true;
        }
      }
      return false;
    };
    if (augment(left)) ++matched;
  }
  return matched;
}

std::string fixed4(double v) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(4) << v;
  return out.str();
}

}  // namespace

EvalReport report_from_counts(std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn) {
  EvalReport r;
  r.tp = tp;
  r.fp = fp;
  r.tn = tn;
  r.fn = fn;
  const double total = static_cast<double>(tp + fp + tn + fn);
  r.accuracy = safe_ratio(static_cast<double>(tp + tn), total);
  r.precision = safe_ratio(static_cast<double>(tp), static_cast<double>(tp + fp));
  r.recall = safe_ratio(static_cast<double>(tp), static_cast<double>(tp + fn));
  r.f1 = harmonic(r.precision, r.recall);
  return r;
}

EvalReport binary_report(std::span<const Verdict> predictions, std::span<const Verdict> gold) {
  if (predictions.size() != gold.size()) {
    throw Error(ErrorCode::LengthMismatch, std::to_string(predictions.size()) + " predictions vs " +
                                               std::to_string(gold.size()) + " gold labels");
  }
  if (gold.empty()) throw Error(ErrorCode::EmptyInput, "no predictions to evaluate");
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const bool p = predictions[i] == Verdict::Yes;
    const bool g = gold[i] == Verdict::Yes;
    if (p && g) ++tp;
    else if (p) ++fp;
    else if (g) ++fn;
    else ++tn;
  }
  return report_from_counts(tp, fp, tn, fn);
}

double cosine(std::span<const double> a, std::span<const double> b) {
  const auto n = std::min(a.size(), b.size());
  double dot = 0.0;
  for (std::size_t i = 0; i < n; ++i) dot += a[i] * b[i];
  double na = 0.0, nb = 0.0;
  for (const auto x : a) na += x * x;
  for (const auto x : b) nb += x * x;
  if (na <= 0.0 || nb <= 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::vector<double> ExactMatchEmbedder::embed(std::string_view text) const {
  std::size_t slot = 0;
  {
    std::lock_guard lock(mutex_);
    slot = slots_.emplace(normalize_name(text), slots_.size()).first->second;
  }
  std::vector<double> v(slot + 1, 0.0);
  v[slot] = 1.0;
  return v;
}

std::vector<double> SeededHashEmbedder::embed(std::string_view text) const {
  Rng rng(fnv1a64(normalize_name(text), 0xcbf29ce484222325ULL ^ mix64(seed_)));
  std::vector<double> v(dim_);
  for (auto& x : v) x = rng.normal();
  return v;
}

std::vector<double> TokenHashEmbedder::embed(std::string_view text) const {
  std::vector<double> v(dim_, 0.0);
  auto add = [&](std::string_view feature, double weight) {
    const auto h = mix64(fnv1a64(feature));
    const auto bucket = static_cast<std::size_t>(h % dim_);
    v[bucket] += ((h >> 63) ? -1.0 : 1.0) * weight;
  };
  for (const auto& token : tokenize(text)) {
    add("w:" + token, 1.0);
    const std::string padded = "#" + token + "#";
    for (std::size_t i = 0; i + 3 <= padded.size(); ++i) add("c:" + padded.substr(i, 3), 0.5);
  }
  return v;
}

TableEmbedder TableEmbedder::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  TableEmbedder table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      const auto obj = json::parse(line);
      table.add(obj.at("concept").get<std::string>(), obj.at("vector").get<std::vector<double>>());
    } catch (const json::exception& e) {
      throw Error(ErrorCode::Format, path.string() + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return table;
}

void TableEmbedder::add(std::string_view text, std::vector<double> vector) {
  vectors_[normalize_name(text)] = std::move(vector);
}

std::vector<double> TableEmbedder::embed(std::string_view text) const {
  const auto it = vectors_.find(normalize_name(text));
  if (it == vectors_.end()) throw Error(ErrorCode::EmbedderFailure, "no stored vector for '" + std::string(text) + "'");
  return it->second;
}

SimilarityScores similarity_f1(const std::vector<std::string>& predicted, const std::vector<std::string>& relevant,
                               const SimilarityMatcher& matcher) {
  if (!matcher.embedder) throw Error(ErrorCode::EmbedderFailure, "no embedder configured");
  if (!(matcher.threshold > 0.0 && matcher.threshold <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "similarity threshold must lie in (0, 1]");
  }
  const auto pred = dedupe(predicted);
  const auto rel = dedupe(relevant);
  if (pred.empty() || rel.empty()) throw Error(ErrorCode::EmptyList, "predicted and relevant lists must be non-empty");

  const auto pred_vecs = embed_all(*matcher.embedder, pred);
  const auto rel_vecs = embed_all(*matcher.embedder, rel);

  std::vector<std::vector<std::size_t>> matches(pred.size());
  std::vector<bool> rel_hit(rel.size(), false);
  for (std::size_t m = 0; m < pred.size(); ++m) {
    for (std::size_t n = 0; n < rel.size(); ++n) {
      if (cosine(pred_vecs[m], rel_vecs[n]) > matcher.threshold) {
        matches[m].push_back(n);
        rel_hit[n] = true;
      }
    }
  }

  SimilarityScores s;
  s.predicted_count = pred.size();
  s.relevant_count = rel.size();
  if (matcher.one_to_one) {
    s.matched_predicted = s.matched_relevant = max_matching(matches, rel.size());
  } else {
    s.matched_predicted = static_cast<std::size_t>(
        std::count_if(matches.begin(), matches.end(), [](const auto& row) { return !row.empty(); }));
    s.matched_relevant = static_cast<std::size_t>(std::count(rel_hit.begin(), rel_hit.end(), true));
  }
  s.precision = static_cast<double>(s.matched_predicted) / static_cast<double>(pred.size());
  s.recall = static_cast<double>(s.matched_relevant) / static_cast<double>(rel.size());
  s.f1 = harmonic(s.precision, s.recall);
  return s;
}

ConfusionCounts confusion_counts(std::span<const EdgeJudgment> judgments) {
  ConfusionCounts c;
  for (const auto& j : judgments) ++(j.verdict == Verdict::Yes ? c.yes : c.no);
  return c;
}

ConfusionCounts confusion_counts(std::span<const FixtureRecord> fixtures) {
  ConfusionCounts c;
  for (const auto& f : fixtures) ++(f.verdict == Verdict::Yes ? c.yes : c.no);
  return c;
}

MentionStats concept_mentions(std::string_view text, const std::vector<std::string>& vocabulary) {
  MentionStats stats;
  if (vocabulary.empty()) return stats;
  const VocabularyMatcher matcher(vocabulary);
  for (const auto& m : matcher.scan(text)) {
    ++stats.per_concept[vocabulary[m.entry]];
    ++stats.total_count;
  }
  stats.unique_count = stats.per_concept.size();
  return stats;
}

std::string report_json(const EvalReport& r, const ReportMetadata& meta, const std::optional<ConfusionCounts>& counts) {
  json obj = {
      {"accuracy", r.accuracy}, {"precision", r.precision}, {"recall", r.recall}, {"f1", r.f1},
      {"tp", r.tp},             {"fp", r.fp},               {"tn", r.tn},         {"fn", r.fn},
      {"variant", meta.variant}, {"dataset", meta.dataset},
  };
  obj["mu"] = meta.mu ? json(*meta.mu) : json(nullptr);
  if (counts) obj["judgment_counts"] = {{"yes", counts->yes}, {"no", counts->no}};
  return obj.dump(2) + "\n";
}

std::string report_table(const EvalReport& r, const ReportMetadata& meta) {
  std::vector<std::pair<std::string, std::string>> rows = {
      {"dataset", meta.dataset.empty() ? "-" : meta.dataset},
      {"variant", meta.variant.empty() ? "-" : meta.variant},
      {"mu", meta.mu ? fixed4(*meta.mu) : "-"},
      {"accuracy", fixed4(r.accuracy)},
      {"precision", fixed4(r.precision)},
      {"recall", fixed4(r.recall)},
      {"f1", fixed4(r.f1)},
      {"tp", std::to_string(r.tp)},
      {"fp", std::to_string(r.fp)},
      {"tn", std::to_string(r.tn)},
      {"fn", std::to_string(r.fn)},
  };
  std::size_t width = 0;
  for (const auto& [k, v] : rows) width = std::max(width, k.size());
  std::ostringstream out;
  for (const auto& [k, v] : rows) out << std::left << std::setw(static_cast<int>(width) + 2) << k << v << '\n';
  return out.str();
}

}  // namespace cgraph
