#include "cgraph/recovery.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <istream>
#include <set>
#include <thread>

#include "cgraph/random.hpp"
#include "cgraph/text.hpp"
#include "json.hpp"

namespace cgraph {

using json = nlohmann::json;

namespace {

constexpr std::string_view kAugmentedLead = "And here are related contents to help:";
constexpr std::string_view kRagHeader = "Related contents:";

std::string lower_ascii(std::string_view text) {
  std::string out(text);
  for (auto& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

// Cuts at a UTF-8 boundary no later than max_bytes.
std::string truncate_utf8(std::string text, std::size_t max_bytes) {
  if (text.size() <= max_bytes) return text;
  std::size_t cut = max_bytes;
  while (cut > 0 && (static_cast<unsigned char>(text[cut]) & 0xC0) == 0x80) --cut;
  text.resize(cut);
  return text;
}

std::string listing_head(std::string_view domain, std::string_view a, std::string_view b, bool plural_hints) {
  std::string out;
  out.append("We have two ").append(domain).append(" related concepts: A: ").append(a);
  out.append(" and B: ").append(b).append(".\n");
  out.append("Do you think that people learning ").append(a);
  out.append(" will help in understanding ").append(b).append("?\n");
  out.append(plural_hints ? "Hints:\n" : "Hint:\n");
  out.append("1. Answer YES or NO only.\n");
  out.append("2. This is a directional relation, which means if YES, (B,A) may be False, but (A,B) is True.\n");
  out.append("3. Your answer will be used to create a knowledge graph.");
  return out;
}

std::string cot_body(std::string_view domain, std::string_view a, std::string_view b) {
  std::string out;
  out.append("In the context of ").append(domain).append(", we have two concepts: A: ").append(a);
  out.append(" and B: ").append(b).append(". Assess if understanding ").append(a);
  out.append(" is a necessary prerequisite for understanding ").append(b);
  out.append(". Employ the Chain of Thought approach to detail your reasoning before giving a final answer.\n\n");
  out.append(
      "# Identify the Domain and Concepts: Clearly define A and B within their domain. Understand the specific "
      "content and scope of each concept.\n\n");
  out.append(
      "# Analyze the Directional Relationship: Determine if knowledge of concept A is essential before one can "
      "fully grasp concept B. This involves considering if A provides foundational knowledge or skills required "
      "for understanding B.\n\n");
  out.append(
      "# Evaluate Dependency: Assess whether B is dependent on A in such a way that without understanding A, one "
      "cannot understand B.\n\n");
  out.append(
      "# Draw a Conclusion: Based on your analysis, decide if understanding A is a necessary prerequisite for "
      "understanding B.\n\n");
  out.append(
      "# Provide a Clear Answer: After detailed reasoning, conclude with a distinct answer: <result>YES</result> "
      "if understanding A is a prerequisite for understanding B, or <result>NO</result> if it is not.");
  return out;
}

std::string names_of(const ConceptGraph& graph, const PathResult& reach, bool take_first) {
  std::vector<std::string> names;
  for (const auto& path : reach.paths) names.push_back(graph.name(take_first ? path.front() : path.back()));
  return join(names, ", ");
}

std::string neighbourhood_frames(const ConceptGraph& graph, std::string_view name, std::size_t hops,
                                 bool last) {
  std::string successors;
  std::string predecessors;
  if (const auto id = graph.find(name)) {
    successors = names_of(graph, neighbors(graph, *id, Direction::Out, hops), false);
    predecessors = names_of(graph, neighbors(graph, *id, Direction::In, hops), true);
  }
  std::string out;
  out.append("We know that ").append(name).append(" is a prerequisite of the following concepts:");
  out.append(successors).append(";\n");
  out.append("The following concepts are the prerequisites of ").append(name).append(" : ");
  out.append(predecessors).append(last ? "." : ";\n");
  return out;
}

std::optional<Verdict> verdict_word(std::string_view word) {
  const auto w = lower_ascii(trim(word));
  if (w == "yes") return Verdict::Yes;
  if (w == "no") return Verdict::No;
  return std::nullopt;
}

bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

}  // namespace

std::string_view to_string(Verdict verdict) noexcept { return verdict == Verdict::Yes ? "YES" : "NO"; }

Verdict verdict_from_text(std::string_view text) {
  const auto t = lower_ascii(trim(text));
  if (t == "yes" || t == "true" || t == "1") return Verdict::Yes;
  if (t == "no" || t == "false" || t == "0") return Verdict::No;
  throw Error(ErrorCode::Format, "not a verdict: '" + std::string(text) + "'");
}

std::string_view variant_code(VariantKind kind) noexcept {
  switch (kind) {
    case VariantKind::ZeroShot: return "zs";
    case VariantKind::CoT: return "cot";
    case VariantKind::ZeroShotDoc: return "zs-doc";
    case VariantKind::ZeroShotCon: return "zs-con";
    case VariantKind::ZeroShotWiki: return "zs-wiki";
    case VariantKind::ZeroShotRag: return "zs-rag";
  }
  return "zs";
}

VariantKind parse_variant_code(std::string_view code) {
  for (auto kind : {VariantKind::ZeroShot, VariantKind::CoT, VariantKind::ZeroShotDoc, VariantKind::ZeroShotCon,
                    VariantKind::ZeroShotWiki, VariantKind::ZeroShotRag}) {
    if (variant_code(kind) == code) return kind;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown prompt variant '" + std::string(code) + "'");
}

PromptVariant make_variant(VariantKind kind) {
  switch (kind) {
    case VariantKind::ZeroShotCon: return PromptVariant::con();
    case VariantKind::ZeroShotRag: return PromptVariant::rag();
    default: return {kind, {}, {}};
  }
}

std::string render_prompt(const PromptVariant& variant, std::string_view domain, std::string_view concept_a,
                          std::string_view concept_b, std::string_view additional_info) {
  if (trim(concept_a).empty() || trim(concept_b).empty()) {
    throw Error(ErrorCode::EmptyConcept, "concept names must be non-empty");
  }
  std::string out;
  switch (variant.kind) {
    case VariantKind::ZeroShot:
      out = listing_head(domain, concept_a, concept_b, true);
      if (!additional_info.empty()) out.append("\n").append(additional_info);
      break;
    case VariantKind::ZeroShotRag:
      out = listing_head(domain, concept_a, concept_b, true);
      out.append("\n").append(kRagHeader);
      if (!additional_info.empty()) out.append("\n").append(additional_info);
      break;
    case VariantKind::CoT:
      out = cot_body(domain, concept_a, concept_b);
      if (!additional_info.empty()) out.append("\n\n").append(additional_info);
      break;
    case VariantKind::ZeroShotDoc:
      out = listing_head(domain, concept_a, concept_b, false);
      out.append("\n").append(kAugmentedLead).append(" ").append(additional_info);
      break;
    case VariantKind::ZeroShotCon:
    case VariantKind::ZeroShotWiki:
      out = listing_head(domain, concept_a, concept_b, false);
      out.append("\n").append(kAugmentedLead).append("\n").append(additional_info);
      break;
  }
  return out;
}

std::string build_additional_info(const PromptVariant& variant, std::string_view concept_a,
                                  std::string_view concept_b, const ContextHandles& context) {
  switch (variant.kind) {
    case VariantKind::ZeroShot:
    case VariantKind::CoT:
      return {};

    case VariantKind::ZeroShotDoc: {
      if (!context.corpus) throw Error(ErrorCode::MissingContext, "Doc. variant needs a document corpus");
      std::vector<std::string> hits;
      for (const auto& doc : context.corpus->documents()) {
        if (hits.size() >= context.max_documents) break;
        if (mentions(doc.text, concept_a) || mentions(doc.text, concept_b)) hits.push_back(doc.text);
      }
      return truncate_utf8(join(hits, " "), context.max_context_chars);
    }

    case VariantKind::ZeroShotRag: {
      if (!context.corpus) throw Error(ErrorCode::MissingContext, "RAG variant needs a retrieval index");
      if (context.corpus->doc_count() == 0) return {};
      std::string query(concept_a);
      query.append(" ").append(concept_b);
      std::vector<std::string> passages;
      for (const auto& hit : context.corpus->retrieve(query, variant.rag_k.value_or(3))) {
        passages.push_back(context.corpus->document(hit.doc_id).text);
      }
      return truncate_utf8(join(passages, "\n"), context.max_context_chars);
    }

    case VariantKind::ZeroShotCon: {
      if (!context.training_graph) throw Error(ErrorCode::MissingContext, "Con. variant needs training edges");
      const auto hops = variant.con_hops.value_or(1);
      return neighbourhood_frames(*context.training_graph, concept_a, hops, false) +
             neighbourhood_frames(*context.training_graph, concept_b, hops, true);
    }

    case VariantKind::ZeroShotWiki: {
      if (!context.intro_paragraphs) throw Error(ErrorCode::MissingContext, "Wiki. variant needs intro paragraphs");
      std::vector<std::string> paragraphs;
      for (auto name : {concept_a, concept_b}) {
        const auto it = context.intro_paragraphs->find(normalize_name(name));
        if (it != context.intro_paragraphs->end()) paragraphs.push_back(it->second);
      }
      return join(paragraphs, "\n");
    }
  }
  return {};
}

Verdict parse_verdict(std::string_view raw) {
  const auto lowered = lower_ascii(raw);
  std::optional<Verdict> tagged;
  for (std::size_t pos = lowered.find("<result>"); pos != std::string::npos;
       pos = lowered.find("<result>", pos + 1)) {
    const auto body_start = pos + 8;
    const auto close = lowered.find("</result>", body_start);
    if (close == std::string::npos) break;
    if (auto v = verdict_word(std::string_view(lowered).substr(body_start, close - body_start))) tagged = v;
  }
  if (tagged) return *tagged;

  std::size_t i = 0;
  while (i < lowered.size()) {
    if (!is_alpha(lowered[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < lowered.size() && (is_alpha(lowered[j]) || (lowered[j] >= '0' && lowered[j] <= '9'))) ++j;
    if (auto v = verdict_word(std::string_view(lowered).substr(i, j - i))) return *v;
    i = j;
  }
  throw Error(ErrorCode::UnparseableVerdict, "no YES/NO verdict in response");
}

JudgmentOutcome judge(TextOracle& oracle, const std::string& prompt) {
  JudgmentOutcome outcome;
  outcome.raw_response = oracle.complete(prompt);
  try {
    outcome.verdict = parse_verdict(outcome.raw_response);
    return outcome;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::UnparseableVerdict) throw;
  }
  outcome.raw_response = oracle.complete(prompt + "\n" + std::string(kVerdictRetrySuffix));
  try {
    outcome.verdict = parse_verdict(outcome.raw_response);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::UnparseableVerdict) throw;
    outcome.verdict = Verdict::No;
    outcome.flagged = true;
  }
  return outcome;
}

std::vector<Edge> sample_pairs(const ConceptGraph& concepts, const std::vector<LabeledPair>* labels,
                               const SamplingPlan& plan) {
  const auto ids = concepts.ids();
  std::vector<Edge> pairs;
  if (plan.mode == SamplingMode::AllOrderedPairs) {
    pairs.reserve(ids.size() * (ids.size() > 0 ? ids.size() - 1 : 0));
    for (const auto a : ids) {
      for (const auto b : ids) {
        if (a != b) pairs.emplace_back(a, b);
      }
    }
    return pairs;
  }

  if (!labels) throw Error(ErrorCode::MissingLabels, "balanced sampling needs labelled pairs");
  if (plan.sample_size == 0) throw Error(ErrorCode::InvalidArgument, "sample_size must be positive");

  std::set<Edge> positive_set;
  std::set<Edge> negative_set;
  for (const auto& l : *labels) {
    if (!concepts.contains(l.source) || !concepts.contains(l.target)) {
      throw Error(ErrorCode::UnknownConcept, "labelled pair references an unknown concept");
    }
    (l.label ? positive_set : negative_set).insert({l.source, l.target});
  }
  if (negative_set.empty()) {
    for (const auto a : ids) {
      for (const auto b : ids) {
        if (a != b && !positive_set.contains({a, b})) negative_set.insert({a, b});
      }
    }
  }
  std::vector<Edge> positives(positive_set.begin(), positive_set.end());
  std::vector<Edge> negatives(negative_set.begin(), negative_set.end());
  if (positives.size() < plan.sample_size) {
    throw Error(ErrorCode::InsufficientPositives, "only " + std::to_string(positives.size()) +
                                                      " positive pairs for sample size " +
                                                      std::to_string(plan.sample_size));
  }
  if (negatives.size() < plan.sample_size) {
    throw Error(ErrorCode::InsufficientNegatives, "only " + std::to_string(negatives.size()) +
                                                      " negative pairs for sample size " +
                                                      std::to_string(plan.sample_size));
  }

  Rng rng(plan.seed);
  rng.shuffle(positives);
  rng.shuffle(negatives);
  pairs.assign(positives.begin(), positives.begin() + static_cast<std::ptrdiff_t>(plan.sample_size));
  pairs.insert(pairs.end(), negatives.begin(), negatives.begin() + static_cast<std::ptrdiff_t>(plan.sample_size));
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

RecoveryResult recover_graph(const ConceptGraph& concepts, TextOracle& oracle, const PromptVariant& variant,
                             const SamplingPlan& plan, const RecoveryOptions& options) {
  const auto pairs = sample_pairs(concepts, options.labels, plan);

  std::vector<EdgeJudgment> judgments(pairs.size());
  std::vector<std::exception_ptr> failures(pairs.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};

  auto worker = [&] {
    while (!failed.load()) {
      const auto i = next.fetch_add(1);
      if (i >= pairs.size()) return;
      try {
        const auto& [source, target] = pairs[i];
        const auto& a = concepts.name(source);
        const auto& b = concepts.name(target);
        auto& j = judgments[i];
        j.source = source;
        j.target = target;
        j.variant = variant;
        j.prompt_text = render_prompt(variant, options.domain, a, b,
                                      build_additional_info(variant, a, b, options.context));
        auto outcome = judge(oracle, j.prompt_text);
        j.verdict = outcome.verdict;
        j.raw_response = std::move(outcome.raw_response);
        j.flagged = outcome.flagged;
      } catch (...) {
        failures[i] = std::current_exception();
        failed.store(true);
      }
    }
  };

  const auto thread_count = std::min<std::size_t>(std::max<std::size_t>(options.max_in_flight, 1), pairs.size());
  if (thread_count <= 1) {
    worker();
  } else {
    std::vector<std::jthread> threads;
    threads.reserve(thread_count);
    for (std::size_t t = 0; t < thread_count; ++t) threads.emplace_back(worker);
  }

  for (std::size_t i = 0; i < failures.size(); ++i) {
    if (!failures[i]) continue;
    const auto describe = [&](const std::string& what) {
      return "oracle failed on (" + concepts.name(pairs[i].first) + ", " + concepts.name(pairs[i].second) +
             "): " + what;
    };
    try {
      std::rethrow_exception(failures[i]);
    } catch (const Error& e) {
      throw RecoveryError(e.code(), pairs[i], describe(e.what()));
    } catch (const std::exception& e) {
      throw RecoveryError(ErrorCode::Transport, pairs[i], describe(e.what()));
    }
  }

  RecoveryResult result{concepts.without_edges(), std::move(judgments)};
  for (const auto& j : result.judgments) {
    if (j.verdict == Verdict::Yes) result.graph.add_edge(j.source, j.target);
  }
  return result;
}

std::optional<PromptSlots> parse_prompt_slots(std::string_view prompt) {
  const auto first_end = prompt.find('\n');
  const auto first = prompt.substr(0, first_end);
  const auto rest = first_end == std::string_view::npos ? std::string_view{} : prompt.substr(first_end + 1);
  const auto second = rest.substr(0, rest.find('\n'));

  std::string_view body;
  std::string domain;
  bool cot = false;
  constexpr std::string_view zs_open = "We have two ";
  constexpr std::string_view zs_mid = " related concepts: A: ";
  constexpr std::string_view cot_open = "In the context of ";
  constexpr std::string_view cot_mid = ", we have two concepts: A: ";
  constexpr std::string_view cot_tail = ". Assess if understanding ";

  if (first.starts_with(zs_open)) {
    const auto mid = first.find(zs_mid);
    if (mid == std::string_view::npos || !first.ends_with(".")) return std::nullopt;
    domain = first.substr(zs_open.size(), mid - zs_open.size());
    body = first.substr(mid + zs_mid.size());
    body.remove_suffix(1);
  } else if (first.starts_with(cot_open)) {
    const auto mid = first.find(cot_mid);
    const auto tail = first.find(cot_tail);
    if (mid == std::string_view::npos || tail == std::string_view::npos || tail < mid) return std::nullopt;
    domain = first.substr(cot_open.size(), mid - cot_open.size());
    body = first.substr(mid + cot_mid.size(), tail - mid - cot_mid.size());
    cot = true;
  } else {
    return std::nullopt;
  }

  // Concept names may themselves contain " and B: "; the restatement in the
  // next sentence picks the right split.
  constexpr std::string_view sep = " and B: ";
  std::optional<PromptSlots> fallback;
  for (auto pos = body.find(sep); pos != std::string_view::npos; pos = body.find(sep, pos + 1)) {
    PromptSlots slots{domain, std::string(body.substr(0, pos)), std::string(body.substr(pos + sep.size()))};
    if (!fallback) fallback = slots;
    std::string expected;
    if (cot) {
      expected = std::string(cot_tail) + slots.concept_a + " is a necessary prerequisite for understanding " +
                 slots.concept_b + ".";
      if (first.find(expected) != std::string_view::npos) return slots;
    } else {
      expected = "Do you think that people learning " + slots.concept_a + " will help in understanding " +
                 slots.concept_b + "?";
      if (second == expected) return slots;
    }
  }
  return fallback;
}

std::optional<VariantKind> detect_variant(std::string_view prompt) {
  if (!parse_prompt_slots(prompt)) return std::nullopt;
  if (prompt.starts_with("In the context of ")) return VariantKind::CoT;
  const std::string lead_inline = "\n" + std::string(kAugmentedLead) + " ";
  const std::string lead_block = "\n" + std::string(kAugmentedLead) + "\n";
  if (prompt.find(lead_block + "We know that ") != std::string_view::npos) return VariantKind::ZeroShotCon;
  if (prompt.find(lead_block) != std::string_view::npos) return VariantKind::ZeroShotWiki;
  if (prompt.find(lead_inline) != std::string_view::npos) return VariantKind::ZeroShotDoc;
  const std::string knowledge_graph_line = "create a knowledge graph.\n" + std::string(kRagHeader);
  if (prompt.find(knowledge_graph_line) != std::string_view::npos) return VariantKind::ZeroShotRag;
  return VariantKind::ZeroShot;
}

std::vector<FixtureRecord> read_fixtures(std::istream& in) {
  std::vector<FixtureRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      const auto obj = json::parse(line);
      FixtureRecord r;
      r.a = obj.at("a").get<std::string>();
      r.b = obj.at("b").get<std::string>();
      r.variant = obj.value("variant", std::string(variant_code(VariantKind::ZeroShot)));
      r.verdict = verdict_from_text(obj.at("verdict").get<std::string>());
      r.raw = obj.value("raw", std::string(to_string(r.verdict)));
      records.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::Format, "fixture line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(ErrorCode::Format, "fixture line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

std::vector<FixtureRecord> load_fixtures(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return read_fixtures(in);
}

std::string fixture_line(const FixtureRecord& record) {
  const json obj = {{"a", record.a},
                    {"b", record.b},
                    {"variant", record.variant},
                    {"verdict", std::string(to_string(record.verdict))},
                    {"raw", record.raw}};
  return obj.dump();
}

FixtureRecord to_fixture(const EdgeJudgment& judgment, const ConceptGraph& graph) {
  return {graph.name(judgment.source), graph.name(judgment.target), std::string(variant_code(judgment.variant.kind)),
          judgment.verdict, judgment.raw_response};
}

std::string judgment_line(const EdgeJudgment& judgment, const ConceptGraph& graph) {
  const auto r = to_fixture(judgment, graph);
  // nlohmann::json objects sort keys, which keeps lines byte-stable.
  const json obj = {{"a", r.a},
                    {"b", r.b},
                    {"variant", r.variant},
                    {"verdict", std::string(to_string(r.verdict))},
                    {"raw", r.raw},
                    {"source", judgment.source.value()},
                    {"target", judgment.target.value()},
                    {"flagged", judgment.flagged}};
  return obj.dump();
}

std::map<std::string, std::string> load_intro_paragraphs(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::map<std::string, std::string> paragraphs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      const auto obj = json::parse(line);
      paragraphs[normalize_name(obj.at("concept").get<std::string>())] = obj.at("text").get<std::string>();
    } catch (const json::exception& e) {
      throw Error(ErrorCode::Format, path.string() + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return paragraphs;
}

}  // namespace cgraph
