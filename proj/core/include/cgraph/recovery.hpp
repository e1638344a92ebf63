#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cgraph/corpus.hpp"
#include "cgraph/error.hpp"
#include "cgraph/graph.hpp"
#include "cgraph/graph_io.hpp"
#include "cgraph/llm.hpp"

namespace cgraph {

enum class Verdict { No, Yes };

std::string_view to_string(Verdict verdict) noexcept;  // "YES" / "NO"

/// Accepts yes/no/true/false/1/0 in any case. Throws Format otherwise.
Verdict verdict_from_text(std::string_view text);

enum class VariantKind { ZeroShot, CoT, ZeroShotDoc, ZeroShotCon, ZeroShotWiki, ZeroShotRag };

/// Prompt family member. `rag_k` is only set for ZeroShotRag and `con_hops`
/// only for ZeroShotCon; use the factories to keep that invariant.
struct PromptVariant {
  VariantKind kind = VariantKind::ZeroShot;
  std::optional<std::size_t> rag_k;
  std::optional<std::size_t> con_hops;

  static PromptVariant zero_shot() { return {VariantKind::ZeroShot, {}, {}}; }
  static PromptVariant cot() { return {VariantKind::CoT, {}, {}}; }
  static PromptVariant doc() { return {VariantKind::ZeroShotDoc, {}, {}}; }
  static PromptVariant con(std::size_t hops = 1) { return {VariantKind::ZeroShotCon, {}, hops}; }
  static PromptVariant wiki() { return {VariantKind::ZeroShotWiki, {}, {}}; }
  static PromptVariant rag(std::size_t k = 3) { return {VariantKind::ZeroShotRag, k, {}}; }

  friend bool operator==(const PromptVariant&, const PromptVariant&) = default;
};

/// Short codes used on the command line and in fixtures:
/// zs, cot, zs-doc, zs-con, zs-wiki, zs-rag.
std::string_view variant_code(VariantKind kind) noexcept;
VariantKind parse_variant_code(std::string_view code);
PromptVariant make_variant(VariantKind kind);

/// Renders the pairwise prerequisite prompt. `additional_info` fills the
/// variant's context slot; for ZeroShot and CoT an empty string drops the
/// slot entirely. Throws EmptyConcept on blank concept names.
std::string render_prompt(const PromptVariant& variant, std::string_view domain, std::string_view concept_a,
                          std::string_view concept_b, std::string_view additional_info = {});

/// Context stores for the augmented variants. Pointers are non-owning and
/// may be null when the variant in use does not need them.
struct ContextHandles {
  const RetrievalIndex* corpus = nullptr;                          // Doc., RAG
  const ConceptGraph* training_graph = nullptr;                     // Con.
  const std::map<std::string, std::string>* intro_paragraphs = nullptr;  // Wiki., keyed by normalized name
  std::size_t max_documents = 3;                                    // Doc.
  std::size_t max_context_chars = 4000;                             // Doc., RAG
};

/// Text for the variant's context slot. Throws MissingContext when the
/// required store is absent.
std::string build_additional_info(const PromptVariant& variant, std::string_view concept_a,
                                  std::string_view concept_b, const ContextHandles& context);

/// `<result>…</result>` wins (last tag with a YES/NO body); otherwise the
/// first standalone YES or NO token, case-insensitive. Throws
/// UnparseableVerdict when neither is present.
Verdict parse_verdict(std::string_view raw);

inline constexpr std::string_view kVerdictRetrySuffix = "Answer YES or NO only.";

struct JudgmentOutcome {
  Verdict verdict = Verdict::No;
  std::string raw_response;
  bool flagged = false;  // both attempts were unparseable; verdict defaulted to No
};

/// Asks once; on an unparseable reply asks again with the retry suffix; a
/// second failure yields No with `flagged` set.
JudgmentOutcome judge(TextOracle& oracle, const std::string& prompt);

struct EdgeJudgment {
  ConceptId source;
  ConceptId target;
  Verdict verdict = Verdict::No;
  PromptVariant variant;
  std::string raw_response;
  std::string prompt_text;
  bool flagged = false;
};

enum class SamplingMode { AllOrderedPairs, BalancedSample };

struct SamplingPlan {
  SamplingMode mode = SamplingMode::AllOrderedPairs;
  std::size_t sample_size = 0;  // per class; BalancedSample only
  std::uint64_t seed = 0;
};

/// AllOrderedPairs: every (a, b) with a != b in id order. BalancedSample:
/// `sample_size` labelled positives and `sample_size` negatives, seeded.
/// Negatives come from the 0-labelled rows, or from unlabelled non-edges when
/// the labels carry no negatives. The result is sorted.
std::vector<Edge> sample_pairs(const ConceptGraph& concepts, const std::vector<LabeledPair>* labels,
                               const SamplingPlan& plan);

struct RecoveryOptions {
  std::string domain = "natural language processing";
  ContextHandles context;
  const std::vector<LabeledPair>* labels = nullptr;  // for BalancedSample
  std::size_t max_in_flight = 8;
};

struct RecoveryResult {
  ConceptGraph graph;
  std::vector<EdgeJudgment> judgments;  // sorted by (source, target)
};

/// An oracle failure with the pair that triggered it.
class RecoveryError : public Error {
 public:
  RecoveryError(ErrorCode code, Edge pair, const std::string& message)
      : Error(code, message), pair_(pair) {}
  Edge pair() const noexcept { return pair_; }

 private:
  Edge pair_;
};

/// Judges every sampled pair (concurrently, up to `max_in_flight`) and keeps
/// the Yes pairs as edges. Edges already present in `concepts` are ignored.
RecoveryResult recover_graph(const ConceptGraph& concepts, TextOracle& oracle, const PromptVariant& variant,
                             const SamplingPlan& plan, const RecoveryOptions& options = {});

/// Slots recovered from a rendered prompt of any variant.
struct PromptSlots {
  std::string domain;
  std::string concept_a;
  std::string concept_b;
};

std::optional<PromptSlots> parse_prompt_slots(std::string_view prompt);
std::optional<VariantKind> detect_variant(std::string_view prompt);

/// Replay record; one JSON object per line:
/// {"a": text, "b": text, "variant": code, "verdict": "YES"|"NO", "raw": text}.
struct FixtureRecord {
  std::string a;
  std::string b;
  std::string variant;
  Verdict verdict = Verdict::No;
  std::string raw;
};

std::vector<FixtureRecord> read_fixtures(std::istream& in);
std::vector<FixtureRecord> load_fixtures(const std::filesystem::path& path);
std::string fixture_line(const FixtureRecord& record);

FixtureRecord to_fixture(const EdgeJudgment& judgment, const ConceptGraph& graph);

/// Fixture fields plus `source`, `target` and `flagged`.
std::string judgment_line(const EdgeJudgment& judgment, const ConceptGraph& graph);

/// Wiki. store: JSON Lines {"concept": text, "text": paragraph}.
std::map<std::string, std::string> load_intro_paragraphs(const std::filesystem::path& path);

}  // namespace cgraph
