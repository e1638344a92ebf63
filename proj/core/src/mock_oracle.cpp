#include "cgraph/mock_oracle.hpp"

#include "cgraph/error.hpp"
#include "cgraph/text.hpp"

namespace cgraph {

GraphBackedOracle::GraphBackedOracle(ConceptGraph hidden, double flip_probability, std::uint64_t seed)
    : hidden_(std::move(hidden)), flip_probability_(flip_probability), seed_(seed) {
  if (!(flip_probability >= 0.0 && flip_probability < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "flip probability must lie in [0, 1)");
  }
}

bool GraphBackedOracle::flips(std::string_view concept_a, std::string_view concept_b) const {
  if (flip_probability_ <= 0.0) return false;
  std::string key = normalize_name(concept_a);
  key.push_back('\x1f');
  key += normalize_name(concept_b);
  const auto word = mix64(fnv1a64(key, 0xcbf29ce484222325ULL ^ mix64(seed_)));
  return unit_interval(word) < flip_probability_;
}

Verdict GraphBackedOracle::answer(std::string_view concept_a, std::string_view concept_b) const {
  const auto a = hidden_.find(concept_a);
  const auto b = hidden_.find(concept_b);
  if (!a || !b) {
    throw Error(ErrorCode::UnrecognizedPrompt,
                "pair (" + std::string(concept_a) + ", " + std::string(concept_b) + ") is not in the hidden graph");
  }
  bool yes = hidden_.has_edge(*a, *b);
  if (flips(concept_a, concept_b)) yes = !yes;
  return yes ? Verdict::Yes : Verdict::No;
}

std::string GraphBackedOracle::complete(const std::string& prompt) {
  const auto slots = parse_prompt_slots(prompt);
  if (!slots) throw Error(ErrorCode::UnrecognizedPrompt, "prompt is not a pairwise prerequisite prompt");
  const auto verdict = answer(slots->concept_a, slots->concept_b);
  if (detect_variant(prompt) == VariantKind::CoT) {
    return "The answer follows from the hidden graph.\n<result>" + std::string(to_string(verdict)) + "</result>";
  }
  return std::string(to_string(verdict));
}

ScriptedOracle::ScriptedOracle(const std::vector<FixtureRecord>& fixtures) {
  for (const auto& f : fixtures) {
    auto a = normalize_name(f.a);
    auto b = normalize_name(f.b);
    const auto& response = f.raw.empty() ? std::string(to_string(f.verdict)) : f.raw;
    exact_.emplace(Key{a, b, f.variant}, response);
    by_pair_.emplace(std::pair{std::move(a), std::move(b)}, response);
  }
}

std::string ScriptedOracle::complete(const std::string& prompt) {
  const auto slots = parse_prompt_slots(prompt);
  if (!slots) throw Error(ErrorCode::UnrecognizedPrompt, "prompt is not a pairwise prerequisite prompt");
  auto a = normalize_name(slots->concept_a);
  auto b = normalize_name(slots->concept_b);
  const auto kind = detect_variant(prompt).value_or(VariantKind::ZeroShot);
  if (const auto it = exact_.find(Key{a, b, std::string(variant_code(kind))}); it != exact_.end()) {
    return it->second;
  }
  if (const auto it = by_pair_.find({a, b}); it != by_pair_.end()) return it->second;
  throw Error(ErrorCode::FixtureMiss, "no fixture for (" + slots->concept_a + ", " + slots->concept_b + ")");
}

std::string EchoOracle::complete(const std::string& prompt) {
  std::string_view view(prompt);
  while (view.ends_with('\n')) view.remove_suffix(1);
  const auto pos = view.rfind('\n');
  return std::string(pos == std::string_view::npos ? view : view.substr(pos + 1));
}

std::string ReplayOracle::complete(const std::string& prompt) {
  const auto it = responses_.find(prompt);
  if (it == responses_.end()) throw Error(ErrorCode::FixtureMiss, "no recorded response for prompt");
  return it->second;
}

std::unique_ptr<TextOracle> make_mock_oracle(const MockOracleSpec& spec) {
  struct Visitor {
    std::unique_ptr<TextOracle> operator()(const GraphBackedSpec& s) const {
      return std::make_unique<GraphBackedOracle>(s.hidden, s.flip_probability, s.seed);
    }
    std::unique_ptr<TextOracle> operator()(const ScriptedSpec& s) const {
      return std::make_unique<ScriptedOracle>(s.fixtures);
    }
    std::unique_ptr<TextOracle> operator()(const EchoSpec&) const { return std::make_unique<EchoOracle>(); }
  };
  return std::visit(Visitor{}, spec);
}

std::string mock_judge(const MockOracleSpec& spec, const std::string& prompt) {
  return make_mock_oracle(spec)->complete(prompt);
}

}  // namespace cgraph
