#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include "cgraph/graph.hpp"
#include "cgraph/llm.hpp"
#include "cgraph/recovery.hpp"

namespace cgraph {

/// Answers pairwise prompts from a hidden graph, flipping each pair's verdict
/// with probability `flip_probability`. The flip depends only on
/// (seed, A, B), so repeated queries agree.
class GraphBackedOracle final : public TextOracle {
 public:
  GraphBackedOracle(ConceptGraph hidden, double flip_probability, std::uint64_t seed);

  std::string complete(const std::string& prompt) override;

  /// Verdict for the pair without going through prompt text.
  Verdict answer(std::string_view concept_a, std::string_view concept_b) const;
  bool flips(std::string_view concept_a, std::string_view concept_b) const;

 private:
  ConceptGraph hidden_;
  double flip_probability_;
  std::uint64_t seed_;
};

/// Replays fixtures keyed by (A, B, variant); a record for the pair under a
/// different variant is used when no exact match exists.
class ScriptedOracle final : public TextOracle {
 public:
  explicit ScriptedOracle(const std::vector<FixtureRecord>& fixtures);

  std::string complete(const std::string& prompt) override;

 private:
  using Key = std::tuple<std::string, std::string, std::string>;
  std::map<Key, std::string> exact_;
  std::map<std::pair<std::string, std::string>, std::string> by_pair_;
};

/// Returns the prompt's last line.
class EchoOracle final : public TextOracle {
 public:
  std::string complete(const std::string& prompt) override;
};

/// Exact prompt -> response table (built from pipeline traces). Throws
/// FixtureMiss on unseen prompts.
class ReplayOracle final : public TextOracle {
 public:
  explicit ReplayOracle(std::map<std::string, std::string> responses) : responses_(std::move(responses)) {}
  std::string complete(const std::string& prompt) override;

 private:
  std::map<std::string, std::string> responses_;
};

struct GraphBackedSpec {
  ConceptGraph hidden;
  double flip_probability = 0.0;
  std::uint64_t seed = 0;
};
struct ScriptedSpec {
  std::vector<FixtureRecord> fixtures;
};
struct EchoSpec {};

using MockOracleSpec = std::variant<GraphBackedSpec, ScriptedSpec, EchoSpec>;

/// Throws InvalidArgument when a flip probability lies outside [0, 1).
std::unique_ptr<TextOracle> make_mock_oracle(const MockOracleSpec& spec);

std::string mock_judge(const MockOracleSpec& spec, const std::string& prompt);

}  // namespace cgraph
