#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cgraph/graph.hpp"

namespace cgraph {

struct Reachable {
  std::string source;
  std::string target;
  friend bool operator==(const Reachable&, const Reachable&) = default;
};

struct ShortestPath {
  std::string source;
  std::string target;
  friend bool operator==(const ShortestPath&, const ShortestPath&) = default;
};

struct Prerequisites {
  std::string target;
  std::size_t depth = 1;
  friend bool operator==(const Prerequisites&, const Prerequisites&) = default;
};

struct Neighbors {
  std::string origin;
  Direction direction = Direction::Out;
  std::size_t hops = 1;
  friend bool operator==(const Neighbors&, const Neighbors&) = default;
};

using GraphQuery = std::variant<Reachable, ShortestPath, Prerequisites, Neighbors>;

enum class QueryKind { Reachable, ShortestPath, Prerequisites, Neighbors };

std::string_view to_string(QueryKind kind) noexcept;
QueryKind kind_of(const GraphQuery& query) noexcept;

/// Largest DEPTH or HOPS the parser accepts.
inline constexpr std::size_t kMaxQueryBound = 1'000'000;

/// Parses exactly one command, surrounding whitespace allowed. Throws
/// SyntaxError with the byte offset of the offending token.
GraphQuery parse(std::string_view input);

/// Commands separated by newlines or ';'. Blank commands are skipped; an
/// input with no command at all is a SyntaxError.
std::vector<GraphQuery> parse_script(std::string_view input);

/// Canonical text: upper-case keywords, single spaces, escaped names.
std::string print(const GraphQuery& query);

struct QueryOutcome {
  QueryKind kind = QueryKind::Reachable;
  std::optional<bool> reachable;  // Reachable only
  /// Reachable: shortest witness paths (empty when unreachable). Other
  /// kinds: the graph-core result.
  PathResult paths;
  std::vector<ConceptId> resolved;  // in the order the names appear

  friend bool operator==(const QueryOutcome&, const QueryOutcome&) = default;
};

/// Names resolve by normalized match. Reachable(a, a) is false. Throws
/// UnknownConcept.
QueryOutcome execute(const GraphQuery& query, const ConceptGraph& graph);

}  // namespace cgraph
