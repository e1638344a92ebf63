#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace cgraph {

/// Surrogate key of a concept within one graph.
class ConceptId {
 public:
  constexpr ConceptId() = default;
  constexpr explicit ConceptId(std::int64_t value) : value_(value) {}

  constexpr std::int64_t value() const noexcept { return value_; }

  friend constexpr auto operator<=>(ConceptId, ConceptId) = default;

 private:
  std::int64_t value_ = 0;
};

std::string to_string(ConceptId id);

struct Concept {
  ConceptId id;
  std::string name;
  std::string domain;
};

using Edge = std::pair<ConceptId, ConceptId>;
using Path = std::vector<ConceptId>;

/// Paths follow edge direction and never repeat a node. Traversals return
/// them sorted lexicographically by id sequence.
struct PathResult {
  std::vector<Path> paths;

  bool empty() const noexcept { return paths.empty(); }
  friend bool operator==(const PathResult&, const PathResult&) = default;
};

enum class Direction { In, Out };

/// Directed prerequisite graph: edge (a, b) means a is a prerequisite of b.
///
/// Self-loops and duplicate edges are rejected or collapsed; cycles are
/// allowed. Names are unique after `normalize_name`, which is also the lookup
/// key for `find`. Concepts and edges iterate in ascending id order.
class ConceptGraph {
 public:
  ConceptGraph() = default;
  explicit ConceptGraph(std::span<const Concept> concepts);

  /// Throws DuplicateConcept on a repeated id or normalized name, EmptyConcept
  /// on a blank name.
  void add_concept(Concept concept_value);

  /// Returns true when the edge was new. Throws UnknownConcept or SelfLoop.
  bool add_edge(ConceptId source, ConceptId target);

  bool contains(ConceptId id) const noexcept { return concepts_.contains(id); }
  const Concept& concept_at(ConceptId id) const;
  const std::string& name(ConceptId id) const { return concept_at(id).name; }
  std::optional<ConceptId> find(std::string_view name) const;
  /// Like `find` but throws UnknownConcept.
  ConceptId resolve(std::string_view name) const;

  bool has_edge(ConceptId source, ConceptId target) const;
  const std::set<ConceptId>& successors(ConceptId id) const;
  const std::set<ConceptId>& predecessors(ConceptId id) const;

  std::vector<Concept> concepts() const;
  std::vector<ConceptId> ids() const;
  std::vector<std::string> names() const;
  std::vector<Edge> edges() const;

  std::size_t size() const noexcept { return concepts_.size(); }
  std::size_t edge_count() const noexcept { return edge_count_; }

  /// Same concepts, no edges.
  ConceptGraph without_edges() const;

 private:
  void require(ConceptId id) const;

  std::map<ConceptId, Concept> concepts_;
  std::map<ConceptId, std::set<ConceptId>> out_;
  std::map<ConceptId, std::set<ConceptId>> in_;
  std::unordered_map<std::string, ConceptId> by_name_;
  std::size_t edge_count_ = 0;
};

/// True iff a directed walk of length >= 1 leads from source to target. For
/// source == target this means the node lies on a cycle.
bool has_path(const ConceptGraph& graph, ConceptId source, ConceptId target);

/// All minimum-hop paths source -> target, endpoints included. Empty when
/// unreachable or when source == target.
PathResult shortest_path(const ConceptGraph& graph, ConceptId source, ConceptId target);

/// Every simple path of 1..max_depth hops that ends at `target`.
PathResult prerequisite_paths(const ConceptGraph& graph, ConceptId target, std::size_t max_depth);

/// For each node within `hops` of `origin` in the given direction, the
/// lexicographically smallest minimum-hop path connecting them. Out paths
/// start at origin; In paths end at origin.
PathResult neighbors(const ConceptGraph& graph, ConceptId origin, Direction direction,
                     std::size_t hops);

/// Dense row-major 0/1 matrix.
class AdjacencyMatrix {
 public:
  AdjacencyMatrix() = default;
  explicit AdjacencyMatrix(std::size_t n) : n_(n), cells_(n * n, 0) {}

  std::size_t size() const noexcept { return n_; }
  std::uint8_t operator()(std::size_t row, std::size_t col) const { return cells_[row * n_ + col]; }
  std::uint8_t& operator()(std::size_t row, std::size_t col) { return cells_[row * n_ + col]; }

  friend bool operator==(const AdjacencyMatrix&, const AdjacencyMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<std::uint8_t> cells_;
};

/// Entry (i, j) is 1 iff edge (ordering[i], ordering[j]) exists. Throws
/// OrderingMismatch unless `ordering` is a permutation of the graph's ids.
AdjacencyMatrix adjacency(const ConceptGraph& graph, std::span<const ConceptId> ordering);

/// Inverse of `adjacency`: concepts in matrix order, edges from nonzero cells.
ConceptGraph graph_from_adjacency(std::span<const Concept> concepts, const AdjacencyMatrix& matrix);

/// Smallest path by id sequence, or empty when there are none.
Path first_path(const PathResult& result);

}  // namespace cgraph

template <>
struct std::hash<cgraph::ConceptId> {
  std::size_t operator()(cgraph::ConceptId id) const noexcept {
    return std::hash<std::int64_t>{}(id.value());
  }
};
