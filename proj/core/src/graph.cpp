#include "cgraph/graph.hpp"

#include <algorithm>
#include <deque>
#include <unordered_set>

#include "cgraph/error.hpp"
#include "cgraph/text.hpp"

namespace cgraph {

std::string to_string(ConceptId id) { return std::to_string(id.value()); }

namespace {

const std::set<ConceptId> kNoNeighbors;

[[noreturn]] void unknown(ConceptId id) {
  throw Error(ErrorCode::UnknownConcept, "unknown concept id " + to_string(id));
}

// Hop distance from every node to `target`, following edges forward.
std::unordered_map<ConceptId, std::size_t> distances_to(const ConceptGraph& graph, ConceptId target) {
  std::unordered_map<ConceptId, std::size_t> dist{{target, 0}};
  std::deque<ConceptId> queue{target};
  while (!queue.empty()) {
    const auto node = queue.front();
    queue.pop_front();
    for (const auto pred : graph.predecessors(node)) {
      if (dist.emplace(pred, dist[node] + 1).second) queue.push_back(pred);
    }
  }
  return dist;
}

std::unordered_map<ConceptId, std::size_t> distances_from(const ConceptGraph& graph, ConceptId source) {
  std::unordered_map<ConceptId, std::size_t> dist{{source, 0}};
  std::deque<ConceptId> queue{source};
  while (!queue.empty()) {
    const auto node = queue.front();
    queue.pop_front();
    for (const auto succ : graph.successors(node)) {
      if (dist.emplace(succ, dist[node] + 1).second) queue.push_back(succ);
    }
  }
  return dist;
}

// Greedy walk: always step to the smallest successor one hop closer to the
// target. Yields the lexicographically smallest minimum-hop path.
Path smallest_shortest(const ConceptGraph& graph, ConceptId source,
                       const std::unordered_map<ConceptId, std::size_t>& to_target) {
  Path path{source};
  auto current = source;
  while (to_target.at(current) > 0) {
    const auto remaining = to_target.at(current);
    for (const auto succ : graph.successors(current)) {
      const auto it = to_target.find(succ);
      if (it != to_target.end() && it->second + 1 == remaining) {
        current = succ;
        break;
      }
    }
    path.push_back(current);
  }
  return path;
}

}  // namespace

ConceptGraph::ConceptGraph(std::span<const Concept> concepts) {
  for (const auto& c : concepts) add_concept(c);
}

void ConceptGraph::add_concept(Concept concept_value) {
  auto key = normalize_name(concept_value.name);
  if (key.empty()) {
    throw Error(ErrorCode::EmptyConcept, "concept " + to_string(concept_value.id) + " has an empty name");
  }
  if (concepts_.contains(concept_value.id)) {
    throw Error(ErrorCode::DuplicateConcept, "duplicate concept id " + to_string(concept_value.id));
  }
  if (by_name_.contains(key)) {
    throw Error(ErrorCode::DuplicateConcept, "duplicate concept name '" + concept_value.name + "'");
  }
  by_name_.emplace(std::move(key), concept_value.id);
  out_[concept_value.id];
  in_[concept_value.id];
  const auto id = concept_value.id;
  concepts_.emplace(id, std::move(concept_value));
}

bool ConceptGraph::add_edge(ConceptId source, ConceptId target) {
  require(source);
  require(target);
  if (source == target) {
    throw Error(ErrorCode::SelfLoop, "self-loop on concept " + to_string(source));
  }
  if (!out_[source].insert(target).second) return false;
  in_[target].insert(source);
  ++edge_count_;
  return true;
}

void ConceptGraph::require(ConceptId id) const {
  if (!contains(id)) unknown(id);
}

const Concept& ConceptGraph::concept_at(ConceptId id) const {
  const auto it = concepts_.find(id);
  if (it == concepts_.end()) unknown(id);
  return it->second;
}

std::optional<ConceptId> ConceptGraph::find(std::string_view name) const {
  const auto it = by_name_.find(normalize_name(name));
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

ConceptId ConceptGraph::resolve(std::string_view name) const {
  if (auto id = find(name)) return *id;
  throw Error(ErrorCode::UnknownConcept, "unknown concept '" + std::string(name) + "'");
}

bool ConceptGraph::has_edge(ConceptId source, ConceptId target) const {
  const auto it = out_.find(source);
  return it != out_.end() && it->second.contains(target);
}

const std::set<ConceptId>& ConceptGraph::successors(ConceptId id) const {
  const auto it = out_.find(id);
  if (it == out_.end()) unknown(id);
  return it->second;
}

const std::set<ConceptId>& ConceptGraph::predecessors(ConceptId id) const {
  const auto it = in_.find(id);
  if (it == in_.end()) unknown(id);
  return it->second;
}

std::vector<Concept> ConceptGraph::concepts() const {
  std::vector<Concept> out;
  out.reserve(concepts_.size());
  for (const auto& [id, c] : concepts_) out.push_back(c);
  return out;
}

std::vector<ConceptId> ConceptGraph::ids() const {
  std::vector<ConceptId> out;
  out.reserve(concepts_.size());
  for (const auto& [id, c] : concepts_) out.push_back(id);
  return out;
}

std::vector<std::string> ConceptGraph::names() const {
  std::vector<std::string> out;
  out.reserve(concepts_.size());
  for (const auto& [id, c] : concepts_) out.push_back(c.name);
  return out;
}

std::vector<Edge> ConceptGraph::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count_);
  for (const auto& [source, targets] : out_) {
    for (const auto target : targets) out.emplace_back(source, target);
  }
  return out;
}

ConceptGraph ConceptGraph::without_edges() const {
  ConceptGraph copy;
  for (const auto& [id, c] : concepts_) copy.add_concept(c);
  return copy;
}

bool has_path(const ConceptGraph& graph, ConceptId source, ConceptId target) {
  if (!graph.contains(source)) unknown(source);
  if (!graph.contains(target)) unknown(target);
  std::unordered_set<ConceptId> seen;
  std::vector<ConceptId> stack(graph.successors(source).begin(), graph.successors(source).end());
  while (!stack.empty()) {
    const auto node = stack.back();
    stack.pop_back();
    if (node == target) return true;
    if (!seen.insert(node).second) continue;
    for (const auto succ : graph.successors(node)) {
      if (!seen.contains(succ)) stack.push_back(succ);
    }
  }
  return false;
}

PathResult shortest_path(const ConceptGraph& graph, ConceptId source, ConceptId target) {
  if (!graph.contains(source)) unknown(source);
  if (!graph.contains(target)) unknown(target);
  PathResult result;
  if (source == target) return result;

  const auto from_source = distances_from(graph, source);
  if (!from_source.contains(target)) return result;

  // Walk back from target along predecessors that sit exactly one layer
  // closer to the source; every such chain is a minimum-hop path.
  std::vector<Path> partial{{target}};
  for (std::size_t layer = from_source.at(target); layer > 0; --layer) {
    std::vector<Path> next;
    for (const auto& tail : partial) {
      for (const auto pred : graph.predecessors(tail.back())) {
        const auto it = from_source.find(pred);
        if (it != from_source.end() && it->second + 1 == layer) {
          auto extended = tail;
          extended.push_back(pred);
          next.push_back(std::move(extended));
        }
      }
    }
    partial = std::move(next);
  }
  for (auto& path : partial) std::reverse(path.begin(), path.end());
  std::sort(partial.begin(), partial.end());
  result.paths = std::move(partial);
  return result;
}

PathResult prerequisite_paths(const ConceptGraph& graph, ConceptId target, std::size_t max_depth) {
  if (!graph.contains(target)) unknown(target);
  if (max_depth == 0) throw Error(ErrorCode::InvalidArgument, "max_depth must be >= 1");

  PathResult result;
  // Reversed path: target first, walking predecessors.
  Path reversed{target};
  std::unordered_set<ConceptId> on_path{target};
  auto visit = [&](auto&& self) -> void {
    if (reversed.size() > max_depth) return;
    for (const auto pred : graph.predecessors(reversed.back())) {
      if (on_path.contains(pred)) continue;
      reversed.push_back(pred);
      on_path.insert(pred);
      result.paths.emplace_back(reversed.rbegin(), reversed.rend());
      self(self);
      on_path.erase(pred);
      reversed.pop_back();
    }
  };
  visit(visit);
  std::sort(result.paths.begin(), result.paths.end());
  return result;
}

PathResult neighbors(const ConceptGraph& graph, ConceptId origin, Direction direction, std::size_t hops) {
  if (!graph.contains(origin)) unknown(origin);
  if (hops == 0) throw Error(ErrorCode::InvalidArgument, "hops must be >= 1");

  PathResult result;
  if (direction == Direction::In) {
    const auto to_origin = distances_to(graph, origin);
    for (const auto& [node, dist] : to_origin) {
      if (dist == 0 || dist > hops) continue;
      result.paths.push_back(smallest_shortest(graph, node, to_origin));
    }
  } else {
    const auto from_origin = distances_from(graph, origin);
    for (const auto& [node, dist] : from_origin) {
      if (dist == 0 || dist > hops) continue;
      result.paths.push_back(smallest_shortest(graph, origin, distances_to(graph, node)));
    }
  }
  std::sort(result.paths.begin(), result.paths.end());
  return result;
}

AdjacencyMatrix adjacency(const ConceptGraph& graph, std::span<const ConceptId> ordering) {
  if (ordering.size() != graph.size()) {
    throw Error(ErrorCode::OrderingMismatch, "ordering has " + std::to_string(ordering.size()) +
                                                 " ids but graph has " + std::to_string(graph.size()));
  }
  std::unordered_map<ConceptId, std::size_t> position;
  for (std::size_t i = 0; i < ordering.size(); ++i) {
    if (!graph.contains(ordering[i]) || !position.emplace(ordering[i], i).second) {
      throw Error(ErrorCode::OrderingMismatch, "ordering is not a permutation of the graph's ids");
    }
  }
  AdjacencyMatrix matrix(ordering.size());
  for (const auto& [source, target] : graph.edges()) {
    matrix(position.at(source), position.at(target)) = 1;
  }
  return matrix;
}

ConceptGraph graph_from_adjacency(std::span<const Concept> concepts, const AdjacencyMatrix& matrix) {
  if (matrix.size() != concepts.size()) {
    throw Error(ErrorCode::OrderingMismatch, "matrix size differs from concept count");
  }
  ConceptGraph graph(concepts);
  for (std::size_t i = 0; i < matrix.size(); ++i) {
    for (std::size_t j = 0; j < matrix.size(); ++j) {
      if (matrix(i, j)) graph.add_edge(concepts[i].id, concepts[j].id);
    }
  }
  return graph;
}

Path first_path(const PathResult& result) {
  if (result.paths.empty()) return {};
  return *std::min_element(result.paths.begin(), result.paths.end());
}

}  // namespace cgraph
