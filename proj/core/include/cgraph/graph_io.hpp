#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "cgraph/graph.hpp"

namespace cgraph {

/// One row of an edge file. Two-column rows are positives; a third column
/// carries an explicit 0/1 label, where 0 marks a negative pair (not an edge).
struct LabeledPair {
  ConceptId source;
  ConceptId target;
  bool label = true;

  friend auto operator<=>(const LabeledPair&, const LabeledPair&) = default;
};

// Concept file: `id<TAB>name`, no header. Blank lines are skipped.
std::vector<Concept> read_concepts(std::istream& in, const std::string& domain = {});
std::vector<Concept> load_concepts(const std::filesystem::path& path, const std::string& domain = {});
void write_concepts(std::ostream& out, const ConceptGraph& graph);

// Edge file: `source_id<TAB>target_id[<TAB>label]`.
std::vector<LabeledPair> read_labeled_pairs(std::istream& in);
std::vector<LabeledPair> load_labeled_pairs(const std::filesystem::path& path);
void write_edges(std::ostream& out, const ConceptGraph& graph);

/// Adds every positive pair as an edge; negatives are ignored.
void add_positive_edges(ConceptGraph& graph, const std::vector<LabeledPair>& pairs);

/// Concepts plus the positive rows of an edge file.
ConceptGraph load_graph(const std::filesystem::path& concepts, const std::filesystem::path& edges,
                        const std::string& domain = {});

std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace cgraph
