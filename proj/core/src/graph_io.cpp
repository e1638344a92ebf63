#include "cgraph/graph_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "cgraph/error.hpp"
#include "cgraph/text.hpp"

namespace cgraph {
namespace {

std::int64_t parse_id(const std::string& field, std::size_t line_no) {
  const auto text = trim(field);
  std::int64_t value = 0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (text.empty() || ec != std::errc{} || ptr != last) {
    throw Error(ErrorCode::Format, "line " + std::to_string(line_no) + ": bad integer '" + field + "'");
  }
  return value;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return in;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

std::vector<Concept> read_concepts(std::istream& in, const std::string& domain) {
  std::vector<Concept> concepts;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (trim(line).empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw Error(ErrorCode::Format, "line " + std::to_string(line_no) + ": expected id<TAB>name");
    }
    concepts.push_back({ConceptId{parse_id(line.substr(0, tab), line_no)}, line.substr(tab + 1), domain});
  }
  return concepts;
}

std::vector<Concept> load_concepts(const std::filesystem::path& path, const std::string& domain) {
  auto in = open_input(path);
  return read_concepts(in, domain);
}

void write_concepts(std::ostream& out, const ConceptGraph& graph) {
  for (const auto& c : graph.concepts()) out << c.id.value() << '\t' << c.name << '\n';
}

std::vector<LabeledPair> read_labeled_pairs(std::istream& in) {
  std::vector<LabeledPair> pairs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (trim(line).empty()) continue;
    const auto fields = split(line, '\t');
    if (fields.size() < 2 || fields.size() > 3) {
      throw Error(ErrorCode::Format,
                  "line " + std::to_string(line_no) + ": expected source<TAB>target[<TAB>label]");
    }
    LabeledPair pair{ConceptId{parse_id(fields[0], line_no)}, ConceptId{parse_id(fields[1], line_no)}, true};
    if (fields.size() == 3) {
      const auto label = trim(fields[2]);
      if (label != "0" && label != "1") {
        throw Error(ErrorCode::Format, "line " + std::to_string(line_no) + ": label must be 0 or 1");
      }
      pair.label = label == "1";
    }
    pairs.push_back(pair);
  }
  return pairs;
}

std::vector<LabeledPair> load_labeled_pairs(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_labeled_pairs(in);
}

void write_edges(std::ostream& out, const ConceptGraph& graph) {
  for (const auto& [source, target] : graph.edges()) out << source.value() << '\t' << target.value() << '\n';
}

void add_positive_edges(ConceptGraph& graph, const std::vector<LabeledPair>& pairs) {
  for (const auto& pair : pairs) {
    if (pair.label) graph.add_edge(pair.source, pair.target);
  }
}

ConceptGraph load_graph(const std::filesystem::path& concepts, const std::filesystem::path& edges,
                        const std::string& domain) {
  ConceptGraph graph(load_concepts(concepts, domain));
  add_positive_edges(graph, load_labeled_pairs(edges));
  return graph;
}

std::string read_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + tmp.string());
    out << contents;
    if (!out.flush()) throw Error(ErrorCode::Io, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot rename " + tmp.string() + ": " + ec.message());
}

}  // namespace cgraph
