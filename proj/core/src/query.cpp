#include "cgraph/query.hpp"

#include <cctype>
#include <set>

#include "cgraph/error.hpp"

namespace cgraph {

namespace {

const std::string kName = "quoted name";
const std::string kInteger = "integer";
const std::string kArrow = "\"->\"";
const std::string kEnd = "end of input";

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v'; }

bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }

bool is_digit(char c) { return c >= '0' && c <= '9'; }

bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::toupper(static_cast<unsigned char>(a[i])) != b[i]) return false;
  }
  return true;
}

std::string describe(std::string_view input, std::size_t pos) {
  if (pos >= input.size()) return "end of input";
  const auto c = static_cast<unsigned char>(input[pos]);
  if (c >= 0x20 && c < 0x7f) return std::string("'") + static_cast<char>(c) + "'";
  static constexpr char kHex[] = "0123456789abcdef";
  return std::string("byte 0x") + kHex[c >> 4] + kHex[c & 0xf];
}

class Parser {
 public:
  explicit Parser(std::string_view input) : in_(input) {}

  bool at_end() {
    skip_space();
    return pos_ >= in_.size();
  }

  std::size_t pos() const noexcept { return pos_; }

  GraphQuery command() {
    skip_space();
    const auto start = pos_;
    const auto word = keyword_token();
    if (iequals(word, "REACHABLE")) {
      auto [a, b] = pair_body();
      return Reachable{std::move(a), std::move(b)};
    }
    if (iequals(word, "SHORTEST")) {
      auto [a, b] = pair_body();
      return ShortestPath{std::move(a), std::move(b)};
    }
    if (iequals(word, "PREREQ")) {
      auto target = name();
      expect_keyword("DEPTH");
      return Prerequisites{std::move(target), integer()};
    }
    if (iequals(word, "NEIGHBORS")) {
      auto origin = name();
      skip_space();
      const auto dir_pos = pos_;
      const auto dir = keyword_token();
      Direction direction = Direction::Out;
      if (iequals(dir, "IN")) direction = Direction::In;
      else if (iequals(dir, "OUT")) direction = Direction::Out;
      else fail(dir_pos, {"IN", "OUT"});
      expect_keyword("HOPS");
      return Neighbors{std::move(origin), direction, integer()};
    }
    fail(start, {"REACHABLE", "SHORTEST", "PREREQ", "NEIGHBORS"});
  }

  // Consumes horizontal whitespace, then requires a separator or the end.
  void separator() {
    while (pos_ < in_.size() && is_space(in_[pos_]) && in_[pos_] != '\n') ++pos_;
    if (pos_ >= in_.size()) return;
    if (in_[pos_] == ';' || in_[pos_] == '\n') {
      while (pos_ < in_.size() && (is_space(in_[pos_]) || in_[pos_] == ';')) ++pos_;
      return;
    }
    fail(pos_, {"';'", "newline", kEnd});
  }

  void skip_separators() {
    while (pos_ < in_.size() && (is_space(in_[pos_]) || in_[pos_] == ';')) ++pos_;
  }

  [[noreturn]] void fail(std::size_t at, std::set<std::string> expected) const {
    std::string list;
    for (const auto& e : expected) list += (list.empty() ? "" : ", ") + e;
    throw SyntaxError(at, std::move(expected),
                      "syntax error at offset " + std::to_string(at) + ": found " + describe(in_, at) +
                          ", expected one of: " + list);
  }

 private:
  void skip_space() {
    while (pos_ < in_.size() && is_space(in_[pos_])) ++pos_;
  }

  // A maximal run of letters; empty when none starts here.
  std::string_view keyword_token() {
    const auto start = pos_;
    while (pos_ < in_.size() && is_alpha(in_[pos_])) ++pos_;
    return in_.substr(start, pos_ - start);
  }

  void expect_keyword(std::string_view keyword) {
    skip_space();
    const auto start = pos_;
    if (!iequals(keyword_token(), keyword)) fail(start, {std::string(keyword)});
  }

  std::pair<std::string, std::string> pair_body() {
    auto a = name();
    skip_space();
    if (in_.substr(pos_, 2) != "->") fail(pos_, {kArrow});
    pos_ += 2;
    auto b = name();
    return {std::move(a), std::move(b)};
  }

  std::string name() {
    skip_space();
    const auto start = pos_;
    if (pos_ >= in_.size() || in_[pos_] != '"') fail(start, {kName});
    ++pos_;
    std::string out;
    while (true) {
      if (pos_ >= in_.size()) fail(pos_, {"'\"'"});
      const char c = in_[pos_];
      if (c == '"') {
        ++pos_;
        break;
      }
      if (c == '\\') {
        if (pos_ + 1 >= in_.size()) fail(pos_ + 1, {"'\"'", "'\\'"});
        const char next = in_[pos_ + 1];
        if (next != '"' && next != '\\') fail(pos_ + 1, {"'\"'", "'\\'"});
        out.push_back(next);
        pos_ += 2;
        continue;
      }
      out.push_back(c);
      ++pos_;
    }
    if (out.empty()) fail(start, {"non-empty " + kName});
    return out;
  }

  std::size_t integer() {
    skip_space();
    const auto start = pos_;
    std::size_t value = 0;
    bool overflow = false;
    while (pos_ < in_.size() && is_digit(in_[pos_])) {
      value = value * 10 + static_cast<std::size_t>(in_[pos_] - '0');
      if (value > kMaxQueryBound) overflow = true;
      if (overflow) value = kMaxQueryBound + 1;
      ++pos_;
    }
    if (pos_ == start || value < 1 || overflow) fail(start, {kInteger});
    return value;
  }

  std::string_view in_;
  std::size_t pos_ = 0;
};

std::string quote(std::string_view name) {
  std::string out = "\"";
  for (const char c : name) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

std::string_view to_string(QueryKind kind) noexcept {
  switch (kind) {
    case QueryKind::Reachable: return "reachable";
    case QueryKind::ShortestPath: return "shortest";
    case QueryKind::Prerequisites: return "prereq";
    case QueryKind::Neighbors: return "neighbors";
  }
  return "unknown";
}

QueryKind kind_of(const GraphQuery& query) noexcept {
  return static_cast<QueryKind>(query.index());
}

GraphQuery parse(std::string_view input) {
  Parser p(input);
  auto query = p.command();
  if (!p.at_end()) p.fail(p.pos(), {kEnd});
  return query;
}

std::vector<GraphQuery> parse_script(std::string_view input) {
  Parser p(input);
  std::vector<GraphQuery> out;
  p.skip_separators();
  while (!p.at_end()) {
    out.push_back(p.command());
    p.separator();
    p.skip_separators();
  }
  if (out.empty()) p.fail(p.pos(), {"REACHABLE", "SHORTEST", "PREREQ", "NEIGHBORS"});
  return out;
}

std::string print(const GraphQuery& query) {
  struct Printer {
    std::string operator()(const Reachable& q) const {
      return "REACHABLE " + quote(q.source) + " -> " + quote(q.target);
    }
    std::string operator()(const ShortestPath& q) const {
      return "SHORTEST " + quote(q.source) + " -> " + quote(q.target);
    }
    std::string operator()(const Prerequisites& q) const {
      return "PREREQ " + quote(q.target) + " DEPTH " + std::to_string(q.depth);
    }
    std::string operator()(const Neighbors& q) const {
      return "NEIGHBORS " + quote(q.origin) + (q.direction == Direction::In ? " IN" : " OUT") + " HOPS " +
             std::to_string(q.hops);
    }
  };
  return std::visit(Printer{}, query);
}

QueryOutcome execute(const GraphQuery& query, const ConceptGraph& graph) {
  QueryOutcome out;
  out.kind = kind_of(query);
  struct Executor {
    const ConceptGraph& graph;
    QueryOutcome& out;

    void operator()(const Reachable& q) const {
      const auto a = graph.resolve(q.source);
      const auto b = graph.resolve(q.target);
      out.resolved = {a, b};
      out.reachable = a != b && has_path(graph, a, b);
      if (*out.reachable) out.paths = shortest_path(graph, a, b);
    }
    void operator()(const ShortestPath& q) const {
      const auto a = graph.resolve(q.source);
      const auto b = graph.resolve(q.target);
      out.resolved = {a, b};
      out.paths = shortest_path(graph, a, b);
    }
    void operator()(const Prerequisites& q) const {
      const auto t = graph.resolve(q.target);
      out.resolved = {t};
      out.paths = prerequisite_paths(graph, t, q.depth);
    }
    void operator()(const Neighbors& q) const {
      const auto o = graph.resolve(q.origin);
      out.resolved = {o};
      out.paths = neighbors(graph, o, q.direction, q.hops);
    }
  };
  std::visit(Executor{graph, out}, query);
  return out;
}

}  // namespace cgraph
