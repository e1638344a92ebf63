// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

#include "cgraph/error.hpp"
#include "cgraph/eval.hpp"
#include "cgraph/graph.hpp"
#include "cgraph/linkpred.hpp"
#include "cgraph/llm.hpp"
#include "cgraph/mock_oracle.hpp"
#include "cgraph/pipeline.hpp"
#include "cgraph/query.hpp"
#include "cgraph/recovery.hpp"
#include "gradcheck.hpp"
#include "json.hpp"
#include "oracles.hpp"
#include "query_gen.hpp"
#include "synthetic.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace cgraph;
using namespace cgraph::testing;

namespace {

struct Check {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 4) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

// ------------------------------------------------------------- CLI helpers

std::string quote(const std::string& s) {
  std::string out = "'";
  for (const char c : s) out += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return out + "'";
}

int run_cli(const std::vector<std::string>& args, std::string* output = nullptr) {
#ifdef CGRAPH_CLI_PATH
  std::string cmd = quote(CGRAPH_CLI_PATH);
  for (const auto& a : args) cmd += " " + quote(a);
  cmd += " 2>&1";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return -1;
  std::string out;
  char buf[4096];
  while (const auto n = std::fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
  const int status = ::pclose(pipe);
  if (output) *output = out;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
#else
  (void)args;
  if (output) *output = "cgraph CLI was not built";
  return -1;
#endif
}

fs::path scratch_dir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("cgraph_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

// ----------------------------------------------------------------- recovery

struct RecoveryRun {
  ConceptGraph hidden;
  RecoveryResult result;
};

RecoveryRun recover_random_dag(double flip_probability) {
  std::mt19937_64 rng(20240501);
  // Density is over the n(n-1)/2 pairs a DAG on a fixed order can use.
  auto hidden = random_graph(rng, 50, 0.05, true);
  ConceptGraph concepts;
  for (const auto& c : hidden.concepts()) concepts.add_concept(c);
  GraphBackedOracle oracle(hidden, flip_probability, 7);
  SamplingPlan plan;
  plan.mode = SamplingMode::AllOrderedPairs;
  auto result = recover_graph(concepts, oracle, PromptVariant::zero_shot(), plan);
  return {std::move(hidden), std::move(result)};
}

Check perfect_recovery() {
  const auto run = recover_random_dag(0.0);
  const auto hidden_edges = run.hidden.edges();
  const auto recovered_edges = run.result.graph.edges();
  const std::set<Edge> hidden(hidden_edges.begin(), hidden_edges.end());
  const std::set<Edge> recovered(recovered_edges.begin(), recovered_edges.end());
  return {hidden == recovered, std::to_string(recovered.size()) + "/" + std::to_string(hidden.size()) +
                                   " edges over " + std::to_string(run.result.judgments.size()) + " pairs"};
}

Check noisy_recovery() {
  const auto run = recover_random_dag(0.1);
  std::vector<Verdict> predicted, gold;
  for (const auto& j : run.result.judgments) {
    predicted.push_back(j.verdict);
    gold.push_back(run.hidden.has_edge(j.source, j.target) ? Verdict::Yes : Verdict::No);
  }
  const double error = 1.0 - binary_report(predicted, gold).accuracy;
  const bool enough = run.result.judgments.size() >= 2450;
  return {enough && std::abs(error - 0.10) <= 0.02,
          "error rate " + fmt(error) + " over " + std::to_string(run.result.judgments.size()) + " pairs"};
}

// ------------------------------------------------------------------- eval

Check metric_replay() {
  std::mt19937_64 rng(99);
  std::ostringstream fixtures, gold;
  std::vector<bool> pred_bits, gold_bits;
  for (int i = 0; i < 311; ++i) {
    const bool p = rng() % 5 < 2, g = rng() % 3 == 0;
    pred_bits.push_back(p);
    gold_bits.push_back(g);
    fixtures << json{{"a", "c" + std::to_string(i)}, {"b", "d" + std::to_string(i)}, {"variant", "zs"},
                     {"verdict", p ? "YES" : "NO"}, {"raw", p ? "YES" : "NO"}}
                    .dump()
             << "\n";
    gold << i + 1 << '\t' << i + 1000 << '\t' << (g ? 1 : 0) << '\n';
  }
  const auto dir = scratch_dir() / "metric_replay";
  fs::create_directories(dir);
  std::ofstream(dir / "pred.jsonl") << fixtures.str();
  std::ofstream(dir / "gold.tsv") << gold.str();
  std::string out;
  const int rc = run_cli({"--output-dir", (dir / "out").string(), "eval", "--predictions", (dir / "pred.jsonl").string(),
                          "--gold", (dir / "gold.tsv").string()},
                         &out);
  if (rc != 0) return {false, "cgraph eval exited " + std::to_string(rc) + ": " + out};

  const auto report = json::parse(std::ifstream(dir / "out" / "report.json"));
  const auto want = brute_metrics(pred_bits, gold_bits);
  const auto same = [](double a, double b) { return std::round(a * 1e4) == std::round(b * 1e4); };
  const bool ok = same(report["accuracy"], want.accuracy) && same(report["precision"], want.precision) &&
                  same(report["recall"], want.recall) && same(report["f1"], want.f1);
  return {ok, "acc " + fmt(want.accuracy) + " p " + fmt(want.precision) + " r " + fmt(want.recall) + " f1 " +
                  fmt(want.f1)};
}

Check similarity_ground_cases() {
  ExactMatchEmbedder exact;
  const SimilarityMatcher m{&exact, 0.6, false};
  const double identical = similarity_f1({"a", "b", "c"}, {"c", "b", "a"}, m).f1;
  TableEmbedder table;
  table.add("x", {1, 0, 0});
  table.add("y", {0, 1, 0});
  table.add("z", {0, 0, 1});
  const double orthogonal = similarity_f1({"x"}, {"y", "z"}, {&table, 0.6, false}).f1;
  const double half = similarity_f1({"a"}, {"a", "b"}, m).f1;

  const SeededHashEmbedder embedder(5, 4);
  std::mt19937_64 rng(12);
  std::size_t violations = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::string> pred, gold;
    for (std::size_t i = 0, n = 1 + rng() % 5; i < n; ++i) pred.push_back("p" + std::to_string(rng() % 20));
    for (std::size_t i = 0, n = 1 + rng() % 5; i < n; ++i) gold.push_back("p" + std::to_string(rng() % 20));
    double previous = 2.0;
    for (const double mu : {0.2, 0.4, 0.6, 0.8}) {
      const double f1 = similarity_f1(pred, gold, {&embedder, mu, false}).f1;
      if (f1 > previous) ++violations;
      previous = f1;
    }
  }
  const bool ok = identical == 1.0 && orthogonal == 0.0 && std::abs(half - 0.6667) <= 1e-4 && violations == 0;
  return {ok, "identical " + fmt(identical) + ", orthogonal " + fmt(orthogonal) + ", {a} vs {a,b} " + fmt(half) +
                  ", monotonicity violations " + std::to_string(violations)};
}

// ---------------------------------------------------------------- linkpred

Check gradient_check() {
  double worst = 0.0;
  for (const std::uint64_t seed : {1u, 2u, 3u}) {
    std::mt19937_64 rng(seed);
    auto model = GcnModel::initialize({8, 8, {4, 3}}, seed, 0.8);
    const Matrix x = random_matrix(6, 8, rng);
    const Matrix adj = normalize_adjacency(six_node_adjacency(), true);
    const auto pairs = six_node_pairs();
    GcnGradients g;
    gcn_loss(model, x, adj, pairs, &g);
    const auto loss = [&] { return gcn_loss(model, x, adj, pairs); };
    worst = std::max(worst, max_relative_error(g.projection, numeric_gradient(model.projection, loss, 1e-5)));
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
      worst = std::max(worst, max_relative_error(g.layers[l], numeric_gradient(model.layers[l], loss, 1e-5)));
    }
    worst = std::max(worst, max_relative_error(g.scoring, numeric_gradient(model.scoring, loss, 1e-5)));
  }
  std::ostringstream s;
  s << "max relative error " << std::scientific << std::setprecision(2) << worst;
  return {worst < 1e-4, s.str()};
}

Check learnability() {
  double worst_f1 = 1.0;
  bool deterministic = true;
  for (const std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    const auto inst = separable_instance(seed);
    const auto config = separable_config(seed);
    const auto a = train_gcn(inst.embeddings, inst.pairs, config);
    const auto b = train_gcn(inst.embeddings, inst.pairs, config);
    deterministic = deterministic && a.loss_history == b.loss_history && a.predictor.to_json() == b.predictor.to_json();
    std::vector<Edge> pairs;
    std::vector<Verdict> gold;
    for (const auto& p : inst.pairs) {
      pairs.emplace_back(p.source, p.target);
      gold.push_back(p.label ? Verdict::Yes : Verdict::No);
    }
    std::vector<Verdict> predicted;
    for (const auto& p : predict_gcn(a.predictor, inst.embeddings, pairs, 0.5)) {
      predicted.push_back(p.label ? Verdict::Yes : Verdict::No);
    }
    worst_f1 = std::min(worst_f1, binary_report(predicted, gold).f1);
  }
  return {deterministic && worst_f1 >= 0.95,
          "min F1 " + fmt(worst_f1) + " over 5 seeds, " + (deterministic ? "deterministic" : "NOT deterministic")};
}

// ------------------------------------------------------------ graph / query

Check graph_oracle_equivalence() {
  std::mt19937_64 rng(2024);
  std::size_t mismatches = 0, comparisons = 0;
  for (int t = 0; t < 200; ++t) {
    const auto n = 1 + rng() % 10;
    const double density = 0.05 + 0.4 * static_cast<double>(rng() % 100) / 100.0;
    const auto g = random_graph(rng, n, density, t % 3 == 0);
    const auto reach = closure(g);
    for (const auto a : g.ids()) {
      for (const auto b : g.ids()) {
        ++comparisons;
        if (has_path(g, a, b) != reach.at({a, b})) ++mismatches;
        const auto got = shortest_path(g, a, b);
        const auto want = brute_shortest(g, a, b);
        if (got.paths != want) ++mismatches;
        for (const auto& p : got.paths) {
          if (p.size() != want.front().size()) ++mismatches;
        }
      }
      for (std::size_t depth = 1; depth <= 3; ++depth) {
        ++comparisons;
        if (prerequisite_paths(g, a, depth).paths != brute_prerequisites(g, a, depth)) ++mismatches;
      }
    }
  }
  return {mismatches == 0, std::to_string(mismatches) + " mismatches in " + std::to_string(comparisons) + " checks"};
}

Check parser_totality() {
  std::mt19937_64 rng(8);
  std::size_t accepted = 0, other_errors = 0, bad_roundtrips = 0;
  for (int i = 0; i < 10'000; ++i) {
    std::string input(rng() % 64, '\0');
    for (auto& c : input) c = static_cast<char>(rng() % 256);
    try {
      const auto q = parse(input);
      ++accepted;
      if (parse(print(q)) != q) ++bad_roundtrips;
    } catch (const SyntaxError& e) {
      if (e.offset() > input.size()) ++other_errors;
    } catch (...) {
      ++other_errors;
    }
  }
  for (int i = 0; i < 1'000; ++i) {
    const auto q = random_query(rng);
    try {
      if (parse(print(q)) != q) ++bad_roundtrips;
    } catch (...) {
      ++bad_roundtrips;
    }
  }
  return {other_errors == 0 && bad_roundtrips == 0,
          std::to_string(other_errors) + " non-syntax failures, " + std::to_string(bad_roundtrips) +
              " round-trip failures, " + std::to_string(accepted) + " fuzz inputs parsed"};
}

// ----------------------------------------------------------------- pipeline

Check pipeline_determinism() {
  const auto set = task1_set(17, 100);
  TemplateCommandOracle commands(pipeline_vocabulary(set.graph, "natural language processing"));
  FunctionOracle garbage([](const std::string&) { return std::string("MATCH (n) RETURN n"); });
  RuleFollowingAnswerer answers;
  std::vector<Verdict> gold, with_template, with_garbage;
  std::size_t fallbacks = 0;
  for (const auto& item : set.items) {
    gold.push_back(*item.binary_answer);
    with_template.push_back(run_task(item, set.graph, commands, answers).answer == "Yes" ? Verdict::Yes : Verdict::No);
    const auto r = run_task(item, set.graph, garbage, answers);
    with_garbage.push_back(r.answer == "Yes" ? Verdict::Yes : Verdict::No);
    fallbacks += r.trace.fallback_used ? 1 : 0;
  }
  const double a = binary_report(with_template, gold).accuracy;
  const double b = binary_report(with_garbage, gold).accuracy;
  return {a == 1.0 && b == 1.0 && fallbacks == set.items.size(),
          "template acc " + fmt(a) + ", garbage acc " + fmt(b) + ", fallback " + std::to_string(fallbacks) + "/" +
              std::to_string(set.items.size())};
}

Check confusion_reproduction() {
  const auto dir = scratch_dir() / "confusion";
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "llama_nlp.jsonl");
    for (int i = 0; i < 310; ++i) {
      const bool yes = (i * 7919) % 310 < 258;  // shuffled, 258 YES / 52 NO
      out << json{{"a", "a" + std::to_string(i)}, {"b", "b" + std::to_string(i)}, {"variant", "zs"},
                  {"verdict", yes ? "YES" : "NO"}, {"raw", yes ? "Yes." : "No."}}
                 .dump()
          << "\n";
    }
  }
  const auto fixtures = load_fixtures(dir / "llama_nlp.jsonl");
  const auto direct = confusion_counts(std::span<const FixtureRecord>(fixtures));
  std::string out;
  const auto path = (dir / "llama_nlp.jsonl").string();
  const int rc = run_cli({"--output-dir", (dir / "out").string(), "eval", "--predictions", path, "--gold", path}, &out);
  if (rc != 0) return {false, "cgraph eval exited " + std::to_string(rc) + ": " + out};
  const auto report = json::parse(std::ifstream(dir / "out" / "report.json"));
  const std::size_t yes = report["judgment_counts"]["yes"], no = report["judgment_counts"]["no"];
  return {direct.yes == 258 && direct.no == 52 && yes == 258 && no == 52,
          "POS " + std::to_string(yes) + ", NEG " + std::to_string(no)};
}

struct Criterion {
  int number;
  const char* name;
  double budget_seconds;
  std::function<Check()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "perfect-oracle recovery identity", 10, perfect_recovery},
      {2, "noisy-oracle calibration", 10, noisy_recovery},
      {3, "metric replay fidelity", 1, metric_replay},
      {4, "S-F1 ground cases", 1, similarity_ground_cases},
      {5, "GCN gradient check", 5, gradient_check},
      {6, "GCN learnability", 30, learnability},
      {7, "graph-algorithm oracle equivalence", 30, graph_oracle_equivalence},
      {8, "parser totality and round-trip", 30, parser_totality},
      {9, "pipeline determinism", 10, pipeline_determinism},
      {10, "confusion-count reproduction", 1, confusion_reproduction},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Check result;
    try {
      result = c.run();
    } catch (const std::exception& e) {
      result = {false, std::string("threw: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = seconds < c.budget_seconds;
    const bool pass = result.pass && in_time;
    failures += pass ? 0 : 1;
    std::cout << (pass ? "PASS" : "FAIL") << "  " << std::setw(2) << c.number << "  " << c.name << ": "
              << result.detail << " [" << fmt(seconds, 3) << " s of " << c.budget_seconds << " s"
              << (in_time ? "" : ", over budget") << "]\n";
  }
  fs::remove_all(scratch_dir());
  std::cout << (failures ? "FAIL" : "PASS") << "  " << criteria.size() - static_cast<std::size_t>(failures) << "/"
            << criteria.size() << " criteria\n";
  return failures ? 1 : 0;
}
