#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "cgraph/graph_io.hpp"
#include "cgraph/pipeline.hpp"
#include "json.hpp"
#include "synthetic.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace cgraph;

namespace {

std::string quote(const std::string& s) {
  std::string out = "'";
  for (const char c : s) out += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return out + "'";
}

struct Outcome {
  int code = -1;
  std::string out;
};

Outcome run_cli(const std::vector<std::string>& args, const std::string& env = "SOURCE_DATE_EPOCH=1700000000") {
  std::string cmd = env + " " + quote(CGRAPH_CLI_PATH);
  for (const auto& a : args) cmd += " " + quote(a);
  cmd += " 2>&1";
  Outcome r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  while (const auto n = std::fread(buf, 1, sizeof buf, pipe)) r.out.append(buf, n);
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("cgraph_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()) + "_" +
            std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  // Concepts 1..6 with a hidden chain 1->2->3 and 4->5.
  void write_small_graph() {
    spit(path("concepts.tsv"), "1\tparsing\n2\tpos tagging\n3\tviterbi algorithm\n4\tlanguage model\n5\tsmoothing\n"
                               "6\tword sense disambiguation\n");
    spit(path("hidden.tsv"), "1\t2\n2\t3\n4\t5\n");
  }

  json manifest(const std::string& out_dir) const { return json::parse(slurp(fs::path(out_dir) / "manifest.json")); }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, VersionHelpAndUsageErrors) {
  const auto v = run_cli({"--version"});
  EXPECT_EQ(v.code, 0);
  EXPECT_NE(v.out.find("\"name\":\"cgraph\""), std::string::npos);
  const auto h = run_cli({"--help"});
  EXPECT_EQ(h.code, 0);
  for (const auto* sub : {"recover", "train", "eval", "qa", "fixtures"}) EXPECT_NE(h.out.find(sub), std::string::npos);
  EXPECT_EQ(run_cli({}).code, 1);
  EXPECT_EQ(run_cli({"frobnicate"}).code, 1);
  EXPECT_EQ(run_cli({"recover"}).code, 1);
  EXPECT_EQ(run_cli({"--seed", "x", "eval"}).code, 1);
}

TEST_F(Cli, ExitCodesByFailureKind) {
  write_small_graph();
  const auto out = path("out");
  // Config error: invalid option value.
  auto r = run_cli({"--output-dir", out, "recover", "--concepts", path("concepts.tsv"), "--pairs", "sometimes"});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(manifest(out)["exit_code"], 1);
  // Data error: missing input, named in the message.
  r = run_cli({"--output-dir", out, "recover", "--concepts", path("nope.tsv")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("nope.tsv"), std::string::npos);
  EXPECT_NE(manifest(out)["error"].get<std::string>().find("nope.tsv"), std::string::npos);
  // Data error: malformed concept file.
  spit(path("bad.tsv"), "1 parsing\n");
  EXPECT_EQ(run_cli({"--output-dir", out, "recover", "--concepts", path("bad.tsv")}).code, 2);
  // Oracle failure: fixture replay misses a prompt.
  spit(path("fixtures.jsonl"), R"({"a":"parsing","b":"pos tagging","variant":"zs","verdict":"YES","raw":"YES"})" "\n");
  r = run_cli({"--output-dir", out, "recover", "--concepts", path("concepts.tsv"), "--oracle",
               "fixtures:" + path("fixtures.jsonl")});
  EXPECT_EQ(r.code, 3);
  EXPECT_EQ(manifest(out)["exit_code"], 3);
}

TEST_F(Cli, RecoverIsExactAndByteIdenticalOnRerun) {
  write_small_graph();
  const std::vector<std::string> tail{"recover", "--concepts", path("concepts.tsv"), "--oracle",
                                      "mock-graph:" + path("hidden.tsv")};
  auto args_for = [&](const std::string& out) {
    std::vector<std::string> a{"--seed", "9", "--output-dir", out};
    a.insert(a.end(), tail.begin(), tail.end());
    return a;
  };
  ASSERT_EQ(run_cli(args_for(path("a"))).code, 0);
  const auto edges = load_labeled_pairs(path("a/edges.tsv"));
  std::set<std::pair<std::int64_t, std::int64_t>> got;
  for (const auto& e : edges) got.insert({e.source.value(), e.target.value()});
  EXPECT_EQ(got, (std::set<std::pair<std::int64_t, std::int64_t>>{{1, 2}, {2, 3}, {4, 5}}));

  const auto first = slurp(path("a/judgments.jsonl"));
  const auto first_manifest = slurp(path("a/manifest.json"));
  ASSERT_EQ(run_cli(args_for(path("a"))).code, 0);
  EXPECT_EQ(slurp(path("a/judgments.jsonl")), first);
  EXPECT_EQ(slurp(path("a/manifest.json")), first_manifest);

  const auto m = json::parse(first_manifest);
  EXPECT_EQ(m["tool"], "cgraph");
  EXPECT_EQ(m["subcommand"], "recover");
  EXPECT_EQ(m["seed"], 9);
  EXPECT_EQ(m["timestamp"], "2023-11-14T22:13:20Z");
  EXPECT_EQ(m["exit_code"], 0);
  EXPECT_EQ(m["inputs"][path("concepts.tsv")].get<std::string>().size(), 64u);
  EXPECT_EQ(m["config"]["recover"]["variant"], "zs");
  EXPECT_EQ(m["outputs"].size(), 2u);
}

TEST_F(Cli, ManifestArgvReplaysTheRun) {
  write_small_graph();
  ASSERT_EQ(run_cli({"--seed", "4", "--output-dir", path("r"), "recover", "--concepts", path("concepts.tsv"),
                     "--oracle", "mock-graph:" + path("hidden.tsv"), "--flip-probability", "0.3"})
                .code,
            0);
  const auto judgments = slurp(path("r/judgments.jsonl"));
  auto argv = manifest(path("r"))["argv"].get<std::vector<std::string>>();
  ASSERT_FALSE(argv.empty());
  argv.erase(argv.begin());
  fs::remove(path("r/judgments.jsonl"));
  ASSERT_EQ(run_cli(argv).code, 0);
  EXPECT_EQ(slurp(path("r/judgments.jsonl")), judgments);
}

TEST_F(Cli, FixturesThenEvalCountsVerdicts) {
  write_small_graph();
  ASSERT_EQ(run_cli({"--output-dir", path("r"), "recover", "--concepts", path("concepts.tsv"), "--oracle",
                     "mock-graph:" + path("hidden.tsv")})
                .code,
            0);
  const auto f = run_cli({"--output-dir", path("f"), "fixtures", "--judgments", path("r/judgments.jsonl")});
  ASSERT_EQ(f.code, 0);
  EXPECT_NE(f.out.find("30 fixtures written"), std::string::npos);
  const auto e = run_cli({"--output-dir", path("e"), "eval", "--predictions", path("f/fixtures.jsonl"), "--gold",
                          path("f/fixtures.jsonl")});
  ASSERT_EQ(e.code, 0);
  EXPECT_NE(e.out.find("judgments: 3 YES, 27 NO"), std::string::npos);
  const auto report = json::parse(slurp(path("e/report.json")));
  EXPECT_EQ(report["accuracy"], 1.0);
  EXPECT_EQ(report["judgment_counts"]["yes"], 3);

  // Replaying the fixtures reproduces the recovered graph.
  ASSERT_EQ(run_cli({"--output-dir", path("p"), "recover", "--concepts", path("concepts.tsv"), "--oracle",
                     "fixtures:" + path("f/fixtures.jsonl")})
                .code,
            0);
  EXPECT_EQ(slurp(path("p/edges.tsv")), slurp(path("r/edges.tsv")));
}

TEST_F(Cli, EvalListsSweepsThresholds) {
  spit(path("pred.jsonl"), R"({"answer": "neural machine translation; parsing"})" "\n" R"(["graph coloring"])" "\n");
  spit(path("gold.jsonl"), R"(["machine translation", "parsing"])" "\n" R"({"answer": ["viterbi algorithm"]})" "\n");
  const auto r = run_cli({"--output-dir", path("e"), "eval", "--list-predictions", path("pred.jsonl"), "--list-gold",
                          path("gold.jsonl"), "--mu", "0.2,0.6,0.95"});
  ASSERT_EQ(r.code, 0) << r.out;
  const auto results = json::parse(slurp(path("e/report.json")))["results"];
  ASSERT_EQ(results.size(), 3u);
  EXPECT_GE(results[0]["f1"].get<double>(), results[1]["f1"].get<double>());
  EXPECT_GE(results[1]["f1"].get<double>(), results[2]["f1"].get<double>());
  EXPECT_EQ(results[2]["mu"], 0.95);
  EXPECT_NE(slurp(path("e/report.txt")).find("0.9500"), std::string::npos);
  EXPECT_EQ(run_cli({"--output-dir", path("e"), "eval", "--list-predictions", path("pred.jsonl")}).code, 1);
}

TEST_F(Cli, QaTracesReplayAndMentions) {
  const auto set = cgraph::testing::task1_set(2, 10);
  {
    std::ofstream c(path("concepts.tsv")), e(path("edges.tsv"));
    write_concepts(c, set.graph);
    write_edges(e, set.graph);
  }
  std::string items;
  for (const auto& it : set.items) items += tutorqa_line(it) + "\n";
  items += R"({"task": 5, "question": "I want a project on topic 1 and topic 2."})" "\n";
  spit(path("qa.jsonl"), items);
  const std::vector<std::string> base{"qa", "--concepts", path("concepts.tsv"), "--edges", path("edges.tsv"),
                                      "--tutorqa", path("qa.jsonl")};
  auto with = [&](std::vector<std::string> head, std::vector<std::string> extra = {}) {
    head.insert(head.end(), base.begin(), base.end());
    head.insert(head.end(), extra.begin(), extra.end());
    return head;
  };

  auto r = run_cli(with({"--output-dir", path("plain")}));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("task 1 accuracy 1 "), std::string::npos);
  EXPECT_FALSE(fs::exists(path("plain/traces.jsonl")));
  const auto mentions = json::parse(slurp(path("plain/mentions.json")));
  ASSERT_EQ(mentions.size(), 1u);
  EXPECT_GE(mentions[0]["unique_count"].get<int>(), 2);

  ASSERT_EQ(run_cli(with({"--output-dir", path("traced")}, {"--trace"})).code, 0);
  EXPECT_EQ(slurp(path("traced/answers.jsonl")), slurp(path("plain/answers.jsonl")));
  ASSERT_TRUE(fs::exists(path("traced/traces.jsonl")));

  ASSERT_EQ(run_cli(with({"--output-dir", path("replayed")}, {"--replay", path("traced/traces.jsonl")})).code, 0);
  EXPECT_EQ(slurp(path("replayed/answers.jsonl")), slurp(path("plain/answers.jsonl")));

  r = run_cli(with({"--output-dir", path("garbage")}, {"--command-oracle", "garbage", "--trace"}));
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("task 1 accuracy 1 "), std::string::npos);
  std::istringstream traces(slurp(path("garbage/traces.jsonl")));
  std::string line;
  std::size_t fallbacks = 0;
  while (std::getline(traces, line)) {
    const auto t = json::parse(line);
    if (t["task"] == 1) fallbacks += t["fallback_used"].get<bool>();
  }
  EXPECT_EQ(fallbacks, set.items.size());
}

TEST_F(Cli, TrainSeparableFromFiles) {
  const auto inst = cgraph::testing::separable_instance(1);
  std::string concepts, embeddings, pairs;
  for (const auto& c : inst.concepts.concepts()) {
    concepts += std::to_string(c.id.value()) + "\t" + c.name + "\n";
    const auto& v = inst.embeddings.at(c.id);
    json row = {{"concept", c.name}, {"vector", std::vector<double>(v.data(), v.data() + v.size())}};
    embeddings += row.dump() + "\n";
  }
  for (const auto& p : inst.pairs) {
    pairs += std::to_string(p.source.value()) + "\t" + std::to_string(p.target.value()) + "\t" + (p.label ? "1" : "0") + "\n";
  }
  spit(path("concepts.tsv"), concepts);
  spit(path("emb.jsonl"), embeddings);
  spit(path("pairs.tsv"), pairs);
  const auto r = run_cli({"--seed", "1", "--output-dir", path("t"), "train", "--concepts", path("concepts.tsv"),
                          "--embeddings", path("emb.jsonl"), "--train", path("pairs.tsv"), "--lr", "0.2",
                          "--init-scale", "0.4", "--projection-dim", "32", "--layer-dims", "16", "--momentum", "0"});
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_GE(json::parse(slurp(path("t/report.json")))["f1"].get<double>(), 0.95);
  EXPECT_TRUE(fs::exists(path("t/checkpoint.json")));
  EXPECT_EQ(run_cli({"--output-dir", path("t"), "train", "--concepts", path("concepts.tsv"), "--embeddings",
                     path("emb.jsonl"), "--train", path("pairs.tsv"), "--epochs", "0"})
                .code,
            1);
}

TEST_F(Cli, ConfigFileSuppliesOptions) {
  write_small_graph();
  spit(path("run.toml"), "seed = 5\noutput-dir = \"" + path("c") + "\"\n[recover]\nconcepts = \"" +
                             path("concepts.tsv") + "\"\noracle = \"mock-graph:" + path("hidden.tsv") + "\"\n");
  const auto r = run_cli({"--config", path("run.toml"), "recover"});
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(manifest(path("c"))["seed"], 5);
  EXPECT_TRUE(fs::exists(path("c/edges.tsv")));
}
