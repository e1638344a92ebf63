// cgraph: batch front end for recovery, training, evaluation and QA runs.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cgraph/corpus.hpp"
#include "cgraph/digest.hpp"
#include "cgraph/error.hpp"
#include "cgraph/eval.hpp"
#include "cgraph/graph.hpp"
#include "cgraph/graph_io.hpp"
#include "cgraph/linkpred.hpp"
#include "cgraph/llm.hpp"
#include "cgraph/mock_oracle.hpp"
#include "cgraph/pipeline.hpp"
#include "cgraph/recovery.hpp"
#include "cgraph/text.hpp"
#include "json.hpp"

#ifndef CGRAPH_VERSION
#define CGRAPH_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace cgraph;

namespace {

enum ExitCode : int { kOk = 0, kConfigError = 1, kDataError = 2, kOracleError = 3 };

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::MissingContext:
      return kConfigError;
    case ErrorCode::UnparseableVerdict:
    case ErrorCode::EmbedderFailure:
    case ErrorCode::FallbackExhausted:
    case ErrorCode::Transport:
    case ErrorCode::RateLimited:
    case ErrorCode::AuthFailure:
    case ErrorCode::UnrecognizedPrompt:
    case ErrorCode::FixtureMiss:
      return kOracleError;
    default:
      return kDataError;
  }
}

std::string utc_timestamp() {
  std::time_t now = std::time(nullptr);
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) now = static_cast<std::time_t>(std::atoll(epoch));
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Inputs, outputs and settings of one invocation; serialised as manifest.json.
struct Run {
  std::string subcommand;
  std::string output_dir = ".";
  std::uint64_t seed = 0;
  std::vector<std::string> argv;
  json config = json::object();
  std::map<std::string, std::string> inputs;
  std::vector<std::string> outputs;

  fs::path input(const std::string& path) {
    if (!fs::is_regular_file(path)) throw Error(ErrorCode::Io, "input file not found: " + path);
    inputs[path] = file_sha256(path);
    return path;
  }

  void output(const std::string& name, const std::string& contents) {
    fs::create_directories(output_dir);
    const auto path = fs::path(output_dir) / name;
    write_file_atomic(path, contents);
    outputs.push_back(path.string());
  }

  void write_manifest(int exit_code, const std::string& error) const {
    json m = {
        {"tool", "cgraph"},
        {"version", CGRAPH_VERSION},
        {"subcommand", subcommand},
        {"argv", argv},
        {"config", config},
        {"inputs", inputs},
        {"seed", seed},
        {"timestamp", utc_timestamp()},
        {"outputs", outputs},
        {"exit_code", exit_code},
    };
    if (!error.empty()) m["error"] = error;
    fs::create_directories(output_dir);
    write_file_atomic(fs::path(output_dir) / "manifest.json", m.dump(2) + "\n");
  }
};

struct HttpFlags {
  std::string endpoint;
  std::string model;
  double temperature = 0.0;
  int timeout_ms = 60'000;
  int max_retries = 3;
  std::size_t max_in_flight = 8;

  OracleConfig config() const {
    OracleConfig c;
    c.endpoint = endpoint;
    c.model = model;
    c.temperature = temperature;
    c.timeout = std::chrono::milliseconds(timeout_ms);
    c.max_retries = max_retries;
    c.max_in_flight = max_in_flight;
    c.with_environment_key();
    c.validate();
    return c;
  }
};

void add_http_flags(CLI::App* sub, HttpFlags& f, const std::string& prefix = "") {
  sub->add_option("--" + prefix + "endpoint", f.endpoint, "Chat-completions URL for http oracles");
  sub->add_option("--" + prefix + "model", f.model, "Model name for http oracles");
  sub->add_option("--" + prefix + "temperature", f.temperature, "Sampling temperature")->capture_default_str();
  sub->add_option("--" + prefix + "timeout-ms", f.timeout_ms, "Per-request timeout")->capture_default_str();
  sub->add_option("--" + prefix + "max-retries", f.max_retries, "Retries on transient failures")
      ->capture_default_str();
  sub->add_option("--" + prefix + "max-in-flight", f.max_in_flight, "Concurrent request cap")
      ->capture_default_str();
}

std::pair<std::string, std::string> split_spec(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) return {spec, ""};
  return {spec.substr(0, colon), spec.substr(colon + 1)};
}

ConceptGraph load_concept_graph(Run& run, const std::string& concepts, const std::string& domain) {
  return ConceptGraph(load_concepts(run.input(concepts), domain));
}

std::map<std::string, std::string> load_replay(Run& run, const std::string& path) {
  std::ifstream in(run.input(path), std::ios::binary);
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      for (const auto& e : json::parse(line).at("exchanges")) {
        out[e.at("prompt").get<std::string>()] = e.at("response").get<std::string>();
      }
    } catch (const json::exception& e) {
      throw Error(ErrorCode::Format, path + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::unique_ptr<Embedder> make_embedder(Run& run, const std::string& spec, const HttpFlags& http) {
  const auto [kind, arg] = split_spec(spec);
  auto dim = [&](std::size_t fallback) -> std::size_t {
    if (arg.empty()) return fallback;
    try {
      return std::stoul(arg);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, "bad embedder dimension in '" + spec + "'");
    }
  };
  if (kind == "exact") return std::make_unique<ExactMatchEmbedder>();
  if (kind == "token-hash") return std::make_unique<TokenHashEmbedder>(dim(512));
  if (kind == "seeded") return std::make_unique<SeededHashEmbedder>(run.seed, dim(64));
  if (kind == "table") return std::make_unique<TableEmbedder>(TableEmbedder::load(run.input(arg)));
  if (kind == "http") return std::make_unique<HttpEmbedder>(http.config());
  throw Error(ErrorCode::InvalidArgument, "unknown embedder '" + spec + "'");
}

/// Effective value of every long option on the app and the chosen subcommand.
json option_snapshot(const CLI::App& app) {
  json out = json::object();
  auto collect = [](const CLI::App& a, json& into) {
    for (const auto* opt : a.get_options()) {
      const auto& names = opt->get_lnames();
      if (names.empty() || names.front() == "help" || names.front() == "version" || names.front() == "config") continue;
      if (opt->count() > 0) {
        const auto values = opt->reduced_results();
        std::string joined;
        for (const auto& v : values) joined += (joined.empty() ? "" : ",") + v;
        into[names.front()] = joined;
      } else {
        into[names.front()] = opt->get_default_str();
      }
    }
  };
  collect(app, out);
  for (const auto* sub : app.get_subcommands()) collect(*sub, out[sub->get_name()]);
  return out;
}

// ---------------------------------------------------------------- recover

struct RecoverFlags {
  std::string concepts;
  std::string oracle = "echo";
  double flip_probability = 0.0;
  std::string variant = "zs";
  std::size_t rag_k = 3;
  std::size_t con_hops = 1;
  std::string pairs = "all";
  std::string labels;
  std::size_t sample_size = 0;
  std::string domain = "natural language processing";
  std::string corpus;
  std::string index;
  std::string intro;
  std::string train_edges;
  std::size_t min_words = kDefaultMinWords;
  HttpFlags http;
};

std::unique_ptr<TextOracle> make_recovery_oracle(Run& run, const RecoverFlags& f, const ConceptGraph& concepts) {
  const auto [kind, arg] = split_spec(f.oracle);
  if (kind == "mock-graph") {
    if (arg.empty()) throw Error(ErrorCode::InvalidArgument, "mock-graph needs a hidden edge file");
    ConceptGraph hidden = concepts;
    add_positive_edges(hidden, load_labeled_pairs(run.input(arg)));
    return std::make_unique<GraphBackedOracle>(std::move(hidden), f.flip_probability, run.seed);
  }
  if (kind == "fixtures") return std::make_unique<ScriptedOracle>(load_fixtures(run.input(arg)));
  if (kind == "echo") return std::make_unique<EchoOracle>();
  if (kind == "http") return std::make_unique<HttpChatClient>(f.http.config());
  throw Error(ErrorCode::InvalidArgument, "unknown oracle '" + f.oracle + "'");
}

int cmd_recover(Run& run, const RecoverFlags& f) {
  const auto concepts = load_concept_graph(run, f.concepts, f.domain);

  auto variant = make_variant(parse_variant_code(f.variant));
  if (variant.rag_k) variant.rag_k = f.rag_k;
  if (variant.con_hops) variant.con_hops = f.con_hops;

  std::optional<RetrievalIndex> index;
  if (!f.index.empty()) {
    index = RetrievalIndex::load(run.input(f.index));
  } else if (!f.corpus.empty()) {
    std::ifstream in(run.input(f.corpus), std::ios::binary);
    index.emplace(ingest(in, f.min_words, f.corpus));
  }
  std::map<std::string, std::string> intro;
  if (!f.intro.empty()) intro = load_intro_paragraphs(run.input(f.intro));
  std::optional<ConceptGraph> training;
  if (!f.train_edges.empty()) {
    training = concepts;
    add_positive_edges(*training, load_labeled_pairs(run.input(f.train_edges)));
  }
  std::vector<LabeledPair> labels;
  if (!f.labels.empty()) labels = load_labeled_pairs(run.input(f.labels));

  SamplingPlan plan;
  plan.seed = run.seed;
  if (f.pairs == "all") {
    plan.mode = SamplingMode::AllOrderedPairs;
  } else if (f.pairs == "balanced") {
    if (f.labels.empty()) throw Error(ErrorCode::InvalidArgument, "--pairs balanced needs --labels");
    plan.mode = SamplingMode::BalancedSample;
    plan.sample_size = f.sample_size;
  } else {
    throw Error(ErrorCode::InvalidArgument, "--pairs must be 'all' or 'balanced'");
  }

  RecoveryOptions options;
  options.domain = f.domain;
  options.context.corpus = index ? &*index : nullptr;
  options.context.training_graph = training ? &*training : nullptr;
  options.context.intro_paragraphs = intro.empty() ? nullptr : &intro;
  options.labels = labels.empty() ? nullptr : &labels;
  options.max_in_flight = f.http.max_in_flight;

  auto oracle = make_recovery_oracle(run, f, concepts);
  const auto result = recover_graph(concepts, *oracle, variant, plan, options);

  std::ostringstream edges;
  write_edges(edges, result.graph);
  std::string judgments;
  for (const auto& j : result.judgments) judgments += judgment_line(j, concepts) + "\n";
  run.output("edges.tsv", edges.str());
  run.output("judgments.jsonl", judgments);

  const auto counts = confusion_counts(std::span<const EdgeJudgment>(result.judgments));
  std::cout << "judged " << result.judgments.size() << " pairs: " << counts.yes << " YES, " << counts.no
            << " NO; " << result.graph.edge_count() << " edges recovered\n";
  return kOk;
}

// ------------------------------------------------------------------ train

struct TrainFlags {
  std::string concepts;
  std::string embeddings;
  std::string train;
  std::string test;
  std::string model = "gcn";
  bool no_self_loops = false;
  TrainConfig config;
};

std::string predictions_tsv(const std::vector<PairPrediction>& preds) {
  std::ostringstream out;
  out.precision(6);
  out << std::fixed;
  for (const auto& p : preds) {
    out << p.source.value() << '\t' << p.target.value() << '\t' << p.probability << '\t' << (p.label ? 1 : 0) << '\n';
  }
  return out.str();
}

int cmd_train(Run& run, TrainFlags f) {
  f.config.seed = run.seed;
  f.config.add_self_loops = !f.no_self_loops;
  f.config.validate();
  const auto graph = load_concept_graph(run, f.concepts, "");
  const auto embeddings = load_embeddings(run.input(f.embeddings), graph);
  const auto train = load_labeled_pairs(run.input(f.train));
  const auto test = f.test.empty() ? train : load_labeled_pairs(run.input(f.test));

  std::vector<Edge> test_pairs;
  std::vector<Verdict> gold;
  for (const auto& p : test) {
    test_pairs.emplace_back(p.source, p.target);
    gold.push_back(p.label ? Verdict::Yes : Verdict::No);
  }

  std::vector<PairPrediction> preds;
  if (f.model == "gcn") {
    const auto result = train_gcn(embeddings, train, f.config);
    run.output("checkpoint.json", result.predictor.to_json());
    std::ostringstream loss;
    loss.precision(10);
    for (std::size_t i = 0; i < result.loss_history.size(); ++i) loss << i << '\t' << result.loss_history[i] << '\n';
    run.output("loss.tsv", loss.str());
    preds = predict_gcn(result.predictor, embeddings, test_pairs, f.config.edge_threshold);
  } else if (f.model == "concat") {
    preds = classify_concat(embeddings, train, test_pairs, f.config);
  } else {
    throw Error(ErrorCode::InvalidArgument, "--model must be 'gcn' or 'concat'");
  }

  std::vector<Verdict> predicted;
  for (const auto& p : preds) predicted.push_back(p.label ? Verdict::Yes : Verdict::No);
  const auto report = binary_report(predicted, gold);
  const ReportMetadata meta{f.model, std::nullopt, f.test.empty() ? f.train : f.test};
  run.output("predictions.tsv", predictions_tsv(preds));
  run.output("report.json", report_json(report, meta));
  std::cout << report_table(report, meta);
  return kOk;
}

// ------------------------------------------------------------------- eval

struct EvalFlags {
  std::string predictions;
  std::string gold;
  std::string list_predictions;
  std::string list_gold;
  std::string embedder = "token-hash";
  std::vector<double> mu{kDefaultSimilarityThreshold};
  bool one_to_one = false;
  HttpFlags http;
};

struct VerdictColumn {
  std::vector<Verdict> verdicts;
  std::optional<ConfusionCounts> counts;
  std::string variant;
};

bool is_jsonl(const std::string& path) {
  const auto ext = fs::path(path).extension().string();
  return ext == ".jsonl" || ext == ".json";
}

VerdictColumn load_verdicts(Run& run, const std::string& path) {
  VerdictColumn col;
  if (is_jsonl(path)) {
    const auto fixtures = load_fixtures(run.input(path));
    std::set<std::string> variants;
    for (const auto& r : fixtures) {
      col.verdicts.push_back(r.verdict);
      variants.insert(r.variant);
    }
    col.counts = confusion_counts(std::span<const FixtureRecord>(fixtures));
    if (variants.size() == 1) col.variant = *variants.begin();
  } else {
    for (const auto& p : load_labeled_pairs(run.input(path))) col.verdicts.push_back(p.label ? Verdict::Yes : Verdict::No);
  }
  return col;
}

std::vector<std::vector<std::string>> load_answer_lists(Run& run, const std::string& path) {
  std::ifstream in(run.input(path), std::ios::binary);
  std::vector<std::vector<std::string>> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      auto v = json::parse(line);
      if (v.is_object()) v = v.value("answer", json());
      std::vector<std::string> items;
      if (v.is_array()) {
        for (const auto& x : v) items.push_back(x.get<std::string>());
      } else if (v.is_string()) {
        items = split_concept_list(v.get<std::string>());
      } else if (!v.is_null()) {
        throw Error(ErrorCode::Format, "answer must be a list or text");
      }
      out.push_back(std::move(items));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::Format, path + " line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(ErrorCode::Format, path + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

struct MeanScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t items = 0;
  std::size_t empty_predictions = 0;
};

/// Item-averaged S-F1. An empty prediction scores zero rather than aborting
/// the batch; an empty gold list is a data error.
MeanScores mean_similarity(const std::vector<std::vector<std::string>>& predicted,
                           const std::vector<std::vector<std::string>>& gold, const SimilarityMatcher& matcher) {
  if (predicted.size() != gold.size()) {
    throw Error(ErrorCode::LengthMismatch, std::to_string(predicted.size()) + " predictions vs " +
                                               std::to_string(gold.size()) + " gold lists");
  }
  if (gold.empty()) throw Error(ErrorCode::EmptyInput, "no items to evaluate");
  MeanScores m;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i].empty()) throw Error(ErrorCode::EmptyList, "gold list " + std::to_string(i + 1) + " is empty");
    ++m.items;
    if (predicted[i].empty()) {
      ++m.empty_predictions;
      continue;
    }
    const auto s = similarity_f1(predicted[i], gold[i], matcher);
    m.precision += s.precision;
    m.recall += s.recall;
    m.f1 += s.f1;
  }
  const auto n = static_cast<double>(m.items);
  m.precision /= n;
  m.recall /= n;
  m.f1 /= n;
  return m;
}

json mean_json(const MeanScores& m, double mu) {
  return {{"mu", mu},          {"precision", m.precision}, {"recall", m.recall},
          {"f1", m.f1},        {"items", m.items},         {"empty_predictions", m.empty_predictions}};
}

int cmd_eval(Run& run, const EvalFlags& f) {
  const bool binary = !f.predictions.empty() || !f.gold.empty();
  const bool lists = !f.list_predictions.empty() || !f.list_gold.empty();
  if (binary == lists) {
    throw Error(ErrorCode::InvalidArgument,
                "give either --predictions/--gold or --list-predictions/--list-gold");
  }
  if (binary) {
    if (f.predictions.empty() || f.gold.empty()) {
      throw Error(ErrorCode::InvalidArgument, "--predictions and --gold go together");
    }
    const auto pred = load_verdicts(run, f.predictions);
    const auto gold = load_verdicts(run, f.gold);
    const auto report = binary_report(pred.verdicts, gold.verdicts);
    const ReportMetadata meta{pred.variant, std::nullopt, f.gold};
    run.output("report.json", report_json(report, meta, pred.counts));
    run.output("report.txt", report_table(report, meta));
    std::cout << report_table(report, meta);
    if (pred.counts) std::cout << "judgments: " << pred.counts->yes << " YES, " << pred.counts->no << " NO\n";
    return kOk;
  }
  if (f.list_predictions.empty() || f.list_gold.empty()) {
    throw Error(ErrorCode::InvalidArgument, "--list-predictions and --list-gold go together");
  }
  const auto predicted = load_answer_lists(run, f.list_predictions);
  const auto gold = load_answer_lists(run, f.list_gold);
  const auto embedder = make_embedder(run, f.embedder, f.http);
  json per_mu = json::array();
  std::ostringstream table;
  table << "mu      precision  recall   s_f1\n";
  for (const double mu : f.mu) {
    const auto m = mean_similarity(predicted, gold, SimilarityMatcher{embedder.get(), mu, f.one_to_one});
    per_mu.push_back(mean_json(m, mu));
    char row[96];
    std::snprintf(row, sizeof row, "%-7.4f %-10.4f %-8.4f %.4f\n", mu, m.precision, m.recall, m.f1);
    table << row;
  }
  const json report = {{"embedder", f.embedder}, {"one_to_one", f.one_to_one}, {"results", per_mu}};
  run.output("report.json", report.dump(2) + "\n");
  run.output("report.txt", table.str());
  std::cout << table.str();
  return kOk;
}

// --------------------------------------------------------------------- qa

struct QaFlags {
  std::string concepts;
  std::string edges;
  std::string tutorqa;
  std::string command_oracle = "template";
  std::string answer_oracle = "rule";
  std::string replay;
  bool trace = false;
  std::string embedder = "token-hash";
  double mu = kDefaultSimilarityThreshold;
  PipelineOptions options;
  HttpFlags command_http;
  HttpFlags answer_http;
  HttpFlags embed_http;
};

std::unique_ptr<TextOracle> make_qa_oracle(Run& run, const std::string& spec, const HttpFlags& http,
                                           const ConceptGraph& graph, const PipelineOptions& options,
                                           const std::map<std::string, std::string>& replay) {
  const auto [kind, arg] = split_spec(spec);
  if (!replay.empty()) return std::make_unique<ReplayOracle>(replay);
  if (kind == "template") {
    return std::make_unique<TemplateCommandOracle>(pipeline_vocabulary(graph, options.domain), options);
  }
  if (kind == "garbage") {
    return std::make_unique<FunctionOracle>([](const std::string&) { return std::string("MATCH (n) RETURN n"); });
  }
  if (kind == "rule") return std::make_unique<RuleFollowingAnswerer>();
  if (kind == "echo") return std::make_unique<EchoOracle>();
  if (kind == "replay") return std::make_unique<ReplayOracle>(load_replay(run, arg));
  if (kind == "http") return std::make_unique<HttpChatClient>(http.config());
  throw Error(ErrorCode::InvalidArgument, "unknown oracle '" + spec + "'");
}

bool recoverable_item_failure(ErrorCode code) {
  return code == ErrorCode::FallbackExhausted || code == ErrorCode::UnparseableVerdict;
}

int cmd_qa(Run& run, const QaFlags& f) {
  const auto graph = load_graph(run.input(f.concepts), run.input(f.edges));
  const auto items = load_tutorqa(run.input(f.tutorqa));
  std::map<std::string, std::string> replay;
  if (!f.replay.empty()) replay = load_replay(run, f.replay);
  auto command_oracle = make_qa_oracle(run, f.command_oracle, f.command_http, graph, f.options, replay);
  auto answer_oracle = make_qa_oracle(run, f.answer_oracle, f.answer_http, graph, f.options, replay);

  std::string answers;
  std::string traces;
  std::map<int, std::vector<Verdict>> binary_pred, binary_gold;
  std::map<int, std::vector<std::vector<std::string>>> list_pred, list_gold;
  json mentions = json::array();
  std::size_t failures = 0;
  const auto vocabulary = graph.names();

  for (const auto& item : items) {
    json line = {{"task", item.task}, {"question", item.question}};
    std::optional<PipelineResult> result;
    try {
      result = item.task == 5 ? run_task_5(item, graph, *answer_oracle, f.options)
                              : run_task(item, graph, *command_oracle, *answer_oracle, f.options);
    } catch (const Error& e) {
      if (!recoverable_item_failure(e.code())) throw;
      ++failures;
      line["answer"] = nullptr;
      line["error"] = std::string(to_string(e.code())) + ": " + e.what();
    }
    if (result) {
      line["answer"] = result->answer;
      if (f.trace) traces += trace_line(result->trace, graph) + "\n";
    }
    answers += line.dump() + "\n";
    const auto answer = result ? result->answer : std::string();

    if (item.task == 1) {
      binary_pred[1].push_back(answer == "Yes" ? Verdict::Yes : Verdict::No);
      binary_gold[1].push_back(item.binary_answer.value_or(Verdict::No));
    } else if (item.task <= 4) {
      list_pred[item.task].push_back(split_concept_list(answer));
      list_gold[item.task].push_back(item.list_answer);
    } else {
      const auto stats = concept_mentions(answer, vocabulary);
      mentions.push_back({{"question", item.question},
                          {"unique_count", stats.unique_count},
                          {"total_count", stats.total_count},
                          {"per_concept", stats.per_concept}});
    }
  }

  run.output("answers.jsonl", answers);
  if (f.trace) run.output("traces.jsonl", traces);

  json tasks = json::object();
  if (!binary_pred.empty()) {
    const auto report = binary_report(binary_pred[1], binary_gold[1]);
    tasks["1"] = json::parse(report_json(report, ReportMetadata{"cgllm", std::nullopt, f.tutorqa}));
    std::cout << "task 1 accuracy " << report.accuracy << " f1 " << report.f1 << "\n";
  }
  if (!list_pred.empty()) {
    const auto embedder = make_embedder(run, f.embedder, f.embed_http);
    for (const auto& [task, preds] : list_pred) {
      const auto m = mean_similarity(preds, list_gold[task], SimilarityMatcher{embedder.get(), f.mu, false});
      tasks[std::to_string(task)] = mean_json(m, f.mu);
      std::cout << "task " << task << " s_f1 " << m.f1 << "\n";
    }
  }
  if (!tasks.empty()) {
    run.output("report.json", json{{"tasks", tasks}, {"failures", failures}}.dump(2) + "\n");
  }
  if (!mentions.empty()) run.output("mentions.json", mentions.dump(2) + "\n");
  if (failures) std::cout << failures << " item(s) failed; see answers.jsonl\n";
  return kOk;
}

// --------------------------------------------------------------- fixtures

struct FixturesFlags {
  std::string judgments;
  bool drop_flagged = false;
};

int cmd_fixtures(Run& run, const FixturesFlags& f) {
  std::ifstream in(run.input(f.judgments), std::ios::binary);
  std::string out;
  std::string line;
  std::size_t line_no = 0, kept = 0, dropped = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    bool flagged = false;
    try {
      flagged = json::parse(line).value("flagged", false);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::Format, f.judgments + " line " + std::to_string(line_no) + ": " + e.what());
    }
    if (flagged && f.drop_flagged) {
      ++dropped;
      continue;
    }
    std::istringstream one(line);
    for (const auto& r : read_fixtures(one)) out += fixture_line(r) + "\n";
    ++kept;
  }
  run.output("fixtures.jsonl", out);
  std::cout << kept << " fixtures written, " << dropped << " flagged judgments dropped\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  Run run;
  run.argv.assign(argv, argv + argc);

  CLI::App app{"Concept-graph recovery, link prediction, evaluation and graph-grounded QA"};
  app.set_version_flag("--version", json{{"name", "cgraph"}, {"version", CGRAPH_VERSION}}.dump());
  app.set_config("--config", "", "Read options from a TOML/INI file; subcommand options go under [subcommand]");
  app.add_option("--seed", run.seed, "Seed for every random choice")->capture_default_str();
  app.add_option("--output-dir", run.output_dir, "Directory for outputs and manifest.json")->capture_default_str();
  app.require_subcommand(1);
  app.fallthrough();

  RecoverFlags rf;
  auto* recover = app.add_subcommand("recover", "Judge concept pairs with an oracle and write the recovered graph");
  recover->add_option("--concepts", rf.concepts, "Concept TSV (id<TAB>name)")->required();
  recover->add_option("--oracle", rf.oracle, "mock-graph:EDGES | fixtures:FILE | echo | http")->capture_default_str();
  recover->add_option("--flip-probability", rf.flip_probability, "Verdict flip rate for mock-graph")
      ->capture_default_str();
  recover->add_option("--variant", rf.variant, "zs | cot | zs-doc | zs-con | zs-wiki | zs-rag")->capture_default_str();
  recover->add_option("--rag-k", rf.rag_k, "Passages retrieved for zs-rag")->capture_default_str();
  recover->add_option("--con-hops", rf.con_hops, "Neighbourhood radius for zs-con")->capture_default_str();
  recover->add_option("--pairs", rf.pairs, "all | balanced")->capture_default_str();
  recover->add_option("--labels", rf.labels, "Labelled pairs for balanced sampling");
  recover->add_option("--sample-size", rf.sample_size, "Pairs per class for balanced sampling");
  recover->add_option("--domain", rf.domain, "Domain named in the prompt")->capture_default_str();
  recover->add_option("--corpus", rf.corpus, "Text corpus, one passage per line (zs-doc, zs-rag)");
  recover->add_option("--index", rf.index, "Saved retrieval index (zs-doc, zs-rag)");
  recover->add_option("--intro", rf.intro, "Introductory paragraphs JSONL (zs-wiki)");
  recover->add_option("--train-edges", rf.train_edges, "Known edges for zs-con");
  recover->add_option("--min-words", rf.min_words, "Shortest corpus passage kept")->capture_default_str();
  add_http_flags(recover, rf.http);

  TrainFlags tf;
  auto* train = app.add_subcommand("train", "Train a link predictor and score held-out pairs");
  train->add_option("--concepts", tf.concepts, "Concept TSV")->required();
  train->add_option("--embeddings", tf.embeddings, "Concept embeddings JSONL")->required();
  train->add_option("--train", tf.train, "Labelled training pairs")->required();
  train->add_option("--test", tf.test, "Labelled evaluation pairs (default: training pairs)");
  train->add_option("--model", tf.model, "gcn | concat")->capture_default_str();
  train->add_option("--lr", tf.config.learning_rate, "Learning rate")->capture_default_str();
  train->add_option("--epochs", tf.config.epochs, "Training epochs")->capture_default_str();
  train->add_option("--momentum", tf.config.momentum, "Gradient momentum")->capture_default_str();
  train->add_option("--negative-ratio", tf.config.negative_ratio, "Negatives per positive")->capture_default_str();
  train->add_option("--threshold", tf.config.edge_threshold, "Edge decision threshold")->capture_default_str();
  train->add_option("--init-scale", tf.config.init_scale, "Uniform init half-width")->capture_default_str();
  train->add_option("--projection-dim", tf.config.projection_dim, "Projection width")->capture_default_str();
  train->add_option("--layer-dims", tf.config.layer_dims, "GCN layer widths")->delimiter(',')->capture_default_str();
  train->add_flag("--no-self-loops", tf.no_self_loops, "Skip A + I before normalisation");

  EvalFlags ef;
  auto* eval = app.add_subcommand("eval", "Score predictions against gold labels");
  eval->add_option("--predictions", ef.predictions, "Fixture JSONL or labelled-pair TSV");
  eval->add_option("--gold", ef.gold, "Gold fixture JSONL or labelled-pair TSV, line-aligned");
  eval->add_option("--list-predictions", ef.list_predictions, "JSONL answers with concept lists");
  eval->add_option("--list-gold", ef.list_gold, "JSONL gold concept lists, line-aligned");
  eval->add_option("--embedder", ef.embedder, "exact | token-hash[:DIM] | seeded[:DIM] | table:FILE | http")
      ->capture_default_str();
  eval->add_option("--mu", ef.mu, "Similarity threshold(s) for S-F1")->delimiter(',')->capture_default_str();
  eval->add_flag("--one-to-one", ef.one_to_one, "Count a one-to-one assignment for S-F1");
  add_http_flags(eval, ef.http, "embed-");

  QaFlags qf;
  auto* qa = app.add_subcommand("qa", "Answer TutorQA items through the query-then-generate pipeline");
  qa->add_option("--concepts", qf.concepts, "Concept TSV")->required();
  qa->add_option("--edges", qf.edges, "Edge TSV")->required();
  qa->add_option("--tutorqa", qf.tutorqa, "TutorQA JSONL")->required();
  qa->add_option("--command-oracle", qf.command_oracle, "template | garbage | replay:TRACES | http")
      ->capture_default_str();
  qa->add_option("--answer-oracle", qf.answer_oracle, "rule | echo | replay:TRACES | http")->capture_default_str();
  qa->add_option("--replay", qf.replay, "Trace JSONL; replays both oracles from it");
  qa->add_flag("--trace", qf.trace, "Write traces.jsonl");
  qa->add_option("--embedder", qf.embedder, "Embedder for Tasks 2-4 S-F1")->capture_default_str();
  qa->add_option("--mu", qf.mu, "Similarity threshold for S-F1")->capture_default_str();
  qa->add_option("--domain", qf.options.domain, "Domain name excluded from concept extraction")->capture_default_str();
  qa->add_option("--prereq-depth", qf.options.prereq_depth, "Task 2 fallback depth")->capture_default_str();
  qa->add_option("--advise-hops", qf.options.advise_hops, "Task 4 fallback radius")->capture_default_str();
  qa->add_option("--proposal-hops", qf.options.proposal_hops, "Task 5 neighbourhood radius")->capture_default_str();
  add_http_flags(qa, qf.command_http, "command-");
  add_http_flags(qa, qf.answer_http, "answer-");
  add_http_flags(qa, qf.embed_http, "embed-");

  FixturesFlags ff;
  auto* fixtures = app.add_subcommand("fixtures", "Convert recovery judgments into replay fixtures");
  fixtures->add_option("--judgments", ff.judgments, "judgments.jsonl from recover")->required();
  fixtures->add_flag("--drop-flagged", ff.drop_flagged, "Skip judgments whose verdict was defaulted");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  run.subcommand = app.get_subcommands().front()->get_name();
  run.config = option_snapshot(app);

  int rc = kOk;
  std::string error;
  try {
    if (*recover) rc = cmd_recover(run, rf);
    else if (*train) rc = cmd_train(run, tf);
    else if (*eval) rc = cmd_eval(run, ef);
    else if (*qa) rc = cmd_qa(run, qf);
    else if (*fixtures) rc = cmd_fixtures(run, ff);
  } catch (const Error& e) {
    rc = exit_code_for(e.code());
    error = std::string(to_string(e.code())) + ": " + e.what();
  } catch (const std::exception& e) {
    rc = kDataError;
    error = e.what();
  }
  if (!error.empty()) std::cerr << "cgraph " << run.subcommand << ": " << error << "\n";

  try {
    run.write_manifest(rc, error);
  } catch (const std::exception& e) {
    std::cerr << "cgraph: cannot write manifest: " << e.what() << "\n";
    if (rc == kOk) rc = kDataError;
  }
  return rc;
}
