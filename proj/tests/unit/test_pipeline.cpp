#include <gtest/gtest.h>

#include <sstream>

#include "cgraph/error.hpp"
#include "cgraph/mock_oracle.hpp"
#include "cgraph/pipeline.hpp"
#include "json.hpp"
#include "synthetic.hpp"

using namespace cgraph;

namespace {

const std::string kTask3Question =
    "In the domain of natural language processing, I know about word distributions, now I want to learn about "
    "sentence simplification, what concept path should I follow?";

ConceptGraph nlp_graph() {
  ConceptGraph g;
  const std::vector<std::string> names{"word distributions",      "vector representations", "structured learning",
                                       "sentence representations", "sentence simplification", "natural language processing",
                                       "parsing"};
  for (std::size_t i = 0; i < names.size(); ++i) g.add_concept({ConceptId(static_cast<std::int64_t>(i + 1)), names[i], ""});
  for (int i = 1; i < 5; ++i) g.add_edge(ConceptId(i), ConceptId(i + 1));
  g.add_edge(ConceptId(6), ConceptId(7));
  return g;
}

TutorQaItem item(int task, std::string question) {
  TutorQaItem it;
  it.task = task;
  it.question = std::move(question);
  return it;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::Io;
}

}  // namespace

TEST(Extraction, FindsQueryConceptsButNotTheDomain) {
  const auto g = nlp_graph();
  const auto vocab = pipeline_vocabulary(g, "natural language processing");
  EXPECT_EQ(vocab.size(), 6u);
  EXPECT_EQ(extract_concepts(kTask3Question, vocab),
            (std::vector<std::string>{"word distributions", "sentence simplification"}));
  EXPECT_EQ(extract_concepts("Parsing, then parsing again", vocab), (std::vector<std::string>{"parsing"}));
  EXPECT_TRUE(extract_concepts("anything", {}).empty());
}

TEST(Templates, OneCommandShapePerTask) {
  const std::vector<std::string> two{"a", "b"};
  EXPECT_EQ(template_command(1, two), R"(REACHABLE "a" -> "b")");
  EXPECT_EQ(template_command(2, two), R"(PREREQ "b" DEPTH 3)");
  EXPECT_EQ(template_command(3, two), R"(SHORTEST "a" -> "b")");
  EXPECT_EQ(template_command(4, two), "NEIGHBORS \"a\" IN HOPS 2\nNEIGHBORS \"b\" IN HOPS 2");
  EXPECT_FALSE(template_command(1, {"a"}));
  EXPECT_FALSE(template_command(3, {"a"}));
  EXPECT_FALSE(template_command(2, {}));
  EXPECT_FALSE(template_command(5, two));
  PipelineOptions options;
  options.prereq_depth = 7;
  EXPECT_EQ(template_command(2, {"a"}, options), R"(PREREQ "a" DEPTH 7)");
}

TEST(Templates, CommandPromptCarriesQuestionAndOracleAnswersIt) {
  const auto prompt = command_prompt(kTask3Question, 3);
  EXPECT_NE(prompt.find("Task 3:"), std::string::npos);
  EXPECT_NE(prompt.find("\n" + kTask3Question + "\nReturn the path."), std::string::npos);
  EXPECT_THROW(command_prompt("q", 5), Error);

  const auto g = nlp_graph();
  TemplateCommandOracle oracle(pipeline_vocabulary(g, "natural language processing"));
  EXPECT_EQ(generate_command(kTask3Question, 3, oracle), R"(SHORTEST "word distributions" -> "sentence simplification")");
  EXPECT_EQ(oracle.complete("unrelated prompt"), "");
}

TEST(Grounding, RendersPaths) {
  const auto g = nlp_graph();
  const auto o = execute(ShortestPath{"vector representations", "sentence representations"}, g);
  EXPECT_EQ(render_paths({o, o}, g), "vector representations;structured learning;sentence representations");
  EXPECT_EQ(render_paths({execute(ShortestPath{"parsing", "word distributions"}, g)}, g), "EMPTY");
  EXPECT_EQ(render_paths({}, g), "EMPTY");
  const auto two = execute(Prerequisites{"structured learning", 2}, g);
  // Paths keep graph-core order: lexicographic by concept id.
  EXPECT_EQ(render_paths({two}, g), "word distributions;vector representations;structured learning\n"
                                    "vector representations;structured learning");
}

TEST(Grounding, YesNoPromptIsVerbatim) {
  EXPECT_EQ(grounding_prompt("Q?", 1, "a;b"),
            "There is a concept graph that includes the relations between concepts.\n"
            "Based on the question, the path between concepts has been returned.\n"
            "If the path is empty, then there is no relationship.\n"
            "Only use the returned path as the information for answering.\n"
            "Only return \"Yes\" or \"No\".\n"
            "***Question**:\n"
            "Q?\n"
            "***Path**:\n"
            "a;b");
  const auto list = grounding_prompt("Q?", 2, "EMPTY");
  EXPECT_NE(list.find("Only return the relevant concepts, separated by \";\".\n"), std::string::npos);
  EXPECT_EQ(list.find("Only return \"Yes\""), std::string::npos);
}

TEST(Grounding, RetriesOnceThenFails) {
  const auto g = nlp_graph();
  int calls = 0;
  FunctionOracle flaky([&](const std::string&) { return calls++ == 0 ? std::string("perhaps") : std::string("YES."); });
  PipelineTrace trace;
  EXPECT_EQ(ground_and_answer("q", 1, {}, g, flaky, &trace), "Yes");
  ASSERT_EQ(trace.exchanges.size(), 2u);
  EXPECT_EQ(trace.exchanges[1].prompt, trace.grounding_prompt + "\nAnswer YES or NO only.");

  FunctionOracle vague([](const std::string&) { return std::string("it depends"); });
  EXPECT_EQ(code_of([&] { ground_and_answer("q", 1, {}, g, vague); }), ErrorCode::UnparseableVerdict);
  EXPECT_EQ(ground_and_answer("q", 2, {}, g, vague), "it depends");
}

TEST(Answerer, FollowsTheRules) {
  RuleFollowingAnswerer answerer;
  EXPECT_EQ(answerer.complete(grounding_prompt("q", 1, "EMPTY")), "No");
  EXPECT_EQ(answerer.complete(grounding_prompt("q", 1, "a;b")), "Yes");
  EXPECT_EQ(answerer.complete(grounding_prompt("q", 4, "a;b\nc;b\nEMPTY")), "a;b;c");
  EXPECT_EQ(answerer.complete("no structure"), "");
}

TEST(RunTask, ShortestPathQuestion) {
  const auto g = nlp_graph();
  TemplateCommandOracle commands(pipeline_vocabulary(g, "natural language processing"));
  RuleFollowingAnswerer answers;
  const auto r = run_task(item(3, kTask3Question), g, commands, answers);
  EXPECT_FALSE(r.trace.fallback_used);
  EXPECT_EQ(split_concept_list(r.answer),
            (std::vector<std::string>{"word distributions", "vector representations", "structured learning",
                                      "sentence representations", "sentence simplification"}));
  EXPECT_EQ(r.trace.exchanges.size(), 2u);
  EXPECT_EQ(r.trace.final_answer, r.answer);
}

TEST(RunTask, InvalidCommandFallsBackToTemplate) {
  const auto g = nlp_graph();
  RuleFollowingAnswerer answers;
  const auto q = "In the domain of natural language processing, I already learned about word distributions, based on "
                 "this, would it be helpful for me to learn about sentence representations?";
  for (const std::string bad : {"MATCH (n) RETURN n", R"(REACHABLE "foo" -> "bar")", ""}) {
    FunctionOracle garbage([&](const std::string&) { return bad; });
    const auto r = run_task(item(1, q), g, garbage, answers);
    EXPECT_TRUE(r.trace.fallback_used) << bad;
    EXPECT_FALSE(r.trace.first_error.empty());
    EXPECT_EQ(r.trace.fallback_command, R"(REACHABLE "word distributions" -> "sentence representations")");
    EXPECT_EQ(r.answer, "Yes");
  }
}

TEST(RunTask, FallbackExhaustedAndFatalErrors) {
  const auto g = nlp_graph();
  RuleFollowingAnswerer answers;
  FunctionOracle garbage([](const std::string&) { return std::string("???"); });
  EXPECT_EQ(code_of([&] { run_task(item(1, "Is cooking before baking?"), g, garbage, answers); }),
            ErrorCode::FallbackExhausted);
  FunctionOracle down([](const std::string&) -> std::string { throw Error(ErrorCode::Transport, "offline"); });
  EXPECT_EQ(code_of([&] { run_task(item(1, kTask3Question), g, down, answers); }), ErrorCode::Transport);
}

TEST(RunTask, ReplayReproducesAnswers) {
  const auto set = cgraph::testing::task1_set(3, 20);
  TemplateCommandOracle commands(pipeline_vocabulary(set.graph, "natural language processing"));
  RuleFollowingAnswerer answers;
  std::vector<PipelineTrace> traces;
  std::vector<std::string> first;
  for (const auto& it : set.items) {
    auto r = run_task(it, set.graph, commands, answers);
    first.push_back(r.answer);
    traces.push_back(std::move(r.trace));
  }
  ReplayOracle replay(replay_map(traces));
  for (std::size_t i = 0; i < set.items.size(); ++i) {
    EXPECT_EQ(run_task(set.items[i], set.graph, replay, replay).answer, first[i]);
  }
}

TEST(RunTask, Task1AccuracyWithRuleOracles) {
  const auto set = cgraph::testing::task1_set(11, 100);
  TemplateCommandOracle commands(pipeline_vocabulary(set.graph, "natural language processing"));
  FunctionOracle garbage([](const std::string&) { return std::string("SELECT *"); });
  RuleFollowingAnswerer answers;
  std::size_t yes = 0;
  for (const auto& it : set.items) {
    const auto gold = *it.binary_answer == Verdict::Yes ? "Yes" : "No";
    yes += *it.binary_answer == Verdict::Yes;
    EXPECT_EQ(run_task(it, set.graph, commands, answers).answer, gold) << it.question;
    const auto fb = run_task(it, set.graph, garbage, answers);
    EXPECT_EQ(fb.answer, gold);
    EXPECT_TRUE(fb.trace.fallback_used);
  }
  EXPECT_EQ(yes, 50u);
}

TEST(RunTask, ProposalUsesNeighbourhoods) {
  const auto g = nlp_graph();
  RuleFollowingAnswerer answers;
  const auto r = run_task(item(5, "In the domain of natural language processing, I want to build a project with "
                                  "sentence representations and parsing."),
                          g, answers, answers);
  EXPECT_EQ(r.answer,
            "Title: A project combining sentence representations, parsing\n"
            "Description: The project applies sentence representations, parsing. It also draws on sentence "
            "simplification, structured learning, natural language processing.");
  EXPECT_NE(r.trace.grounding_prompt.find("sentence representations: sentence simplification;structured learning\n"
                                          "parsing: natural language processing\n"),
            std::string::npos);
  EXPECT_FALSE(r.trace.fallback_used);
  EXPECT_EQ(r.trace.parsed_queries.size(), 4u);

  auto explicit_item = item(5, "Propose something.");
  explicit_item.concepts = {"parsing", "unknown thing"};
  const auto e = run_task_5(explicit_item, g, answers);
  EXPECT_NE(e.answer.find("combining parsing\n"), std::string::npos);
  EXPECT_NE(e.trace.first_error.find("unknown thing"), std::string::npos);
}

TEST(TutorQa, ReadsAndWritesLines) {
  std::istringstream in(R"({"task": 1, "question": "q1", "answer": "yes"})" "\n\n"
                        R"({"task": 2, "question": "q2", "answer": "a; b\nc"})" "\n"
                        R"({"task": 4, "question": "q4", "answer": ["x", " "]})" "\n"
                        R"({"task": 5, "question": "q5", "concepts": ["p"]})" "\n");
  const auto items = read_tutorqa(in);
  ASSERT_EQ(items.size(), 4u);
  EXPECT_EQ(items[0].binary_answer, Verdict::Yes);
  EXPECT_EQ(items[1].list_answer, (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(items[2].list_answer, (std::vector<std::string>{"x"}));
  EXPECT_EQ(items[3].concepts, (std::vector<std::string>{"p"}));
  for (const auto& it : items) {
    std::istringstream again(tutorqa_line(it));
    const auto back = read_tutorqa(again).at(0);
    EXPECT_EQ(back.question, it.question);
    EXPECT_EQ(back.binary_answer, it.binary_answer);
    EXPECT_EQ(back.list_answer, it.list_answer);
    EXPECT_EQ(back.concepts, it.concepts);
  }
  for (const auto* bad : {R"({"task": 6, "question": "q"})", R"({"task": 1, "question": "q", "answer": "maybe"})",
                          R"({"task": 2, "question": "q"})", R"({"task": 1, "question": " ", "answer": "No"})", "{"}) {
    std::istringstream b(bad);
    EXPECT_EQ(code_of([&] { read_tutorqa(b); }), ErrorCode::Format) << bad;
  }
}

TEST(Trace, LineHasNamedPaths) {
  const auto g = nlp_graph();
  TemplateCommandOracle commands(pipeline_vocabulary(g, "natural language processing"));
  RuleFollowingAnswerer answers;
  const auto r = run_task(item(3, kTask3Question), g, commands, answers);
  const auto j = nlohmann::json::parse(trace_line(r.trace, g));
  EXPECT_EQ(j["task"], 3);
  EXPECT_EQ(j["parsed_queries"][0], R"(SHORTEST "word distributions" -> "sentence simplification")");
  EXPECT_EQ(j["outcomes"][0]["paths"][0][1], "vector representations");
  EXPECT_EQ(j["fallback_used"], false);
  EXPECT_EQ(j["exchanges"].size(), 2u);
  EXPECT_EQ(replay_map({r.trace}).size(), 2u);
}
