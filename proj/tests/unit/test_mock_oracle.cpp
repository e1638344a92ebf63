#include <gtest/gtest.h>

#include <cmath>

#include "cgraph/mock_oracle.hpp"

using namespace cgraph;

namespace {

ConceptGraph many_concepts(std::size_t n) {
  ConceptGraph g;
  for (std::size_t i = 1; i <= n; ++i) g.add_concept({ConceptId(static_cast<std::int64_t>(i)), "k" + std::to_string(i), ""});
  return g;
}

std::string zs(std::string_view a, std::string_view b) {
  return render_prompt(PromptVariant::zero_shot(), "natural language processing", a, b);
}

}  // namespace

TEST(GraphBackedOracle, FlipRateWithinThreeSigma) {
  // 101 * 100 = 10100 ordered pairs.
  const auto g = many_concepts(101);
  const double p = 0.1;
  GraphBackedOracle oracle(g, p, 7);
  std::size_t flips = 0, n = 0;
  for (const auto a : g.ids()) {
    for (const auto b : g.ids()) {
      if (a == b) continue;
      ++n;
      flips += oracle.answer(g.name(a), g.name(b)) == Verdict::Yes ? 1 : 0;
    }
  }
  const double sigma = std::sqrt(p * (1 - p) / static_cast<double>(n));
  EXPECT_NEAR(static_cast<double>(flips) / static_cast<double>(n), p, 3 * sigma);
}

TEST(GraphBackedOracle, AnswersAreDeterministicPerSeed) {
  const auto g = many_concepts(20);
  GraphBackedOracle a(g, 0.3, 1), b(g, 0.3, 1), c(g, 0.3, 2);
  std::size_t differ = 0;
  for (int i = 1; i <= 20; ++i) {
    for (int j = 1; j <= 20; ++j) {
      if (i == j) continue;
      const auto x = "k" + std::to_string(i), y = "k" + std::to_string(j);
      EXPECT_EQ(a.complete(zs(x, y)), b.complete(zs(x, y)));
      EXPECT_EQ(a.complete(zs(x, y)), a.complete(zs(x, y)));
      differ += a.flips(x, y) != c.flips(x, y) ? 1 : 0;
    }
  }
  EXPECT_GT(differ, 0u);
}

TEST(GraphBackedOracle, CotRepliesUseResultTags) {
  auto g = many_concepts(2);
  g.add_edge(ConceptId(1), ConceptId(2));
  GraphBackedOracle oracle(g, 0.0, 0);
  const auto reply = oracle.complete(render_prompt(PromptVariant::cot(), "nlp", "k1", "k2"));
  EXPECT_NE(reply.find("<result>YES</result>"), std::string::npos);
  EXPECT_EQ(oracle.complete(zs("k2", "k1")), "NO");
}

TEST(GraphBackedOracle, RejectsBadInputs) {
  EXPECT_THROW(GraphBackedOracle(many_concepts(2), 1.0, 0), Error);
  EXPECT_THROW(GraphBackedOracle(many_concepts(2), -0.1, 0), Error);
  GraphBackedOracle oracle(many_concepts(2), 0.0, 0);
  EXPECT_THROW(oracle.complete("free text"), Error);
  EXPECT_THROW(oracle.complete(zs("k1", "unknown")), Error);
}

TEST(ScriptedOracle, ReplaysTheViterbiExample) {
  ScriptedOracle oracle({{"Viterbi Algorithm", "POS Tagging", "zs", Verdict::Yes, ""},
                         {"POS Tagging", "Viterbi Algorithm", "cot", Verdict::No, "<result>NO</result>"}});
  EXPECT_EQ(oracle.complete(zs("Viterbi Algorithm", "POS Tagging")), "YES");
  EXPECT_EQ(oracle.complete(zs("viterbi algorithm", "pos tagging")), "YES");
  // Falls back to the record for the pair under another variant.
  EXPECT_EQ(oracle.complete(zs("POS Tagging", "Viterbi Algorithm")), "<result>NO</result>");
  try {
    oracle.complete(zs("POS Tagging", "Parsing"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::FixtureMiss);
  }
}

TEST(EchoOracle, ReturnsLastLine) {
  EchoOracle oracle;
  EXPECT_EQ(oracle.complete("a\nb\nYES\n\n"), "YES");
  EXPECT_EQ(oracle.complete("single"), "single");
}

TEST(ReplayOracle, ExactPromptsOnly) {
  ReplayOracle oracle(std::map<std::string, std::string>{{"p", "r"}});
  EXPECT_EQ(oracle.complete("p"), "r");
  EXPECT_THROW(oracle.complete("p "), Error);
}

TEST(MockSpec, BuildsEachKind) {
  auto g = many_concepts(2);
  g.add_edge(ConceptId(1), ConceptId(2));
  EXPECT_EQ(mock_judge(GraphBackedSpec{g, 0.0, 3}, zs("k1", "k2")), "YES");
  EXPECT_EQ(mock_judge(ScriptedSpec{{{"k1", "k2", "zs", Verdict::No, ""}}}, zs("k1", "k2")), "NO");
  EXPECT_EQ(mock_judge(EchoSpec{}, "x\nNO"), "NO");
  EXPECT_THROW(make_mock_oracle(GraphBackedSpec{g, 2.0, 0}), Error);
}
