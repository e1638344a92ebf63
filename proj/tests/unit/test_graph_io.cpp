#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "cgraph/error.hpp"
#include "cgraph/graph_io.hpp"

using namespace cgraph;

TEST(GraphIo, ReadsConceptsAndLabeledPairs) {
  std::istringstream concepts("1\tViterbi Algorithm\r\n2\tPOS Tagging\n\n3\tHidden Markov Model\n");
  const auto cs = read_concepts(concepts, "nlp");
  ASSERT_EQ(cs.size(), 3u);
  EXPECT_EQ(cs[0].name, "Viterbi Algorithm");
  EXPECT_EQ(cs[1].id, ConceptId(2));
  EXPECT_EQ(cs[2].domain, "nlp");

  std::istringstream pairs("1\t2\n3\t1\t0\n3\t2\t1\n");
  const auto ps = read_labeled_pairs(pairs);
  ASSERT_EQ(ps.size(), 3u);
  EXPECT_TRUE(ps[0].label);
  EXPECT_FALSE(ps[1].label);

  ConceptGraph g(cs);
  add_positive_edges(g, ps);
  EXPECT_EQ(g.edge_count(), 2u);
  EXPECT_FALSE(g.has_edge(ConceptId(3), ConceptId(1)));
}

TEST(GraphIo, RejectsMalformedRows) {
  std::istringstream no_tab("1 Viterbi\n");
  EXPECT_THROW(read_concepts(no_tab), Error);
  std::istringstream bad_id("x\tname\n");
  EXPECT_THROW(read_concepts(bad_id), Error);
  std::istringstream bad_label("1\t2\tmaybe\n");
  EXPECT_THROW(read_labeled_pairs(bad_label), Error);
  std::istringstream too_many("1\t2\t1\t9\n");
  EXPECT_THROW(read_labeled_pairs(too_many), Error);
}

TEST(GraphIo, WritesWhatItReads) {
  std::istringstream concepts("2\tb\n1\ta\n");
  ConceptGraph g(read_concepts(concepts));
  g.add_edge(ConceptId(2), ConceptId(1));
  std::ostringstream c_out, e_out;
  write_concepts(c_out, g);
  write_edges(e_out, g);
  EXPECT_EQ(c_out.str(), "1\ta\n2\tb\n");
  EXPECT_EQ(e_out.str(), "2\t1\n");
}

TEST(GraphIo, AtomicWriteAndMissingFile) {
  const auto dir = std::filesystem::temp_directory_path() / "cgraph_io_test";
  std::filesystem::create_directories(dir);
  write_file_atomic(dir / "x.txt", "hello\n");
  EXPECT_EQ(read_file(dir / "x.txt"), "hello\n");
  write_file_atomic(dir / "x.txt", "bye\n");
  EXPECT_EQ(read_file(dir / "x.txt"), "bye\n");
  try {
    load_concepts(dir / "missing.tsv");
    FAIL() << "expected an Io error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Io);
    EXPECT_NE(std::string(e.what()).find("missing.tsv"), std::string::npos);
  }
  std::filesystem::remove_all(dir);
}
