#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cgraph/eval.hpp"
#include "cgraph/graph.hpp"
#include "cgraph/llm.hpp"
#include "cgraph/query.hpp"
#include "cgraph/recovery.hpp"

namespace cgraph {

struct TutorQaItem {
  int task = 1;
  std::string question;
  std::optional<Verdict> binary_answer;   // Task 1
  std::vector<std::string> list_answer;   // Tasks 2-4
  std::string text_answer;                // Task 5, may be empty
  std::vector<std::string> concepts;      // optional explicit query concepts
};

/// JSON Lines `{"task": n, "question": text, "answer": ..., "concepts": [...]}`.
/// Task 1 answers are "Yes"/"No"; Tasks 2-4 accept an array or a
/// ';'-joined string; Task 5 takes free text or nothing. Throws Format.
std::vector<TutorQaItem> read_tutorqa(std::istream& in);
std::vector<TutorQaItem> load_tutorqa(const std::filesystem::path& path);
std::string tutorqa_line(const TutorQaItem& item);

/// Splits an answer on ';' and newlines, trimming and dropping blanks.
std::vector<std::string> split_concept_list(std::string_view answer);

struct PipelineOptions {
  std::string domain = "natural language processing";
  std::size_t prereq_depth = 3;    // Task 2 fallback
  std::size_t advise_hops = 2;     // Task 4 fallback expansion radius
  std::size_t proposal_hops = 1;   // Task 5 neighbourhood radius
};

/// Graph names eligible for concept extraction; the domain name itself is
/// excluded because every templated question mentions it.
std::vector<std::string> pipeline_vocabulary(const ConceptGraph& graph, std::string_view domain);

/// Longest-match vocabulary mentions in question order, deduplicated.
std::vector<std::string> extract_concepts(std::string_view question, const std::vector<std::string>& vocabulary);

/// The deterministic command for a task, rendered with the canonical
/// printer. nullopt when too few concepts were extracted.
std::optional<std::string> template_command(int task, const std::vector<std::string>& concepts,
                                            const PipelineOptions& options = {});

std::string command_prompt(std::string_view question, int task);

/// Sends the command prompt and returns the reply verbatim.
std::string generate_command(std::string_view question, int task, TextOracle& oracle);

/// Answers command prompts with template_command over the extracted
/// concepts; anything else gets an empty reply.
class TemplateCommandOracle final : public TextOracle {
 public:
  explicit TemplateCommandOracle(std::vector<std::string> vocabulary, PipelineOptions options = {})
      : vocabulary_(std::move(vocabulary)), options_(std::move(options)) {}
  std::string complete(const std::string& prompt) override;

 private:
  std::vector<std::string> vocabulary_;
  PipelineOptions options_;
};

/// One line per path, names joined by ';'; "EMPTY" when there are none.
/// Paths shared by several outcomes appear once.
std::string render_paths(const std::vector<QueryOutcome>& outcomes, const ConceptGraph& graph);

std::string grounding_prompt(std::string_view question, int task, std::string_view rendered_paths);

struct OracleExchange {
  std::string prompt;
  std::string response;
};

struct PipelineTrace {
  int task = 1;
  std::string question;
  std::string generated_command;
  std::vector<GraphQuery> parsed_queries;
  std::vector<QueryOutcome> outcomes;
  bool fallback_used = false;
  std::string fallback_command;
  std::string first_error;   // why the generated command was rejected
  std::string grounding_prompt;
  std::string final_answer;
  std::vector<OracleExchange> exchanges;  // every oracle call, in order
};

/// One JSON object; paths and resolved ids are rendered as names.
std::string trace_line(const PipelineTrace& trace, const ConceptGraph& graph);

/// Prompt/response map sufficient to re-run the traced item.
std::map<std::string, std::string> replay_map(const std::vector<PipelineTrace>& traces);

/// Builds the grounding prompt, asks `oracle`, and post-processes. Task 1
/// answers become exactly "Yes" or "No" (one retry, then UnparseableVerdict);
/// other tasks return the reply verbatim. Calls are appended to `trace`.
std::string ground_and_answer(std::string_view question, int task, const std::vector<QueryOutcome>& outcomes,
                              const ConceptGraph& graph, TextOracle& oracle, PipelineTrace* trace = nullptr);

/// Mock answer model that obeys the grounding prompt: Yes iff a path was
/// returned for Task 1, otherwise the distinct path concepts joined by ';'.
/// Proposal prompts get a title and description naming the listed concepts.
class RuleFollowingAnswerer final : public TextOracle {
 public:
  std::string complete(const std::string& prompt) override;
};

struct PipelineResult {
  std::string answer;
  PipelineTrace trace;
};

/// Tasks 1-4: generate, parse, execute, ground. A command that fails to parse
/// or names an unknown concept is replaced once by the template command.
/// Throws FallbackExhausted when that also fails.
PipelineResult run_task(const TutorQaItem& item, const ConceptGraph& graph, TextOracle& command_oracle,
                        TextOracle& answer_oracle, const PipelineOptions& options = {});

std::string proposal_prompt(std::string_view question, const std::vector<std::string>& concepts,
                            std::string_view rendered_neighbourhood);

/// Task 5: query concepts plus their neighbourhoods go straight to the
/// answer oracle; no command stage.
PipelineResult run_task_5(const TutorQaItem& item, const ConceptGraph& graph, TextOracle& answer_oracle,
                          const PipelineOptions& options = {});

}  // namespace cgraph
