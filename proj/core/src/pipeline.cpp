#include "cgraph/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "cgraph/error.hpp"
#include "cgraph/text.hpp"
#include "json.hpp"

namespace cgraph {

using json = nlohmann::json;

namespace {

constexpr std::string_view kYesNoRule = "Only return \"Yes\" or \"No\".";
constexpr std::string_view kListRule = "Only return the relevant concepts, separated by \";\".";
constexpr std::string_view kPathHeader = "***Path**:\n";
constexpr std::string_view kQuestionHeader = "\nQuestion:\n";
constexpr std::string_view kReturnPath = "\nReturn the path.";
constexpr std::string_view kQueryConcepts = "Query concepts: ";
constexpr std::string_view kNeighbourhoodHeader = "Related concepts from the concept graph:\n";
constexpr std::string_view kProposalRule = "Give a project title and a project description.";

std::string_view task_line(int task) {
  switch (task) {
    case 1: return "Task 1: decide whether a learning path leads from the known concept to the new concept.";
    case 2: return "Task 2: find the prerequisite paths that lead to the concept to learn.";
    case 3: return "Task 3: find the shortest learning path from the known concept to the target concept.";
    case 4: return "Task 4: find the concepts a project needs, with their prerequisites.";
    default: break;
  }
  throw Error(ErrorCode::InvalidArgument, "command stage covers tasks 1-4, got " + std::to_string(task));
}

std::string ask(TextOracle& oracle, const std::string& prompt, PipelineTrace* trace) {
  auto response = oracle.complete(prompt);
  if (trace) trace->exchanges.push_back({prompt, response});
  return response;
}

Verdict binary_from_json(const json& v) {
  if (v.is_boolean()) return v.get<bool>() ? Verdict::Yes : Verdict::No;
  if (!v.is_string()) throw Error(ErrorCode::Format, "Task 1 answer must be \"Yes\" or \"No\"");
  auto text = normalize_name(v.get<std::string>());
  if (text == "yes") return Verdict::Yes;
  if (text == "no") return Verdict::No;
  throw Error(ErrorCode::Format, "Task 1 answer must be \"Yes\" or \"No\", got '" + v.get<std::string>() + "'");
}

std::vector<std::string> distinct_path_names(std::string_view rendered) {
  std::vector<std::string> names;
  std::set<std::string> seen;
  for (const auto& line : split(rendered, '\n')) {
    if (trim(line) == "EMPTY") continue;
    for (auto& name : split(line, ';')) {
      auto t = trim(name);
      if (!t.empty() && seen.insert(normalize_name(t)).second) names.push_back(std::move(t));
    }
  }
  return names;
}

std::vector<std::string> path_names(const Path& path, const ConceptGraph& graph) {
  std::vector<std::string> names;
  names.reserve(path.size());
  for (const auto id : path) names.push_back(graph.name(id));
  return names;
}

json outcome_json(const QueryOutcome& outcome, const ConceptGraph& graph) {
  json obj = {{"kind", std::string(to_string(outcome.kind))}};
  if (outcome.reachable) obj["reachable"] = *outcome.reachable;
  obj["resolved"] = path_names(outcome.resolved, graph);
  json paths = json::array();
  for (const auto& p : outcome.paths.paths) paths.push_back(path_names(p, graph));
  obj["paths"] = std::move(paths);
  return obj;
}

std::vector<QueryOutcome> execute_script(const std::vector<GraphQuery>& queries, const ConceptGraph& graph) {
  std::vector<QueryOutcome> out;
  out.reserve(queries.size());
  for (const auto& q : queries) out.push_back(execute(q, graph));
  return out;
}

bool is_recoverable(const Error& e) {
  return e.code() == ErrorCode::SyntaxError || e.code() == ErrorCode::UnknownConcept;
}

}  // namespace

std::vector<TutorQaItem> read_tutorqa(std::istream& in) {
  std::vector<TutorQaItem> items;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto where = "tutorqa line " + std::to_string(line_no) + ": ";
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::Format, where + e.what());
    }
    try {
      TutorQaItem item;
      item.task = obj.at("task").get<int>();
      if (item.task < 1 || item.task > 5) throw Error(ErrorCode::Format, "task must be 1-5");
      item.question = obj.at("question").get<std::string>();
      if (trim(item.question).empty()) throw Error(ErrorCode::Format, "question is empty");
      if (obj.contains("concepts")) item.concepts = obj["concepts"].get<std::vector<std::string>>();
      const auto answer = obj.value("answer", json());
      if (item.task == 1) {
        item.binary_answer = binary_from_json(answer);
      } else if (item.task <= 4) {
        if (answer.is_array()) {
          for (const auto& a : answer) {
            auto t = trim(a.get<std::string>());
            if (!t.empty()) item.list_answer.push_back(std::move(t));
          }
        } else if (answer.is_string()) {
          item.list_answer = split_concept_list(answer.get<std::string>());
        } else {
          throw Error(ErrorCode::Format, "Tasks 2-4 need a concept-list answer");
        }
      } else if (answer.is_string()) {
        item.text_answer = answer.get<std::string>();
      } else if (!answer.is_null()) {
        throw Error(ErrorCode::Format, "Task 5 answer must be text");
      }
      items.push_back(std::move(item));
    } catch (const Error& e) {
      throw Error(ErrorCode::Format, where + e.what());
    } catch (const json::exception& e) {
      throw Error(ErrorCode::Format, where + e.what());
    }
  }
  return items;
}

std::vector<TutorQaItem> load_tutorqa(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return read_tutorqa(in);
}

std::string tutorqa_line(const TutorQaItem& item) {
  json obj = {{"task", item.task}, {"question", item.question}};
  if (item.task == 1 && item.binary_answer) {
    obj["answer"] = *item.binary_answer == Verdict::Yes ? "Yes" : "No";
  } else if (item.task >= 2 && item.task <= 4) {
    obj["answer"] = item.list_answer;
  } else if (item.task == 5 && !item.text_answer.empty()) {
    obj["answer"] = item.text_answer;
  }
  if (!item.concepts.empty()) obj["concepts"] = item.concepts;
  return obj.dump();
}

std::vector<std::string> split_concept_list(std::string_view answer) {
  std::vector<std::string> out;
  for (const auto& line : split(answer, '\n')) {
    for (const auto& part : split(line, ';')) {
      auto t = trim(part);
      if (!t.empty()) out.push_back(std::move(t));
    }
  }
  return out;
}

std::vector<std::string> pipeline_vocabulary(const ConceptGraph& graph, std::string_view domain) {
  const auto domain_key = normalize_name(domain);
  std::vector<std::string> vocab;
  for (auto& name : graph.names()) {
    if (normalize_name(name) != domain_key) vocab.push_back(std::move(name));
  }
  return vocab;
}

std::vector<std::string> extract_concepts(std::string_view question, const std::vector<std::string>& vocabulary) {
  std::vector<std::string> out;
  if (vocabulary.empty()) return out;
  const VocabularyMatcher matcher(vocabulary);
  std::set<std::size_t> seen;
  for (const auto& m : matcher.scan(question)) {
    if (seen.insert(m.entry).second) out.push_back(vocabulary[m.entry]);
  }
  return out;
}

std::optional<std::string> template_command(int task, const std::vector<std::string>& concepts,
                                            const PipelineOptions& options) {
  switch (task) {
    case 1:
      if (concepts.size() < 2) return std::nullopt;
      return print(Reachable{concepts[0], concepts[1]});
    case 2:
      if (concepts.empty()) return std::nullopt;
      return print(Prerequisites{concepts.back(), options.prereq_depth});
    case 3:
      if (concepts.size() < 2) return std::nullopt;
      return print(ShortestPath{concepts[0], concepts[1]});
    case 4: {
      if (concepts.empty()) return std::nullopt;
      std::vector<std::string> lines;
      for (const auto& c : concepts) lines.push_back(print(Neighbors{c, Direction::In, options.advise_hops}));
      return join(lines, "\n");
    }
    default:
      return std::nullopt;
  }
}

std::string command_prompt(std::string_view question, int task) {
  std::string out =
      "Translate the question into GQL-mini commands over a concept graph.\n"
      "Grammar:\n"
      "REACHABLE \"<a>\" -> \"<b>\"\n"
      "SHORTEST \"<a>\" -> \"<b>\"\n"
      "PREREQ \"<a>\" DEPTH <int>\n"
      "NEIGHBORS \"<a>\" <IN|OUT> HOPS <int>\n"
      "Concept names are double-quoted; write \\\" and \\\\ inside names.\n";
  out += task_line(task);
  out += "\nReturn only the commands, one per line.";
  out += kQuestionHeader;
  out += question;
  out += kReturnPath;
  return out;
}

std::string generate_command(std::string_view question, int task, TextOracle& oracle) {
  return oracle.complete(command_prompt(question, task));
}

std::string TemplateCommandOracle::complete(const std::string& prompt) {
  const auto task_pos = prompt.find("\nTask ");
  const auto q_pos = prompt.find(kQuestionHeader);
  const auto end_pos = prompt.rfind(kReturnPath);
  if (task_pos == std::string::npos || q_pos == std::string::npos || end_pos == std::string::npos ||
      end_pos < q_pos + kQuestionHeader.size() || task_pos + 6 >= prompt.size()) {
    return "";
  }
  const int task = prompt[task_pos + 6] - '0';
  const auto question = std::string_view(prompt).substr(q_pos + kQuestionHeader.size(),
                                                        end_pos - q_pos - kQuestionHeader.size());
  return template_command(task, extract_concepts(question, vocabulary_), options_).value_or("");
}

std::string render_paths(const std::vector<QueryOutcome>& outcomes, const ConceptGraph& graph) {
  std::vector<std::string> lines;
  std::set<Path> seen;
  for (const auto& o : outcomes) {
    for (const auto& p : o.paths.paths) {
      if (seen.insert(p).second) lines.push_back(join(path_names(p, graph), ";"));
    }
  }
  return lines.empty() ? std::string("EMPTY") : join(lines, "\n");
}

std::string grounding_prompt(std::string_view question, int task, std::string_view rendered_paths) {
  std::string out =
      "There is a concept graph that includes the relations between concepts.\n"
      "Based on the question, the path between concepts has been returned.\n"
      "If the path is empty, then there is no relationship.\n"
      "Only use the returned path as the information for answering.\n";
  out += task == 1 ? kYesNoRule : kListRule;
  out += "\n***Question**:\n";
  out += question;
  out += "\n";
  out += kPathHeader;
  out += rendered_paths;
  return out;
}

std::string trace_line(const PipelineTrace& trace, const ConceptGraph& graph) {
  json queries = json::array();
  for (const auto& q : trace.parsed_queries) queries.push_back(print(q));
  json outcomes = json::array();
  for (const auto& o : trace.outcomes) outcomes.push_back(outcome_json(o, graph));
  json exchanges = json::array();
  for (const auto& e : trace.exchanges) exchanges.push_back({{"prompt", e.prompt}, {"response", e.response}});
  json obj = {
      {"task", trace.task},
      {"question", trace.question},
      {"generated_command", trace.generated_command},
      {"parsed_queries", std::move(queries)},
      {"outcomes", std::move(outcomes)},
      {"fallback_used", trace.fallback_used},
      {"fallback_command", trace.fallback_command},
      {"first_error", trace.first_error},
      {"grounding_prompt", trace.grounding_prompt},
      {"final_answer", trace.final_answer},
      {"exchanges", std::move(exchanges)},
  };
  return obj.dump();
}

std::map<std::string, std::string> replay_map(const std::vector<PipelineTrace>& traces) {
  std::map<std::string, std::string> out;
  for (const auto& t : traces) {
    for (const auto& e : t.exchanges) out[e.prompt] = e.response;
  }
  return out;
}

std::string ground_and_answer(std::string_view question, int task, const std::vector<QueryOutcome>& outcomes,
                              const ConceptGraph& graph, TextOracle& oracle, PipelineTrace* trace) {
  const auto prompt = grounding_prompt(question, task, render_paths(outcomes, graph));
  if (trace) trace->grounding_prompt = prompt;
  auto reply = ask(oracle, prompt, trace);
  if (task != 1) return reply;
  try {
    return parse_verdict(reply) == Verdict::Yes ? "Yes" : "No";
  } catch (const Error& e) {
    if (e.code() != ErrorCode::UnparseableVerdict) throw;
  }
  reply = ask(oracle, prompt + "\n" + std::string(kVerdictRetrySuffix), trace);
  return parse_verdict(reply) == Verdict::Yes ? "Yes" : "No";
}

std::string RuleFollowingAnswerer::complete(const std::string& prompt) {
  if (const auto pos = prompt.find(kQueryConcepts); pos != std::string::npos) {
    const auto end = prompt.find('\n', pos);
    const auto listed = split_concept_list(
        std::string_view(prompt).substr(pos + kQueryConcepts.size(), end == std::string::npos ? end : end - pos - kQueryConcepts.size()));
    std::vector<std::string> related;
    if (const auto h = prompt.find(kNeighbourhoodHeader); h != std::string::npos) {
      std::set<std::string> seen;
      for (const auto& c : listed) seen.insert(normalize_name(c));
      const auto body = std::string_view(prompt).substr(h + kNeighbourhoodHeader.size());
      for (const auto& line : split(body, '\n')) {
        const auto colon = line.find(": ");
        if (colon == std::string::npos) continue;
        for (const auto& n : distinct_path_names(line.substr(colon + 2))) {
          if (seen.insert(normalize_name(n)).second) related.push_back(n);
        }
      }
    }
    std::string out = "Title: A project combining " + join(listed, ", ") + "\nDescription: The project applies " +
                      join(listed, ", ") + ".";
    if (!related.empty()) out += " It also draws on " + join(related, ", ") + ".";
    return out;
  }
  const auto pos = prompt.rfind(kPathHeader);
  if (pos == std::string::npos) return "";
  const auto rendered = std::string_view(prompt).substr(pos + kPathHeader.size());
  if (prompt.find(kYesNoRule) != std::string::npos) {
    const auto first_line = rendered.substr(0, rendered.find('\n'));
    return trim(first_line) == "EMPTY" ? "No" : "Yes";
  }
  return join(distinct_path_names(rendered), ";");
}

PipelineResult run_task(const TutorQaItem& item, const ConceptGraph& graph, TextOracle& command_oracle,
                        TextOracle& answer_oracle, const PipelineOptions& options) {
  if (item.task == 5) return run_task_5(item, graph, answer_oracle, options);
  PipelineResult result;
  auto& trace = result.trace;
  trace.task = item.task;
  trace.question = item.question;
  trace.generated_command = ask(command_oracle, command_prompt(item.question, item.task), &trace);

  try {
    auto queries = parse_script(trace.generated_command);
    trace.outcomes = execute_script(queries, graph);
    trace.parsed_queries = std::move(queries);
  } catch (const Error& e) {
    if (!is_recoverable(e)) throw;
    trace.first_error = e.what();
    trace.fallback_used = true;
  }

  if (trace.fallback_used) {
    const auto concepts = extract_concepts(item.question, pipeline_vocabulary(graph, options.domain));
    const auto command = template_command(item.task, concepts, options);
    if (!command) {
      throw Error(ErrorCode::FallbackExhausted,
                  "generated command rejected (" + trace.first_error + ") and too few concepts for a fallback");
    }
    trace.fallback_command = *command;
    try {
      auto queries = parse_script(*command);
      trace.outcomes = execute_script(queries, graph);
      trace.parsed_queries = std::move(queries);
    } catch (const Error& e) {
      if (!is_recoverable(e)) throw;
      throw Error(ErrorCode::FallbackExhausted, "fallback command failed: " + std::string(e.what()));
    }
  }

  result.answer = ground_and_answer(item.question, item.task, trace.outcomes, graph, answer_oracle, &trace);
  trace.final_answer = result.answer;
  return result;
}

std::string proposal_prompt(std::string_view question, const std::vector<std::string>& concepts,
                            std::string_view rendered_neighbourhood) {
  std::string out(question);
  out += "\n";
  out += kQueryConcepts;
  out += join(concepts, "; ");
  out += "\n";
  out += kNeighbourhoodHeader;
  out += rendered_neighbourhood;
  out += "\nUse the query concepts and, where useful, the related concepts. ";
  out += kProposalRule;
  return out;
}

PipelineResult run_task_5(const TutorQaItem& item, const ConceptGraph& graph, TextOracle& answer_oracle,
                          const PipelineOptions& options) {
  PipelineResult result;
  auto& trace = result.trace;
  trace.task = 5;
  trace.question = item.question;

  std::vector<std::string> concepts;
  std::vector<std::string> unknown;
  const auto requested =
      item.concepts.empty() ? extract_concepts(item.question, pipeline_vocabulary(graph, options.domain)) : item.concepts;
  for (const auto& c : requested) {
    if (graph.find(c)) concepts.push_back(c);
    else unknown.push_back(c);
  }
  if (!unknown.empty()) trace.first_error = "unknown concepts skipped: " + join(unknown, ", ");

  std::vector<std::string> lines;
  for (const auto& c : concepts) {
    std::vector<std::string> names;
    std::set<std::string> seen;
    for (const auto direction : {Direction::Out, Direction::In}) {
      GraphQuery q = Neighbors{c, direction, options.proposal_hops};
      auto outcome = execute(q, graph);
      for (const auto& p : outcome.paths.paths) {
        const auto& far = graph.name(direction == Direction::Out ? p.back() : p.front());
        if (seen.insert(far).second) names.push_back(far);
      }
      trace.parsed_queries.push_back(std::move(q));
      trace.outcomes.push_back(std::move(outcome));
    }
    lines.push_back(c + ": " + (names.empty() ? std::string("EMPTY") : join(names, ";")));
  }

  trace.grounding_prompt = proposal_prompt(item.question, concepts, join(lines, "\n"));
  result.answer = ask(answer_oracle, trace.grounding_prompt, &trace);
  trace.final_answer = result.answer;
  return result;
}

}  // namespace cgraph
