// Copyright 2026 The kgreason Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "kgr/orchestrator.hpp"

#include <algorithm>
#include <atomic>
#include <istream>
#include <ostream>
#include <thread>

#include "kgr/error.hpp"

namespace kgr {

namespace {

constexpr std::string_view kSelectionStage = "path_selection";
constexpr std::string_view kFallbackStage = "fallback";
constexpr std::size_t kGroundingSamples = 3;

std::string dump_line(const nlohmann::ordered_json& j) {
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

// Answers from a free-form fallback reply: the "answer" list of a JSON object,
// else a bare JSON list, else nothing.
std::vector<std::string> parse_fallback_answers(std::string_view reply) {
  auto take_strings = [](const nlohmann::json& arr) {
    std::vector<std::string> out;
    for (const auto& a : arr) {
      if (a.is_string()) {
        out.push_back(a.get<std::string>());
      } else if (a.is_number()) {
        out.push_back(a.dump());
      }
    }
    return out;
  };
  const auto ob = reply.find('{');
  const auto oe = reply.rfind('}');
  if (ob != std::string_view::npos && oe != std::string_view::npos && oe > ob) {
    auto j = nlohmann::json::parse(reply.substr(ob, oe - ob + 1), nullptr, false);
    if (!j.is_discarded() && j.is_object() && j.contains("answer") && j["answer"].is_array()) {
      return take_strings(j["answer"]);
    }
  }
  const auto lb = reply.find('[');
  const auto le = reply.rfind(']');
  if (lb != std::string_view::npos && le != std::string_view::npos && le > lb) {
    auto j = nlohmann::json::parse(reply.substr(lb, le - lb + 1), nullptr, false);
    if (!j.is_discarded() && j.is_array()) return take_strings(j);
  }
  return {};
}

void answer_from_model_knowledge(const Question& q, Session& session, ReasoningTrace& trace) {
  const auto prompt = render_prompt(
      TemplateId::kDirectAnswer,
      {{"question", q.text}, {"topic_entities", py_list(q.topic_entities)}});
  const auto reply = session.complete_prompt(kFallbackStage, prompt);
  trace.final_answers = parse_fallback_answers(reply.content);
  trace.grounded = false;
  trace.outcome = Outcome::kFallback;
}

nlohmann::ordered_json verdict_json(const VerificationVerdict& v) {
  return {{"answer", v.answers},
          {"sufficient", v.sufficient ? "Yes" : "No"},
          {"reason", v.reason}};
}

UsageRecord usage_from_json(const nlohmann::json& j) {
  UsageRecord u;
  u.calls = j.value("calls", std::size_t{0});
  u.input_tokens = j.value("input_tokens", std::size_t{0});
  u.output_tokens = j.value("output_tokens", std::size_t{0});
  u.total_tokens = j.value("total_tokens", u.input_tokens + u.output_tokens);
  u.estimated = j.value("estimated", false);
  return u;
}

Outcome outcome_from_string(std::string_view s) {
  for (auto o : {Outcome::kVerified, Outcome::kExhausted, Outcome::kFallback, Outcome::kFailed}) {
    if (to_string(o) == s) return o;
  }
  throw ParseError("unknown outcome '" + std::string(s) + "'");
}

}  // namespace

void ReasonerConfig::validate() const {
  if (max_depth < 1 || instantiation_cap < 1 || candidate_limit < 1 || selection_window < 1) {
    throw ConfigError("reasoner bounds must all be >= 1");
  }
  if (parse_retries < 0) throw ConfigError("parse_retries must be >= 0");
}

nlohmann::ordered_json ReasonerConfig::to_json() const {
  return {{"max_depth", max_depth},
          {"instantiation_cap", instantiation_cap},
          {"candidate_limit", candidate_limit},
          {"selection_window", selection_window},
          {"parse_retries", parse_retries},
          {"model", model},
          {"seed", seed}};
}

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::kVerified:
      return "verified";
    case Outcome::kExhausted:
      return "exhausted";
    case Outcome::kFallback:
      return "fallback";
    case Outcome::kFailed:
      return "failed";
  }
  return "failed";
}

std::vector<RelationPath> EnumeratingPathGenerator::generate(const Question&,
                                                             std::string_view topic_entity) {
  return enumerate_candidate_paths(graph_, topic_entity, max_len_, limit_);
}

LlmPathGenerator::LlmPathGenerator(ChatBackend& backend, std::string model, int limit)
    : session_(backend, std::move(model)), limit_(limit) {}

std::vector<RelationPath> LlmPathGenerator::parse_paths(std::string_view reply, int limit) {
  std::vector<RelationPath> out;
  std::string text(reply);
  std::replace(text.begin(), text.end(), '\n', '|');
  std::size_t pos = 0;
  while (pos <= text.size() && out.size() < static_cast<std::size_t>(limit)) {
    auto next = text.find('|', pos);
    if (next == std::string::npos) next = text.size();
    auto item = text.substr(pos, next - pos);
    pos = next + 1;
    const auto b = item.find_first_not_of(" \t\r\"'[],");
    const auto e = item.find_last_not_of(" \t\r\"'[],");
    if (b == std::string::npos) continue;
    item = item.substr(b, e - b + 1);
    try {
      auto path = parse_relation_path(item);
      if (!path.empty() && std::find(out.begin(), out.end(), path) == out.end()) {
        out.push_back(std::move(path));
      }
    } catch (const ParseError&) {
      // Skip fragments that are not paths.
    }
  }
  return out;
}

std::vector<RelationPath> LlmPathGenerator::generate(const Question& question,
                                                     std::string_view topic_entity) {
  const std::vector<std::string> topics{std::string(topic_entity)};
  const auto reply =
      session_.complete_prompt("path_generation", path_generation_prompt(question.text, topics));
  return parse_paths(reply.content, limit_);
}

CandidatePool plan_candidates(const Question& question, PathGenerator& generator) {
  if (question.topic_entities.empty()) {
    throw PreconditionError("question " + question.id + " has no topic entities");
  }
  PerEntityCandidates per_entity;
  for (const auto& topic : question.topic_entities) {
    per_entity.emplace_back(topic, generator.generate(question, topic));
  }
  return merge_candidate_pools(per_entity);
}

ReasoningTrace answer_question(const Question& q, const KnowledgeGraph& g,
                               const ReasonerConfig& cfg, Session& session,
                               PathGenerator& generator) {
  ReasoningTrace trace;
  trace.question_id = q.id;
  trace.question = q.text;
  trace.topic_entities = q.topic_entities;
  RetryBudget budget{cfg.parse_retries};

  try {
    auto pool = plan_candidates(q, generator);
    trace.candidates = pool.candidates();
    // With no candidates the constraints feed nothing, so they are not re-asked.
    if (pool.empty()) budget.remaining = 0;
    trace.constraints = extract_constraints(q.text, session, &budget, &trace.warnings);

    if (pool.empty()) {
      answer_from_model_knowledge(q, session, trace);
    }
    std::vector<MemoryEntry> memory;
    while (!pool.empty()) {
      const auto remaining = pool.remaining();
      const bool last = remaining.size() == 1;
      ReasoningStep step;
      std::size_t chosen = remaining.front();

      if (last) {
        step.selection = {chosen, "only remaining candidate", true};
      } else {
        const auto shown = std::min(remaining.size(),
                                    static_cast<std::size_t>(cfg.selection_window));
        std::vector<std::string> rendered;
        for (std::size_t i = 0; i < shown; ++i) {
          const auto& c = pool[remaining[i]];
          rendered.push_back(render_relation_path(c.topic_entity, c.path));
        }
        const auto prompt = render_prompt(TemplateId::kPathSelection,
                                          {{"question", q.text},
                                           {"topic_entities", py_list(q.topic_entities)},
                                           {"memory", format_memory(memory)},
                                           {"reasoning_paths", format_path_choices(rendered)}});
        std::optional<PathSelection> selection;
        std::string error;
        auto ask = [&](const std::string& p) {
          try {
            selection = parse_path_selection(session.complete_prompt(kSelectionStage, p).content,
                                             shown);
          } catch (const ParseError& e) {
            error = e.what();
          }
        };
        ask(prompt);
        if (!selection && budget.take()) {
          ask(prompt + "\n\nYour previous reply could not be parsed. Start your reply with "
                       "{Path k} or {no path}.");
        }
        if (!selection) {
          trace.warnings.push_back("selection unreadable (" + error +
                                   "); took first remaining candidate");
          step.selection = {chosen, "unreadable selection reply", true};
        } else if (const auto* none = std::get_if<NoPath>(&*selection)) {
          step.selection = {std::nullopt, none->rationale, false};
          trace.steps.push_back(std::move(step));
          answer_from_model_knowledge(q, session, trace);
          break;
        } else {
          const auto& pick = std::get<PathChoice>(*selection);
          chosen = remaining[pick.index - 1];
          step.selection = {chosen, pick.rationale, false};
        }
      }

      pool.consume(chosen);
      const auto& cand = pool[chosen];
      step.candidate = render_relation_path(cand.topic_entity, cand.path);
      const auto groundings =
          instantiate_path(g, cand.topic_entity, cand.path, cfg.instantiation_cap);
      step.groundings = groundings.size();
      for (std::size_t i = 0; i < std::min(groundings.size(), kGroundingSamples); ++i) {
        step.grounding_samples.push_back(to_string(groundings[i]));
      }
      const VerificationRequest request{q.text,          q.topic_entities, &trace.constraints,
                                        cand.topic_entity, &cand.path,       groundings};
      auto verdict = verify_path(request, session, &budget, &trace.warnings);
      step.verdict = verdict;

      if (verdict.sufficient || last) {
        trace.final_answers = verdict.answers;
        trace.grounded = verdict.sufficient;
        trace.outcome = verdict.sufficient ? Outcome::kVerified : Outcome::kExhausted;
        trace.steps.push_back(std::move(step));
        break;
      }
      MemoryEntry entry{step.candidate, verdict.reason.empty()
                                            ? "verification failed without a stated reason"
                                            : verdict.reason};
      memory.push_back(entry);
      step.memory_appended = std::move(entry);
      trace.steps.push_back(std::move(step));
    }
  } catch (const Error& e) {
    trace.outcome = Outcome::kFailed;
    trace.grounded = false;
    trace.final_answers.clear();
    trace.error = e.what();
  }

  trace.backtracks = trace.steps.empty() ? 0 : trace.steps.size() - 1;
  trace.usage = session.usage();
  trace.usage_by_stage = session.usage_by_stage();
  trace.planner_usage = generator.usage();
  return trace;
}

std::vector<ReasoningTrace> answer_all(
    std::span<const Question> questions, const KnowledgeGraph& g, const ReasonerConfig& cfg,
    ChatBackend& backend,
    const std::function<std::unique_ptr<PathGenerator>()>& make_generator, int parallelism) {
  cfg.validate();
  std::vector<ReasoningTrace> traces(questions.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (auto i = next++; i < questions.size(); i = next++) {
      Session session(backend, cfg.model);
      auto generator = make_generator();
      traces[i] = answer_question(questions[i], g, cfg, session, *generator);
    }
  };
  const auto threads = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(parallelism, 1)),
                                               1, std::max<std::size_t>(questions.size(), 1));
  if (threads == 1) {
    worker();
    return traces;
  }
  std::vector<std::jthread> pool;
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  pool.clear();
  return traces;
}

nlohmann::ordered_json ReasoningTrace::to_json() const {
  nlohmann::ordered_json j;
  j["question_id"] = question_id;
  j["question"] = question;
  j["topic_entities"] = topic_entities;
  auto cons = nlohmann::ordered_json::array();
  for (const auto& c : constraints.items) {
    cons.push_back({{"kind", to_string(c.kind)}, {"text", c.text}});
  }
  j["constraints"] = cons;
  auto cands = nlohmann::ordered_json::array();
  for (const auto& c : candidates) {
    cands.push_back({{"entity", c.topic_entity}, {"path", to_string(c.path)}});
  }
  j["candidates"] = cands;
  auto steps_json = nlohmann::ordered_json::array();
  for (const auto& s : steps) {
    nlohmann::ordered_json sj;
    sj["selection"] = {{"pool_index", s.selection.pool_index
                                          ? nlohmann::ordered_json(*s.selection.pool_index)
                                          : nlohmann::ordered_json(nullptr)},
                       {"no_path", !s.selection.pool_index.has_value()},
                       {"forced", s.selection.forced},
                       {"rationale", s.selection.rationale}};
    sj["candidate"] = s.candidate;
    sj["groundings"] = s.groundings;
    sj["grounding_samples"] = s.grounding_samples;
    sj["verdict"] = s.verdict ? verdict_json(*s.verdict) : nlohmann::ordered_json(nullptr);
    sj["memory_appended"] =
        s.memory_appended ? nlohmann::ordered_json{{"selected_path", s.memory_appended->selected_path},
                                                   {"feedback", s.memory_appended->feedback}}
                          : nlohmann::ordered_json(nullptr);
    steps_json.push_back(std::move(sj));
  }
  j["steps"] = steps_json;
  j["backtracks"] = backtracks;
  j["final_answers"] = final_answers;
  j["grounded"] = grounded;
  j["outcome"] = to_string(outcome);
  j["error"] = error;
  j["warnings"] = warnings;
  j["usage"] = usage.to_json();
  nlohmann::ordered_json stages = nlohmann::ordered_json::object();
  for (const auto& [stage, u] : usage_by_stage) stages[stage] = u.to_json();
  j["usage_by_stage"] = stages;
  j["planner_usage"] = planner_usage.to_json();
  return j;
}

ReasoningTrace ReasoningTrace::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("question_id")) throw ParseError("trace needs question_id");
  ReasoningTrace t;
  try {
    t.question_id = j.at("question_id").get<std::string>();
    t.question = j.value("question", "");
    t.topic_entities = j.value("topic_entities", std::vector<std::string>{});
    for (const auto& c : j.value("constraints", nlohmann::json::array())) {
      const auto text = c.at("text").get<std::string>();
      t.constraints.items.push_back({classify_constraint(text), text});
    }
    for (const auto& c : j.value("candidates", nlohmann::json::array())) {
      t.candidates.push_back({c.at("entity").get<std::string>(),
                              parse_relation_path(c.at("path").get<std::string>())});
    }
    for (const auto& sj : j.value("steps", nlohmann::json::array())) {
      ReasoningStep s;
      const auto& sel = sj.at("selection");
      if (!sel.at("pool_index").is_null()) s.selection.pool_index = sel["pool_index"].get<std::size_t>();
      s.selection.forced = sel.value("forced", false);
      s.selection.rationale = sel.value("rationale", "");
      s.candidate = sj.value("candidate", "");
      s.groundings = sj.value("groundings", std::size_t{0});
      s.grounding_samples = sj.value("grounding_samples", std::vector<std::string>{});
      if (sj.contains("verdict") && !sj["verdict"].is_null()) {
        s.verdict = parse_verdict(sj["verdict"].dump());
      }
      if (sj.contains("memory_appended") && !sj["memory_appended"].is_null()) {
        s.memory_appended = MemoryEntry{sj["memory_appended"].at("selected_path").get<std::string>(),
                                        sj["memory_appended"].at("feedback").get<std::string>()};
      }
      t.steps.push_back(std::move(s));
    }
    t.backtracks = j.value("backtracks", std::size_t{0});
    t.final_answers = j.value("final_answers", std::vector<std::string>{});
    t.grounded = j.value("grounded", false);
    t.outcome = outcome_from_string(j.value("outcome", "failed"));
    t.error = j.value("error", "");
    t.warnings = j.value("warnings", std::vector<std::string>{});
    if (j.contains("usage")) t.usage = usage_from_json(j["usage"]);
    const auto by_stage = j.value("usage_by_stage", nlohmann::json::object());
    for (const auto& [stage, u] : by_stage.items()) {
      t.usage_by_stage[stage] = usage_from_json(u);
    }
    if (j.contains("planner_usage")) t.planner_usage = usage_from_json(j["planner_usage"]);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed trace: ") + e.what());
  }
  return t;
}

void write_traces(std::span<const ReasoningTrace> traces, std::ostream& out) {
  for (const auto& t : traces) out << dump_line(t.to_json()) << '\n';
  if (!out) throw IoError("write failure while writing traces");
}

std::vector<ReasoningTrace> read_traces(std::istream& in) {
  std::vector<ReasoningTrace> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) throw ParseError("invalid JSON", line_no);
    try {
      out.push_back(ReasoningTrace::from_json(j));
    } catch (const ParseError& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  return out;
}

}  // namespace kgr
