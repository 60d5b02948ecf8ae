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

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "kgr/constraints.hpp"
#include "kgr/instantiation.hpp"
#include "kgr/knowledge_graph.hpp"
#include "kgr/llm_gateway.hpp"
#include "kgr/path_extraction.hpp"
#include "kgr/prompts.hpp"

namespace kgr {

struct ReasonerConfig {
  int max_depth = 3;              // longest relation path considered
  int instantiation_cap = kDefaultInstantiationCap;
  int candidate_limit = 8;        // candidates per topic entity
  int selection_window = 16;      // candidates shown per selection prompt
  int parse_retries = 2;          // re-asks per question after unparseable replies
  std::string model = "gpt-4o-mini";
  std::uint64_t seed = 0;

  void validate() const;
  nlohmann::ordered_json to_json() const;
};

/// How a question's loop ended.
enum class Outcome {
  kVerified,   // a path passed verification
  kExhausted,  // the last remaining candidate was verified once and failed
  kFallback,   // empty pool or no usable path: answered from model knowledge
  kFailed,     // backend failure; partial steps preserved
};

std::string_view to_string(Outcome outcome);

struct SelectionRecord {
  std::optional<std::size_t> pool_index;  // nullopt for "no path"
  std::string rationale;
  bool forced = false;  // chosen without a model call (singleton or unreadable reply)
};

struct ReasoningStep {
  SelectionRecord selection;
  std::string candidate;  // rendered relation path
  std::size_t groundings = 0;
  std::vector<std::string> grounding_samples;
  std::optional<VerificationVerdict> verdict;
  std::optional<MemoryEntry> memory_appended;
};

struct ReasoningTrace {
  std::string question_id;
  std::string question;
  std::vector<std::string> topic_entities;
  ConstraintSet constraints;
  std::vector<Candidate> candidates;
  std::vector<ReasoningStep> steps;
  std::size_t backtracks = 0;  // steps.size() - 1 when there are steps
  std::vector<std::string> final_answers;
  bool grounded = false;
  Outcome outcome = Outcome::kFailed;
  std::string error;
  std::vector<std::string> warnings;
  UsageRecord usage;
  std::map<std::string, UsageRecord> usage_by_stage;
  UsageRecord planner_usage;  // path generator calls, reported separately

  nlohmann::ordered_json to_json() const;
  static ReasoningTrace from_json(const nlohmann::json& j);
};

/// Produces candidate relation paths for one topic entity.
class PathGenerator {
 public:
  virtual ~PathGenerator() = default;
  virtual std::vector<RelationPath> generate(const Question& question,
                                             std::string_view topic_entity) = 0;
  virtual UsageRecord usage() const { return {}; }
};

/// Deterministic enumeration over the graph; used when no trained generator
/// is attached.
class EnumeratingPathGenerator final : public PathGenerator {
 public:
  EnumeratingPathGenerator(const KnowledgeGraph& g, int max_len, int limit)
      : graph_(g), max_len_(max_len), limit_(limit) {}
  std::vector<RelationPath> generate(const Question& question,
                                     std::string_view topic_entity) override;

 private:
  const KnowledgeGraph& graph_;
  int max_len_;
  int limit_;
};

/// Queries a chat endpoint serving a fine-tuned path generator with the
/// path-generation prompt. Each reply line (or " | "-separated item) is one
/// "r1 -> r2" path.
class LlmPathGenerator final : public PathGenerator {
 public:
  LlmPathGenerator(ChatBackend& backend, std::string model, int limit);
  std::vector<RelationPath> generate(const Question& question,
                                     std::string_view topic_entity) override;
  UsageRecord usage() const override { return session_.usage(); }

  static std::vector<RelationPath> parse_paths(std::string_view reply, int limit);

 private:
  Session session_;
  int limit_;
};

CandidatePool plan_candidates(const Question& question, PathGenerator& generator);

/// Runs extraction, selection, instantiation, verification and backtracking
/// for one question. Backend failures are caught and recorded in the trace.
ReasoningTrace answer_question(const Question& question, const KnowledgeGraph& g,
                               const ReasonerConfig& cfg, Session& session,
                               PathGenerator& generator);

/// Answers every question, `parallelism` sessions at a time. Output order
/// follows input order. `make_generator` is called once per question.
std::vector<ReasoningTrace> answer_all(
    std::span<const Question> questions, const KnowledgeGraph& g, const ReasonerConfig& cfg,
    ChatBackend& backend,
    const std::function<std::unique_ptr<PathGenerator>()>& make_generator, int parallelism = 1);

void write_traces(std::span<const ReasoningTrace> traces, std::ostream& out);
std::vector<ReasoningTrace> read_traces(std::istream& in);

}  // namespace kgr
