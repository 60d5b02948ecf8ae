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

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "kgr/knowledge_graph.hpp"
#include "kgr/relation_path.hpp"

namespace kgr {

/// One line of the question file:
/// {"id", "question", "topic_entities": [...], "answers": [...]}.
struct Question {
  std::string id;
  std::string text;
  std::vector<std::string> topic_entities;
  std::vector<std::string> answers;

  bool operator==(const Question&) const = default;
};

std::vector<Question> parse_questions(std::istream& in);
std::vector<Question> load_questions(const std::filesystem::path& source);
void write_questions(std::span<const Question> questions, std::ostream& out);

/// Every distinct relation-label sequence of minimal hop count that leads
/// from `source` to `target` within `max_depth` hops. Empty when the target
/// is unreachable, when either entity is unknown, or when source == target.
std::set<RelationPath> shortest_relation_paths(const KnowledgeGraph& g, std::string_view source,
                                               std::string_view target, int max_depth);

enum class RecordStatus {
  kOk,
  kNoPath,    // linked, but no answer is reachable within the depth bound
  kUnlinked,  // topic entity absent from the graph
};

std::string_view to_string(RecordStatus status);

struct WeakSupervisionRecord {
  std::string question_id;
  std::string question;
  std::string topic_entity;
  std::set<std::string> answer_entities;
  std::set<RelationPath> gold_paths;
  RecordStatus status = RecordStatus::kOk;

  bool flagged() const noexcept { return status != RecordStatus::kOk; }
};

/// One record per (question, topic entity), in question-file order. Gold
/// paths are the union over the question's answers.
std::vector<WeakSupervisionRecord> extract_weak_supervision(const KnowledgeGraph& g,
                                                            std::span<const Question> questions,
                                                            int max_depth);

/// Path-generation prompt for a question and its topic entities.
std::string path_generation_prompt(std::string_view question,
                                   std::span<const std::string> topic_entities);

/// Writes one {"prompt", "completion"} JSONL line per (record, gold path);
/// flagged records are skipped. Returns the number of lines written.
std::size_t emit_sft_dataset(std::span<const WeakSupervisionRecord> records,
                             const std::filesystem::path& sink);
std::size_t emit_sft_dataset(std::span<const WeakSupervisionRecord> records, std::ostream& out);

/// Full record dump (including flagged records) for inspection.
void write_weak_supervision(std::span<const WeakSupervisionRecord> records, std::ostream& out);

}  // namespace kgr
