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
#include <iosfwd>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "kgr/llm_gateway.hpp"
#include "kgr/orchestrator.hpp"
#include "kgr/path_extraction.hpp"

namespace kgr {

/// Lowercase, trim, collapse inner whitespace, strip surrounding punctuation.
std::string normalize_answer(std::string_view s);

/// 1 when any gold answer appears among the predictions (after normalization).
int hit(std::span<const std::string> gold, std::span<const std::string> predicted);

/// 1 when the top prediction is a gold answer.
int hits_at_1(std::span<const std::string> gold, std::span<const std::string> predicted);

/// Harmonic mean of set precision and recall; 0 when either is 0.
double f1(std::span<const std::string> gold, std::span<const std::string> predicted);

/// Uniform sample of `n` questions without replacement, in input order.
/// Throws PreconditionError when n exceeds the dataset size.
std::vector<Question> sample_questions(std::span<const Question> questions, std::size_t n,
                                       std::uint64_t seed);

struct QARecord {
  std::string question_id;
  std::vector<std::string> gold_answers;
  std::vector<std::string> predicted;
  bool grounded = false;
  bool failed = false;
  UsageRecord usage;
  std::size_t backtracks = 0;
};

struct MetricsReport {
  double hit = 0;
  double hits_at_1 = 0;
  double f1 = 0;
  std::size_t n = 0;
  double avg_calls = 0;
  double avg_input_tokens = 0;
  double avg_output_tokens = 0;
  double avg_total_tokens = 0;
  double avg_backtracks = 0;
  double grounded_rate = 0;
  std::size_t failed = 0;
  bool tokens_estimated = false;

  nlohmann::ordered_json to_json() const;
};

/// Published per-question interaction averages for live-endpoint runs
/// (GPT-3.5), kept for comparison only.
nlohmann::ordered_json reference_interaction_targets();

/// Failed records score 0 on every metric.
MetricsReport score_records(std::span<const QARecord> records);

/// Joins traces with gold answers. Throws ParseError for a trace id missing
/// from the gold set or repeated among the traces.
std::vector<QARecord> join_traces(std::span<const ReasoningTrace> traces,
                                  std::span<const Question> gold);

MetricsReport evaluate_run(std::span<const ReasoningTrace> traces, std::span<const Question> gold);

/// question_id,hit,hits_at_1,f1,grounded,failed,backtracks,calls,total_tokens
void write_per_record_csv(std::span<const QARecord> records, std::ostream& out);

}  // namespace kgr
