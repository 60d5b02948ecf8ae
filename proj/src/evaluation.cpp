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

#include "kgr/evaluation.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <ostream>
#include <random>

#include "kgr/error.hpp"

namespace kgr {

namespace {

std::set<std::string> normalized_set(std::span<const std::string> items) {
  std::set<std::string> out;
  for (const auto& s : items) {
    auto n = normalize_answer(s);
    if (!n.empty()) out.insert(std::move(n));
  }
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string normalize_answer(std::string_view s) {
  std::string collapsed;
  bool pending_space = false;
  for (char raw : s) {
    const auto c = static_cast<unsigned char>(raw);
    if (std::isspace(c)) {
      pending_space = !collapsed.empty();
      continue;
    }
    if (pending_space) collapsed += ' ';
    pending_space = false;
    collapsed += static_cast<char>(std::tolower(c));
  }
  auto is_strip = [](char c) {
    return std::ispunct(static_cast<unsigned char>(c)) || std::isspace(static_cast<unsigned char>(c));
  };
  const auto b = std::find_if_not(collapsed.begin(), collapsed.end(), is_strip);
  const auto e = std::find_if_not(collapsed.rbegin(), collapsed.rend(), is_strip).base();
  return b < e ? std::string(b, e) : std::string();
}

int hit(std::span<const std::string> gold, std::span<const std::string> predicted) {
  const auto g = normalized_set(gold);
  for (const auto& p : predicted) {
    if (g.contains(normalize_answer(p))) return 1;
  }
  return 0;
}

int hits_at_1(std::span<const std::string> gold, std::span<const std::string> predicted) {
  if (predicted.empty()) return 0;
  return normalized_set(gold).contains(normalize_answer(predicted.front())) ? 1 : 0;
}

double f1(std::span<const std::string> gold, std::span<const std::string> predicted) {
  const auto g = normalized_set(gold);
  const auto p = normalized_set(predicted);
  if (g.empty() || p.empty()) return 0.0;
  std::size_t common = 0;
  for (const auto& x : p) common += g.contains(x) ? 1 : 0;
  if (common == 0) return 0.0;
  const double precision = static_cast<double>(common) / static_cast<double>(p.size());
  const double recall = static_cast<double>(common) / static_cast<double>(g.size());
  return 2 * precision * recall / (precision + recall);
}

std::vector<Question> sample_questions(std::span<const Question> questions, std::size_t n,
                                       std::uint64_t seed) {
  if (n > questions.size()) {
    throw PreconditionError("sample size " + std::to_string(n) + " exceeds dataset size " +
                            std::to_string(questions.size()));
  }
  std::vector<Question> out;
  out.reserve(n);
  std::mt19937_64 rng(seed);
  // Selection sampling over a forward range keeps input order.
  std::sample(questions.begin(), questions.end(), std::back_inserter(out), n, rng);
  return out;
}

nlohmann::ordered_json MetricsReport::to_json() const {
  return {{"n", n},
          {"hit", hit},
          {"hits_at_1", hits_at_1},
          {"f1", f1},
          {"avg_calls", avg_calls},
          {"avg_input_tokens", avg_input_tokens},
          {"avg_output_tokens", avg_output_tokens},
          {"avg_total_tokens", avg_total_tokens},
          {"avg_backtracks", avg_backtracks},
          {"grounded_rate", grounded_rate},
          {"failed", failed},
          {"tokens_estimated", tokens_estimated},
          {"reference_targets", reference_interaction_targets()}};
}

nlohmann::ordered_json reference_interaction_targets() {
  return {{"note", "published averages for live GPT-3.5 runs; comparison only, not asserted"},
          {"cwq",
           {{"calls", 2.9}, {"input_tokens", 2928.6}, {"output_tokens", 186.4},
            {"total_tokens", 3115.0}}},
          {"webqsp",
           {{"calls", 2.5}, {"input_tokens", 2552.8}, {"output_tokens", 146.7},
            {"total_tokens", 2699.5}}}};
}

MetricsReport score_records(std::span<const QARecord> records) {
  MetricsReport r;
  r.n = records.size();
  if (records.empty()) return r;
  for (const auto& rec : records) {
    if (rec.gold_answers.empty()) {
      throw PreconditionError("record " + rec.question_id + " has no gold answers");
    }
    if (!rec.failed) {
      r.hit += hit(rec.gold_answers, rec.predicted);
      r.hits_at_1 += hits_at_1(rec.gold_answers, rec.predicted);
      r.f1 += f1(rec.gold_answers, rec.predicted);
      r.grounded_rate += rec.grounded ? 1 : 0;
    } else {
      ++r.failed;
    }
    r.avg_calls += static_cast<double>(rec.usage.calls);
    r.avg_input_tokens += static_cast<double>(rec.usage.input_tokens);
    r.avg_output_tokens += static_cast<double>(rec.usage.output_tokens);
    r.avg_total_tokens += static_cast<double>(rec.usage.total_tokens);
    r.avg_backtracks += static_cast<double>(rec.backtracks);
    r.tokens_estimated = r.tokens_estimated || rec.usage.estimated;
  }
  const auto n = static_cast<double>(records.size());
  for (double* v : {&r.hit, &r.hits_at_1, &r.f1, &r.avg_calls, &r.avg_input_tokens,
                    &r.avg_output_tokens, &r.avg_total_tokens, &r.avg_backtracks,
                    &r.grounded_rate}) {
    *v /= n;
  }
  return r;
}

std::vector<QARecord> join_traces(std::span<const ReasoningTrace> traces,
                                  std::span<const Question> gold) {
  std::map<std::string, const Question*> by_id;
  for (const auto& q : gold) by_id.emplace(q.id, &q);
  std::set<std::string> seen;
  std::vector<QARecord> records;
  for (const auto& t : traces) {
    if (!seen.insert(t.question_id).second) {
      throw ParseError("duplicate trace for question " + t.question_id);
    }
    auto it = by_id.find(t.question_id);
    if (it == by_id.end()) throw ParseError("no gold record for question " + t.question_id);
    QARecord rec;
    rec.question_id = t.question_id;
    rec.gold_answers = it->second->answers;
    rec.predicted = t.final_answers;
    rec.grounded = t.grounded;
    rec.failed = t.outcome == Outcome::kFailed;
    rec.usage = t.usage;
    rec.backtracks = t.backtracks;
    records.push_back(std::move(rec));
  }
  return records;
}

MetricsReport evaluate_run(std::span<const ReasoningTrace> traces,
                           std::span<const Question> gold) {
  const auto records = join_traces(traces, gold);
  return score_records(records);
}

void write_per_record_csv(std::span<const QARecord> records, std::ostream& out) {
  out << "question_id,hit,hits_at_1,f1,grounded,failed,backtracks,calls,total_tokens\n";
  for (const auto& r : records) {
    const bool ok = !r.failed;
    out << csv_field(r.question_id) << ',' << (ok ? hit(r.gold_answers, r.predicted) : 0) << ','
        << (ok ? hits_at_1(r.gold_answers, r.predicted) : 0) << ','
        << (ok ? f1(r.gold_answers, r.predicted) : 0.0) << ',' << (r.grounded ? 1 : 0) << ','
        << (r.failed ? 1 : 0) << ',' << r.backtracks << ',' << r.usage.calls << ','
        << r.usage.total_tokens << '\n';
  }
}

}  // namespace kgr
