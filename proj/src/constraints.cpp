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

#include "kgr/constraints.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <regex>
#include <sstream>

#include "kgr/error.hpp"
#include "kgr/prompts.hpp"

namespace kgr {

namespace {

constexpr std::string_view kExtractionStage = "constraint_extraction";
constexpr std::string_view kVerificationStage = "constraint_verification";
constexpr std::string_view kReask =
    "\n\nYour previous reply could not be parsed. Reply again using exactly the output format "
    "shown above.";

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

// Runs of capitalized words, ignoring the first word of the sentence.
int proper_noun_runs(std::string_view text) {
  static const std::regex numbering(R"(^\s*\d+[.)]\s*)");
  const auto body = std::regex_replace(std::string(text), numbering, "");
  std::istringstream in(body);
  int runs = 0;
  bool in_run = false;
  bool first = true;
  for (std::string word; in >> word;) {
    const bool capital = std::isupper(static_cast<unsigned char>(word.front())) && word != "I";
    if (capital && !first) {
      if (!in_run) ++runs;
      in_run = true;
    } else {
      in_run = false;
    }
    first = false;
  }
  return runs;
}

std::string_view slice_between(std::string_view raw, char open, char close) {
  const auto b = raw.find(open);
  const auto e = raw.rfind(close);
  if (b == std::string_view::npos || e == std::string_view::npos || e < b) return {};
  return raw.substr(b, e - b + 1);
}

}  // namespace

std::string_view to_string(ConstraintKind kind) {
  switch (kind) {
    case ConstraintKind::kType:
      return "Type";
    case ConstraintKind::kMultiEntity:
      return "MultiEntity";
    case ConstraintKind::kExplicitTime:
      return "ExplicitTime";
    case ConstraintKind::kImplicitTime:
      return "ImplicitTime";
    case ConstraintKind::kOrdinal:
      return "Ordinal";
    case ConstraintKind::kUnclassified:
      return "Unclassified";
  }
  return "Unclassified";
}

std::vector<std::string> ConstraintSet::texts() const {
  std::vector<std::string> out;
  out.reserve(items.size());
  for (const auto& c : items) out.push_back(c.text);
  return out;
}

ConstraintKind classify_constraint(std::string_view text) {
  static const std::regex explicit_time(
      R"(\b(1[0-9]{3}|20[0-9]{2})s?\b|\b(january|february|march|april|may|june|july|august|september|october|november|december)\b)");
  static const std::regex ordinal(
      R"(\b(last|first|latest|earliest|most recent|largest|smallest|biggest|highest|lowest|oldest|youngest|newest|second|third|fourth|fifth|\d+(st|nd|rd|th))\b)");
  static const std::regex implicit_time(
      R"(\b(when|before|after|during|while|until|since|time|period|era)\b)");
  static const std::regex type(
      R"(\b(should be an?|must be an?|answer is an?|is a type of|type of|kind of|category)\b)");

  const auto l = lower(text);
  if (std::regex_search(l, explicit_time)) return ConstraintKind::kExplicitTime;
  if (std::regex_search(l, ordinal)) return ConstraintKind::kOrdinal;
  if (std::regex_search(l, implicit_time)) return ConstraintKind::kImplicitTime;
  if (std::regex_search(l, type)) return ConstraintKind::kType;
  if (proper_noun_runs(text) >= 2) return ConstraintKind::kMultiEntity;
  return ConstraintKind::kUnclassified;
}

VerificationVerdict parse_verdict(std::string_view raw) {
  auto body = slice_between(raw, '{', '}');
  if (body.empty()) throw ParseError("no JSON object in verdict");

  nlohmann::json j = nlohmann::json::parse(body, nullptr, false);
  // Replies that copy the escaped exemplar form arrive wrapped in "{{ }}".
  if (j.is_discarded() && body.size() >= 4 && body.starts_with("{{") && body.ends_with("}}")) {
    j = nlohmann::json::parse(body.substr(1, body.size() - 2), nullptr, false);
  }
  if (j.is_discarded() || !j.is_object()) throw ParseError("verdict is not a JSON object");
  if (j.size() != 3 || !j.contains("answer") || !j.contains("sufficient") ||
      !j.contains("reason")) {
    throw ParseError("verdict must have exactly the keys answer, sufficient, reason");
  }

  VerificationVerdict v;
  if (!j["answer"].is_array()) throw ParseError("verdict 'answer' must be a list");
  for (const auto& a : j["answer"]) {
    if (!a.is_string()) throw ParseError("verdict 'answer' must contain strings");
    v.answers.push_back(a.get<std::string>());
  }
  if (!j["sufficient"].is_string()) throw ParseError("verdict 'sufficient' must be a string");
  const auto flag = lower(trim(j["sufficient"].get<std::string>()));
  if (flag == "yes") {
    v.sufficient = true;
  } else if (flag == "no") {
    v.sufficient = false;
  } else {
    throw ParseError("verdict 'sufficient' must be Yes or No");
  }
  if (!j["reason"].is_string()) throw ParseError("verdict 'reason' must be a string");
  v.reason = j["reason"].get<std::string>();
  if (v.sufficient && v.answers.empty()) throw ParseError("sufficient verdict without answers");
  return v;
}

std::optional<std::vector<std::string>> parse_constraint_list(std::string_view raw) {
  const auto body = slice_between(raw, '[', ']');
  if (body.empty()) return std::nullopt;
  const auto j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_array()) return std::nullopt;
  std::vector<std::string> out;
  for (const auto& item : j) {
    if (!item.is_string()) return std::nullopt;
    auto text = trim(item.get<std::string>());
    if (!text.empty()) out.push_back(std::move(text));
  }
  return out;
}

ConstraintSet extract_constraints(std::string_view question, Session& session,
                                  RetryBudget* budget, Warnings* warnings) {
  if (trim(question).empty()) throw PreconditionError("extract_constraints: empty question");
  RetryBudget local;
  if (!budget) budget = &local;

  const auto prompt =
      render_prompt(TemplateId::kConstraintExtraction, {{"question", std::string(question)}});
  auto parsed = parse_constraint_list(session.complete_prompt(kExtractionStage, prompt).content);
  if (!parsed && budget->take()) {
    parsed = parse_constraint_list(
        session.complete_prompt(kExtractionStage, prompt + std::string(kReask)).content);
  }
  ConstraintSet set;
  if (!parsed) {
    if (warnings) warnings->push_back("constraint list unparseable; continuing unconstrained");
    return set;
  }
  for (auto& text : *parsed) {
    const auto kind = classify_constraint(text);
    set.items.push_back({kind, std::move(text)});
  }
  return set;
}

std::string verification_prompt(const VerificationRequest& request) {
  if (!request.constraints || !request.relation_path) {
    throw PreconditionError("verification request needs constraints and a relation path");
  }
  const std::vector<std::string> paths{
      render_relation_path(request.start_entity, *request.relation_path)};
  const auto constraint_texts = request.constraints->texts();
  return render_prompt(TemplateId::kConstraintVerification,
                       {{"question", std::string(request.question)},
                        {"topic_entities", json_list(request.topic_entities)},
                        {"constraints", json_list(constraint_texts)},
                        {"reasoning_paths", json_list(paths)},
                        {"knowledge_triplets", format_knowledge_triplets(request.groundings)}});
}

VerificationVerdict verify_path(const VerificationRequest& request, Session& session,
                                RetryBudget* budget, Warnings* warnings) {
  RetryBudget local;
  if (!budget) budget = &local;
  const auto prompt = verification_prompt(request);

  std::string error;
  auto attempt = [&](const std::string& p) -> std::optional<VerificationVerdict> {
    try {
      return parse_verdict(session.complete_prompt(kVerificationStage, p).content);
    } catch (const ParseError& e) {
      error = e.what();
      return std::nullopt;
    }
  };
  auto verdict = attempt(prompt);
  if (!verdict && budget->take()) verdict = attempt(prompt + std::string(kReask));
  if (verdict) return *verdict;
  if (warnings) warnings->push_back("verdict unparseable: " + error);
  return {{}, false, std::string(kUnparseableVerdict)};
}

nlohmann::ordered_json constraint_statistics(std::span<const Question> questions,
                                             Session& session) {
  std::map<ConstraintKind, std::size_t> constraint_counts;
  std::map<ConstraintKind, std::size_t> question_counts;
  std::size_t unconstrained = 0;
  for (const auto& q : questions) {
    const auto set = extract_constraints(q.text, session);
    if (set.empty()) ++unconstrained;
    std::set<ConstraintKind> present;
    for (const auto& c : set.items) {
      ++constraint_counts[c.kind];
      present.insert(c.kind);
    }
    for (auto k : present) ++question_counts[k];
  }
  const double n = questions.empty() ? 1.0 : static_cast<double>(questions.size());
  nlohmann::ordered_json by_kind;
  auto emit = [&](ConstraintKind k) {
    by_kind[std::string(to_string(k))] = {
        {"constraints", constraint_counts[k]},
        {"questions", question_counts[k]},
        {"question_share", static_cast<double>(question_counts[k]) / n}};
  };
  for (auto k : kConstraintBase) emit(k);
  emit(ConstraintKind::kUnclassified);
  return {{"questions", questions.size()},
          {"unconstrained_questions", unconstrained},
          {"by_kind", by_kind},
          {"usage", session.usage().to_json()}};
}

}  // namespace kgr
