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

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "kgr/instantiation.hpp"
#include "kgr/llm_gateway.hpp"
#include "kgr/path_extraction.hpp"

namespace kgr {

/// The five predefined constraint categories, plus a bucket for extracted
/// text the keyword table cannot place.
enum class ConstraintKind {
  kType,
  kMultiEntity,
  kExplicitTime,
  kImplicitTime,
  kOrdinal,
  kUnclassified,
};

inline constexpr std::array<ConstraintKind, 5> kConstraintBase{
    ConstraintKind::kType, ConstraintKind::kMultiEntity, ConstraintKind::kExplicitTime,
    ConstraintKind::kImplicitTime, ConstraintKind::kOrdinal};

std::string_view to_string(ConstraintKind kind);

struct Constraint {
  ConstraintKind kind = ConstraintKind::kUnclassified;
  std::string text;

  bool operator==(const Constraint&) const = default;
};

struct ConstraintSet {
  std::vector<Constraint> items;

  bool empty() const noexcept { return items.empty(); }
  std::vector<std::string> texts() const;
};

/// Keyword heuristics; used for reporting only, never to gate reasoning.
ConstraintKind classify_constraint(std::string_view text);

/// Parsed verifier reply.
struct VerificationVerdict {
  std::vector<std::string> answers;  // most likely first
  bool sufficient = false;
  std::string reason;

  /// 1 when the grounded path satisfies the constraints, else 0.
  int judgment() const noexcept { return sufficient ? 1 : 0; }
  bool operator==(const VerificationVerdict&) const = default;
};

inline constexpr std::string_view kUnparseableVerdict = "unparseable verdict";

/// Strict parse of {"answer": [...], "sufficient": "Yes"|"No", "reason": "..."}.
/// Prose around the outermost braces is ignored. Throws ParseError.
VerificationVerdict parse_verdict(std::string_view raw);

/// Parses a JSON list of strings (prose around the brackets ignored); empty
/// strings are dropped. nullopt when no list can be read.
std::optional<std::vector<std::string>> parse_constraint_list(std::string_view raw);

/// Re-asks allowed after an unparseable reply. Shared across the calls of one
/// question so the per-question call bound holds.
struct RetryBudget {
  int remaining = 1;

  bool take() noexcept {
    if (remaining <= 0) return false;
    --remaining;
    return true;
  }
};

/// Notes about recoverable problems, surfaced in traces.
using Warnings = std::vector<std::string>;

ConstraintSet extract_constraints(std::string_view question, Session& session,
                                  RetryBudget* budget = nullptr, Warnings* warnings = nullptr);

struct VerificationRequest {
  std::string_view question;
  std::span<const std::string> topic_entities;
  const ConstraintSet* constraints = nullptr;
  std::string_view start_entity;
  const RelationPath* relation_path = nullptr;
  std::span<const ReasoningPath> groundings;
};

std::string verification_prompt(const VerificationRequest& request);

/// One verifier call (plus at most one re-ask). Fails closed: an unparseable
/// reply yields an insufficient verdict with reason kUnparseableVerdict.
VerificationVerdict verify_path(const VerificationRequest& request, Session& session,
                                RetryBudget* budget = nullptr, Warnings* warnings = nullptr);

/// Per-kind counts of extracted constraints over a question sample.
nlohmann::ordered_json constraint_statistics(std::span<const Question> questions,
                                             Session& session);

}  // namespace kgr
