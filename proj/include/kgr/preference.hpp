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
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "kgr/path_extraction.hpp"
#include "kgr/relation_path.hpp"

namespace kgr {

enum class Origin { kGold, kTruncation, kEntitySwap, kRelationDelete };

std::string_view to_string(Origin origin);

struct PreferenceExample {
  std::string prompt;
  std::string completion;
  bool desirable = false;  // true iff origin == kGold
  Origin origin = Origin::kGold;
};

// ---------------------------------------------------------------------------
// Perturbations. Each returns nullopt when it does not apply.

/// Drops the final hop; paths of length <= 1 yield nullopt.
std::optional<RelationPath> perturb_truncate(const RelationPath& path);

/// Truncates every multi-hop path of every entity. nullopt when no path has
/// two or more hops.
std::optional<PathMapping> perturb_truncate(const PathMapping& mapping);

/// Exchanges the path sets of the first two entities (sorted by id).
std::optional<PathMapping> perturb_entity_swap(const PathMapping& mapping);

/// Removes the path set of one entity, picked with `rng`.
template <typename Rng>
std::optional<PathMapping> perturb_relation_delete(const PathMapping& mapping, Rng& rng) {
  if (mapping.size() < 2) return std::nullopt;
  auto out = mapping;
  const auto victim = static_cast<std::size_t>(rng() % mapping.size());
  out.erase(std::next(out.begin(), static_cast<std::ptrdiff_t>(victim)));
  return out;
}

// ---------------------------------------------------------------------------
// Dataset construction.

/// Per-example weighting and risk aversion of the KTO value function.
struct KtoConfig {
  double beta = 0.1;
  double lambda_p = 1.0;
  double lambda_n = 1.0;

  void validate() const;
};

/// Adapter hyperparameters carried as metadata alongside the dataset.
struct TrainingMetadata {
  int lora_rank = 16;
  int lora_alpha = 32;
  double lora_dropout = 0.1;
  std::vector<std::string> lora_targets{"q_proj", "k_proj", "v_proj", "o_proj"};
  double sft_learning_rate = 5e-5;
  double kto_learning_rate = 1e-5;
  double warmup_ratio = 0.1;
  int batch_size = 4;
};

struct PreferenceSummary {
  std::size_t questions = 0;
  std::size_t positives = 0;
  std::size_t negatives = 0;
  std::size_t truncation = 0;
  std::size_t entity_swap = 0;
  std::size_t relation_delete = 0;
  std::uint64_t seed = 0;
  KtoConfig kto;
  TrainingMetadata training;

  /// negatives / positives; 0 when there are no positives.
  double negatives_per_positive() const;
  nlohmann::ordered_json to_json() const;
};

/// Builds one positive per question (its full gold mapping) and one negative
/// per applicable perturbation. Records are grouped by question_id in
/// first-appearance order; flagged records contribute no paths.
std::vector<PreferenceExample> build_preference_examples(
    std::span<const WeakSupervisionRecord> records, std::uint64_t seed,
    PreferenceSummary* summary = nullptr);

/// Writes the examples as JSONL {"prompt", "completion", "label", "origin"}.
PreferenceSummary build_preference_dataset(std::span<const WeakSupervisionRecord> records,
                                           std::uint64_t seed, const std::filesystem::path& sink,
                                           const KtoConfig& kto = {});

void write_preference_examples(std::span<const PreferenceExample> examples, std::ostream& out);

// ---------------------------------------------------------------------------
// Reference objectives over supplied log-probabilities.

/// Conditional log-likelihood of a target sequence (to be maximized).
double sft_loss(std::span<const double> token_logprobs);

struct ScoredExample {
  double policy_logprob = 0;  // log pi_theta(y|x)
  double ref_logprob = 0;     // log pi_ref(y|x)
  bool desirable = false;
  // Log-probabilities of this prompt paired with another example's
  // completion; feed the reference-point estimate.
  std::optional<double> mismatched_policy_logprob;
  std::optional<double> mismatched_ref_logprob;

  double reward() const noexcept { return policy_logprob - ref_logprob; }
};

struct KtoResult {
  double loss = 0;
  std::vector<double> per_example;
  double z0 = 0;
};

double logistic(double x) noexcept;

/// max(0, mean mismatched reward). Requires every example to carry
/// mismatched log-probabilities; otherwise returns 0 and logs a warning.
double estimate_reference_point(std::span<const ScoredExample> batch);

/// Mean of lambda_y - v(x, y). `z0_override` bypasses the estimator.
KtoResult kto_loss(std::span<const ScoredExample> batch, const KtoConfig& cfg,
                   std::optional<double> z0_override = std::nullopt);

}  // namespace kgr
