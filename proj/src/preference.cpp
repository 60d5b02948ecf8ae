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

#include "kgr/preference.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <ostream>
#include <random>

#include <spdlog/spdlog.h>

#include "kgr/error.hpp"

namespace kgr {

std::string_view to_string(Origin origin) {
  switch (origin) {
    case Origin::kGold:
      return "gold";
    case Origin::kTruncation:
      return "truncation";
    case Origin::kEntitySwap:
      return "entity_swap";
    case Origin::kRelationDelete:
      return "relation_delete";
  }
  return "unknown";
}

std::optional<RelationPath> perturb_truncate(const RelationPath& path) {
  if (path.size() < 2) return std::nullopt;
  RelationPath out = path;
  out.relations.pop_back();
  return out;
}

std::optional<PathMapping> perturb_truncate(const PathMapping& mapping) {
  PathMapping out;
  bool changed = false;
  for (const auto& [entity, paths] : mapping) {
    auto& dst = out[entity];
    for (const auto& p : paths) {
      if (auto cut = perturb_truncate(p)) {
        dst.insert(std::move(*cut));
        changed = true;
      } else {
        dst.insert(p);
      }
    }
  }
  if (!changed) return std::nullopt;
  return out;
}

std::optional<PathMapping> perturb_entity_swap(const PathMapping& mapping) {
  if (mapping.size() < 2) return std::nullopt;
  auto out = mapping;
  auto first = out.begin();
  auto second = std::next(first);
  std::swap(first->second, second->second);
  return out;
}

void KtoConfig::validate() const {
  if (!(beta > 0) || !(lambda_p > 0) || !(lambda_n > 0)) {
    throw PreconditionError("KTO config requires beta, lambda_p, lambda_n > 0");
  }
}

double PreferenceSummary::negatives_per_positive() const {
  return positives == 0 ? 0.0 : static_cast<double>(negatives) / static_cast<double>(positives);
}

nlohmann::ordered_json PreferenceSummary::to_json() const {
  nlohmann::ordered_json j;
  j["questions"] = questions;
  j["positives"] = positives;
  j["negatives"] = negatives;
  j["ratio"] = std::to_string(positives) + ":" + std::to_string(negatives);
  j["negatives_per_positive"] = negatives_per_positive();
  j["by_origin"] = {{"gold", positives},
                    {"truncation", truncation},
                    {"entity_swap", entity_swap},
                    {"relation_delete", relation_delete}};
  j["seed"] = seed;
  j["kto"] = {{"beta", kto.beta}, {"lambda_p", kto.lambda_p}, {"lambda_n", kto.lambda_n}};
  j["training"] = {{"lora_rank", training.lora_rank},
                   {"lora_alpha", training.lora_alpha},
                   {"lora_dropout", training.lora_dropout},
                   {"lora_targets", training.lora_targets},
                   {"sft_learning_rate", training.sft_learning_rate},
                   {"kto_learning_rate", training.kto_learning_rate},
                   {"warmup_ratio", training.warmup_ratio},
                   {"batch_size", training.batch_size}};
  return j;
}

std::vector<PreferenceExample> build_preference_examples(
    std::span<const WeakSupervisionRecord> records, std::uint64_t seed,
    PreferenceSummary* summary) {
  struct Group {
    std::string question;
    std::vector<std::string> topics;
    PathMapping gold;
  };
  std::vector<std::string> order;
  std::map<std::string, Group> groups;
  for (const auto& rec : records) {
    auto [it, inserted] = groups.try_emplace(rec.question_id);
    if (inserted) {
      order.push_back(rec.question_id);
      it->second.question = rec.question;
    }
    it->second.topics.push_back(rec.topic_entity);
    if (!rec.flagged()) it->second.gold[rec.topic_entity] = rec.gold_paths;
  }

  PreferenceSummary local;
  auto& s = summary ? *summary : local;
  s.seed = seed;
  std::mt19937_64 rng(seed);
  std::vector<PreferenceExample> out;

  for (const auto& id : order) {
    const auto& group = groups.at(id);
    if (group.gold.empty()) continue;
    ++s.questions;
    const auto prompt = path_generation_prompt(group.question, group.topics);
    const auto positive = to_string(group.gold);
    out.push_back({prompt, positive, true, Origin::kGold});
    ++s.positives;

    auto add_negative = [&](const std::optional<PathMapping>& mapping, Origin origin,
                            std::size_t& counter) {
      if (!mapping) return;
      auto completion = to_string(*mapping);
      // A negative identical to the positive would contradict it.
      if (completion.empty() || completion == positive) return;
      out.push_back({prompt, std::move(completion), false, origin});
      ++s.negatives;
      ++counter;
    };
    add_negative(perturb_truncate(group.gold), Origin::kTruncation, s.truncation);
    add_negative(perturb_entity_swap(group.gold), Origin::kEntitySwap, s.entity_swap);
    add_negative(perturb_relation_delete(group.gold, rng), Origin::kRelationDelete,
                 s.relation_delete);
  }
  return out;
}

void write_preference_examples(std::span<const PreferenceExample> examples, std::ostream& out) {
  for (const auto& ex : examples) {
    nlohmann::ordered_json j{{"prompt", ex.prompt},
                             {"completion", ex.completion},
                             {"label", ex.desirable},
                             {"origin", to_string(ex.origin)}};
    out << j.dump() << '\n';
  }
  if (!out) throw IoError("write failure while emitting preference dataset");
}

PreferenceSummary build_preference_dataset(std::span<const WeakSupervisionRecord> records,
                                           std::uint64_t seed, const std::filesystem::path& sink,
                                           const KtoConfig& kto) {
  kto.validate();
  PreferenceSummary summary;
  summary.kto = kto;
  const auto examples = build_preference_examples(records, seed, &summary);
  std::ofstream out(sink, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + sink.string());
  write_preference_examples(examples, out);
  return summary;
}

double sft_loss(std::span<const double> token_logprobs) {
  if (token_logprobs.empty()) {
    spdlog::warn("sft_loss: empty token sequence, objective is 0");
    return 0.0;
  }
  return std::accumulate(token_logprobs.begin(), token_logprobs.end(), 0.0);
}

double logistic(double x) noexcept {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double estimate_reference_point(std::span<const ScoredExample> batch) {
  if (batch.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& ex : batch) {
    if (!ex.mismatched_policy_logprob || !ex.mismatched_ref_logprob) {
      spdlog::warn("kto_loss: mismatched log-probabilities missing, reference point set to 0");
      return 0.0;
    }
    sum += *ex.mismatched_policy_logprob - *ex.mismatched_ref_logprob;
  }
  return std::max(0.0, sum / static_cast<double>(batch.size()));
}

KtoResult kto_loss(std::span<const ScoredExample> batch, const KtoConfig& cfg,
                   std::optional<double> z0_override) {
  if (batch.empty()) throw PreconditionError("kto_loss: empty batch");
  cfg.validate();
  KtoResult result;
  result.z0 = z0_override ? *z0_override : estimate_reference_point(batch);
  result.per_example.reserve(batch.size());
  double total = 0.0;
  for (const auto& ex : batch) {
    if (ex.policy_logprob > 0 || ex.ref_logprob > 0) {
      spdlog::warn("kto_loss: positive log-probability in batch");
    }
    const double r = ex.reward();
    // lambda_y - lambda_y * sigma(x) == lambda_y * sigma(-x), without cancellation.
    const double loss = ex.desirable ? cfg.lambda_p * logistic(cfg.beta * (result.z0 - r))
                                     : cfg.lambda_n * logistic(cfg.beta * (r - result.z0));
    result.per_example.push_back(loss);
    total += loss;
  }
  result.loss = total / static_cast<double>(batch.size());
  return result;
}

}  // namespace kgr
