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

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include <json.hpp>

#include "kgr/error.hpp"
#include "kgr/preference.hpp"
#include "oracles.hpp"

using namespace kgr;

namespace {

RelationPath rp(std::vector<std::string> rels) { return RelationPath{std::move(rels)}; }

WeakSupervisionRecord record(const std::string& qid, const std::string& topic,
                             std::set<RelationPath> paths) {
  WeakSupervisionRecord r;
  r.question_id = qid;
  r.question = "question " + qid;
  r.topic_entity = topic;
  r.answer_entities = {"ans"};
  r.gold_paths = std::move(paths);
  return r;
}

double sigma(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

TEST_SUITE("preference") {
  TEST_CASE("truncation") {
    CHECK(perturb_truncate(rp({"directed", "won_award"})) == rp({"directed"}));
    CHECK_FALSE(perturb_truncate(rp({"r1"})).has_value());
    CHECK_FALSE(perturb_truncate(RelationPath{}).has_value());

    const PathMapping m{{"A", {rp({"a", "b"}), rp({"c"})}}, {"B", {rp({"d", "e", "f"})}}};
    const auto t = perturb_truncate(m);
    REQUIRE(t);
    CHECK(t->at("A") == std::set<RelationPath>{rp({"a"}), rp({"c"})});
    CHECK(t->at("B") == std::set<RelationPath>{rp({"d", "e"})});
    CHECK_FALSE(perturb_truncate(PathMapping{{"A", {rp({"x"})}}}).has_value());
  }

  TEST_CASE("entity swap") {
    const PathMapping m{{"A", {rp({"p1"})}}, {"B", {rp({"p2"})}}};
    const PathMapping swapped{{"A", {rp({"p2"})}}, {"B", {rp({"p1"})}}};
    CHECK(perturb_entity_swap(m) == swapped);
    CHECK(perturb_entity_swap(swapped) == m);
    CHECK_FALSE(perturb_entity_swap(PathMapping{{"A", {rp({"p1"})}}}).has_value());
  }

  TEST_CASE("relation delete is deterministic per seed") {
    const PathMapping m{{"A", {rp({"p1"})}}, {"B", {rp({"p2"})}}};
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      std::mt19937_64 r1(seed), r2(seed);
      const auto a = perturb_relation_delete(m, r1);
      const auto b = perturb_relation_delete(m, r2);
      REQUIRE(a);
      CHECK(a == b);
      CHECK(a->size() == 1);
      CHECK((*a == PathMapping{{"A", {rp({"p1"})}}} || *a == PathMapping{{"B", {rp({"p2"})}}}));
    }
    std::mt19937_64 r(1);
    CHECK_FALSE(perturb_relation_delete(PathMapping{{"A", {rp({"p1"})}}}, r).has_value());
  }

  TEST_CASE("multi-entity question yields one positive and three negatives") {
    const std::vector<WeakSupervisionRecord> recs{
        record("q1", "A", {rp({"a", "b"})}), record("q1", "B", {rp({"c", "d"})})};
    PreferenceSummary s;
    const auto ex = build_preference_examples(recs, 5, &s);
    REQUIRE(ex.size() == 4);
    CHECK(ex[0].desirable);
    CHECK(ex[0].origin == Origin::kGold);
    CHECK(ex[0].completion == "A: a -> b ; B: c -> d");
    CHECK(ex[0].prompt.find("['A', 'B']") != std::string::npos);
    CHECK(ex[1].origin == Origin::kTruncation);
    CHECK(ex[2].origin == Origin::kEntitySwap);
    CHECK(ex[3].origin == Origin::kRelationDelete);
    for (std::size_t i = 1; i < 4; ++i) {
      CHECK_FALSE(ex[i].desirable);
      CHECK(ex[i].completion != ex[0].completion);
    }
    CHECK(s.positives == 1);
    CHECK(s.negatives == 3);
    CHECK(s.negatives_per_positive() == 3.0);
  }

  TEST_CASE("single-entity one-hop question yields no negatives") {
    const std::vector<WeakSupervisionRecord> recs{record("q1", "A", {rp({"a"})})};
    PreferenceSummary s;
    const auto ex = build_preference_examples(recs, 5, &s);
    CHECK(ex.size() == 1);
    CHECK(s.negatives == 0);
  }

  TEST_CASE("swap with identical path sets is dropped") {
    const std::vector<WeakSupervisionRecord> recs{record("q1", "A", {rp({"a"})}),
                                                  record("q1", "B", {rp({"a"})})};
    PreferenceSummary s;
    build_preference_examples(recs, 5, &s);
    CHECK(s.entity_swap == 0);
    CHECK(s.relation_delete == 1);
  }

  TEST_CASE("flagged records add no paths") {
    auto flagged = record("q1", "B", {});
    flagged.status = RecordStatus::kUnlinked;
    const std::vector<WeakSupervisionRecord> recs{record("q1", "A", {rp({"a", "b"})}), flagged,
                                                  [] {
                                                    auto r = record("q2", "C", {});
                                                    r.status = RecordStatus::kNoPath;
                                                    return r;
                                                  }()};
    PreferenceSummary s;
    const auto ex = build_preference_examples(recs, 5, &s);
    CHECK(s.questions == 1);
    CHECK(ex.size() == 2);
  }

  TEST_CASE("corpus ratio matches a re-read of the emitted file") {
    std::mt19937_64 rng(8);
    std::vector<WeakSupervisionRecord> recs;
    for (int q = 0; q < 60; ++q) {
      const int n = 1 + static_cast<int>(rng() % 3);
      for (int e = 0; e < n; ++e) {
        std::set<RelationPath> paths;
        const int len = 1 + static_cast<int>(rng() % 3);
        RelationPath p;
        for (int i = 0; i < len; ++i) p.relations.push_back("r" + std::to_string(rng() % 4));
        paths.insert(p);
        recs.push_back(record("q" + std::to_string(q), "E" + std::to_string(e), paths));
      }
    }
    const auto path = std::filesystem::temp_directory_path() / "kgr_prefs_test.jsonl";
    const auto s = build_preference_dataset(recs, 42, path);
    std::ifstream in(path);
    std::size_t pos = 0, neg = 0;
    for (std::string line; std::getline(in, line);) {
      const auto j = nlohmann::json::parse(line);
      REQUIRE(j.size() == 4);
      (j["label"].get<bool>() ? pos : neg) += 1;
      CHECK((j["label"].get<bool>() == (j["origin"] == "gold")));
    }
    CHECK(pos == s.positives);
    CHECK(neg == s.negatives);
    CHECK(s.to_json()["ratio"] == std::to_string(pos) + ":" + std::to_string(neg));
    std::filesystem::remove(path);

    // Same seed, same bytes.
    std::ostringstream a, b;
    write_preference_examples(build_preference_examples(recs, 42), a);
    write_preference_examples(build_preference_examples(recs, 42), b);
    CHECK(a.str() == b.str());
  }

  TEST_CASE("summary carries training metadata") {
    const auto j = PreferenceSummary{}.to_json();
    CHECK(j["kto"]["beta"] == 0.1);
    CHECK(j["training"]["lora_rank"] == 16);
    CHECK(j["training"]["lora_alpha"] == 32);
  }

  TEST_CASE("SFT objective") {
    CHECK(sft_loss(std::vector<double>{0, 0, 0}) == 0.0);
    CHECK(sft_loss(std::vector<double>{-1.0, -0.5}) == -1.5);
    CHECK(sft_loss(std::vector<double>{}) == 0.0);
    std::mt19937_64 rng(2);
    for (int t = 0; t < 100; ++t) {
      std::vector<double> xs(1 + rng() % 40);
      for (auto& x : xs) x = -std::uniform_real_distribution<double>(0, 10)(rng);
      double fold = 0;
      for (double x : xs) fold = fold + x;
      CHECK(sft_loss(xs) == doctest::Approx(fold).epsilon(1e-15));
      CHECK(std::abs(sft_loss(xs) - testing::long_sum(xs)) <= 1e-12);
    }
  }

  TEST_CASE("KTO defaults and validation") {
    const KtoConfig cfg;
    CHECK(cfg.beta == 0.1);
    CHECK(cfg.lambda_p == 1.0);
    CHECK(cfg.lambda_n == 1.0);
    CHECK_THROWS_AS((KtoConfig{0.0, 1, 1}.validate()), PreconditionError);
    CHECK_THROWS_AS(kto_loss(std::vector<ScoredExample>{}, cfg), PreconditionError);
  }

  TEST_CASE("KTO at the reference point is one half") {
    std::vector<ScoredExample> batch{{-1.0, -1.0, true}, {-3.0, -3.0, false}};
    const auto r = kto_loss(batch, KtoConfig{}, 0.0);
    for (double l : r.per_example) CHECK(std::abs(l - 0.5) <= 1e-12);
  }

  TEST_CASE("KTO hand example with z0 forced to zero") {
    std::vector<ScoredExample> batch{{-1.0, -1.2, true}, {-2.0, -1.0, false}};
    const auto r = kto_loss(batch, KtoConfig{}, 0.0);
    REQUIRE(r.per_example.size() == 2);
    CHECK(std::abs(r.per_example[0] - (1 - sigma(0.1 * 0.2))) <= 1e-12);
    CHECK(std::abs(r.per_example[1] - (1 - sigma(0.1 * 1.0))) <= 1e-12);
    CHECK(std::abs(r.loss - (r.per_example[0] + r.per_example[1]) / 2) <= 1e-15);
    CHECK(r.z0 == 0.0);
  }

  TEST_CASE("reference point estimate") {
    ScoredExample a{-1, -1, true, -2.0, -3.0};
    ScoredExample b{-1, -1, false, -4.0, -4.5};
    CHECK(estimate_reference_point(std::vector{a, b}) == doctest::Approx(0.75));
    ScoredExample c{-1, -1, true, -5.0, -1.0};
    CHECK(estimate_reference_point(std::vector{c}) == 0.0);
    ScoredExample d{-1, -1, true};
    CHECK(estimate_reference_point(std::vector{a, d}) == 0.0);
  }

  TEST_CASE("KTO agrees with the scalar oracle and stays finite") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> lp(-60, 0);
    for (int t = 0; t < 50; ++t) {
      KtoConfig cfg{std::uniform_real_distribution<double>(0.01, 2)(rng), 1.3, 0.7};
      std::vector<ScoredExample> batch;
      for (int i = 0; i < 8; ++i) batch.push_back({lp(rng), lp(rng), rng() % 2 == 0});
      const double z0 = std::uniform_real_distribution<double>(0, 3)(rng);
      const auto r = kto_loss(batch, cfg, z0);
      CHECK(std::abs(r.loss - testing::kto_batch_oracle(batch, cfg, z0)) <= 1e-9);
      for (double l : r.per_example) {
        CHECK(std::isfinite(l));
        CHECK(l >= 0);
      }
    }
    // Extreme rewards saturate instead of overflowing.
    const auto big = kto_loss(std::vector<ScoredExample>{{0, -1e6, true}, {0, -1e6, false}},
                              KtoConfig{1.0, 1, 1}, 0.0);
    CHECK(big.per_example[0] == doctest::Approx(0.0));
    CHECK(big.per_example[1] == doctest::Approx(1.0));
  }
}
