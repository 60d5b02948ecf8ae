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

#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kgr/knowledge_graph.hpp"
#include "kgr/relation_path.hpp"

namespace kgr {

/// A relation path grounded in the graph: e0 -r1-> e1 ... -rl-> el.
struct ReasoningPath {
  std::vector<std::string> entities;   // size l + 1
  std::vector<std::string> relations;  // size l

  auto operator<=>(const ReasoningPath&) const = default;
};

/// "e0 -> r1 -> e1 -> ...".
std::string to_string(const ReasoningPath& path);

/// True when every hop is a triple of `g`.
bool validate(const ReasoningPath& path, const KnowledgeGraph& g);

inline constexpr int kDefaultInstantiationCap = 32;

/// Up to `cap` complete groundings of `path` from `start`, in lexicographic
/// order of their entity sequences. Partial groundings are discarded.
std::vector<ReasoningPath> instantiate_path(const KnowledgeGraph& g, std::string_view start,
                                            const RelationPath& path,
                                            int cap = kDefaultInstantiationCap);

/// Up to `limit` distinct relation sequences realizable from `start` with
/// 1..max_len hops; shorter first, then lexicographic by relation names.
std::vector<RelationPath> enumerate_candidate_paths(const KnowledgeGraph& g,
                                                    std::string_view start, int max_len,
                                                    int limit);

struct Candidate {
  std::string topic_entity;
  RelationPath path;

  auto operator<=>(const Candidate&) const = default;
};

/// Merged candidate relation paths of all topic entities plus the set of
/// candidates already tried. Owned by one reasoning session.
class CandidatePool {
 public:
  CandidatePool() = default;
  explicit CandidatePool(std::vector<Candidate> candidates);

  std::size_t size() const noexcept { return candidates_.size(); }
  bool empty() const noexcept { return candidates_.empty(); }
  const Candidate& operator[](std::size_t i) const { return candidates_.at(i); }
  const std::vector<Candidate>& candidates() const noexcept { return candidates_; }
  const std::set<std::size_t>& consumed() const noexcept { return consumed_; }

  bool is_consumed(std::size_t i) const { return consumed_.contains(i); }
  /// Throws PreconditionError for an invalid or already consumed index.
  void consume(std::size_t i);

  /// Unconsumed indices in pool order.
  std::vector<std::size_t> remaining() const;
  std::size_t remaining_count() const noexcept { return candidates_.size() - consumed_.size(); }

 private:
  std::vector<Candidate> candidates_;
  std::set<std::size_t> consumed_;
};

using PerEntityCandidates = std::vector<std::pair<std::string, std::vector<RelationPath>>>;

/// Round-robin interleave across entities, keeping each entity's order and
/// dropping repeated (entity, path) pairs.
CandidatePool merge_candidate_pools(const PerEntityCandidates& per_entity);

/// "A -> r1 -> Unknown Entity -> r2 -> Unknown Entity", the prompt form of a
/// relation path that has not been grounded.
std::string render_relation_path(std::string_view start, const RelationPath& path);

/// JSON list of groundings, each a list of [head, relation, tail] triples.
std::string format_knowledge_triplets(std::span<const ReasoningPath> groundings);

}  // namespace kgr
