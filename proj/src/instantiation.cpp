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

#include "kgr/instantiation.hpp"

#include <algorithm>
#include <map>

#include <json.hpp>

#include "kgr/error.hpp"

namespace kgr {

namespace {

constexpr std::string_view kUnknownEntity = "Unknown Entity";

void ground(const KnowledgeGraph& g, EntityId node, std::span<const RelationId> rest,
            std::vector<EntityId>& trail, std::vector<std::vector<EntityId>>& out,
            std::size_t cap) {
  if (out.size() >= cap) return;
  if (rest.empty()) {
    out.push_back(trail);
    return;
  }
  for (const auto& arc : g.out_arcs(node, rest.front())) {
    trail.push_back(arc.tail);
    ground(g, arc.tail, rest.subspan(1), trail, out, cap);
    trail.pop_back();
    if (out.size() >= cap) return;
  }
}

}  // namespace

std::string to_string(const ReasoningPath& path) {
  std::string out;
  for (std::size_t i = 0; i < path.entities.size(); ++i) {
    if (i) {
      out += kArrow;
      out += path.relations.at(i - 1);
      out += kArrow;
    }
    out += path.entities[i];
  }
  return out;
}

bool validate(const ReasoningPath& path, const KnowledgeGraph& g) {
  if (path.entities.size() != path.relations.size() + 1) return false;
  if (!g.has_entity(path.entities.front())) return false;
  for (std::size_t i = 0; i < path.relations.size(); ++i) {
    if (!g.contains({path.entities[i], path.relations[i], path.entities[i + 1]})) return false;
  }
  return true;
}

std::vector<ReasoningPath> instantiate_path(const KnowledgeGraph& g, std::string_view start,
                                            const RelationPath& path, int cap) {
  if (cap < 1) throw PreconditionError("instantiate_path: cap must be >= 1");
  std::vector<ReasoningPath> result;
  const auto s = g.find_entity(start);
  if (!s) return result;

  std::vector<RelationId> rels;
  for (const auto& name : path.relations) {
    auto r = g.find_relation(name);
    if (!r) return result;
    rels.push_back(*r);
  }
  std::vector<EntityId> trail{*s};
  std::vector<std::vector<EntityId>> found;
  // Arcs within one relation run are tail-sorted and ids follow name order,
  // so depth-first order is lexicographic order of entity sequences.
  ground(g, *s, rels, trail, found, static_cast<std::size_t>(cap));

  result.reserve(found.size());
  for (const auto& seq : found) {
    ReasoningPath rp;
    rp.relations = path.relations;
    for (auto e : seq) rp.entities.push_back(g.entity_name(e));
    result.push_back(std::move(rp));
  }
  return result;
}

std::vector<RelationPath> enumerate_candidate_paths(const KnowledgeGraph& g,
                                                    std::string_view start, int max_len,
                                                    int limit) {
  if (max_len < 1) throw PreconditionError("enumerate_candidate_paths: max_len must be >= 1");
  std::vector<RelationPath> out;
  const auto s = g.find_entity(start);
  if (!s || limit < 1) return out;

  using Seq = std::vector<RelationId>;
  std::map<Seq, std::set<EntityId>> level{{Seq{}, {*s}}};
  for (int len = 1; len <= max_len && !level.empty(); ++len) {
    std::map<Seq, std::set<EntityId>> next;
    for (const auto& [seq, frontier] : level) {
      for (auto e : frontier) {
        for (const auto& arc : g.out_arcs(e)) {
          Seq extended = seq;
          extended.push_back(arc.relation);
          next[std::move(extended)].insert(arc.tail);
        }
      }
    }
    for (const auto& [seq, ignored] : next) {
      RelationPath p;
      for (auto r : seq) p.relations.push_back(g.relation_name(r));
      out.push_back(std::move(p));
      if (out.size() >= static_cast<std::size_t>(limit)) return out;
    }
    level = std::move(next);
  }
  return out;
}

CandidatePool::CandidatePool(std::vector<Candidate> candidates)
    : candidates_(std::move(candidates)) {}

void CandidatePool::consume(std::size_t i) {
  if (i >= candidates_.size()) throw PreconditionError("candidate index out of range");
  if (!consumed_.insert(i).second) throw PreconditionError("candidate already consumed");
}

std::vector<std::size_t> CandidatePool::remaining() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < candidates_.size(); ++i) {
    if (!consumed_.contains(i)) out.push_back(i);
  }
  return out;
}

CandidatePool merge_candidate_pools(const PerEntityCandidates& per_entity) {
  std::vector<Candidate> merged;
  std::set<Candidate> seen;
  std::size_t longest = 0;
  for (const auto& [entity, paths] : per_entity) longest = std::max(longest, paths.size());
  for (std::size_t round = 0; round < longest; ++round) {
    for (const auto& [entity, paths] : per_entity) {
      if (round >= paths.size()) continue;
      Candidate c{entity, paths[round]};
      if (seen.insert(c).second) merged.push_back(std::move(c));
    }
  }
  return CandidatePool(std::move(merged));
}

std::string render_relation_path(std::string_view start, const RelationPath& path) {
  std::string out(start);
  for (const auto& r : path.relations) {
    out += kArrow;
    out += r;
    out += kArrow;
    out += kUnknownEntity;
  }
  return out;
}

std::string format_knowledge_triplets(std::span<const ReasoningPath> groundings) {
  auto quoted = [](const std::string& s) { return nlohmann::json(s).dump(); };
  std::string out = "[[";
  for (std::size_t i = 0; i < groundings.size(); ++i) {
    if (i) out += ",";
    const auto& rp = groundings[i];
    out += "[";
    for (std::size_t h = 0; h < rp.relations.size(); ++h) {
      if (h) out += ", ";
      out += "[" + quoted(rp.entities[h]) + ", " + quoted(rp.relations[h]) + ", " +
             quoted(rp.entities[h + 1]) + "]";
    }
    out += "]";
  }
  return out + "]]";
}

}  // namespace kgr
