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

#include "kgr/knowledge_graph.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <istream>
#include <ostream>

#include "kgr/error.hpp"

namespace kgr {

namespace {

std::size_t as_index(EntityId e) { return static_cast<std::size_t>(e); }
std::size_t as_index(RelationId r) { return static_cast<std::size_t>(r); }

std::vector<std::string> sorted_unique(std::vector<std::string> names) {
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  return names;
}

}  // namespace

KnowledgeGraph KnowledgeGraph::from_triples(
    std::vector<Triple> triples, const std::unordered_map<std::string, std::string>& labels) {
  for (const auto& t : triples) {
    if (t.head.empty() || t.relation.empty() || t.tail.empty()) {
      throw PreconditionError("triple with an empty component");
    }
  }
  std::sort(triples.begin(), triples.end());
  triples.erase(std::unique(triples.begin(), triples.end()), triples.end());

  KnowledgeGraph g;
  std::vector<std::string> entities;
  std::vector<std::string> relations;
  entities.reserve(triples.size() * 2);
  relations.reserve(triples.size());
  for (const auto& t : triples) {
    entities.push_back(t.head);
    entities.push_back(t.tail);
    relations.push_back(t.relation);
  }
  g.entity_names_ = sorted_unique(std::move(entities));
  g.relation_names_ = sorted_unique(std::move(relations));
  for (std::size_t i = 0; i < g.entity_names_.size(); ++i) {
    g.entity_index_.emplace(g.entity_names_[i], EntityId(static_cast<std::uint32_t>(i)));
  }
  for (std::size_t i = 0; i < g.relation_names_.size(); ++i) {
    g.relation_index_.emplace(g.relation_names_[i], RelationId(static_cast<std::uint32_t>(i)));
  }
  g.entity_labels_.resize(g.entity_names_.size());
  for (const auto& [id, label] : labels) {
    if (auto e = g.find_entity(id)) g.entity_labels_[as_index(*e)] = label;
  }

  // Triples are sorted by head name, and ids follow name order, so a single
  // pass produces the CSR layout with each run already sorted by (relation, tail).
  g.offsets_.assign(g.entity_names_.size() + 1, 0);
  g.arcs_.reserve(triples.size());
  for (const auto& t : triples) {
    const auto h = g.entity_index_.at(t.head);
    g.arcs_.push_back({g.relation_index_.at(t.relation), g.entity_index_.at(t.tail)});
    ++g.offsets_[as_index(h) + 1];
  }
  for (std::size_t i = 1; i < g.offsets_.size(); ++i) g.offsets_[i] += g.offsets_[i - 1];
  g.triple_count_ = triples.size();
  return g;
}

std::optional<EntityId> KnowledgeGraph::find_entity(std::string_view id) const {
  auto it = entity_index_.find(std::string(id));
  if (it == entity_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<RelationId> KnowledgeGraph::find_relation(std::string_view name) const {
  auto it = relation_index_.find(std::string(name));
  if (it == relation_index_.end()) return std::nullopt;
  return it->second;
}

const std::string& KnowledgeGraph::entity_name(EntityId e) const {
  return entity_names_.at(as_index(e));
}

const std::string& KnowledgeGraph::relation_name(RelationId r) const {
  return relation_names_.at(as_index(r));
}

Entity KnowledgeGraph::entity(EntityId e) const {
  return {entity_names_.at(as_index(e)), entity_labels_.at(as_index(e))};
}

std::span<const Arc> KnowledgeGraph::out_arcs(EntityId e) const {
  const auto i = as_index(e);
  if (i + 1 >= offsets_.size()) return {};
  return std::span<const Arc>(arcs_).subspan(offsets_[i], offsets_[i + 1] - offsets_[i]);
}

std::span<const Arc> KnowledgeGraph::out_arcs(EntityId e, RelationId r) const {
  const auto all = out_arcs(e);
  auto lo = std::lower_bound(all.begin(), all.end(), r,
                             [](const Arc& a, RelationId rel) { return a.relation < rel; });
  auto hi = std::upper_bound(lo, all.end(), r,
                             [](RelationId rel, const Arc& a) { return rel < a.relation; });
  return {lo, hi};
}

std::vector<std::pair<std::string, std::string>> KnowledgeGraph::neighbors(
    std::string_view id) const {
  std::vector<std::pair<std::string, std::string>> out;
  auto e = find_entity(id);
  if (!e) return out;
  for (const auto& arc : out_arcs(*e)) {
    out.emplace_back(relation_name(arc.relation), entity_name(arc.tail));
  }
  return out;
}

bool KnowledgeGraph::contains(const Triple& t) const {
  auto h = find_entity(t.head);
  auto r = find_relation(t.relation);
  auto tail = find_entity(t.tail);
  if (!h || !r || !tail) return false;
  const auto run = out_arcs(*h, *r);
  return std::binary_search(run.begin(), run.end(), Arc{*r, *tail});
}

std::vector<Triple> KnowledgeGraph::triples() const {
  std::vector<Triple> out;
  out.reserve(triple_count_);
  for (std::size_t h = 0; h < entity_names_.size(); ++h) {
    for (const auto& arc : out_arcs(EntityId(static_cast<std::uint32_t>(h)))) {
      out.push_back({entity_names_[h], relation_name(arc.relation), entity_name(arc.tail)});
    }
  }
  return out;
}

bool KnowledgeGraph::operator==(const KnowledgeGraph& other) const {
  return entity_names_ == other.entity_names_ && relation_names_ == other.relation_names_ &&
         offsets_ == other.offsets_ && arcs_ == other.arcs_;
}

KnowledgeGraph parse_graph(std::istream& in, const LoadOptions& options) {
  std::vector<Triple> triples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos || line.front() == '#') continue;
    const auto first = line.find('\t');
    const auto second = first == std::string::npos ? first : line.find('\t', first + 1);
    if (second == std::string::npos || line.find('\t', second + 1) != std::string::npos) {
      throw ParseError("expected exactly three tab-separated fields", line_no);
    }
    Triple t{line.substr(0, first), line.substr(first + 1, second - first - 1),
             line.substr(second + 1)};
    if (t.head.empty() || t.relation.empty() || t.tail.empty()) {
      throw ParseError("empty field", line_no);
    }
    if (options.materialize_inverse) {
      triples.push_back({t.tail, t.relation + std::string(kInverseSuffix), t.head});
    }
    triples.push_back(std::move(t));
  }
  if (in.bad()) throw IoError("read failure");
  return KnowledgeGraph::from_triples(std::move(triples));
}

KnowledgeGraph load_graph(const std::filesystem::path& source, const LoadOptions& options) {
  std::ifstream in(source);
  if (!in) throw IoError("cannot open graph file: " + source.string());
  try {
    return parse_graph(in, options);
  } catch (const ParseError& e) {
    throw ParseError(source.string() + ": " + e.what());
  }
}

void write_graph(const KnowledgeGraph& g, std::ostream& out) {
  for (const auto& t : g.triples()) out << t.head << '\t' << t.relation << '\t' << t.tail << '\n';
}

std::vector<int> bfs_distances(const KnowledgeGraph& g, EntityId start, int max_hops) {
  std::vector<int> dist(g.entity_count(), -1);
  dist[as_index(start)] = 0;
  std::deque<EntityId> queue{start};
  while (!queue.empty()) {
    const auto u = queue.front();
    queue.pop_front();
    const int du = dist[as_index(u)];
    if (du >= max_hops) continue;
    for (const auto& arc : g.out_arcs(u)) {
      auto& dv = dist[as_index(arc.tail)];
      if (dv < 0) {
        dv = du + 1;
        queue.push_back(arc.tail);
      }
    }
  }
  return dist;
}

KnowledgeGraph k_hop_subgraph(const KnowledgeGraph& g, std::string_view start, int k) {
  if (k < 1) throw PreconditionError("k_hop_subgraph: k must be >= 1");
  auto s = g.find_entity(start);
  if (!s) return {};
  const auto dist = bfs_distances(g, *s, k - 1);
  std::vector<Triple> kept;
  for (std::size_t h = 0; h < dist.size(); ++h) {
    if (dist[h] < 0) continue;
    const auto head = EntityId(static_cast<std::uint32_t>(h));
    for (const auto& arc : g.out_arcs(head)) {
      kept.push_back({g.entity_name(head), g.relation_name(arc.relation), g.entity_name(arc.tail)});
    }
  }
  return KnowledgeGraph::from_triples(std::move(kept));
}

nlohmann::ordered_json graph_stats(const KnowledgeGraph& g) {
  return {{"entities", g.entity_count()},
          {"relations", g.relation_count()},
          {"triples", g.triple_count()}};
}

}  // namespace kgr
