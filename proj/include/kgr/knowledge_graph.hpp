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

#include <compare>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

namespace kgr {

enum class EntityId : std::uint32_t {};
enum class RelationId : std::uint32_t {};

struct Triple {
  std::string head;
  std::string relation;
  std::string tail;

  auto operator<=>(const Triple&) const = default;
};

struct Entity {
  std::string id;
  std::optional<std::string> label;
};

/// Outgoing edge in interned form.
struct Arc {
  RelationId relation;
  EntityId tail;

  auto operator<=>(const Arc&) const = default;
};

/// Suffix used for materialized inverse relations.
inline constexpr std::string_view kInverseSuffix = ".inv";

struct LoadOptions {
  /// Add (t, r.inv, h) for every (h, r, t).
  bool materialize_inverse = false;
};

/// Directed multigraph of unique (head, relation, tail) triples.
///
/// Entity and relation ids are interned in lexicographic order of their names,
/// so comparing ids compares names. Each entity's outgoing arcs are sorted by
/// (relation, tail). The graph is immutable once built and safe to share
/// between threads.
class KnowledgeGraph {
 public:
  KnowledgeGraph() = default;

  /// Builds a graph from triples; duplicates are dropped. Throws
  /// PreconditionError on an empty component.
  static KnowledgeGraph from_triples(
      std::vector<Triple> triples,
      const std::unordered_map<std::string, std::string>& labels = {});

  std::size_t entity_count() const noexcept { return entity_names_.size(); }
  std::size_t relation_count() const noexcept { return relation_names_.size(); }
  std::size_t triple_count() const noexcept { return triple_count_; }
  bool empty() const noexcept { return triple_count_ == 0; }

  std::optional<EntityId> find_entity(std::string_view id) const;
  std::optional<RelationId> find_relation(std::string_view name) const;
  bool has_entity(std::string_view id) const { return find_entity(id).has_value(); }

  const std::string& entity_name(EntityId e) const;
  const std::string& relation_name(RelationId r) const;
  Entity entity(EntityId e) const;

  /// Sorted names.
  const std::vector<std::string>& entity_names() const noexcept { return entity_names_; }
  const std::vector<std::string>& relation_names() const noexcept { return relation_names_; }

  /// Outgoing arcs of `e`, sorted by (relation, tail).
  std::span<const Arc> out_arcs(EntityId e) const;

  /// Arcs of `e` restricted to relation `r` (a contiguous, tail-sorted run).
  std::span<const Arc> out_arcs(EntityId e, RelationId r) const;

  /// Outgoing (relation, tail) pairs of `id`, sorted; empty for unknown ids.
  std::vector<std::pair<std::string, std::string>> neighbors(std::string_view id) const;

  bool contains(const Triple& t) const;

  /// All triples in (head, relation, tail) order.
  std::vector<Triple> triples() const;

  bool operator==(const KnowledgeGraph& other) const;

 private:
  std::vector<std::string> entity_names_;
  std::vector<std::optional<std::string>> entity_labels_;
  std::vector<std::string> relation_names_;
  std::unordered_map<std::string, EntityId> entity_index_;
  std::unordered_map<std::string, RelationId> relation_index_;
  // CSR adjacency: arcs_[offsets_[e] .. offsets_[e + 1]).
  std::vector<std::size_t> offsets_;
  std::vector<Arc> arcs_;
  std::size_t triple_count_ = 0;
};

/// Parses head<TAB>relation<TAB>tail lines. Blank lines and lines starting
/// with '#' are skipped. Throws IoError or ParseError (with line number).
KnowledgeGraph load_graph(const std::filesystem::path& source, const LoadOptions& options = {});
KnowledgeGraph parse_graph(std::istream& in, const LoadOptions& options = {});

/// Inverse of parse_graph: one sorted TSV line per triple.
void write_graph(const KnowledgeGraph& g, std::ostream& out);

/// Triples reachable from `start` in at most `k` forward hops, i.e. triples
/// whose head lies within k-1 hops. Unknown start yields an empty graph.
KnowledgeGraph k_hop_subgraph(const KnowledgeGraph& g, std::string_view start, int k);

/// Hop distances from `start` up to `max_hops`; unreached entities hold -1.
std::vector<int> bfs_distances(const KnowledgeGraph& g, EntityId start, int max_hops);

nlohmann::ordered_json graph_stats(const KnowledgeGraph& g);

}  // namespace kgr
