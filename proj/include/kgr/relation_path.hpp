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
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace kgr {

/// Separator between hops in every serialized path.
inline constexpr std::string_view kArrow = " -> ";

/// Ordered sequence of relation labels, no entities.
struct RelationPath {
  std::vector<std::string> relations;

  std::size_t size() const noexcept { return relations.size(); }
  bool empty() const noexcept { return relations.empty(); }

  auto operator<=>(const RelationPath&) const = default;
};

/// "r1 -> r2 -> r3"; the empty path serializes to "".
std::string to_string(const RelationPath& path);

/// Inverse of to_string. Throws ParseError on an empty hop.
RelationPath parse_relation_path(std::string_view text);

/// Question-level label: topic entity -> gold relation paths.
using PathMapping = std::map<std::string, std::set<RelationPath>>;

/// "A: p1 | p2 ; B: p3" with entities and paths in sorted order.
std::string to_string(const PathMapping& mapping);

/// Inverse of to_string(PathMapping).
PathMapping parse_path_mapping(std::string_view text);

}  // namespace kgr
