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

#include "kgr/relation_path.hpp"

#include "kgr/error.hpp"

namespace kgr {

namespace {

constexpr std::string_view kPathSep = " | ";
constexpr std::string_view kEntitySep = " ; ";
constexpr std::string_view kKeySep = ": ";

std::vector<std::string_view> split(std::string_view text, std::string_view sep) {
  std::vector<std::string_view> parts;
  std::size_t pos = 0;
  while (true) {
    const auto next = text.find(sep, pos);
    if (next == std::string_view::npos) {
      parts.push_back(text.substr(pos));
      return parts;
    }
    parts.push_back(text.substr(pos, next - pos));
    pos = next + sep.size();
  }
}

}  // namespace

std::string to_string(const RelationPath& path) {
  std::string out;
  for (std::size_t i = 0; i < path.relations.size(); ++i) {
    if (i) out += kArrow;
    out += path.relations[i];
  }
  return out;
}

RelationPath parse_relation_path(std::string_view text) {
  RelationPath path;
  if (text.empty()) return path;
  for (auto hop : split(text, kArrow)) {
    if (hop.empty()) throw ParseError("empty relation in path '" + std::string(text) + "'");
    path.relations.emplace_back(hop);
  }
  return path;
}

std::string to_string(const PathMapping& mapping) {
  std::string out;
  bool first_entity = true;
  for (const auto& [entity, paths] : mapping) {
    if (!first_entity) out += kEntitySep;
    first_entity = false;
    out += entity;
    out += kKeySep;
    bool first_path = true;
    for (const auto& p : paths) {
      if (!first_path) out += kPathSep;
      first_path = false;
      out += to_string(p);
    }
  }
  return out;
}

PathMapping parse_path_mapping(std::string_view text) {
  PathMapping mapping;
  if (text.empty()) return mapping;
  for (auto group : split(text, kEntitySep)) {
    const auto colon = group.find(kKeySep);
    if (colon == std::string_view::npos || colon == 0) {
      throw ParseError("malformed entity group '" + std::string(group) + "'");
    }
    auto& paths = mapping[std::string(group.substr(0, colon))];
    for (auto p : split(group.substr(colon + kKeySep.size()), kPathSep)) {
      paths.insert(parse_relation_path(p));
    }
  }
  return mapping;
}

}  // namespace kgr
