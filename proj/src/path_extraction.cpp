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

#include "kgr/path_extraction.hpp"

#include <fstream>
#include <istream>
#include <map>
#include <ostream>

#include <json.hpp>

#include "kgr/error.hpp"
#include "kgr/prompts.hpp"

namespace kgr {

namespace {

using LabelSeq = std::vector<RelationId>;

std::vector<std::string> string_array(const nlohmann::json& j, const char* key, std::size_t line) {
  if (!j.contains(key) || !j[key].is_array()) {
    throw ParseError(std::string("missing array '") + key + "'", line);
  }
  std::vector<std::string> out;
  for (const auto& v : j[key]) {
    if (!v.is_string()) throw ParseError(std::string("non-string in '") + key + "'", line);
    out.push_back(v.get<std::string>());
  }
  return out;
}

// Label sequences from `node` to the target along shortest-path DAG edges.
const std::set<LabelSeq>& suffixes(const KnowledgeGraph& g, EntityId node, EntityId target,
                                   const std::vector<int>& dist, int target_dist,
                                   std::map<EntityId, std::set<LabelSeq>>& memo) {
  if (auto it = memo.find(node); it != memo.end()) return it->second;
  std::set<LabelSeq> out;
  const int d = dist[static_cast<std::size_t>(node)];
  if (node == target) {
    out.insert(LabelSeq{});
  } else if (d < target_dist) {
    for (const auto& arc : g.out_arcs(node)) {
      if (dist[static_cast<std::size_t>(arc.tail)] != d + 1) continue;
      for (const auto& tail : suffixes(g, arc.tail, target, dist, target_dist, memo)) {
        LabelSeq seq;
        seq.reserve(tail.size() + 1);
        seq.push_back(arc.relation);
        seq.insert(seq.end(), tail.begin(), tail.end());
        out.insert(std::move(seq));
      }
    }
  }
  return memo.emplace(node, std::move(out)).first->second;
}

}  // namespace

std::vector<Question> parse_questions(std::istream& in) {
  std::vector<Question> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
    }
    if (!j.is_object() || !j.contains("id") || !j.contains("question")) {
      throw ParseError("question record needs 'id' and 'question'", line_no);
    }
    Question q;
    q.id = j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump();
    if (!j["question"].is_string()) throw ParseError("'question' must be a string", line_no);
    q.text = j["question"].get<std::string>();
    q.topic_entities = string_array(j, "topic_entities", line_no);
    q.answers = string_array(j, "answers", line_no);
    out.push_back(std::move(q));
  }
  return out;
}

std::vector<Question> load_questions(const std::filesystem::path& source) {
  std::ifstream in(source);
  if (!in) throw IoError("cannot open question file: " + source.string());
  try {
    return parse_questions(in);
  } catch (const ParseError& e) {
    throw ParseError(source.string() + ": " + e.what());
  }
}

void write_questions(std::span<const Question> questions, std::ostream& out) {
  for (const auto& q : questions) {
    nlohmann::ordered_json j{{"id", q.id},
                             {"question", q.text},
                             {"topic_entities", q.topic_entities},
                             {"answers", q.answers}};
    out << j.dump() << '\n';
  }
}

std::set<RelationPath> shortest_relation_paths(const KnowledgeGraph& g, std::string_view source,
                                               std::string_view target, int max_depth) {
  if (max_depth < 1) throw PreconditionError("shortest_relation_paths: k must be >= 1");
  std::set<RelationPath> out;
  const auto s = g.find_entity(source);
  const auto t = g.find_entity(target);
  if (!s || !t || *s == *t) return out;

  const auto dist = bfs_distances(g, *s, max_depth);
  const int target_dist = dist[static_cast<std::size_t>(*t)];
  if (target_dist < 0) return out;

  std::map<EntityId, std::set<LabelSeq>> memo;
  for (const auto& seq : suffixes(g, *s, *t, dist, target_dist, memo)) {
    RelationPath p;
    p.relations.reserve(seq.size());
    for (auto r : seq) p.relations.push_back(g.relation_name(r));
    out.insert(std::move(p));
  }
  return out;
}

std::string_view to_string(RecordStatus status) {
  switch (status) {
    case RecordStatus::kOk:
      return "ok";
    case RecordStatus::kNoPath:
      return "no_path";
    case RecordStatus::kUnlinked:
      return "unlinked";
  }
  return "unknown";
}

std::vector<WeakSupervisionRecord> extract_weak_supervision(const KnowledgeGraph& g,
                                                            std::span<const Question> questions,
                                                            int max_depth) {
  std::vector<WeakSupervisionRecord> records;
  for (const auto& q : questions) {
    if (q.topic_entities.empty() || q.answers.empty()) {
      throw PreconditionError("question " + q.id + " needs topic entities and answers");
    }
    for (const auto& topic : q.topic_entities) {
      WeakSupervisionRecord rec;
      rec.question_id = q.id;
      rec.question = q.text;
      rec.topic_entity = topic;
      rec.answer_entities.insert(q.answers.begin(), q.answers.end());
      if (!g.has_entity(topic)) {
        rec.status = RecordStatus::kUnlinked;
      } else {
        for (const auto& answer : rec.answer_entities) {
          rec.gold_paths.merge(shortest_relation_paths(g, topic, answer, max_depth));
        }
        if (rec.gold_paths.empty()) rec.status = RecordStatus::kNoPath;
      }
      records.push_back(std::move(rec));
    }
  }
  return records;
}

std::string path_generation_prompt(std::string_view question,
                                   std::span<const std::string> topic_entities) {
  return render_prompt(TemplateId::kPathGeneration,
                       {{"question", std::string(question)},
                        {"topic_entities", py_list(topic_entities)}});
}

std::size_t emit_sft_dataset(std::span<const WeakSupervisionRecord> records, std::ostream& out) {
  std::size_t count = 0;
  for (const auto& rec : records) {
    if (rec.flagged()) continue;
    const std::vector<std::string> topics{rec.topic_entity};
    const auto prompt = path_generation_prompt(rec.question, topics);
    for (const auto& path : rec.gold_paths) {
      nlohmann::ordered_json j{{"prompt", prompt}, {"completion", to_string(path)}};
      out << j.dump() << '\n';
      ++count;
    }
  }
  if (!out) throw IoError("write failure while emitting SFT dataset");
  return count;
}

std::size_t emit_sft_dataset(std::span<const WeakSupervisionRecord> records,
                             const std::filesystem::path& sink) {
  std::ofstream out(sink, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + sink.string());
  return emit_sft_dataset(records, out);
}

void write_weak_supervision(std::span<const WeakSupervisionRecord> records, std::ostream& out) {
  for (const auto& rec : records) {
    std::vector<std::string> paths;
    for (const auto& p : rec.gold_paths) paths.push_back(to_string(p));
    nlohmann::ordered_json j{{"question_id", rec.question_id},
                             {"question", rec.question},
                             {"topic_entity", rec.topic_entity},
                             {"answer_entities", rec.answer_entities},
                             {"gold_paths", paths},
                             {"status", to_string(rec.status)}};
    out << j.dump() << '\n';
  }
}

}  // namespace kgr
