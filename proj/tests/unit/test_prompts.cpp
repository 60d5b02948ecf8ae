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

#include <filesystem>
#include <fstream>
#include <sstream>

#include "kgr/error.hpp"
#include "kgr/prompts.hpp"

using namespace kgr;

namespace {

std::string asset(const std::string& name) {
  std::ifstream in(std::string(KGR_SOURCE_DIR) + "/assets/prompts/" + name + ".txt",
                   std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

const std::vector<TemplateId> kAll{TemplateId::kPathGeneration, TemplateId::kConstraintExtraction,
                                   TemplateId::kPathSelection,
                                   TemplateId::kConstraintVerification, TemplateId::kDirectAnswer};

Slots fill(TemplateId id) {
  Slots s;
  for (const auto& name : template_slots(id)) s[name] = "<" + name + ">";
  return s;
}

}  // namespace

TEST_SUITE("prompts") {
  TEST_CASE("compiled templates are byte-identical to the asset files") {
    for (auto id : kAll) {
      const auto text = asset(std::string(template_name(id)));
      REQUIRE_FALSE(text.empty());
      CHECK(template_text(id) == text);
      CHECK(template_from_name(template_name(id)) == id);
    }
    CHECK_THROWS_AS(template_from_name("nope"), PreconditionError);
  }

  TEST_CASE("slots per template") {
    CHECK(template_slots(TemplateId::kPathGeneration) ==
          std::vector<std::string>{"question", "topic_entities"});
    CHECK(template_slots(TemplateId::kConstraintExtraction) == std::vector<std::string>{"question"});
    CHECK(template_slots(TemplateId::kPathSelection) ==
          std::vector<std::string>{"question", "topic_entities", "memory", "reasoning_paths"});
    CHECK(template_slots(TemplateId::kConstraintVerification) ==
          std::vector<std::string>{"question", "topic_entities", "constraints", "reasoning_paths",
                                   "knowledge_triplets"});
  }

  TEST_CASE("empty memory renders as an empty list") {
    auto slots = fill(TemplateId::kPathSelection);
    slots["memory"] = format_memory({});
    const auto out = render_prompt(TemplateId::kPathSelection, slots);
    CHECK(out.find("- Memory: []\n") != std::string::npos);
    // Escaped braces in the exemplars come out single.
    CHECK(out.find("{Path 2}") != std::string::npos);
    CHECK(out.find("{{") == std::string::npos);
  }

  TEST_CASE("extraction prompt lists the five constraint types") {
    auto slots = fill(TemplateId::kConstraintExtraction);
    const auto out = render_prompt(TemplateId::kConstraintExtraction, slots);
    for (const char* def : {"1. Type Constraint:", "2. Multi-Entity Constraint:",
                            "3. Explicit Time Constraint:", "4. Implicit Time Constraint:",
                            "5. Order Constraint:"}) {
      CHECK(out.find(def) != std::string::npos);
    }
    CHECK(out.ends_with("Input question: <question>\nOutput:"));
  }

  TEST_CASE("missing and unknown slots are rejected") {
    CHECK_THROWS_AS(render_prompt(TemplateId::kConstraintExtraction, {}), PreconditionError);
    CHECK_THROWS_AS(render_prompt(TemplateId::kConstraintExtraction,
                                  {{"question", "q"}, {"extra", "x"}}),
                    PreconditionError);
  }

  TEST_CASE("slot values are inserted literally") {
    const auto out = render_prompt(TemplateId::kConstraintExtraction, {{"question", "a {b} }}"}});
    CHECK(out.ends_with("Input question: a {b} }}\nOutput:"));
  }

  TEST_CASE("python-style literals") {
    CHECK(py_repr("Ang Lee") == "'Ang Lee'");
    CHECK(py_repr("O'Neil") == "\"O'Neil\"");
    CHECK(py_repr("a'b\"c") == "'a\\'b\"c'");
    const std::vector<std::string> items{"Ang Lee", "Taiwan"};
    CHECK(py_list(items) == "['Ang Lee', 'Taiwan']");
    CHECK(json_list(items) == "[\"Ang Lee\", \"Taiwan\"]");
    CHECK(py_list(std::vector<std::string>{}) == "[]");
  }

  TEST_CASE("memory and path choices") {
    const std::vector<MemoryEntry> m{{"A -> r -> Unknown Entity", "constraint 2 unmet"}};
    CHECK(format_memory(m) ==
          "[{'selected_path': 'A -> r -> Unknown Entity', 'feedback': 'constraint 2 unmet'}]");
    const std::vector<std::string> paths{"A -> r -> Unknown Entity", "B -> s -> Unknown Entity"};
    CHECK(format_path_choices(paths) ==
          "['Path 1: A -> r -> Unknown Entity', 'Path 2: B -> s -> Unknown Entity']");
  }
}
