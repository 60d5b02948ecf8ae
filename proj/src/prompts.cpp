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

#include "kgr/prompts.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include <json.hpp>

#include "kgr/error.hpp"

namespace kgr::detail {
extern const std::string_view k_path_generation_template;
extern const std::string_view k_constraint_extraction_template;
extern const std::string_view k_path_selection_template;
extern const std::string_view k_constraint_verification_template;
extern const std::string_view k_direct_answer_template;
}  // namespace kgr::detail

namespace kgr {

namespace {

struct TemplateEntry {
  TemplateId id;
  std::string_view name;
  const std::string_view* text;
};

const std::array<TemplateEntry, 5> kTemplates{{
    {TemplateId::kPathGeneration, "path_generation", &detail::k_path_generation_template},
    {TemplateId::kConstraintExtraction, "constraint_extraction",
     &detail::k_constraint_extraction_template},
    {TemplateId::kPathSelection, "path_selection", &detail::k_path_selection_template},
    {TemplateId::kConstraintVerification, "constraint_verification",
     &detail::k_constraint_verification_template},
    {TemplateId::kDirectAnswer, "direct_answer", &detail::k_direct_answer_template},
}};

const TemplateEntry& entry(TemplateId id) {
  for (const auto& e : kTemplates) {
    if (e.id == id) return e;
  }
  throw PreconditionError("unknown template id");
}

bool is_slot_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

// Walks the template, calling on_text for literal runs and on_slot for
// placeholders. A lone brace that is neither an escape nor a placeholder is
// a template defect.
template <typename OnText, typename OnSlot>
void scan_template(std::string_view tpl, OnText on_text, OnSlot on_slot) {
  std::size_t i = 0;
  while (i < tpl.size()) {
    const char c = tpl[i];
    if (c == '{' && i + 1 < tpl.size() && tpl[i + 1] == '{') {
      on_text(std::string_view("{"));
      i += 2;
    } else if (c == '}' && i + 1 < tpl.size() && tpl[i + 1] == '}') {
      on_text(std::string_view("}"));
      i += 2;
    } else if (c == '{') {
      std::size_t j = i + 1;
      while (j < tpl.size() && is_slot_char(tpl[j])) ++j;
      if (j == i + 1 || j >= tpl.size() || tpl[j] != '}') {
        throw Error("template: stray '{' at offset " + std::to_string(i));
      }
      on_slot(tpl.substr(i + 1, j - i - 1));
      i = j + 1;
    } else if (c == '}') {
      throw Error("template: stray '}' at offset " + std::to_string(i));
    } else {
      std::size_t j = i;
      while (j < tpl.size() && tpl[j] != '{' && tpl[j] != '}') ++j;
      on_text(tpl.substr(i, j - i));
      i = j;
    }
  }
}

}  // namespace

std::string_view template_name(TemplateId id) { return entry(id).name; }

TemplateId template_from_name(std::string_view name) {
  for (const auto& e : kTemplates) {
    if (e.name == name) return e.id;
  }
  throw PreconditionError("unknown template '" + std::string(name) + "'");
}

std::string_view template_text(TemplateId id) { return *entry(id).text; }

std::vector<std::string> template_slots(TemplateId id) {
  std::vector<std::string> slots;
  scan_template(
      template_text(id), [](std::string_view) {},
      [&](std::string_view name) {
        if (std::find(slots.begin(), slots.end(), name) == slots.end()) slots.emplace_back(name);
      });
  return slots;
}

std::string render_prompt(TemplateId id, const Slots& slots) {
  const auto required = template_slots(id);
  for (const auto& name : required) {
    if (!slots.contains(name)) {
      throw PreconditionError("missing slot '" + name + "' for template " +
                              std::string(template_name(id)));
    }
  }
  for (const auto& [name, value] : slots) {
    if (std::find(required.begin(), required.end(), name) == required.end()) {
      throw PreconditionError("unknown slot '" + name + "' for template " +
                              std::string(template_name(id)));
    }
  }
  std::string out;
  out.reserve(template_text(id).size() + 256);
  scan_template(
      template_text(id), [&](std::string_view text) { out += text; },
      [&](std::string_view name) { out += slots.find(name)->second; });
  return out;
}

std::string py_repr(std::string_view s) {
  const bool has_single = s.find('\'') != std::string_view::npos;
  const bool has_double = s.find('"') != std::string_view::npos;
  const char quote = has_single && !has_double ? '"' : '\'';
  std::string out(1, quote);
  for (char c : s) {
    if (c == '\\' || c == quote) out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  out += quote;
  return out;
}

std::string py_list(std::span<const std::string> items) {
  std::string out = "[";
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += py_repr(items[i]);
  }
  return out + "]";
}

std::string json_list(std::span<const std::string> items) {
  std::string out = "[";
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += nlohmann::json(items[i]).dump();
  }
  return out + "]";
}

std::string format_memory(std::span<const MemoryEntry> memory) {
  std::string out = "[";
  for (std::size_t i = 0; i < memory.size(); ++i) {
    if (i) out += ", ";
    out += "{'selected_path': " + py_repr(memory[i].selected_path) +
           ", 'feedback': " + py_repr(memory[i].feedback) + "}";
  }
  return out + "]";
}

std::string format_path_choices(std::span<const std::string> rendered_paths) {
  std::vector<std::string> labelled;
  labelled.reserve(rendered_paths.size());
  for (std::size_t i = 0; i < rendered_paths.size(); ++i) {
    labelled.push_back("Path " + std::to_string(i + 1) + ": " + rendered_paths[i]);
  }
  return py_list(labelled);
}

}  // namespace kgr
