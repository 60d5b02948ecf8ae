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

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace kgr {

enum class TemplateId {
  kPathGeneration,
  kConstraintExtraction,
  kPathSelection,
  kConstraintVerification,
  kDirectAnswer,
};

/// Version tag of the embedded template set; echoed into run manifests.
inline constexpr std::string_view kPromptTemplateVersion = "2026.1";

std::string_view template_name(TemplateId id);
TemplateId template_from_name(std::string_view name);

/// Raw template text, with `{slot}` placeholders and `{{`/`}}` escapes.
std::string_view template_text(TemplateId id);

/// Slot names the template references, in first-use order.
std::vector<std::string> template_slots(TemplateId id);

using Slots = std::map<std::string, std::string, std::less<>>;

/// Substitutes slots into the template (str.format semantics: `{{` and `}}`
/// render as single braces). Throws PreconditionError when a required slot is
/// missing or an unknown slot is supplied.
std::string render_prompt(TemplateId id, const Slots& slots);

/// Python repr of a string: 'text', or "text" when it holds a single quote.
std::string py_repr(std::string_view s);

/// ['a', 'b'] (Python list repr).
std::string py_list(std::span<const std::string> items);

/// ["a", "b"] (JSON with ", " separators).
std::string json_list(std::span<const std::string> items);

/// One rejected selection and the verifier feedback that rejected it.
struct MemoryEntry {
  std::string selected_path;
  std::string feedback;

  bool operator==(const MemoryEntry&) const = default;
};

/// [{'selected_path': '...', 'feedback': '...'}, ...]; "[]" when empty.
std::string format_memory(std::span<const MemoryEntry> memory);

/// ['Path 1: ...', 'Path 2: ...'].
std::string format_path_choices(std::span<const std::string> rendered_paths);

}  // namespace kgr
