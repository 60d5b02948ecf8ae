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

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

namespace kgr {

struct Message {
  std::string role;  // "system", "user" or "assistant"
  std::string content;
};

struct ChatRequest {
  std::string model;
  std::vector<Message> messages;
  double temperature = 0.0;
  int max_output_tokens = 1024;

  /// Single user message; the instruction is part of the rendered prompt.
  static ChatRequest from_prompt(std::string model, std::string prompt, double temperature = 0.0,
                                 int max_output_tokens = 1024);
};

struct UsageRecord {
  std::size_t calls = 0;
  std::size_t input_tokens = 0;
  std::size_t output_tokens = 0;
  std::size_t total_tokens = 0;  // input_tokens + output_tokens
  bool estimated = false;        // true once any count came from the estimator

  UsageRecord& operator+=(const UsageRecord& other);
  nlohmann::ordered_json to_json() const;
};

struct ChatResponse {
  std::string content;
  UsageRecord usage;  // one call
};

/// Whitespace token count, used when a backend reports no usage.
std::size_t estimate_tokens(std::string_view text);

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;

  /// Must be safe to call from several sessions concurrently.
  virtual ChatResponse complete(const ChatRequest& request) = 0;

  /// Short description for run manifests (never includes credentials).
  virtual std::string identity() const = 0;
};

/// Deterministic test double: the first rule whose substring occurs in the
/// prompt wins; otherwise the default response is returned.
class ScriptedOracle final : public ChatBackend {
 public:
  struct Rule {
    std::string match_substring;
    std::string response;
  };

  ScriptedOracle() = default;
  explicit ScriptedOracle(std::vector<Rule> rules, std::string default_response = "");

  /// JSONL lines {"match_substring": str, "response": str}. A line with only
  /// {"default": str} sets the default response.
  static ScriptedOracle parse(std::istream& in);
  static ScriptedOracle load(const std::filesystem::path& path);

  void add_rule(std::string match_substring, std::string response);
  const std::vector<Rule>& rules() const noexcept { return rules_; }

  ChatResponse complete(const ChatRequest& request) override;
  std::string identity() const override;

 private:
  std::vector<Rule> rules_;
  std::string default_response_;
};

/// Usage per pipeline stage plus the running total; updates are atomic.
class Session {
 public:
  Session(ChatBackend& backend, std::string model);

  /// Issues one request on behalf of `stage`. Backend exceptions propagate;
  /// the failed call is not counted.
  ChatResponse complete(std::string_view stage, const ChatRequest& request);
  ChatResponse complete_prompt(std::string_view stage, std::string prompt,
                               double temperature = 0.0);

  UsageRecord usage() const;
  std::map<std::string, UsageRecord> usage_by_stage() const;
  const std::string& model() const noexcept { return model_; }

 private:
  ChatBackend& backend_;
  std::string model_;
  mutable std::mutex mutex_;
  UsageRecord total_;
  std::map<std::string, UsageRecord> by_stage_;
};

/// Result of a path-selection reply.
struct NoPath {
  std::string rationale;
};
struct PathChoice {
  std::size_t index = 0;  // 1-based, as shown to the model
  std::string rationale;
};
using PathSelection = std::variant<PathChoice, NoPath>;

/// Parses "{Path k} - why" or "{no path} - why" (double braces accepted).
/// Throws ParseError when no marker is present or k is outside [1, pool_size].
PathSelection parse_path_selection(std::string_view raw, std::size_t pool_size);

}  // namespace kgr
