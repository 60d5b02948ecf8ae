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

#include "kgr/llm_gateway.hpp"

#include <cctype>
#include <fstream>
#include <istream>
#include <regex>
#include <sstream>

#include "kgr/error.hpp"

namespace kgr {

ChatRequest ChatRequest::from_prompt(std::string model, std::string prompt, double temperature,
                                     int max_output_tokens) {
  ChatRequest req;
  req.model = std::move(model);
  req.messages.push_back({"user", std::move(prompt)});
  req.temperature = temperature;
  req.max_output_tokens = max_output_tokens;
  return req;
}

UsageRecord& UsageRecord::operator+=(const UsageRecord& other) {
  calls += other.calls;
  input_tokens += other.input_tokens;
  output_tokens += other.output_tokens;
  total_tokens += other.total_tokens;
  estimated = estimated || other.estimated;
  return *this;
}

nlohmann::ordered_json UsageRecord::to_json() const {
  return {{"calls", calls},
          {"input_tokens", input_tokens},
          {"output_tokens", output_tokens},
          {"total_tokens", total_tokens},
          {"estimated", estimated}};
}

std::size_t estimate_tokens(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::size_t n = 0;
  for (std::string word; in >> word;) ++n;
  return n;
}

ScriptedOracle::ScriptedOracle(std::vector<Rule> rules, std::string default_response)
    : rules_(std::move(rules)), default_response_(std::move(default_response)) {}

ScriptedOracle ScriptedOracle::parse(std::istream& in) {
  ScriptedOracle oracle;
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
    if (j.is_object() && j.size() == 1 && j.contains("default") && j["default"].is_string()) {
      oracle.default_response_ = j["default"].get<std::string>();
      continue;
    }
    if (!j.is_object() || !j.contains("match_substring") || !j.contains("response") ||
        !j["match_substring"].is_string() || !j["response"].is_string()) {
      throw ParseError("rule needs string 'match_substring' and 'response'", line_no);
    }
    oracle.add_rule(j["match_substring"].get<std::string>(), j["response"].get<std::string>());
  }
  return oracle;
}

ScriptedOracle ScriptedOracle::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open oracle rules: " + path.string());
  try {
    return parse(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void ScriptedOracle::add_rule(std::string match_substring, std::string response) {
  rules_.push_back({std::move(match_substring), std::move(response)});
}

ChatResponse ScriptedOracle::complete(const ChatRequest& request) {
  std::string prompt;
  for (const auto& m : request.messages) {
    if (!prompt.empty()) prompt += '\n';
    prompt += m.content;
  }
  ChatResponse resp{default_response_, {}};
  for (const auto& rule : rules_) {
    if (prompt.find(rule.match_substring) != std::string::npos) {
      resp.content = rule.response;
      break;
    }
  }
  resp.usage.calls = 1;
  resp.usage.input_tokens = estimate_tokens(prompt);
  resp.usage.output_tokens = estimate_tokens(resp.content);
  resp.usage.total_tokens = resp.usage.input_tokens + resp.usage.output_tokens;
  resp.usage.estimated = true;
  return resp;
}

std::string ScriptedOracle::identity() const {
  return "scripted(" + std::to_string(rules_.size()) + " rules)";
}

Session::Session(ChatBackend& backend, std::string model)
    : backend_(backend), model_(std::move(model)) {}

ChatResponse Session::complete(std::string_view stage, const ChatRequest& request) {
  if (request.messages.empty()) throw PreconditionError("chat request without messages");
  auto resp = backend_.complete(request);
  resp.usage.calls = 1;
  resp.usage.total_tokens = resp.usage.input_tokens + resp.usage.output_tokens;
  std::lock_guard lock(mutex_);
  total_ += resp.usage;
  by_stage_[std::string(stage)] += resp.usage;
  return resp;
}

ChatResponse Session::complete_prompt(std::string_view stage, std::string prompt,
                                      double temperature) {
  return complete(stage, ChatRequest::from_prompt(model_, std::move(prompt), temperature));
}

UsageRecord Session::usage() const {
  std::lock_guard lock(mutex_);
  return total_;
}

std::map<std::string, UsageRecord> Session::usage_by_stage() const {
  std::lock_guard lock(mutex_);
  return by_stage_;
}

PathSelection parse_path_selection(std::string_view raw, std::size_t pool_size) {
  if (pool_size < 1) throw PreconditionError("parse_path_selection: empty pool");
  static const std::regex marker(R"(\{\{?\s*(?:(no\s+path)|path\s+(\d+))\s*\}\}?)",
                                 std::regex::icase);
  const std::string text(raw);
  std::smatch m;
  if (!std::regex_search(text, m, marker)) {
    throw ParseError("no path-selection marker in reply");
  }
  std::string rationale = m.suffix().str();
  const auto start = rationale.find_first_not_of(" \t\r\n-:");
  rationale = start == std::string::npos ? "" : rationale.substr(start);
  while (!rationale.empty() && std::isspace(static_cast<unsigned char>(rationale.back()))) {
    rationale.pop_back();
  }
  if (m[1].matched) return NoPath{std::move(rationale)};
  const auto digits = m[2].str();
  if (digits.size() > 9) throw ParseError("path index out of range: " + digits);
  const auto k = static_cast<std::size_t>(std::stoul(digits));
  if (k < 1 || k > pool_size) {
    throw ParseError("path index " + digits + " outside 1.." + std::to_string(pool_size));
  }
  return PathChoice{k, std::move(rationale)};
}

}  // namespace kgr
