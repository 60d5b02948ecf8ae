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

#include "kgr/config.hpp"

#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <set>

#include "kgr/error.hpp"

namespace kgr {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool valid_key(std::string_view k) {
  if (k.empty()) return false;
  for (char c : k) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) return false;
  }
  return true;
}

// Parses a quoted string starting at s[0] == '"'; returns the rest in `tail`.
std::string parse_string(std::string_view s, std::string_view& tail, std::size_t line) {
  std::string out;
  for (std::size_t i = 1; i < s.size(); ++i) {
    const char c = s[i];
    if (c == '"') {
      tail = s.substr(i + 1);
      return out;
    }
    if (c != '\\') {
      out += c;
      continue;
    }
    if (++i == s.size()) break;
    switch (s[i]) {
      case 'n': out += '\n'; break;
      case 't': out += '\t'; break;
      case '"': out += '"'; break;
      case '\\': out += '\\'; break;
      default: throw ParseError("unsupported escape in string", line);
    }
  }
  throw ParseError("unterminated string", line);
}

ConfigValue parse_value(std::string_view s, std::size_t line) {
  std::string_view tail;
  if (s.starts_with('"')) {
    auto str = parse_string(s, tail, line);
    tail = trim(tail);
    if (!tail.empty() && !tail.starts_with('#')) {
      throw ParseError("unexpected text after string value", line);
    }
    return str;
  }
  if (const auto hash = s.find('#'); hash != std::string_view::npos) s = trim(s.substr(0, hash));
  if (s == "true") return true;
  if (s == "false") return false;
  std::int64_t i = 0;
  if (auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), i);
      ec == std::errc() && p == s.data() + s.size()) {
    return i;
  }
  double d = 0;
  if (auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), d);
      ec == std::errc() && p == s.data() + s.size() && !s.empty()) {
    return d;
  }
  throw ParseError("cannot parse value '" + std::string(s) + "'", line);
}

class TableReader {
 public:
  explicit TableReader(const ConfigTable& t) : table_(t) {}

  template <typename T>
  void get(std::string_view key, T& out) {
    auto it = table_.find(key);
    if (it == table_.end()) return;
    used_.insert(it->first);
    assign(it->first, it->second, out);
  }

  void check_all_used() const {
    for (const auto& [k, v] : table_) {
      if (!used_.contains(k)) throw ConfigError("unknown config key '" + k + "'");
    }
  }

 private:
  static void assign(const std::string& key, const ConfigValue& v, std::string& out) {
    if (!std::holds_alternative<std::string>(v)) throw type_error(key, "a string");
    out = std::get<std::string>(v);
  }
  static void assign(const std::string& key, const ConfigValue& v, std::filesystem::path& out) {
    std::string s;
    assign(key, v, s);
    out = s;
  }
  static void assign(const std::string& key, const ConfigValue& v, bool& out) {
    if (!std::holds_alternative<bool>(v)) throw type_error(key, "a boolean");
    out = std::get<bool>(v);
  }
  static void assign(const std::string& key, const ConfigValue& v, int& out) {
    if (!std::holds_alternative<std::int64_t>(v)) throw type_error(key, "an integer");
    const auto i = std::get<std::int64_t>(v);
    if (i < INT32_MIN || i > INT32_MAX) throw ConfigError("config key '" + key + "' out of range");
    out = static_cast<int>(i);
  }
  static void assign(const std::string& key, const ConfigValue& v, std::uint64_t& out) {
    if (!std::holds_alternative<std::int64_t>(v) || std::get<std::int64_t>(v) < 0) {
      throw type_error(key, "a non-negative integer");
    }
    out = static_cast<std::uint64_t>(std::get<std::int64_t>(v));
  }
  static void assign(const std::string& key, const ConfigValue& v, double& out) {
    if (std::holds_alternative<double>(v)) {
      out = std::get<double>(v);
    } else if (std::holds_alternative<std::int64_t>(v)) {
      out = static_cast<double>(std::get<std::int64_t>(v));
    } else {
      throw type_error(key, "a number");
    }
  }
  static ConfigError type_error(const std::string& key, const char* what) {
    return ConfigError("config key '" + key + "' must be " + what);
  }

  const ConfigTable& table_;
  std::set<std::string, std::less<>> used_;
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::filesystem::path& p) {
  if (p.empty() || p.is_absolute()) return p;
  return (base / p).lexically_normal();
}

void require_file(const std::filesystem::path& p, std::string_view key) {
  if (p.empty()) throw ConfigError("config key '" + std::string(key) + "' is required");
  if (!std::filesystem::is_regular_file(p)) {
    throw ConfigError("config key '" + std::string(key) + "': no such file " + p.string());
  }
}

}  // namespace

ConfigTable parse_config_table(std::istream& in) {
  ConfigTable table;
  std::string section;
  std::size_t line_no = 0;
  for (std::string raw; std::getline(in, raw);) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.starts_with('#')) continue;
    if (line.starts_with('[')) {
      const auto close = line.find(']');
      if (close == std::string_view::npos) throw ParseError("unterminated section header", line_no);
      const auto rest = trim(line.substr(close + 1));
      if (!rest.empty() && !rest.starts_with('#')) {
        throw ParseError("unexpected text after section header", line_no);
      }
      const auto name = trim(line.substr(1, close - 1));
      if (!valid_key(name)) throw ParseError("invalid section name", line_no);
      section = std::string(name);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected key = value", line_no);
    const auto key = trim(line.substr(0, eq));
    if (!valid_key(key)) throw ParseError("invalid key '" + std::string(key) + "'", line_no);
    const auto full = section.empty() ? std::string(key) : section + "." + std::string(key);
    if (table.contains(full)) throw ParseError("duplicate key '" + full + "'", line_no);
    table.emplace(full, parse_value(trim(line.substr(eq + 1)), line_no));
  }
  return table;
}

RunConfig RunConfig::from_table(const ConfigTable& table, const std::filesystem::path& base_dir) {
  RunConfig c;
  TableReader r(table);
  r.get("graph", c.graph);
  r.get("dataset", c.dataset);
  r.get("output_dir", c.output_dir);
  r.get("seed", c.seed);
  r.get("k", c.k);
  r.get("inverse_edges", c.inverse_edges);

  r.get("reasoner.max_depth", c.reasoner.max_depth);
  r.get("reasoner.instantiation_cap", c.reasoner.instantiation_cap);
  r.get("reasoner.candidate_limit", c.reasoner.candidate_limit);
  r.get("reasoner.selection_window", c.reasoner.selection_window);
  r.get("reasoner.parse_retries", c.reasoner.parse_retries);

  std::string kind = "scripted";
  r.get("backend.kind", kind);
  if (kind == "scripted") {
    c.backend.kind = BackendKind::kScripted;
  } else if (kind == "http") {
    c.backend.kind = BackendKind::kHttp;
  } else {
    throw ConfigError("backend.kind must be \"scripted\" or \"http\"");
  }
  r.get("backend.rules", c.backend.rules);
  r.get("backend.endpoint", c.backend.endpoint);
  r.get("backend.model", c.backend.model);
  r.get("backend.api_key_env", c.backend.api_key_env);
  r.get("backend.max_retries", c.backend.max_retries);
  r.get("backend.timeout_seconds", c.backend.timeout_seconds);

  std::string planner = "enumerate";
  r.get("planner.kind", planner);
  if (planner == "enumerate") {
    c.planner.kind = PlannerKind::kEnumerate;
  } else if (planner == "http") {
    c.planner.kind = PlannerKind::kHttp;
  } else {
    throw ConfigError("planner.kind must be \"enumerate\" or \"http\"");
  }
  r.get("planner.endpoint", c.planner.endpoint);
  r.get("planner.model", c.planner.model);
  r.get("planner.api_key_env", c.planner.api_key_env);

  r.get("kto.beta", c.kto.beta);
  r.get("kto.lambda_p", c.kto.lambda_p);
  r.get("kto.lambda_n", c.kto.lambda_n);
  r.check_all_used();

  c.reasoner.model = c.backend.model;
  c.reasoner.seed = c.seed;
  c.graph = resolve(base_dir, c.graph);
  c.dataset = resolve(base_dir, c.dataset);
  c.output_dir = resolve(base_dir, c.output_dir);
  c.backend.rules = resolve(base_dir, c.backend.rules);
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  try {
    return from_table(parse_config_table(in), path.parent_path());
  } catch (const ParseError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void RunConfig::validate() const {
  require_file(graph, "graph");
  require_file(dataset, "dataset");
  if (output_dir.empty()) throw ConfigError("config key 'output_dir' is required");
  if (k < 1) throw ConfigError("k must be at least 1");
  try {
    reasoner.validate();
    kto.validate();
  } catch (const PreconditionError& e) {
    throw ConfigError(e.what());
  }
  if (backend.kind == BackendKind::kScripted) {
    require_file(backend.rules, "backend.rules");
    if (!backend.endpoint.empty()) {
      throw ConfigError("scripted backend must not set backend.endpoint");
    }
  } else {
    if (backend.endpoint.empty()) throw ConfigError("http backend requires backend.endpoint");
    if (!backend.rules.empty()) throw ConfigError("http backend must not set backend.rules");
    if (backend.api_key_env.empty()) throw ConfigError("backend.api_key_env is empty");
    if (backend.max_retries < 0 || backend.timeout_seconds < 1) {
      throw ConfigError("backend.max_retries must be >= 0 and backend.timeout_seconds >= 1");
    }
  }
  if (backend.model.empty()) throw ConfigError("backend.model is empty");
  if (planner.kind == PlannerKind::kHttp && (planner.endpoint.empty() || planner.model.empty())) {
    throw ConfigError("http planner requires planner.endpoint and planner.model");
  }
}

nlohmann::ordered_json RunConfig::to_json() const {
  nlohmann::ordered_json backend_json;
  if (backend.kind == BackendKind::kScripted) {
    backend_json = {{"kind", "scripted"}, {"rules", backend.rules.string()},
                    {"model", backend.model}};
  } else {
    backend_json = {{"kind", "http"},
                    {"endpoint", backend.endpoint},
                    {"model", backend.model},
                    {"api_key_env", backend.api_key_env},
                    {"max_retries", backend.max_retries},
                    {"timeout_seconds", backend.timeout_seconds}};
  }
  nlohmann::ordered_json planner_json{
      {"kind", planner.kind == PlannerKind::kEnumerate ? "enumerate" : "http"}};
  if (planner.kind == PlannerKind::kHttp) {
    planner_json["endpoint"] = planner.endpoint;
    planner_json["model"] = planner.model;
    planner_json["api_key_env"] = planner.api_key_env;
  }
  return {{"graph", graph.string()},
          {"dataset", dataset.string()},
          {"output_dir", output_dir.string()},
          {"seed", seed},
          {"k", k},
          {"inverse_edges", inverse_edges},
          {"reasoner", reasoner.to_json()},
          {"backend", backend_json},
          {"planner", planner_json},
          {"kto", {{"beta", kto.beta}, {"lambda_p", kto.lambda_p}, {"lambda_n", kto.lambda_n}}}};
}

std::string credential_from_env(const std::string& env_var) {
  const char* v = std::getenv(env_var.c_str());
  if (!v || !*v) throw ConfigError("environment variable " + env_var + " is not set");
  return v;
}

}  // namespace kgr
