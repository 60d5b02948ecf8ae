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

#include "kgr/http_backend.hpp"

#include <thread>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "kgr/error.hpp"

namespace kgr {

namespace {

bool transient(int status) { return status == 429 || (status >= 500 && status <= 599); }

}  // namespace

HttpChatBackend::HttpChatBackend(HttpBackendOptions options) : options_(std::move(options)) {
  const auto& url = options_.base_url;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError("endpoint URL needs a scheme: " + url);
  }
  const auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw ConfigError("unsupported endpoint scheme: " + scheme);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  scheme_host_port_ = url.substr(0, path_start);
  path_prefix_ = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
  if (options_.max_retries < 0) throw ConfigError("max_retries must be >= 0");
}

nlohmann::json HttpChatBackend::request_body(const ChatRequest& request) {
  nlohmann::json messages = nlohmann::json::array();
  for (const auto& m : request.messages) {
    messages.push_back({{"role", m.role}, {"content", m.content}});
  }
  return {{"model", request.model},
          {"messages", messages},
          {"temperature", request.temperature},
          {"max_tokens", request.max_output_tokens}};
}

ChatResponse HttpChatBackend::parse_response(const std::string& body, const ChatRequest& request) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    throw GatewayError(std::string("response is not JSON: ") + e.what());
  }
  const auto* content = j.contains("choices") && j["choices"].is_array() && !j["choices"].empty()
                            ? &j["choices"][0]
                            : nullptr;
  if (!content || !content->contains("message") || !(*content)["message"].contains("content")) {
    throw GatewayError("response has no choices[0].message.content");
  }
  ChatResponse resp;
  const auto& c = (*content)["message"]["content"];
  resp.content = c.is_string() ? c.get<std::string>() : "";
  resp.usage.calls = 1;
  const auto usage = j.value("usage", nlohmann::json::object());
  if (usage.is_object() && usage.contains("prompt_tokens") && usage.contains("completion_tokens")) {
    resp.usage.input_tokens = usage["prompt_tokens"].get<std::size_t>();
    resp.usage.output_tokens = usage["completion_tokens"].get<std::size_t>();
  } else {
    for (const auto& m : request.messages) resp.usage.input_tokens += estimate_tokens(m.content);
    resp.usage.output_tokens = estimate_tokens(resp.content);
    resp.usage.estimated = true;
  }
  resp.usage.total_tokens = resp.usage.input_tokens + resp.usage.output_tokens;
  return resp;
}

ChatResponse HttpChatBackend::complete(const ChatRequest& request) {
  const auto body = request_body(request).dump();
  const auto path = path_prefix_ + "/chat/completions";
  auto backoff = options_.initial_backoff;
  std::string last_error;

  for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
    if (attempt > 0) {
      spdlog::warn("chat endpoint: {} (retry {}/{})", last_error, attempt, options_.max_retries);
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
    httplib::Client client(scheme_host_port_);
    client.set_connection_timeout(options_.timeout);
    client.set_read_timeout(options_.timeout);
    client.set_write_timeout(options_.timeout);
    httplib::Headers headers;
    if (!options_.api_key.empty()) {
      headers.emplace("Authorization", "Bearer " + options_.api_key);
    }
    auto res = client.Post(path, headers, body, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 401 || res->status == 403) {
      throw AuthError("chat endpoint rejected credentials (HTTP " +
                      std::to_string(res->status) + ")");
    }
    if (transient(res->status)) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      throw GatewayError("chat endpoint returned HTTP " + std::to_string(res->status) + ": " +
                         res->body.substr(0, 200));
    }
    return parse_response(res->body, request);
  }
  throw GatewayError("chat endpoint failed after " + std::to_string(options_.max_retries) +
                     " retries: " + last_error);
}

std::string HttpChatBackend::identity() const { return "http(" + options_.base_url + ")"; }

}  // namespace kgr
