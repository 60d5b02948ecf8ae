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

#include <chrono>
#include <string>

#include "kgr/llm_gateway.hpp"

namespace kgr {

struct HttpBackendOptions {
  /// e.g. "https://api.openai.com/v1"; "/chat/completions" is appended.
  std::string base_url;
  std::string api_key;
  /// Retries after the first attempt for timeouts, 429 and 5xx.
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{500};
  std::chrono::seconds timeout{120};
};

/// OpenAI-compatible chat-completions client. Provider-reported usage is used
/// when present, otherwise token counts are estimated.
class HttpChatBackend final : public ChatBackend {
 public:
  explicit HttpChatBackend(HttpBackendOptions options);

  ChatResponse complete(const ChatRequest& request) override;
  std::string identity() const override;

  /// Request body sent for `request`.
  static nlohmann::json request_body(const ChatRequest& request);
  /// Extracts content and usage from a response body. Throws GatewayError.
  static ChatResponse parse_response(const std::string& body, const ChatRequest& request);

 private:
  HttpBackendOptions options_;
  std::string scheme_host_port_;
  std::string path_prefix_;
};

}  // namespace kgr
