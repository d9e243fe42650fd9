// Copyright 2026 The Agent Arena Authors.
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

#include "arena/llm.hpp"

#include <cctype>
#include <cstdlib>

#include "arena/error.hpp"
#include "arena/util.hpp"
#include <httplib.h>

namespace arena::llm {
namespace {

std::string_view RoleName(Message::Role role) {
  switch (role) {
    case Message::Role::kSystem: return "system";
    case Message::Role::kUser: return "user";
    case Message::Role::kAssistant: return "assistant";
  }
  return "user";
}

}  // namespace

ScriptedChatClient::ScriptedChatClient(std::vector<std::string> replies, bool cycle)
    : replies_(std::move(replies)), cycle_(cycle) {}

std::string ScriptedChatClient::Complete(const ChatRequest& request) {
  std::lock_guard<std::mutex> lock(mutex_);
  requests_.push_back(request);
  if (replies_.empty() || (!cycle_ && next_ >= replies_.size())) {
    throw Error(ErrorCode::kClientUnavailable, "scripted client has no reply left");
  }
  return replies_[next_++ % replies_.size()];
}

std::vector<ChatRequest> ScriptedChatClient::requests() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return requests_;
}

std::size_t ScriptedChatClient::calls() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return requests_.size();
}

std::string CallbackChatClient::Complete(const ChatRequest& request) {
  {
    std::lock_guard<std::mutex> lock(mutex_);
    requests_.push_back(request);
  }
  return fn_(request);
}

std::vector<ChatRequest> CallbackChatClient::requests() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return requests_;
}

OpenAiChatClient::OpenAiChatClient(std::string base_url, std::string api_key,
                                   int timeout_seconds)
    : base_url_(std::move(base_url)),
      api_key_(std::move(api_key)),
      timeout_seconds_(timeout_seconds) {
  while (!base_url_.empty() && base_url_.back() == '/') base_url_.pop_back();
}

std::unique_ptr<OpenAiChatClient> OpenAiChatClient::FromEnv(const std::string& key_env) {
  const char* key = std::getenv(key_env.c_str());
  if (!key || !*key) {
    throw Error(ErrorCode::kClientUnavailable, key_env + " is not set");
  }
  const char* base = std::getenv("ARENA_LLM_BASE_URL");
  return std::make_unique<OpenAiChatClient>(
      base && *base ? base : "https://api.openai.com", key);
}

Json OpenAiChatClient::RequestBody(const ChatRequest& request) {
  Json messages = Json::array();
  for (const Message& message : request.messages) {
    Json content;
    if (message.images.empty()) {
      content = message.text;
    } else {
      content = Json::array();
      if (!message.text.empty()) {
        content.push_back({{"type", "text"}, {"text", message.text}});
      }
      for (const Image& image : message.images) {
        content.push_back(
            {{"type", "image_url"},
             {"image_url",
              {{"url", "data:" + image.mime_type + ";base64," +
                           Base64Encode(image.bytes)}}}});
      }
    }
    messages.push_back({{"role", RoleName(message.role)}, {"content", content}});
  }
  Json body = {{"model", request.model},
               {"temperature", request.temperature},
               {"messages", std::move(messages)}};
  if (request.seed) body["seed"] = *request.seed;
  return body;
}

std::string OpenAiChatClient::Complete(const ChatRequest& request) {
  const Json body = PostJson(base_url_, api_key_, "/v1/chat/completions",
                             RequestBody(request), timeout_seconds_);
  try {
    return body.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kClientUnavailable,
                std::string("unexpected chat response: ") + e.what());
  }
}

Json PostJson(const std::string& base_url, const std::string& api_key,
              const std::string& path, const Json& body, int timeout_seconds) {
  httplib::Client client(base_url);
  client.set_connection_timeout(10);
  client.set_read_timeout(timeout_seconds, 0);
  if (!api_key.empty()) client.set_bearer_token_auth(api_key);
  auto res = client.Post(path, body.dump(), "application/json");
  if (!res) {
    throw Error(ErrorCode::kClientUnavailable,
                "request to " + path + " failed: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw Error(ErrorCode::kClientUnavailable,
                path + " answered HTTP " + std::to_string(res->status));
  }
  try {
    return Json::parse(res->body);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kClientUnavailable,
                path + " returned invalid JSON: " + e.what());
  }
}

std::string JoinedText(const ChatRequest& request) {
  std::string out;
  for (const Message& message : request.messages) {
    out += message.text;
    out += '\n';
  }
  return out;
}

std::size_t ImageCount(const ChatRequest& request) {
  std::size_t n = 0;
  for (const Message& message : request.messages) n += message.images.size();
  return n;
}

std::string StripCodeFence(std::string_view text) {
  std::string body = Trim(text);
  if (body.rfind("```", 0) != 0) return body;
  const std::size_t first_newline = body.find('\n');
  if (first_newline == std::string::npos) return body;
  // Only a language tag may follow the opening fence.
  const std::string tag = Trim(std::string_view(body).substr(3, first_newline - 3));
  for (char c : tag) {
    if (!std::isalnum(static_cast<unsigned char>(c))) return body;
  }
  if (body.size() < first_newline + 4 || body.compare(body.size() - 3, 3, "```") != 0) {
    return body;
  }
  std::string inner = body.substr(first_newline + 1, body.size() - 3 - first_newline - 1);
  if (inner.find("```") != std::string::npos) return body;
  return Trim(inner);
}

}  // namespace arena::llm
