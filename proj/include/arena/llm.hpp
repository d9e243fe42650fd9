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

#ifndef ARENA_LLM_HPP_
#define ARENA_LLM_HPP_

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "arena/domain.hpp"
#include "arena/error.hpp"

namespace arena::llm {

struct Image {
  std::string mime_type = "image/gif";
  std::string bytes;
};

struct Message {
  enum class Role { kSystem, kUser, kAssistant };
  Role role = Role::kUser;
  std::string text;
  std::vector<Image> images;
};

struct ChatRequest {
  std::string model;
  std::vector<Message> messages;
  double temperature = 0.0;
  // Forwarded to backends that support reproducible sampling.
  std::optional<std::uint64_t> seed;
};

// Chat-completion transport. Implementations throw Error(ClientUnavailable)
// when no answer can be obtained; callers translate that into their own
// module error. Must be safe to call from several threads.
class ChatClient {
 public:
  virtual ~ChatClient() = default;
  virtual std::string Complete(const ChatRequest& request) = 0;
};

// Replies from a fixed list, in call order; with `cycle` it wraps around,
// otherwise running out is ClientUnavailable. Records every request.
class ScriptedChatClient : public ChatClient {
 public:
  explicit ScriptedChatClient(std::vector<std::string> replies, bool cycle = true);
  std::string Complete(const ChatRequest& request) override;
  std::vector<ChatRequest> requests() const;
  std::size_t calls() const;

 private:
  std::vector<std::string> replies_;
  bool cycle_;
  mutable std::mutex mutex_;
  std::size_t next_ = 0;
  std::vector<ChatRequest> requests_;
};

// Answers through a function; also records requests.
class CallbackChatClient : public ChatClient {
 public:
  using Fn = std::function<std::string(const ChatRequest&)>;
  explicit CallbackChatClient(Fn fn) : fn_(std::move(fn)) {}
  std::string Complete(const ChatRequest& request) override;
  std::vector<ChatRequest> requests() const;

 private:
  Fn fn_;
  mutable std::mutex mutex_;
  std::vector<ChatRequest> requests_;
};

// OpenAI-compatible /v1/chat/completions endpoint. Images are sent as
// base64 data URLs.
class OpenAiChatClient : public ChatClient {
 public:
  OpenAiChatClient(std::string base_url, std::string api_key,
                   int timeout_seconds = 120);
  // Reads ARENA_LLM_BASE_URL (default https://api.openai.com) and the key
  // from the environment variable named `key_env`. Throws ClientUnavailable
  // when the key is missing.
  static std::unique_ptr<OpenAiChatClient> FromEnv(
      const std::string& key_env = "OPENAI_API_KEY");
  std::string Complete(const ChatRequest& request) override;

  // The request body sent for `request`; exposed for tests.
  static Json RequestBody(const ChatRequest& request);

 private:
  std::string base_url_;
  std::string api_key_;
  int timeout_seconds_;
};

// POSTs `body` to `base_url` + `path` with bearer auth (when `api_key` is
// non-empty) and parses the JSON reply. Transport failures, non-200 answers
// and invalid JSON are ClientUnavailable.
Json PostJson(const std::string& base_url, const std::string& api_key,
              const std::string& path, const Json& body, int timeout_seconds = 120);

// Text of all messages concatenated, images counted; handy in tests.
std::string JoinedText(const ChatRequest& request);
std::size_t ImageCount(const ChatRequest& request);

// Strips one surrounding Markdown code fence (``` or ```json) and
// surrounding whitespace. Text without a fence is returned trimmed.
std::string StripCodeFence(std::string_view text);

// Asks `client` and parses the answer with `parse`. When parse throws
// MalformedVerdict the exchange is extended with the bad answer and
// `reminder`, up to `max_retries` more times; then the last MalformedVerdict
// propagates. ClientUnavailable is rethrown as `unavailable`. Every raw
// answer is appended to `raws` when given.
template <typename Parse>
auto AskUntilParsed(ChatClient& client, ChatRequest request, int max_retries,
                    const std::string& reminder, ErrorCode unavailable,
                    Parse&& parse, std::vector<std::string>* raws = nullptr)
    -> decltype(parse(std::string_view())) {
  for (int attempt = 0;; ++attempt) {
    std::string raw;
    try {
      raw = client.Complete(request);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kClientUnavailable) throw Error(unavailable, e.what());
      throw;
    }
    if (raws) raws->push_back(raw);
    try {
      return parse(std::string_view(raw));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kMalformedVerdict || attempt >= max_retries) throw;
    }
    request.messages.push_back({Message::Role::kAssistant, raw, {}});
    request.messages.push_back({Message::Role::kUser, reminder, {}});
  }
}

}  // namespace arena::llm

#endif  // ARENA_LLM_HPP_
