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

#ifndef ARENA_UTIL_HPP_
#define ARENA_UTIL_HPP_

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace arena {

// Milliseconds since the Unix epoch.
using Timestamp = std::int64_t;

Timestamp NowMillis();

std::string Trim(std::string_view text);
std::string ToLower(std::string_view text);

// Lowercases and collapses every run of whitespace into one space.
std::string NormalizeForDedup(std::string_view text);

std::vector<std::string> SplitWords(std::string_view text);
std::vector<std::string> SplitLines(std::string_view text);

std::string ReadFile(const std::filesystem::path& path);
void WriteFileAtomic(const std::filesystem::path& path, std::string_view data);

std::string Sha256Hex(std::string_view data);

std::string Base64Encode(std::string_view data);
// Throws InvalidArgument on characters outside the standard alphabet.
std::string Base64Decode(std::string_view text);

// Returns the embedded prompt template `name` (e.g. "captcha_judge.v1").
std::string_view PromptTemplate(std::string_view name);

// Substitutes `{{key}}` placeholders. Unknown placeholders are left intact.
std::string RenderTemplate(std::string_view tmpl,
                           const std::map<std::string, std::string>& values);

// Unbiased integer in [0, bound) from a 64-bit engine by rejection.
template <typename Engine>
std::uint64_t UniformBelow(Engine& engine, std::uint64_t bound) {
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t r = engine();
    if (r >= threshold) return r % bound;
  }
}

// Fisher-Yates from the back, with UniformBelow as the index source. The
// documented shuffle used everywhere a seeded permutation is needed.
template <typename Engine, typename T>
void SeededShuffle(std::vector<T>& items, Engine& engine) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = UniformBelow(engine, i);
    std::swap(items[i - 1], items[j]);
  }
}

// Calls fn(i) for i in [0, n) on up to `max_threads` threads (0 = hardware
// concurrency). Every index runs even if some throw; afterwards the
// exception from the lowest failing index is rethrown.
template <typename Fn>
void ParallelFor(std::size_t n, Fn&& fn, unsigned max_threads = 0) {
  if (n == 0) return;
  unsigned workers = max_threads ? max_threads
                                 : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < workers; ++t) pool.emplace_back(work);
  work();
  for (auto& thread : pool) thread.join();
  for (auto& error : errors) {
    if (error) std::rethrow_exception(error);
  }
}

}  // namespace arena

#endif  // ARENA_UTIL_HPP_
