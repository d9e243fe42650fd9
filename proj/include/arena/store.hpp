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

#ifndef ARENA_STORE_HPP_
#define ARENA_STORE_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "arena/domain.hpp"

namespace arena {

enum class LogKind { kTasks, kBattles, kTraces, kVotes, kAnnotations };

inline constexpr std::array<LogKind, 5> kAllLogs = {
    LogKind::kTasks, LogKind::kBattles, LogKind::kTraces, LogKind::kVotes,
    LogKind::kAnnotations};

// File name of a log under the store root, e.g. "votes.jsonl".
std::string_view LogFileName(LogKind kind);

// Append-only newline-delimited JSON logs plus a content-addressed artifact
// directory:
//
//   <root>/tasks.jsonl, battles.jsonl, traces.jsonl, votes.jsonl,
//   <root>/annotations.jsonl
//   <root>/artifacts/<sha256[0:2]>/<sha256>
//
// Each record is written with a single write(2) on an O_APPEND descriptor and
// flushed with fdatasync before Append returns. A crash can therefore leave
// at most one torn line at the end of a log; it is truncated when the store
// is reopened. Any other unparsable line is a StorageError.
//
// Thread-safe: appends are serialized by one writer lock.
class BattleStore {
 public:
  // Creates the directory layout if needed. `durable` = false skips fdatasync
  // (tests and throwaway stores).
  explicit BattleStore(std::filesystem::path root, bool durable = true);
  ~BattleStore();

  BattleStore(const BattleStore&) = delete;
  BattleStore& operator=(const BattleStore&) = delete;

  void Append(LogKind kind, const Json& record);
  std::vector<Json> ReadLog(LogKind kind) const;

  // Stores `bytes` under their SHA-256 and returns the hex digest.
  std::string PutArtifact(std::string_view bytes);
  // Nullopt for unknown or malformed hashes.
  std::optional<std::string> GetArtifact(std::string_view hash) const;

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path artifact_dir() const { return root_ / "artifacts"; }

 private:
  std::filesystem::path LogPath(LogKind kind) const;

  std::filesystem::path root_;
  bool durable_;
  std::array<int, kAllLogs.size()> fds_{};
  mutable std::mutex write_mutex_;
};

// True for 64 lowercase hex characters.
bool IsSha256Hex(std::string_view text);

}  // namespace arena

#endif  // ARENA_STORE_HPP_
