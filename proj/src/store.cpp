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

#include "arena/store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>

#include "arena/error.hpp"
#include "arena/util.hpp"

namespace arena {
namespace {

namespace fs = std::filesystem;

[[noreturn]] void StorageFailure(const std::string& what) {
  throw Error(ErrorCode::kStorageError, what + ": " + std::strerror(errno));
}

// Drops a trailing partial line left by an interrupted append.
void TruncateTornTail(const fs::path& path) {
  std::error_code ec;
  const auto size = fs::file_size(path, ec);
  if (ec || size == 0) return;
  const std::string content = ReadFile(path);
  if (content.back() == '\n') return;
  const std::size_t keep = content.rfind('\n') == std::string::npos
                               ? 0
                               : content.rfind('\n') + 1;
  fs::resize_file(path, keep, ec);
  if (ec) {
    throw Error(ErrorCode::kStorageError,
                "cannot truncate torn record in " + path.string());
  }
}

}  // namespace

std::string_view LogFileName(LogKind kind) {
  switch (kind) {
    case LogKind::kTasks: return "tasks.jsonl";
    case LogKind::kBattles: return "battles.jsonl";
    case LogKind::kTraces: return "traces.jsonl";
    case LogKind::kVotes: return "votes.jsonl";
    case LogKind::kAnnotations: return "annotations.jsonl";
  }
  return "unknown.jsonl";
}

bool IsSha256Hex(std::string_view text) {
  if (text.size() != 64) return false;
  for (char c : text) {
    if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
  }
  return true;
}

BattleStore::BattleStore(fs::path root, bool durable)
    : root_(std::move(root)), durable_(durable) {
  fds_.fill(-1);
  std::error_code ec;
  fs::create_directories(artifact_dir(), ec);
  if (ec) {
    throw Error(ErrorCode::kStorageError,
                "cannot create store at " + root_.string() + ": " + ec.message());
  }
  for (std::size_t i = 0; i < kAllLogs.size(); ++i) {
    const fs::path path = LogPath(kAllLogs[i]);
    if (fs::exists(path)) TruncateTornTail(path);
    fds_[i] = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fds_[i] < 0) {
      for (int fd : fds_) {
        if (fd >= 0) ::close(fd);
      }
      StorageFailure("cannot open " + path.string());
    }
  }
}

BattleStore::~BattleStore() {
  for (int fd : fds_) {
    if (fd >= 0) ::close(fd);
  }
}

fs::path BattleStore::LogPath(LogKind kind) const {
  return root_ / std::string(LogFileName(kind));
}

void BattleStore::Append(LogKind kind, const Json& record) {
  const std::string line = record.dump() + "\n";
  const int fd = fds_[static_cast<std::size_t>(kind)];
  std::lock_guard<std::mutex> lock(write_mutex_);
  const ssize_t n = ::write(fd, line.data(), line.size());
  if (n != static_cast<ssize_t>(line.size())) {
    StorageFailure("short write to " + std::string(LogFileName(kind)));
  }
  if (durable_ && ::fdatasync(fd) != 0) {
    StorageFailure("fdatasync " + std::string(LogFileName(kind)));
  }
}

std::vector<Json> BattleStore::ReadLog(LogKind kind) const {
  std::vector<Json> records;
  const fs::path path = LogPath(kind);
  std::ifstream in(path);
  if (!in) return records;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    try {
      records.push_back(Json::parse(line));
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::kStorageError, path.string() + ":" +
                                                std::to_string(number) + ": " +
                                                e.what());
    }
  }
  return records;
}

std::string BattleStore::PutArtifact(std::string_view bytes) {
  const std::string hash = Sha256Hex(bytes);
  const fs::path dir = artifact_dir() / hash.substr(0, 2);
  const fs::path path = dir / hash;
  std::error_code ec;
  if (fs::exists(path, ec)) return hash;
  fs::create_directories(dir, ec);
  if (ec) {
    throw Error(ErrorCode::kStorageError, "cannot create " + dir.string());
  }
  WriteFileAtomic(path, bytes);
  return hash;
}

std::optional<std::string> BattleStore::GetArtifact(std::string_view hash) const {
  if (!IsSha256Hex(hash)) return std::nullopt;
  const fs::path path =
      artifact_dir() / std::string(hash.substr(0, 2)) / std::string(hash);
  std::error_code ec;
  if (!fs::exists(path, ec)) return std::nullopt;
  return ReadFile(path);
}

}  // namespace arena
