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

#ifndef ARENA_ERROR_HPP_
#define ARENA_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace arena {

// Every failure surfaced by the library carries one of these codes. The CLI
// and the HTTP layer map them onto exit codes and status codes.
enum class ErrorCode {
  kInvalidArgument,
  kSchemaError,
  kUnknownAction,
  kOrderError,
  kEmptyVotes,
  kUnknownModel,
  kRosterTooSmall,
  kRunnerUnreachable,
  kProtocolViolation,
  kTimeout,
  kValidationError,
  kDuplicateVote,
  kBattleNotReady,
  kInvalidChoice,
  kIndexOutOfRange,
  kMissingReason,
  kNotFound,
  kNoVotes,
  kJudgeUnavailable,
  kMalformedVerdict,
  kProposerUnavailable,
  kEmbedderUnavailable,
  kDegenerateCluster,
  kScorerUnavailable,
  kGeneratorUnavailable,
  kStallDetected,
  kInsufficientCombinations,
  kFileError,
  kNotEnoughRows,
  kNoComparablePairs,
  kDisjointItemSets,
  kStorageError,
  kClientUnavailable,
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace arena

#endif  // ARENA_ERROR_HPP_
