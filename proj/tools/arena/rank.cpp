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

#include <algorithm>
#include <set>

#include "arena/error.hpp"
#include "arena/ranking.hpp"
#include "cli.hpp"

namespace arena::cli {
namespace {

struct RankOptions {
  std::string data_dir;
  std::string votes_path;
  std::string format = "json";
  int rounds = -1;
  std::string tie_policy;
  double confidence = -1.0;
  std::string out;
};

// Leaderboard options from the config's "leaderboard" section, then flags.
ranking::LeaderboardOptions ResolveOptions(const RankOptions& options, const Globals& globals) {
  ranking::LeaderboardOptions resolved;
  if (!globals.config_path.empty()) {
    resolved = ServiceConfigFromJson(LoadConfig(globals)).leaderboard;
  }
  if (globals.seed_given) resolved.seed = globals.seed;
  if (options.rounds >= 0) resolved.bootstrap_rounds = options.rounds;
  if (!options.tie_policy.empty()) resolved.tie_policy = ranking::ParseTiePolicy(options.tie_policy);
  if (options.confidence >= 0.0) {
    if (!(options.confidence > 0.0 && options.confidence < 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, "--confidence must lie in (0, 1)");
    }
    resolved.confidence = options.confidence;
  }
  return resolved;
}

// Votes file: one {"left", "right", "choice"} object per line.
std::vector<ranking::VoteOutcome> ReadVotes(const std::string& path,
                                            std::vector<ModelId>* roster) {
  std::vector<ranking::VoteOutcome> votes;
  std::set<std::string> names;
  std::size_t line = 0;
  for (const Json& row : ReadJsonl(path)) {
    ++line;
    try {
      const ModelId left(row.at("left").get<std::string>());
      const ModelId right(row.at("right").get<std::string>());
      votes.push_back(ranking::ToOutcome(left, right,
                                         ParseVoteChoice(row.at("choice").get<std::string>())));
      names.insert(left.name);
      names.insert(right.name);
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::kSchemaError,
                  path + ": vote " + std::to_string(line) + ": " + e.what());
    }
  }
  if (roster->empty()) {
    for (const std::string& name : names) roster->emplace_back(name);
  }
  return votes;
}

int RunRank(const RankOptions& options, const Globals& globals) {
  if (options.data_dir.empty() == options.votes_path.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "give exactly one of --data-dir or --votes");
  }
  if (options.format != "json" && options.format != "csv") {
    throw Error(ErrorCode::kInvalidArgument, "--format must be json or csv");
  }
  const ranking::LeaderboardOptions leaderboard = ResolveOptions(options, globals);

  if (!options.data_dir.empty()) {
    DataView view(options.data_dir, globals, leaderboard);
    Emit(options.out,
         options.format == "json" ? view.service().LeaderboardJson() : view.service().LeaderboardCsv());
    return 0;
  }

  std::vector<ModelId> roster;
  if (!globals.config_path.empty()) roster = ServiceConfigFromJson(LoadConfig(globals)).models();
  const auto votes = ReadVotes(options.votes_path, &roster);
  Info(globals, "fitting " + std::to_string(votes.size()) + " votes over " +
                    std::to_string(roster.size()) + " models");
  const ranking::LeaderboardSnapshot snapshot = ranking::BuildLeaderboard(votes, roster, leaderboard);
  Emit(options.out, options.format == "json" ? ranking::SnapshotToJson(snapshot).dump(2) + "\n"
                                             : ranking::SnapshotToCsv(snapshot));
  return 0;
}

}  // namespace

Command AddRank(CLI::App& app, const Globals& globals) {
  auto options = std::make_shared<RankOptions>();
  CLI::App* sub = app.add_subcommand("rank", "Fit the Bradley-Terry leaderboard");
  sub->add_option("--data-dir", options->data_dir, "Arena data directory");
  sub->add_option("--votes", options->votes_path, "Votes JSONL: {\"left\",\"right\",\"choice\"}");
  sub->add_option("--format", options->format, "json or csv")->capture_default_str();
  sub->add_option("--rounds", options->rounds, "Bootstrap rounds (default 100)");
  sub->add_option("--tie-policy", options->tie_policy, "half_win or ignore (default half_win)");
  sub->add_option("--confidence", options->confidence, "Interval level (default 0.95)");
  sub->add_option("-o,--out", options->out, "Output file (default stdout)");
  return {sub, [options, &globals] { return RunRank(*options, globals); }};
}

}  // namespace arena::cli
