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

#ifndef ARENA_RANKING_HPP_
#define ARENA_RANKING_HPP_

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "arena/bradley_terry.hpp"
#include "arena/domain.hpp"

namespace arena::ranking {

enum class Outcome { kLeftWins, kRightWins, kTie };

struct VoteOutcome {
  ModelId left;
  ModelId right;
  Outcome outcome = Outcome::kTie;
};

// How a tie enters the likelihood and the win-fraction matrix.
enum class TiePolicy {
  kHalfWin,  // half a win credited to each side
  kIgnore,   // ties are dropped from the likelihood and count as neither
};

std::string_view ToString(TiePolicy policy);
TiePolicy ParseTiePolicy(std::string_view text);

// Virtual tie weight added on every pair when the observed data admits no
// finite maximizer.
inline constexpr double kRegularizationWeight = 1e-6;
inline constexpr double kGradientTolerance = 1e-8;

inline double PredictWinProb(double beta_i, double beta_j) {
  return bt::WinProbability(beta_i, beta_j);
}

struct BtFit {
  std::vector<ModelId> roster;
  Eigen::VectorXd coefficients;  // roster order, sums to zero
  std::vector<bool> degenerate;  // true for models without any counted battle
  TiePolicy tie_policy = TiePolicy::kHalfWin;
  double log_likelihood = 0.0;
  bool regularized = false;
  double gradient_norm = 0.0;
  int iterations = 0;

  static constexpr std::string_view kAnchor = "sum_zero";

  double coefficient(const ModelId& model) const;
  Eigen::Index index_of(const ModelId& model) const;
};

// Credited-win matrix W(i, j) in roster order under the tie policy.
Eigen::MatrixXd TallyWins(const std::vector<VoteOutcome>& votes,
                          const std::vector<ModelId>& roster,
                          TiePolicy policy);

BtFit FitBt(const std::vector<VoteOutcome>& votes,
            const std::vector<ModelId>& roster,
            TiePolicy policy = TiePolicy::kHalfWin);

Eigen::VectorXi PointRank(const BtFit& fit);

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

struct BootstrapResult {
  std::vector<ModelId> roster;
  std::vector<Interval> intervals;  // roster order
  Eigen::MatrixXd samples;          // rounds x models, failed rounds are NaN
  int rounds = 0;
  int failed_rounds = 0;
};

// Percentile bootstrap over individual votes. Round r draws from an engine
// seeded with (seed, r), so the result does not depend on scheduling.
BootstrapResult BootstrapIntervals(const std::vector<VoteOutcome>& votes,
                                   const std::vector<ModelId>& roster,
                                   int rounds, std::uint64_t seed,
                                   TiePolicy policy = TiePolicy::kHalfWin,
                                   double confidence = 0.95);

Eigen::VectorXi CiRank(const std::vector<Interval>& intervals);

// Linear-interpolated empirical quantile of `values` (copied and sorted).
double Quantile(std::vector<double> values, double q);

struct PairwiseMatrices {
  std::vector<ModelId> roster;
  // NaN marks a pair with no battles.
  Eigen::MatrixXd win_fraction;
  Eigen::MatrixXd tie_fraction;
  Eigen::MatrixXi battle_counts;
  Eigen::VectorXd avg_win_rate;  // NaN for models with no battles
};

PairwiseMatrices ComputePairwiseMatrices(const std::vector<VoteOutcome>& votes,
                                         const std::vector<ModelId>& roster,
                                         TiePolicy policy = TiePolicy::kHalfWin);

struct LeaderboardOptions {
  int bootstrap_rounds = 100;
  std::uint64_t seed = 0;
  TiePolicy tie_policy = TiePolicy::kHalfWin;
  double confidence = 0.95;
};

struct LeaderboardSnapshot {
  BtFit fit;
  // Bootstrap percentiles widened, when needed, to contain the point
  // estimate.
  std::vector<Interval> intervals;
  Eigen::VectorXi point_ranks;
  Eigen::VectorXi ci_ranks;
  PairwiseMatrices matrices;
  int bootstrap_rounds = 0;
  std::uint64_t seed = 0;
  double confidence = 0.95;

  // Roster indices by descending coefficient, ties by model name.
  std::vector<Eigen::Index> display_order() const;
};

LeaderboardSnapshot BuildLeaderboard(const std::vector<VoteOutcome>& votes,
                                     const std::vector<ModelId>& roster,
                                     const LeaderboardOptions& options = {});

Json SnapshotToJson(const LeaderboardSnapshot& snapshot);
// model,beta,lower,upper,point_rank,ci_rank,avg_win_rate
std::string SnapshotToCsv(const LeaderboardSnapshot& snapshot);

// Shortest decimal form that round-trips the double.
std::string FormatDouble(double value);

// Left/Right/Tie vote -> outcome for a battle between `left` and `right`.
VoteOutcome ToOutcome(const ModelId& left, const ModelId& right,
                      VoteChoice choice);

}  // namespace arena::ranking

#endif  // ARENA_RANKING_HPP_
