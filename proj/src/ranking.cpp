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

#include "arena/ranking.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "arena/error.hpp"

namespace arena::ranking {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::map<std::string, Eigen::Index> IndexRoster(
    const std::vector<ModelId>& roster) {
  if (roster.size() < 2) {
    throw Error(ErrorCode::kRosterTooSmall, "ranking needs at least two models");
  }
  std::map<std::string, Eigen::Index> index;
  for (std::size_t i = 0; i < roster.size(); ++i) {
    if (roster[i].empty()) {
      throw Error(ErrorCode::kInvalidArgument, "empty model id in roster");
    }
    if (!index.emplace(roster[i].name, static_cast<Eigen::Index>(i)).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  "duplicate model " + roster[i].name + " in roster");
    }
  }
  return index;
}

std::pair<Eigen::Index, Eigen::Index> LookupPair(
    const std::map<std::string, Eigen::Index>& index, const VoteOutcome& vote) {
  auto left = index.find(vote.left.name);
  auto right = index.find(vote.right.name);
  if (left == index.end() || right == index.end()) {
    throw Error(ErrorCode::kUnknownModel,
                "vote references a model outside the roster: " +
                    (left == index.end() ? vote.left.name : vote.right.name));
  }
  if (left->second == right->second) {
    throw Error(ErrorCode::kInvalidArgument,
                "vote compares " + vote.left.name + " with itself");
  }
  return {left->second, right->second};
}

}  // namespace

std::string_view ToString(TiePolicy policy) {
  return policy == TiePolicy::kHalfWin ? "half_win" : "ignore";
}

TiePolicy ParseTiePolicy(std::string_view text) {
  if (text == "half_win") return TiePolicy::kHalfWin;
  if (text == "ignore") return TiePolicy::kIgnore;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown tie policy \"" + std::string(text) + "\"");
}

double BtFit::coefficient(const ModelId& model) const {
  return coefficients(index_of(model));
}

Eigen::Index BtFit::index_of(const ModelId& model) const {
  for (std::size_t i = 0; i < roster.size(); ++i) {
    if (roster[i] == model) return static_cast<Eigen::Index>(i);
  }
  throw Error(ErrorCode::kUnknownModel, model.name + " is not in the fit");
}

Eigen::MatrixXd TallyWins(const std::vector<VoteOutcome>& votes,
                          const std::vector<ModelId>& roster,
                          TiePolicy policy) {
  const auto index = IndexRoster(roster);
  const auto m = static_cast<Eigen::Index>(roster.size());
  Eigen::MatrixXd wins = Eigen::MatrixXd::Zero(m, m);
  for (const VoteOutcome& vote : votes) {
    const auto [l, r] = LookupPair(index, vote);
    switch (vote.outcome) {
      case Outcome::kLeftWins:
        wins(l, r) += 1.0;
        break;
      case Outcome::kRightWins:
        wins(r, l) += 1.0;
        break;
      case Outcome::kTie:
        if (policy == TiePolicy::kHalfWin) {
          wins(l, r) += 0.5;
          wins(r, l) += 0.5;
        }
        break;
    }
  }
  return wins;
}

BtFit FitBt(const std::vector<VoteOutcome>& votes,
            const std::vector<ModelId>& roster, TiePolicy policy) {
  IndexRoster(roster);
  if (votes.empty()) throw Error(ErrorCode::kEmptyVotes, "no votes to fit");
  const Eigen::MatrixXd wins = TallyWins(votes, roster, policy);
  const auto m = static_cast<Eigen::Index>(roster.size());

  BtFit fit;
  fit.roster = roster;
  fit.tie_policy = policy;
  fit.coefficients = Eigen::VectorXd::Zero(m);
  fit.degenerate.assign(roster.size(), true);

  const Eigen::VectorXd battles =
      wins.rowwise().sum() + wins.colwise().sum().transpose();
  std::vector<Eigen::Index> active;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (battles(i) > 0) {
      active.push_back(i);
      fit.degenerate[static_cast<std::size_t>(i)] = false;
    }
  }
  if (active.size() < 2) return fit;

  const auto a = static_cast<Eigen::Index>(active.size());
  Eigen::MatrixXd sub(a, a);
  for (Eigen::Index i = 0; i < a; ++i) {
    for (Eigen::Index j = 0; j < a; ++j) sub(i, j) = wins(active[i], active[j]);
  }
  Eigen::MatrixXd objective = sub;
  if (!bt::StronglyConnected(sub)) {
    objective.array() += kRegularizationWeight / 2.0;
    objective.diagonal().setZero();
    fit.regularized = true;
  }
  bt::SolveOptions<double> options;
  options.gradient_tolerance = kGradientTolerance;
  const auto solved = bt::Solve(objective, options);

  for (Eigen::Index i = 0; i < a; ++i) {
    fit.coefficients(active[i]) = solved.beta(i);
  }
  fit.log_likelihood = bt::LogLikelihood(solved.beta, sub);
  fit.gradient_norm = solved.gradient_norm;
  fit.iterations = solved.iterations;
  return fit;
}

Eigen::VectorXi PointRank(const BtFit& fit) {
  return bt::PointRanks(fit.coefficients);
}

double Quantile(std::vector<double> values, double q) {
  if (values.empty()) return kNaN;
  std::sort(values.begin(), values.end());
  const double position = q * static_cast<double>(values.size() - 1);
  const auto below = static_cast<std::size_t>(std::floor(position));
  const std::size_t above = std::min(below + 1, values.size() - 1);
  const double frac = position - static_cast<double>(below);
  return values[below] + frac * (values[above] - values[below]);
}

BootstrapResult BootstrapIntervals(const std::vector<VoteOutcome>& votes,
                                   const std::vector<ModelId>& roster,
                                   int rounds, std::uint64_t seed,
                                   TiePolicy policy, double confidence) {
  if (rounds < 1) {
    throw Error(ErrorCode::kInvalidArgument, "bootstrap needs rounds >= 1");
  }
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "confidence must be in (0, 1)");
  }
  IndexRoster(roster);
  if (votes.empty()) throw Error(ErrorCode::kEmptyVotes, "no votes to resample");
  // Validates every vote once up front so per-round failures are real ones.
  TallyWins(votes, roster, policy);

  const auto m = static_cast<Eigen::Index>(roster.size());
  BootstrapResult result;
  result.roster = roster;
  result.rounds = rounds;
  result.samples = Eigen::MatrixXd::Constant(rounds, m, kNaN);

  std::atomic<int> next{0};
  std::mutex error_mutex;
  std::optional<Error> first_error;
  std::vector<char> failed(static_cast<std::size_t>(rounds), 0);

  auto worker = [&] {
    std::vector<VoteOutcome> sample(votes.size());
    for (int r = next++; r < rounds; r = next++) {
      std::seed_seq seq{static_cast<std::uint32_t>(seed),
                        static_cast<std::uint32_t>(seed >> 32),
                        static_cast<std::uint32_t>(r)};
      std::mt19937_64 engine(seq);
      for (auto& slot : sample) slot = votes[UniformBelow(engine, votes.size())];
      try {
        const BtFit fit = FitBt(sample, roster, policy);
        result.samples.row(r) = fit.coefficients.transpose();
      } catch (const Error& e) {
        failed[static_cast<std::size_t>(r)] = 1;
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = e;
      }
    }
  };
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned workers = std::min<unsigned>(hw, static_cast<unsigned>(rounds));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < workers; ++t) pool.emplace_back(worker);
  worker();
  for (auto& thread : pool) thread.join();

  for (char f : failed) result.failed_rounds += f;
  if (result.failed_rounds == rounds && first_error) throw *first_error;

  const double alpha = 1.0 - confidence;
  for (Eigen::Index i = 0; i < m; ++i) {
    std::vector<double> column;
    for (int r = 0; r < rounds; ++r) {
      if (!failed[static_cast<std::size_t>(r)]) {
        column.push_back(result.samples(r, i));
      }
    }
    result.intervals.push_back(
        {Quantile(column, alpha / 2.0), Quantile(column, 1.0 - alpha / 2.0)});
  }
  return result;
}

Eigen::VectorXi CiRank(const std::vector<Interval>& intervals) {
  const auto m = static_cast<Eigen::Index>(intervals.size());
  Eigen::VectorXd lower(m), upper(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    lower(i) = intervals[static_cast<std::size_t>(i)].lower;
    upper(i) = intervals[static_cast<std::size_t>(i)].upper;
  }
  return bt::IntervalRanks(lower, upper);
}

PairwiseMatrices ComputePairwiseMatrices(const std::vector<VoteOutcome>& votes,
                                         const std::vector<ModelId>& roster,
                                         TiePolicy policy) {
  const auto index = IndexRoster(roster);
  const auto m = static_cast<Eigen::Index>(roster.size());
  Eigen::MatrixXd wins = Eigen::MatrixXd::Zero(m, m);
  Eigen::MatrixXd ties = Eigen::MatrixXd::Zero(m, m);
  Eigen::MatrixXi counts = Eigen::MatrixXi::Zero(m, m);
  for (const VoteOutcome& vote : votes) {
    const auto [l, r] = LookupPair(index, vote);
    ++counts(l, r);
    ++counts(r, l);
    if (vote.outcome == Outcome::kLeftWins) wins(l, r) += 1.0;
    if (vote.outcome == Outcome::kRightWins) wins(r, l) += 1.0;
    if (vote.outcome == Outcome::kTie) {
      ties(l, r) += 1.0;
      ties(r, l) += 1.0;
    }
  }

  PairwiseMatrices out;
  out.roster = roster;
  out.battle_counts = counts;
  out.win_fraction = Eigen::MatrixXd::Constant(m, m, kNaN);
  out.tie_fraction = Eigen::MatrixXd::Constant(m, m, kNaN);
  out.avg_win_rate = Eigen::VectorXd::Constant(m, kNaN);
  for (Eigen::Index i = 0; i < m; ++i) {
    double sum = 0.0;
    int opponents = 0;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (counts(i, j) == 0) continue;
      const double n = counts(i, j);
      if (policy == TiePolicy::kHalfWin) {
        out.win_fraction(i, j) = (wins(i, j) + 0.5 * ties(i, j)) / n;
        out.tie_fraction(i, j) = 0.0;
      } else {
        out.win_fraction(i, j) = wins(i, j) / n;
        out.tie_fraction(i, j) = ties(i, j) / n;
      }
      sum += out.win_fraction(i, j);
      ++opponents;
    }
    if (opponents > 0) out.avg_win_rate(i) = sum / opponents;
  }
  return out;
}

std::vector<Eigen::Index> LeaderboardSnapshot::display_order() const {
  std::vector<Eigen::Index> order(fit.roster.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    order[i] = static_cast<Eigen::Index>(i);
  }
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (fit.coefficients(a) != fit.coefficients(b)) {
      return fit.coefficients(a) > fit.coefficients(b);
    }
    return fit.roster[static_cast<std::size_t>(a)].name <
           fit.roster[static_cast<std::size_t>(b)].name;
  });
  return order;
}

LeaderboardSnapshot BuildLeaderboard(const std::vector<VoteOutcome>& votes,
                                     const std::vector<ModelId>& roster,
                                     const LeaderboardOptions& options) {
  LeaderboardSnapshot snapshot;
  snapshot.fit = FitBt(votes, roster, options.tie_policy);
  const BootstrapResult boot =
      BootstrapIntervals(votes, roster, options.bootstrap_rounds, options.seed,
                         options.tie_policy, options.confidence);
  snapshot.intervals = boot.intervals;
  for (std::size_t i = 0; i < snapshot.intervals.size(); ++i) {
    const double beta = snapshot.fit.coefficients(static_cast<Eigen::Index>(i));
    auto& interval = snapshot.intervals[i];
    interval.lower = std::min(interval.lower, beta);
    interval.upper = std::max(interval.upper, beta);
  }
  snapshot.point_ranks = PointRank(snapshot.fit);
  snapshot.ci_ranks = CiRank(snapshot.intervals);
  snapshot.matrices = ComputePairwiseMatrices(votes, roster, options.tie_policy);
  snapshot.bootstrap_rounds = options.bootstrap_rounds;
  snapshot.seed = options.seed;
  snapshot.confidence = options.confidence;
  return snapshot;
}

namespace {

Json NumberOrNull(double value) {
  return std::isfinite(value) ? Json(value) : Json(nullptr);
}

}  // namespace

Json SnapshotToJson(const LeaderboardSnapshot& snapshot) {
  const auto order = snapshot.display_order();
  const BtFit& fit = snapshot.fit;
  Json models = Json::array();
  Json names = Json::array();
  for (Eigen::Index i : order) {
    const auto k = static_cast<std::size_t>(i);
    names.push_back(fit.roster[k].name);
    models.push_back({
        {"model", fit.roster[k].name},
        {"beta", fit.coefficients(i)},
        {"lower", snapshot.intervals[k].lower},
        {"upper", snapshot.intervals[k].upper},
        {"point_rank", snapshot.point_ranks(i)},
        {"ci_rank", snapshot.ci_ranks(i)},
        {"avg_win_rate", NumberOrNull(snapshot.matrices.avg_win_rate(i))},
        {"battles", snapshot.matrices.battle_counts.row(i).sum()},
        {"degenerate", static_cast<bool>(fit.degenerate[k])},
    });
  }
  Json win = Json::array(), tie = Json::array(), counts = Json::array();
  for (Eigen::Index i : order) {
    Json win_row = Json::array(), tie_row = Json::array(),
         count_row = Json::array();
    for (Eigen::Index j : order) {
      win_row.push_back(NumberOrNull(snapshot.matrices.win_fraction(i, j)));
      tie_row.push_back(NumberOrNull(snapshot.matrices.tie_fraction(i, j)));
      count_row.push_back(snapshot.matrices.battle_counts(i, j));
    }
    win.push_back(std::move(win_row));
    tie.push_back(std::move(tie_row));
    counts.push_back(std::move(count_row));
  }
  return {
      {"schema", "arena.leaderboard/v1"},
      {"anchor", BtFit::kAnchor},
      {"tie_policy", ToString(fit.tie_policy)},
      {"bootstrap_rounds", snapshot.bootstrap_rounds},
      {"seed", snapshot.seed},
      {"confidence", snapshot.confidence},
      {"log_likelihood", fit.log_likelihood},
      {"regularized", fit.regularized},
      {"order", std::move(names)},
      {"models", std::move(models)},
      {"win_fraction", std::move(win)},
      {"tie_fraction", std::move(tie)},
      {"battle_counts", std::move(counts)},
  };
}

std::string FormatDouble(double value) {
  if (std::isnan(value)) return "";
  char buffer[64];
  auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, end);
}

std::string SnapshotToCsv(const LeaderboardSnapshot& snapshot) {
  std::ostringstream out;
  out << "model,beta,lower,upper,point_rank,ci_rank,avg_win_rate\n";
  for (Eigen::Index i : snapshot.display_order()) {
    const auto k = static_cast<std::size_t>(i);
    out << snapshot.fit.roster[k].name << ','
        << FormatDouble(snapshot.fit.coefficients(i)) << ','
        << FormatDouble(snapshot.intervals[k].lower) << ','
        << FormatDouble(snapshot.intervals[k].upper) << ','
        << snapshot.point_ranks(i) << ',' << snapshot.ci_ranks(i) << ','
        << FormatDouble(snapshot.matrices.avg_win_rate(i)) << '\n';
  }
  return out.str();
}

VoteOutcome ToOutcome(const ModelId& left, const ModelId& right,
                      VoteChoice choice) {
  switch (choice) {
    case VoteChoice::kLeft: return {left, right, Outcome::kLeftWins};
    case VoteChoice::kRight: return {left, right, Outcome::kRightWins};
    case VoteChoice::kTie: return {left, right, Outcome::kTie};
  }
  return {left, right, Outcome::kTie};
}

}  // namespace arena::ranking
