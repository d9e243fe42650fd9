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

#ifndef ARENA_TESTS_SUPPORT_ORACLES_HPP_
#define ARENA_TESTS_SUPPORT_ORACLES_HPP_

// Test-only reference computations. These deliberately avoid the library's
// solver paths so they can serve as independent oracles.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "arena/ranking.hpp"

namespace arena::testing {

inline std::vector<ModelId> Roster(std::initializer_list<const char*> names) {
  std::vector<ModelId> roster;
  for (const char* n : names) roster.emplace_back(n);
  return roster;
}

inline std::vector<ModelId> NumberedRoster(int m) {
  std::vector<ModelId> roster;
  for (int i = 0; i < m; ++i) roster.emplace_back("model-" + std::to_string(i));
  return roster;
}

// Draws votes from the Bradley-Terry model with coefficients `beta`: uniform
// unordered pair, fair side assignment, winner by e^bi / (e^bi + e^bj).
inline std::vector<ranking::VoteOutcome> SimulateVotes(
    const std::vector<ModelId>& roster, const std::vector<double>& beta,
    int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int m = static_cast<int>(roster.size());
  std::vector<ranking::VoteOutcome> votes;
  votes.reserve(static_cast<std::size_t>(count));
  for (int t = 0; t < count; ++t) {
    int i = static_cast<int>(rng() % static_cast<std::uint64_t>(m));
    int j = static_cast<int>(rng() % static_cast<std::uint64_t>(m - 1));
    if (j >= i) ++j;
    const double p = 1.0 / (1.0 + std::exp(beta[static_cast<std::size_t>(j)] -
                                           beta[static_cast<std::size_t>(i)]));
    const bool i_wins = unit(rng) < p;
    votes.push_back({roster[static_cast<std::size_t>(i)],
                     roster[static_cast<std::size_t>(j)],
                     i_wins ? ranking::Outcome::kLeftWins
                            : ranking::Outcome::kRightWins});
  }
  return votes;
}

// Log-likelihood from Eq.-1 probabilities, summed vote by vote.
inline double DirectLogLikelihood(
    const std::vector<ranking::VoteOutcome>& votes,
    const std::vector<ModelId>& roster, const std::vector<double>& beta) {
  auto idx = [&](const ModelId& m) {
    for (std::size_t i = 0; i < roster.size(); ++i) {
      if (roster[i] == m) return i;
    }
    return roster.size();
  };
  double total = 0.0;
  for (const auto& v : votes) {
    const double bl = beta[idx(v.left)];
    const double br = beta[idx(v.right)];
    const double pl = std::exp(bl) / (std::exp(bl) + std::exp(br));
    switch (v.outcome) {
      case ranking::Outcome::kLeftWins: total += std::log(pl); break;
      case ranking::Outcome::kRightWins: total += std::log(1.0 - pl); break;
      case ranking::Outcome::kTie:
        total += 0.5 * std::log(pl) + 0.5 * std::log(1.0 - pl);
        break;
    }
  }
  return total;
}

// Exhaustive search over a lattice of step `step` on [-span, span]^2 for a
// three-model roster anchored by b3 = -b1 - b2.
inline std::vector<double> GridSearchThreeModels(
    const std::vector<ranking::VoteOutcome>& votes,
    const std::vector<ModelId>& roster, double span = 3.0, double step = 0.01) {
  const int n = static_cast<int>(std::lround(2 * span / step));
  std::vector<double> best = {0, 0, 0};
  double best_ll = -INFINITY;
  for (int a = 0; a <= n; ++a) {
    for (int b = 0; b <= n; ++b) {
      const double b1 = -span + a * step;
      const double b2 = -span + b * step;
      const std::vector<double> beta = {b1, b2, -b1 - b2};
      const double ll = DirectLogLikelihood(votes, roster, beta);
      if (ll > best_ll) {
        best_ll = ll;
        best = beta;
      }
    }
  }
  return best;
}

// Maximum-likelihood coefficients by the minorize-maximize (Zermelo)
// iteration, ties credited half to each side; normalized to sum to zero.
// Independent of the Newton fitter and slow, for cross-checks only.
inline std::vector<double> MmBradleyTerry(const std::vector<ranking::VoteOutcome>& votes,
                                          const std::vector<ModelId>& roster,
                                          int iterations = 20000) {
  const std::size_t m = roster.size();
  auto idx = [&](const ModelId& model) {
    for (std::size_t i = 0; i < m; ++i) {
      if (roster[i] == model) return i;
    }
    return m;
  };
  std::vector<std::vector<double>> wins(m, std::vector<double>(m, 0.0));
  for (const auto& v : votes) {
    const std::size_t l = idx(v.left), r = idx(v.right);
    switch (v.outcome) {
      case ranking::Outcome::kLeftWins: wins[l][r] += 1; break;
      case ranking::Outcome::kRightWins: wins[r][l] += 1; break;
      case ranking::Outcome::kTie:
        wins[l][r] += 0.5;
        wins[r][l] += 0.5;
        break;
    }
  }
  std::vector<double> strength(m, 1.0);
  for (int it = 0; it < iterations; ++it) {
    std::vector<double> next(m);
    for (std::size_t i = 0; i < m; ++i) {
      double total_wins = 0, denominator = 0;
      for (std::size_t j = 0; j < m; ++j) {
        if (i == j) continue;
        total_wins += wins[i][j];
        const double n = wins[i][j] + wins[j][i];
        if (n > 0) denominator += n / (strength[i] + strength[j]);
      }
      next[i] = total_wins / denominator;
    }
    double log_mean = 0;
    for (double x : next) log_mean += std::log(x) / static_cast<double>(m);
    for (std::size_t i = 0; i < m; ++i) strength[i] = next[i] / std::exp(log_mean);
  }
  std::vector<double> beta(m);
  for (std::size_t i = 0; i < m; ++i) beta[i] = std::log(strength[i]);
  return beta;
}

inline std::vector<int> BruteForceRanks(const std::vector<double>& beta) {
  std::vector<int> ranks(beta.size(), 1);
  for (std::size_t m = 0; m < beta.size(); ++m) {
    for (std::size_t k = 0; k < beta.size(); ++k) {
      if (beta[k] > beta[m]) ++ranks[m];
    }
  }
  return ranks;
}

// Average ranks, then Pearson correlation of the ranks.
inline double Spearman(const std::vector<double>& x,
                       const std::vector<double>& y) {
  auto ranks = [](const std::vector<double>& v) {
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      double less = 0, equal = 0;
      for (double w : v) {
        if (w < v[i]) ++less;
        if (w == v[i]) ++equal;
      }
      r[i] = less + (equal + 1) / 2.0;
    }
    return r;
  };
  const auto rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += rx[i] / n;
    my += ry[i] / n;
  }
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace arena::testing

#endif  // ARENA_TESTS_SUPPORT_ORACLES_HPP_
