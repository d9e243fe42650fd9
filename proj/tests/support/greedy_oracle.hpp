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

#ifndef ARENA_TESTS_SUPPORT_GREEDY_ORACLE_HPP_
#define ARENA_TESTS_SUPPORT_GREEDY_ORACLE_HPP_

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "arena/miner.hpp"

namespace arena::testing {

// Greedy path computed without any cache: every candidate extension is
// rescored from scratch with the same selection rule (lowest mean PPL,
// ties by feature text, stop unless strictly better).
inline std::vector<Eigen::Index> OracleGreedy(const miner::FeatureMatrix& m,
                                              miner::SequenceScorer& scorer, int budget,
                                              std::vector<double>* trajectory) {
  auto fresh = [&](const std::vector<Eigen::Index>& phi) {
    double sum = 0;
    for (std::size_t i = 0; i < m.texts.size(); ++i) {
      std::vector<std::string> active;
      for (Eigen::Index f : phi) {
        if (m.values(static_cast<Eigen::Index>(i), f) == 1) {
          active.push_back(m.features[static_cast<std::size_t>(f)]);
        }
      }
      sum += miner::TextPerplexity(scorer.Score(miner::ReconstructionContext(active), m.texts[i]));
    }
    return sum / static_cast<double>(m.texts.size());
  };
  std::vector<Eigen::Index> phi;
  double current = fresh(phi);
  while (static_cast<int>(phi.size()) < budget) {
    std::optional<Eigen::Index> best;
    double best_value = 0;
    for (Eigen::Index f = 0; f < m.values.cols(); ++f) {
      if (std::find(phi.begin(), phi.end(), f) != phi.end()) continue;
      std::vector<Eigen::Index> next = phi;
      next.push_back(f);
      const double v = fresh(next);
      if (!best || v < best_value ||
          (v == best_value && m.features[static_cast<std::size_t>(f)] <
                                  m.features[static_cast<std::size_t>(*best)])) {
        best = f;
        best_value = v;
      }
    }
    if (!best || !(best_value < current)) break;
    phi.push_back(*best);
    current = best_value;
    trajectory->push_back(current);
  }
  return phi;
}

}  // namespace arena::testing

#endif  // ARENA_TESTS_SUPPORT_GREEDY_ORACLE_HPP_
