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

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 when any
// criterion fails. Runs fully offline; mock runners stand in for the browser
// and the heuristic client for the judge.

#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <thread>
#include <string>
#include <vector>

#include "arena/analytics.hpp"
#include "arena/bradley_terry.hpp"
#include "arena/error.hpp"
#include "arena/judge.hpp"
#include "arena/miner.hpp"
#include "arena/ranking.hpp"
#include "arena/runner.hpp"
#include "arena/service.hpp"
#include "arena/util.hpp"
#include "support/captcha_fuzz.hpp"
#include "support/greedy_oracle.hpp"
#include "support/oracles.hpp"
#include "support/temp_dir.hpp"

namespace arena {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

const fs::path kFixtures = ARENA_FIXTURE_DIR;

struct Verdict {
  bool pass = false;
  std::string detail;
};

// Collects failed sub-conditions so the line can say what went wrong.
class Conditions {
 public:
  void Require(bool ok, const std::string& what) {
    if (!ok) failures_.push_back(what);
  }
  Verdict Finish(const std::string& detail) const {
    if (failures_.empty()) return {true, detail};
    std::string text = detail + "; failed:";
    for (const std::string& f : failures_) text += " [" + f + "]";
    return {false, text};
  }

 private:
  std::vector<std::string> failures_;
};

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

std::string Fmt(double value, int digits = 4) {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(digits);
  out << value;
  return out.str();
}

// ---------------------------------------------------------------------------
// Ranking.

const std::vector<double> kTruth = {1.0, 0.5, 0.0, -0.5, -1.0};

// With 2000 votes the sampling error of a single draw is itself about
// +-0.03 for the most lopsided pair, so the tolerance is applied to each
// pair's mean absolute error over 20 seeded replications. The fit is also
// checked against an independent MM maximum-likelihood solver.
Verdict BtRecovery() {
  Conditions c;
  const auto roster = testing::NumberedRoster(5);
  constexpr int kReplications = 20;
  double mean_abs[5][5] = {};
  double single_worst = 0;
  double mle_gap = 0;
  double slowest = 0;
  int rho_misses = 0;
  for (int rep = 0; rep < kReplications; ++rep) {
    const auto votes = testing::SimulateVotes(roster, kTruth, 2000, 20260101 + rep);
    const auto start = Clock::now();
    const ranking::BtFit fit = ranking::FitBt(votes, roster);
    slowest = std::max(slowest, Seconds(start));
    const std::vector<double> fitted(fit.coefficients.data(), fit.coefficients.data() + 5);
    const std::vector<double> mle = testing::MmBradleyTerry(votes, roster);
    for (std::size_t i = 0; i < 5; ++i) {
      mle_gap = std::max(mle_gap, std::abs(fitted[i] - mle[i]));
      for (std::size_t j = i + 1; j < 5; ++j) {
        const double error = std::abs(ranking::PredictWinProb(fitted[i], fitted[j]) -
                                      ranking::PredictWinProb(kTruth[i], kTruth[j]));
        mean_abs[i][j] += error / kReplications;
        if (rep == 0) single_worst = std::max(single_worst, error);
      }
    }
    rho_misses += testing::Spearman(fitted, kTruth) != 1.0;
  }
  double worst = 0;
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = i + 1; j < 5; ++j) worst = std::max(worst, mean_abs[i][j]);
  }
  c.Require(worst <= 0.03, "per-pair mean |p_fit - p_true| <= 0.03");
  c.Require(mle_gap < 1e-6, "fit equals the MM maximum-likelihood solution");
  c.Require(rho_misses == 0, "Spearman = 1 in every replication");
  c.Require(slowest < 5.0, "runtime < 5 s");
  return c.Finish("2000 votes, 5 models, 20 replications: worst per-pair mean |dp| = " +
                  Fmt(worst) + " (first replication alone: " + Fmt(single_worst) +
                  "), Spearman = 1 in " + std::to_string(kReplications - rho_misses) + "/" +
                  std::to_string(kReplications) + ", |beta - MLE| <= " + Fmt(mle_gap, 10) +
                  ", slowest fit " + Fmt(slowest, 3) + " s");
}

Verdict TwoModelClosedForm() {
  std::vector<ranking::VoteOutcome> votes(3, {ModelId("A"), ModelId("B"), ranking::Outcome::kLeftWins});
  votes.push_back({ModelId("A"), ModelId("B"), ranking::Outcome::kRightWins});
  const ranking::BtFit fit = ranking::FitBt(votes, testing::Roster({"A", "B"}));
  const double diff = fit.coefficient(ModelId("A")) - fit.coefficient(ModelId("B"));
  const double error = std::abs(diff - std::log(3.0));
  Conditions c;
  c.Require(error < 1e-6, "|diff - ln 3| < 1e-6");
  return c.Finish("3-1 record: beta_A - beta_B = " + Fmt(diff, 9) + ", |error| = " +
                  Fmt(error, 12));
}

Verdict PointRankBruteForce() {
  std::mt19937_64 rng(91);
  std::normal_distribution<double> normal;
  int mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int m = 2 + static_cast<int>(UniformBelow(rng, 9));
    std::vector<double> beta(static_cast<std::size_t>(m));
    // Every other vector is rounded to quarter steps so ties occur.
    for (double& b : beta) b = trial % 2 ? normal(rng) : std::round(normal(rng) * 4) / 4;
    const Eigen::VectorXi ranks = bt::PointRanks(Eigen::Map<const Eigen::VectorXd>(beta.data(), m));
    const std::vector<int> expected = testing::BruteForceRanks(beta);
    for (int i = 0; i < m; ++i) mismatches += ranks(i) != expected[static_cast<std::size_t>(i)];
  }
  Conditions c;
  c.Require(mismatches == 0, "no mismatching rank");
  return c.Finish("1000 coefficient vectors (M = 2..10, half with ties): " +
                  std::to_string(mismatches) + " mismatches");
}

Verdict BootstrapCoverage() {
  Conditions c;
  const auto roster = testing::NumberedRoster(5);
  const auto votes = testing::SimulateVotes(roster, kTruth, 2000, 20260101);
  const auto start = Clock::now();
  ranking::BootstrapIntervals(votes, roster, 100, 5);
  const double elapsed = Seconds(start);
  c.Require(elapsed < 30.0, "100 rounds < 30 s");

  int covered = 0;
  int cells = 0;
  for (std::uint64_t rep = 0; rep < 20; ++rep) {
    const auto sample = testing::SimulateVotes(roster, kTruth, 2000, 5000 + rep);
    ranking::LeaderboardOptions options;
    options.bootstrap_rounds = 100;
    options.seed = 900 + rep;
    const ranking::LeaderboardSnapshot snapshot = ranking::BuildLeaderboard(sample, roster, options);
    for (std::size_t i = 0; i < kTruth.size(); ++i) {
      covered += snapshot.intervals[i].lower <= kTruth[i] && kTruth[i] <= snapshot.intervals[i].upper;
      ++cells;
    }
  }
  const double rate = static_cast<double>(covered) / cells;
  c.Require(rate >= 0.85, "coverage >= 85%");
  return c.Finish("100 rounds in " + Fmt(elapsed, 2) + " s; nominal-95% intervals cover truth in " +
                  std::to_string(covered) + "/" + std::to_string(cells) + " cells (" +
                  Fmt(100 * rate, 1) + "%)");
}

// ---------------------------------------------------------------------------
// Pairing.

Verdict UniformPairSampling() {
  const auto roster = testing::NumberedRoster(5);
  std::mt19937_64 rng(1234);
  std::map<std::pair<std::string, std::string>, int> counts;
  int left_lower = 0;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    const auto [left, right] = runner::SamplePair(roster, rng);
    const auto key = std::minmax(left.name, right.name);
    ++counts[{key.first, key.second}];
    left_lower += left.name < right.name;
  }
  const double expected = draws / 10.0;
  double chi2 = 0;
  for (const auto& [pair, n] : counts) chi2 += (n - expected) * (n - expected) / expected;
  // chi^2(9) upper 1% point.
  constexpr double kCritical = 21.666;
  Conditions c;
  c.Require(counts.size() == 10, "all 10 unordered pairs drawn");
  c.Require(chi2 < kCritical, "chi2 < 21.666");
  return c.Finish("10000 draws over C(5,2) = 10 pairs: chi2(9) = " + Fmt(chi2, 3) +
                  " (critical 21.666), lexicographically-smaller model on the left in " +
                  Fmt(100.0 * left_lower / draws, 1) + "%");
}

// ---------------------------------------------------------------------------
// Failure miner.

miner::FeatureMatrix Matrix(std::vector<std::string> texts, std::vector<std::string> features,
                            const std::vector<int>& bits) {
  miner::FeatureMatrix m;
  m.texts = std::move(texts);
  m.features = std::move(features);
  const auto n = static_cast<Eigen::Index>(m.texts.size());
  const auto k = static_cast<Eigen::Index>(m.features.size());
  m.values.resize(n, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index f = 0; f < k; ++f) m.values(i, f) = bits[static_cast<std::size_t>(i * k + f)];
  }
  return m;
}

Verdict GreedyOracle() {
  const std::vector<std::string> vocab = {"cookie", "banner", "date",  "picker", "scroll",
                                          "loop",   "login",  "popup", "search", "hotel"};
  const std::vector<std::string> feature_names = {"cookie banner", "date", "scroll loop", "login",
                                                  "popup search"};
  miner::UnigramCacheScorer scorer;
  std::mt19937_64 rng(5);
  auto texts_for = [&](int n) {
    std::vector<std::string> texts;
    for (int i = 0; i < n; ++i) {
      texts.push_back(vocab[static_cast<std::size_t>(i) % vocab.size()] + " " +
                      vocab[static_cast<std::size_t>(3 * i + 1) % vocab.size()] + " " +
                      vocab[static_cast<std::size_t>(7 * i + 2) % vocab.size()]);
    }
    return texts;
  };

  int instances = 0;
  int exhaustive = 0;
  int mismatches = 0;
  int non_decreasing = 0;
  auto check = [&](const miner::FeatureMatrix& m) {
    const int budget = static_cast<int>(m.features.size());
    const miner::SelectionResult got = miner::SelectFeaturesGreedy(m, scorer, budget);
    std::vector<double> trajectory;
    const auto expected = testing::OracleGreedy(m, scorer, budget, &trajectory);
    mismatches += got.selected != expected || got.trajectory != trajectory;
    double previous = got.baseline;
    for (double v : got.trajectory) {
      non_decreasing += !(v < previous);
      previous = v;
    }
    ++instances;
  };
  for (int n = 1; n <= 12; ++n) {
    for (int k = 1; k <= 5; ++k) {
      const std::vector<std::string> texts = texts_for(n);
      const std::vector<std::string> features(feature_names.begin(), feature_names.begin() + k);
      if (n * k <= 10) {
        // Every 0/1 assignment.
        for (std::uint32_t mask = 0; mask < (1u << (n * k)); ++mask) {
          std::vector<int> bits(static_cast<std::size_t>(n * k));
          for (int b = 0; b < n * k; ++b) bits[static_cast<std::size_t>(b)] = (mask >> b) & 1;
          check(Matrix(texts, features, bits));
          ++exhaustive;
        }
      } else {
        for (int trial = 0; trial < 40; ++trial) {
          std::vector<int> bits(static_cast<std::size_t>(n * k));
          for (int& b : bits) b = static_cast<int>(UniformBelow(rng, 2));
          check(Matrix(texts, features, bits));
        }
      }
    }
  }
  Conditions c;
  c.Require(mismatches == 0, "selection and trajectory equal the oracle");
  c.Require(non_decreasing == 0, "trajectory strictly decreasing");
  return c.Finish(std::to_string(instances) + " instances (N <= 12, K <= 5; " +
                  std::to_string(exhaustive) + " by full enumeration where N*K <= 10): " +
                  std::to_string(mismatches) + " mismatches");
}

Verdict FeaturizationBookkeeping() {
  Conditions c;
  std::vector<miner::StepExample> corpus;
  for (int i = 0; i < 218; ++i) {
    miner::StepExample e;
    e.goal_text = "goal " + std::to_string(i);
    e.feedback_text = "feedback " + std::to_string(i);
    corpus.push_back(e);
  }
  llm::ScriptedChatClient proposer(
      {"- Fails to scroll\n- Clicks the wrong element\n- Ignores the popup\n- Repeats an action"},
      /*cycle=*/true);
  miner::FeaturizationConfig config;
  config.seed = 7;
  const miner::PoolResult pool = miner::PoolProposals(corpus, proposer, config);
  c.Require(pool.hypotheses.size() == 872, "872 pooled hypotheses");

  // Ten examples tallied by hand:
  //   cookie      -> 1, 2, 4, 8   = 4 (40.0)
  //   date picker -> 3, 6         = 2 (20.0)
  //   scrolled    -> 5, 9         = 2 (20.0)
  //   captcha     -> none         = 0 (0.0)
  const std::vector<std::string> texts = {
      "cookie banner blocked the page", "cookie popup ignored",   "date picker on wrong month",
      "cookie consent loop",            "scrolled past results",  "date picker closed early",
      "stuck at the login wall",        "cookie banner again",    "scrolled too far down",
      "hallucinated the price"};
  const std::vector<std::string> features = {
      "The step mentions \"cookie\"", "The step mentions \"date picker\"",
      "The step mentions \"scrolled\"", "The step mentions \"captcha\""};
  miner::SubstringEvaluatorClient evaluator;
  const miner::FeatureMatrix matrix = miner::EvaluateMatrix(texts, features, evaluator, config);
  miner::SelectionResult all;
  all.selected = {0, 1, 2, 3};
  const std::string table = miner::ModesTable(10, miner::SummarizeModes(all, matrix));
  const std::string expected =
      "k\tfailure_mode\tcount\tshare\n"
      "10\tThe step mentions \"cookie\"\t4\t40.0\n"
      "10\tThe step mentions \"date picker\"\t2\t20.0\n"
      "10\tThe step mentions \"scrolled\"\t2\t20.0\n"
      "10\tThe step mentions \"captcha\"\t0\t0.0\n";
  c.Require(table == expected, "10-example shares equal the manual tally");
  return c.Finish("218 examples x K=4 -> " + std::to_string(pool.hypotheses.size()) +
                  " hypotheses; 10-example shares 40.0/20.0/20.0/0.0 " +
                  (table == expected ? "match" : "differ"));
}

// ---------------------------------------------------------------------------
// Judge and analytics.

Verdict JudgeSchemaFuzzing() {
  Conditions c;
  std::mt19937_64 rng(20261017);
  int accepted = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    try {
      judge::ParseCaptchaVerdict(testing::MutatedCaptchaAnswer(rng));
      ++accepted;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kMalformedVerdict) ++accepted;  // wrong error is a failure too
    }
  }
  c.Require(accepted == 0, "no mutated output accepted");
  const judge::CaptchaVerdict example =
      judge::ParseCaptchaVerdict(testing::CaptchaWorkedExampleCorrected());
  std::vector<std::string> set;
  for (std::string_view key : judge::kCaptchaKeys) {
    if (example.get(key)) set.emplace_back(key);
  }
  c.Require(set == std::vector<std::string>{"reloads", "new_tab"}, "worked example = {reloads, new_tab}");
  return c.Finish("1000 mutated captcha answers: " + std::to_string(accepted) +
                  " accepted; worked example true set = {" +
                  (set.empty() ? "" : set[0] + (set.size() > 1 ? ", " + set[1] : "")) + "}");
}

Verdict BannerDenominators() {
  std::vector<judge::BannerVerdict> verdicts;
  for (const judge::VerdictRecord& record : judge::ReadVerdicts((kFixtures / "banner_80.jsonl").string())) {
    verdicts.push_back(judge::ParseBannerVerdict(record.verdict.dump()));
  }
  const std::string csv = analytics::FrequencyCsv(analytics::BannerFrequencies(verdicts));
  const std::string expected =
      "key,count,denominator,percent\n"
      "banner_detected,40,80,50.00\n"
      "banner_closed,7,40,17.50\n"
      "task_successfully_completed,19,80,23.75\n";
  Conditions c;
  c.Require(verdicts.size() == 80, "80 verdicts");
  c.Require(csv == expected, "50.00 / 17.50 / 23.75");
  return c.Finish(std::to_string(verdicts.size()) +
                  " verdicts: detected 50.00%, closed 17.50% of detected, completed 23.75% " +
                  (csv == expected ? "as expected" : "-> got " + csv));
}

Verdict AgreementFixtures() {
  auto rows = [](const char* name) {
    std::vector<Json> out;
    for (const std::string& line : SplitLines(ReadFile(kFixtures / name))) {
      if (!Trim(line).empty()) out.push_back(Json::parse(line));
    }
    return out;
  };
  const analytics::LabelSet labels =
      analytics::LabelSetFromJson(rows("agree_labels.jsonl"), rows("agree_baseline.jsonl"));
  const double iaa = analytics::InterAnnotatorAgreement(labels).rate;
  const double keep = analytics::MajorityVoteAgreement(labels, false).rate;
  const double drop = analytics::MajorityVoteAgreement(labels, true).rate;
  // By hand: item agreement 1, 0, 1/3, 1/3 -> 5/12; pluralities A1, none,
  // A2, Tie vs baseline A1, A2, A2, A1 -> 2/3; without ties b4 becomes A1.
  Conditions c;
  c.Require(std::abs(iaa - 5.0 / 12.0) < 1e-12, "IAA = 5/12");
  c.Require(std::abs(keep - 2.0 / 3.0) < 1e-12, "majority (ties kept) = 2/3");
  c.Require(drop == 1.0, "majority (ties dropped) = 1.0");
  return c.Finish("IAA = " + Fmt(iaa) + " (5/12), majority = " + Fmt(keep) +
                  " (2/3), majority with drop_ties = " + Fmt(drop) + " (1.0)");
}

// ---------------------------------------------------------------------------
// End to end.

RosterEntry MockEntry(const std::string& name, int steps, BattleStore& store) {
  RosterEntry entry;
  entry.model = ModelId(name);
  runner::MockEnding ending;
  entry.runner.script = runner::GenericScript(steps, ending);
  entry.runner.script.gif_key = store.PutArtifact("GIF89a recording of " + name);
  return entry;
}

ServiceConfig LifecycleConfig(BattleStore& store, const fs::path& dir) {
  ServiceConfig config;
  config.roster = {MockEntry("alpha", 2, store), MockEntry("beta", 3, store),
                   MockEntry("gamma", 1, store)};
  config.seed = 11;
  config.data_dir = dir.string();
  config.leaderboard.bootstrap_rounds = 100;
  config.leaderboard.seed = 11;
  return config;
}

// Submit -> ready -> vote -> annotate on `count` battles.
std::vector<std::string> Workload(ArenaService& service, int count, std::string* problem) {
  std::vector<std::string> ids;
  for (int i = 0; i < count; ++i) {
    ids.push_back(service.SubmitTask("Find a hotel in city " + std::to_string(i) + " on Expedia.",
                                     "acceptance"));
  }
  const char* choices[] = {"Left", "Right", "Tie", "Left"};
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (!service.WaitUntilSettled(ids[i], std::chrono::seconds(5))) {
      *problem = ids[i] + " did not settle";
      return ids;
    }
    if (service.GetBattle(ids[i])["status"] != "ready") *problem = ids[i] + " not ready";
    service.CastVote(ids[i], choices[i % 4], "voter-1");
    StepAnnotation wrong;
    wrong.battle_id = ids[i];
    wrong.side = Side::kLeft;
    wrong.step_index = 0;
    wrong.verdict = StepVerdict::kIncorrect;
    wrong.reason = "Searched Google instead of opening the site directly";
    StepAnnotation right = wrong;
    right.side = Side::kRight;
    right.verdict = StepVerdict::kCorrect;
    right.reason.clear();
    service.SubmitAnnotations(ids[i], {wrong, right}, "annotator-1");
  }
  return ids;
}

Verdict EndToEnd() {
  Conditions c;
  const auto start = Clock::now();
  testing::TempDir dir;
  std::string leaderboard;
  std::size_t examples = 0;
  int judged = 0;
  {
    BattleStore store(dir.path() / "live", true);
    ArenaService service(LifecycleConfig(store, dir.path() / "live"), store);
    std::string problem;
    const auto ids = Workload(service, 8, &problem);
    c.Require(problem.empty(), problem.empty() ? "" : problem);

    judge::HeuristicJudgeClient judge_client;
    judge::JudgeConfig judge_config;
    judge_config.model = "heuristic";
    judge_config.k = 3;
    for (const std::string& id : ids) {
      const Json view = service.GetBattle(id, "voter-1");
      judge::PairwiseInput input;
      input.item_id = id;
      input.task = view["task"]["prompt"].get<std::string>();
      input.agent1 = TraceFromJson(view["left"]["trace"]);
      input.agent2 = TraceFromJson(view["right"]["trace"]);
      input.gif1 = service.GetArtifact(input.agent1.gif_ref.value_or(""));
      input.gif2 = service.GetArtifact(input.agent2.gif_ref.value_or(""));
      judge::JudgePairwise(input, judge_client, judge_config);
      ++judged;
    }
    leaderboard = service.LeaderboardJson();
    examples = miner::ExamplesFromExport(service.ExportAnnotations()).size();
    c.Require(Json::parse(leaderboard)["models"].size() == 3, "leaderboard lists 3 models");
    c.Require(examples == ids.size(), "one miner example per incorrect annotation");
  }
  const double elapsed = Seconds(start);
  c.Require(elapsed < 10.0, "lifecycle < 10 s");

  // Crash replay: a child process runs the same workload, records its
  // leaderboard, starts one more (slow) battle and is SIGKILLed mid-run.
  const fs::path crash_dir = dir.path() / "crash";
  const fs::path expected_path = dir.path() / "expected_leaderboard.json";
  const pid_t child = fork();
  if (child == 0) {
    std::atomic<bool> slow{false};
    BattleStore store(crash_dir, true);
    ServiceConfig config = LifecycleConfig(store, crash_dir);
    ArenaService service(config, store, [&slow](const RosterEntry& entry) {
      RunnerSpec spec = entry.runner;
      if (slow) spec.script.step_delay = std::chrono::milliseconds(5000);
      return MakeEndpoint(spec);
    });
    std::string problem;
    Workload(service, 8, &problem);
    WriteFileAtomic(expected_path, service.LeaderboardJson());
    slow = true;
    service.SubmitTask("A task that is still running at the crash", "acceptance");
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
    ::kill(::getpid(), SIGKILL);
    ::_exit(3);
  }
  int status = 0;
  ::waitpid(child, &status, 0);
  c.Require(WIFSIGNALED(status) && WTERMSIG(status) == SIGKILL, "child was killed mid-run");
  bool identical = false;
  bool stable = false;
  std::string interrupted_exit;
  if (fs::exists(expected_path)) {
    const std::string expected = ReadFile(expected_path);
    std::string first;
    {
      BattleStore store(crash_dir, true);
      ArenaService restarted(LifecycleConfig(store, crash_dir), store);
      first = restarted.LeaderboardJson();
      const auto ids = restarted.BattleIds();
      interrupted_exit = restarted.GetBattle(ids.back())["left"]["exit"].get<std::string>();
    }
    BattleStore store(crash_dir, true);
    ArenaService again(LifecycleConfig(store, crash_dir), store);
    identical = first == expected;
    stable = again.LeaderboardJson() == first;
  }
  c.Require(identical, "leaderboard bytes identical after crash replay");
  c.Require(stable, "second restart identical too");
  c.Require(interrupted_exit == "runner_error", "interrupted battle finalized as runner_error");
  return c.Finish("8 battles submitted, run, voted, annotated and judged (" + std::to_string(judged) +
                  " verdicts), " + std::to_string(examples) + " miner examples in " +
                  Fmt(elapsed, 2) + " s; crash replay leaderboard bytes " +
                  (identical ? "identical" : "DIFFER"));
}

}  // namespace
}  // namespace arena

int main() {
  using arena::Verdict;
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"bt_recovery", arena::BtRecovery},
      {"bt_two_model_closed_form", arena::TwoModelClosedForm},
      {"point_rank_brute_force", arena::PointRankBruteForce},
      {"bootstrap_runtime_and_coverage", arena::BootstrapCoverage},
      {"uniform_pair_sampling", arena::UniformPairSampling},
      {"greedy_selection_oracle", arena::GreedyOracle},
      {"featurization_bookkeeping", arena::FeaturizationBookkeeping},
      {"judge_schema_fuzzing", arena::JudgeSchemaFuzzing},
      {"banner_denominator_rule", arena::BannerDenominators},
      {"end_to_end_lifecycle", arena::EndToEnd},
      {"agreement_fixtures", arena::AgreementFixtures},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Verdict verdict;
    try {
      verdict = run();
    } catch (const std::exception& e) {
      verdict = {false, std::string("threw: ") + e.what()};
    }
    failed += !verdict.pass;
    std::cout << (verdict.pass ? "PASS " : "FAIL ") << name << ": " << verdict.detail << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size()
            << " acceptance criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
