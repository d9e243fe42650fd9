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

#ifndef ARENA_MINER_HPP_
#define ARENA_MINER_HPP_

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <future>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "arena/domain.hpp"
#include "arena/llm.hpp"

// Failure-mode discovery over step-level annotations: contrastive predicate
// proposal, embedding + k-means, a Y/N evaluation matrix, and greedy
// forward selection under a reconstruction-perplexity objective.
namespace arena::miner {

struct StepExample {
  std::string goal_text;
  std::string feedback_text;
  std::string battle_id;
  Side side = Side::kLeft;
  int step_index = 0;

  // "Goal: ...\nFeedback: ..." — the string x the pipeline works on.
  std::string text() const;
};

// Builds examples from the service's annotation export (one JSON object per
// annotated step). With `incorrect_only`, correct-verdict rows are skipped.
// Rows without a goal are skipped and counted in `skipped`.
std::vector<StepExample> ExamplesFromExport(const std::vector<Json>& rows,
                                            bool incorrect_only = true,
                                            std::size_t* skipped = nullptr);

struct FeaturizationConfig {
  int contrasts = 5;      // C
  int k = 4;              // predicates per example
  int max_words = 20;
  std::vector<int> cluster_counts = {15, 10, 5};
  double proposal_temperature = 0.7;
  int budget = 10;        // max selected features
  int max_retries = 2;
  int restarts = 10;      // k-means restarts
  std::uint64_t seed = 0;
  std::string proposer_model = "gpt-4o";
  std::string evaluator_model = "gpt-4o";

  // Evaluation always runs at temperature 0.
  static constexpr double kEvaluationTemperature = 0.0;
};

void ValidateConfig(const FeaturizationConfig& config);

// ---------------------------------------------------------------------------
// Proposal.

// C indices drawn uniformly without replacement from [0, n) \ {target}:
// SeededShuffle of the remaining indices, first C kept.
std::vector<std::size_t> SampleContrasts(std::size_t n, std::size_t target, int c,
                                         std::mt19937_64& rng);

struct Proposal {
  std::vector<std::string> kept;
  std::vector<std::string> rejected;  // over max_words
  int duplicates = 0;
};

// Parses a proposer reply: one predicate per line; list markers are
// stripped, blank lines ignored, over-long predicates rejected, case-
// insensitive duplicates dropped, at most `k` kept.
Proposal ParseProposal(std::string_view reply, int k, int max_words);

llm::ChatRequest BuildProposalRequest(const StepExample& target,
                                      const std::vector<StepExample>& contrasts,
                                      const FeaturizationConfig& config);

// Throws InvalidArgument unless |contrasts| = C and none equals the target;
// ProposerUnavailable when the client fails.
Proposal ProposeFeatures(const StepExample& target,
                         const std::vector<StepExample>& contrasts,
                         llm::ChatClient& proposer, const FeaturizationConfig& config);

struct Hypothesis {
  std::string text;
  std::size_t example = 0;  // index of the example it was proposed for
};

struct PoolResult {
  std::vector<Hypothesis> hypotheses;
  std::size_t rejected = 0;
  std::size_t duplicates = 0;
};

// Proposes for every example (in parallel; contrasts for example i come from
// a generator seeded with (seed, i)). |hypotheses| <= N*K.
PoolResult PoolProposals(const std::vector<StepExample>& examples,
                         llm::ChatClient& proposer, const FeaturizationConfig& config);

// ---------------------------------------------------------------------------
// Clustering.

class Embedder {
 public:
  virtual ~Embedder() = default;
  // One row per text. Throws EmbedderUnavailable.
  virtual Eigen::MatrixXd Embed(const std::vector<std::string>& texts) = 0;
};

// Signed feature hashing of lower-cased word unigrams, L2-normalised.
class HashedBowEmbedder : public Embedder {
 public:
  explicit HashedBowEmbedder(int dimensions = 256) : dimensions_(dimensions) {}
  Eigen::MatrixXd Embed(const std::vector<std::string>& texts) override;

 private:
  int dimensions_;
};

// Looks texts up in a fixed table; unknown texts are EmbedderUnavailable.
class TableEmbedder : public Embedder {
 public:
  explicit TableEmbedder(std::map<std::string, Eigen::VectorXd> table)
      : table_(std::move(table)) {}
  Eigen::MatrixXd Embed(const std::vector<std::string>& texts) override;

 private:
  std::map<std::string, Eigen::VectorXd> table_;
};

// OpenAI-compatible /v1/embeddings endpoint.
class OpenAiEmbedder : public Embedder {
 public:
  OpenAiEmbedder(std::string base_url, std::string api_key,
                 std::string model = "text-embedding-3-small");
  Eigen::MatrixXd Embed(const std::vector<std::string>& texts) override;

 private:
  std::string base_url_;
  std::string api_key_;
  std::string model_;
};

// Column-wise z-scores (population variance); constant columns become 0.
Eigen::MatrixXd Standardize(const Eigen::MatrixXd& x);

struct KMeansResult {
  Eigen::VectorXi labels;
  Eigen::MatrixXd centroids;  // k x d
  double inertia = 0;
};

// Lloyd's algorithm from k-means++ seeds, best of `restarts` by inertia. An
// emptied cluster is re-seeded with the point farthest from its centroid;
// DegenerateCluster when fewer than k distinct points exist.
KMeansResult KMeans(const Eigen::MatrixXd& x, int k, std::uint64_t seed,
                    int restarts = 10, int max_iterations = 300);

struct Cluster {
  std::string representative;  // member closest to the centroid
  std::vector<std::size_t> members;  // indices into the predicate list
};

// Embeds, standardizes and clusters the predicates. Throws InvalidArgument
// when there are fewer predicates than k.
std::vector<Cluster> ClusterFeatures(const std::vector<std::string>& predicates,
                                     Embedder& embedder, int k, std::uint64_t seed,
                                     int restarts = 10);

// ---------------------------------------------------------------------------
// Evaluation matrix.

struct FeatureMatrix {
  std::vector<std::string> texts;
  std::vector<std::string> features;
  // 1 = Y, 0 = N, -1 = unresolved after retries. N x K'.
  Eigen::MatrixXi values;

  std::size_t unresolved() const;
  bool feature_resolved(Eigen::Index f) const;
  int count(Eigen::Index f) const;  // number of Y in column f
};

// Accepts "Y" or "N" (any case, optional trailing period, surrounding
// whitespace); anything else is MalformedVerdict.
bool ParseYesNo(std::string_view raw);

llm::ChatRequest BuildEvaluationRequest(const std::string& text,
                                        const std::string& feature,
                                        const std::string& model);

FeatureMatrix EvaluateMatrix(const std::vector<std::string>& texts,
                             const std::vector<std::string>& features,
                             llm::ChatClient& evaluator,
                             const FeaturizationConfig& config);

// ---------------------------------------------------------------------------
// Reconstruction perplexity.

struct ScoredText {
  double logprob = 0;  // natural log
  int tokens = 0;
};

class SequenceScorer {
 public:
  virtual ~SequenceScorer() = default;
  // Total log-probability of `text` given `context`. Throws
  // ScorerUnavailable.
  virtual ScoredText Score(const std::string& context, const std::string& text) = 0;
};

// Word tokens: maximal runs of alphanumerics, lower-cased.
std::vector<std::string> WordTokens(std::string_view text);

// Fixed per-token log-probability.
class ConstantScorer : public SequenceScorer {
 public:
  explicit ConstantScorer(double per_token_logprob) : lp_(per_token_logprob) {}
  ScoredText Score(const std::string& context, const std::string& text) override;

 private:
  double lp_;
};

// Scores through an OpenAI-compatible /v1/completions endpoint with
// echo=true and max_tokens=0: the log-probabilities of the echoed tokens
// that start at or after the end of the context are summed.
class OpenAiCompletionScorer : public SequenceScorer {
 public:
  OpenAiCompletionScorer(std::string base_url, std::string api_key, std::string model);
  ScoredText Score(const std::string& context, const std::string& text) override;

 private:
  std::string base_url_;
  std::string api_key_;
  std::string model_;
};

// A cache language model over word tokens:
//   p(w | ctx) = lambda * count_ctx(w) / |ctx| + (1 - lambda) / vocabulary
// (the first term vanishes for an empty context). Context words matching the
// text raise its probability; unrelated context dilutes it.
class UnigramCacheScorer : public SequenceScorer {
 public:
  explicit UnigramCacheScorer(double lambda = 0.5, double vocabulary = 5000)
      : lambda_(lambda), vocabulary_(vocabulary) {}
  ScoredText Score(const std::string& context, const std::string& text) override;

 private:
  double lambda_;
  double vocabulary_;
};

// Context for a text whose active features are `features` (in order): the
// static reconstruction prompt with the newline-delimited list.
std::string ReconstructionContext(const std::vector<std::string>& features);

// exp(-logprob / tokens); a text with no tokens has perplexity 1.
double TextPerplexity(const ScoredText& score);

// Memoizes scores by (text, ordered active features), so a text for which a
// candidate feature is false reuses the score of the current selection.
// Thread-safe; concurrent requests for the same key score it once.
class ScoreCache {
 public:
  explicit ScoreCache(SequenceScorer& scorer) : scorer_(scorer) {}
  ScoredText Get(const std::string& text, const std::vector<std::string>& active);
  std::size_t hits() const;
  std::size_t misses() const;

 private:
  using Key = std::pair<std::string, std::vector<std::string>>;
  SequenceScorer& scorer_;
  mutable std::mutex mutex_;
  std::map<Key, std::shared_future<ScoredText>> cache_;
  std::size_t hits_ = 0;
  std::size_t misses_ = 0;
};

// PPL(D | phi) = mean over texts of PPL(x | ctx(phi(x))), where phi(x) lists
// the features in `phi` (in order) that are true for x.
double MeanPerplexity(const FeatureMatrix& matrix, const std::vector<Eigen::Index>& phi,
                      ScoreCache& cache);

enum class StopReason { kNoImprovement, kBudget };
std::string_view ToString(StopReason reason);

struct SelectionResult {
  std::vector<Eigen::Index> selected;  // feature columns, in selection order
  double baseline = 0;                 // PPL with no features
  std::vector<double> trajectory;      // PPL after each addition
  StopReason stop = StopReason::kNoImprovement;
  std::vector<Eigen::Index> excluded;  // columns with unresolved cells
};

// Greedy forward selection: repeatedly adds the feature with the lowest
// PPL(D | phi + F) while that is strictly below the current value. Equal
// values break by feature text. Candidates are scored in parallel.
SelectionResult SelectFeaturesGreedy(const FeatureMatrix& matrix, SequenceScorer& scorer,
                                     int budget);

// ---------------------------------------------------------------------------
// Reporting.

struct ModeSummary {
  std::string representative;
  std::string label;  // representative, or the summarizer's output
  std::vector<std::string> members;
  int count = 0;
  double share = 0;  // percent of texts
  bool vacuous = false;
  std::vector<std::size_t> examples;  // rows where the feature is true
};

// Optional hook that turns a mode's member predicates into a short label
// (e.g. an LLM-written cluster summary).
using Summarizer = std::function<std::string(const ModeSummary& mode)>;

// One row per selected feature, in selection order. `clusters` + `pool`,
// when given, supply each feature's member predicates (the cluster whose
// representative is the feature). A feature true for no text is vacuous.
std::vector<ModeSummary> SummarizeModes(const SelectionResult& selection,
                                        const FeatureMatrix& matrix,
                                        const std::vector<Cluster>& clusters = {},
                                        const std::vector<std::string>& pool = {},
                                        const Summarizer& summarizer = nullptr);

// Table-4-shaped TSV: k, failure_mode, count, share (one decimal).
std::string ModesTable(int k, const std::vector<ModeSummary>& modes);
// Markdown listing of each mode's members and the texts it is true for.
std::string ModesListing(const std::vector<ModeSummary>& modes,
                         const FeatureMatrix& matrix, std::size_t max_examples = 5);
// CSV with a header row of features and one 0/1/blank row per text.
std::string MatrixCsv(const FeatureMatrix& matrix);

// ---------------------------------------------------------------------------
// Whole pipeline.

struct MiningRun {
  int k = 0;
  std::vector<Cluster> clusters;
  FeatureMatrix matrix;
  SelectionResult selection;
  std::vector<ModeSummary> modes;
};

struct MiningReport {
  std::size_t examples = 0;
  PoolResult pool;
  std::vector<MiningRun> runs;  // one per entry of config.cluster_counts
};

// Pools proposals once, then for each cluster count: clusters, evaluates the
// representatives on every example text, selects greedily and summarizes.
MiningReport RunMining(const std::vector<StepExample>& examples, llm::ChatClient& proposer,
                       llm::ChatClient& evaluator, Embedder& embedder,
                       SequenceScorer& scorer, const FeaturizationConfig& config,
                       const Summarizer& summarizer = nullptr);

// ---------------------------------------------------------------------------
// Offline clients.

// Proposer that writes predicates of the form `The step mentions "<word>"`
// from words of the target that no contrast contains (longest first).
class KeywordProposerClient : public llm::ChatClient {
 public:
  std::string Complete(const llm::ChatRequest& request) override;
};

// Evaluator answering Y iff the predicate's quoted term (or, without quotes,
// the whole predicate) occurs in the text, case-insensitively.
class SubstringEvaluatorClient : public llm::ChatClient {
 public:
  std::string Complete(const llm::ChatRequest& request) override;
};

inline constexpr std::string_view kProposerPrompt = "proposer.v1";
inline constexpr std::string_view kEvaluatorPrompt = "evaluator.v1";
inline constexpr std::string_view kReconstructionPrompt = "reconstruction.v1";

}  // namespace arena::miner

#endif  // ARENA_MINER_HPP_
