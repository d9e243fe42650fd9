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

#include "arena/miner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "arena/util.hpp"

namespace arena::miner {
namespace {

constexpr std::string_view kYesNoReminder =
    "Your previous answer could not be parsed. Answer with a single letter: Y or N.";

std::seed_seq::result_type Lo(std::uint64_t v) {
  return static_cast<std::seed_seq::result_type>(v & 0xffffffffu);
}
std::seed_seq::result_type Hi(std::uint64_t v) {
  return static_cast<std::seed_seq::result_type>(v >> 32);
}

// Uniform double in [0, 1) with 53 random bits; independent of the standard
// library's distribution implementations.
double UnitDouble(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::string StripListMarker(std::string line) {
  line = Trim(line);
  std::size_t i = 0;
  if (!line.empty() && (line[0] == '-' || line[0] == '*')) {
    i = 1;
  } else if (line.rfind("•", 0) == 0) {
    i = std::string_view("•").size();
  } else {
    while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
    if (i > 0 && i < line.size() && (line[i] == '.' || line[i] == ')')) {
      ++i;
    } else {
      i = 0;
    }
  }
  return Trim(std::string_view(line).substr(i));
}

std::string Between(std::string_view text, std::string_view open, std::string_view close) {
  const std::size_t start = text.find(open);
  if (start == std::string_view::npos) return "";
  const std::size_t from = start + open.size();
  const std::size_t end = close.empty() ? std::string_view::npos : text.find(close, from);
  return std::string(text.substr(from, end == std::string_view::npos ? end : end - from));
}

std::string UserText(const llm::ChatRequest& request) {
  for (const llm::Message& message : request.messages) {
    if (message.role == llm::Message::Role::kUser) return message.text;
  }
  return "";
}

double SquaredDistance(const Eigen::MatrixXd& x, Eigen::Index row,
                       const Eigen::MatrixXd& centroids, Eigen::Index c) {
  return (x.row(row) - centroids.row(c)).squaredNorm();
}

std::size_t DistinctRows(const Eigen::MatrixXd& x) {
  std::set<std::vector<double>> seen;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(x.cols()));
    for (Eigen::Index j = 0; j < x.cols(); ++j) row[static_cast<std::size_t>(j)] = x(i, j);
    seen.insert(std::move(row));
  }
  return seen.size();
}

// k-means++ seeding: first centre uniform, then proportional to D^2.
Eigen::MatrixXd SeedCentroids(const Eigen::MatrixXd& x, int k, std::mt19937_64& rng) {
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd centroids(k, x.cols());
  centroids.row(0) = x.row(static_cast<Eigen::Index>(UniformBelow(rng, n)));
  Eigen::VectorXd d2(n);
  for (Eigen::Index i = 0; i < n; ++i) d2(i) = SquaredDistance(x, i, centroids, 0);
  for (int c = 1; c < k; ++c) {
    const double total = d2.sum();
    if (!(total > 0)) {
      throw Error(ErrorCode::kDegenerateCluster, "fewer distinct points than clusters");
    }
    const double target = UnitDouble(rng) * total;
    double acc = 0;
    Eigen::Index pick = -1;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (d2(i) <= 0) continue;
      acc += d2(i);
      pick = i;
      if (acc > target) break;
    }
    centroids.row(c) = x.row(pick);
    for (Eigen::Index i = 0; i < n; ++i) {
      d2(i) = std::min(d2(i), SquaredDistance(x, i, centroids, c));
    }
  }
  return centroids;
}

KMeansResult Lloyd(const Eigen::MatrixXd& x, Eigen::MatrixXd centroids, int max_iterations) {
  const Eigen::Index n = x.rows();
  const Eigen::Index k = centroids.rows();
  Eigen::VectorXi labels = Eigen::VectorXi::Constant(n, -1);
  auto assign = [&]() {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index best = 0;
      double best_d = SquaredDistance(x, i, centroids, 0);
      for (Eigen::Index c = 1; c < k; ++c) {
        const double d = SquaredDistance(x, i, centroids, c);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (labels(i) != best) {
        labels(i) = static_cast<int>(best);
        changed = true;
      }
    }
    return changed;
  };
  assign();
  for (int iteration = 0; iteration < max_iterations; ++iteration) {
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, x.cols());
    Eigen::VectorXi counts = Eigen::VectorXi::Zero(k);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(labels(i)) += x.row(i);
      ++counts(labels(i));
    }
    for (Eigen::Index c = 0; c < k; ++c) {
      if (counts(c) > 0) {
        centroids.row(c) = sums.row(c) / counts(c);
        continue;
      }
      // Empty cluster: move its centre onto the point that is currently
      // worst served, taken from a cluster that can spare it.
      Eigen::Index far = -1;
      double far_d = 0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (counts(labels(i)) < 2) continue;
        const double d = SquaredDistance(x, i, centroids, labels(i));
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      if (far < 0) {
        throw Error(ErrorCode::kDegenerateCluster,
                    "cluster " + std::to_string(c) + " is empty and cannot be re-seeded");
      }
      --counts(labels(far));
      sums.row(labels(far)) -= x.row(far);
      labels(far) = static_cast<int>(c);
      counts(c) = 1;
      centroids.row(c) = x.row(far);
    }
    if (!assign()) break;
  }
  KMeansResult result;
  result.labels = labels;
  result.centroids = centroids;
  for (Eigen::Index i = 0; i < n; ++i) {
    result.inertia += SquaredDistance(x, i, centroids, labels(i));
  }
  return result;
}

}  // namespace

std::string StepExample::text() const {
  std::string out = "Goal: " + goal_text;
  if (!feedback_text.empty()) out += "\nFeedback: " + feedback_text;
  return out;
}

std::vector<StepExample> ExamplesFromExport(const std::vector<Json>& rows,
                                            bool incorrect_only, std::size_t* skipped) {
  std::vector<StepExample> examples;
  std::size_t dropped = 0;
  for (const Json& row : rows) {
    if (incorrect_only && row.value("verdict", std::string()) != "incorrect") continue;
    StepExample example;
    example.goal_text = Trim(row.value("goal", std::string()));
    if (example.goal_text.empty()) {
      ++dropped;
      continue;
    }
    example.feedback_text = Trim(row.value("reason", std::string()));
    example.battle_id = row.value("battle_id", std::string());
    example.side = ParseSide(row.value("side", std::string("left")));
    example.step_index = row.value("step_index", 0);
    examples.push_back(std::move(example));
  }
  if (skipped) *skipped = dropped;
  return examples;
}

void ValidateConfig(const FeaturizationConfig& config) {
  if (config.contrasts < 1) throw Error(ErrorCode::kInvalidArgument, "C must be >= 1");
  if (config.k < 1) throw Error(ErrorCode::kInvalidArgument, "K must be >= 1");
  if (config.max_words < 1) {
    throw Error(ErrorCode::kInvalidArgument, "max_words must be >= 1");
  }
  if (config.budget < 0) throw Error(ErrorCode::kInvalidArgument, "budget must be >= 0");
  if (config.max_retries < 0) {
    throw Error(ErrorCode::kInvalidArgument, "max_retries must be >= 0");
  }
  if (config.restarts < 1) throw Error(ErrorCode::kInvalidArgument, "restarts must be >= 1");
  for (int k : config.cluster_counts) {
    if (k < 1) throw Error(ErrorCode::kInvalidArgument, "cluster counts must be >= 1");
  }
}

// ---------------------------------------------------------------------------
// Proposal.

std::vector<std::size_t> SampleContrasts(std::size_t n, std::size_t target, int c,
                                         std::mt19937_64& rng) {
  if (target >= n) throw Error(ErrorCode::kInvalidArgument, "target index out of range");
  if (c < 0 || static_cast<std::size_t>(c) > n - 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "need " + std::to_string(c) + " contrasts but the corpus has only " +
                    std::to_string(n - 1) + " other examples");
  }
  std::vector<std::size_t> pool;
  pool.reserve(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    if (i != target) pool.push_back(i);
  }
  SeededShuffle(pool, rng);
  pool.resize(static_cast<std::size_t>(c));
  return pool;
}

Proposal ParseProposal(std::string_view reply, int k, int max_words) {
  Proposal proposal;
  std::set<std::string> seen;
  for (const std::string& raw_line : SplitLines(reply)) {
    const std::string line = StripListMarker(raw_line);
    if (line.empty()) continue;
    if (SplitWords(line).size() > static_cast<std::size_t>(max_words)) {
      proposal.rejected.push_back(line);
      continue;
    }
    if (!seen.insert(NormalizeForDedup(line)).second) {
      ++proposal.duplicates;
      continue;
    }
    if (proposal.kept.size() < static_cast<std::size_t>(k)) proposal.kept.push_back(line);
  }
  return proposal;
}

llm::ChatRequest BuildProposalRequest(const StepExample& target,
                                      const std::vector<StepExample>& contrasts,
                                      const FeaturizationConfig& config) {
  std::string listing;
  for (std::size_t i = 0; i < contrasts.size(); ++i) {
    if (i > 0) listing += "\n\n";
    listing += "[" + std::to_string(i + 1) + "] " + contrasts[i].text();
  }
  llm::ChatRequest request;
  request.model = config.proposer_model;
  request.temperature = config.proposal_temperature;
  request.messages.push_back(
      {llm::Message::Role::kUser,
       RenderTemplate(PromptTemplate(kProposerPrompt),
                      {{"target", target.text()},
                       {"contrasts", listing},
                       {"contrast_count", std::to_string(contrasts.size())},
                       {"k", std::to_string(config.k)},
                       {"max_words", std::to_string(config.max_words)}}),
       {}});
  return request;
}

Proposal ProposeFeatures(const StepExample& target, const std::vector<StepExample>& contrasts,
                         llm::ChatClient& proposer, const FeaturizationConfig& config) {
  ValidateConfig(config);
  if (contrasts.size() != static_cast<std::size_t>(config.contrasts)) {
    throw Error(ErrorCode::kInvalidArgument,
                "expected " + std::to_string(config.contrasts) + " contrasts, got " +
                    std::to_string(contrasts.size()));
  }
  const std::string target_text = target.text();
  for (const StepExample& contrast : contrasts) {
    if (contrast.text() == target_text) {
      throw Error(ErrorCode::kInvalidArgument, "contrast set contains the target");
    }
  }
  std::string reply;
  try {
    reply = proposer.Complete(BuildProposalRequest(target, contrasts, config));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kClientUnavailable) {
      throw Error(ErrorCode::kProposerUnavailable, e.what());
    }
    throw;
  }
  return ParseProposal(reply, config.k, config.max_words);
}

PoolResult PoolProposals(const std::vector<StepExample>& examples,
                         llm::ChatClient& proposer, const FeaturizationConfig& config) {
  ValidateConfig(config);
  const std::size_t n = examples.size();
  if (n < static_cast<std::size_t>(config.contrasts) + 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "need more than " + std::to_string(config.contrasts) +
                    " examples to draw contrasts, got " + std::to_string(n));
  }
  std::vector<Proposal> proposals(n);
  ParallelFor(n, [&](std::size_t i) {
    std::seed_seq seq{Lo(config.seed), Hi(config.seed), Lo(i), Hi(i)};
    std::mt19937_64 rng(seq);
    std::vector<StepExample> contrasts;
    for (std::size_t j : SampleContrasts(n, i, config.contrasts, rng)) {
      contrasts.push_back(examples[j]);
    }
    proposals[i] = ProposeFeatures(examples[i], contrasts, proposer, config);
  });
  PoolResult pool;
  for (std::size_t i = 0; i < n; ++i) {
    for (const std::string& text : proposals[i].kept) pool.hypotheses.push_back({text, i});
    pool.rejected += proposals[i].rejected.size();
    pool.duplicates += static_cast<std::size_t>(proposals[i].duplicates);
  }
  return pool;
}

// ---------------------------------------------------------------------------
// Clustering.

Eigen::MatrixXd HashedBowEmbedder::Embed(const std::vector<std::string>& texts) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(texts.size()),
                                              dimensions_);
  for (std::size_t i = 0; i < texts.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    for (const std::string& token : WordTokens(texts[i])) {
      // FNV-1a; the top bit picks the sign.
      std::uint64_t h = 1469598103934665603ull;
      for (unsigned char c : token) {
        h ^= c;
        h *= 1099511628211ull;
      }
      const auto column = static_cast<Eigen::Index>(h % static_cast<std::uint64_t>(dimensions_));
      out(row, column) += (h >> 63) ? -1.0 : 1.0;
    }
    const double norm = out.row(row).norm();
    if (norm > 0) out.row(row) /= norm;
  }
  return out;
}

Eigen::MatrixXd TableEmbedder::Embed(const std::vector<std::string>& texts) {
  Eigen::MatrixXd out;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    auto it = table_.find(texts[i]);
    if (it == table_.end()) {
      throw Error(ErrorCode::kEmbedderUnavailable, "no embedding for \"" + texts[i] + "\"");
    }
    if (i == 0) out.resize(static_cast<Eigen::Index>(texts.size()), it->second.size());
    out.row(static_cast<Eigen::Index>(i)) = it->second.transpose();
  }
  return out;
}

OpenAiEmbedder::OpenAiEmbedder(std::string base_url, std::string api_key, std::string model)
    : base_url_(std::move(base_url)), api_key_(std::move(api_key)), model_(std::move(model)) {}

Eigen::MatrixXd OpenAiEmbedder::Embed(const std::vector<std::string>& texts) {
  Json body;
  try {
    body = llm::PostJson(base_url_, api_key_, "/v1/embeddings",
                         {{"model", model_}, {"input", texts}});
  } catch (const Error& e) {
    throw Error(ErrorCode::kEmbedderUnavailable, e.what());
  }
  try {
    const Json& data = body.at("data");
    if (data.size() != texts.size()) {
      throw Error(ErrorCode::kEmbedderUnavailable, "embedding count mismatch");
    }
    Eigen::MatrixXd out;
    for (const Json& item : data) {
      const auto index = item.at("index").get<Eigen::Index>();
      const std::vector<double> v = item.at("embedding").get<std::vector<double>>();
      if (out.size() == 0) out.resize(static_cast<Eigen::Index>(texts.size()),
                                      static_cast<Eigen::Index>(v.size()));
      if (index < 0 || index >= out.rows() ||
          static_cast<Eigen::Index>(v.size()) != out.cols()) {
        throw Error(ErrorCode::kEmbedderUnavailable, "malformed embedding item");
      }
      out.row(index) = Eigen::Map<const Eigen::RowVectorXd>(v.data(), out.cols());
    }
    return out;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kEmbedderUnavailable,
                std::string("unexpected embeddings response: ") + e.what());
  }
}

Eigen::MatrixXd Standardize(const Eigen::MatrixXd& x) {
  if (x.rows() == 0) return x;
  const Eigen::RowVectorXd mean = x.colwise().mean();
  Eigen::MatrixXd centered = x.rowwise() - mean;
  const Eigen::RowVectorXd sd =
      (centered.array().square().colwise().sum() / static_cast<double>(x.rows())).sqrt();
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    if (sd(j) > 0) {
      centered.col(j) /= sd(j);
    } else {
      centered.col(j).setZero();
    }
  }
  return centered;
}

KMeansResult KMeans(const Eigen::MatrixXd& x, int k, std::uint64_t seed, int restarts,
                    int max_iterations) {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  if (restarts < 1) throw Error(ErrorCode::kInvalidArgument, "restarts must be >= 1");
  if (x.rows() < k) {
    throw Error(ErrorCode::kInvalidArgument,
                "cannot form " + std::to_string(k) + " clusters from " +
                    std::to_string(x.rows()) + " points");
  }
  if (DistinctRows(x) < static_cast<std::size_t>(k)) {
    throw Error(ErrorCode::kDegenerateCluster,
                "fewer distinct points than the " + std::to_string(k) + " clusters requested");
  }
  std::mt19937_64 rng(seed);
  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < restarts; ++r) {
    KMeansResult candidate = Lloyd(x, SeedCentroids(x, k, rng), max_iterations);
    if (candidate.inertia < best.inertia) best = std::move(candidate);
  }
  return best;
}

std::vector<Cluster> ClusterFeatures(const std::vector<std::string>& predicates,
                                     Embedder& embedder, int k, std::uint64_t seed,
                                     int restarts) {
  if (k < 1 || predicates.size() < static_cast<std::size_t>(k)) {
    throw Error(ErrorCode::kInvalidArgument,
                "need at least " + std::to_string(k) + " predicates, got " +
                    std::to_string(predicates.size()));
  }
  const Eigen::MatrixXd raw = embedder.Embed(predicates);
  if (raw.rows() != static_cast<Eigen::Index>(predicates.size())) {
    throw Error(ErrorCode::kEmbedderUnavailable, "embedder returned the wrong row count");
  }
  const Eigen::MatrixXd x = Standardize(raw);
  // One cluster needs no search (and identical points are fine).
  KMeansResult fit;
  if (k == 1) {
    fit.labels = Eigen::VectorXi::Zero(x.rows());
    fit.centroids = x.colwise().mean();
  } else {
    fit = KMeans(x, k, seed, restarts);
  }
  std::vector<Cluster> clusters(static_cast<std::size_t>(k));
  std::vector<double> best(static_cast<std::size_t>(k), std::numeric_limits<double>::infinity());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const int label = fit.labels(i);
    Cluster& cluster = clusters[static_cast<std::size_t>(label)];
    cluster.members.push_back(static_cast<std::size_t>(i));
    const double d = SquaredDistance(x, i, fit.centroids, label);
    if (d < best[static_cast<std::size_t>(label)]) {
      best[static_cast<std::size_t>(label)] = d;
      cluster.representative = predicates[static_cast<std::size_t>(i)];
    }
  }
  std::sort(clusters.begin(), clusters.end(), [](const Cluster& a, const Cluster& b) {
    return a.members.front() < b.members.front();
  });
  return clusters;
}

// ---------------------------------------------------------------------------
// Evaluation matrix.

std::size_t FeatureMatrix::unresolved() const {
  return static_cast<std::size_t>((values.array() < 0).count());
}

bool FeatureMatrix::feature_resolved(Eigen::Index f) const {
  return (values.col(f).array() >= 0).all();
}

int FeatureMatrix::count(Eigen::Index f) const {
  return static_cast<int>((values.col(f).array() == 1).count());
}

bool ParseYesNo(std::string_view raw) {
  std::string answer = ToLower(Trim(raw));
  if (!answer.empty() && answer.back() == '.') answer.pop_back();
  if (answer == "y") return true;
  if (answer == "n") return false;
  throw Error(ErrorCode::kMalformedVerdict,
              "expected a single Y or N, got \"" + std::string(raw.substr(0, 80)) + "\"");
}

llm::ChatRequest BuildEvaluationRequest(const std::string& text, const std::string& feature,
                                        const std::string& model) {
  llm::ChatRequest request;
  request.model = model;
  request.temperature = FeaturizationConfig::kEvaluationTemperature;
  request.messages.push_back(
      {llm::Message::Role::kUser,
       RenderTemplate(PromptTemplate(kEvaluatorPrompt), {{"text", text}, {"feature", feature}}),
       {}});
  return request;
}

FeatureMatrix EvaluateMatrix(const std::vector<std::string>& texts,
                             const std::vector<std::string>& features,
                             llm::ChatClient& evaluator, const FeaturizationConfig& config) {
  FeatureMatrix matrix;
  matrix.texts = texts;
  matrix.features = features;
  const auto n = static_cast<Eigen::Index>(texts.size());
  const auto k = static_cast<Eigen::Index>(features.size());
  matrix.values = Eigen::MatrixXi::Zero(n, k);
  const std::string reminder(kYesNoReminder);
  ParallelFor(static_cast<std::size_t>(n * k), [&](std::size_t cell) {
    const auto i = static_cast<Eigen::Index>(cell) / k;
    const auto f = static_cast<Eigen::Index>(cell) % k;
    int value = -1;
    try {
      value = llm::AskUntilParsed(
                  evaluator,
                  BuildEvaluationRequest(texts[static_cast<std::size_t>(i)],
                                         features[static_cast<std::size_t>(f)],
                                         config.evaluator_model),
                  config.max_retries, reminder, ErrorCode::kClientUnavailable, ParseYesNo)
                  ? 1
                  : 0;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kMalformedVerdict) throw;
    }
    matrix.values(i, f) = value;
  });
  return matrix;
}

// ---------------------------------------------------------------------------
// Reconstruction perplexity.

std::vector<std::string> WordTokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

ScoredText ConstantScorer::Score(const std::string& /*context*/, const std::string& text) {
  const int tokens = static_cast<int>(WordTokens(text).size());
  return {lp_ * tokens, tokens};
}

ScoredText UnigramCacheScorer::Score(const std::string& context, const std::string& text) {
  std::map<std::string, int> counts;
  const std::vector<std::string> ctx = WordTokens(context);
  for (const std::string& token : ctx) ++counts[token];
  ScoredText score;
  for (const std::string& token : WordTokens(text)) {
    double p = (1.0 - lambda_) / vocabulary_;
    if (!ctx.empty()) {
      auto it = counts.find(token);
      if (it != counts.end()) p += lambda_ * it->second / static_cast<double>(ctx.size());
    }
    score.logprob += std::log(p);
    ++score.tokens;
  }
  return score;
}

OpenAiCompletionScorer::OpenAiCompletionScorer(std::string base_url, std::string api_key,
                                               std::string model)
    : base_url_(std::move(base_url)), api_key_(std::move(api_key)), model_(std::move(model)) {}

ScoredText OpenAiCompletionScorer::Score(const std::string& context, const std::string& text) {
  Json body;
  try {
    body = llm::PostJson(base_url_, api_key_, "/v1/completions",
                         {{"model", model_},
                          {"prompt", context + text},
                          {"echo", true},
                          {"max_tokens", 0},
                          {"logprobs", 0},
                          {"temperature", 0}});
  } catch (const Error& e) {
    throw Error(ErrorCode::kScorerUnavailable, e.what());
  }
  try {
    const Json& logprobs = body.at("choices").at(0).at("logprobs");
    const Json& values = logprobs.at("token_logprobs");
    const Json& offsets = logprobs.at("text_offset");
    ScoredText score;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (offsets.at(i).get<std::size_t>() < context.size()) continue;
      if (values[i].is_null()) continue;  // the very first token has none
      score.logprob += values[i].get<double>();
      ++score.tokens;
    }
    return score;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kScorerUnavailable,
                std::string("unexpected completions response: ") + e.what());
  }
}

std::string ReconstructionContext(const std::vector<std::string>& features) {
  std::string list;
  for (const std::string& feature : features) list += feature + "\n";
  return RenderTemplate(PromptTemplate(kReconstructionPrompt), {{"features", list}});
}

double TextPerplexity(const ScoredText& score) {
  if (score.tokens <= 0) return 1.0;
  return std::exp(-score.logprob / score.tokens);
}

ScoredText ScoreCache::Get(const std::string& text, const std::vector<std::string>& active) {
  Key key(text, active);
  std::promise<ScoredText> promise;
  std::shared_future<ScoredText> pending;
  bool owner = false;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = cache_.find(key);
    if (it != cache_.end()) {
      ++hits_;
      pending = it->second;
    } else {
      ++misses_;
      pending = promise.get_future().share();
      cache_.emplace(key, pending);
      owner = true;
    }
  }
  if (!owner) return pending.get();
  try {
    promise.set_value(scorer_.Score(ReconstructionContext(active), text));
  } catch (...) {
    promise.set_exception(std::current_exception());
    std::lock_guard<std::mutex> lock(mutex_);
    cache_.erase(key);
  }
  return pending.get();
}

std::size_t ScoreCache::hits() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return hits_;
}

std::size_t ScoreCache::misses() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return misses_;
}

double MeanPerplexity(const FeatureMatrix& matrix, const std::vector<Eigen::Index>& phi,
                      ScoreCache& cache) {
  if (matrix.texts.empty()) throw Error(ErrorCode::kInvalidArgument, "no texts to score");
  double sum = 0;
  for (std::size_t i = 0; i < matrix.texts.size(); ++i) {
    std::vector<std::string> active;
    for (Eigen::Index f : phi) {
      if (matrix.values(static_cast<Eigen::Index>(i), f) == 1) {
        active.push_back(matrix.features[static_cast<std::size_t>(f)]);
      }
    }
    sum += TextPerplexity(cache.Get(matrix.texts[i], active));
  }
  return sum / static_cast<double>(matrix.texts.size());
}

std::string_view ToString(StopReason reason) {
  return reason == StopReason::kBudget ? "budget" : "no_improvement";
}

SelectionResult SelectFeaturesGreedy(const FeatureMatrix& matrix, SequenceScorer& scorer,
                                     int budget) {
  if (budget < 0) throw Error(ErrorCode::kInvalidArgument, "budget must be >= 0");
  if (matrix.values.rows() != static_cast<Eigen::Index>(matrix.texts.size()) ||
      matrix.values.cols() != static_cast<Eigen::Index>(matrix.features.size())) {
    throw Error(ErrorCode::kInvalidArgument, "matrix shape does not match texts x features");
  }
  SelectionResult result;
  std::vector<Eigen::Index> candidates;
  for (Eigen::Index f = 0; f < matrix.values.cols(); ++f) {
    (matrix.feature_resolved(f) ? candidates : result.excluded).push_back(f);
  }
  ScoreCache cache(scorer);
  double current = MeanPerplexity(matrix, {}, cache);
  result.baseline = current;
  for (;;) {
    if (result.selected.size() >= static_cast<std::size_t>(budget)) {
      result.stop = StopReason::kBudget;
      break;
    }
    if (candidates.empty()) {
      result.stop = StopReason::kNoImprovement;
      break;
    }
    std::vector<double> scores(candidates.size());
    ParallelFor(candidates.size(), [&](std::size_t c) {
      std::vector<Eigen::Index> phi = result.selected;
      phi.push_back(candidates[c]);
      scores[c] = MeanPerplexity(matrix, phi, cache);
    });
    std::size_t best = 0;
    for (std::size_t c = 1; c < candidates.size(); ++c) {
      const std::string& name = matrix.features[static_cast<std::size_t>(candidates[c])];
      const std::string& best_name =
          matrix.features[static_cast<std::size_t>(candidates[best])];
      if (scores[c] < scores[best] || (scores[c] == scores[best] && name < best_name)) {
        best = c;
      }
    }
    if (!(scores[best] < current)) {
      result.stop = StopReason::kNoImprovement;
      break;
    }
    current = scores[best];
    result.selected.push_back(candidates[best]);
    result.trajectory.push_back(current);
    candidates.erase(candidates.begin() + static_cast<std::ptrdiff_t>(best));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Reporting.

std::vector<ModeSummary> SummarizeModes(const SelectionResult& selection,
                                        const FeatureMatrix& matrix,
                                        const std::vector<Cluster>& clusters,
                                        const std::vector<std::string>& pool,
                                        const Summarizer& summarizer) {
  std::vector<ModeSummary> modes;
  const auto n = matrix.values.rows();
  for (Eigen::Index f : selection.selected) {
    ModeSummary mode;
    mode.representative = matrix.features[static_cast<std::size_t>(f)];
    for (const Cluster& cluster : clusters) {
      if (cluster.representative != mode.representative) continue;
      for (std::size_t m : cluster.members) {
        if (m < pool.size()) mode.members.push_back(pool[m]);
      }
      break;
    }
    if (mode.members.empty()) mode.members.push_back(mode.representative);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (matrix.values(i, f) == 1) mode.examples.push_back(static_cast<std::size_t>(i));
    }
    mode.count = static_cast<int>(mode.examples.size());
    mode.share = n > 0 ? 100.0 * mode.count / static_cast<double>(n) : 0.0;
    mode.vacuous = mode.count == 0;
    mode.label = summarizer ? summarizer(mode) : mode.representative;
    modes.push_back(std::move(mode));
  }
  return modes;
}

namespace {

std::string TsvField(std::string_view text) {
  std::string out;
  for (char c : text) out.push_back(c == '\t' || c == '\n' || c == '\r' ? ' ' : c);
  return out;
}

std::string CsvField(std::string_view text) {
  if (text.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(text);
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string OneDecimal(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.1f", value);
  return buffer;
}

}  // namespace

std::string ModesTable(int k, const std::vector<ModeSummary>& modes) {
  std::string out = "k\tfailure_mode\tcount\tshare\n";
  for (const ModeSummary& mode : modes) {
    out += std::to_string(k) + "\t" + TsvField(mode.label) + "\t" +
           std::to_string(mode.count) + "\t" + OneDecimal(mode.share) + "\n";
  }
  return out;
}

std::string ModesListing(const std::vector<ModeSummary>& modes, const FeatureMatrix& matrix,
                         std::size_t max_examples) {
  std::ostringstream out;
  for (const ModeSummary& mode : modes) {
    out << "## " << mode.label << "\n\n"
        << "count " << mode.count << ", share " << OneDecimal(mode.share) << "%"
        << (mode.vacuous ? " (vacuous)" : "") << "\n\n"
        << "Member predicates:\n";
    for (const std::string& member : mode.members) out << "- " << member << "\n";
    out << "\nExamples:\n";
    for (std::size_t i = 0; i < mode.examples.size() && i < max_examples; ++i) {
      std::string text = matrix.texts[mode.examples[i]];
      std::replace(text.begin(), text.end(), '\n', ' ');
      out << "- " << text << "\n";
    }
    out << "\n";
  }
  return out.str();
}

std::string MatrixCsv(const FeatureMatrix& matrix) {
  std::string out = "text";
  for (const std::string& feature : matrix.features) out += "," + CsvField(feature);
  out += "\n";
  for (std::size_t i = 0; i < matrix.texts.size(); ++i) {
    out += CsvField(matrix.texts[i]);
    for (Eigen::Index f = 0; f < matrix.values.cols(); ++f) {
      const int v = matrix.values(static_cast<Eigen::Index>(i), f);
      out += v < 0 ? "," : (v == 1 ? ",1" : ",0");
    }
    out += "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Whole pipeline.

MiningReport RunMining(const std::vector<StepExample>& examples, llm::ChatClient& proposer,
                       llm::ChatClient& evaluator, Embedder& embedder,
                       SequenceScorer& scorer, const FeaturizationConfig& config,
                       const Summarizer& summarizer) {
  ValidateConfig(config);
  MiningReport report;
  report.examples = examples.size();
  report.pool = PoolProposals(examples, proposer, config);
  std::vector<std::string> predicates;
  for (const Hypothesis& h : report.pool.hypotheses) predicates.push_back(h.text);
  std::vector<std::string> texts;
  for (const StepExample& example : examples) texts.push_back(example.text());
  for (int k : config.cluster_counts) {
    MiningRun run;
    run.k = k;
    run.clusters = ClusterFeatures(predicates, embedder, k, config.seed, config.restarts);
    std::vector<std::string> features;
    for (const Cluster& cluster : run.clusters) features.push_back(cluster.representative);
    run.matrix = EvaluateMatrix(texts, features, evaluator, config);
    run.selection = SelectFeaturesGreedy(run.matrix, scorer, config.budget);
    run.modes = SummarizeModes(run.selection, run.matrix, run.clusters, predicates, summarizer);
    report.runs.push_back(std::move(run));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Offline clients.

std::string KeywordProposerClient::Complete(const llm::ChatRequest& request) {
  static const std::set<std::string> kStopwords = {
      "goal", "feedback", "the", "and", "that", "this", "with", "from", "into", "then",
      "than", "there", "their", "they", "were", "was", "have", "has", "had", "not",
      "but", "for", "are", "its", "it", "agent", "step", "should", "would", "could",
      "instead", "when", "what", "which", "while", "page"};
  const std::string user = UserText(request);
  const std::string target = Between(user, "Target example:\n", "\n\nContrast examples:\n");
  const std::string contrasts = Between(user, "Contrast examples:\n", "\n\nPropose ");
  int k = 4;
  try {
    k = std::stoi(Between(user, "\n\nPropose ", " "));
  } catch (const std::exception&) {
  }
  std::set<std::string> contrast_words;
  for (const std::string& w : WordTokens(contrasts)) contrast_words.insert(w);
  std::vector<std::string> words;
  std::set<std::string> seen;
  for (const std::string& w : WordTokens(target)) {
    if (w.size() < 4 || kStopwords.count(w) ||
        std::all_of(w.begin(), w.end(), [](unsigned char c) { return std::isdigit(c); })) {
      continue;
    }
    if (seen.insert(w).second) words.push_back(w);
  }
  // Distinctive words first (absent from every contrast), then longer ones.
  std::stable_sort(words.begin(), words.end(), [&](const std::string& a, const std::string& b) {
    const bool da = contrast_words.count(a) == 0;
    const bool db = contrast_words.count(b) == 0;
    if (da != db) return da;
    if (a.size() != b.size()) return a.size() > b.size();
    return a < b;
  });
  std::string out;
  for (std::size_t i = 0; i < words.size() && i < static_cast<std::size_t>(k); ++i) {
    out += "The step mentions \"" + words[i] + "\"\n";
  }
  return out;
}

std::string SubstringEvaluatorClient::Complete(const llm::ChatRequest& request) {
  const std::string user = UserText(request);
  const std::string text = Between(user, "Text:\n", "\n\nPredicate: ");
  const std::string predicate = Trim(Between(user, "\n\nPredicate: ", "\n\nIs the predicate"));
  std::string term = predicate;
  const std::size_t open = predicate.find('"');
  if (open != std::string::npos) {
    const std::size_t close = predicate.find('"', open + 1);
    if (close != std::string::npos) term = predicate.substr(open + 1, close - open - 1);
  }
  return ToLower(text).find(ToLower(term)) != std::string::npos ? "Y" : "N";
}

}  // namespace arena::miner
