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

#include <cstdlib>
#include <iostream>

#include "arena/error.hpp"
#include "arena/llm.hpp"
#include "arena/miner.hpp"
#include "cli.hpp"

namespace arena::cli {
namespace {

struct MineOptions {
  std::string annotations_path;
  std::string data_dir;
  std::string out_dir;
  int contrasts = 0;
  int k_per_example = 0;
  std::vector<int> cluster_counts;
  int budget = 0;
  std::string client = "offline";
  std::string proposer_model;
  std::string evaluator_model;
  std::string scorer_model = "davinci-002";
  std::string embedding_model = "text-embedding-3-small";
  bool all_verdicts = false;
};

// The model-backed pieces of the pipeline.
struct Backends {
  std::unique_ptr<llm::ChatClient> proposer;
  std::unique_ptr<llm::ChatClient> evaluator;
  std::unique_ptr<miner::Embedder> embedder;
  std::unique_ptr<miner::SequenceScorer> scorer;
};

Backends MakeBackends(const MineOptions& options) {
  Backends backends;
  if (options.client == "offline") {
    backends.proposer = std::make_unique<miner::KeywordProposerClient>();
    backends.evaluator = std::make_unique<miner::SubstringEvaluatorClient>();
    backends.embedder = std::make_unique<miner::HashedBowEmbedder>();
    backends.scorer = std::make_unique<miner::UnigramCacheScorer>();
    return backends;
  }
  if (options.client != "openai") {
    throw Error(ErrorCode::kInvalidArgument, "--client must be offline or openai");
  }
  const char* key = std::getenv("OPENAI_API_KEY");
  if (!key || !*key) throw Error(ErrorCode::kClientUnavailable, "OPENAI_API_KEY is not set");
  const char* base_env = std::getenv("ARENA_LLM_BASE_URL");
  const std::string base = base_env && *base_env ? base_env : "https://api.openai.com";
  backends.proposer = std::make_unique<llm::OpenAiChatClient>(base, key);
  backends.evaluator = std::make_unique<llm::OpenAiChatClient>(base, key);
  backends.embedder = std::make_unique<miner::OpenAiEmbedder>(base, key, options.embedding_model);
  backends.scorer = std::make_unique<miner::OpenAiCompletionScorer>(base, key, options.scorer_model);
  return backends;
}

miner::FeaturizationConfig ResolveConfig(const MineOptions& options, const Globals& globals) {
  const Json section = ConfigSection(globals, "miner");
  miner::FeaturizationConfig config;
  config.contrasts = section.value("contrasts", config.contrasts);
  config.k = section.value("k", config.k);
  config.max_words = section.value("max_words", config.max_words);
  config.cluster_counts = section.value("cluster_counts", config.cluster_counts);
  config.proposal_temperature = section.value("proposal_temperature", config.proposal_temperature);
  config.budget = section.value("budget", config.budget);
  config.max_retries = section.value("max_retries", config.max_retries);
  config.restarts = section.value("restarts", config.restarts);
  config.seed = section.value("seed", LoadConfig(globals).value("seed", config.seed));
  config.proposer_model = section.value("proposer_model", config.proposer_model);
  config.evaluator_model = section.value("evaluator_model", config.evaluator_model);

  if (globals.seed_given) config.seed = globals.seed;
  if (options.contrasts > 0) config.contrasts = options.contrasts;
  if (options.k_per_example > 0) config.k = options.k_per_example;
  if (!options.cluster_counts.empty()) config.cluster_counts = options.cluster_counts;
  if (options.budget > 0) config.budget = options.budget;
  if (!options.proposer_model.empty()) config.proposer_model = options.proposer_model;
  if (!options.evaluator_model.empty()) config.evaluator_model = options.evaluator_model;
  miner::ValidateConfig(config);
  return config;
}

std::vector<Json> LoadExport(const MineOptions& options, const Globals& globals) {
  if (options.annotations_path.empty() == options.data_dir.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "give exactly one of --annotations or --data-dir");
  }
  if (!options.annotations_path.empty()) return ReadJsonl(options.annotations_path);
  DataView view(options.data_dir, globals);
  return view.service().ExportAnnotations();
}

Json FeatureNames(const miner::FeatureMatrix& matrix, const std::vector<Eigen::Index>& columns) {
  Json names = Json::array();
  for (Eigen::Index f : columns) names.push_back(matrix.features[static_cast<std::size_t>(f)]);
  return names;
}

int RunMine(const MineOptions& options, const Globals& globals) {
  const miner::FeaturizationConfig config = ResolveConfig(options, globals);
  std::size_t skipped = 0;
  const std::vector<miner::StepExample> examples =
      miner::ExamplesFromExport(LoadExport(options, globals), !options.all_verdicts, &skipped);
  Info(globals, std::to_string(examples.size()) + " examples (" + std::to_string(skipped) +
                    " rows skipped)");
  Backends backends = MakeBackends(options);
  const miner::MiningReport report =
      miner::RunMining(examples, *backends.proposer, *backends.evaluator, *backends.embedder,
                       *backends.scorer, config);

  const std::filesystem::path out(options.out_dir);
  std::filesystem::create_directories(out);
  std::string hypotheses;
  for (const miner::Hypothesis& h : report.pool.hypotheses) {
    const miner::StepExample& source = examples.at(h.example);
    hypotheses += Json({{"text", h.text},
                        {"example", h.example},
                        {"battle_id", source.battle_id},
                        {"side", std::string(ToString(source.side))},
                        {"step_index", source.step_index}})
                      .dump() +
                  "\n";
  }
  Emit((out / "hypotheses.jsonl").string(), hypotheses);

  std::string all_modes = "k\tfailure_mode\tcount\tshare\n";
  Json runs = Json::array();
  for (const miner::MiningRun& run : report.runs) {
    const std::filesystem::path dir = out / ("k" + std::to_string(run.k));
    std::filesystem::create_directories(dir);
    const std::string table = miner::ModesTable(run.k, run.modes);
    Emit((dir / "matrix.csv").string(), miner::MatrixCsv(run.matrix));
    Emit((dir / "modes.tsv").string(), table);
    Emit((dir / "modes.md").string(), miner::ModesListing(run.modes, run.matrix));
    all_modes += table.substr(table.find('\n') + 1);

    const Json selection = {{"k", run.k},
                            {"baseline_ppl", run.selection.baseline},
                            {"trajectory", run.selection.trajectory},
                            {"selected", FeatureNames(run.matrix, run.selection.selected)},
                            {"excluded", FeatureNames(run.matrix, run.selection.excluded)},
                            {"stop", std::string(miner::ToString(run.selection.stop))}};
    Emit((dir / "selection.json").string(), selection.dump(2) + "\n");
    runs.push_back({{"k", run.k},
                    {"selected", run.selection.selected.size()},
                    {"baseline_ppl", run.selection.baseline},
                    {"final_ppl", run.selection.trajectory.empty()
                                      ? run.selection.baseline
                                      : run.selection.trajectory.back()},
                    {"stop", std::string(miner::ToString(run.selection.stop))}});
  }
  Emit((out / "modes.tsv").string(), all_modes);

  const Json summary = {{"examples", report.examples},
                        {"skipped_rows", skipped},
                        {"hypotheses", report.pool.hypotheses.size()},
                        {"rejected", report.pool.rejected},
                        {"duplicates", report.pool.duplicates},
                        {"seed", config.seed},
                        {"runs", runs}};
  Emit((out / "summary.json").string(), summary.dump(2) + "\n");
  std::cout << summary.dump() << "\n";
  return 0;
}

}  // namespace

Command AddMine(CLI::App& app, const Globals& globals) {
  auto options = std::make_shared<MineOptions>();
  CLI::App* sub = app.add_subcommand("mine", "Discover failure modes from step annotations");
  sub->add_option("--annotations", options->annotations_path, "Annotation export JSONL");
  sub->add_option("--data-dir", options->data_dir, "Arena data directory (instead of a file)");
  sub->add_option("-o,--out", options->out_dir, "Output directory")->required();
  sub->add_option("--c", options->contrasts, "Contrast examples per proposal (default 5)");
  sub->add_option("--k-per-example", options->k_per_example,
                  "Predicates proposed per example (default 4)");
  sub->add_option("--clusters", options->cluster_counts,
                  "Cluster counts to run (default 15 10 5)");
  sub->add_option("--budget", options->budget, "Max selected features (default 10)");
  sub->add_option("--client", options->client, "offline or openai")->capture_default_str();
  sub->add_option("--proposer-model", options->proposer_model, "Proposer chat model");
  sub->add_option("--evaluator-model", options->evaluator_model, "Evaluator chat model");
  sub->add_option("--scorer-model", options->scorer_model, "Completion model for perplexity")
      ->capture_default_str();
  sub->add_option("--embedding-model", options->embedding_model, "Embedding model")
      ->capture_default_str();
  sub->add_flag("--all-verdicts", options->all_verdicts,
                "Use every annotated step, not only incorrect ones");
  return {sub, [options, &globals] { return RunMine(*options, globals); }};
}

}  // namespace arena::cli
