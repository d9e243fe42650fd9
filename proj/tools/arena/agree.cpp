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

#include "arena/analytics.hpp"
#include "arena/error.hpp"
#include "arena/judge.hpp"
#include "cli.hpp"

namespace arena::cli {
namespace {

struct AgreeOptions {
  std::string labels_path;
  std::string baseline_path;
  std::vector<std::string> verdict_paths;
  bool drop_ties = false;
  std::string format = "json";
  std::string out;
};

Json MajorityJson(const analytics::MajorityAgreement& m) {
  return {{"rate", m.rate},
          {"evaluable", m.evaluable},
          {"agreeing", m.agreeing},
          {"non_evaluable", m.non_evaluable},
          {"missing_baseline", m.missing_baseline}};
}

Json MatrixJson(const analytics::AgreementMatrix& matrix) {
  Json rates = Json::array();
  Json common = Json::array();
  for (const auto& row : matrix.cells) {
    Json rate_row = Json::array();
    Json common_row = Json::array();
    for (const analytics::AgreementCell& cell : row) {
      rate_row.push_back(cell.rate);
      common_row.push_back(cell.common_items);
    }
    rates.push_back(std::move(rate_row));
    common.push_back(std::move(common_row));
  }
  return {{"sources", matrix.sources}, {"rates", rates}, {"common_items", common}};
}

Json FrequencyJson(const std::vector<analytics::FrequencyRow>& rows) {
  Json out = Json::array();
  for (const analytics::FrequencyRow& row : rows) {
    out.push_back({{"key", row.key},
                   {"count", row.count},
                   {"denominator", row.denominator},
                   {"percent", row.percent ? Json(*row.percent) : Json()}});
  }
  return out;
}

int RunAgree(const AgreeOptions& options, const Globals& /*globals*/) {
  if (options.format != "json" && options.format != "csv") {
    throw Error(ErrorCode::kInvalidArgument, "--format must be json or csv");
  }
  if (options.labels_path.empty() != options.baseline_path.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "--labels and --baseline go together");
  }
  if (options.labels_path.empty() && options.verdict_paths.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "nothing to compare: give --labels/--baseline or --verdicts");
  }

  std::vector<judge::VerdictRecord> verdicts;
  for (const std::string& path : options.verdict_paths) {
    for (judge::VerdictRecord& record : judge::ReadVerdicts(path)) verdicts.push_back(std::move(record));
  }

  Json report = Json::object();
  std::string csv;
  if (!options.labels_path.empty()) {
    const analytics::LabelSet labels =
        analytics::LabelSetFromJson(ReadJsonl(options.labels_path), ReadJsonl(options.baseline_path));
    Json iaa;
    try {
      const analytics::AgreementRate rate = analytics::InterAnnotatorAgreement(labels);
      iaa = {{"rate", rate.rate}, {"items", rate.items}};
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNoComparablePairs) throw;
    }
    report["inter_annotator"] = iaa;
    report["majority_vote"] = {
        {"keep_ties", MajorityJson(analytics::MajorityVoteAgreement(labels, false))},
        {"drop_ties", MajorityJson(analytics::MajorityVoteAgreement(labels, true))}};
    const analytics::AgreementMatrix matrix =
        analytics::JudgeAgreement(analytics::StandardSources(labels, verdicts, options.drop_ties));
    report["agreement"] = MatrixJson(matrix);
    csv += analytics::AgreementMatrixCsv(matrix);
  }

  std::vector<judge::CaptchaVerdict> captcha;
  std::vector<judge::BannerVerdict> banner;
  for (const judge::VerdictRecord& record : verdicts) {
    if (record.kind == "captcha") captcha.push_back(judge::ParseCaptchaVerdict(record.verdict.dump()));
    if (record.kind == "banner") banner.push_back(judge::ParseBannerVerdict(record.verdict.dump()));
  }
  if (!captcha.empty()) {
    const auto rows = analytics::CaptchaFrequencies(captcha);
    report["captcha"] = FrequencyJson(rows);
    csv += (csv.empty() ? "" : "\n") + std::string("# captcha\n") + analytics::FrequencyCsv(rows);
  }
  if (!banner.empty()) {
    const auto rows = analytics::BannerFrequencies(banner);
    report["banner"] = FrequencyJson(rows);
    csv += (csv.empty() ? "" : "\n") + std::string("# banner\n") + analytics::FrequencyCsv(rows);
  }
  Emit(options.out, options.format == "json" ? report.dump(2) + "\n" : csv);
  return 0;
}

}  // namespace

Command AddAgree(CLI::App& app, const Globals& globals) {
  auto options = std::make_shared<AgreeOptions>();
  CLI::App* sub = app.add_subcommand("agree", "Agreement and scenario statistics");
  sub->add_option("--labels", options->labels_path,
                  "Human ratings JSONL: {\"item\",\"rater\",\"label\"}");
  sub->add_option("--baseline", options->baseline_path,
                  "Reference labels JSONL: {\"item\",\"label\"}");
  sub->add_option("--verdicts", options->verdict_paths,
                  "Judge verdict JSONL (repeatable); pairwise records join the agreement "
                  "matrix, captcha and banner records give frequencies");
  sub->add_flag("--drop-ties", options->drop_ties,
                "Drop Tie labels before taking the annotator majority in the matrix");
  sub->add_option("--format", options->format, "json or csv")->capture_default_str();
  sub->add_option("-o,--out", options->out, "Output file (default stdout)");
  return {sub, [options, &globals] { return RunAgree(*options, globals); }};
}

}  // namespace arena::cli
