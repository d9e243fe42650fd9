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

#ifndef ARENA_ANALYTICS_HPP_
#define ARENA_ANALYTICS_HPP_

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "arena/judge.hpp"

// Agreement and frequency statistics over preference labels and scenario
// verdicts. Everything here is a pure function of its inputs.
namespace arena::analytics {

using judge::Preference;

// Accepts "Agent 1"/"agent1"/"A1"/"left", "Agent 2"/"agent2"/"A2"/"right"
// and "Tie" (case, spaces and underscores ignored). Throws InvalidArgument.
Preference ParseLabel(std::string_view text);

struct RatedLabel {
  std::string rater;
  Preference label = Preference::kTie;
};

struct LabelSet {
  std::map<std::string, std::vector<RatedLabel>> labels;  // item -> ratings
  std::map<std::string, Preference> baseline;             // item -> label

  void Add(const std::string& item, const std::string& rater, Preference label);
};

// Rows {"item", "rater", "label"} and {"item", "label"} respectively.
LabelSet LabelSetFromJson(const std::vector<Json>& ratings, const std::vector<Json>& baseline);

// Mean over items with >= 2 ratings of the fraction of agreeing unordered
// rater pairs. Throws NoComparablePairs when no item has two ratings.
struct AgreementRate {
  double rate = 0;
  std::size_t items = 0;  // items that contributed
};
AgreementRate InterAnnotatorAgreement(const LabelSet& labels);

// Plurality of an item's labels (Tie labels removed first when
// `drop_ties`); nullopt when nothing is left or first place is shared.
std::optional<Preference> ItemPlurality(const std::vector<RatedLabel>& ratings,
                                        bool drop_ties);

struct MajorityAgreement {
  double rate = 0;              // agreeing / evaluable (0 when none evaluable)
  std::size_t evaluable = 0;
  std::size_t agreeing = 0;
  std::vector<std::string> non_evaluable;  // no plurality or no labels left
  std::vector<std::string> missing_baseline;
};
MajorityAgreement MajorityVoteAgreement(const LabelSet& labels, bool drop_ties);

// ---------------------------------------------------------------------------
// Pairwise agreement between label sources.

struct LabelSource {
  std::string name;
  std::map<std::string, Preference> labels;  // item -> label
};

struct AgreementCell {
  double rate = 0;
  std::size_t common_items = 0;
};

struct AgreementMatrix {
  std::vector<std::string> sources;
  std::vector<std::vector<AgreementCell>> cells;  // symmetric, diagonal 1
};

// Raw percent agreement for every pair of sources over the items both
// label. Throws DisjointItemSets when some pair shares no item, and
// InvalidArgument for fewer than two sources or duplicate names.
AgreementMatrix JudgeAgreement(const std::vector<LabelSource>& sources);

// Sources for the usual comparison: "baseline", "annotator_majority" (items
// with a plurality only), then one per judge configuration found in the
// pairwise verdict records, named "<judge_model>/<ablation>".
std::vector<LabelSource> StandardSources(const LabelSet& labels,
                                         const std::vector<judge::VerdictRecord>& verdicts,
                                         bool drop_ties);

std::string AgreementMatrixCsv(const AgreementMatrix& matrix);

// ---------------------------------------------------------------------------
// Scenario frequencies.

struct FrequencyRow {
  std::string key;
  std::size_t count = 0;
  std::size_t denominator = 0;
  std::optional<double> percent;  // undefined when the denominator is 0
};

// One row per captcha key, each over all verdicts. Throws InvalidArgument
// for an empty list.
std::vector<FrequencyRow> CaptchaFrequencies(const std::vector<judge::CaptchaVerdict>& verdicts);

// banner_detected and task_successfully_completed over all verdicts;
// banner_closed over the verdicts that detected a banner.
std::vector<FrequencyRow> BannerFrequencies(const std::vector<judge::BannerVerdict>& verdicts);

// CSV key,count,denominator,percent with two decimals or "undefined".
std::string FrequencyCsv(const std::vector<FrequencyRow>& rows);

}  // namespace arena::analytics

#endif  // ARENA_ANALYTICS_HPP_
