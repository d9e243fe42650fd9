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

#include <algorithm>
#include <cstdio>
#include <set>

#include "arena/util.hpp"

namespace arena::analytics {
namespace {

std::string RequireField(const Json& row, const char* key, const char* what) {
  auto it = row.find(key);
  if (it == row.end() || !it->is_string() || it->get<std::string>().empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(what) + " row needs a non-empty string \"" + key + "\"");
  }
  return it->get<std::string>();
}

std::string Fixed2(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.2f", value);
  return buffer;
}

FrequencyRow Row(std::string key, std::size_t count, std::size_t denominator) {
  FrequencyRow row{std::move(key), count, denominator, std::nullopt};
  if (denominator > 0) row.percent = 100.0 * static_cast<double>(count) / denominator;
  return row;
}

}  // namespace

Preference ParseLabel(std::string_view text) {
  std::string key;
  for (char c : ToLower(text)) {
    if (c != ' ' && c != '_' && c != '-') key.push_back(c);
  }
  if (key == "agent1" || key == "a1" || key == "left" || key == "1") return Preference::kAgent1;
  if (key == "agent2" || key == "a2" || key == "right" || key == "2") return Preference::kAgent2;
  if (key == "tie") return Preference::kTie;
  throw Error(ErrorCode::kInvalidArgument, "unknown label \"" + std::string(text) + "\"");
}

void LabelSet::Add(const std::string& item, const std::string& rater, Preference label) {
  std::vector<RatedLabel>& ratings = labels[item];
  for (const RatedLabel& existing : ratings) {
    if (existing.rater == rater) {
      throw Error(ErrorCode::kInvalidArgument,
                  "rater \"" + rater + "\" labelled item \"" + item + "\" twice");
    }
  }
  ratings.push_back({rater, label});
}

LabelSet LabelSetFromJson(const std::vector<Json>& ratings, const std::vector<Json>& baseline) {
  LabelSet set;
  for (const Json& row : ratings) {
    set.Add(RequireField(row, "item", "rating"), RequireField(row, "rater", "rating"),
            ParseLabel(RequireField(row, "label", "rating")));
  }
  for (const Json& row : baseline) {
    const std::string item = RequireField(row, "item", "baseline");
    if (!set.baseline.emplace(item, ParseLabel(RequireField(row, "label", "baseline"))).second) {
      throw Error(ErrorCode::kInvalidArgument, "baseline lists item \"" + item + "\" twice");
    }
  }
  return set;
}

AgreementRate InterAnnotatorAgreement(const LabelSet& labels) {
  AgreementRate result;
  double sum = 0;
  for (const auto& [item, ratings] : labels.labels) {
    if (ratings.size() < 2) continue;
    std::size_t pairs = 0;
    std::size_t agreeing = 0;
    for (std::size_t a = 0; a < ratings.size(); ++a) {
      for (std::size_t b = a + 1; b < ratings.size(); ++b) {
        ++pairs;
        if (ratings[a].label == ratings[b].label) ++agreeing;
      }
    }
    sum += static_cast<double>(agreeing) / static_cast<double>(pairs);
    ++result.items;
  }
  if (result.items == 0) {
    throw Error(ErrorCode::kNoComparablePairs, "no item has ratings from two raters");
  }
  result.rate = sum / static_cast<double>(result.items);
  return result;
}

std::optional<Preference> ItemPlurality(const std::vector<RatedLabel>& ratings,
                                        bool drop_ties) {
  std::map<Preference, int> counts;
  for (const RatedLabel& r : ratings) {
    if (drop_ties && r.label == Preference::kTie) continue;
    ++counts[r.label];
  }
  if (counts.empty()) return std::nullopt;
  int best = 0;
  for (const auto& [label, n] : counts) best = std::max(best, n);
  std::optional<Preference> winner;
  for (const auto& [label, n] : counts) {
    if (n != best) continue;
    if (winner) return std::nullopt;  // shared first place
    winner = label;
  }
  return winner;
}

MajorityAgreement MajorityVoteAgreement(const LabelSet& labels, bool drop_ties) {
  MajorityAgreement result;
  for (const auto& [item, ratings] : labels.labels) {
    auto base = labels.baseline.find(item);
    if (base == labels.baseline.end()) {
      result.missing_baseline.push_back(item);
      continue;
    }
    const std::optional<Preference> plurality = ItemPlurality(ratings, drop_ties);
    if (!plurality) {
      result.non_evaluable.push_back(item);
      continue;
    }
    ++result.evaluable;
    if (*plurality == base->second) ++result.agreeing;
  }
  if (result.evaluable > 0) {
    result.rate = static_cast<double>(result.agreeing) / static_cast<double>(result.evaluable);
  }
  return result;
}

AgreementMatrix JudgeAgreement(const std::vector<LabelSource>& sources) {
  if (sources.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "agreement needs at least two label sources");
  }
  std::set<std::string> names;
  for (const LabelSource& s : sources) {
    if (!names.insert(s.name).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate source name \"" + s.name + "\"");
    }
  }
  AgreementMatrix matrix;
  const std::size_t n = sources.size();
  for (const LabelSource& s : sources) matrix.sources.push_back(s.name);
  matrix.cells.assign(n, std::vector<AgreementCell>(n));
  for (std::size_t a = 0; a < n; ++a) {
    matrix.cells[a][a] = {1.0, sources[a].labels.size()};
    for (std::size_t b = a + 1; b < n; ++b) {
      std::size_t common = 0;
      std::size_t agree = 0;
      for (const auto& [item, label] : sources[a].labels) {
        auto it = sources[b].labels.find(item);
        if (it == sources[b].labels.end()) continue;
        ++common;
        if (it->second == label) ++agree;
      }
      if (common == 0) {
        throw Error(ErrorCode::kDisjointItemSets,
                    "\"" + sources[a].name + "\" and \"" + sources[b].name +
                        "\" share no item");
      }
      const AgreementCell cell{static_cast<double>(agree) / static_cast<double>(common), common};
      matrix.cells[a][b] = cell;
      matrix.cells[b][a] = cell;
    }
  }
  return matrix;
}

std::vector<LabelSource> StandardSources(const LabelSet& labels,
                                         const std::vector<judge::VerdictRecord>& verdicts,
                                         bool drop_ties) {
  std::vector<LabelSource> sources;
  sources.push_back({"baseline", labels.baseline});
  LabelSource majority{"annotator_majority", {}};
  for (const auto& [item, ratings] : labels.labels) {
    if (auto p = ItemPlurality(ratings, drop_ties)) majority.labels[item] = *p;
  }
  sources.push_back(std::move(majority));
  std::map<std::string, LabelSource> judges;
  for (const judge::VerdictRecord& record : verdicts) {
    if (record.kind != "pairwise") continue;
    const std::string name = record.judge_model + "/" + record.ablation;
    LabelSource& source = judges[name];
    source.name = name;
    if (!record.verdict.contains("choice") || !record.verdict["choice"].is_string()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "pairwise verdict for \"" + record.item_id + "\" has no choice");
    }
    source.labels[record.item_id] = ParseLabel(record.verdict["choice"].get<std::string>());
  }
  for (auto& [name, source] : judges) sources.push_back(std::move(source));
  return sources;
}

std::string AgreementMatrixCsv(const AgreementMatrix& matrix) {
  std::string out = "source";
  for (const std::string& s : matrix.sources) out += "," + s;
  out += "\n";
  for (std::size_t a = 0; a < matrix.sources.size(); ++a) {
    out += matrix.sources[a];
    for (std::size_t b = 0; b < matrix.sources.size(); ++b) {
      out += "," + Fixed2(100.0 * matrix.cells[a][b].rate);
    }
    out += "\n";
  }
  return out;
}

std::vector<FrequencyRow> CaptchaFrequencies(const std::vector<judge::CaptchaVerdict>& verdicts) {
  if (verdicts.empty()) throw Error(ErrorCode::kInvalidArgument, "no captcha verdicts");
  std::vector<FrequencyRow> rows;
  for (std::size_t k = 0; k < judge::kCaptchaKeys.size(); ++k) {
    std::size_t count = 0;
    for (const judge::CaptchaVerdict& v : verdicts) count += v.values[k] ? 1 : 0;
    rows.push_back(Row(std::string(judge::kCaptchaKeys[k]), count, verdicts.size()));
  }
  return rows;
}

std::vector<FrequencyRow> BannerFrequencies(const std::vector<judge::BannerVerdict>& verdicts) {
  if (verdicts.empty()) throw Error(ErrorCode::kInvalidArgument, "no banner verdicts");
  std::size_t detected = 0;
  std::size_t closed = 0;
  std::size_t completed = 0;
  for (const judge::BannerVerdict& v : verdicts) {
    detected += v.banner_detected ? 1 : 0;
    closed += (v.banner_detected && v.banner_closed) ? 1 : 0;
    completed += v.task_successfully_completed ? 1 : 0;
  }
  return {Row("banner_detected", detected, verdicts.size()),
          Row("banner_closed", closed, detected),
          Row("task_successfully_completed", completed, verdicts.size())};
}

std::string FrequencyCsv(const std::vector<FrequencyRow>& rows) {
  std::string out = "key,count,denominator,percent\n";
  for (const FrequencyRow& row : rows) {
    out += row.key + "," + std::to_string(row.count) + "," + std::to_string(row.denominator) +
           "," + (row.percent ? Fixed2(*row.percent) : "undefined") + "\n";
  }
  return out;
}

}  // namespace arena::analytics
