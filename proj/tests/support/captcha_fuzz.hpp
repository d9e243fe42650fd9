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

#ifndef ARENA_TESTS_SUPPORT_CAPTCHA_FUZZ_HPP_
#define ARENA_TESTS_SUPPORT_CAPTCHA_FUZZ_HPP_

#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "arena/judge.hpp"
#include "arena/util.hpp"

namespace arena::testing {

// A captcha-judge answer pushed out of the schema by one to three random
// key deletions, unknown-key additions, value type flips or key repeats.
// Mutations can cancel (repeat a key, then delete the copy), so mutating
// continues until the document really is out of schema.
inline std::string MutatedCaptchaAnswer(std::mt19937_64& rng) {
  static const std::vector<std::string> near_misses = {
      "public proxy", "Cache", "text_only_rendering", "other", "new-tab",
      "reload", "internal navigation", "", "google_travel"};
  static const std::vector<std::string> wrong_values = {"\"true\"", "\"false\"", "1",   "0",
                                                        "null",     "[]",      "{}",  "\"\"",
                                                        "0.0",      "[true]",  "\"yes\""};
  // Ordered (key, value-text) pairs so duplicates can be expressed.
  std::vector<std::pair<std::string, std::string>> fields;
  for (std::string_view key : judge::kCaptchaKeys) {
    fields.emplace_back(std::string(key), UniformBelow(rng, 2) ? "true" : "false");
  }
  auto in_schema = [&] {
    if (fields.size() != judge::kCaptchaKeys.size()) return false;
    std::set<std::string> names;
    for (const auto& [name, value] : fields) {
      if (value != "true" && value != "false") return false;
      names.insert(name);
    }
    for (std::string_view key : judge::kCaptchaKeys) {
      if (!names.count(std::string(key))) return false;
    }
    return true;
  };
  const int mutations = 1 + static_cast<int>(UniformBelow(rng, 3));
  for (int m = 0; m < mutations || in_schema(); ++m) {
    switch (UniformBelow(rng, 4)) {
      case 0:  // delete a key
        if (!fields.empty()) fields.erase(fields.begin() + UniformBelow(rng, fields.size()));
        break;
      case 1:  // add an unknown key
        fields.emplace_back(near_misses[UniformBelow(rng, near_misses.size())],
                            UniformBelow(rng, 2) ? "true" : "false");
        break;
      case 2:  // flip a value's type
        if (!fields.empty()) {
          fields[UniformBelow(rng, fields.size())].second =
              wrong_values[UniformBelow(rng, wrong_values.size())];
        }
        break;
      default:  // repeat an existing key
        if (!fields.empty()) {
          auto copy = fields[UniformBelow(rng, fields.size())];
          fields.insert(fields.begin() + UniformBelow(rng, fields.size() + 1), copy);
        }
        break;
    }
  }
  SeededShuffle(fields, rng);
  std::string doc = "{";
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) doc += ", ";
    doc += Json(fields[i].first).dump() + ": " + fields[i].second;
  }
  return doc + "}";
}

// The worked example embedded in the captcha prompt: the fenced
// block as printed, and with its missing colon after "internal_navigation"
// restored.
inline std::string CaptchaWorkedExampleVerbatim() {
  const std::string prompt(PromptTemplate(judge::kCaptchaPrompt));
  const std::size_t open = prompt.find("```\n");
  const std::size_t close = prompt.find("```", open + 4);
  return prompt.substr(open, close + 3 - open);
}

inline std::string CaptchaWorkedExampleCorrected() {
  std::string text = CaptchaWorkedExampleVerbatim();
  const std::string typo = "\"internal_navigation\" false";
  text.replace(text.find(typo), typo.size(), "\"internal_navigation\": false");
  return text;
}

}  // namespace arena::testing

#endif  // ARENA_TESTS_SUPPORT_CAPTCHA_FUZZ_HPP_
