// Copyright 2026 The dialect-forge Authors
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

#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dforge/artext.hpp"
#include "dforge/metrics.hpp"

namespace dforge {

// Thresholds behind the error taxonomy. Embedded in every report.
struct HeuristicParams {
  double script_fraction = 0.5;  // min Arabic share of letters
  double length_ratio = 2.0;     // hyp/ref normalized char length
  std::size_t ngram = 3;
  std::size_t repeats = 3;       // consecutive copies of one n-gram
  std::size_t top_n = 20;

  bool operator==(const HeuristicParams&) const = default;
};

bool is_arabic_script_letter(char32_t c) noexcept;
bool is_letter(char32_t c) noexcept;
bool is_arabic_language_tag(std::string_view tag);

// Arabic-script share of the letters in `text`; nullopt without letters.
std::optional<double> arabic_letter_fraction(std::string_view text);

/// True when the normalized hypothesis is empty, has an Arabic letter share
/// below params.script_fraction (or no letters at all), or the backend
/// reported a non-Arabic language.
bool detect_language_failure(std::string_view hyp, const std::optional<std::string>& backend_language,
                             const HeuristicParams& params = {},
                             const NormalizationPolicy& policy = {});

bool has_repetition_loop(std::span<const std::string> tokens, std::size_t n, std::size_t repeats);

/// True when the normalized hypothesis is more than params.length_ratio
/// times longer than the reference (in code points, reference floored at 1)
/// or repeats an n-gram params.repeats times back to back.
bool detect_hallucination(std::string_view ref, std::string_view hyp,
                          const HeuristicParams& params = {},
                          const NormalizationPolicy& policy = {});

// Absent side = epsilon (insertion or deletion).
struct Confusion {
  std::optional<char32_t> ref;
  std::optional<char32_t> hyp;
  std::size_t count = 0;

  bool operator==(const Confusion&) const = default;
};

/// Counts every non-Match op keyed by (ref, hyp) and returns the top_n by
/// count, ties by code point pair ascending with epsilon first.
std::vector<Confusion> char_confusions(std::span<const EditAlignment<char32_t>> alignments,
                                       std::size_t top_n);

struct ErrorReport {
  std::size_t total = 0;
  std::vector<std::string> language_failures;
  std::vector<std::string> hallucinations;
  std::vector<Confusion> confusion_top;
  HeuristicParams params;

  bool operator==(const ErrorReport&) const = default;
};

/// Runs both detectors on every utterance and ranks character confusions.
/// Language tags come from `backend_languages` when given, otherwise from
/// the report's recorded hypothesis language.
ErrorReport build_error_report(const EvalReport& eval,
                               const std::unordered_map<std::string, std::string>* backend_languages,
                               const HeuristicParams& params);

nlohmann::ordered_json to_json(const ErrorReport& report);
ErrorReport error_report_from_json(const nlohmann::ordered_json& j);
void save_error_report(const ErrorReport& report, const std::filesystem::path& path);
ErrorReport load_error_report(const std::filesystem::path& path);

// ref,hyp,count rows; epsilon is written as <eps>.
void save_confusions_csv(const ErrorReport& report, const std::filesystem::path& path);

}  // namespace dforge
