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
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

namespace dforge {

enum class CharClass { ArabicLetter, Diacritic, Other };

CharClass classify_char(char32_t c) noexcept;

bool is_tatweel(char32_t c) noexcept;
bool is_unicode_space(char32_t c) noexcept;
bool is_punctuation(char32_t c) noexcept;

struct DensityReport {
  std::string sentence;
  std::size_t n = 0;  // letters + diacritics
  std::size_t diacritic_count = 0;
  double density_percent = 0.0;
  bool degenerate = false;  // n == 0
  bool retained = false;
};

/// Diacritic percentage over the Arabic letters and marks of a sentence.
/// Everything classified Other (spaces, digits, Latin, tatweel) is outside
/// n. `retained` is left false; filter_by_density decides it.
DensityReport diacritic_density(std::string_view sentence);

struct DensityFilterResult {
  std::vector<std::string> retained;
  std::vector<DensityReport> reports;
};

/// Keeps sentences whose density is >= threshold_percent. Sentences with
/// n == 0 are never kept. Throws std::invalid_argument when the threshold
/// is outside [0,100].
DensityFilterResult filter_by_density(std::span<const std::string> sentences,
                                      double threshold_percent);

// Serial reference for the OpenMP report kernel used above.
std::vector<DensityReport> density_reports_serial(
    std::span<const std::string> sentences);
std::vector<DensityReport> density_reports_parallel(
    std::span<const std::string> sentences);

struct Token {
  std::string sentence_id;
  long long position = 0;
  std::string surface;
};

struct Sentence {
  std::string sentence_id;
  std::string text;

  bool operator==(const Sentence&) const = default;
};

/// Groups tokens by sentence id (first-appearance order), sorts by position
/// and joins with single spaces. Duplicate (sentence_id, position) throws
/// DataError.
std::vector<Sentence> reconstruct_sentences(std::span<const Token> tokens);

struct NormalizationPolicy {
  bool strip_diacritics = true;
  bool remove_tatweel = true;
  bool collapse_whitespace = true;
  bool unify_alef_variants = false;
  bool strip_punctuation = true;

  bool operator==(const NormalizationPolicy&) const = default;
};

nlohmann::ordered_json to_json(const NormalizationPolicy& policy);
NormalizationPolicy policy_from_json(const nlohmann::ordered_json& j);

/// Parses a comma-separated flag list applied left to right on top of the
/// defaults: "default", "none", "name" or "+name" to enable, "-name" to
/// disable. Names are the policy field names. Throws std::invalid_argument.
NormalizationPolicy parse_policy(std::string_view flags);
// Inverse of parse_policy, e.g. "none,+strip_diacritics,+remove_tatweel".
std::string describe_policy(const NormalizationPolicy& policy);

/// Steps run in a fixed order: punctuation, diacritics, tatweel, alef,
/// whitespace collapse, then an unconditional trim. Punctuation becomes a
/// space so adjacent words stay apart.
std::string normalize(std::string_view text, const NormalizationPolicy& policy);

std::vector<std::string> tokenize_words(std::string_view text);

// Line-delimited {"sentence_id","position","surface"} records.
std::vector<Token> load_tokens(const std::filesystem::path& path);
// Line-delimited {"sentence_id","text"} records.
std::vector<Sentence> load_sentences(const std::filesystem::path& path);
void save_sentences(std::span<const Sentence> sentences,
                    const std::filesystem::path& path);

}  // namespace dforge
