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

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dforge/artext.hpp"

namespace dforge {

enum class EditKind : std::uint8_t { Match, Substitute, Insert, Delete };

char edit_kind_code(EditKind kind) noexcept;  // 'M', 'S', 'I', 'D'

template <class T>
struct EditOp {
  EditKind kind;
  std::optional<T> ref;  // absent for Insert
  std::optional<T> hyp;  // absent for Delete

  bool operator==(const EditOp&) const = default;
};

template <class T>
struct EditAlignment {
  std::vector<EditOp<T>> ops;

  std::size_t cost() const {
    return static_cast<std::size_t>(std::count_if(
        ops.begin(), ops.end(), [](const EditOp<T>& op) { return op.kind != EditKind::Match; }));
  }
  std::vector<T> ref_side() const {
    std::vector<T> out;
    for (const auto& op : ops)
      if (op.ref) out.push_back(*op.ref);
    return out;
  }
  std::vector<T> hyp_side() const {
    std::vector<T> out;
    for (const auto& op : ops)
      if (op.hyp) out.push_back(*op.hyp);
    return out;
  }

  bool operator==(const EditAlignment&) const = default;
};

template <class T>
struct EditResult {
  std::size_t distance = 0;
  EditAlignment<T> alignment;
};

/// Unit-cost Levenshtein distance with a full-matrix traceback. The
/// traceback walks back from the sequence ends and prefers
/// Match > Substitute > Delete > Insert whenever costs tie.
template <class T>
EditResult<T> edit_distance(std::span<const T> ref, std::span<const T> hyp) {
  const std::size_t n = ref.size();
  const std::size_t m = hyp.size();
  const std::size_t w = m + 1;
  std::vector<std::uint32_t> d((n + 1) * w);
  for (std::size_t j = 0; j <= m; ++j) d[j] = static_cast<std::uint32_t>(j);
  for (std::size_t i = 1; i <= n; ++i) {
    std::uint32_t* row = &d[i * w];
    const std::uint32_t* prev = &d[(i - 1) * w];
    row[0] = static_cast<std::uint32_t>(i);
    for (std::size_t j = 1; j <= m; ++j) {
      const std::uint32_t diag = prev[j - 1] + (ref[i - 1] == hyp[j - 1] ? 0u : 1u);
      row[j] = std::min({diag, prev[j] + 1u, row[j - 1] + 1u});
    }
  }

  EditResult<T> result;
  result.distance = d[n * w + m];
  auto& ops = result.alignment.ops;
  ops.reserve(std::max(n, m));
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    const std::uint32_t here = d[i * w + j];
    if (i > 0 && j > 0) {
      const std::uint32_t diag = d[(i - 1) * w + (j - 1)];
      if (ref[i - 1] == hyp[j - 1] && here == diag) {
        ops.push_back({EditKind::Match, ref[i - 1], hyp[j - 1]});
        --i, --j;
        continue;
      }
      if (ref[i - 1] != hyp[j - 1] && here == diag + 1) {
        ops.push_back({EditKind::Substitute, ref[i - 1], hyp[j - 1]});
        --i, --j;
        continue;
      }
    }
    if (i > 0 && here == d[(i - 1) * w + j] + 1) {
      ops.push_back({EditKind::Delete, ref[i - 1], std::nullopt});
      --i;
    } else {
      ops.push_back({EditKind::Insert, std::nullopt, hyp[j - 1]});
      --j;
    }
  }
  std::reverse(ops.begin(), ops.end());
  return result;
}

/// Distance only, keeping two rows sized to the shorter sequence. `scratch`
/// is resized to 2 * (min(len) + 1) and may be reused across calls.
template <class T>
std::size_t edit_distance_only(std::span<const T> a, std::span<const T> b,
                               std::vector<std::size_t>& scratch) {
  if (a.size() < b.size()) std::swap(a, b);  // b is the shorter one
  const std::size_t m = b.size();
  scratch.assign(2 * (m + 1), 0);
  std::size_t* prev = scratch.data();
  std::size_t* cur = prev + (m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t diag = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({diag, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

template <class T>
std::size_t edit_distance_only(std::span<const T> a, std::span<const T> b) {
  std::vector<std::size_t> scratch;
  return edit_distance_only(a, b, scratch);
}

struct ScoreInput {
  std::string id;
  std::string ref;
  std::string hyp;
  std::optional<std::string> hyp_language;
  bool missing_hyp = false;
};

struct UtteranceScore {
  std::string id;
  std::string ref;
  std::string hyp;
  std::string ref_norm;
  std::string hyp_norm;
  std::optional<std::string> hyp_language;
  bool missing_hyp = false;
  // Reference is empty after normalization; left out of corpus totals.
  bool excluded = false;
  std::size_t word_edits = 0;
  std::size_t ref_word_count = 0;
  std::size_t char_edits = 0;
  std::size_t ref_char_count = 0;
  EditAlignment<std::string> word_alignment;
  EditAlignment<char32_t> char_alignment;

  double wer_percent() const;
  double cer_percent() const;

  bool operator==(const UtteranceScore&) const = default;
};

struct EvalReport {
  NormalizationPolicy policy;
  std::vector<UtteranceScore> per_utterance;
  std::size_t total_word_edits = 0;
  std::size_t total_ref_words = 0;
  std::size_t total_char_edits = 0;
  std::size_t total_ref_chars = 0;
  std::size_t excluded_count = 0;
  double corpus_wer_percent = 0.0;
  double corpus_cer_percent = 0.0;

  bool operator==(const EvalReport&) const = default;
};

// Characters scored for CER: the normalized words joined by single spaces.
std::u32string cer_units(std::string_view normalized);

UtteranceScore score_pair(std::string_view ref, std::string_view hyp,
                          const NormalizationPolicy& policy);
UtteranceScore score_input(const ScoreInput& input,
                           const NormalizationPolicy& policy);

/// Micro-averaged corpus WER/CER. Per-utterance work runs under OpenMP;
/// records come back in input order. Throws DataError on duplicate ids or
/// when every reference is empty after normalization.
EvalReport score_corpus(std::span<const ScoreInput> pairs,
                        const NormalizationPolicy& policy);

// Single-threaded reference for score_corpus; output is identical.
EvalReport score_corpus_serial(std::span<const ScoreInput> pairs,
                               const NormalizationPolicy& policy);

/// Line-delimited report: one summary record first, then one record per
/// utterance in input order.
void save_eval_report(const EvalReport& report, const std::filesystem::path& path);
EvalReport load_eval_report(const std::filesystem::path& path);

// Two-column metric,value CSV of the summary numbers.
void save_summary_csv(const EvalReport& report, const std::filesystem::path& path);

}  // namespace dforge
