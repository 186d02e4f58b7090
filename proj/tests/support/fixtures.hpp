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


// Shared fixtures, generators and reference implementations for the test
// binaries. Nothing here calls into the code it is used to check.

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "dforge/augment.hpp"
#include "dforge/corpus.hpp"
#include "dforge/metrics.hpp"
#include "dforge/protocol.hpp"

namespace dforge::testing {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const noexcept { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

std::string read_file(const fs::path& path);
void write_file(const fs::path& path, const std::string& content);

struct CommandResult {
  int exit_code = -1;
  std::string out;
};

// Runs through /bin/sh; stderr is left alone unless the command redirects it.
CommandResult run_command(const std::string& command);
std::string shell_quote(const std::string& s);

inline std::string cli_path() { return DFORGE_CLI_PATH; }
inline std::string mock_path() { return DFORGE_MOCK_PATH; }

// ------------------------------------------------------------ edit distance

// Exhaustive search over edit scripts with branch-and-bound pruning. Every
// path from (0,0) to (|a|,|b|) through match/substitute, delete and insert
// steps is a script; the cheapest one is the distance.
template <class T>
std::size_t brute_force_distance(std::span<const T> a, std::span<const T> b) {
  std::size_t best = std::max(a.size(), b.size());
  auto search = [&](auto&& self, std::size_t i, std::size_t j, std::size_t cost) -> void {
    const std::size_t left_a = a.size() - i, left_b = b.size() - j;
    // max(|a|,|b|) is always attainable, so a branch that cannot beat the
    // current best can be dropped.
    const std::size_t lower = cost + (left_a > left_b ? left_a - left_b : left_b - left_a);
    if (lower >= best) return;
    if (left_a == 0 && left_b == 0) {
      best = cost;
      return;
    }
    if (left_a > 0 && left_b > 0) self(self, i + 1, j + 1, cost + (a[i] == b[j] ? 0 : 1));
    if (left_a > 0) self(self, i + 1, j, cost + 1);
    if (left_b > 0) self(self, i, j + 1, cost + 1);
  };
  search(search, 0, 0, 0);
  return best;
}

// Applies an alignment's script to `ref` and returns the result, checking
// each op against the sequence it claims to consume.
template <class T>
bool replay_alignment(const EditAlignment<T>& alignment, std::span<const T> ref,
                      std::span<const T> hyp) {
  std::size_t i = 0, j = 0;
  for (const auto& op : alignment.ops) {
    switch (op.kind) {
      case EditKind::Match:
        if (i >= ref.size() || j >= hyp.size() || *op.ref != ref[i] || *op.hyp != hyp[j] ||
            ref[i] != hyp[j])
          return false;
        ++i, ++j;
        break;
      case EditKind::Substitute:
        if (i >= ref.size() || j >= hyp.size() || *op.ref != ref[i] || *op.hyp != hyp[j] ||
            ref[i] == hyp[j])
          return false;
        ++i, ++j;
        break;
      case EditKind::Delete:
        if (i >= ref.size() || op.hyp || *op.ref != ref[i]) return false;
        ++i;
        break;
      case EditKind::Insert:
        if (j >= hyp.size() || op.ref || *op.hyp != hyp[j]) return false;
        ++j;
        break;
    }
  }
  return i == ref.size() && j == hyp.size();
}

std::vector<int> random_symbols(std::mt19937_64& rng, std::size_t max_len, int alphabet);

// All sequences over {0..alphabet-1} of exactly `len` symbols.
std::vector<std::vector<int>> all_sequences(std::size_t len, int alphabet);

// ------------------------------------------------------------ text corpora

// Arabic words, each carrying at least one character from the mock
// backend's confusion pool.
const std::vector<std::string>& pool_vocabulary();
// Arabic words with no pool characters at all.
const std::vector<std::string>& plain_vocabulary();

std::string random_sentence(std::mt19937_64& rng, std::size_t min_words, std::size_t max_words,
                            const std::vector<std::string>& vocab);

// Random references/hypotheses with some exact matches and some empty hyps.
std::vector<ScoreInput> random_corpus(std::mt19937_64& rng, std::size_t count);

// ----------------------------------------------------------------- density

struct DensityCase {
  std::string sentence;
  std::size_t letters;
  std::size_t diacritics;
  double density_percent;
  bool retained_at_25;
};

const std::vector<DensityCase>& density_fixture();

// --------------------------------------------------------------- manifests

// `count` utterances whose durations are whole centiseconds summing to
// exactly `hours`. Confidences are drawn uniformly from [conf_lo, conf_hi)
// when conf_hi > conf_lo.
Manifest manifest_with_hours(const std::string& name, Source source, double hours,
                             std::size_t count, std::uint64_t seed, double conf_lo = 0.0,
                             double conf_hi = 0.0, const std::string& id_prefix = "");

Manifest concat(const std::string& name, const std::vector<Manifest>& parts);

Manifest random_manifest(std::mt19937_64& rng, std::size_t count);

// Component corpora sized to the reference training-set hours.
struct TrainingSetComponents {
  Manifest sdn_clean;      // 3.93 h
  Manifest pseudo_small;   // 4.80 h at >= 0.9, 6.47 h in [0.7, 0.9), rest below
  Manifest pseudo_medium;  // 13.42 h at >= 0.9, 6.41 h in [0.7, 0.9), rest below
  std::vector<protocol::TtsRequest> tts_jobs;
  std::vector<protocol::TtsResponse> tts_responses;  // 4.61 h of successes
};

TrainingSetComponents training_set_components(std::uint64_t seed);

struct TrainingSetRow {
  std::string label;
  double reference_hours;
  double hours;
};

// Derives every training-set row through the library's own operations
// (confidence filter, TTS assembly, combine).
std::vector<TrainingSetRow> training_set_rows(const TrainingSetComponents& c);

// ---------------------------------------------------------------- analysis

struct PlantedFaults {
  EvalReport eval;
  std::vector<std::string> latin_ids;
  std::vector<std::string> loop_ids;
};

PlantedFaults planted_fault_fixture(std::uint64_t seed);

}  // namespace dforge::testing
