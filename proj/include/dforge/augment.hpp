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

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "dforge/artext.hpp"
#include "dforge/corpus.hpp"
#include "dforge/protocol.hpp"

namespace dforge {

struct PseudoLabelEntry {
  std::string utterance_id;
  std::string hypothesis_text;
  double confidence = 0.0;
  std::string language;
};

struct PseudoLabelBatch {
  std::vector<PseudoLabelEntry> entries;
  std::string teacher_id;
};

/// Successful responses become entries; error responses are skipped and
/// counted in `failures` when given.
PseudoLabelBatch pseudo_batch_from_responses(
    std::span<const protocol::AsrResponse> responses, const std::string& teacher_id,
    std::size_t* failures = nullptr);

/// Labels `unlabeled` with the teacher's hypotheses. Utterances without a
/// batch entry are dropped. Throws DataError for entries naming an unknown
/// or already-labelled utterance, repeated entries, or confidences outside
/// [0,1].
Manifest build_pseudo_manifest(const Manifest& unlabeled, const PseudoLabelBatch& batch);

/// Keeps utterances with confidence >= threshold. Throws std::invalid_argument
/// for a threshold outside [0,1] and DataError for an utterance lacking a
/// confidence.
Manifest filter_by_confidence(const Manifest& manifest, double threshold);

// Drops utterances whose id is in `ids` (e.g. clips shared with an eval set).
Manifest exclude_ids(const Manifest& manifest, const std::unordered_set<std::string>& ids);

/// One synthesis request per sentence, written to "<sentence_id>.wav".
std::vector<protocol::TtsRequest> prepare_tts_jobs(std::span<const Sentence> sentences,
                                                   const std::string& voice);

/// Builds the TTS manifest from the jobs and whatever the synthesizer
/// returned. Failed or missing responses are dropped and counted in the
/// provenance. A response for an unknown job, or a second response for the
/// same job, throws DataError.
Manifest assemble_tts_manifest(std::span<const protocol::TtsRequest> jobs,
                               std::span<const protocol::TtsResponse> responses,
                               const std::string& name);

std::vector<protocol::TtsRequest> load_tts_jobs(const std::filesystem::path& path);
void save_tts_jobs(std::span<const protocol::TtsRequest> jobs, const std::filesystem::path& path);
std::vector<protocol::TtsResponse> load_tts_responses(const std::filesystem::path& path);
void save_tts_responses(std::span<const protocol::TtsResponse> responses,
                        const std::filesystem::path& path);

struct TrainingRecipe {
  long long steps = 5000;
  double learning_rate = 1e-5;
  long long warmup_steps = 500;
  long long train_batch_size = 8;
  long long eval_batch_size = 4;
  std::string train_manifest;
  std::string eval_manifest;
  std::string base_model;

  bool operator==(const TrainingRecipe&) const = default;
};

struct RecipeOverrides {
  std::optional<long long> steps;
  std::optional<double> learning_rate;
  std::optional<long long> warmup_steps;
  std::optional<long long> train_batch_size;
  std::optional<long long> eval_batch_size;
};

/// Fine-tuning recipe for the given manifests: 5000 steps, lr 1e-5, 500
/// warm-up steps, batch 8/4, then overrides. Both manifests must exist on
/// disk. Throws DataError when steps <= warmup_steps, warmup_steps < 0 or a
/// batch size is < 1.
TrainingRecipe emit_recipe(const std::filesystem::path& train,
                           const std::filesystem::path& eval, const std::string& base_model,
                           const RecipeOverrides& overrides = {});

// key=value lines in field order.
std::string format_recipe(const TrainingRecipe& recipe);
TrainingRecipe parse_recipe(std::string_view text);
void write_recipe(const TrainingRecipe& recipe, const std::filesystem::path& path);

}  // namespace dforge
