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

#include <cstdint>
#include <optional>
#include <string_view>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dforge/protocol.hpp"

// Deterministic stand-in for a real ASR/TTS model, used by tests and the
// example pipelines.
namespace dforge::mock {

// Character substitutions the mock ASR injects. A corrupted word gets one
// of them, at a position picked uniformly among its pool characters.
const std::vector<std::pair<char32_t, char32_t>>& confusion_pool();

// Replacement for a corrupted word with no pool character.
inline constexpr std::string_view kFillerWord = "غلط";
inline constexpr std::string_view kFillerWord2 = "خطأ";

inline constexpr double kCleanWordProb = 0.95;
inline constexpr double kNoisyWordProb = 0.5;

struct AsrTranscript {
  std::string text;
  double confidence = 0.0;
  std::size_t corrupted_words = 0;
};

/// Word-by-word corruption of `oracle_text`: each word is corrupted with
/// probability `noise_rate`, driven by an RNG seeded from (seed, id) so the
/// result does not depend on request order. Confidence is the geometric
/// mean of 0.5 per corrupted and 0.95 per clean word.
AsrTranscript transcribe(const std::string& oracle_text, std::uint64_t seed,
                         const std::string& id, double noise_rate);

struct AsrOptions {
  std::uint64_t seed = 0;
  double noise_rate = 0.0;
  std::string language = "ar";
};

class MockAsr {
 public:
  MockAsr(AsrOptions options, std::unordered_map<std::string, std::string> oracle);

  protocol::AsrResponse respond(const protocol::AsrRequest& request) const;

 private:
  AsrOptions options_;
  std::unordered_map<std::string, std::string> oracle_;
};

struct TtsOptions {
  // Fixed clip length; otherwise 0.5 s + 0.06 s per code point of text.
  std::optional<double> seconds_per_clip;
  bool write_audio = true;
  int sample_rate = 16000;
};

class MockTts {
 public:
  explicit MockTts(TtsOptions options);

  // Writes a silent 16-bit mono WAV of the reported length to out_audio.
  protocol::TtsResponse respond(const protocol::TtsRequest& request) const;

 private:
  TtsOptions options_;
};

double tts_duration(const std::string& text, const TtsOptions& options);
void write_silent_wav(const std::string& path, double seconds, int sample_rate);

/// Fault injection and scheduling knobs for the served process.
struct ServeOptions {
  // Exit with status 3 after this many responses.
  std::optional<std::size_t> crash_after;
  // Emit the first response twice.
  bool duplicate_first = false;
  // Never answer these ids.
  std::set<std::string> hang_ids;
  // Answer these ids with an error record.
  std::set<std::string> fail_ids;
  // Hold requests up to this long and answer buffered ones in a seeded
  // shuffled order.
  int jitter_ms = 0;
  std::uint64_t seed = 0;
};

/// Serves the wire protocol on raw file descriptors until an end record or
/// EOF. Returns the process exit code.
int serve(int in_fd, int out_fd, const ServeOptions& serve_options,
          const MockAsr* asr, const MockTts* tts);

}  // namespace dforge::mock
