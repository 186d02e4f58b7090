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

#include <array>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace dforge {

using Json = nlohmann::ordered_json;

enum class Source { SdnClean, Msa, Pseudo, Tts, OookUnlabeled, Other };

std::string_view to_string(Source source);
std::optional<Source> parse_source(std::string_view tag);

/// One audio clip. `extra` holds record keys this version does not know
/// about; they are written back unchanged.
struct Utterance {
  std::string id;
  std::string audio;
  double duration_sec = 0.0;
  std::optional<std::string> text;
  std::optional<std::string> speaker;
  Source source = Source::Other;
  std::optional<double> confidence;
  std::optional<std::string> language;
  Json extra = Json::object();

  bool operator==(const Utterance&) const = default;
};

/// A pipeline step that touched a manifest, e.g. {"confidence-filter",
/// {"threshold": 0.7}}.
struct Stage {
  std::string name;
  Json params = Json::object();

  bool operator==(const Stage&) const = default;
};

struct Manifest {
  std::string name;
  std::vector<Utterance> utterances;
  std::vector<Stage> provenance;

  bool operator==(const Manifest&) const = default;
};

struct DatasetStats {
  std::size_t utterance_count = 0;
  double total_seconds = 0.0;
  double total_hours = 0.0;
  std::size_t distinct_speakers = 0;
  std::size_t labeled_count = 0;
  // Bin k covers [k/10, (k+1)/10); 1.0 lands in the last bin.
  std::array<std::size_t, 10> confidence_histogram{};
};

/// Neumaier-compensated running sum of clip durations.
class SecondsAccumulator {
 public:
  void add(double seconds) noexcept;
  double value() const noexcept { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

double total_seconds(const Manifest& manifest);
inline double total_hours(const Manifest& manifest) {
  return total_seconds(manifest) / 3600.0;
}

// Round half-up to two decimals ("15.20").
std::string format_hours(double hours);

Json utterance_to_json(const Utterance& utt);
Utterance utterance_from_json(const Json& record, const std::string& path,
                              std::size_t line);

/// Streams a manifest file one utterance at a time. The optional header
/// line carrying name and provenance is consumed on construction.
class ManifestReader {
 public:
  explicit ManifestReader(const std::filesystem::path& path);

  const std::string& name() const noexcept { return name_; }
  const std::vector<Stage>& provenance() const noexcept { return provenance_; }
  // Line number of the record most recently returned by next().
  std::size_t line() const noexcept { return line_; }

  std::optional<Utterance> next();

 private:
  bool read_record_line(std::string& out);

  std::string path_;
  std::ifstream in_;
  std::string name_;
  std::vector<Stage> provenance_;
  std::size_t line_ = 0;
  std::optional<std::string> pending_;
  std::size_t pending_line_ = 0;
};

Manifest load_manifest(const std::filesystem::path& path);
void save_manifest(const Manifest& manifest, const std::filesystem::path& path);

DatasetStats compute_stats(const Manifest& manifest);

/// Concatenates parts in order. Ids that collide across parts are rewritten
/// to "<part-name>/<id>" in every part that holds them.
Manifest combine(const std::vector<Manifest>& parts, const std::string& name);

enum class ViolationKind {
  EmptyId,
  DuplicateId,
  BadDuration,
  ConfidenceOutOfRange,
  PseudoWithoutConfidence,
  MissingAudio,
};

std::string_view to_string(ViolationKind kind);

struct Violation {
  std::string id;
  ViolationKind kind;
  std::string message;
};

std::vector<Violation> validate(const Manifest& manifest,
                                const std::filesystem::path& audio_root);

}  // namespace dforge
