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

#include "dforge/corpus.hpp"

#include <cmath>
#include <cstdio>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "dforge/error.hpp"

namespace dforge {

namespace {

constexpr std::array<std::pair<Source, std::string_view>, 6> kSourceTags{{
    {Source::SdnClean, "sdn-clean"},
    {Source::Msa, "msa"},
    {Source::Pseudo, "pseudo"},
    {Source::Tts, "tts"},
    {Source::OookUnlabeled, "oook-unlabeled"},
    {Source::Other, "other"},
}};

bool is_blank(std::string_view s) {
  return s.find_first_not_of(" \t\r\n") == std::string_view::npos;
}

const Json* find_key(const Json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return nullptr;
  return &*it;
}

std::string require_string(const Json& obj, const char* key,
                           const std::string& path, std::size_t line) {
  const Json* v = find_key(obj, key);
  if (v == nullptr) throw RecordError(path, line, key, "missing required key");
  if (!v->is_string()) throw RecordError(path, line, key, "expected a string");
  return v->get<std::string>();
}

std::optional<std::string> optional_string(const Json& obj, const char* key,
                                           const std::string& path,
                                           std::size_t line) {
  const Json* v = find_key(obj, key);
  if (v == nullptr) return std::nullopt;
  if (!v->is_string()) throw RecordError(path, line, key, "expected a string");
  return v->get<std::string>();
}

double require_number(const Json& v, const char* key, const std::string& path,
                      std::size_t line) {
  if (!v.is_number()) throw RecordError(path, line, key, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw RecordError(path, line, key, "not finite");
  return d;
}

const std::set<std::string_view> kKnownKeys{
    "id",      "audio",      "duration_sec", "text",
    "speaker", "source",     "confidence",   "language"};

}  // namespace

std::string_view to_string(Source source) {
  for (const auto& [s, tag] : kSourceTags)
    if (s == source) return tag;
  return "other";
}

std::optional<Source> parse_source(std::string_view tag) {
  for (const auto& [s, t] : kSourceTags)
    if (t == tag) return s;
  return std::nullopt;
}

void SecondsAccumulator::add(double seconds) noexcept {
  const double t = sum_ + seconds;
  if (std::fabs(sum_) >= std::fabs(seconds)) {
    compensation_ += (sum_ - t) + seconds;
  } else {
    compensation_ += (seconds - t) + sum_;
  }
  sum_ = t;
}

double total_seconds(const Manifest& manifest) {
  SecondsAccumulator acc;
  for (const auto& u : manifest.utterances) acc.add(u.duration_sec);
  return acc.value();
}

std::string format_hours(double hours) {
  // Nudge by a few ulps so values like 15.195 stored as 15.19499... still
  // round up the way the decimal reads.
  const double scaled = std::floor(hours * 100.0 * (1.0 + 1e-12) + 0.5);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", scaled / 100.0);
  return buf;
}

Json utterance_to_json(const Utterance& utt) {
  Json j = Json::object();
  j["id"] = utt.id;
  j["audio"] = utt.audio;
  j["duration_sec"] = utt.duration_sec;
  if (utt.text) j["text"] = *utt.text;
  if (utt.speaker) j["speaker"] = *utt.speaker;
  j["source"] = std::string(to_string(utt.source));
  if (utt.confidence) j["confidence"] = *utt.confidence;
  if (utt.language) j["language"] = *utt.language;
  for (const auto& [k, v] : utt.extra.items()) j[k] = v;
  return j;
}

Utterance utterance_from_json(const Json& record, const std::string& path,
                              std::size_t line) {
  if (!record.is_object())
    throw RecordError(path, line, "<record>", "expected a JSON object");
  Utterance u;
  u.id = require_string(record, "id", path, line);
  if (u.id.empty()) throw RecordError(path, line, "id", "must be non-empty");
  u.audio = require_string(record, "audio", path, line);

  const Json* dur = find_key(record, "duration_sec");
  if (dur == nullptr)
    throw RecordError(path, line, "duration_sec", "missing required key");
  u.duration_sec = require_number(*dur, "duration_sec", path, line);
  if (u.duration_sec < 0)
    throw RecordError(path, line, "duration_sec", "must be >= 0");

  const std::string tag = require_string(record, "source", path, line);
  auto source = parse_source(tag);
  if (!source)
    throw RecordError(path, line, "source", "unknown source tag '" + tag + "'");
  u.source = *source;

  u.text = optional_string(record, "text", path, line);
  u.speaker = optional_string(record, "speaker", path, line);
  u.language = optional_string(record, "language", path, line);
  if (const Json* c = find_key(record, "confidence")) {
    const double conf = require_number(*c, "confidence", path, line);
    if (conf < 0.0 || conf > 1.0)
      throw RecordError(path, line, "confidence",
                        "value " + c->dump() + " outside [0,1]");
    u.confidence = conf;
  }
  for (const auto& [k, v] : record.items())
    if (!kKnownKeys.contains(k)) u.extra[k] = v;
  return u;
}

ManifestReader::ManifestReader(const std::filesystem::path& path)
    : path_(path.string()), in_(path) {
  if (!in_) throw DataError("cannot open manifest " + path_);
  name_ = path.stem().string();

  std::string raw;
  if (!read_record_line(raw)) return;
  Json j;
  try {
    j = Json::parse(raw);
  } catch (const Json::parse_error& e) {
    throw RecordError(path_, line_, "<record>", e.what());
  }
  if (j.is_object() && j.contains("manifest") && !j.contains("id")) {
    const Json& h = j["manifest"];
    if (!h.is_object())
      throw RecordError(path_, line_, "manifest", "expected an object");
    if (h.contains("name")) {
      if (!h["name"].is_string())
        throw RecordError(path_, line_, "manifest.name", "expected a string");
      name_ = h["name"].get<std::string>();
    }
    if (h.contains("provenance")) {
      if (!h["provenance"].is_array())
        throw RecordError(path_, line_, "manifest.provenance",
                          "expected an array");
      for (const auto& s : h["provenance"]) {
        if (!s.is_object() || !s.contains("stage") || !s["stage"].is_string())
          throw RecordError(path_, line_, "manifest.provenance",
                            "stage entries need a string 'stage'");
        provenance_.push_back(
            {s["stage"].get<std::string>(),
             s.contains("params") ? s["params"] : Json::object()});
      }
    }
  } else {
    pending_ = std::move(raw);
    pending_line_ = line_;
  }
}

bool ManifestReader::read_record_line(std::string& out) {
  std::string raw;
  while (std::getline(in_, raw)) {
    ++line_;
    if (is_blank(raw)) continue;
    out = std::move(raw);
    return true;
  }
  if (in_.bad()) throw DataError("I/O error reading " + path_);
  return false;
}

std::optional<Utterance> ManifestReader::next() {
  std::string raw;
  std::size_t at = 0;
  if (pending_) {
    raw = std::move(*pending_);
    pending_.reset();
    at = pending_line_;
  } else {
    if (!read_record_line(raw)) return std::nullopt;
    at = line_;
  }
  Json j;
  try {
    j = Json::parse(raw);
  } catch (const Json::parse_error& e) {
    throw RecordError(path_, at, "<record>", e.what());
  }
  line_ = at;
  return utterance_from_json(j, path_, at);
}

Manifest load_manifest(const std::filesystem::path& path) {
  ManifestReader reader(path);
  Manifest m;
  m.name = reader.name();
  m.provenance = reader.provenance();
  std::unordered_map<std::string, std::size_t> seen;
  while (auto u = reader.next()) {
    auto [it, inserted] = seen.emplace(u->id, reader.line());
    if (!inserted)
      throw RecordError(path.string(), reader.line(), "id",
                        "duplicate id '" + u->id + "' (first seen on line " +
                            std::to_string(it->second) + ")");
    m.utterances.push_back(std::move(*u));
  }
  return m;
}

void save_manifest(const Manifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write manifest " + path.string());

  Json stages = Json::array();
  for (const auto& s : manifest.provenance)
    stages.push_back(Json{{"stage", s.name}, {"params", s.params}});
  Json header;
  header["manifest"] = Json{{"name", manifest.name}, {"provenance", stages}};
  out << header.dump() << '\n';
  for (const auto& u : manifest.utterances)
    out << utterance_to_json(u).dump() << '\n';
  out.flush();
  if (!out) throw DataError("I/O error writing " + path.string());
}

DatasetStats compute_stats(const Manifest& manifest) {
  DatasetStats stats;
  stats.utterance_count = manifest.utterances.size();
  std::unordered_set<std::string> speakers;
  SecondsAccumulator acc;
  for (const auto& u : manifest.utterances) {
    acc.add(u.duration_sec);
    if (u.speaker) speakers.insert(*u.speaker);
    if (u.text) ++stats.labeled_count;
    if (u.confidence) {
      auto bin = static_cast<std::size_t>(std::floor(*u.confidence * 10.0));
      if (bin > 9) bin = 9;
      ++stats.confidence_histogram[bin];
    }
  }
  stats.total_seconds = acc.value();
  stats.total_hours = stats.total_seconds / 3600.0;
  stats.distinct_speakers = speakers.size();
  return stats;
}

Manifest combine(const std::vector<Manifest>& parts, const std::string& name) {
  if (parts.empty()) throw DataError("combine: no input manifests");

  std::unordered_map<std::string, std::size_t> owners;
  std::unordered_set<std::string> colliding;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    for (const auto& u : parts[p].utterances) {
      auto [it, inserted] = owners.emplace(u.id, p);
      if (!inserted && it->second != p) colliding.insert(u.id);
    }
  }

  Manifest out;
  out.name = name;
  Json part_records = Json::array();
  std::unordered_set<std::string> emitted;
  for (const auto& part : parts) {
    Json rec;
    rec["name"] = part.name;
    rec["utterances"] = part.utterances.size();
    rec["seconds"] = total_seconds(part);
    rec["provenance"] = Json::array();
    for (const auto& s : part.provenance)
      rec["provenance"].push_back(Json{{"stage", s.name}, {"params", s.params}});
    part_records.push_back(std::move(rec));

    for (const auto& u : part.utterances) {
      Utterance copy = u;
      if (colliding.contains(u.id)) copy.id = part.name + "/" + u.id;
      if (!emitted.insert(copy.id).second)
        throw DataError("combine: id '" + copy.id +
                        "' still collides after prefixing with part names");
      out.utterances.push_back(std::move(copy));
    }
  }

  if (parts.size() == 1) out.provenance = parts.front().provenance;
  out.provenance.push_back(
      {"combine", Json{{"name", name},
                       {"parts", std::move(part_records)},
                       {"renamed_ids", colliding.size()}}});
  return out;
}

std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::EmptyId: return "empty-id";
    case ViolationKind::DuplicateId: return "duplicate-id";
    case ViolationKind::BadDuration: return "bad-duration";
    case ViolationKind::ConfidenceOutOfRange: return "confidence-out-of-range";
    case ViolationKind::PseudoWithoutConfidence: return "pseudo-without-confidence";
    case ViolationKind::MissingAudio: return "missing-audio";
  }
  return "unknown";
}

std::vector<Violation> validate(const Manifest& manifest,
                                const std::filesystem::path& audio_root) {
  std::vector<Violation> out;
  std::unordered_set<std::string> ids;
  for (const auto& u : manifest.utterances) {
    if (u.id.empty())
      out.push_back({u.id, ViolationKind::EmptyId, "utterance id is empty"});
    else if (!ids.insert(u.id).second)
      out.push_back({u.id, ViolationKind::DuplicateId, "id appears more than once"});
    if (!std::isfinite(u.duration_sec) || u.duration_sec < 0)
      out.push_back({u.id, ViolationKind::BadDuration,
                     "duration_sec must be a finite value >= 0"});
    if (u.confidence && !(*u.confidence >= 0.0 && *u.confidence <= 1.0))
      out.push_back({u.id, ViolationKind::ConfidenceOutOfRange,
                     "confidence outside [0,1]"});
    if (u.source == Source::Pseudo && !u.confidence)
      out.push_back({u.id, ViolationKind::PseudoWithoutConfidence,
                     "pseudo-labelled utterance has no confidence"});
    std::filesystem::path audio(u.audio);
    if (audio.is_relative()) audio = audio_root / audio;
    std::error_code ec;
    if (u.audio.empty() || !std::filesystem::is_regular_file(audio, ec))
      out.push_back({u.id, ViolationKind::MissingAudio,
                     "audio file not found: " + audio.string()});
  }
  return out;
}

}  // namespace dforge
