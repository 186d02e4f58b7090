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

#include "dforge/augment.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "dforge/error.hpp"

namespace dforge {

namespace {

std::string shortest(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

template <class T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || end != value.data() + value.size())
    throw DataError("recipe: bad value for " + std::string(key) + ": '" + std::string(value) + "'");
  return out;
}

void check_recipe(const TrainingRecipe& r) {
  if (r.warmup_steps < 0) throw DataError("recipe: warmup_steps must be >= 0");
  if (r.steps <= r.warmup_steps)
    throw DataError("recipe: steps (" + std::to_string(r.steps) +
                    ") must exceed warmup_steps (" + std::to_string(r.warmup_steps) + ")");
  if (r.train_batch_size < 1 || r.eval_batch_size < 1)
    throw DataError("recipe: batch sizes must be >= 1");
  if (!(r.learning_rate > 0.0)) throw DataError("recipe: learning_rate must be > 0");
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line))
    if (line.find_first_not_of(" \t\r") != std::string::npos) lines.push_back(line);
  return lines;
}

}  // namespace

PseudoLabelBatch pseudo_batch_from_responses(std::span<const protocol::AsrResponse> responses,
                                             const std::string& teacher_id,
                                             std::size_t* failures) {
  PseudoLabelBatch batch;
  batch.teacher_id = teacher_id;
  std::size_t failed = 0;
  for (const auto& r : responses) {
    if (!r.ok()) {
      ++failed;
      continue;
    }
    batch.entries.push_back({r.id, r.text.value_or(""), r.confidence.value_or(0.0),
                             r.language.value_or("")});
  }
  if (failures) *failures = failed;
  return batch;
}

Manifest build_pseudo_manifest(const Manifest& unlabeled, const PseudoLabelBatch& batch) {
  std::unordered_map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < unlabeled.utterances.size(); ++i)
    position.emplace(unlabeled.utterances[i].id, i);

  std::vector<const PseudoLabelEntry*> by_utt(unlabeled.utterances.size(), nullptr);
  for (const auto& e : batch.entries) {
    auto it = position.find(e.utterance_id);
    if (it == position.end())
      throw DataError("pseudo-label entry for unknown utterance '" + e.utterance_id + "'");
    const auto& utt = unlabeled.utterances[it->second];
    if (utt.text)
      throw DataError("pseudo-label entry for already-labelled utterance '" + e.utterance_id + "'");
    if (by_utt[it->second])
      throw DataError("repeated pseudo-label entry for '" + e.utterance_id + "'");
    if (!(e.confidence >= 0.0 && e.confidence <= 1.0))
      throw DataError("pseudo-label confidence for '" + e.utterance_id + "' outside [0,1]");
    by_utt[it->second] = &e;
  }

  Manifest out;
  out.name = unlabeled.name + "-pseudo";
  out.provenance = unlabeled.provenance;
  for (std::size_t i = 0; i < unlabeled.utterances.size(); ++i) {
    const PseudoLabelEntry* e = by_utt[i];
    if (!e) continue;
    Utterance u = unlabeled.utterances[i];
    u.text = e->hypothesis_text;
    u.confidence = e->confidence;
    u.source = Source::Pseudo;
    if (!e->language.empty()) u.language = e->language;
    out.utterances.push_back(std::move(u));
  }
  out.provenance.push_back(
      {"pseudo-label", Json{{"teacher", batch.teacher_id},
                            {"unlabeled", unlabeled.utterances.size()},
                            {"labelled", out.utterances.size()},
                            {"dropped", unlabeled.utterances.size() - out.utterances.size()}}});
  return out;
}

Manifest filter_by_confidence(const Manifest& manifest, double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0))
    throw std::invalid_argument("confidence threshold must lie in [0,1]");
  Manifest out;
  out.name = manifest.name;
  out.provenance = manifest.provenance;
  for (const auto& u : manifest.utterances) {
    if (!u.confidence) throw DataError("utterance '" + u.id + "' has no confidence");
    if (*u.confidence >= threshold) out.utterances.push_back(u);
  }
  out.provenance.push_back(
      {"confidence-filter", Json{{"threshold", threshold},
                                 {"kept", out.utterances.size()},
                                 {"dropped", manifest.utterances.size() - out.utterances.size()}}});
  return out;
}

Manifest exclude_ids(const Manifest& manifest, const std::unordered_set<std::string>& ids) {
  Manifest out;
  out.name = manifest.name;
  out.provenance = manifest.provenance;
  for (const auto& u : manifest.utterances)
    if (!ids.contains(u.id)) out.utterances.push_back(u);
  out.provenance.push_back(
      {"exclude-ids", Json{{"excluded", manifest.utterances.size() - out.utterances.size()}}});
  return out;
}

std::vector<protocol::TtsRequest> prepare_tts_jobs(std::span<const Sentence> sentences,
                                                   const std::string& voice) {
  std::unordered_set<std::string> seen;
  std::vector<protocol::TtsRequest> jobs;
  jobs.reserve(sentences.size());
  for (const auto& s : sentences) {
    if (!seen.insert(s.sentence_id).second)
      throw DataError("duplicate sentence id '" + s.sentence_id + "'");
    jobs.push_back({s.sentence_id, s.text, voice, s.sentence_id + ".wav"});
  }
  return jobs;
}

Manifest assemble_tts_manifest(std::span<const protocol::TtsRequest> jobs,
                               std::span<const protocol::TtsResponse> responses,
                               const std::string& name) {
  std::unordered_map<std::string, std::size_t> job_index;
  for (std::size_t i = 0; i < jobs.size(); ++i)
    if (!job_index.emplace(jobs[i].id, i).second)
      throw DataError("duplicate job id '" + jobs[i].id + "'");

  std::vector<const protocol::TtsResponse*> by_job(jobs.size(), nullptr);
  for (const auto& r : responses) {
    auto it = job_index.find(r.id);
    if (it == job_index.end()) throw DataError("synthesis response for unknown job '" + r.id + "'");
    if (by_job[it->second]) throw DataError("second synthesis response for job '" + r.id + "'");
    if (r.ok() && !(r.duration_sec.value_or(0.0) > 0.0))
      throw DataError("synthesis response for '" + r.id + "' has no positive duration");
    by_job[it->second] = &r;
  }

  Manifest out;
  out.name = name;
  std::size_t failed = 0, missing = 0;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const auto* r = by_job[i];
    if (!r) {
      ++missing;
      continue;
    }
    if (!r->ok()) {
      ++failed;
      continue;
    }
    Utterance u;
    u.id = jobs[i].id;
    u.audio = r->out_audio.value_or(jobs[i].out_audio);
    u.duration_sec = *r->duration_sec;
    u.text = jobs[i].text;
    u.speaker = jobs[i].voice;
    u.source = Source::Tts;
    out.utterances.push_back(std::move(u));
  }
  out.provenance.push_back({"tts-assemble", Json{{"jobs", jobs.size()},
                                                 {"synthesized", out.utterances.size()},
                                                 {"failed", failed},
                                                 {"missing", missing}}});
  return out;
}

std::vector<protocol::TtsRequest> load_tts_jobs(const std::filesystem::path& path) {
  std::vector<protocol::TtsRequest> jobs;
  std::size_t n = 0;
  for (const auto& line : read_lines(path)) {
    ++n;
    if (protocol::is_end_record(line)) continue;
    try {
      jobs.push_back(protocol::parse_tts_request(line));
    } catch (const ProtocolError& e) {
      throw DataError(path.string() + ": record " + std::to_string(n) + ": " + e.what());
    }
  }
  return jobs;
}

void save_tts_jobs(std::span<const protocol::TtsRequest> jobs, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& j : jobs) out << protocol::serialize(j) << '\n';
  if (!out) throw DataError("I/O error writing " + path.string());
}

std::vector<protocol::TtsResponse> load_tts_responses(const std::filesystem::path& path) {
  std::vector<protocol::TtsResponse> out;
  std::size_t n = 0;
  for (const auto& line : read_lines(path)) {
    ++n;
    if (protocol::is_end_record(line)) continue;
    try {
      out.push_back(protocol::parse_tts_response(line));
    } catch (const ProtocolError& e) {
      throw DataError(path.string() + ": record " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

void save_tts_responses(std::span<const protocol::TtsResponse> responses,
                        const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& r : responses) out << protocol::serialize(r) << '\n';
  if (!out) throw DataError("I/O error writing " + path.string());
}

TrainingRecipe emit_recipe(const std::filesystem::path& train, const std::filesystem::path& eval,
                           const std::string& base_model, const RecipeOverrides& overrides) {
  for (const auto& p : {train, eval})
    if (!std::filesystem::is_regular_file(p))
      throw DataError("recipe manifest not found: " + p.string());
  if (base_model.empty()) throw DataError("recipe: base model must be named");

  TrainingRecipe r;
  r.train_manifest = train.string();
  r.eval_manifest = eval.string();
  r.base_model = base_model;
  if (overrides.steps) r.steps = *overrides.steps;
  if (overrides.learning_rate) r.learning_rate = *overrides.learning_rate;
  if (overrides.warmup_steps) r.warmup_steps = *overrides.warmup_steps;
  if (overrides.train_batch_size) r.train_batch_size = *overrides.train_batch_size;
  if (overrides.eval_batch_size) r.eval_batch_size = *overrides.eval_batch_size;
  check_recipe(r);
  return r;
}

std::string format_recipe(const TrainingRecipe& r) {
  std::ostringstream out;
  out << "steps=" << r.steps << '\n'
      << "learning_rate=" << shortest(r.learning_rate) << '\n'
      << "warmup_steps=" << r.warmup_steps << '\n'
      << "train_batch_size=" << r.train_batch_size << '\n'
      << "eval_batch_size=" << r.eval_batch_size << '\n'
      << "train_manifest=" << r.train_manifest << '\n'
      << "eval_manifest=" << r.eval_manifest << '\n'
      << "base_model=" << r.base_model << '\n';
  return out.str();
}

TrainingRecipe parse_recipe(std::string_view text) {
  TrainingRecipe r;
  std::unordered_set<std::string> seen;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw DataError("recipe: line without '=': " + std::string(line));
    const std::string key(line.substr(0, eq));
    const std::string_view value = line.substr(eq + 1);
    if (!seen.insert(key).second) throw DataError("recipe: repeated key " + key);
    if (key == "steps") r.steps = parse_number<long long>(key, value);
    else if (key == "learning_rate") r.learning_rate = parse_number<double>(key, value);
    else if (key == "warmup_steps") r.warmup_steps = parse_number<long long>(key, value);
    else if (key == "train_batch_size") r.train_batch_size = parse_number<long long>(key, value);
    else if (key == "eval_batch_size") r.eval_batch_size = parse_number<long long>(key, value);
    else if (key == "train_manifest") r.train_manifest = value;
    else if (key == "eval_manifest") r.eval_manifest = value;
    else if (key == "base_model") r.base_model = value;
    else throw DataError("recipe: unknown key " + key);
  }
  check_recipe(r);
  return r;
}

void write_recipe(const TrainingRecipe& recipe, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << format_recipe(recipe);
  if (!out) throw DataError("I/O error writing " + path.string());
}

}  // namespace dforge
