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


#include "support/fixtures.hpp"

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "dforge/augment.hpp"

namespace dforge::testing {

namespace {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::string numbered(const std::string& prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%05zu", i);
  return prefix + buf;
}

// Splits `total` centiseconds into `count` positive parts.
std::vector<long long> partition_centiseconds(long long total, std::size_t count,
                                              std::mt19937_64& rng) {
  const long long floor_cs = 100;
  if (count == 0) return {};
  if (total < floor_cs * static_cast<long long>(count))
    throw std::invalid_argument("too many clips for the requested hours");
  std::vector<double> weights(count);
  double sum = 0.0;
  for (auto& w : weights) sum += (w = 0.2 + uniform01(rng));
  const long long spare = total - floor_cs * static_cast<long long>(count);
  std::vector<long long> parts(count);
  long long used = 0;
  for (std::size_t i = 0; i + 1 < count; ++i) {
    parts[i] = floor_cs + static_cast<long long>(std::floor(weights[i] / sum * spare));
    used += parts[i];
  }
  parts.back() = total - used;
  return parts;
}

}  // namespace

TempDir::TempDir() {
  std::string tmpl = (fs::temp_directory_path() / "dforge-test-XXXXXX").string();
  if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
  path_ = tmpl;
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

CommandResult run_command(const std::string& command) {
  CommandResult r;
  FILE* pipe = popen(command.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t got;
  while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'')
      out += "'\\''";
    else
      out += c;
  }
  return out + "'";
}

std::vector<int> random_symbols(std::mt19937_64& rng, std::size_t max_len, int alphabet) {
  std::vector<int> v(rng() % (max_len + 1));
  for (auto& x : v) x = static_cast<int>(rng() % static_cast<unsigned>(alphabet));
  return v;
}

std::vector<std::vector<int>> all_sequences(std::size_t len, int alphabet) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(len, 0);
  while (true) {
    out.push_back(cur);
    std::size_t k = 0;
    while (k < len && ++cur[k] == alphabet) cur[k++] = 0;
    if (k == len) break;
  }
  return out;
}

const std::vector<std::string>& pool_vocabulary() {
  static const std::vector<std::string> words = {
      "كتاب", "مدرسة", "قلم", "بيت", "سوق", "ولد", "هواء", "ذهب",
      "ثوب", "كرسي", "شمس", "دار", "قمر", "سماء", "طريق", "وقت"};
  return words;
}

const std::vector<std::string>& plain_vocabulary() {
  static const std::vector<std::string> words = {
      "باب", "نور", "جمل", "عين", "فيل", "ماء", "لبن", "حبل", "زرع",
      "غيم", "بحر", "جبل", "نار", "طير", "علم", "رمل", "ضوء"};
  return words;
}

std::string random_sentence(std::mt19937_64& rng, std::size_t min_words, std::size_t max_words,
                            const std::vector<std::string>& vocab) {
  const std::size_t n = min_words + rng() % (max_words - min_words + 1);
  std::string s;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) s += ' ';
    s += vocab[rng() % vocab.size()];
  }
  return s;
}

std::vector<ScoreInput> random_corpus(std::mt19937_64& rng, std::size_t count) {
  std::vector<std::string> vocab = pool_vocabulary();
  vocab.insert(vocab.end(), plain_vocabulary().begin(), plain_vocabulary().end());
  std::vector<ScoreInput> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    ScoreInput in;
    in.id = numbered("u", i);
    in.ref = random_sentence(rng, 1, 12, vocab);
    switch (rng() % 5) {
      case 0:
        in.hyp = in.ref;
        break;
      case 1:
        in.hyp.clear();
        break;
      default:
        in.hyp = random_sentence(rng, 0, 14, vocab);
        break;
    }
    out.push_back(std::move(in));
  }
  return out;
}

const std::vector<DensityCase>& density_fixture() {
  static const std::vector<DensityCase> cases = {
      // k a t a b a: 3 letters, 3 fatha
      {"كَتَبَ", 3, 3, 50.0, true},
      // k t b: 3 letters
      {"كتب", 3, 0, 0.0, false},
      // m a d r s h: 5 letters, 1 fatha
      {"مَدرسة", 5, 1, 100.0 / 6.0, false},
      // two words: 6 + 4 letters, 3 + 3 marks
      {"الكِتَابُ "
       "جَمِيلٌ",
       10, 6, 37.5, true},
      // no Arabic at all
      {"hello 123", 0, 0, 0.0, false},
      // 4 + 5 letters, no marks
      {"سلام عليكم", 9, 0, 0.0, false},
      // b i s sukun m i: 3 letters, 3 marks
      {"بِسْمِ", 3, 3, 50.0, true},
      // q a l m: 3 letters, 1 mark, exactly on the 25% line
      {"قَلم", 3, 1, 25.0, true},
      // 4 + 5 letters, 1 damma
      {"يكتبُ الولد", 9, 1, 10.0, false},
      // tatweel is neither letter nor mark: 3 + 5 letters, 1 fatha
      {"شـَمـس ونـجوم", 8, 1,
       100.0 / 9.0, false},
  };
  return cases;
}

Manifest manifest_with_hours(const std::string& name, Source source, double hours,
                             std::size_t count, std::uint64_t seed, double conf_lo,
                             double conf_hi, const std::string& id_prefix) {
  std::mt19937_64 rng(seed);
  const long long total = std::llround(hours * 360000.0);
  const auto parts = partition_centiseconds(total, count, rng);
  Manifest m;
  m.name = name;
  const std::string prefix = (id_prefix.empty() ? name : id_prefix) + "-";
  for (std::size_t i = 0; i < count; ++i) {
    Utterance u;
    u.id = numbered(prefix, i);
    u.audio = "audio/" + u.id + ".wav";
    u.duration_sec = static_cast<double>(parts[i]) / 100.0;
    u.source = source;
    if (source != Source::OookUnlabeled)
      u.text = random_sentence(rng, 2, 8, plain_vocabulary());
    if (source == Source::SdnClean) u.speaker = "spk" + std::to_string(rng() % 40);
    if (conf_hi > conf_lo) {
      double c = conf_lo + (conf_hi - conf_lo) * uniform01(rng);
      if (c >= conf_hi) c = std::nextafter(conf_hi, conf_lo);
      u.confidence = c;
    }
    m.utterances.push_back(std::move(u));
  }
  return m;
}

Manifest concat(const std::string& name, const std::vector<Manifest>& parts) {
  Manifest m;
  m.name = name;
  for (const auto& p : parts)
    m.utterances.insert(m.utterances.end(), p.utterances.begin(), p.utterances.end());
  return m;
}

Manifest random_manifest(std::mt19937_64& rng, std::size_t count) {
  static const std::vector<std::string> texts = {
      "كتاب جديد", "with \"quotes\" and \\ backslash", "tab\there", "", "emoji 😀 mix عربي",
      "line sep", "كَتَبَ"};
  static const Source sources[] = {Source::SdnClean, Source::Msa, Source::Pseudo,
                                   Source::Tts, Source::OookUnlabeled, Source::Other};
  Manifest m;
  m.name = "random-" + std::to_string(rng() % 1000);
  for (std::size_t i = 0; i < count; ++i) {
    Utterance u;
    u.id = numbered("id/", i) + (rng() % 3 == 0 ? " ü" : "");
    u.audio = "clips/" + u.id + ".wav";
    switch (rng() % 4) {
      case 0: u.duration_sec = 0.0; break;
      case 1: u.duration_sec = 1e-7 * static_cast<double>(rng() % 1000); break;
      case 2: u.duration_sec = static_cast<double>(rng() % 100000) / 1000.0; break;
      default: u.duration_sec = uniform01(rng) * 30.0; break;
    }
    u.source = sources[rng() % 6];
    if (rng() % 2) u.text = texts[rng() % texts.size()];
    if (rng() % 2) u.speaker = "spk" + std::to_string(rng() % 9);
    if (u.source == Source::Pseudo || rng() % 3 == 0) u.confidence = uniform01(rng);
    if (rng() % 2) u.language = rng() % 2 ? "ar" : "ar-SD";
    if (rng() % 3 == 0) u.extra["snr_db"] = uniform01(rng) * 40.0 - 5.0;
    if (rng() % 4 == 0) u.extra["tags"] = Json::array({"noisy", "أ"});
    if (rng() % 5 == 0) u.extra["meta"] = Json{{"channel", static_cast<int>(rng() % 30)}, {"ok", true}};
    m.utterances.push_back(std::move(u));
  }
  if (rng() % 2) m.provenance.push_back({"density-filter", Json{{"threshold", 25.0}}});
  if (rng() % 2) m.provenance.push_back({"confidence-filter", Json{{"threshold", 0.7}, {"kept", 3}}});
  return m;
}

TrainingSetComponents training_set_components(std::uint64_t seed) {
  TrainingSetComponents c;
  c.sdn_clean = manifest_with_hours("sdn-clean", Source::SdnClean, 3.93, 3544, seed);
  c.pseudo_small = concat(
      "pseudo-small",
      {manifest_with_hours("pseudo-small", Source::Pseudo, 4.80, 1500, seed + 1, 0.9, 1.0, "ps-hi"),
       manifest_with_hours("pseudo-small", Source::Pseudo, 6.47, 2000, seed + 2, 0.7, 0.9, "ps-mid"),
       manifest_with_hours("pseudo-small", Source::Pseudo, 5.10, 1600, seed + 3, 0.0, 0.7, "ps-lo")});
  c.pseudo_medium = concat(
      "pseudo-medium",
      {manifest_with_hours("pseudo-medium", Source::Pseudo, 13.42, 4000, seed + 4, 0.9, 1.0, "pm-hi"),
       manifest_with_hours("pseudo-medium", Source::Pseudo, 6.41, 2000, seed + 5, 0.7, 0.9, "pm-mid"),
       manifest_with_hours("pseudo-medium", Source::Pseudo, 3.20, 1000, seed + 6, 0.0, 0.7, "pm-lo")});

  std::mt19937_64 rng(seed + 7);
  std::vector<Sentence> sentences;
  for (std::size_t i = 0; i < 1878; ++i)
    sentences.push_back({numbered("lisan-", i), random_sentence(rng, 3, 12, plain_vocabulary())});
  c.tts_jobs = prepare_tts_jobs(sentences, "sdn-female");
  const std::size_t failures = 12;
  const auto parts = partition_centiseconds(std::llround(4.61 * 360000.0),
                                            c.tts_jobs.size() - failures, rng);
  std::size_t next = 0;
  for (std::size_t i = 0; i < c.tts_jobs.size(); ++i) {
    protocol::TtsResponse r;
    r.id = c.tts_jobs[i].id;
    if (i % 150 == 7 && i / 150 < failures) {
      r.error = "synthesis failed";
    } else {
      r.out_audio = c.tts_jobs[i].out_audio;
      r.duration_sec = static_cast<double>(parts.at(next++)) / 100.0;
    }
    c.tts_responses.push_back(std::move(r));
  }
  if (next != parts.size()) throw std::logic_error("tts fixture miscounted failures");
  return c;
}

std::vector<TrainingSetRow> training_set_rows(const TrainingSetComponents& c) {
  const Manifest s07 = filter_by_confidence(c.pseudo_small, 0.7);
  const Manifest s09 = filter_by_confidence(c.pseudo_small, 0.9);
  const Manifest m07 = filter_by_confidence(c.pseudo_medium, 0.7);
  const Manifest m09 = filter_by_confidence(c.pseudo_medium, 0.9);
  const Manifest tts = assemble_tts_manifest(c.tts_jobs, c.tts_responses, "tts");
  const Manifest& sdn = c.sdn_clean;
  auto hours = [](const std::vector<Manifest>& parts) {
    return total_hours(parts.size() == 1 ? parts[0] : combine(parts, "row"));
  };
  return {
      {"SDN-clean", 3.93, hours({sdn})},
      {"W-Small SDN-clean+Pseudo(con=0.7)", 15.2, hours({sdn, s07})},
      {"W-Small SDN-clean+Pseudo(con=0.9)", 8.73, hours({sdn, s09})},
      {"W-Small Pseudo(con=0.7)", 11.27, hours({s07})},
      {"W-Small Pseudo(con=0.9)", 4.80, hours({s09})},
      {"W-Medium SDN-clean+Pseudo(con=0.7)", 23.76, hours({sdn, m07})},
      {"W-Medium SDN-clean+Pseudo(con=0.9)", 17.35, hours({sdn, m09})},
      {"W-Medium Pseudo(con=0.7)", 19.83, hours({m07})},
      {"W-Medium Pseudo(con=0.9)", 13.42, hours({m09})},
      {"SDN-clean+TTS", 8.54, hours({sdn, tts})},
      {"TTS", 4.61, hours({tts})},
      {"W-Small SDN-clean+Pseudo(con=0.7)+TTS", 19.81, hours({sdn, s07, tts})},
      {"W-Small SDN-clean+Pseudo(con=0.9)+TTS", 13.34, hours({sdn, s09, tts})},
      {"W-Small Pseudo(con=0.7)+TTS", 15.88, hours({s07, tts})},
      {"W-Small Pseudo(con=0.9)+TTS", 9.41, hours({s09, tts})},
      {"W-Medium SDN-clean+Pseudo(con=0.7)+TTS", 28.37, hours({sdn, m07, tts})},
      {"W-Medium SDN-clean+Pseudo(con=0.9)+TTS", 21.96, hours({sdn, m09, tts})},
      {"W-Medium Pseudo(con=0.7)+TTS", 24.44, hours({m07, tts})},
      {"W-Medium Pseudo(con=0.9)+TTS", 18.03, hours({m09, tts})},
  };
}

PlantedFaults planted_fault_fixture(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  static const char* latin[] = {"hello there my friend", "the weather is nice",
                                "thank you very much", "see you later", "good morning all"};
  PlantedFaults f;
  std::vector<ScoreInput> inputs;
  for (std::size_t i = 0; i < 100; ++i) {
    ScoreInput in;
    in.id = numbered("sample-", i);
    in.ref = random_sentence(rng, 6, 10, plain_vocabulary());
    in.hyp_language = "ar";
    if (i % 10 == 3) {
      in.hyp = latin[rng() % 5];
      in.hyp_language = "en";
      f.latin_ids.push_back(in.id);
    } else if (i % 20 == 11) {
      in.hyp = "كتاب قلم";
      for (int r = 0; r < 4; ++r) in.hyp += " سوق باب نور";
      f.loop_ids.push_back(in.id);
    } else {
      in.hyp = in.ref;
      if (rng() % 2) {
        // one in-place substitution keeps the length unchanged
        const std::size_t at = in.hyp.find("ب");
        if (at != std::string::npos) in.hyp.replace(at, 2, "ت");
      }
    }
    inputs.push_back(std::move(in));
  }
  f.eval = score_corpus_serial(inputs, NormalizationPolicy{});
  return f;
}

}  // namespace dforge::testing
