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

#include "dforge/metrics.hpp"

#include <cstdio>
#include <fstream>
#include <unordered_set>

#include "dforge/error.hpp"
#include "dforge/utf8.hpp"

namespace dforge {

namespace {

using Json = nlohmann::ordered_json;

double percent(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : 100.0 * static_cast<double>(num) / static_cast<double>(den);
}

void check_unique_ids(std::span<const ScoreInput> pairs) {
  std::unordered_set<std::string> ids;
  for (const auto& p : pairs)
    if (!ids.insert(p.id).second)
      throw DataError("score_corpus: duplicate utterance id '" + p.id + "'");
}

EvalReport aggregate(std::vector<UtteranceScore> records,
                     const NormalizationPolicy& policy) {
  EvalReport report;
  report.policy = policy;
  for (const auto& r : records) {
    if (r.excluded) {
      ++report.excluded_count;
      continue;
    }
    report.total_word_edits += r.word_edits;
    report.total_ref_words += r.ref_word_count;
    report.total_char_edits += r.char_edits;
    report.total_ref_chars += r.ref_char_count;
  }
  if (report.total_ref_words == 0)
    throw DataError("score_corpus: every reference is empty after normalization");
  report.corpus_wer_percent = percent(report.total_word_edits, report.total_ref_words);
  report.corpus_cer_percent = percent(report.total_char_edits, report.total_ref_chars);
  report.per_utterance = std::move(records);
  return report;
}

std::string unit_string(const std::string& s) { return s; }
std::string unit_string(char32_t c) { return utf8::encode(c); }

template <class T>
Json alignment_to_json(const EditAlignment<T>& a) {
  Json ops = Json::array();
  for (const auto& op : a.ops) {
    Json entry = Json::array();
    entry.push_back(std::string(1, edit_kind_code(op.kind)));
    entry.push_back(op.ref ? Json(unit_string(*op.ref)) : Json(nullptr));
    entry.push_back(op.hyp ? Json(unit_string(*op.hyp)) : Json(nullptr));
    ops.push_back(std::move(entry));
  }
  return ops;
}

EditKind kind_from_code(const std::string& code) {
  if (code == "M") return EditKind::Match;
  if (code == "S") return EditKind::Substitute;
  if (code == "I") return EditKind::Insert;
  if (code == "D") return EditKind::Delete;
  throw DataError("unknown alignment op '" + code + "'");
}

template <class T, class Conv>
EditAlignment<T> alignment_from_json(const Json& j, Conv&& conv) {
  EditAlignment<T> a;
  for (const auto& e : j) {
    EditOp<T> op{kind_from_code(e.at(0).get<std::string>()), std::nullopt, std::nullopt};
    if (!e.at(1).is_null()) op.ref = conv(e.at(1).get<std::string>());
    if (!e.at(2).is_null()) op.hyp = conv(e.at(2).get<std::string>());
    a.ops.push_back(std::move(op));
  }
  return a;
}

char32_t single_code_point(const std::string& s) {
  auto cps = utf8::decode(s);
  if (cps.size() != 1) throw DataError("character alignment unit '" + s + "' is not one code point");
  return cps.front();
}

}  // namespace

char edit_kind_code(EditKind kind) noexcept {
  switch (kind) {
    case EditKind::Match: return 'M';
    case EditKind::Substitute: return 'S';
    case EditKind::Insert: return 'I';
    case EditKind::Delete: return 'D';
  }
  return '?';
}

double UtteranceScore::wer_percent() const { return percent(word_edits, ref_word_count); }
double UtteranceScore::cer_percent() const { return percent(char_edits, ref_char_count); }

std::u32string cer_units(std::string_view normalized) {
  std::u32string out;
  for (const auto& w : tokenize_words(normalized)) {
    if (!out.empty()) out.push_back(U' ');
    out += utf8::decode(w);
  }
  return out;
}

UtteranceScore score_input(const ScoreInput& input, const NormalizationPolicy& policy) {
  UtteranceScore s;
  s.id = input.id;
  s.ref = input.ref;
  s.hyp = input.hyp;
  s.hyp_language = input.hyp_language;
  s.missing_hyp = input.missing_hyp;
  s.ref_norm = normalize(input.ref, policy);
  s.hyp_norm = normalize(input.hyp, policy);

  const auto ref_words = tokenize_words(s.ref_norm);
  const auto hyp_words = tokenize_words(s.hyp_norm);
  auto words = edit_distance<std::string>(ref_words, hyp_words);
  s.word_edits = words.distance;
  s.ref_word_count = ref_words.size();
  s.word_alignment = std::move(words.alignment);

  const auto ref_chars = cer_units(s.ref_norm);
  const auto hyp_chars = cer_units(s.hyp_norm);
  auto chars = edit_distance<char32_t>(ref_chars, hyp_chars);
  s.char_edits = chars.distance;
  s.ref_char_count = ref_chars.size();
  s.char_alignment = std::move(chars.alignment);

  s.excluded = ref_words.empty();
  return s;
}

UtteranceScore score_pair(std::string_view ref, std::string_view hyp,
                          const NormalizationPolicy& policy) {
  return score_input({"", std::string(ref), std::string(hyp), std::nullopt, false}, policy);
}

EvalReport score_corpus_serial(std::span<const ScoreInput> pairs,
                               const NormalizationPolicy& policy) {
  check_unique_ids(pairs);
  std::vector<UtteranceScore> records;
  records.reserve(pairs.size());
  for (const auto& p : pairs) records.push_back(score_input(p, policy));
  return aggregate(std::move(records), policy);
}

EvalReport score_corpus(std::span<const ScoreInput> pairs,
                        const NormalizationPolicy& policy) {
  check_unique_ids(pairs);
  std::vector<UtteranceScore> records(pairs.size());
  const auto n = static_cast<long long>(pairs.size());
#pragma omp parallel for schedule(dynamic, 32)
  for (long long i = 0; i < n; ++i) records[i] = score_input(pairs[i], policy);
  return aggregate(std::move(records), policy);
}

void save_eval_report(const EvalReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write report " + path.string());

  Json summary;
  summary["type"] = "summary";
  summary["policy"] = to_json(report.policy);
  summary["utterances"] = report.per_utterance.size();
  summary["excluded_utterances"] = report.excluded_count;
  summary["word_edits"] = report.total_word_edits;
  summary["ref_words"] = report.total_ref_words;
  summary["char_edits"] = report.total_char_edits;
  summary["ref_chars"] = report.total_ref_chars;
  summary["corpus_wer_percent"] = report.corpus_wer_percent;
  summary["corpus_cer_percent"] = report.corpus_cer_percent;
  out << summary.dump() << '\n';

  for (const auto& r : report.per_utterance) {
    Json j;
    j["type"] = "utterance";
    j["id"] = r.id;
    j["ref"] = r.ref;
    j["hyp"] = r.hyp;
    j["ref_norm"] = r.ref_norm;
    j["hyp_norm"] = r.hyp_norm;
    if (r.hyp_language) j["hyp_language"] = *r.hyp_language;
    if (r.missing_hyp) j["missing_hyp"] = true;
    j["excluded"] = r.excluded;
    j["word_edits"] = r.word_edits;
    j["ref_word_count"] = r.ref_word_count;
    j["char_edits"] = r.char_edits;
    j["ref_char_count"] = r.ref_char_count;
    j["word_alignment"] = alignment_to_json(r.word_alignment);
    j["char_alignment"] = alignment_to_json(r.char_alignment);
    out << j.dump() << '\n';
  }
  if (!out) throw DataError("I/O error writing " + path.string());
}

EvalReport load_eval_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open report " + path.string());
  EvalReport report;
  bool have_summary = false;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (raw.empty()) continue;
    try {
      const Json j = Json::parse(raw);
      const auto type = j.at("type").get<std::string>();
      if (type == "summary") {
        report.policy = policy_from_json(j.at("policy"));
        report.excluded_count = j.at("excluded_utterances").get<std::size_t>();
        report.total_word_edits = j.at("word_edits").get<std::size_t>();
        report.total_ref_words = j.at("ref_words").get<std::size_t>();
        report.total_char_edits = j.at("char_edits").get<std::size_t>();
        report.total_ref_chars = j.at("ref_chars").get<std::size_t>();
        report.corpus_wer_percent = j.at("corpus_wer_percent").get<double>();
        report.corpus_cer_percent = j.at("corpus_cer_percent").get<double>();
        have_summary = true;
      } else if (type == "utterance") {
        UtteranceScore r;
        r.id = j.at("id").get<std::string>();
        r.ref = j.at("ref").get<std::string>();
        r.hyp = j.at("hyp").get<std::string>();
        r.ref_norm = j.at("ref_norm").get<std::string>();
        r.hyp_norm = j.at("hyp_norm").get<std::string>();
        if (j.contains("hyp_language")) r.hyp_language = j["hyp_language"].get<std::string>();
        r.missing_hyp = j.value("missing_hyp", false);
        r.excluded = j.at("excluded").get<bool>();
        r.word_edits = j.at("word_edits").get<std::size_t>();
        r.ref_word_count = j.at("ref_word_count").get<std::size_t>();
        r.char_edits = j.at("char_edits").get<std::size_t>();
        r.ref_char_count = j.at("ref_char_count").get<std::size_t>();
        r.word_alignment = alignment_from_json<std::string>(
            j.at("word_alignment"), [](const std::string& s) { return s; });
        r.char_alignment = alignment_from_json<char32_t>(j.at("char_alignment"), single_code_point);
        report.per_utterance.push_back(std::move(r));
      } else {
        throw DataError("unknown record type '" + type + "'");
      }
    } catch (const Json::exception& e) {
      throw RecordError(path.string(), line, "<record>", e.what());
    } catch (const RecordError&) {
      throw;
    } catch (const DataError& e) {
      throw RecordError(path.string(), line, "<record>", e.what());
    }
  }
  if (!have_summary) throw DataError("report " + path.string() + " has no summary record");
  return report;
}

void save_summary_csv(const EvalReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  char wer[64], cer[64];
  std::snprintf(wer, sizeof wer, "%.4f", report.corpus_wer_percent);
  std::snprintf(cer, sizeof cer, "%.4f", report.corpus_cer_percent);
  out << "metric,value\n"
      << "utterances," << report.per_utterance.size() << '\n'
      << "excluded_utterances," << report.excluded_count << '\n'
      << "word_edits," << report.total_word_edits << '\n'
      << "ref_words," << report.total_ref_words << '\n'
      << "char_edits," << report.total_char_edits << '\n'
      << "ref_chars," << report.total_ref_chars << '\n'
      << "wer_percent," << wer << '\n'
      << "cer_percent," << cer << '\n';
  if (!out) throw DataError("I/O error writing " + path.string());
}

}  // namespace dforge
