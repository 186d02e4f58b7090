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

#include "dforge/analysis.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>

#include "dforge/error.hpp"
#include "dforge/utf8.hpp"

namespace dforge {

namespace {

using Json = nlohmann::ordered_json;

bool in(char32_t c, char32_t lo, char32_t hi) { return c >= lo && c <= hi; }

constexpr std::string_view kEps = "<eps>";

Json unit_json(const std::optional<char32_t>& c) {
  return c ? Json(utf8::encode(*c)) : Json(nullptr);
}

std::optional<char32_t> unit_from_json(const Json& j) {
  if (j.is_null()) return std::nullopt;
  const auto cps = utf8::decode(j.get<std::string>());
  if (cps.size() != 1) throw DataError("confusion unit must be one code point");
  return cps.front();
}

std::string csv_field(const std::optional<char32_t>& c) {
  if (!c) return std::string(kEps);
  std::string s = utf8::encode(*c);
  if (s == "," || s == "\"" || s == "\n" || s == "\r") return "\"" + (s == "\"" ? "\"\"" : s) + "\"";
  return s;
}

}  // namespace

bool is_arabic_script_letter(char32_t c) noexcept {
  if (classify_char(c) == CharClass::ArabicLetter) return true;
  return c == 0x0620 || in(c, 0x066E, 0x066F) || c == 0x06D5 || in(c, 0x06EE, 0x06EF) ||
         in(c, 0x06FA, 0x06FC) || c == 0x06FF || in(c, 0x0750, 0x077F) ||
         in(c, 0x08A0, 0x08C9) || in(c, 0xFB50, 0xFD3D) ||
         in(c, 0xFD50, 0xFDFB) || in(c, 0xFE70, 0xFEFC);
}

bool is_letter(char32_t c) noexcept {
  if (is_arabic_script_letter(c)) return true;
  if (in(c, U'A', U'Z') || in(c, U'a', U'z')) return true;
  if (c == 0x00AA || c == 0x00B5 || c == 0x00BA) return true;
  if (in(c, 0x00C0, 0x024F)) return c != 0x00D7 && c != 0x00F7;  // Latin-1/Extended
  return in(c, 0x0370, 0x03FF) ||   // Greek
         in(c, 0x0400, 0x052F) ||   // Cyrillic
         in(c, 0x05D0, 0x05EA) ||   // Hebrew
         in(c, 0x0904, 0x0939) ||   // Devanagari
         in(c, 0x1E00, 0x1EFF) ||   // Latin Extended Additional
         in(c, 0x3041, 0x30FF) ||   // kana
         in(c, 0x4E00, 0x9FFF) ||   // CJK
         in(c, 0xAC00, 0xD7A3);     // Hangul
}

bool is_arabic_language_tag(std::string_view tag) {
  std::string primary;
  for (char ch : tag) {
    if (ch == '-' || ch == '_') break;
    primary.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  }
  static const std::vector<std::string_view> arabic{
      "ar",  "ara", "arb", "arabic", "apd", "arz", "acm", "apc", "ary", "aeb",
      "afb", "ajp", "ayl", "acq",    "ars", "ayp", "abv", "ayh", "shu", "aao"};
  return std::find(arabic.begin(), arabic.end(), primary) != arabic.end();
}

std::optional<double> arabic_letter_fraction(std::string_view text) {
  std::size_t letters = 0, arabic = 0;
  for (char32_t c : utf8::decode(text)) {
    if (!is_letter(c)) continue;
    ++letters;
    if (is_arabic_script_letter(c)) ++arabic;
  }
  if (letters == 0) return std::nullopt;
  return static_cast<double>(arabic) / static_cast<double>(letters);
}

bool detect_language_failure(std::string_view hyp, const std::optional<std::string>& backend_language,
                             const HeuristicParams& params, const NormalizationPolicy& policy) {
  const std::string norm = normalize(hyp, policy);
  if (norm.empty()) return true;
  const auto fraction = arabic_letter_fraction(norm);
  if (!fraction || *fraction < params.script_fraction) return true;
  return backend_language && !is_arabic_language_tag(*backend_language);
}

bool has_repetition_loop(std::span<const std::string> tokens, std::size_t n, std::size_t repeats) {
  if (n == 0 || repeats < 2) return false;
  const std::size_t span_len = n * repeats;
  if (tokens.size() < span_len) return false;
  for (std::size_t i = 0; i + span_len <= tokens.size(); ++i) {
    bool loop = true;
    for (std::size_t r = 1; r < repeats && loop; ++r)
      for (std::size_t k = 0; k < n && loop; ++k)
        loop = tokens[i + r * n + k] == tokens[i + k];
    if (loop) return true;
  }
  return false;
}

bool detect_hallucination(std::string_view ref, std::string_view hyp, const HeuristicParams& params,
                          const NormalizationPolicy& policy) {
  const std::string ref_norm = normalize(ref, policy);
  const std::string hyp_norm = normalize(hyp, policy);
  const double ref_len = static_cast<double>(std::max<std::size_t>(1, utf8::decode(ref_norm).size()));
  const double hyp_len = static_cast<double>(utf8::decode(hyp_norm).size());
  if (hyp_len / ref_len > params.length_ratio) return true;
  const auto tokens = tokenize_words(hyp_norm);
  return has_repetition_loop(tokens, params.ngram, params.repeats);
}

std::vector<Confusion> char_confusions(std::span<const EditAlignment<char32_t>> alignments,
                                       std::size_t top_n) {
  std::map<std::pair<std::optional<char32_t>, std::optional<char32_t>>, std::size_t> counts;
  for (const auto& a : alignments)
    for (const auto& op : a.ops)
      if (op.kind != EditKind::Match) ++counts[{op.ref, op.hyp}];

  std::vector<Confusion> out;
  out.reserve(counts.size());
  for (const auto& [key, count] : counts) out.push_back({key.first, key.second, count});
  // counts is already in key order, so a stable sort by count keeps ties
  // in ascending code point order.
  std::stable_sort(out.begin(), out.end(),
                   [](const Confusion& a, const Confusion& b) { return a.count > b.count; });
  if (out.size() > top_n) out.resize(top_n);
  return out;
}

ErrorReport build_error_report(const EvalReport& eval,
                               const std::unordered_map<std::string, std::string>* backend_languages,
                               const HeuristicParams& params) {
  ErrorReport report;
  report.params = params;
  report.total = eval.per_utterance.size();
  std::vector<EditAlignment<char32_t>> alignments;
  alignments.reserve(eval.per_utterance.size());
  for (const auto& u : eval.per_utterance) {
    std::optional<std::string> language = u.hyp_language;
    if (backend_languages) {
      auto it = backend_languages->find(u.id);
      language = it == backend_languages->end() ? std::nullopt
                                                : std::optional<std::string>(it->second);
    }
    if (detect_language_failure(u.hyp, language, params, eval.policy))
      report.language_failures.push_back(u.id);
    if (detect_hallucination(u.ref, u.hyp, params, eval.policy)) report.hallucinations.push_back(u.id);
    alignments.push_back(u.char_alignment);
  }
  report.confusion_top = char_confusions(alignments, params.top_n);
  return report;
}

nlohmann::ordered_json to_json(const ErrorReport& r) {
  Json confusions = Json::array();
  for (const auto& c : r.confusion_top)
    confusions.push_back(Json{{"ref", unit_json(c.ref)}, {"hyp", unit_json(c.hyp)}, {"count", c.count}});
  return Json{{"total", r.total},
              {"language_failures", Json{{"count", r.language_failures.size()}, {"ids", r.language_failures}}},
              {"hallucinations", Json{{"count", r.hallucinations.size()}, {"ids", r.hallucinations}}},
              {"confusion_top", confusions},
              {"heuristic_params", Json{{"script_fraction", r.params.script_fraction},
                                        {"length_ratio", r.params.length_ratio},
                                        {"ngram", r.params.ngram},
                                        {"repeats", r.params.repeats},
                                        {"top_n", r.params.top_n}}}};
}

ErrorReport error_report_from_json(const nlohmann::ordered_json& j) {
  try {
    ErrorReport r;
    r.total = j.at("total").get<std::size_t>();
    r.language_failures = j.at("language_failures").at("ids").get<std::vector<std::string>>();
    r.hallucinations = j.at("hallucinations").at("ids").get<std::vector<std::string>>();
    for (const auto& c : j.at("confusion_top"))
      r.confusion_top.push_back(
          {unit_from_json(c.at("ref")), unit_from_json(c.at("hyp")), c.at("count").get<std::size_t>()});
    const auto& p = j.at("heuristic_params");
    r.params.script_fraction = p.at("script_fraction").get<double>();
    r.params.length_ratio = p.at("length_ratio").get<double>();
    r.params.ngram = p.at("ngram").get<std::size_t>();
    r.params.repeats = p.at("repeats").get<std::size_t>();
    r.params.top_n = p.at("top_n").get<std::size_t>();
    return r;
  } catch (const Json::exception& e) {
    throw DataError(std::string("malformed error report: ") + e.what());
  }
}

void save_error_report(const ErrorReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << to_json(report).dump(2) << '\n';
  if (!out) throw DataError("I/O error writing " + path.string());
}

ErrorReport load_error_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return error_report_from_json(Json::parse(in));
  } catch (const Json::parse_error& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void save_confusions_csv(const ErrorReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << "ref,hyp,count\n";
  for (const auto& c : report.confusion_top)
    out << csv_field(c.ref) << ',' << csv_field(c.hyp) << ',' << c.count << '\n';
  if (!out) throw DataError("I/O error writing " + path.string());
}

}  // namespace dforge
