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

#include "dforge/artext.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>
#include <unordered_map>

#include "dforge/error.hpp"
#include "dforge/utf8.hpp"

namespace dforge {

namespace {

bool in(char32_t c, char32_t lo, char32_t hi) { return c >= lo && c <= hi; }

// Code points in U+06D6..U+06ED that are not combining marks.
bool quranic_non_mark(char32_t c) {
  return c == 0x06DD || c == 0x06DE || c == 0x06E5 || c == 0x06E6 ||
         c == 0x06E9;
}

char32_t unify_alef(char32_t c) {
  switch (c) {
    case 0x0622:  // alef with madda
    case 0x0623:  // alef with hamza above
    case 0x0625:  // alef with hamza below
    case 0x0671:  // alef wasla
      return 0x0627;
    default:
      return c;
  }
}

using Json = nlohmann::ordered_json;

template <class Fn>
void for_each_record(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (raw.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json j;
    try {
      j = Json::parse(raw);
    } catch (const Json::parse_error& e) {
      throw RecordError(path.string(), line, "<record>", e.what());
    }
    if (!j.is_object())
      throw RecordError(path.string(), line, "<record>", "expected an object");
    fn(j, line);
  }
}

std::string string_field(const Json& j, const char* key,
                         const std::filesystem::path& path, std::size_t line) {
  auto it = j.find(key);
  if (it == j.end()) throw RecordError(path.string(), line, key, "missing");
  if (!it->is_string())
    throw RecordError(path.string(), line, key, "expected a string");
  return it->get<std::string>();
}

}  // namespace

CharClass classify_char(char32_t c) noexcept {
  if (in(c, 0x0621, 0x063A) || in(c, 0x0641, 0x064A) || in(c, 0x0671, 0x06D3))
    return CharClass::ArabicLetter;
  if (in(c, 0x064B, 0x0655) || c == 0x0670 ||
      (in(c, 0x06D6, 0x06ED) && !quranic_non_mark(c)))
    return CharClass::Diacritic;
  return CharClass::Other;
}

bool is_tatweel(char32_t c) noexcept { return c == 0x0640; }

bool is_unicode_space(char32_t c) noexcept {
  return in(c, 0x0009, 0x000D) || c == 0x0020 || c == 0x0085 || c == 0x00A0 ||
         c == 0x1680 || in(c, 0x2000, 0x200A) || c == 0x2028 || c == 0x2029 ||
         c == 0x202F || c == 0x205F || c == 0x3000;
}

bool is_punctuation(char32_t c) noexcept {
  if (c < 0x80)
    return in(c, 0x21, 0x2F) || in(c, 0x3A, 0x40) || in(c, 0x5B, 0x60) ||
           in(c, 0x7B, 0x7E);
  switch (c) {
    case 0x00A1: case 0x00A7: case 0x00AB: case 0x00B6: case 0x00B7:
    case 0x00BB: case 0x00BF:
    case 0x060C: case 0x060D: case 0x061B: case 0x061E: case 0x061F:
    case 0x066A: case 0x066B: case 0x066C: case 0x066D: case 0x06D4:
    case 0xFD3E: case 0xFD3F:
      return true;
    default:
      break;
  }
  return in(c, 0x2010, 0x2027) || in(c, 0x2030, 0x205E) ||
         in(c, 0x3001, 0x3003) || in(c, 0x3008, 0x3011) ||
         in(c, 0xFE10, 0xFE19) || in(c, 0xFE30, 0xFE4F) ||
         in(c, 0xFF01, 0xFF0F) || in(c, 0xFF1A, 0xFF20);
}

DensityReport diacritic_density(std::string_view sentence) {
  DensityReport r;
  r.sentence = std::string(sentence);
  for (char32_t c : utf8::decode(sentence)) {
    switch (classify_char(c)) {
      case CharClass::Diacritic:
        ++r.diacritic_count;
        ++r.n;
        break;
      case CharClass::ArabicLetter:
        ++r.n;
        break;
      case CharClass::Other:
        break;
    }
  }
  r.degenerate = r.n == 0;
  r.density_percent =
      r.degenerate ? 0.0
                   : 100.0 * static_cast<double>(r.diacritic_count) /
                         static_cast<double>(r.n);
  return r;
}

std::vector<DensityReport> density_reports_serial(
    std::span<const std::string> sentences) {
  std::vector<DensityReport> out;
  out.reserve(sentences.size());
  for (const auto& s : sentences) out.push_back(diacritic_density(s));
  return out;
}

std::vector<DensityReport> density_reports_parallel(
    std::span<const std::string> sentences) {
  std::vector<DensityReport> out(sentences.size());
  const auto n = static_cast<long long>(sentences.size());
#pragma omp parallel for schedule(dynamic, 64)
  for (long long i = 0; i < n; ++i) out[i] = diacritic_density(sentences[i]);
  return out;
}

DensityFilterResult filter_by_density(std::span<const std::string> sentences,
                                      double threshold_percent) {
  if (!(threshold_percent >= 0.0 && threshold_percent <= 100.0))
    throw std::invalid_argument("density threshold must lie in [0,100]");
  DensityFilterResult result;
  result.reports = density_reports_parallel(sentences);
  for (auto& r : result.reports) {
    r.retained = !r.degenerate && r.density_percent >= threshold_percent;
    if (r.retained) result.retained.push_back(r.sentence);
  }
  return result;
}

std::vector<Sentence> reconstruct_sentences(std::span<const Token> tokens) {
  struct Group {
    std::string id;
    std::vector<const Token*> tokens;
  };
  std::vector<Group> groups;
  std::unordered_map<std::string, std::size_t> index;
  for (const auto& t : tokens) {
    auto [it, inserted] = index.emplace(t.sentence_id, groups.size());
    if (inserted) groups.push_back({t.sentence_id, {}});
    groups[it->second].tokens.push_back(&t);
  }

  std::vector<Sentence> out;
  out.reserve(groups.size());
  for (auto& g : groups) {
    std::sort(g.tokens.begin(), g.tokens.end(),
              [](const Token* a, const Token* b) { return a->position < b->position; });
    std::string text;
    for (std::size_t i = 0; i < g.tokens.size(); ++i) {
      if (i > 0) {
        if (g.tokens[i]->position == g.tokens[i - 1]->position)
          throw DataError("duplicate token position " +
                          std::to_string(g.tokens[i]->position) +
                          " in sentence '" + g.id + "'");
        text.push_back(' ');
      }
      text += g.tokens[i]->surface;
    }
    out.push_back({g.id, std::move(text)});
  }
  return out;
}

nlohmann::ordered_json to_json(const NormalizationPolicy& p) {
  return {{"strip_diacritics", p.strip_diacritics},
          {"remove_tatweel", p.remove_tatweel},
          {"collapse_whitespace", p.collapse_whitespace},
          {"unify_alef_variants", p.unify_alef_variants},
          {"strip_punctuation", p.strip_punctuation}};
}

NormalizationPolicy policy_from_json(const nlohmann::ordered_json& j) {
  NormalizationPolicy p;
  auto get = [&](const char* key, bool& field) {
    if (auto it = j.find(key); it != j.end()) {
      if (!it->is_boolean())
        throw DataError(std::string("policy field '") + key + "' must be boolean");
      field = it->get<bool>();
    }
  };
  get("strip_diacritics", p.strip_diacritics);
  get("remove_tatweel", p.remove_tatweel);
  get("collapse_whitespace", p.collapse_whitespace);
  get("unify_alef_variants", p.unify_alef_variants);
  get("strip_punctuation", p.strip_punctuation);
  return p;
}

NormalizationPolicy parse_policy(std::string_view flags) {
  NormalizationPolicy p;
  std::size_t start = 0;
  while (start <= flags.size()) {
    std::size_t end = flags.find(',', start);
    if (end == std::string_view::npos) end = flags.size();
    std::string_view item = flags.substr(start, end - start);
    start = end + 1;
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (item.empty()) {
      if (end == flags.size()) break;
      continue;
    }
    if (item == "default") {
      p = NormalizationPolicy{};
      continue;
    }
    if (item == "none") {
      p = NormalizationPolicy{false, false, false, false, false};
      continue;
    }
    bool value = true;
    if (item.front() == '+' || item.front() == '-') {
      value = item.front() == '+';
      item.remove_prefix(1);
    }
    if (item == "strip_diacritics") p.strip_diacritics = value;
    else if (item == "remove_tatweel") p.remove_tatweel = value;
    else if (item == "collapse_whitespace") p.collapse_whitespace = value;
    else if (item == "unify_alef_variants") p.unify_alef_variants = value;
    else if (item == "strip_punctuation") p.strip_punctuation = value;
    else throw std::invalid_argument("unknown policy flag '" + std::string(item) + "'");
  }
  return p;
}

std::string describe_policy(const NormalizationPolicy& p) {
  std::string out = "none";
  const auto flags = to_json(p);
  for (const auto& [name, value] : flags.items())
    if (value.get<bool>()) out += ",+" + name;
  return out;
}

std::string normalize(std::string_view text, const NormalizationPolicy& policy) {
  std::u32string cps = utf8::decode(text);

  if (policy.strip_punctuation)
    for (auto& c : cps)
      if (is_punctuation(c)) c = U' ';
  if (policy.strip_diacritics)
    std::erase_if(cps, [](char32_t c) { return classify_char(c) == CharClass::Diacritic; });
  if (policy.remove_tatweel) std::erase_if(cps, is_tatweel);
  if (policy.unify_alef_variants)
    for (auto& c : cps) c = unify_alef(c);

  std::u32string out;
  out.reserve(cps.size());
  if (policy.collapse_whitespace) {
    bool in_space = false;
    for (char32_t c : cps) {
      if (is_unicode_space(c)) {
        if (!in_space) out.push_back(U' ');
        in_space = true;
      } else {
        out.push_back(c);
        in_space = false;
      }
    }
  } else {
    out = std::move(cps);
  }

  std::size_t b = 0, e = out.size();
  while (b < e && is_unicode_space(out[b])) ++b;
  while (e > b && is_unicode_space(out[e - 1])) --e;
  return utf8::encode(std::u32string_view(out).substr(b, e - b));
}

std::vector<std::string> tokenize_words(std::string_view text) {
  std::vector<std::string> words;
  std::string current;
  for (char32_t c : utf8::decode(text)) {
    if (is_unicode_space(c)) {
      if (!current.empty()) words.push_back(std::move(current));
      current.clear();
    } else {
      utf8::append(current, c);
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

std::vector<Token> load_tokens(const std::filesystem::path& path) {
  std::vector<Token> tokens;
  for_each_record(path, [&](const Json& j, std::size_t line) {
    Token t;
    t.sentence_id = string_field(j, "sentence_id", path, line);
    auto it = j.find("position");
    if (it == j.end() || !it->is_number_integer())
      throw RecordError(path.string(), line, "position", "expected an integer");
    t.position = it->get<long long>();
    t.surface = string_field(j, "surface", path, line);
    tokens.push_back(std::move(t));
  });
  return tokens;
}

std::vector<Sentence> load_sentences(const std::filesystem::path& path) {
  std::vector<Sentence> out;
  for_each_record(path, [&](const Json& j, std::size_t line) {
    out.push_back({string_field(j, "sentence_id", path, line),
                   string_field(j, "text", path, line)});
  });
  return out;
}

void save_sentences(std::span<const Sentence> sentences,
                    const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& s : sentences)
    out << Json{{"sentence_id", s.sentence_id}, {"text", s.text}}.dump() << '\n';
  if (!out) throw DataError("I/O error writing " + path.string());
}

}  // namespace dforge
