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

#include "dforge/protocol.hpp"

#include <cmath>

#include "dforge/error.hpp"

namespace dforge::protocol {

namespace {

Json parse_object(std::string_view line) {
  Json j;
  try {
    j = Json::parse(line);
  } catch (const Json::parse_error& e) {
    throw ProtocolError("malformed protocol line: " + std::string(e.what()));
  }
  if (!j.is_object()) throw ProtocolError("protocol line is not an object");
  return j;
}

std::string str(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string())
    throw ProtocolError(std::string("protocol record needs string '") + key + "'");
  return it->get<std::string>();
}

double num(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_number())
    throw ProtocolError(std::string("protocol record needs number '") + key + "'");
  const double v = it->get<double>();
  if (!std::isfinite(v)) throw ProtocolError(std::string("'") + key + "' is not finite");
  return v;
}

void expect_type(const Json& j, const char* type) {
  if (str(j, "type") != type)
    throw ProtocolError(std::string("expected a '") + type + "' request");
}

Json leftovers(const Json& j, std::initializer_list<const char*> known) {
  Json extra = Json::object();
  for (const auto& [k, v] : j.items()) {
    bool is_known = false;
    for (const char* key : known) is_known = is_known || k == key;
    if (!is_known) extra[k] = v;
  }
  return extra;
}

}  // namespace

std::string serialize(const AsrRequest& r) {
  return Json{{"type", "asr"}, {"id", r.id}, {"audio", r.audio}}.dump();
}

std::string serialize(const AsrResponse& r) {
  Json j{{"id", r.id}};
  if (r.error) {
    j["error"] = *r.error;
  } else {
    j["text"] = r.text.value_or("");
    j["confidence"] = r.confidence.value_or(0.0);
    j["language"] = r.language.value_or("");
  }
  for (const auto& [k, v] : r.extra.items()) j[k] = v;
  return j.dump();
}

std::string serialize(const TtsRequest& r) {
  return Json{{"type", "tts"},
              {"id", r.id},
              {"text", r.text},
              {"voice", r.voice},
              {"out_audio", r.out_audio}}
      .dump();
}

std::string serialize(const TtsResponse& r) {
  Json j{{"id", r.id}};
  if (r.error) {
    j["error"] = *r.error;
  } else {
    j["out_audio"] = r.out_audio.value_or("");
    j["duration_sec"] = r.duration_sec.value_or(0.0);
  }
  for (const auto& [k, v] : r.extra.items()) j[k] = v;
  return j.dump();
}

AsrRequest parse_asr_request(std::string_view line) {
  const Json j = parse_object(line);
  expect_type(j, "asr");
  return {str(j, "id"), str(j, "audio")};
}

AsrResponse parse_asr_response(std::string_view line) {
  const Json j = parse_object(line);
  AsrResponse r;
  r.id = str(j, "id");
  if (j.contains("error")) {
    r.error = str(j, "error");
    r.extra = leftovers(j, {"id", "error"});
    return r;
  }
  r.text = str(j, "text");
  r.confidence = num(j, "confidence");
  if (*r.confidence < 0.0 || *r.confidence > 1.0)
    throw ProtocolError("confidence for '" + r.id + "' outside [0,1]");
  r.language = str(j, "language");
  r.extra = leftovers(j, {"id", "text", "confidence", "language"});
  return r;
}

TtsRequest parse_tts_request(std::string_view line) {
  const Json j = parse_object(line);
  expect_type(j, "tts");
  return {str(j, "id"), str(j, "text"), str(j, "voice"), str(j, "out_audio")};
}

TtsResponse parse_tts_response(std::string_view line) {
  const Json j = parse_object(line);
  TtsResponse r;
  r.id = str(j, "id");
  if (j.contains("error")) {
    r.error = str(j, "error");
    r.extra = leftovers(j, {"id", "error"});
    return r;
  }
  r.out_audio = str(j, "out_audio");
  r.duration_sec = num(j, "duration_sec");
  if (!(*r.duration_sec > 0.0))
    throw ProtocolError("duration_sec for '" + r.id + "' must be > 0");
  r.extra = leftovers(j, {"id", "out_audio", "duration_sec"});
  return r;
}

bool is_end_record(std::string_view line) {
  try {
    const Json j = Json::parse(line);
    return j.is_object() && j.size() == 1 && j.contains("type") && j["type"] == "end";
  } catch (const Json::parse_error&) {
    return false;
  }
}

std::string response_id(std::string_view line) {
  return str(parse_object(line), "id");
}

std::string request_type(std::string_view line) {
  const Json j = parse_object(line);
  std::string type = str(j, "type");
  if (type != "asr" && type != "tts" && type != "end")
    throw ProtocolError("unknown request type '" + type + "'");
  return type;
}

}  // namespace dforge::protocol
