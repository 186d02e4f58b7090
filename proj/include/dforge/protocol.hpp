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

#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"

// Line-delimited records exchanged with an ASR/TTS backend over the child
// process's stdin/stdout. Field order on the wire is fixed.
namespace dforge::protocol {

using Json = nlohmann::ordered_json;

inline constexpr std::string_view kEndRecord = R"({"type":"end"})";

struct AsrRequest {
  std::string id;
  std::string audio;

  bool operator==(const AsrRequest&) const = default;
};

struct AsrResponse {
  std::string id;
  std::optional<std::string> text;
  std::optional<double> confidence;
  std::optional<std::string> language;
  std::optional<std::string> error;
  Json extra = Json::object();  // backend-specific keys, kept verbatim

  bool ok() const noexcept { return !error.has_value(); }
  bool operator==(const AsrResponse&) const = default;
};

struct TtsRequest {
  std::string id;
  std::string text;
  std::string voice;
  std::string out_audio;

  bool operator==(const TtsRequest&) const = default;
};

struct TtsResponse {
  std::string id;
  std::optional<std::string> out_audio;
  std::optional<double> duration_sec;
  std::optional<std::string> error;
  Json extra = Json::object();

  bool ok() const noexcept { return !error.has_value(); }
  bool operator==(const TtsResponse&) const = default;
};

std::string serialize(const AsrRequest& r);
std::string serialize(const AsrResponse& r);
std::string serialize(const TtsRequest& r);
std::string serialize(const TtsResponse& r);

// All parsers throw ProtocolError on malformed input.
AsrRequest parse_asr_request(std::string_view line);
AsrResponse parse_asr_response(std::string_view line);
TtsRequest parse_tts_request(std::string_view line);
TtsResponse parse_tts_response(std::string_view line);

bool is_end_record(std::string_view line);

// Returns the "id" of a response line without validating the rest.
std::string response_id(std::string_view line);

// "asr", "tts" or "end"; throws ProtocolError for anything else.
std::string request_type(std::string_view line);

}  // namespace dforge::protocol
