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


#include <gtest/gtest.h>

#include <random>

#include "dforge/error.hpp"
#include "dforge/protocol.hpp"

namespace dforge::protocol {
namespace {

TEST(Protocol, RequestsHaveFixedKeyOrder) {
  EXPECT_EQ(serialize(AsrRequest{"u1", "a/u1.wav"}),
            R"({"type":"asr","id":"u1","audio":"a/u1.wav"})");
  EXPECT_EQ(serialize(TtsRequest{"s1", "كتب", "v", "s1.wav"}),
            R"({"type":"tts","id":"s1","text":"كتب","voice":"v","out_audio":"s1.wav"})");
}

TEST(Protocol, AsrResponseParsing) {
  const auto ok = parse_asr_response(R"({"id":"u","text":"x","confidence":0.8,"language":"ar"})");
  EXPECT_TRUE(ok.ok());
  EXPECT_EQ(*ok.text, "x");
  EXPECT_DOUBLE_EQ(*ok.confidence, 0.8);
  const auto err = parse_asr_response(R"({"id":"u","error":"decode failed"})");
  EXPECT_FALSE(err.ok());
  EXPECT_EQ(*err.error, "decode failed");
  const auto extra = parse_asr_response(
      R"({"id":"u","text":"x","confidence":1,"language":"ar","model":"m","logprob":-3.5})");
  EXPECT_EQ(extra.extra.dump(), R"({"model":"m","logprob":-3.5})");
}

TEST(Protocol, AsrResponseRejectsBadRecords) {
  for (const char* bad : {
           R"({"text":"x","confidence":0.5,"language":"ar"})",
           R"({"id":"u","confidence":0.5,"language":"ar"})",
           R"({"id":"u","text":"x","confidence":1.5,"language":"ar"})",
           R"({"id":"u","text":"x","confidence":-0.1,"language":"ar"})",
           R"({"id":"u","text":"x","language":"ar"})",
           R"({"id":"u","text":"x","confidence":0.5})",
           R"({"id":7,"text":"x","confidence":0.5,"language":"ar"})",
           R"(["id"])",
           "not json",
       })
    EXPECT_THROW(parse_asr_response(bad), ProtocolError) << bad;
}

TEST(Protocol, TtsResponseRequiresPositiveDuration) {
  EXPECT_NO_THROW(parse_tts_response(R"({"id":"s","out_audio":"s.wav","duration_sec":1.5})"));
  EXPECT_THROW(parse_tts_response(R"({"id":"s","out_audio":"s.wav","duration_sec":0})"),
               ProtocolError);
  EXPECT_THROW(parse_tts_response(R"({"id":"s","duration_sec":2})"), ProtocolError);
  EXPECT_FALSE(parse_tts_response(R"({"id":"s","error":"no voice"})").ok());
}

TEST(Protocol, RandomResponsesRoundTrip) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 500; ++i) {
    AsrResponse r;
    r.id = "id-" + std::to_string(rng());
    if (rng() % 4 == 0) {
      r.error = "err \"" + std::to_string(i) + "\"";
    } else {
      r.text = i % 3 ? "كتب الولد" : "";
      r.confidence = static_cast<double>(rng() % 1001) / 1000.0;
      r.language = "ar";
    }
    if (rng() % 3 == 0) r.extra["k"] = static_cast<int>(i);
    const std::string line = serialize(r);
    EXPECT_EQ(parse_asr_response(line), r);
    EXPECT_EQ(serialize(parse_asr_response(line)), line);

    TtsResponse t;
    t.id = r.id;
    if (rng() % 4 == 0) {
      t.error = "bad";
    } else {
      t.out_audio = r.id + ".wav";
      t.duration_sec = 0.01 + static_cast<double>(rng() % 10000) / 100.0;
    }
    EXPECT_EQ(parse_tts_response(serialize(t)), t);
  }
}

TEST(Protocol, RequestsRoundTrip) {
  const AsrRequest a{"x y", "p/q.wav"};
  EXPECT_EQ(parse_asr_request(serialize(a)), a);
  const TtsRequest t{"s", "نص \"مقتبس\"", "voice", "o.wav"};
  EXPECT_EQ(parse_tts_request(serialize(t)), t);
  EXPECT_EQ(request_type(serialize(a)), "asr");
  EXPECT_EQ(request_type(serialize(t)), "tts");
}

TEST(Protocol, EndRecordAndIds) {
  EXPECT_TRUE(is_end_record(kEndRecord));
  EXPECT_TRUE(is_end_record(R"( {"type" : "end"} )"));
  EXPECT_FALSE(is_end_record(R"({"type":"asr","id":"end"})"));
  EXPECT_FALSE(is_end_record("garbage"));
  EXPECT_EQ(response_id(R"({"id":"abc","error":"x"})"), "abc");
  EXPECT_THROW(response_id(R"({"error":"x"})"), ProtocolError);
}

}  // namespace
}  // namespace dforge::protocol
