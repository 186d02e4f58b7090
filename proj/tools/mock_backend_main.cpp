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

// Deterministic ASR/TTS backend speaking the dforge wire protocol on
// stdin/stdout. Used by tests and the example pipelines; the fault flags
// exist to exercise the client's error handling.

#include <unistd.h>

#include <iostream>
#include <memory>
#include <unordered_map>

#include "CLI11.hpp"
#include "dforge/corpus.hpp"
#include "dforge/error.hpp"
#include "dforge/mock_backend.hpp"

int main(int argc, char** argv) {
  CLI::App app{"dforge mock backend"};
  std::string task = "both";
  std::uint64_t seed = 0;
  double noise_rate = 0.0;
  std::string oracle_path;
  std::string language = "ar";
  double seconds_per_clip = 0.0;
  bool no_audio = false;
  std::size_t crash_after = 0;
  dforge::mock::ServeOptions serve;
  std::vector<std::string> hang, fail;

  app.add_option("--task", task, "asr, tts or both")->check(CLI::IsMember({"asr", "tts", "both"}));
  app.add_option("--seed", seed, "RNG seed");
  app.add_option("--noise-rate", noise_rate, "per-word corruption probability")
      ->check(CLI::Range(0.0, 1.0));
  app.add_option("--oracle", oracle_path, "manifest whose text fields are the true transcripts");
  app.add_option("--language", language, "language tag reported with ASR responses");
  app.add_option("--seconds-per-clip", seconds_per_clip, "fixed TTS clip length");
  app.add_flag("--no-audio", no_audio, "do not write WAV files for TTS requests");
  app.add_option("--crash-after", crash_after, "exit with status 3 after N responses");
  app.add_flag("--duplicate-first", serve.duplicate_first, "send the first response twice");
  app.add_option("--hang-on", hang, "never answer this id");
  app.add_option("--fail-id", fail, "answer this id with an error");
  app.add_option("--jitter-ms", serve.jitter_ms, "buffer and reorder responses");
  CLI11_PARSE(app, argc, argv);

  serve.seed = seed;
  if (crash_after > 0) serve.crash_after = crash_after;
  serve.hang_ids.insert(hang.begin(), hang.end());
  serve.fail_ids.insert(fail.begin(), fail.end());

  try {
    std::unique_ptr<dforge::mock::MockAsr> asr;
    std::unique_ptr<dforge::mock::MockTts> tts;
    if (task != "tts") {
      std::unordered_map<std::string, std::string> oracle;
      if (!oracle_path.empty()) {
        for (const auto& u : dforge::load_manifest(oracle_path).utterances)
          if (u.text) oracle.emplace(u.id, *u.text);
      }
      asr = std::make_unique<dforge::mock::MockAsr>(
          dforge::mock::AsrOptions{seed, noise_rate, language}, std::move(oracle));
    }
    if (task != "asr") {
      dforge::mock::TtsOptions opts;
      if (seconds_per_clip > 0.0) opts.seconds_per_clip = seconds_per_clip;
      opts.write_audio = !no_audio;
      tts = std::make_unique<dforge::mock::MockTts>(opts);
    }
    return dforge::mock::serve(STDIN_FILENO, STDOUT_FILENO, serve, asr.get(), tts.get());
  } catch (const std::exception& e) {
    std::cerr << "dforge-mock-backend: " << e.what() << '\n';
    return 1;
  }
}
