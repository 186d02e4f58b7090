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

#include "dforge/artext.hpp"
#include "dforge/augment.hpp"
#include "dforge/corpus.hpp"
#include "support/fixtures.hpp"

namespace dforge {
namespace {

namespace fs = std::filesystem;
using testing::shell_quote;

class CliTest : public ::testing::Test {
 protected:
  testing::CommandResult dforge(const std::string& args) const {
    return testing::run_command("cd " + shell_quote(dir_.path().string()) + " && " +
                                shell_quote(testing::cli_path()) + " " + args + " 2>/dev/null");
  }
  std::string mock() const { return shell_quote(testing::mock_path()); }

  testing::TempDir dir_;
};

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(dforge("").exit_code, 2);
  EXPECT_EQ(dforge("--help").exit_code, 0);
  EXPECT_EQ(dforge("frobnicate").exit_code, 2);
  EXPECT_EQ(dforge("stats missing.jsonl").exit_code, 2);
  testing::write_file(dir_ / "bad.jsonl", "{\"id\":1}\n");
  EXPECT_EQ(dforge("stats bad.jsonl").exit_code, 1);
}

TEST_F(CliTest, StatsReportsHours) {
  save_manifest(testing::manifest_with_hours("sdn", Source::SdnClean, 3.93, 100, 1), dir_ / "sdn.jsonl");
  const auto r = dforge("stats sdn.jsonl");
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_NE(r.out.find("utterances: 100\n"), std::string::npos);
  EXPECT_NE(r.out.find("hours: 3.93\n"), std::string::npos);
}

TEST_F(CliTest, ValidateExitsNonZeroOnViolations) {
  Manifest m = testing::manifest_with_hours("p", Source::Pseudo, 0.01, 3, 1, 0.5, 1.0);
  m.utterances[1].confidence.reset();
  save_manifest(m, dir_ / "p.jsonl");
  const auto r = dforge("validate p.jsonl --audio-root .");
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.out.find(m.utterances[1].id), std::string::npos);
}

TEST_F(CliTest, ConfidenceFilterWritesSubset) {
  const Manifest m = testing::manifest_with_hours("p", Source::Pseudo, 1.0, 200, 5, 0.0, 1.0);
  save_manifest(m, dir_ / "p.jsonl");
  ASSERT_EQ(dforge("confidence-filter p.jsonl p07.jsonl --threshold 0.7").exit_code, 0);
  const Manifest out = load_manifest(dir_ / "p07.jsonl");
  EXPECT_EQ(out.name, "p07");
  EXPECT_EQ(out.utterances, filter_by_confidence(m, 0.7).utterances);
  EXPECT_EQ(dforge("confidence-filter p.jsonl x.jsonl --threshold 1.5").exit_code, 2);
}

TEST_F(CliTest, PseudoLabelAndEvaluate) {
  Manifest oracle = testing::manifest_with_hours("oracle", Source::SdnClean, 0.05, 12, 2);
  std::mt19937_64 rng(4);
  for (auto& u : oracle.utterances)
    u.text = testing::random_sentence(rng, 3, 7, testing::pool_vocabulary());
  Manifest audio = oracle;
  for (auto& u : audio.utterances) {
    u.text.reset();
    u.speaker.reset();
    u.source = Source::OookUnlabeled;
  }
  save_manifest(oracle, dir_ / "oracle.jsonl");
  save_manifest(audio, dir_ / "audio.jsonl");
  const std::string backend = mock() + " --task asr --oracle oracle.jsonl --noise-rate 0.5 --seed 3";
  ASSERT_EQ(dforge("pseudo-label audio.jsonl pseudo.jsonl --parallelism 3 --backend " +
                   shell_quote(backend))
                .exit_code,
            0);
  const Manifest pseudo = load_manifest(dir_ / "pseudo.jsonl");
  EXPECT_EQ(pseudo.utterances.size(), 12u);
  for (const auto& u : pseudo.utterances) EXPECT_EQ(u.source, Source::Pseudo);

  const auto ev = dforge("evaluate oracle.jsonl pseudo.jsonl --out eval.jsonl");
  ASSERT_EQ(ev.exit_code, 0);
  EXPECT_EQ(ev.out.rfind("WER ", 0), 0u);
  EXPECT_TRUE(std::filesystem::exists(dir_ / "eval.jsonl.summary.csv"));
  const auto an = dforge("analyze-errors eval.jsonl");
  ASSERT_EQ(an.exit_code, 0);
  EXPECT_NE(an.out.find("\"confusion_top\""), std::string::npos);
}

TEST_F(CliTest, PseudoLabelKeepsPartialOutputWhenBackendDies) {
  Manifest audio = testing::manifest_with_hours("a", Source::OookUnlabeled, 0.05, 6, 2);
  Manifest oracle = audio;
  for (auto& u : oracle.utterances) u.text = "كتاب قلم";
  save_manifest(oracle, dir_ / "oracle.jsonl");
  save_manifest(audio, dir_ / "audio.jsonl");
  const std::string backend = mock() + " --task asr --oracle oracle.jsonl --crash-after 4";
  EXPECT_EQ(dforge("pseudo-label audio.jsonl pseudo.jsonl --parallelism 1 --backend " +
                   shell_quote(backend))
                .exit_code,
            1);
  EXPECT_EQ(load_manifest(dir_ / "pseudo.jsonl").utterances.size(), 4u);
}

TEST_F(CliTest, RecipeValidation) {
  testing::write_file(dir_ / "t.jsonl", "");
  const auto ok = dforge("emit-recipe t.jsonl t.jsonl --base-model openai/whisper-medium");
  ASSERT_EQ(ok.exit_code, 0);
  EXPECT_NE(ok.out.find("steps=5000\n"), std::string::npos);
  EXPECT_EQ(dforge("emit-recipe t.jsonl t.jsonl --base-model m --steps 100 --warmup-steps 500").exit_code, 1);
}

TEST_F(CliTest, RecipeScriptsRunAgainstMocks) {
  const fs::path data = dir_ / "data";
  fs::create_directories(data);
  std::mt19937_64 rng(12);
  Manifest oracle = testing::manifest_with_hours("oook", Source::SdnClean, 0.2, 80, 12);
  for (auto& u : oracle.utterances) u.text = testing::random_sentence(rng, 3, 8, testing::pool_vocabulary());
  Manifest sdn = oracle;
  sdn.utterances.resize(30);
  sdn.name = "sdn-clean";
  save_manifest(sdn, data / "sdn-clean.jsonl");
  Manifest eval = oracle;
  eval.utterances.erase(eval.utterances.begin(), eval.utterances.begin() + 60);
  eval.name = "oook-eval";
  save_manifest(eval, data / "oook-eval.jsonl");
  auto strip = [](Manifest m) {
    for (auto& u : m.utterances) {
      u.text.reset();
      u.speaker.reset();
      u.source = Source::OookUnlabeled;
    }
    return m;
  };
  save_manifest(strip(eval), data / "oook-eval-audio.jsonl");
  Manifest unlabeled = strip(oracle);
  unlabeled.utterances.resize(60);
  save_manifest(unlabeled, data / "oook-unlabeled.jsonl");
  save_manifest(oracle, dir_ / "oracle.jsonl");
  std::string tokens;
  for (int s = 0; s < 20; ++s) {
    const auto words = tokenize_words(testing::density_fixture()[s % 10].sentence);
    for (std::size_t p = 0; p < words.size(); ++p)
      tokens += Json{{"sentence_id", "l" + std::to_string(s)}, {"position", p}, {"surface", words[p]}}.dump() + "\n";
  }
  testing::write_file(data / "lisan-tokens.jsonl", tokens);

  const std::string teacher = mock() + " --task asr --oracle " + shell_quote((dir_ / "oracle.jsonl").string());
  const std::string env = "DFORGE=" + shell_quote(testing::cli_path()) +
                          " TEACHER_SMALL=" + shell_quote(teacher + " --noise-rate 0.3") +
                          " EVAL_BACKEND=" + shell_quote(teacher + " --noise-rate 0.5") +
                          " TTS_BACKEND=" + shell_quote(mock() + " --task tts");
  const fs::path scripts = fs::path(DFORGE_SOURCE_DIR) / "scripts" / "recipes";
  for (const char* row : {"teacher_w-small_sdn-clean", "combined_w-small_sdn-clean+pseudo-0.7+tts",
                          "zero-shot_openai-w-small"}) {
    const auto r = testing::run_command("cd " + shell_quote(dir_.path().string()) + " && " + env +
                                        " bash " + shell_quote((scripts / (std::string(row) + ".sh")).string()) +
                                        " >/dev/null 2>&1");
    EXPECT_EQ(r.exit_code, 0) << row;
  }
  const Manifest combined = load_manifest(dir_ / "runs" / "combined_w-small_sdn-clean+pseudo-0.7+tts" / "train.jsonl");
  std::size_t pseudo = 0, tts = 0, clean = 0;
  for (const auto& u : combined.utterances) {
    pseudo += u.source == Source::Pseudo;
    tts += u.source == Source::Tts;
    clean += u.source == Source::SdnClean;
  }
  EXPECT_EQ(clean, 30u);
  EXPECT_GT(pseudo, 0u);
  EXPECT_EQ(tts, 4u * 2);
  const auto recipe = parse_recipe(testing::read_file(dir_ / "runs" / "teacher_w-small_sdn-clean" / "recipe.txt"));
  EXPECT_EQ(recipe.base_model, "openai/whisper-small");
  EXPECT_TRUE(fs::exists(dir_ / "runs" / "zero-shot_openai-w-small" / "eval.jsonl.summary.csv"));
}

}  // namespace
}  // namespace dforge
