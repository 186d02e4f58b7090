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

// dforge: pipeline stages for low-resource dialect ASR corpora, one
// subcommand per stage. Exit codes: 0 ok, 1 data error, 2 usage error.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <unordered_set>

#include <spdlog/sinks/basic_file_sink.h>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "dforge/analysis.hpp"
#include "dforge/artext.hpp"
#include "dforge/augment.hpp"
#include "dforge/backend.hpp"
#include "dforge/corpus.hpp"
#include "dforge/error.hpp"
#include "dforge/metrics.hpp"

#include <omp.h>

namespace fs = std::filesystem;
using namespace dforge;

namespace {

std::string stem_of(const std::string& path) { return fs::path(path).stem().string(); }

void setup_logging(const std::string& log_file) {
  std::shared_ptr<spdlog::logger> logger;
  if (log_file.empty())
    logger = spdlog::stderr_logger_st("dforge");
  else
    logger = spdlog::basic_logger_st("dforge", log_file, true);
  logger->set_pattern("[dforge] [%l] %v");
  const char* env = std::getenv("DIALECT_FORGE_LOG");
  logger->set_level(env ? spdlog::level::from_str(env) : spdlog::level::info);
  spdlog::set_default_logger(logger);
}

// ---------------------------------------------------------------- options

struct StatsArgs { std::string manifest; };
struct ValidateArgs { std::string manifest; std::string audio_root = "."; };
struct CombineArgs { std::string out; std::vector<std::string> inputs; };
struct DensityArgs { std::string in, out, reports; double threshold = 25.0; };
struct ReconstructArgs { std::string tokens, out; };
struct PseudoArgs {
  std::string unlabeled, out, backend, teacher_id, exclude;
  std::size_t parallelism = 4;
  double timeout_sec = 300.0;
};
struct ConfidenceArgs { std::string in, out; double threshold = 0.7; };
struct TtsPrepareArgs { std::string sentences, jobs, voice = "default"; };
struct TtsSynthArgs {
  std::string jobs, responses, backend;
  std::size_t parallelism = 4;
  double timeout_sec = 300.0;
};
struct TtsAssembleArgs { std::string jobs, responses, out; };
struct EvaluateArgs {
  std::string refs, hyps, policy = "default", out;
  int threads = 1;
};
struct AnalyzeArgs {
  std::string report, hyps, out;
  std::size_t top_n = 20, ngram = 3, repeats = 3;
  double ratio = 2.0, script_frac = 0.5;
};
struct RecipeArgs {
  std::string train, eval, base_model, out;
  std::optional<long long> steps, warmup_steps, train_batch_size, eval_batch_size;
  std::optional<double> learning_rate;
};

BackendOptions backend_options(const std::string& command, std::size_t parallelism, double timeout_sec) {
  BackendOptions o;
  o.command = command;
  o.parallelism = parallelism;
  o.timeout = std::chrono::milliseconds(static_cast<long long>(timeout_sec * 1000.0));
  return o;
}

// ---------------------------------------------------------------- stages

int run_stats(const StatsArgs& a) {
  const Manifest m = load_manifest(a.manifest);
  const DatasetStats s = compute_stats(m);
  char seconds[64];
  std::snprintf(seconds, sizeof seconds, "%.3f", s.total_seconds);
  std::cout << "name: " << m.name << '\n'
            << "utterances: " << s.utterance_count << '\n'
            << "hours: " << format_hours(s.total_hours) << '\n'
            << "seconds: " << seconds << '\n'
            << "distinct_speakers: " << s.distinct_speakers << '\n'
            << "labeled: " << s.labeled_count << '\n'
            << "confidence_histogram:";
  for (auto c : s.confidence_histogram) std::cout << ' ' << c;
  std::cout << '\n';
  return 0;
}

int run_validate(const ValidateArgs& a) {
  const auto violations = validate(load_manifest(a.manifest), a.audio_root);
  for (const auto& v : violations)
    std::cout << v.id << '\t' << to_string(v.kind) << '\t' << v.message << '\n';
  std::cout << violations.size() << " violation(s)\n";
  return violations.empty() ? 0 : 1;
}

int run_combine(const CombineArgs& a) {
  std::vector<Manifest> parts;
  for (const auto& p : a.inputs) parts.push_back(load_manifest(p));
  const Manifest out = combine(parts, stem_of(a.out));
  save_manifest(out, a.out);
  spdlog::info("combined {} part(s): {} utterances, {} h", parts.size(), out.utterances.size(),
               format_hours(total_hours(out)));
  return 0;
}

int run_density(const DensityArgs& a) {
  const auto sentences = load_sentences(a.in);
  std::vector<std::string> texts;
  texts.reserve(sentences.size());
  for (const auto& s : sentences) texts.push_back(s.text);
  const auto result = filter_by_density(texts, a.threshold);

  std::vector<Sentence> kept;
  for (std::size_t i = 0; i < sentences.size(); ++i)
    if (result.reports[i].retained) kept.push_back(sentences[i]);
  save_sentences(kept, a.out);

  if (!a.reports.empty()) {
    std::ofstream out(a.reports, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + a.reports);
    for (std::size_t i = 0; i < sentences.size(); ++i) {
      const auto& r = result.reports[i];
      out << Json{{"sentence_id", sentences[i].sentence_id},
                  {"n", r.n},
                  {"diacritic_count", r.diacritic_count},
                  {"density_percent", r.density_percent},
                  {"degenerate", r.degenerate},
                  {"retained", r.retained}}
                 .dump()
          << '\n';
    }
  }
  spdlog::info("kept {} of {} sentence(s) at >= {}% diacritics", kept.size(), sentences.size(),
               a.threshold);
  return 0;
}

int run_reconstruct(const ReconstructArgs& a) {
  const auto tokens = load_tokens(a.tokens);
  const auto sentences = reconstruct_sentences(tokens);
  save_sentences(sentences, a.out);
  spdlog::info("rebuilt {} sentence(s) from {} token(s)", sentences.size(), tokens.size());
  return 0;
}

int run_pseudo(const PseudoArgs& a) {
  Manifest unlabeled = load_manifest(a.unlabeled);
  if (!a.exclude.empty()) {
    std::unordered_set<std::string> ids;
    for (const auto& u : load_manifest(a.exclude).utterances) ids.insert(u.id);
    unlabeled = exclude_ids(unlabeled, ids);
  }
  std::vector<AsrRequest> requests;
  requests.reserve(unlabeled.utterances.size());
  for (const auto& u : unlabeled.utterances) requests.push_back({u.id, u.audio});

  const auto run = run_asr(backend_options(a.backend, a.parallelism, a.timeout_sec), requests);
  std::size_t failures = 0;
  const std::string teacher = a.teacher_id.empty() ? a.backend : a.teacher_id;
  const auto batch = pseudo_batch_from_responses(run.responses, teacher, &failures);
  Manifest out = build_pseudo_manifest(unlabeled, batch);
  out.name = stem_of(a.out);
  out.provenance.back().params["backend_failures"] = failures;
  save_manifest(out, a.out);
  spdlog::info("pseudo-labelled {} of {} clip(s), {} backend failure(s)", out.utterances.size(),
               requests.size(), failures);
  if (run.backend_failed) {
    spdlog::error("backend failed: {} (partial output kept in {})", run.failure, a.out);
    return 1;
  }
  return 0;
}

int run_confidence(const ConfidenceArgs& a) {
  const Manifest in = load_manifest(a.in);
  Manifest out = filter_by_confidence(in, a.threshold);
  out.name = stem_of(a.out);
  save_manifest(out, a.out);
  spdlog::info("kept {} of {} utterance(s), {} h", out.utterances.size(), in.utterances.size(),
               format_hours(total_hours(out)));
  return 0;
}

int run_tts_prepare(const TtsPrepareArgs& a) {
  const auto jobs = prepare_tts_jobs(load_sentences(a.sentences), a.voice);
  save_tts_jobs(jobs, a.jobs);
  spdlog::info("wrote {} synthesis job(s)", jobs.size());
  return 0;
}

int run_tts_synth(const TtsSynthArgs& a) {
  const auto jobs = load_tts_jobs(a.jobs);
  const auto run = run_tts(backend_options(a.backend, a.parallelism, a.timeout_sec), jobs);
  save_tts_responses(run.responses, a.responses);
  if (run.backend_failed) {
    spdlog::error("backend failed: {} (partial output kept in {})", run.failure, a.responses);
    return 1;
  }
  return 0;
}

int run_tts_assemble(const TtsAssembleArgs& a) {
  const auto jobs = load_tts_jobs(a.jobs);
  const auto responses = load_tts_responses(a.responses);
  const Manifest out = assemble_tts_manifest(jobs, responses, stem_of(a.out));
  save_manifest(out, a.out);
  spdlog::info("assembled {} of {} clip(s), {} h", out.utterances.size(), jobs.size(),
               format_hours(total_hours(out)));
  return 0;
}

int run_evaluate(const EvaluateArgs& a) {
  const NormalizationPolicy policy = parse_policy(a.policy);
  const Manifest refs = load_manifest(a.refs);
  const Manifest hyps = load_manifest(a.hyps);
  std::unordered_map<std::string, const Utterance*> by_id;
  for (const auto& u : hyps.utterances) by_id.emplace(u.id, &u);

  std::vector<ScoreInput> pairs;
  pairs.reserve(refs.utterances.size());
  for (const auto& r : refs.utterances) {
    if (!r.text) throw DataError("reference utterance '" + r.id + "' has no text");
    ScoreInput in{r.id, *r.text, "", std::nullopt, false};
    auto it = by_id.find(r.id);
    if (it == by_id.end() || !it->second->text) {
      in.missing_hyp = true;
    } else {
      in.hyp = *it->second->text;
      in.hyp_language = it->second->language;
    }
    pairs.push_back(std::move(in));
  }

  EvalReport report;
  if (a.threads > 1) {
    omp_set_num_threads(a.threads);
    report = score_corpus(pairs, policy);
  } else {
    report = score_corpus_serial(pairs, policy);
  }
  save_eval_report(report, a.out);
  save_summary_csv(report, a.out + ".summary.csv");
  std::printf("WER %.2f%%  CER %.2f%%  (%zu utterances, %zu excluded)\n", report.corpus_wer_percent,
              report.corpus_cer_percent, report.per_utterance.size(), report.excluded_count);
  return 0;
}

int run_analyze(const AnalyzeArgs& a) {
  const EvalReport eval = load_eval_report(a.report);
  HeuristicParams params;
  params.top_n = a.top_n;
  params.length_ratio = a.ratio;
  params.script_fraction = a.script_frac;
  params.ngram = a.ngram;
  params.repeats = a.repeats;

  std::unordered_map<std::string, std::string> languages;
  if (!a.hyps.empty())
    for (const auto& u : load_manifest(a.hyps).utterances)
      if (u.language) languages.emplace(u.id, *u.language);

  const ErrorReport report = build_error_report(eval, a.hyps.empty() ? nullptr : &languages, params);
  if (a.out.empty()) {
    std::cout << to_json(report).dump(2) << '\n';
  } else {
    save_error_report(report, a.out);
    save_confusions_csv(report, a.out + ".confusions.csv");
  }
  spdlog::info("{} utterance(s): {} language failure(s), {} hallucination(s)", report.total,
               report.language_failures.size(), report.hallucinations.size());
  return 0;
}

int run_recipe(const RecipeArgs& a) {
  RecipeOverrides o{a.steps, a.learning_rate, a.warmup_steps, a.train_batch_size, a.eval_batch_size};
  const TrainingRecipe recipe = emit_recipe(a.train, a.eval, a.base_model, o);
  if (a.out.empty())
    std::cout << format_recipe(recipe);
  else
    write_recipe(recipe, a.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dforge: corpus, self-training, TTS augmentation and evaluation stages"};
  app.require_subcommand(1);
  long long seed = 0;
  std::string log_file;
  app.add_option("--seed", seed, "seed recorded with the run")->capture_default_str();
  app.add_option("--log-file", log_file, "write logs here instead of stderr");

  std::function<int()> action;

  StatsArgs stats;
  auto* c = app.add_subcommand("stats", "print utterance count, hours and speaker counts");
  c->add_option("manifest", stats.manifest)->required()->check(CLI::ExistingFile);
  c->callback([&] { action = [&] { return run_stats(stats); }; });

  ValidateArgs val;
  c = app.add_subcommand("validate", "check manifest invariants and audio presence");
  c->add_option("manifest", val.manifest)->required()->check(CLI::ExistingFile);
  c->add_option("--audio-root", val.audio_root, "directory audio paths are relative to")
      ->capture_default_str();
  c->callback([&] { action = [&] { return run_validate(val); }; });

  CombineArgs comb;
  c = app.add_subcommand("combine", "concatenate manifests");
  c->add_option("out", comb.out)->required();
  c->add_option("inputs", comb.inputs)->required()->check(CLI::ExistingFile);
  c->callback([&] { action = [&] { return run_combine(comb); }; });

  DensityArgs dens;
  c = app.add_subcommand("density-filter", "keep sentences with enough diacritics");
  c->add_option("in", dens.in)->required()->check(CLI::ExistingFile);
  c->add_option("out", dens.out)->required();
  c->add_option("--threshold", dens.threshold, "minimum diacritic percentage")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 100.0));
  c->add_option("--reports", dens.reports, "write per-sentence density records here");
  c->callback([&] { action = [&] { return run_density(dens); }; });

  ReconstructArgs rec;
  c = app.add_subcommand("reconstruct", "reassemble sentences from token annotations");
  c->add_option("tokens", rec.tokens)->required()->check(CLI::ExistingFile);
  c->add_option("out", rec.out)->required();
  c->callback([&] { action = [&] { return run_reconstruct(rec); }; });

  PseudoArgs pseudo;
  c = app.add_subcommand("pseudo-label", "transcribe unlabeled clips with a teacher backend");
  c->add_option("unlabeled", pseudo.unlabeled)->required()->check(CLI::ExistingFile);
  c->add_option("out", pseudo.out)->required();
  c->add_option("--backend", pseudo.backend, "backend command")->required();
  c->add_option("--parallelism", pseudo.parallelism, "requests in flight")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  c->add_option("--timeout", pseudo.timeout_sec, "per-request timeout in seconds")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  c->add_option("--teacher-id", pseudo.teacher_id, "name recorded in provenance");
  c->add_option("--exclude", pseudo.exclude, "skip ids present in this manifest")
      ->check(CLI::ExistingFile);
  c->callback([&] { action = [&] { return run_pseudo(pseudo); }; });

  ConfidenceArgs conf;
  c = app.add_subcommand("confidence-filter", "keep pseudo-labels at or above a confidence");
  c->add_option("in", conf.in)->required()->check(CLI::ExistingFile);
  c->add_option("out", conf.out)->required();
  c->add_option("--threshold", conf.threshold)->required()->check(CLI::Range(0.0, 1.0));
  c->callback([&] { action = [&] { return run_confidence(conf); }; });

  TtsPrepareArgs prep;
  c = app.add_subcommand("tts-prepare", "turn sentences into synthesis jobs");
  c->add_option("sentences", prep.sentences)->required()->check(CLI::ExistingFile);
  c->add_option("jobs", prep.jobs)->required();
  c->add_option("--voice", prep.voice)->capture_default_str();
  c->callback([&] { action = [&] { return run_tts_prepare(prep); }; });

  TtsSynthArgs synth;
  c = app.add_subcommand("tts-synthesize", "run synthesis jobs through a backend");
  c->add_option("jobs", synth.jobs)->required()->check(CLI::ExistingFile);
  c->add_option("responses", synth.responses)->required();
  c->add_option("--backend", synth.backend, "backend command")->required();
  c->add_option("--parallelism", synth.parallelism)->capture_default_str()->check(CLI::PositiveNumber);
  c->add_option("--timeout", synth.timeout_sec)->capture_default_str()->check(CLI::PositiveNumber);
  c->callback([&] { action = [&] { return run_tts_synth(synth); }; });

  TtsAssembleArgs asm_args;
  c = app.add_subcommand("tts-assemble", "build a TTS manifest from jobs and responses");
  c->add_option("jobs", asm_args.jobs)->required()->check(CLI::ExistingFile);
  c->add_option("responses", asm_args.responses)->required()->check(CLI::ExistingFile);
  c->add_option("out", asm_args.out)->required();
  c->callback([&] { action = [&] { return run_tts_assemble(asm_args); }; });

  EvaluateArgs ev;
  c = app.add_subcommand("evaluate", "score hypotheses against references (WER/CER)");
  c->add_option("refs", ev.refs)->required()->check(CLI::ExistingFile);
  c->add_option("hyps", ev.hyps)->required()->check(CLI::ExistingFile);
  c->add_option("--policy", ev.policy, "normalization flags, e.g. default,+unify_alef_variants")
      ->capture_default_str();
  c->add_option("--out", ev.out, "report path (summary CSV goes to <out>.summary.csv)")->required();
  c->add_option("--threads", ev.threads, "scoring threads; 1 uses the serial path")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  c->callback([&] { action = [&] { return run_evaluate(ev); }; });

  AnalyzeArgs an;
  c = app.add_subcommand("analyze-errors", "language failures, hallucinations, char confusions");
  c->add_option("report", an.report)->required()->check(CLI::ExistingFile);
  c->add_option("--top-n", an.top_n)->capture_default_str();
  c->add_option("--ratio", an.ratio, "hallucination length ratio")->capture_default_str();
  c->add_option("--script-frac", an.script_frac, "minimum Arabic letter share")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  c->add_option("--ngram", an.ngram)->capture_default_str()->check(CLI::PositiveNumber);
  c->add_option("--repeats", an.repeats)->capture_default_str()->check(CLI::Range(2, 1000));
  c->add_option("--hyps", an.hyps, "manifest carrying backend language tags")
      ->check(CLI::ExistingFile);
  c->add_option("--out", an.out, "report path (CSV goes to <out>.confusions.csv)");
  c->callback([&] { action = [&] { return run_analyze(an); }; });

  RecipeArgs rcp;
  c = app.add_subcommand("emit-recipe", "write a fine-tuning recipe file");
  c->add_option("train", rcp.train)->required();
  c->add_option("eval", rcp.eval)->required();
  c->add_option("--base-model", rcp.base_model)->required();
  c->add_option("--out", rcp.out, "recipe path; stdout when omitted");
  c->add_option("--steps", rcp.steps);
  c->add_option("--learning-rate", rcp.learning_rate);
  c->add_option("--warmup-steps", rcp.warmup_steps);
  c->add_option("--train-batch-size", rcp.train_batch_size);
  c->add_option("--eval-batch-size", rcp.eval_batch_size);
  c->callback([&] { action = [&] { return run_recipe(rcp); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "dforge: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    setup_logging(log_file);
  } catch (const spdlog::spdlog_ex& e) {
    std::cerr << "dforge: " << e.what() << '\n';
    return 2;
  }

  for (const auto* sub : app.get_subcommands())
    spdlog::info("{} config:\nseed={}\nlog-file=\"{}\"\n{}", sub->get_name(), seed, log_file,
                 sub->config_to_str(true, false));

  try {
    return action();
  } catch (const std::invalid_argument& e) {
    spdlog::error("{}", e.what());
    return 2;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
}
