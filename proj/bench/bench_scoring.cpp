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


// Serial reference vs OpenMP kernels, and full-matrix vs distance-only DP.

#include <benchmark/benchmark.h>
#include <omp.h>

#include <random>
#include <string>
#include <vector>

#include "dforge/artext.hpp"
#include "dforge/metrics.hpp"

namespace {

const std::vector<std::string> kVocab = {"كتاب", "مدرسة", "قلم", "بيت", "سوق", "ولد", "باب",
                                         "نور", "جمل", "عين", "بحر", "جبل", "شمس", "قمر"};

std::string sentence(std::mt19937_64& rng, int min_words, int max_words) {
  std::string s;
  const int n = min_words + static_cast<int>(rng() % (max_words - min_words + 1));
  for (int i = 0; i < n; ++i) {
    if (i) s += ' ';
    s += kVocab[rng() % kVocab.size()];
  }
  return s;
}

const std::vector<dforge::ScoreInput>& corpus() {
  static const auto pairs = [] {
    std::mt19937_64 rng(1);
    std::vector<dforge::ScoreInput> out;
    for (int i = 0; i < 10000; ++i)
      out.push_back({"u" + std::to_string(i), sentence(rng, 6, 18), sentence(rng, 6, 18),
                     std::nullopt, false});
    return out;
  }();
  return pairs;
}

const std::vector<std::string>& sentences() {
  static const auto out = [] {
    std::mt19937_64 rng(2);
    const char* marks[] = {"َ", "ُ", "ِ", "ّ", "ْ"};
    std::vector<std::string> v;
    for (int i = 0; i < 50000; ++i) {
      std::string s = sentence(rng, 3, 20);
      for (int k = static_cast<int>(rng() % 12); k > 0; --k) s += marks[rng() % 5];
      v.push_back(s);
    }
    return v;
  }();
  return out;
}

void BM_ScoreCorpusSerial(benchmark::State& state) {
  const dforge::NormalizationPolicy policy;
  for (auto _ : state) benchmark::DoNotOptimize(dforge::score_corpus_serial(corpus(), policy));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(corpus().size()));
}
BENCHMARK(BM_ScoreCorpusSerial)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_ScoreCorpusParallel(benchmark::State& state) {
  const dforge::NormalizationPolicy policy;
  omp_set_num_threads(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(dforge::score_corpus(corpus(), policy));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(corpus().size()));
}
BENCHMARK(BM_ScoreCorpusParallel)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_DensitySerial(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(dforge::density_reports_serial(sentences()));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(sentences().size()));
}
BENCHMARK(BM_DensitySerial)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_DensityParallel(benchmark::State& state) {
  omp_set_num_threads(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(dforge::density_reports_parallel(sentences()));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(sentences().size()));
}
BENCHMARK(BM_DensityParallel)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond)->UseRealTime();

std::pair<std::vector<int>, std::vector<int>> sequences(std::size_t n) {
  std::mt19937_64 rng(n);
  std::vector<int> a(n), b(n);
  for (auto& x : a) x = static_cast<int>(rng() % 8);
  for (auto& x : b) x = static_cast<int>(rng() % 8);
  return {a, b};
}

void BM_EditDistanceFull(benchmark::State& state) {
  const auto [a, b] = sequences(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(dforge::edit_distance<int>(a, b));
}
BENCHMARK(BM_EditDistanceFull)->RangeMultiplier(4)->Range(16, 4096);

void BM_EditDistanceOnly(benchmark::State& state) {
  const auto [a, b] = sequences(static_cast<std::size_t>(state.range(0)));
  std::vector<std::size_t> scratch;
  for (auto _ : state) benchmark::DoNotOptimize(dforge::edit_distance_only<int>(a, b, scratch));
}
BENCHMARK(BM_EditDistanceOnly)->RangeMultiplier(4)->Range(16, 4096);

}  // namespace

BENCHMARK_MAIN();
