// Serial reference kernels against their OpenMP counterparts.
#include <random>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "absa/retrieval.hpp"
#include "absa/scoring.hpp"

namespace {

absa::Corpus synthetic_corpus(std::size_t n, std::size_t vocab, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> word(0, vocab - 1);
  std::uniform_int_distribution<int> len(4, 24);
  absa::Corpus c;
  for (std::size_t i = 0; i < n; ++i) {
    std::string text;
    for (int w = len(rng); w > 0; --w) text += "w" + std::to_string(word(rng)) + " ";
    c.examples.push_back({"d" + std::to_string(i), text, {}});
  }
  return c;
}

std::vector<absa::Prediction> synthetic_predictions(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> count(0, 6);
  std::uniform_int_distribution<int> pick(0, 3);
  const char* terms[] = {"screen", "the screen", "battery life", "battery"};
  auto quad = [&] {
    return absa::Quadruple{std::string(terms[pick(rng)]), "laptop general", std::string(terms[pick(rng)]),
                           absa::Sentiment::positive};
  };
  std::vector<absa::Prediction> data(n);
  for (auto& p : data) {
    for (int i = count(rng); i > 0; --i) p.preds.push_back(quad());
    for (int i = count(rng); i > 0; --i) p.golds.push_back(quad());
  }
  return data;
}

void BM_SimilarityScan(benchmark::State& state, absa::Exec exec) {
  const auto corpus = synthetic_corpus(static_cast<std::size_t>(state.range(0)), 2000, 7);
  const auto index = absa::TfidfIndex::build(corpus);
  const auto query = index.vectorize(corpus.examples.front().text);
  for (auto _ : state) benchmark::DoNotOptimize(absa::similarity_scan(index, query, exec));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_ScoreAll(benchmark::State& state, absa::Exec exec) {
  const auto data = synthetic_predictions(static_cast<std::size_t>(state.range(0)), 11);
  const auto policy = absa::MatchPolicy::relaxed(0.5);
  for (auto _ : state) benchmark::DoNotOptimize(absa::score_all(data, policy, exec));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK_CAPTURE(BM_SimilarityScan, serial, absa::Exec::serial)->Arg(1000)->Arg(20000);
BENCHMARK_CAPTURE(BM_SimilarityScan, openmp, absa::Exec::parallel)->Arg(1000)->Arg(20000);
BENCHMARK_CAPTURE(BM_ScoreAll, serial, absa::Exec::serial)->Arg(1000)->Arg(20000);
BENCHMARK_CAPTURE(BM_ScoreAll, openmp, absa::Exec::parallel)->Arg(1000)->Arg(20000);

BENCHMARK_MAIN();
