// Live sanity check against the real chat endpoint. Not part of CI.
//
//   ACOS_LIVE_TRAIN, ACOS_LIVE_TEST  corpus paths (canonical JSONL or acos-tsv)
//   ACOS_LIVE_FORMAT                 optional, defaults to acos-tsv
//   OPENAI_API_KEY                   the key
//
// Exits 77 (skipped) when any of these are missing.

#include <cstdio>
#include <cstdlib>
#include <filesystem>

#include "absa/experiment.hpp"

using namespace absa;

int main() {
  const char* train = std::getenv("ACOS_LIVE_TRAIN");
  const char* test = std::getenv("ACOS_LIVE_TEST");
  const char* fmt = std::getenv("ACOS_LIVE_FORMAT");
  if (!train || !test || !std::getenv("OPENAI_API_KEY")) {
    std::puts("live smoke skipped: set ACOS_LIVE_TRAIN, ACOS_LIVE_TEST and OPENAI_API_KEY");
    return 77;
  }
  try {
    const auto format = parse_corpus_format(fmt ? fmt : "acos-tsv");
    if (!format) throw std::runtime_error("unknown ACOS_LIVE_FORMAT");
    const auto dir = std::filesystem::temp_directory_path() / "absa_live_smoke";
    std::filesystem::create_directories(dir);

    auto subset = load_corpus(test, *format, Split::test).corpus;
    if (subset.examples.size() > 50) subset.examples.resize(50);
    write_corpus(subset, dir / "test.jsonl");
    write_corpus(load_corpus(train, *format, Split::train).corpus, dir / "train.jsonl");

    ExperimentConfig cfg;
    cfg.train = dir / "train.jsonl";
    cfg.test = dir / "test.jsonl";
    cfg.format = CorpusFormat::canonical_jsonl;
    cfg.k = 20;
    cfg.mode = CacheMode::record;
    cfg.cache = dir / "cache.jsonl";
    cfg.log = dir / "run.jsonl";
    cfg.completion.temperature = 0.0;
    std::filesystem::remove(cfg.log);

    const auto result = Experiment(cfg, make_client(cfg)).run();
    const double f1 = result.reports.exact.f1;
    std::printf("exact-match F1 over %zu examples: %.4f\n", result.records.size(), f1);
    if (f1 < 0.15 || f1 > 0.65) {
      std::puts("FAIL: outside the 0.15-0.65 sanity band");
      return 1;
    }
    std::puts("PASS");
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
