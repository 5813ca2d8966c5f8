#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "absa/dataset.hpp"
#include "absa/llm_client.hpp"
#include "absa/parser.hpp"
#include "absa/prompt.hpp"
#include "absa/retrieval.hpp"
#include "absa/scoring.hpp"

namespace absa {

enum class Selection { knn_tfidf, knn_embed, random };
std::string_view to_string(Selection s);
std::optional<Selection> parse_selection(std::string_view s);

// Relaxed thresholds 1.0, 0.9, ..., 0.1.
std::vector<double> default_thresholds();

struct ExperimentConfig {
  std::filesystem::path train;
  std::filesystem::path test;
  CorpusFormat format = CorpusFormat::canonical_jsonl;
  Selection selection = Selection::knn_tfidf;
  std::size_t k = 20;
  ShotOrder shot_order = ShotOrder::most_similar_first;
  CompletionConfig completion;
  CacheMode mode = CacheMode::replay;
  std::filesystem::path cache;
  std::filesystem::path log;
  std::optional<std::filesystem::path> report;
  std::vector<double> thresholds = default_thresholds();
  std::size_t parallelism = 1;
  std::uint64_t seed = 0;
  std::optional<std::filesystem::path> embeddings;
  std::optional<std::string> embedding_endpoint;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// JSON object mirroring ExperimentConfig; relative paths resolve against
// base_dir. Unknown keys are rejected.
ExperimentConfig config_from_json(std::string_view json_text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

struct ShotRef {
  std::string id;
  std::optional<double> similarity;  // absent for random selection

  friend bool operator==(const ShotRef&, const ShotRef&) = default;
};

struct RunRecord {
  std::string test_id;
  std::vector<Quadruple> gold;
  std::vector<ShotRef> shots;
  std::string prompt_digest;
  std::string raw_response;
  std::vector<Quadruple> parsed;
  std::vector<Diagnostic> diagnostics;
  std::optional<std::string> error;
  // Excluded from determinism checks.
  std::string started_at;
  double elapsed_ms = 0.0;
};

// One JSON object per line; with include_timing = false the line is a pure
// function of the record's content.
std::string record_to_json(const RunRecord& r, bool include_timing = true);
RunRecord record_from_json(std::string_view line, std::size_t line_no = 0);

class LogError : public std::runtime_error {
 public:
  LogError(const std::string& message, std::size_t line);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Throws LogError naming the line for anything unparseable.
std::vector<RunRecord> read_log(const std::filesystem::path& path);

struct ReportSet {
  ScoreReport exact;
  std::vector<ThresholdRow> relaxed;

  friend bool operator==(const ReportSet&, const ReportSet&) = default;
};

// Failed examples count as zero predictions.
ReportSet score_records(std::span<const RunRecord> records, std::span<const double> thresholds);
ReportSet report(const std::filesystem::path& log, std::span<const double> thresholds);

std::string report_json(const ReportSet& r);
std::string report_table(const ReportSet& r);

struct RunResult {
  std::vector<RunRecord> records;  // test order
  ReportSet reports;
  std::size_t resumed = 0;         // records taken from an existing log
};

// Precomputed file and/or HTTP endpoint from the config; null if neither.
std::shared_ptr<EmbeddingProvider> make_embedder(const ExperimentConfig& config);

class Experiment {
 public:
  // Loads both corpora and checks that their ids are disjoint.
  Experiment(ExperimentConfig config, std::shared_ptr<LlmClient> client,
             std::shared_ptr<EmbeddingProvider> embedder = nullptr);

  // Appends to config.log, skipping test ids already logged there.
  RunResult run();

  // Shots for one test example under the current config.
  std::vector<ShotRef> select_shots(const Example& test_example);
  std::string build_prompt(const Example& test_example, const std::vector<ShotRef>& shots) const;

  const ExperimentConfig& config() const { return config_; }
  ExperimentConfig& config() { return config_; }
  const Corpus& train() const { return train_; }
  const Corpus& test() const { return test_; }

 private:
  RunRecord process(const Example& ex);
  void prepare_selection();

  ExperimentConfig config_;
  std::shared_ptr<LlmClient> client_;
  std::shared_ptr<EmbeddingProvider> embedder_;
  Corpus train_;
  Corpus test_;
  std::optional<TfidfIndex> tfidf_;
  std::optional<DenseStore> dense_;
  std::mutex embed_mu_;
};

std::shared_ptr<LlmClient> make_client(const ExperimentConfig& config);

struct SweepRow {
  std::string label;
  ReportSet reports;
};

// One run per k, each logged to "<log stem>.k<k>.jsonl"; rows ordered by k.
std::vector<SweepRow> sweep_k(const ExperimentConfig& config, std::vector<std::size_t> k_values,
                              std::shared_ptr<LlmClient> client, std::shared_ptr<EmbeddingProvider> embedder = nullptr);
// One run per method, each logged to "<log stem>.<method>.jsonl".
std::vector<SweepRow> sweep_selection(const ExperimentConfig& config, const std::vector<Selection>& methods,
                                      std::shared_ptr<LlmClient> client,
                                      std::shared_ptr<EmbeddingProvider> embedder = nullptr);

// "<key_column>,precision,recall,f1" over exact-match reports.
std::string sweep_rows_csv(std::string_view key_column, std::span<const SweepRow> rows);

}  // namespace absa
