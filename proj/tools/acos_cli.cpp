// acos: few-shot ACOS quadruple extraction harness.
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "absa/dataset.hpp"
#include "absa/experiment.hpp"
#include "absa/prompt.hpp"
#include "absa/retrieval.hpp"
#include "absa/scoring.hpp"

namespace {

template <typename T>
std::vector<T> parse_list(const std::string& csv, T (*conv)(const std::string&)) {
  std::vector<T> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(conv(item));
  }
  return out;
}

double to_double(const std::string& s) { return std::stod(s); }
std::size_t to_size(const std::string& s) {
  const long long v = std::stoll(s);
  if (v < 0) throw std::invalid_argument("negative value " + s);
  return static_cast<std::size_t>(v);
}
absa::Selection to_selection(const std::string& s) {
  auto m = absa::parse_selection(s);
  if (!m) throw std::invalid_argument("unknown selection method " + s);
  return *m;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

void print_warnings(const std::vector<absa::Warning>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w.example_id << " (line " << w.line << "): " << w.message << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Few-shot aspect-category-opinion-sentiment extraction harness"};
  app.require_subcommand(1);

  // import
  auto* import_cmd = app.add_subcommand("import", "Convert a corpus into canonical JSONL");
  std::string import_in, import_format = "canonical-jsonl", import_out, import_prefix;
  bool import_has_prefix = false;
  import_cmd->add_option("--in", import_in, "Input corpus")->required()->check(CLI::ExistingFile);
  import_cmd->add_option("--format", import_format, "canonical-jsonl | acos-tsv | paraphrase");
  import_cmd->add_option("--out", import_out, "Output .jsonl")->required();
  auto* prefix_opt = import_cmd->add_option("--id-prefix", import_prefix, "Id prefix for legacy formats (default: <stem>:)");

  // render
  auto* render_cmd = app.add_subcommand("render", "Print the prompt for one test example");
  std::string render_dataset, render_train, render_id, render_selection = "knn-tfidf", render_order = "most-similar-first";
  std::size_t render_k = 20;
  std::uint64_t render_seed = 0;
  render_cmd->add_option("--dataset", render_dataset, "Corpus holding the example")->required()->check(CLI::ExistingFile);
  render_cmd->add_option("--train", render_train, "Training corpus for shots and categories")->required()->check(CLI::ExistingFile);
  render_cmd->add_option("--id", render_id, "Example id")->required();
  render_cmd->add_option("--k", render_k, "Number of shots");
  render_cmd->add_option("--selection", render_selection, "knn-tfidf | random");
  render_cmd->add_option("--seed", render_seed, "Seed for random selection");
  render_cmd->add_option("--order", render_order, "most-similar-first | most-similar-last");

  // run
  auto* run_cmd = app.add_subcommand("run", "Run an experiment from a config file");
  std::string run_config;
  run_cmd->add_option("--config", run_config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);

  // sweep-k
  auto* sweep_k_cmd = app.add_subcommand("sweep-k", "Run one experiment per number of shots");
  std::string sweep_k_config, sweep_k_values = "5,10,20,30,40", sweep_k_csv;
  sweep_k_cmd->add_option("--config", sweep_k_config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  sweep_k_cmd->add_option("--values", sweep_k_values, "Comma-separated k values");
  sweep_k_cmd->add_option("--csv", sweep_k_csv, "Write rows to this CSV file");

  // sweep-select
  auto* sweep_sel_cmd = app.add_subcommand("sweep-select", "Run one experiment per selection method");
  std::string sweep_sel_config, sweep_sel_methods = "knn-tfidf,knn-embed,random", sweep_sel_csv;
  sweep_sel_cmd->add_option("--config", sweep_sel_config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  sweep_sel_cmd->add_option("--methods", sweep_sel_methods, "Comma-separated selection methods");
  sweep_sel_cmd->add_option("--csv", sweep_sel_csv, "Write rows to this CSV file");

  // score
  auto* score_cmd = app.add_subcommand("score", "Relaxed IOU threshold sweep over a run log");
  std::string score_log, score_thresholds = "1.0,0.9,0.8,0.7,0.6,0.5,0.4,0.3,0.2,0.1", score_csv;
  score_cmd->add_option("--log", score_log, "Run log (JSONL)")->required()->check(CLI::ExistingFile);
  score_cmd->add_option("--thresholds", score_thresholds, "Comma-separated IOU thresholds in (0, 1]");
  score_cmd->add_option("--csv", score_csv, "Write the sweep to this CSV file");

  // report
  auto* report_cmd = app.add_subcommand("report", "Re-score a run log offline");
  std::string report_log, report_thresholds = "1.0,0.9,0.8,0.7,0.6,0.5,0.4,0.3,0.2,0.1", report_json_out, report_csv_out;
  report_cmd->add_option("--log", report_log, "Run log (JSONL)")->required()->check(CLI::ExistingFile);
  report_cmd->add_option("--thresholds", report_thresholds, "Comma-separated IOU thresholds in (0, 1]");
  report_cmd->add_option("--json", report_json_out, "Write the machine-readable report here");
  report_cmd->add_option("--csv", report_csv_out, "Write the threshold sweep CSV here");

  CLI11_PARSE(app, argc, argv);
  import_has_prefix = prefix_opt->count() > 0;

  try {
    if (*import_cmd) {
      auto format = absa::parse_corpus_format(import_format);
      if (!format) throw std::invalid_argument("unknown format " + import_format);
      absa::LoadResult loaded;
      if (import_has_prefix) {
        std::ifstream in(import_in, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        loaded = absa::parse_corpus(ss.str(), *format, absa::Split::train, import_prefix);
      } else {
        loaded = absa::load_corpus(import_in, *format);
      }
      print_warnings(loaded.warnings);
      absa::write_corpus(loaded.corpus, import_out);
      std::cerr << "wrote " << loaded.corpus.examples.size() << " examples, " << loaded.corpus.categories.size()
                << " categories to " << import_out << "\n";
    } else if (*render_cmd) {
      const auto test = absa::load_corpus(render_dataset, absa::CorpusFormat::canonical_jsonl, absa::Split::test);
      const auto train = absa::load_corpus(render_train, absa::CorpusFormat::canonical_jsonl, absa::Split::train);
      const absa::Example* ex = test.corpus.find(render_id);
      if (ex == nullptr) throw std::invalid_argument("no example with id " + render_id);
      absa::PromptSpec spec;
      spec.context_categories = train.corpus.categories;
      spec.query_text = ex->text;
      std::vector<std::string> ids;
      if (render_selection == "knn-tfidf") {
        const auto index = absa::TfidfIndex::build(train.corpus);
        for (const auto& n : absa::select_knn(ex->text, index, render_k)) ids.push_back(n.example_id);
      } else if (render_selection == "random") {
        ids = absa::select_random(train.corpus, render_k, render_seed);
      } else {
        throw std::invalid_argument("render supports knn-tfidf and random selection");
      }
      for (const auto& id : ids) {
        const absa::Example* shot = train.corpus.find(id);
        spec.shots.push_back({shot->text, shot->quads});
      }
      if (render_order == "most-similar-last") {
        std::reverse(spec.shots.begin(), spec.shots.end());
      } else if (render_order != "most-similar-first") {
        throw std::invalid_argument("unknown order " + render_order);
      }
      std::cout << absa::render_prompt(spec) << "\n";
    } else if (*run_cmd) {
      const auto config = absa::load_config(run_config);
      absa::Experiment exp(config, absa::make_client(config), absa::make_embedder(config));
      const auto result = exp.run();
      std::cerr << "processed " << result.records.size() << " examples (" << result.resumed << " resumed), log "
                << config.log.string() << "\n";
      std::cout << absa::report_table(result.reports);
    } else if (*sweep_k_cmd) {
      const auto config = absa::load_config(sweep_k_config);
      const auto rows = absa::sweep_k(config, parse_list<std::size_t>(sweep_k_values, to_size),
                                      absa::make_client(config), absa::make_embedder(config));
      const auto csv = absa::sweep_rows_csv("k", rows);
      if (!sweep_k_csv.empty()) write_file(sweep_k_csv, csv);
      std::cout << csv;
    } else if (*sweep_sel_cmd) {
      const auto config = absa::load_config(sweep_sel_config);
      const auto rows = absa::sweep_selection(config, parse_list<absa::Selection>(sweep_sel_methods, to_selection),
                                              absa::make_client(config), absa::make_embedder(config));
      const auto csv = absa::sweep_rows_csv("method", rows);
      if (!sweep_sel_csv.empty()) write_file(sweep_sel_csv, csv);
      std::cout << csv;
    } else if (*score_cmd) {
      const auto thresholds = parse_list<double>(score_thresholds, to_double);
      const auto reports = absa::report(score_log, thresholds);
      const auto csv = absa::sweep_csv(reports.relaxed);
      if (!score_csv.empty()) write_file(score_csv, csv);
      std::cout << csv;
    } else if (*report_cmd) {
      const auto thresholds = parse_list<double>(report_thresholds, to_double);
      const auto reports = absa::report(report_log, thresholds);
      if (!report_json_out.empty()) write_file(report_json_out, absa::report_json(reports) + "\n");
      if (!report_csv_out.empty()) write_file(report_csv_out, absa::sweep_csv(reports.relaxed));
      std::cout << absa::report_table(reports);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
