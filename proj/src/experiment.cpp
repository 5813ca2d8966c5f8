#include "absa/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <future>
#include <mutex>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "absa/text.hpp"

namespace absa {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

ordered_json quad_to_json(const Quadruple& q) {
  ordered_json j;
  j["aspect"] = q.aspect ? ordered_json(*q.aspect) : ordered_json(nullptr);
  j["category"] = q.category;
  j["opinion"] = q.opinion ? ordered_json(*q.opinion) : ordered_json(nullptr);
  j["sentiment"] = std::string(to_string(q.sentiment));
  return j;
}

Quadruple quad_from_json(const json& j) {
  Quadruple q;
  if (!j.at("aspect").is_null()) q.aspect = j.at("aspect").get<std::string>();
  q.category = j.at("category").get<std::string>();
  if (!j.at("opinion").is_null()) q.opinion = j.at("opinion").get<std::string>();
  auto s = parse_sentiment(j.at("sentiment").get<std::string>());
  if (!s) throw std::invalid_argument("unknown sentiment");
  q.sentiment = *s;
  return q;
}

ordered_json quads_to_json(const std::vector<Quadruple>& qs) {
  ordered_json a = ordered_json::array();
  for (const auto& q : qs) a.push_back(quad_to_json(q));
  return a;
}

std::vector<Quadruple> quads_from_json(const json& a) {
  std::vector<Quadruple> out;
  for (const auto& q : a) out.push_back(quad_from_json(q));
  return out;
}

std::optional<Severity> parse_severity(std::string_view s) {
  if (s == "info") return Severity::info;
  if (s == "warning") return Severity::warning;
  if (s == "error") return Severity::error;
  return std::nullopt;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_relative() && !base.empty()) return base / path;
  return path;
}

std::filesystem::path sibling_log(const std::filesystem::path& log, const std::string& tag) {
  auto out = log;
  out.replace_filename(log.stem().string() + "." + tag + log.extension().string());
  return out;
}

// Drops a trailing partial line left by an interrupted writer.
void trim_partial_tail(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) return;
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string content = ss.str();
  if (content.empty() || content.back() == '\n') return;
  const auto nl = content.rfind('\n');
  std::filesystem::resize_file(path, nl == std::string::npos ? 0 : nl + 1);
}

}  // namespace

std::string_view to_string(Selection s) {
  switch (s) {
    case Selection::knn_tfidf: return "knn-tfidf";
    case Selection::knn_embed: return "knn-embed";
    case Selection::random: return "random";
  }
  return "knn-tfidf";
}

std::optional<Selection> parse_selection(std::string_view s) {
  if (s == "knn-tfidf") return Selection::knn_tfidf;
  if (s == "knn-embed") return Selection::knn_embed;
  if (s == "random") return Selection::random;
  return std::nullopt;
}

std::vector<double> default_thresholds() {
  std::vector<double> out;
  for (int i = 10; i >= 1; --i) out.push_back(i / 10.0);
  return out;
}

ExperimentConfig config_from_json(std::string_view json_text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");

  static const std::unordered_set<std::string> kKeys = {
      "train", "test", "format", "selection", "k", "shot_order", "completion", "mode", "cache", "log",
      "report", "thresholds", "parallelism", "seed", "embeddings", "embedding_endpoint"};
  static const std::unordered_set<std::string> kCompletionKeys = {
      "model", "temperature", "max_retries", "backoff_base_ms", "request_timeout_ms", "endpoint", "api_key_env",
      "role_layout", "max_concurrency"};
  for (const auto& [key, _] : j.items()) {
    if (!kKeys.contains(key)) throw ConfigError("unknown config key \"" + key + "\"");
  }

  ExperimentConfig c;
  try {
    for (const char* req : {"train", "test", "log"}) {
      if (!j.contains(req)) throw ConfigError(std::string("config is missing \"") + req + "\"");
    }
    c.train = resolve(base_dir, j.at("train").get<std::string>());
    c.test = resolve(base_dir, j.at("test").get<std::string>());
    c.log = resolve(base_dir, j.at("log").get<std::string>());
    if (j.contains("format")) {
      auto f = parse_corpus_format(j["format"].get<std::string>());
      if (!f) throw ConfigError("unknown format " + j["format"].dump());
      c.format = *f;
    }
    if (j.contains("selection")) {
      auto s = parse_selection(j["selection"].get<std::string>());
      if (!s) throw ConfigError("unknown selection " + j["selection"].dump());
      c.selection = *s;
    }
    if (j.contains("k")) {
      const auto k = j["k"].get<long long>();
      if (k < 0) throw ConfigError("k must be >= 0");
      c.k = static_cast<std::size_t>(k);
    }
    if (j.contains("shot_order")) {
      const auto o = j["shot_order"].get<std::string>();
      if (o == "most-similar-first") {
        c.shot_order = ShotOrder::most_similar_first;
      } else if (o == "most-similar-last") {
        c.shot_order = ShotOrder::most_similar_last;
      } else {
        throw ConfigError("unknown shot_order \"" + o + "\"");
      }
    }
    if (j.contains("mode")) {
      auto m = parse_cache_mode(j["mode"].get<std::string>());
      if (!m) throw ConfigError("unknown mode " + j["mode"].dump());
      c.mode = *m;
    }
    if (j.contains("cache")) c.cache = resolve(base_dir, j["cache"].get<std::string>());
    if (c.mode != CacheMode::live && c.cache.empty()) throw ConfigError("replay and record modes need \"cache\"");
    if (j.contains("report")) c.report = resolve(base_dir, j["report"].get<std::string>());
    if (j.contains("thresholds")) {
      c.thresholds = j["thresholds"].get<std::vector<double>>();
      for (double t : c.thresholds) {
        if (!(t > 0.0 && t <= 1.0)) throw ConfigError("thresholds must be in (0, 1]");
      }
    }
    if (j.contains("parallelism")) {
      const auto p = j["parallelism"].get<long long>();
      if (p < 1) throw ConfigError("parallelism must be >= 1");
      c.parallelism = static_cast<std::size_t>(p);
    }
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("embeddings")) c.embeddings = resolve(base_dir, j["embeddings"].get<std::string>());
    if (j.contains("embedding_endpoint")) c.embedding_endpoint = j["embedding_endpoint"].get<std::string>();

    if (j.contains("completion")) {
      const json& cj = j["completion"];
      if (!cj.is_object()) throw ConfigError("completion must be an object");
      for (const auto& [key, _] : cj.items()) {
        if (!kCompletionKeys.contains(key)) throw ConfigError("unknown completion key \"" + key + "\"");
      }
      auto& cc = c.completion;
      cc.model = cj.value("model", cc.model);
      cc.temperature = cj.value("temperature", cc.temperature);
      cc.max_retries = cj.value("max_retries", cc.max_retries);
      cc.backoff_base = std::chrono::milliseconds(cj.value("backoff_base_ms", cc.backoff_base.count()));
      cc.request_timeout = std::chrono::milliseconds(cj.value("request_timeout_ms", cc.request_timeout.count()));
      cc.endpoint = cj.value("endpoint", cc.endpoint);
      cc.api_key_env = cj.value("api_key_env", cc.api_key_env);
      cc.max_concurrency = cj.value("max_concurrency", cc.max_concurrency);
      if (cj.contains("role_layout")) {
        auto r = parse_role_layout(cj["role_layout"].get<std::string>());
        if (!r) throw ConfigError("unknown role_layout " + cj["role_layout"].dump());
        cc.role_layout = *r;
      }
      if (cc.temperature < 0.0) throw ConfigError("temperature must be >= 0");
      if (cc.max_retries < 0) throw ConfigError("max_retries must be >= 0");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str(), path.parent_path());
}

std::string record_to_json(const RunRecord& r, bool include_timing) {
  ordered_json j;
  j["test_id"] = r.test_id;
  ordered_json shots = ordered_json::array();
  for (const auto& s : r.shots) {
    ordered_json sj;
    sj["id"] = s.id;
    sj["similarity"] = s.similarity ? ordered_json(*s.similarity) : ordered_json(nullptr);
    shots.push_back(std::move(sj));
  }
  j["shots"] = std::move(shots);
  j["prompt_digest"] = r.prompt_digest;
  j["raw_response"] = r.raw_response;
  j["parsed"] = quads_to_json(r.parsed);
  j["gold"] = quads_to_json(r.gold);
  ordered_json diags = ordered_json::array();
  for (const auto& d : r.diagnostics) {
    ordered_json dj;
    dj["severity"] = std::string(to_string(d.severity));
    dj["message"] = d.message;
    dj["begin"] = d.begin;
    dj["end"] = d.end;
    diags.push_back(std::move(dj));
  }
  j["diagnostics"] = std::move(diags);
  j["error"] = r.error ? ordered_json(*r.error) : ordered_json(nullptr);
  if (include_timing) {
    ordered_json t;
    t["started_at"] = r.started_at;
    t["elapsed_ms"] = r.elapsed_ms;
    j["timing"] = std::move(t);
  }
  return j.dump(-1, ' ', false, ordered_json::error_handler_t::replace);
}

LogError::LogError(const std::string& message, std::size_t line) : std::runtime_error(message), line_(line) {}

RunRecord record_from_json(std::string_view line, std::size_t line_no) {
  try {
    const json j = json::parse(line);
    RunRecord r;
    r.test_id = j.at("test_id").get<std::string>();
    for (const auto& s : j.at("shots")) {
      ShotRef ref{s.at("id").get<std::string>(), std::nullopt};
      if (!s.at("similarity").is_null()) ref.similarity = s.at("similarity").get<double>();
      r.shots.push_back(std::move(ref));
    }
    r.prompt_digest = j.at("prompt_digest").get<std::string>();
    r.raw_response = j.at("raw_response").get<std::string>();
    r.parsed = quads_from_json(j.at("parsed"));
    r.gold = quads_from_json(j.at("gold"));
    for (const auto& d : j.at("diagnostics")) {
      auto sev = parse_severity(d.at("severity").get<std::string>());
      if (!sev) throw std::invalid_argument("unknown severity");
      r.diagnostics.push_back({*sev, d.at("message").get<std::string>(), d.at("begin").get<std::size_t>(),
                               d.at("end").get<std::size_t>()});
    }
    if (!j.at("error").is_null()) r.error = j.at("error").get<std::string>();
    if (j.contains("timing")) {
      r.started_at = j["timing"].value("started_at", std::string{});
      r.elapsed_ms = j["timing"].value("elapsed_ms", 0.0);
    }
    return r;
  } catch (const std::exception& e) {
    throw LogError("line " + std::to_string(line_no) + ": corrupt run record: " + e.what(), line_no);
  }
}

std::vector<RunRecord> read_log(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LogError("cannot read log " + path.string(), 0);
  std::vector<RunRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      out.push_back(record_from_json(line, line_no));
    } catch (const LogError& e) {
      throw LogError(path.string() + ": " + e.what(), e.line());
    }
  }
  return out;
}

ReportSet score_records(std::span<const RunRecord> records, std::span<const double> thresholds) {
  std::vector<Prediction> data;
  data.reserve(records.size());
  for (const auto& r : records) {
    // A failed example contributes (0, 0, |gold|).
    data.push_back({r.error ? std::vector<Quadruple>{} : r.parsed, r.gold});
  }
  ReportSet out;
  out.exact = score_dataset(score_all(data, MatchPolicy::exact()));
  out.relaxed = threshold_sweep(data, thresholds);
  return out;
}

ReportSet report(const std::filesystem::path& log, std::span<const double> thresholds) {
  const auto records = read_log(log);
  return score_records(records, thresholds);
}

std::string report_json(const ReportSet& r) {
  auto score = [](const ScoreReport& s) {
    ordered_json j;
    j["true_positives"] = s.true_positives;
    j["num_predicted"] = s.num_predicted;
    j["num_gold"] = s.num_gold;
    j["precision"] = s.precision;
    j["recall"] = s.recall;
    j["f1"] = s.f1;
    return j;
  };
  ordered_json j;
  j["exact"] = score(r.exact);
  ordered_json relaxed = ordered_json::array();
  for (const auto& row : r.relaxed) {
    ordered_json rj;
    rj["threshold"] = row.threshold;
    const auto scored = score(row.report);
    for (const auto& [k, v] : scored.items()) rj[k] = v;
    relaxed.push_back(std::move(rj));
  }
  j["relaxed"] = std::move(relaxed);
  return j.dump(2);
}

std::string report_table(const ReportSet& r) {
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-14s %6s %6s %6s %9s %9s %9s\n", "match", "tp", "pred", "gold", "precision",
                "recall", "f1");
  out += buf;
  auto row = [&](const std::string& label, const ScoreReport& s) {
    std::snprintf(buf, sizeof buf, "%-14s %6zu %6zu %6zu %9.4f %9.4f %9.4f\n", label.c_str(), s.true_positives,
                  s.num_predicted, s.num_gold, s.precision, s.recall, s.f1);
    out += buf;
  };
  row("exact", r.exact);
  for (const auto& t : r.relaxed) {
    std::snprintf(buf, sizeof buf, "iou>=%.2f", t.threshold);
    row(buf, t.report);
  }
  return out;
}

std::shared_ptr<EmbeddingProvider> make_embedder(const ExperimentConfig& config) {
  std::shared_ptr<EmbeddingProvider> remote;
  if (config.embedding_endpoint) remote = std::make_shared<HttpEmbeddingProvider>(*config.embedding_endpoint);
  if (!config.embeddings) return remote;
  auto store = std::make_shared<PrecomputedEmbeddings>(PrecomputedEmbeddings::load(*config.embeddings));
  if (remote) store->set_fallback(remote);
  return store;
}

std::shared_ptr<LlmClient> make_client(const ExperimentConfig& config) {
  std::shared_ptr<ResponseCache> cache;
  if (!config.cache.empty()) cache = std::make_shared<ResponseCache>(config.cache);
  std::shared_ptr<ChatTransport> transport;
  if (config.mode != CacheMode::replay) transport = std::make_shared<HttpChatTransport>();
  return std::make_shared<LlmClient>(config.completion, config.mode, std::move(cache), std::move(transport),
                                     config.seed);
}

Experiment::Experiment(ExperimentConfig config, std::shared_ptr<LlmClient> client,
                       std::shared_ptr<EmbeddingProvider> embedder)
    : config_(std::move(config)), client_(std::move(client)), embedder_(std::move(embedder)) {
  if (!client_) throw ConfigError("experiment needs a completion client");
  train_ = load_corpus(config_.train, config_.format, Split::train).corpus;
  test_ = load_corpus(config_.test, config_.format, Split::test).corpus;
  if (train_.categories.empty()) throw ConfigError("training corpus has no categories to put in the prompt");
  std::unordered_set<std::string> train_ids;
  for (const auto& ex : train_.examples) train_ids.insert(ex.id);
  for (const auto& ex : test_.examples) {
    if (train_ids.contains(ex.id)) throw ConfigError("example id \"" + ex.id + "\" is in both train and test");
  }
  prepare_selection();
}

void Experiment::prepare_selection() {
  switch (config_.selection) {
    case Selection::knn_tfidf:
      if (!tfidf_ && !train_.examples.empty()) tfidf_ = TfidfIndex::build(train_);
      break;
    case Selection::knn_embed:
      if (!embedder_) throw EmbeddingError("knn-embed selection needs an embedding provider");
      if (!dense_) dense_ = DenseStore::build(train_, *embedder_);
      break;
    case Selection::random:
      if (config_.k > train_.examples.size()) {
        throw ConfigError("k = " + std::to_string(config_.k) + " exceeds the training corpus size");
      }
      break;
  }
}

std::vector<ShotRef> Experiment::select_shots(const Example& test_example) {
  prepare_selection();
  std::vector<ShotRef> shots;
  switch (config_.selection) {
    case Selection::knn_tfidf:
      if (tfidf_) {
        for (auto& n : select_knn(test_example.text, *tfidf_, config_.k)) shots.push_back({n.example_id, n.similarity});
      }
      break;
    case Selection::knn_embed: {
      DenseVector q;
      {
        std::lock_guard lock(embed_mu_);
        q = embedder_->embed(test_example.text);
      }
      for (auto& n : select_knn(q, *dense_, config_.k)) shots.push_back({n.example_id, n.similarity});
      break;
    }
    case Selection::random: {
      // Per-example stream so resumed and parallel runs draw the same shots.
      const std::uint64_t seed = config_.seed ^ std::stoull(text::sha256_hex(test_example.id).substr(0, 16), nullptr, 16);
      for (auto& id : select_random(train_, config_.k, seed)) shots.push_back({id, std::nullopt});
      break;
    }
  }
  return shots;
}

std::string Experiment::build_prompt(const Example& test_example, const std::vector<ShotRef>& shots) const {
  PromptSpec spec;
  spec.context_categories = train_.categories;
  spec.query_text = test_example.text;
  for (const auto& s : shots) {
    const Example* ex = train_.find(s.id);
    if (ex == nullptr) throw ConfigError("shot id \"" + s.id + "\" is not in the training corpus");
    spec.shots.push_back({ex->text, ex->quads});
  }
  if (config_.shot_order == ShotOrder::most_similar_last) std::reverse(spec.shots.begin(), spec.shots.end());
  return render_prompt(spec);
}

RunRecord Experiment::process(const Example& ex) {
  RunRecord r;
  r.test_id = ex.id;
  r.gold = ex.quads;
  r.started_at = utc_timestamp();
  const auto t0 = std::chrono::steady_clock::now();
  r.shots = select_shots(ex);
  const std::string prompt = build_prompt(ex, r.shots);
  r.prompt_digest = client_->key_for(prompt);
  try {
    r.raw_response = client_->complete(prompt);
    ParseResult parsed = parse_quads(r.raw_response, train_.categories);
    r.parsed = std::move(parsed.quads);
    r.diagnostics = std::move(parsed.diagnostics);
  } catch (const CompletionError& e) {
    r.error = e.what();
  }
  r.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

RunResult Experiment::run() {
  RunResult result;
  std::unordered_map<std::string, RunRecord> done;
  if (std::filesystem::exists(config_.log)) {
    trim_partial_tail(config_.log);
    std::unordered_set<std::string> test_ids;
    for (const auto& ex : test_.examples) test_ids.insert(ex.id);
    for (auto& r : read_log(config_.log)) {
      if (!test_ids.contains(r.test_id)) {
        throw ConfigError("log " + config_.log.string() + " has record for \"" + r.test_id +
                          "\", which is not in the test set");
      }
      done.insert_or_assign(r.test_id, std::move(r));
    }
  } else if (config_.log.has_parent_path()) {
    std::filesystem::create_directories(config_.log.parent_path());
  }
  result.resumed = done.size();

  std::ofstream out(config_.log, std::ios::binary | std::ios::app);
  if (!out) throw ConfigError("cannot open log " + config_.log.string());

  std::vector<const Example*> todo;
  for (const auto& ex : test_.examples) {
    if (!done.contains(ex.id)) todo.push_back(&ex);
  }
  // Replay has nothing to wait on, so it stays sequential.
  const std::size_t width = config_.mode == CacheMode::replay ? 1 : std::max<std::size_t>(config_.parallelism, 1);
  for (std::size_t start = 0; start < todo.size(); start += width) {
    const std::size_t end = std::min(todo.size(), start + width);
    std::vector<RunRecord> batch;
    if (end - start == 1) {
      batch.push_back(process(*todo[start]));
    } else {
      std::vector<std::future<RunRecord>> futures;
      for (std::size_t i = start; i < end; ++i) {
        futures.push_back(std::async(std::launch::async, [this, ex = todo[i]] { return process(*ex); }));
      }
      for (auto& f : futures) batch.push_back(f.get());
    }
    // Single writer, test order.
    for (auto& r : batch) {
      out << record_to_json(r) << '\n';
      out.flush();
      if (!out) throw ConfigError("failed writing log " + config_.log.string());
      done.insert_or_assign(r.test_id, std::move(r));
    }
  }

  for (const auto& ex : test_.examples) result.records.push_back(std::move(done.at(ex.id)));
  result.reports = score_records(result.records, config_.thresholds);
  if (config_.report) {
    std::ofstream rep(*config_.report, std::ios::binary | std::ios::trunc);
    rep << report_json(result.reports) << '\n';
  }
  return result;
}

std::vector<SweepRow> sweep_k(const ExperimentConfig& config, std::vector<std::size_t> k_values,
                              std::shared_ptr<LlmClient> client, std::shared_ptr<EmbeddingProvider> embedder) {
  if (k_values.empty()) throw ConfigError("sweep needs at least one k value");
  std::sort(k_values.begin(), k_values.end());
  std::vector<SweepRow> rows;
  for (std::size_t k : k_values) {
    ExperimentConfig c = config;
    c.k = k;
    c.log = sibling_log(config.log, "k" + std::to_string(k));
    c.report.reset();
    Experiment exp(std::move(c), client, embedder);
    rows.push_back({std::to_string(k), exp.run().reports});
  }
  return rows;
}

std::vector<SweepRow> sweep_selection(const ExperimentConfig& config, const std::vector<Selection>& methods,
                                      std::shared_ptr<LlmClient> client, std::shared_ptr<EmbeddingProvider> embedder) {
  if (methods.empty()) throw ConfigError("sweep needs at least one selection method");
  std::vector<SweepRow> rows;
  for (Selection m : methods) {
    ExperimentConfig c = config;
    c.selection = m;
    c.log = sibling_log(config.log, std::string(to_string(m)));
    c.report.reset();
    Experiment exp(std::move(c), client, embedder);
    rows.push_back({std::string(to_string(m)), exp.run().reports});
  }
  return rows;
}

std::string sweep_rows_csv(std::string_view key_column, std::span<const SweepRow> rows) {
  std::string out = std::string(key_column) + ",precision,recall,f1\n";
  for (const auto& r : rows) {
    out += r.label + "," + format_number(r.reports.exact.precision) + "," + format_number(r.reports.exact.recall) +
           "," + format_number(r.reports.exact.f1) + "\n";
  }
  return out;
}

}  // namespace absa
