// Rebuilds tests/data/e2e/cache.jsonl from responses.json by running the
// fixture experiment in record mode against a scripted backend.
//
//   fixture_cache_gen tests/data/e2e
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include <json.hpp>

#include "absa/experiment.hpp"

namespace {

class ScriptedBackend : public absa::ChatTransport {
 public:
  ScriptedBackend(std::map<std::string, std::string> by_text) : by_text_(std::move(by_text)) {}

  absa::http::Response send(const std::string& body, const absa::CompletionConfig&) override {
    const auto req = nlohmann::json::parse(body);
    const std::string prompt = req["messages"].back()["content"].get<std::string>();
    const auto start = prompt.rfind("\nInput: ") + 8;
    const auto end = prompt.rfind("\nOutput:");
    const std::string query = prompt.substr(start, end - start);
    const auto& answer = by_text_.at(query);
    const nlohmann::json reply = {{"choices", {{{"message", {{"role", "assistant"}, {"content", answer}}}}}}};
    return {200, reply.dump(), ""};
  }

 private:
  std::map<std::string, std::string> by_text_;
};

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: fixture_cache_gen <fixture-dir>\n";
    return 2;
  }
  const std::filesystem::path dir = argv[1];
  auto config = absa::load_config(dir / "config.json");
  std::filesystem::remove(config.cache);

  std::ifstream in(dir / "responses.json");
  const auto responses = nlohmann::json::parse(in);
  const auto test = absa::load_corpus(config.test, config.format, absa::Split::test).corpus;
  std::map<std::string, std::string> by_text;
  for (const auto& ex : test.examples) by_text[ex.text] = responses.at(ex.id).get<std::string>();

  auto client = std::make_shared<absa::LlmClient>(config.completion, absa::CacheMode::record,
                                                  std::make_shared<absa::ResponseCache>(config.cache),
                                                  std::make_shared<ScriptedBackend>(by_text));
  const auto scratch = std::filesystem::temp_directory_path() / "absa_fixture_gen";
  std::filesystem::remove_all(scratch);
  std::filesystem::create_directories(scratch);

  // Every prompt the test suites replay: the base run, a small k sweep and
  // seeded random selection.
  struct Variant {
    absa::Selection selection;
    std::size_t k;
  };
  const Variant variants[] = {{absa::Selection::knn_tfidf, 1}, {absa::Selection::knn_tfidf, 2},
                              {absa::Selection::knn_tfidf, 3}, {absa::Selection::knn_tfidf, 5},
                              {absa::Selection::random, 3}};
  for (const auto& v : variants) {
    auto c = config;
    c.mode = absa::CacheMode::record;
    c.selection = v.selection;
    c.k = v.k;
    c.log = scratch / ("gen_" + std::string(absa::to_string(v.selection)) + std::to_string(v.k) + ".jsonl");
    absa::Experiment exp(c, client);
    exp.run();
  }
  std::cout << "recorded " << client->live_calls() << " responses into " << config.cache.string() << "\n";
  std::filesystem::remove_all(scratch);
  return 0;
}
