#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "absa/dataset.hpp"

using namespace absa;

namespace {

const char* kWorkedQuadsLine =
    R"({"id":"r1","text":"Looks nice and the surface is smooth, but certain apps take seconds to respond","quads":[{"aspect":"surface","category":"Design","opinion":"smooth","sentiment":"positive"},{"aspect":null,"category":"Design","opinion":"nice","sentiment":"positive"},{"aspect":"apps","category":"Software","opinion":null,"sentiment":"negative"}]})";

}  // namespace

TEST_CASE("canonical line with implicit terms") {
  const auto r = parse_corpus(kWorkedQuadsLine, CorpusFormat::canonical_jsonl);
  REQUIRE(r.corpus.examples.size() == 1);
  const auto& ex = r.corpus.examples[0];
  CHECK(ex.id == "r1");
  REQUIRE(ex.quads.size() == 3);
  CHECK(ex.quads[0] == Quadruple{"surface", "Design", "smooth", Sentiment::positive});
  CHECK(ex.quads[1] == Quadruple{std::nullopt, "Design", "nice", Sentiment::positive});
  CHECK(ex.quads[2] == Quadruple{"apps", "Software", std::nullopt, Sentiment::negative});
  CHECK(r.warnings.empty());
  CHECK(r.corpus.categories == std::vector<std::string>{"Design", "Software"});
}

TEST_CASE("empty input gives an empty corpus") {
  const auto r = parse_corpus("", CorpusFormat::canonical_jsonl);
  CHECK(r.corpus.examples.empty());
  CHECK(r.corpus.categories.empty());
}

TEST_CASE("unknown sentiment names line and value") {
  const std::string content =
      std::string(kWorkedQuadsLine) + "\n" +
      R"({"id":"r2","text":"ok","quads":[{"aspect":null,"category":"X","opinion":"ok","sentiment":"mixed"}]})";
  try {
    parse_corpus(content, CorpusFormat::canonical_jsonl);
    FAIL("expected DatasetError");
  } catch (const DatasetError& e) {
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find("mixed") != std::string::npos);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("malformed records are rejected with positions") {
  CHECK_THROWS_AS(parse_corpus("{not json", CorpusFormat::canonical_jsonl), DatasetError);
  CHECK_THROWS_AS(parse_corpus(R"({"id":"a","text":"   ","quads":[]})", CorpusFormat::canonical_jsonl), DatasetError);
  CHECK_THROWS_AS(parse_corpus(R"({"id":"a","text":"x","quads":[{"aspect":null,"category":null,"opinion":null,"sentiment":"positive"}]})",
                               CorpusFormat::canonical_jsonl),
                  DatasetError);
  CHECK_THROWS_AS(parse_corpus("{\"id\":\"a\",\"text\":\"x\",\"quads\":[]}\n{\"id\":\"a\",\"text\":\"y\",\"quads\":[]}",
                               CorpusFormat::canonical_jsonl),
                  DatasetError);
  CHECK_THROWS_AS(load_corpus("/nonexistent/file.jsonl", CorpusFormat::canonical_jsonl), DatasetError);
}

TEST_CASE("sentiment casing is canonicalized") {
  const auto r = parse_corpus(
      R"({"id":"a","text":"great food","quads":[{"aspect":"food","category":"food quality","opinion":"great","sentiment":"Positive"}]})",
      CorpusFormat::canonical_jsonl);
  CHECK(r.corpus.examples[0].quads[0].sentiment == Sentiment::positive);
  CHECK(to_jsonl(r.corpus).find("\"positive\"") != std::string::npos);
}

TEST_CASE("category inventory") {
  Corpus c;
  c.examples.push_back({"a", "x", {{"x", "service general", std::nullopt, Sentiment::negative}}});
  c.examples.push_back({"b", "y", {{"y", "food quality", std::nullopt, Sentiment::positive},
                                   {"y", "service general", std::nullopt, Sentiment::neutral}}});
  const auto inv = category_inventory(c);
  CHECK(inv == std::vector<std::string>{"food quality", "service general"});
  CHECK(category_inventory(c) == inv);

  Corpus empty;
  empty.examples.push_back({"a", "x", {}});
  CHECK(category_inventory(empty).empty());
}

TEST_CASE("restaurant inventory holds the twelve prompt categories") {
  const std::vector<std::string> fig = {"restaurant general", "service general", "food quality",
                                        "food style_options", "drinks style_options", "drinks prices",
                                        "restaurant prices", "ambience general", "restaurant miscellaneous",
                                        "food prices", "location general", "drinks quality"};
  Corpus c;
  for (std::size_t i = 0; i < fig.size(); ++i) {
    c.examples.push_back({"e" + std::to_string(i), "text", {{std::nullopt, fig[i], std::nullopt, Sentiment::neutral}}});
  }
  auto sorted = fig;
  std::sort(sorted.begin(), sorted.end());
  CHECK(category_inventory(c) == sorted);
}

TEST_CASE("validate_example") {
  const auto fig1 = parse_corpus(kWorkedQuadsLine, CorpusFormat::canonical_jsonl).corpus.examples[0];
  CHECK(validate_example(fig1).empty());

  Example bad{"x", "great screen", {{"keyboard", "laptop", "great", Sentiment::positive}}};
  CHECK(validate_example(bad).size() == 1);

  Example implicit{"y", "meh", {{std::nullopt, "laptop", std::nullopt, Sentiment::neutral}}};
  CHECK(validate_example(implicit).empty());

  // Warnings do not stop loading.
  const auto r = parse_corpus(
      R"({"id":"a","text":"great screen","quads":[{"aspect":"keyboard","category":"laptop","opinion":"great","sentiment":"positive"}]})",
      CorpusFormat::canonical_jsonl);
  CHECK(r.corpus.examples.size() == 1);
  CHECK(r.warnings.size() == 1);
}

TEST_CASE("canonical serialization round-trips") {
  const std::string content = std::string(kWorkedQuadsLine) + "\n" +
                              R"({"id":"r2","text":"no opinions here","quads":[]})" + "\n";
  const auto first = parse_corpus(content, CorpusFormat::canonical_jsonl).corpus;
  const auto second = parse_corpus(to_jsonl(first), CorpusFormat::canonical_jsonl).corpus;
  CHECK(first.examples == second.examples);
  CHECK(first.categories == second.categories);
  // Identical bytes, identical corpus.
  CHECK(parse_corpus(content, CorpusFormat::canonical_jsonl).corpus.examples == first.examples);
}

TEST_CASE("acos-tsv import resolves spans to text") {
  const std::string line =
      "looks nice and the surface is smooth , but certain apps take seconds to respond\t"
      "4,5 LAPTOP#DESIGN_FEATURES 2 6,7\t-1,-1 LAPTOP#DESIGN_FEATURES 2 1,2\t10,11 SOFTWARE#GENERAL 0 -1,-1";
  const auto r = parse_corpus(line, CorpusFormat::acos_tsv, Split::train, "lap:");
  REQUIRE(r.corpus.examples.size() == 1);
  const auto& ex = r.corpus.examples[0];
  CHECK(ex.id == "lap:1");
  REQUIRE(ex.quads.size() == 3);
  CHECK(ex.quads[0] == Quadruple{"surface", "laptop design_features", "smooth", Sentiment::positive});
  CHECK(ex.quads[1] == Quadruple{std::nullopt, "laptop design_features", "nice", Sentiment::positive});
  CHECK(ex.quads[2] == Quadruple{"apps", "software general", std::nullopt, Sentiment::negative});
  CHECK(r.warnings.empty());

  CHECK_THROWS_AS(parse_corpus("a b\t0,9 X#Y 2 0,1", CorpusFormat::acos_tsv), DatasetError);
  CHECK_THROWS_AS(parse_corpus("a b\t0,1 X#Y 7 0,1", CorpusFormat::acos_tsv), DatasetError);
}

TEST_CASE("paraphrase import") {
  const auto r = parse_corpus(
      "the food was great but the service slow .####[['food', 'food quality', 'positive', 'great'], "
      "['service', 'service general', 'negative', 'slow'], ['NULL', 'restaurant general', 'neutral', 'NULL']]",
      CorpusFormat::paraphrase_hash, Split::test, "rest16:");
  REQUIRE(r.corpus.examples.size() == 1);
  const auto& ex = r.corpus.examples[0];
  CHECK(ex.text == "the food was great but the service slow .");
  REQUIRE(ex.quads.size() == 3);
  CHECK(ex.quads[0] == Quadruple{"food", "food quality", "great", Sentiment::positive});
  CHECK(ex.quads[2] == Quadruple{std::nullopt, "restaurant general", std::nullopt, Sentiment::neutral});
  CHECK_THROWS_AS(parse_corpus("text####[['a', 'b', 'positive']]", CorpusFormat::paraphrase_hash), DatasetError);
  CHECK_THROWS_AS(parse_corpus("text without separator", CorpusFormat::paraphrase_hash), DatasetError);
}

TEST_CASE("file load prefixes legacy ids with the file stem") {
  const auto dir = std::filesystem::temp_directory_path() / "absa_dataset_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "rest_test.tsv";
  {
    std::ofstream out(path);
    out << "good food\t1,2 FOOD#QUALITY 2 0,1\n";
  }
  const auto r = load_corpus(path, CorpusFormat::acos_tsv, Split::test);
  CHECK(r.corpus.examples[0].id == "rest_test:1");
  CHECK(r.corpus.split == Split::test);
  std::filesystem::remove_all(dir);
}
