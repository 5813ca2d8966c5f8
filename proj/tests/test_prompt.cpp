#include <doctest.h>

#include <fstream>
#include <sstream>

#include "absa/parser.hpp"
#include "absa/prompt.hpp"
#include "prompt_fixtures.hpp"

using namespace absa;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t count(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("render_shot") {
  Example fig1{"r1",
               "Looks nice and the surface is smooth, but certain apps take seconds to respond.",
               {{"surface", "Design", "smooth", Sentiment::positive},
                {std::nullopt, "Design", "nice", Sentiment::positive},
                {"apps", "Software", std::nullopt, Sentiment::negative}}};
  // Sentiment is stored lowercase, so it renders lowercase.
  CHECK(render_shot(fig1) ==
        "Input: Looks nice and the surface is smooth, but certain apps take seconds to respond.\n"
        "Output: [(surface, Design, smooth, positive), (null, Design, nice, positive), (apps, Software, null, negative)]");

  CHECK(render_shot(Example{"e", "nothing here", {}}) == "Input: nothing here\nOutput: []");
  CHECK(render_shot(Example{"p", "it was really good pizza .", {{"pizza", "food quality", "good", Sentiment::positive}}}) ==
        "Input: it was really good pizza .\nOutput: [(pizza, food quality, good, positive)]");
}

TEST_CASE("restaurant prompt matches the golden file byte for byte") {
  const auto golden = read_file(ABSA_TEST_DATA_DIR "/worked_prompt.golden.txt");
  REQUIRE(!golden.empty());
  CHECK(render_prompt(fixtures::restaurant_prompt_spec()) == golden);
}

TEST_CASE("zero-shot prompt omits the examples sentence") {
  auto spec = fixtures::restaurant_prompt_spec();
  spec.shots.clear();
  const auto p = render_prompt(spec);
  CHECK(p.find("You can learn from the following examples.") == std::string::npos);
  CHECK(count(p, "Output: [") == 0);
  CHECK(p.ends_with("Input: serves really good sushi .\nOutput:"));
}

TEST_CASE("render_prompt invariants") {
  const auto spec = fixtures::restaurant_prompt_spec();
  const auto p = render_prompt(spec);
  CHECK(p == render_prompt(spec));
  CHECK(count(p, "Output: [") == spec.shots.size());
  CHECK(count(p, "\nOutput:") == spec.shots.size() + 1);
  CHECK(p.ends_with("\nOutput:"));
  for (const auto& c : spec.context_categories) CHECK(count(p, "'" + c + "'") == 1);
  // No trailing whitespace on any line.
  std::istringstream lines(p);
  for (std::string line; std::getline(lines, line);) CHECK((line.empty() || line.back() != ' '));
}

TEST_CASE("render_prompt preconditions") {
  auto spec = fixtures::restaurant_prompt_spec();
  spec.context_categories.clear();
  CHECK_THROWS_AS(render_prompt(spec), std::invalid_argument);
  spec = fixtures::restaurant_prompt_spec();
  spec.query_text = "  ";
  CHECK_THROWS_AS(render_prompt(spec), std::invalid_argument);
}

TEST_CASE("rendered shots parse back to their quads") {
  Example ex{"x", "t",
             {{"the Surface", "Design", "smooth", Sentiment::positive},
              {std::nullopt, "laptop general", std::nullopt, Sentiment::neutral},
              {"apps", "Software", "slow", Sentiment::negative}}};
  const auto shot = render_shot(ex);
  const auto parsed = parse_quads(shot.substr(shot.find("Output: ")));
  REQUIRE(parsed.quads.size() == ex.quads.size());
  for (std::size_t i = 0; i < ex.quads.size(); ++i) CHECK(normalize(parsed.quads[i]) == normalize(ex.quads[i]));
}
