#pragma once

#include <string>
#include <vector>

#include "absa/prompt.hpp"

namespace fixtures {

inline const std::vector<std::string>& restaurant_categories() {
  static const std::vector<std::string> cats = {
      "restaurant general", "service general",   "food quality",      "food style_options",
      "drinks style_options", "drinks prices",   "restaurant prices", "ambience general",
      "restaurant miscellaneous", "food prices", "location general",  "drinks quality"};
  return cats;
}

// The worked restaurant prompt: three pizza/fish/sushi shots and a sushi query.
inline absa::PromptSpec restaurant_prompt_spec() {
  using absa::Quadruple;
  using absa::Sentiment;
  absa::PromptSpec spec;
  spec.context_categories = restaurant_categories();
  spec.shots = {
      {"it was really good pizza .", {Quadruple{"pizza", "food quality", "good", Sentiment::positive}}},
      {"the fish was really , really fresh .", {Quadruple{"fish", "food quality", "fresh", Sentiment::positive}}},
      {"great sushi experience .", {Quadruple{"sushi", "food quality", "great", Sentiment::positive}}},
  };
  spec.query_text = "serves really good sushi .";
  return spec;
}

}  // namespace fixtures
