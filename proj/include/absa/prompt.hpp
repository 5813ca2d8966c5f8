#pragma once

#include <string>
#include <vector>

#include "absa/dataset.hpp"

namespace absa {

inline constexpr const char* kDefaultInstruction =
    "extract aspect-category-opinion-sentiment quadruples from input data";

struct Shot {
  std::string text;
  std::vector<Quadruple> quads;
};

struct PromptSpec {
  std::string instruction = kDefaultInstruction;
  std::vector<std::string> context_categories;
  // Rendered in this order.
  std::vector<Shot> shots;
  std::string query_text;
};

enum class ShotOrder { most_similar_first, most_similar_last };

// "(aspect, category, opinion, sentiment)" with null for implicit terms.
std::string render_quad(const Quadruple& q);
// "[(...), (...)]"
std::string render_quads(const std::vector<Quadruple>& quads);
// "Input: <text>\nOutput: [...]"
std::string render_shot(const Shot& shot);
std::string render_shot(const Example& ex);

// Throws std::invalid_argument on an empty category list or empty query.
// Lines are '\n'-separated; the prompt ends with the bare "Output:" line and
// no trailing newline.
std::string render_prompt(const PromptSpec& spec);

}  // namespace absa
