#include "absa/prompt.hpp"

#include <stdexcept>

#include "absa/text.hpp"

namespace absa {
namespace {

std::string term_text(const Term& t) { return t ? *t : "null"; }

}  // namespace

std::string render_quad(const Quadruple& q) {
  std::string out = "(";
  out += term_text(q.aspect);
  out += ", ";
  out += q.category;
  out += ", ";
  out += term_text(q.opinion);
  out += ", ";
  out += to_string(q.sentiment);
  out += ")";
  return out;
}

std::string render_quads(const std::vector<Quadruple>& quads) {
  std::string out = "[";
  for (std::size_t i = 0; i < quads.size(); ++i) {
    if (i > 0) out += ", ";
    out += render_quad(quads[i]);
  }
  out += "]";
  return out;
}

std::string render_shot(const Shot& shot) {
  return "Input: " + shot.text + "\nOutput: " + render_quads(shot.quads);
}

std::string render_shot(const Example& ex) { return render_shot(Shot{ex.text, ex.quads}); }

std::string render_prompt(const PromptSpec& spec) {
  if (spec.context_categories.empty()) throw std::invalid_argument("prompt needs at least one category");
  if (text::trim(spec.query_text).empty()) throw std::invalid_argument("prompt needs a non-empty query text");

  std::string out;
  out += "Instruction: " + spec.instruction + "\n";
  out += "Context: an aspect or opinion must be a term existing in input data or null if non-existing;\n";
  out += "the category is one in the predefined list: [";
  for (std::size_t i = 0; i < spec.context_categories.size(); ++i) {
    if (i > 0) out += ", ";
    out += "'" + spec.context_categories[i] + "'";
  }
  out += "];\n";
  out += "the sentiment is positive, negative or neutral;\n";
  out += "do not ask me for more information, I am unable to provide it, and just try your best to finish the task.\n";
  if (!spec.shots.empty()) out += "You can learn from the following examples.\n";
  out += "Output format: (aspect, category, opinion, sentiment)\n";
  for (const auto& shot : spec.shots) out += render_shot(shot) + "\n";
  out += "Input: " + spec.query_text + "\n";
  out += "Output:";
  return out;
}

}  // namespace absa
