#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "absa/dataset.hpp"

namespace absa {

enum class Severity { info, warning, error };

std::string_view to_string(Severity s);

struct Diagnostic {
  Severity severity = Severity::info;
  std::string message;
  // Byte range in the raw response.
  std::size_t begin = 0;
  std::size_t end = 0;
};

struct ParseResult {
  std::vector<Quadruple> quads;
  std::vector<Diagnostic> diagnostics;

  bool has_errors() const;
};

// Extracts the first bracketed list of parenthesized 4-tuples from a model
// response. Never throws: every problem becomes a diagnostic. Quads with the
// wrong arity, an implicit or empty category, an empty term or an unknown
// sentiment are dropped; categories outside the inventory are kept with a
// warning. An empty inventory disables that check.
ParseResult parse_quads(std::string_view raw, const std::vector<std::string>& category_inventory = {});

// Lowercase, trim, collapse whitespace; "null" in any case is the implicit
// marker (std::nullopt), which no surface string equals.
Term normalize_term(std::string_view term);
Term normalize_term(const Term& term);
std::string normalize_category(std::string_view category);
Quadruple normalize(const Quadruple& q);

}  // namespace absa
