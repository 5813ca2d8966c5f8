#include "absa/parser.hpp"

#include <algorithm>

#include "absa/text.hpp"

namespace absa {
namespace {

bool is_ws(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

std::size_t skip_ws(std::string_view s, std::size_t pos) {
  while (pos < s.size() && is_ws(s[pos])) ++pos;
  return pos;
}

// Strips one layer of matching quotes, ASCII or UTF-8 curly.
std::string_view unquote(std::string_view s) {
  s = text::trim(s);
  static constexpr std::pair<std::string_view, std::string_view> kPairs[] = {
      {"'", "'"}, {"\"", "\""}, {"`", "`"}, {"‘", "’"}, {"“", "”"}};
  for (const auto& [open, close] : kPairs) {
    if (s.size() >= open.size() + close.size() && s.starts_with(open) && s.ends_with(close)) {
      return text::trim(s.substr(open.size(), s.size() - open.size() - close.size()));
    }
  }
  return s;
}

struct RawTuple {
  std::size_t begin = 0;  // at '('
  std::size_t end = 0;    // one past ')'
  std::vector<std::string_view> elements;
};

class ListScanner {
 public:
  ListScanner(std::string_view s, ParseResult& out) : s_(s), out_(out) {}

  // Attempts a list at s_[open] == '['. Returns false when the bracket does
  // not start a tuple list, leaving no diagnostics behind.
  bool scan(std::size_t open, std::vector<RawTuple>& tuples) {
    std::size_t pos = skip_ws(s_, open + 1);
    if (pos < s_.size() && s_[pos] == ']') return true;
    if (pos >= s_.size() || s_[pos] != '(') return false;
    for (;;) {
      RawTuple t;
      if (!read_tuple(pos, t)) return true;
      tuples.push_back(std::move(t));
      pos = skip_ws(s_, tuples.back().end);
      if (pos >= s_.size()) {
        diag(Severity::warning, "tuple list not closed", open, s_.size());
        return true;
      }
      if (s_[pos] == ']') return true;
      if (s_[pos] == ',') {
        pos = skip_ws(s_, pos + 1);
        if (pos < s_.size() && s_[pos] == ']') return true;
        if (pos < s_.size() && s_[pos] == '(') continue;
      } else if (s_[pos] == '(') {
        diag(Severity::warning, "missing comma between tuples", pos, pos + 1);
        continue;
      }
      diag(Severity::warning, "tuple list not closed", open, pos);
      return true;
    }
  }

 private:
  bool read_tuple(std::size_t open, RawTuple& t) {
    t.begin = open;
    int depth = 0;
    std::size_t elem_start = open + 1;
    for (std::size_t i = open; i < s_.size(); ++i) {
      const char c = s_[i];
      if (c == '(') {
        ++depth;
      } else if (c == ')') {
        if (--depth == 0) {
          t.elements.push_back(s_.substr(elem_start, i - elem_start));
          t.end = i + 1;
          return true;
        }
      } else if (c == ',' && depth == 1) {
        t.elements.push_back(s_.substr(elem_start, i - elem_start));
        elem_start = i + 1;
      }
    }
    diag(Severity::error, "unterminated tuple", open, s_.size());
    return false;
  }

  void diag(Severity sev, std::string msg, std::size_t b, std::size_t e) {
    out_.diagnostics.push_back({sev, std::move(msg), b, e});
  }

  std::string_view s_;
  ParseResult& out_;
};

}  // namespace

std::string_view to_string(Severity s) {
  switch (s) {
    case Severity::info: return "info";
    case Severity::warning: return "warning";
    case Severity::error: return "error";
  }
  return "info";
}

bool ParseResult::has_errors() const {
  return std::any_of(diagnostics.begin(), diagnostics.end(),
                     [](const Diagnostic& d) { return d.severity == Severity::error; });
}

Term normalize_term(std::string_view term) {
  std::string folded = text::fold(term);
  if (folded == "null") return std::nullopt;
  return folded;
}

Term normalize_term(const Term& term) {
  if (!term) return std::nullopt;
  return normalize_term(std::string_view(*term));
}

std::string normalize_category(std::string_view category) { return text::fold(category); }

Quadruple normalize(const Quadruple& q) {
  return {normalize_term(q.aspect), normalize_category(q.category), normalize_term(q.opinion), q.sentiment};
}

ParseResult parse_quads(std::string_view raw, const std::vector<std::string>& category_inventory) {
  ParseResult result;
  std::vector<std::string> inventory;
  inventory.reserve(category_inventory.size());
  for (const auto& c : category_inventory) inventory.push_back(normalize_category(c));

  // Leading prose, "Output:" prefixes and code fences are skipped by taking
  // the first '[' that opens a tuple list.
  std::vector<RawTuple> tuples;
  bool found = false;
  ListScanner scanner(raw, result);
  for (std::size_t pos = raw.find('['); pos != std::string_view::npos; pos = raw.find('[', pos + 1)) {
    if (scanner.scan(pos, tuples)) {
      found = true;
      break;
    }
  }
  if (!found) {
    result.diagnostics.push_back({Severity::error, "no tuple list found", 0, raw.size()});
    return result;
  }

  for (const auto& t : tuples) {
    auto drop = [&](std::string msg) { result.diagnostics.push_back({Severity::warning, std::move(msg), t.begin, t.end}); };
    if (t.elements.size() != 4) {
      drop("dropped tuple with " + std::to_string(t.elements.size()) + " elements");
      continue;
    }
    std::string_view elems[4];
    for (int i = 0; i < 4; ++i) elems[i] = unquote(t.elements[static_cast<std::size_t>(i)]);

    auto term = [](std::string_view e) -> Term {
      if (text::iequals(e, "null")) return std::nullopt;
      return std::string(e);
    };
    Quadruple q;
    q.aspect = term(elems[0]);
    q.opinion = term(elems[2]);
    if ((q.aspect && q.aspect->empty()) || (q.opinion && q.opinion->empty())) {
      drop("dropped tuple with an empty term");
      continue;
    }
    if (elems[1].empty() || text::iequals(elems[1], "null")) {
      drop("dropped tuple without a category");
      continue;
    }
    q.category = std::string(elems[1]);
    auto sentiment = parse_sentiment(elems[3]);
    if (!sentiment) {
      drop("dropped tuple with unknown sentiment \"" + std::string(elems[3]) + "\"");
      continue;
    }
    q.sentiment = *sentiment;
    if (!inventory.empty() &&
        std::find(inventory.begin(), inventory.end(), normalize_category(q.category)) == inventory.end()) {
      result.diagnostics.push_back(
          {Severity::warning, "category \"" + q.category + "\" is not in the inventory", t.begin, t.end});
    }
    result.quads.push_back(std::move(q));
  }
  return result;
}

}  // namespace absa
