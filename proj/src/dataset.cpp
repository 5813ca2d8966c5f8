#include "absa/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "absa/text.hpp"

namespace absa {
namespace {

using nlohmann::json;

std::string line_msg(std::size_t line, const std::string& what) {
  return "line " + std::to_string(line) + ": " + what;
}

Term term_from_json(const json& j, const char* field, std::size_t line) {
  if (j.is_null()) return std::nullopt;
  if (!j.is_string()) throw DatasetError(line_msg(line, std::string(field) + " must be a string or null"), line);
  return j.get<std::string>();
}

json term_to_json(const Term& t) { return t ? json(*t) : json(nullptr); }

Sentiment sentiment_or_throw(std::string_view label, std::size_t line) {
  auto s = parse_sentiment(label);
  if (!s) throw DatasetError(line_msg(line, "unknown sentiment \"" + std::string(label) + "\""), line);
  return *s;
}

std::vector<std::string_view> split_lines(std::string_view content) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < content.size()) {
    std::size_t nl = content.find('\n', start);
    if (nl == std::string_view::npos) nl = content.size();
    std::string_view l = content.substr(start, nl - start);
    if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
    lines.push_back(l);
    start = nl + 1;
  }
  return lines;
}

std::vector<std::string_view> split_on(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(s.substr(start));
      return parts;
    }
    parts.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

// "FOOD#STYLE_OPTIONS" -> "food style_options"
std::string acos_category(std::string_view raw) {
  std::string out = text::to_lower(raw);
  std::replace(out.begin(), out.end(), '#', ' ');
  return out;
}

Term span_to_term(std::string_view span, const std::vector<std::string>& tokens, std::size_t line) {
  auto parts = split_on(span, ',');
  if (parts.size() != 2) throw DatasetError(line_msg(line, "bad span \"" + std::string(span) + "\""), line);
  int begin = 0;
  int end = 0;
  try {
    begin = std::stoi(std::string(parts[0]));
    end = std::stoi(std::string(parts[1]));
  } catch (const std::exception&) {
    throw DatasetError(line_msg(line, "bad span \"" + std::string(span) + "\""), line);
  }
  if (begin == -1 && end == -1) return std::nullopt;
  if (begin < 0 || end <= begin || static_cast<std::size_t>(end) > tokens.size()) {
    throw DatasetError(line_msg(line, "span \"" + std::string(span) + "\" out of range"), line);
  }
  std::string out;
  for (int i = begin; i < end; ++i) {
    if (i > begin) out.push_back(' ');
    out += tokens[static_cast<std::size_t>(i)];
  }
  return out;
}

// Layout: "<sentence>\t<a_begin>,<a_end> <CATEGORY> <0|1|2> <o_begin>,<o_end>\t..."
// Spans index whitespace tokens, end-exclusive, -1,-1 for implicit.
Example parse_acos_tsv_line(std::string_view line, std::size_t line_no) {
  auto fields = split_on(line, '\t');
  Example ex;
  ex.text = std::string(text::trim(fields[0]));
  std::vector<std::string> tokens;
  {
    std::istringstream ss(ex.text);
    std::string tok;
    while (ss >> tok) tokens.push_back(tok);
  }
  for (std::size_t i = 1; i < fields.size(); ++i) {
    std::string_view f = text::trim(fields[i]);
    if (f.empty()) continue;
    std::istringstream ss{std::string(f)};
    std::string aspect_span, category, sentiment, opinion_span, extra;
    if (!(ss >> aspect_span >> category >> sentiment >> opinion_span) || (ss >> extra)) {
      throw DatasetError(line_msg(line_no, "expected 4 fields in quad \"" + std::string(f) + "\""), line_no);
    }
    Quadruple q;
    q.aspect = span_to_term(aspect_span, tokens, line_no);
    q.category = acos_category(category);
    q.opinion = span_to_term(opinion_span, tokens, line_no);
    if (sentiment == "0") {
      q.sentiment = Sentiment::negative;
    } else if (sentiment == "1") {
      q.sentiment = Sentiment::neutral;
    } else if (sentiment == "2") {
      q.sentiment = Sentiment::positive;
    } else {
      q.sentiment = sentiment_or_throw(sentiment, line_no);
    }
    ex.quads.push_back(std::move(q));
  }
  return ex;
}

// Reads a Python literal like [['food', 'food quality', 'positive', 'great']].
class PyListReader {
 public:
  PyListReader(std::string_view s, std::size_t line) : s_(s), line_(line) {}

  std::vector<std::vector<std::string>> read() {
    std::vector<std::vector<std::string>> rows;
    expect('[');
    skip_ws();
    if (peek() == ']') {
      ++pos_;
      return rows;
    }
    for (;;) {
      rows.push_back(read_row());
      skip_ws();
      char c = next();
      if (c == ']') break;
      if (c != ',') fail("expected ',' or ']'");
    }
    return rows;
  }

 private:
  std::vector<std::string> read_row() {
    std::vector<std::string> row;
    expect('[');
    for (;;) {
      skip_ws();
      row.push_back(read_string());
      skip_ws();
      char c = next();
      if (c == ']') break;
      if (c != ',') fail("expected ',' or ']'");
    }
    return row;
  }

  std::string read_string() {
    char quote = next();
    if (quote != '\'' && quote != '"') fail("expected quoted string");
    std::string out;
    for (;;) {
      char c = next();
      if (c == quote) return out;
      if (c == '\\') c = next();
      out.push_back(c);
    }
  }

  void expect(char c) {
    skip_ws();
    if (next() != c) fail(std::string("expected '") + c + "'");
  }
  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }
  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
  char next() {
    if (pos_ >= s_.size()) fail("unexpected end of quad list");
    return s_[pos_++];
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw DatasetError(line_msg(line_, what + " at column " + std::to_string(pos_ + 1)), line_);
  }

  std::string_view s_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

// Layout: "<sentence>####[['aspect', 'category', 'sentiment', 'opinion'], ...]"
// with the literal NULL for implicit terms.
Example parse_paraphrase_line(std::string_view line, std::size_t line_no) {
  const std::size_t sep = line.find("####");
  if (sep == std::string_view::npos) throw DatasetError(line_msg(line_no, "missing '####' separator"), line_no);
  Example ex;
  ex.text = std::string(text::trim(line.substr(0, sep)));
  PyListReader reader(line.substr(sep + 4), line_no);
  for (auto& row : reader.read()) {
    if (row.size() != 4) throw DatasetError(line_msg(line_no, "expected 4 elements per quad"), line_no);
    Quadruple q;
    auto term = [](const std::string& s) -> Term {
      if (text::iequals(s, "null")) return std::nullopt;
      return s;
    };
    q.aspect = term(row[0]);
    q.category = row[1];
    q.sentiment = sentiment_or_throw(row[2], line_no);
    q.opinion = term(row[3]);
    ex.quads.push_back(std::move(q));
  }
  return ex;
}

bool contains_words(const std::vector<std::string>& hay, const std::vector<std::string>& needle) {
  if (needle.empty()) return true;
  return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

}  // namespace

DatasetError::DatasetError(const std::string& message, std::size_t line)
    : std::runtime_error(message), line_(line) {}

std::string_view to_string(Sentiment s) {
  switch (s) {
    case Sentiment::positive: return "positive";
    case Sentiment::negative: return "negative";
    case Sentiment::neutral: return "neutral";
  }
  return "neutral";
}

std::optional<Sentiment> parse_sentiment(std::string_view label) {
  const std::string l = text::fold(label);
  if (l == "positive") return Sentiment::positive;
  if (l == "negative") return Sentiment::negative;
  if (l == "neutral") return Sentiment::neutral;
  return std::nullopt;
}

std::string_view to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::validation: return "validation";
    case Split::test: return "test";
  }
  return "train";
}

std::optional<CorpusFormat> parse_corpus_format(std::string_view id) {
  if (id == "canonical-jsonl" || id == "jsonl") return CorpusFormat::canonical_jsonl;
  if (id == "acos-tsv") return CorpusFormat::acos_tsv;
  if (id == "paraphrase") return CorpusFormat::paraphrase_hash;
  return std::nullopt;
}

const Example* Corpus::find(std::string_view id) const {
  for (const auto& ex : examples) {
    if (ex.id == id) return &ex;
  }
  return nullptr;
}

Example example_from_json_line(std::string_view line, std::size_t line_no) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw DatasetError(line_msg(line_no, std::string("malformed JSON: ") + e.what()), line_no);
  }
  if (!j.is_object()) throw DatasetError(line_msg(line_no, "record must be a JSON object"), line_no);
  auto require = [&](const json& obj, const char* key) -> const json& {
    auto it = obj.find(key);
    if (it == obj.end()) throw DatasetError(line_msg(line_no, std::string("missing field \"") + key + "\""), line_no);
    return *it;
  };

  Example ex;
  const json& id = require(j, "id");
  if (!id.is_string()) throw DatasetError(line_msg(line_no, "id must be a string"), line_no);
  ex.id = id.get<std::string>();
  const json& txt = require(j, "text");
  if (!txt.is_string()) throw DatasetError(line_msg(line_no, "text must be a string"), line_no);
  ex.text = txt.get<std::string>();

  const json& quads = require(j, "quads");
  if (!quads.is_array()) throw DatasetError(line_msg(line_no, "quads must be an array"), line_no);
  for (const auto& qj : quads) {
    if (!qj.is_object()) throw DatasetError(line_msg(line_no, "quad must be an object"), line_no);
    Quadruple q;
    q.aspect = term_from_json(require(qj, "aspect"), "aspect", line_no);
    q.opinion = term_from_json(require(qj, "opinion"), "opinion", line_no);
    const json& cat = require(qj, "category");
    if (!cat.is_string() || cat.get<std::string>().empty()) {
      throw DatasetError(line_msg(line_no, "category must be a non-empty string"), line_no);
    }
    q.category = cat.get<std::string>();
    const json& sent = require(qj, "sentiment");
    if (!sent.is_string()) throw DatasetError(line_msg(line_no, "sentiment must be a string"), line_no);
    q.sentiment = sentiment_or_throw(sent.get<std::string>(), line_no);
    ex.quads.push_back(std::move(q));
  }
  return ex;
}

LoadResult parse_corpus(std::string_view content, CorpusFormat format, Split split, std::string_view id_prefix) {
  LoadResult result;
  result.corpus.split = split;
  std::unordered_set<std::string> seen;
  const auto lines = split_lines(content);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    if (text::trim(lines[i]).empty()) continue;
    Example ex;
    switch (format) {
      case CorpusFormat::canonical_jsonl:
        ex = example_from_json_line(lines[i], line_no);
        break;
      case CorpusFormat::acos_tsv:
        ex = parse_acos_tsv_line(lines[i], line_no);
        ex.id = std::string(id_prefix) + std::to_string(line_no);
        break;
      case CorpusFormat::paraphrase_hash:
        ex = parse_paraphrase_line(lines[i], line_no);
        ex.id = std::string(id_prefix) + std::to_string(line_no);
        break;
    }
    if (text::trim(ex.text).empty()) throw DatasetError(line_msg(line_no, "empty text"), line_no);
    if (!seen.insert(ex.id).second) throw DatasetError(line_msg(line_no, "duplicate id \"" + ex.id + "\""), line_no);
    for (auto& msg : validate_example(ex)) result.warnings.push_back({ex.id, line_no, std::move(msg)});
    result.corpus.examples.push_back(std::move(ex));
  }
  refresh_categories(result.corpus);
  return result;
}

LoadResult load_corpus(const std::filesystem::path& path, CorpusFormat format, Split split) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw DatasetError("cannot read " + path.string());
  const std::string prefix = format == CorpusFormat::canonical_jsonl ? "" : path.stem().string() + ":";
  try {
    return parse_corpus(ss.str(), format, split, prefix);
  } catch (const DatasetError& e) {
    throw DatasetError(path.string() + ": " + e.what(), e.line());
  }
}

std::string to_jsonl(const Example& ex) {
  json quads = json::array();
  for (const auto& q : ex.quads) {
    json qj = json::object();
    qj["aspect"] = term_to_json(q.aspect);
    qj["category"] = q.category;
    qj["opinion"] = term_to_json(q.opinion);
    qj["sentiment"] = std::string(to_string(q.sentiment));
    quads.push_back(std::move(qj));
  }
  // nlohmann orders object keys lexicographically: id, quads, text.
  json j = {{"id", ex.id}, {"text", ex.text}, {"quads", std::move(quads)}};
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

std::string to_jsonl(const Corpus& corpus) {
  std::string out;
  for (const auto& ex : corpus.examples) {
    out += to_jsonl(ex);
    out.push_back('\n');
  }
  return out;
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DatasetError("cannot write " + path.string());
  out << to_jsonl(corpus);
  if (!out) throw DatasetError("failed writing " + path.string());
}

std::vector<std::string> category_inventory(const Corpus& corpus) {
  std::set<std::string> cats;
  for (const auto& ex : corpus.examples) {
    for (const auto& q : ex.quads) cats.insert(q.category);
  }
  return {cats.begin(), cats.end()};
}

void refresh_categories(Corpus& corpus) { corpus.categories = category_inventory(corpus); }

std::vector<std::string> validate_example(const Example& ex) {
  std::vector<std::string> warnings;
  const auto text_words = text::words(ex.text);
  auto check = [&](const Term& t, const char* role, std::size_t idx) {
    if (!t) return false;
    if (contains_words(text_words, text::words(*t))) return false;
    warnings.push_back("quad " + std::to_string(idx) + ": " + role + " \"" + *t + "\" not found in text");
    return true;
  };
  for (std::size_t i = 0; i < ex.quads.size(); ++i) {
    // One warning per offending quad.
    if (!check(ex.quads[i].aspect, "aspect", i)) check(ex.quads[i].opinion, "opinion", i);
  }
  return warnings;
}

}  // namespace absa
