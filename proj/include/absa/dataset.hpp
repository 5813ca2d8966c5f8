#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace absa {

// An aspect or opinion term. std::nullopt is the implicit ("null") marker.
using Term = std::optional<std::string>;

enum class Sentiment { positive, negative, neutral };

std::string_view to_string(Sentiment s);
// Case-insensitive; returns nullopt for anything outside the closed set.
std::optional<Sentiment> parse_sentiment(std::string_view label);

struct Quadruple {
  Term aspect;
  std::string category;
  Term opinion;
  Sentiment sentiment = Sentiment::neutral;

  friend bool operator==(const Quadruple&, const Quadruple&) = default;
};

struct Example {
  std::string id;
  std::string text;
  std::vector<Quadruple> quads;

  friend bool operator==(const Example&, const Example&) = default;
};

enum class Split { train, validation, test };

std::string_view to_string(Split s);

struct Corpus {
  Split split = Split::train;
  std::vector<Example> examples;
  // Sorted distinct category labels, derived from examples.
  std::vector<std::string> categories;

  const Example* find(std::string_view id) const;
};

// Import layouts. Canonical JSONL is the storage format; the others are the
// public ACOS distributions, see docs/formats.md.
enum class CorpusFormat { canonical_jsonl, acos_tsv, paraphrase_hash };

std::optional<CorpusFormat> parse_corpus_format(std::string_view id);

// Raised for unreadable files and malformed records. line is 1-based, 0 when
// the error is not tied to a line.
class DatasetError : public std::runtime_error {
 public:
  DatasetError(const std::string& message, std::size_t line = 0);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct Warning {
  std::string example_id;
  std::size_t line = 0;
  std::string message;
};

struct LoadResult {
  Corpus corpus;
  std::vector<Warning> warnings;
};

// Legacy formats carry no ids; imported examples get "<stem>:<line>" ids so
// that splits loaded side by side stay disjoint.
LoadResult load_corpus(const std::filesystem::path& path, CorpusFormat format,
                       Split split = Split::train);
LoadResult parse_corpus(std::string_view content, CorpusFormat format,
                        Split split = Split::train, std::string_view id_prefix = "");

// One canonical JSONL line per example, keys in fixed order.
std::string to_jsonl(const Example& ex);
std::string to_jsonl(const Corpus& corpus);
void write_corpus(const Corpus& corpus, const std::filesystem::path& path);
Example example_from_json_line(std::string_view line, std::size_t line_no = 0);

std::vector<std::string> category_inventory(const Corpus& corpus);
// Recomputes corpus.categories from the examples.
void refresh_categories(Corpus& corpus);

std::vector<std::string> validate_example(const Example& ex);

}  // namespace absa
