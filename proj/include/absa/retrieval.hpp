#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "absa/dataset.hpp"

namespace absa {

// Serial kernels are the reference; parallel ones use OpenMP and must agree
// with them exactly.
enum class Exec { serial, parallel };

std::vector<std::string> tokenize(std::string_view text);

// Sorted by column, no explicit zeros.
struct SparseVector {
  std::vector<std::pair<std::uint32_t, double>> entries;
};

using DenseVector = std::vector<double>;

double dot(const SparseVector& u, const SparseVector& v);
double norm(const SparseVector& v);
// 0 when either vector is zero.
double cosine(const SparseVector& u, const SparseVector& v);
// Throws std::invalid_argument on dimension mismatch.
double cosine(std::span<const double> u, std::span<const double> v);

// TF-IDF over a training corpus. weight(t, d) = count(t, d) * idf(t) with
// idf(t) = ln((1 + N) / (1 + df(t))) + 1; every document vector is then
// L2-normalized.
class TfidfIndex {
 public:
  // Throws std::invalid_argument on an empty corpus.
  static TfidfIndex build(const Corpus& corpus);

  // Query vector under the training idf. Out-of-vocabulary terms carry no
  // weight since they cannot overlap any training document.
  SparseVector vectorize(std::string_view text) const;

  std::size_t num_docs() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }
  const std::vector<SparseVector>& vectors() const { return vectors_; }
  const std::unordered_map<std::string, std::uint32_t>& vocabulary() const { return vocabulary_; }
  // Document frequency by column id.
  const std::vector<std::uint32_t>& doc_freq() const { return doc_freq_; }
  double idf(std::string_view term) const;

 private:
  SparseVector weigh(const std::vector<std::string>& tokens) const;

  std::unordered_map<std::string, std::uint32_t> vocabulary_;
  std::vector<std::uint32_t> doc_freq_;
  std::vector<double> idf_;
  std::vector<std::string> ids_;
  std::vector<SparseVector> vectors_;
};

struct Neighbor {
  std::string example_id;
  std::size_t index = 0;  // training-order index
  double similarity = 0.0;
  std::size_t rank = 0;   // 1-based
};

// Cosine similarity of the query against every training document.
std::vector<double> similarity_scan(const TfidfIndex& index, const SparseVector& query, Exec exec);

// Top-k by similarity, ties by ascending training index; all of them when k
// exceeds the corpus.
std::vector<Neighbor> top_k(std::span<const double> similarities, std::span<const std::string> ids,
                            std::size_t k);

std::vector<Neighbor> select_knn(std::string_view query_text, const TfidfIndex& index, std::size_t k,
                                 Exec exec = Exec::parallel);

// k distinct ids uniformly without replacement, reproducible from seed on any
// platform. Throws std::invalid_argument when k exceeds the corpus.
std::vector<std::string> select_random(const Corpus& corpus, std::size_t k, std::uint64_t seed);

class EmbeddingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Lookup key for precomputed vectors: sha256 of the folded text.
std::string embedding_key(std::string_view text);

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual DenseVector embed(std::string_view text) = 0;
  virtual std::vector<DenseVector> embed_batch(std::span<const std::string> texts);
};

// POST {"texts": [...]} -> {"vectors": [[...]]}, order-preserving. Results are
// memoized so repeated texts always get the same vector.
class HttpEmbeddingProvider : public EmbeddingProvider {
 public:
  explicit HttpEmbeddingProvider(std::string endpoint, std::size_t batch_size = 64);
  DenseVector embed(std::string_view text) override;
  std::vector<DenseVector> embed_batch(std::span<const std::string> texts) override;

 private:
  std::string endpoint_;
  std::size_t batch_size_;
  std::unordered_map<std::string, DenseVector> memo_;
};

// JSONL of {"key": <embedding_key>, "vector": [...]}. Misses go to the
// fallback provider when one is set, otherwise raise EmbeddingError naming
// the key.
class PrecomputedEmbeddings : public EmbeddingProvider {
 public:
  static PrecomputedEmbeddings load(const std::filesystem::path& path);
  static PrecomputedEmbeddings parse(std::string_view jsonl);

  void insert(const std::string& key, DenseVector v);
  void set_fallback(std::shared_ptr<EmbeddingProvider> fallback) { fallback_ = std::move(fallback); }
  std::size_t size() const { return vectors_.size(); }

  DenseVector embed(std::string_view text) override;

 private:
  std::unordered_map<std::string, DenseVector> vectors_;
  std::shared_ptr<EmbeddingProvider> fallback_;
  std::size_t dim_ = 0;
};

// Embeddings of every training example, in training order.
class DenseStore {
 public:
  static DenseStore build(const Corpus& corpus, EmbeddingProvider& provider);

  std::size_t size() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }
  const std::vector<DenseVector>& vectors() const { return vectors_; }

 private:
  std::vector<std::string> ids_;
  std::vector<DenseVector> vectors_;
};

std::vector<double> similarity_scan(const DenseStore& store, std::span<const double> query, Exec exec);

std::vector<Neighbor> select_knn(std::span<const double> query, const DenseStore& store, std::size_t k,
                                 Exec exec = Exec::parallel);

}  // namespace absa
