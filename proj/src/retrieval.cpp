#include "absa/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "absa/http.hpp"
#include "absa/text.hpp"

namespace absa {

std::vector<std::string> tokenize(std::string_view text) { return text::words(text); }

double dot(const SparseVector& u, const SparseVector& v) {
  double sum = 0.0;
  auto a = u.entries.begin();
  auto b = v.entries.begin();
  while (a != u.entries.end() && b != v.entries.end()) {
    if (a->first < b->first) {
      ++a;
    } else if (b->first < a->first) {
      ++b;
    } else {
      sum += a->second * b->second;
      ++a;
      ++b;
    }
  }
  return sum;
}

double norm(const SparseVector& v) {
  double sq = 0.0;
  for (const auto& [_, w] : v.entries) sq += w * w;
  return std::sqrt(sq);
}

double cosine(const SparseVector& u, const SparseVector& v) {
  const double nu = norm(u);
  const double nv = norm(v);
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return dot(u, v) / (nu * nv);
}

double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw std::invalid_argument("dimension mismatch: " + std::to_string(u.size()) + " vs " +
                                std::to_string(v.size()));
  }
  double uv = 0.0, uu = 0.0, vv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    uv += u[i] * v[i];
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  if (uu == 0.0 || vv == 0.0) return 0.0;
  return uv / (std::sqrt(uu) * std::sqrt(vv));
}

TfidfIndex TfidfIndex::build(const Corpus& corpus) {
  if (corpus.examples.empty()) throw std::invalid_argument("cannot build a TF-IDF index over an empty corpus");
  TfidfIndex idx;
  std::vector<std::vector<std::string>> docs;
  docs.reserve(corpus.examples.size());
  for (const auto& ex : corpus.examples) {
    docs.push_back(tokenize(ex.text));
    idx.ids_.push_back(ex.id);
    std::vector<std::string> uniq = docs.back();
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    for (auto& t : uniq) {
      auto [it, inserted] = idx.vocabulary_.try_emplace(std::move(t), static_cast<std::uint32_t>(idx.doc_freq_.size()));
      if (inserted) idx.doc_freq_.push_back(0);
      ++idx.doc_freq_[it->second];
    }
  }
  const double n = static_cast<double>(docs.size());
  idx.idf_.resize(idx.doc_freq_.size());
  for (std::size_t c = 0; c < idx.doc_freq_.size(); ++c) {
    idx.idf_[c] = std::log((1.0 + n) / (1.0 + idx.doc_freq_[c])) + 1.0;
  }
  idx.vectors_.reserve(docs.size());
  for (const auto& d : docs) idx.vectors_.push_back(idx.weigh(d));
  return idx;
}

SparseVector TfidfIndex::weigh(const std::vector<std::string>& tokens) const {
  std::map<std::uint32_t, double> counts;
  for (const auto& t : tokens) {
    auto it = vocabulary_.find(t);
    if (it != vocabulary_.end()) counts[it->second] += 1.0;
  }
  SparseVector v;
  v.entries.reserve(counts.size());
  double sq = 0.0;
  for (const auto& [col, tf] : counts) {
    const double w = tf * idf_[col];
    v.entries.emplace_back(col, w);
    sq += w * w;
  }
  if (sq > 0.0) {
    const double inv = 1.0 / std::sqrt(sq);
    for (auto& e : v.entries) e.second *= inv;
  }
  return v;
}

SparseVector TfidfIndex::vectorize(std::string_view text) const { return weigh(tokenize(text)); }

double TfidfIndex::idf(std::string_view term) const {
  auto it = vocabulary_.find(std::string(term));
  return it == vocabulary_.end() ? 0.0 : idf_[it->second];
}

std::vector<double> similarity_scan(const TfidfIndex& index, const SparseVector& query, Exec exec) {
  const auto& docs = index.vectors();
  const auto n = static_cast<std::ptrdiff_t>(docs.size());
  std::vector<double> sims(docs.size());
  // Both sides are unit vectors (or zero), so the dot product is the cosine.
  if (exec == Exec::serial) {
    for (std::ptrdiff_t i = 0; i < n; ++i) sims[i] = std::clamp(dot(query, docs[i]), -1.0, 1.0);
  } else {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) sims[i] = std::clamp(dot(query, docs[i]), -1.0, 1.0);
  }
  return sims;
}

std::vector<Neighbor> top_k(std::span<const double> similarities, std::span<const std::string> ids,
                            std::size_t k) {
  std::vector<std::size_t> order(similarities.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  k = std::min(k, order.size());
  auto better = [&](std::size_t a, std::size_t b) {
    if (similarities[a] != similarities[b]) return similarities[a] > similarities[b];
    return a < b;
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(), better);
  std::vector<Neighbor> out;
  out.reserve(k);
  for (std::size_t r = 0; r < k; ++r) {
    const std::size_t i = order[r];
    out.push_back({ids[i], i, similarities[i], r + 1});
  }
  return out;
}

std::vector<Neighbor> select_knn(std::string_view query_text, const TfidfIndex& index, std::size_t k, Exec exec) {
  if (k == 0) return {};
  const auto sims = similarity_scan(index, index.vectorize(query_text), exec);
  return top_k(sims, index.ids(), k);
}

std::vector<std::string> select_random(const Corpus& corpus, std::size_t k, std::uint64_t seed) {
  const std::size_t n = corpus.examples.size();
  if (k > n) {
    throw std::invalid_argument("cannot draw " + std::to_string(k) + " examples from a corpus of " +
                                std::to_string(n));
  }
  std::mt19937_64 rng(seed);
  // std::uniform_int_distribution is implementation-defined; this rejection
  // sampler gives the same stream everywhere.
  auto below = [&rng](std::uint64_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
      x = rng();
    } while (x >= limit);
    return x % bound;
  };
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<std::string> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(below(n - i));
    std::swap(order[i], order[j]);
    out.push_back(corpus.examples[order[i]].id);
  }
  return out;
}

std::string embedding_key(std::string_view text) { return text::sha256_hex(text::fold(text)); }

std::vector<DenseVector> EmbeddingProvider::embed_batch(std::span<const std::string> texts) {
  std::vector<DenseVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(embed(t));
  return out;
}

HttpEmbeddingProvider::HttpEmbeddingProvider(std::string endpoint, std::size_t batch_size)
    : endpoint_(std::move(endpoint)), batch_size_(std::max<std::size_t>(batch_size, 1)) {}

DenseVector HttpEmbeddingProvider::embed(std::string_view text) {
  const std::string t(text);
  return embed_batch(std::span<const std::string>(&t, 1)).front();
}

std::vector<DenseVector> HttpEmbeddingProvider::embed_batch(std::span<const std::string> texts) {
  using nlohmann::json;
  std::vector<std::string> pending;
  for (const auto& t : texts) {
    if (!memo_.contains(t) && std::find(pending.begin(), pending.end(), t) == pending.end()) pending.push_back(t);
  }
  const auto url = http::parse_url(endpoint_);
  for (std::size_t start = 0; start < pending.size(); start += batch_size_) {
    const std::size_t end = std::min(pending.size(), start + batch_size_);
    json body = {{"texts", json::array()}};
    for (std::size_t i = start; i < end; ++i) body["texts"].push_back(pending[i]);
    const auto res = http::post_json(url, body.dump(), {}, std::chrono::seconds(60));
    if (res.status == 0) throw EmbeddingError("embedding endpoint unreachable: " + res.error);
    if (res.status != 200) throw EmbeddingError("embedding endpoint returned HTTP " + std::to_string(res.status));
    json reply;
    try {
      reply = json::parse(res.body);
    } catch (const json::parse_error&) {
      throw EmbeddingError("embedding endpoint returned malformed JSON");
    }
    if (!reply.contains("vectors") || !reply["vectors"].is_array() || reply["vectors"].size() != end - start) {
      throw EmbeddingError("embedding endpoint returned the wrong number of vectors");
    }
    for (std::size_t i = start; i < end; ++i) {
      DenseVector v;
      try {
        v = reply["vectors"][i - start].get<DenseVector>();
      } catch (const json::exception&) {
        throw EmbeddingError("embedding endpoint returned a non-numeric vector");
      }
      for (double x : v) {
        if (!std::isfinite(x)) throw EmbeddingError("embedding endpoint returned a non-finite value");
      }
      memo_.emplace(pending[i], std::move(v));
    }
  }
  std::vector<DenseVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(memo_.at(t));
  return out;
}

PrecomputedEmbeddings PrecomputedEmbeddings::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw EmbeddingError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

PrecomputedEmbeddings PrecomputedEmbeddings::parse(std::string_view jsonl) {
  using nlohmann::json;
  PrecomputedEmbeddings store;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= jsonl.size()) {
    std::size_t nl = jsonl.find('\n', start);
    if (nl == std::string_view::npos) nl = jsonl.size();
    const auto line = text::trim(jsonl.substr(start, nl - start));
    ++line_no;
    start = nl + 1;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      store.insert(j.at("key").get<std::string>(), j.at("vector").get<DenseVector>());
    } catch (const json::exception& e) {
      throw EmbeddingError("embedding file line " + std::to_string(line_no) + ": " + e.what());
    } catch (const EmbeddingError& e) {
      throw EmbeddingError("embedding file line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return store;
}

void PrecomputedEmbeddings::insert(const std::string& key, DenseVector v) {
  if (v.empty()) throw EmbeddingError("empty vector for key " + key);
  for (double x : v) {
    if (!std::isfinite(x)) throw EmbeddingError("non-finite value in vector for key " + key);
  }
  if (dim_ == 0) dim_ = v.size();
  if (v.size() != dim_) {
    throw EmbeddingError("vector for key " + key + " has length " + std::to_string(v.size()) + ", expected " +
                         std::to_string(dim_));
  }
  vectors_[key] = std::move(v);
}

DenseVector PrecomputedEmbeddings::embed(std::string_view text) {
  const std::string key = embedding_key(text);
  if (auto it = vectors_.find(key); it != vectors_.end()) return it->second;
  if (!fallback_) throw EmbeddingError("no embedding for text with key " + key);
  DenseVector v = fallback_->embed(text);
  insert(key, v);
  return v;
}

DenseStore DenseStore::build(const Corpus& corpus, EmbeddingProvider& provider) {
  DenseStore store;
  std::vector<std::string> texts;
  texts.reserve(corpus.examples.size());
  for (const auto& ex : corpus.examples) {
    store.ids_.push_back(ex.id);
    texts.push_back(ex.text);
  }
  store.vectors_ = provider.embed_batch(texts);
  for (std::size_t i = 1; i < store.vectors_.size(); ++i) {
    if (store.vectors_[i].size() != store.vectors_[0].size()) {
      throw EmbeddingError("embedding for " + store.ids_[i] + " has inconsistent length");
    }
  }
  return store;
}

std::vector<double> similarity_scan(const DenseStore& store, std::span<const double> query, Exec exec) {
  const auto& vs = store.vectors();
  if (!vs.empty() && vs.front().size() != query.size()) {
    throw std::invalid_argument("query embedding length " + std::to_string(query.size()) +
                                " does not match store length " + std::to_string(vs.front().size()));
  }
  const auto n = static_cast<std::ptrdiff_t>(vs.size());
  std::vector<double> sims(vs.size());
  if (exec == Exec::serial) {
    for (std::ptrdiff_t i = 0; i < n; ++i) sims[i] = std::clamp(cosine(query, vs[i]), -1.0, 1.0);
  } else {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) sims[i] = std::clamp(cosine(query, vs[i]), -1.0, 1.0);
  }
  return sims;
}

std::vector<Neighbor> select_knn(std::span<const double> query, const DenseStore& store, std::size_t k, Exec exec) {
  if (k == 0) return {};
  const auto sims = similarity_scan(store, query, exec);
  return top_k(sims, store.ids(), k);
}

}  // namespace absa
