#pragma once

// Brute-force reference computations used only by tests. Nothing here calls
// into the library paths they check.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

inline std::vector<std::string> words(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c >= 0x80) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

// Dense TF-IDF over a vocabulary map, computed straight from the definition.
struct DenseTfidf {
  std::map<std::string, double> idf;
  std::vector<std::map<std::string, double>> docs;

  explicit DenseTfidf(const std::vector<std::string>& texts) {
    std::map<std::string, int> df;
    std::vector<std::vector<std::string>> toks;
    for (const auto& t : texts) {
      toks.push_back(words(t));
      std::set<std::string> uniq(toks.back().begin(), toks.back().end());
      for (const auto& w : uniq) ++df[w];
    }
    const double n = static_cast<double>(texts.size());
    for (const auto& [w, c] : df) idf[w] = std::log((1.0 + n) / (1.0 + c)) + 1.0;
    for (const auto& t : toks) docs.push_back(weigh(t));
  }

  std::map<std::string, double> weigh(const std::vector<std::string>& toks) const {
    std::map<std::string, double> v;
    for (const auto& w : toks) {
      if (idf.count(w)) v[w] += idf.at(w);
    }
    double sq = 0;
    for (const auto& [_, x] : v) sq += x * x;
    if (sq > 0) {
      for (auto& [_, x] : v) x /= std::sqrt(sq);
    }
    return v;
  }

  static double cosine(const std::map<std::string, double>& a, const std::map<std::string, double>& b) {
    double ab = 0, aa = 0, bb = 0;
    for (const auto& [w, x] : a) {
      aa += x * x;
      auto it = b.find(w);
      if (it != b.end()) ab += x * it->second;
    }
    for (const auto& [_, x] : b) bb += x * x;
    if (aa == 0 || bb == 0) return 0;
    return ab / std::sqrt(aa * bb);
  }

  // Full ranking by exhaustive comparison: similarity desc, index asc.
  std::vector<std::size_t> rank(const std::string& query, std::size_t k) const {
    const auto q = weigh(words(query));
    std::vector<std::pair<double, std::size_t>> scored;
    for (std::size_t i = 0; i < docs.size(); ++i) scored.emplace_back(cosine(q, docs[i]), i);
    std::stable_sort(scored.begin(), scored.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < std::min(k, scored.size()); ++i) out.push_back(scored[i].second);
    return out;
  }
};

// Maximum matching by trying every injection of the smaller side.
inline std::size_t brute_force_matching(std::size_t num_preds, std::size_t num_golds,
                                        const std::function<bool(std::size_t, std::size_t)>& edge) {
  std::size_t best = 0;
  std::vector<bool> used(num_golds, false);
  std::function<void(std::size_t, std::size_t)> go = [&](std::size_t p, std::size_t matched) {
    if (matched + (num_preds - p) <= best) return;
    if (p == num_preds) {
      best = std::max(best, matched);
      return;
    }
    go(p + 1, matched);  // leave p unmatched
    for (std::size_t g = 0; g < num_golds; ++g) {
      if (!used[g] && edge(p, g)) {
        used[g] = true;
        go(p + 1, matched + 1);
        used[g] = false;
      }
    }
  };
  go(0, 0);
  return best;
}

// Word-set IOU written from the definition, on lowercase space-split words.
inline double set_iou(const std::string& a, const std::string& b) {
  const auto wa = words(a);
  const auto wb = words(b);
  std::set<std::string> sa(wa.begin(), wa.end()), sb(wb.begin(), wb.end()), uni = sa;
  uni.insert(sb.begin(), sb.end());
  std::size_t inter = 0;
  for (const auto& w : sa) inter += sb.count(w);
  return uni.empty() ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni.size());
}

inline std::vector<std::string> random_corpus(std::mt19937_64& rng, std::size_t n, std::size_t vocab,
                                              int min_len = 1, int max_len = 12) {
  std::uniform_int_distribution<std::size_t> word(0, vocab - 1);
  std::uniform_int_distribution<int> len(min_len, max_len);
  std::vector<std::string> docs;
  for (std::size_t i = 0; i < n; ++i) {
    std::string t;
    for (int w = len(rng); w > 0; --w) t += "v" + std::to_string(word(rng)) + " ";
    docs.push_back(t);
  }
  return docs;
}

}  // namespace oracle
