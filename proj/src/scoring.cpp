#include "absa/scoring.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <stdexcept>

#include "absa/parser.hpp"
#include "absa/text.hpp"

namespace absa {
namespace {

std::set<std::string> word_set(const std::string& s) {
  auto ws = text::words(s);
  return {ws.begin(), ws.end()};
}

// Kuhn's augmenting paths; instances are a handful of quads per sentence.
class Matcher {
 public:
  explicit Matcher(std::vector<std::vector<std::size_t>> adj, std::size_t num_right)
      : adj_(std::move(adj)), match_right_(num_right, kNone) {}

  std::size_t run() {
    std::size_t size = 0;
    for (std::size_t u = 0; u < adj_.size(); ++u) {
      seen_.assign(match_right_.size(), false);
      if (augment(u)) ++size;
    }
    return size;
  }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  bool augment(std::size_t u) {
    for (std::size_t v : adj_[u]) {
      if (seen_[v]) continue;
      seen_[v] = true;
      if (match_right_[v] == kNone || augment(match_right_[v])) {
        match_right_[v] = u;
        return true;
      }
    }
    return false;
  }

  std::vector<std::vector<std::size_t>> adj_;
  std::vector<std::size_t> match_right_;
  std::vector<bool> seen_;
};

void check_threshold(double t) {
  if (!(t > 0.0 && t <= 1.0)) throw std::invalid_argument("IOU threshold must be in (0, 1], got " + format_number(t));
}

}  // namespace

MatchPolicy MatchPolicy::relaxed(double threshold) {
  check_threshold(threshold);
  return {MatchMode::relaxed, threshold};
}

double iou(const Term& a, const Term& b) {
  const Term na = normalize_term(a);
  const Term nb = normalize_term(b);
  if (!na && !nb) return 1.0;
  if (!na || !nb) return 0.0;
  const auto sa = word_set(*na);
  const auto sb = word_set(*nb);
  if (sa.empty() && sb.empty()) return *na == *nb ? 1.0 : 0.0;
  std::size_t inter = 0;
  for (const auto& w : sa) inter += sb.count(w);
  const std::size_t uni = sa.size() + sb.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

bool quad_matches(const Quadruple& pred, const Quadruple& gold, const MatchPolicy& policy) {
  if (pred.sentiment != gold.sentiment) return false;
  if (normalize_category(pred.category) != normalize_category(gold.category)) return false;
  if (policy.mode == MatchMode::exact) {
    return normalize_term(pred.aspect) == normalize_term(gold.aspect) &&
           normalize_term(pred.opinion) == normalize_term(gold.opinion);
  }
  return iou(pred.aspect, gold.aspect) >= policy.iou_threshold &&
         iou(pred.opinion, gold.opinion) >= policy.iou_threshold;
}

Counts score_example(std::span<const Quadruple> preds, std::span<const Quadruple> golds, const MatchPolicy& policy) {
  std::vector<std::vector<std::size_t>> adj(preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) {
    for (std::size_t j = 0; j < golds.size(); ++j) {
      if (quad_matches(preds[i], golds[j], policy)) adj[i].push_back(j);
    }
  }
  Matcher m(std::move(adj), golds.size());
  return {m.run(), preds.size(), golds.size()};
}

ScoreReport make_report(const Counts& total) {
  ScoreReport r;
  r.true_positives = total.true_positives;
  r.num_predicted = total.num_predicted;
  r.num_gold = total.num_gold;
  r.precision = total.num_predicted == 0 ? 1.0
                                         : static_cast<double>(total.true_positives) / static_cast<double>(total.num_predicted);
  r.recall = total.num_gold == 0 ? 1.0
                                 : static_cast<double>(total.true_positives) / static_cast<double>(total.num_gold);
  r.f1 = (r.precision + r.recall) == 0.0 ? 0.0 : 2.0 * r.precision * r.recall / (r.precision + r.recall);
  return r;
}

ScoreReport score_dataset(std::span<const Counts> per_example) {
  Counts total;
  for (const auto& c : per_example) total += c;
  return make_report(total);
}

std::vector<Counts> score_all(std::span<const Prediction> data, const MatchPolicy& policy, Exec exec) {
  std::vector<Counts> out(data.size());
  const auto n = static_cast<std::ptrdiff_t>(data.size());
  if (exec == Exec::serial) {
    for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = score_example(data[i].preds, data[i].golds, policy);
  } else {
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = score_example(data[i].preds, data[i].golds, policy);
  }
  return out;
}

std::vector<ThresholdRow> threshold_sweep(std::span<const Prediction> data, std::span<const double> thresholds,
                                          Exec exec) {
  std::vector<ThresholdRow> rows;
  rows.reserve(thresholds.size());
  for (double t : thresholds) {
    const auto counts = score_all(data, MatchPolicy::relaxed(t), exec);
    rows.push_back({t, score_dataset(counts)});
  }
  return rows;
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string sweep_csv(std::span<const ThresholdRow> rows) {
  std::string out = "threshold,precision,recall,f1\n";
  for (const auto& r : rows) {
    out += format_number(r.threshold) + "," + format_number(r.report.precision) + "," +
           format_number(r.report.recall) + "," + format_number(r.report.f1) + "\n";
  }
  return out;
}

}  // namespace absa
