#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "absa/dataset.hpp"
#include "absa/retrieval.hpp"

namespace absa {

enum class MatchMode { exact, relaxed };

struct MatchPolicy {
  MatchMode mode = MatchMode::exact;
  // Used in relaxed mode only, in (0, 1].
  double iou_threshold = 1.0;

  static MatchPolicy exact() { return {}; }
  // Throws std::invalid_argument outside (0, 1].
  static MatchPolicy relaxed(double threshold);
};

struct Counts {
  std::size_t true_positives = 0;
  std::size_t num_predicted = 0;
  std::size_t num_gold = 0;

  Counts& operator+=(const Counts& o) {
    true_positives += o.true_positives;
    num_predicted += o.num_predicted;
    num_gold += o.num_gold;
    return *this;
  }
  friend bool operator==(const Counts&, const Counts&) = default;
};

// Micro-averaged. precision is 1 when nothing was predicted, recall is 1 when
// there is no gold, f1 is 0 when both are 0.
struct ScoreReport {
  std::size_t true_positives = 0;
  std::size_t num_predicted = 0;
  std::size_t num_gold = 0;
  double precision = 1.0;
  double recall = 1.0;
  double f1 = 1.0;

  friend bool operator==(const ScoreReport&, const ScoreReport&) = default;
};

// Word-set intersection over union of normalized terms. Two implicit terms
// score 1, implicit against a surface term scores 0.
double iou(const Term& a, const Term& b);

bool quad_matches(const Quadruple& pred, const Quadruple& gold, const MatchPolicy& policy);

// TP is the size of a maximum bipartite matching between predictions and gold
// under quad_matches.
Counts score_example(std::span<const Quadruple> preds, std::span<const Quadruple> golds, const MatchPolicy& policy);

ScoreReport score_dataset(std::span<const Counts> per_example);
ScoreReport make_report(const Counts& total);

struct Prediction {
  std::vector<Quadruple> preds;
  std::vector<Quadruple> golds;
};

// Per-example counts over a whole dataset; the parallel kernel must agree with
// the serial one.
std::vector<Counts> score_all(std::span<const Prediction> data, const MatchPolicy& policy,
                              Exec exec = Exec::parallel);

struct ThresholdRow {
  double threshold = 1.0;
  ScoreReport report;

  friend bool operator==(const ThresholdRow&, const ThresholdRow&) = default;
};

// One relaxed-mode report per threshold over the same predictions. Throws
// std::invalid_argument for thresholds outside (0, 1].
std::vector<ThresholdRow> threshold_sweep(std::span<const Prediction> data, std::span<const double> thresholds,
                                          Exec exec = Exec::parallel);

// "threshold,precision,recall,f1"
std::string sweep_csv(std::span<const ThresholdRow> rows);
std::string format_number(double v);

}  // namespace absa
