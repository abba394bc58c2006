#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dipr {

// Axis-aligned rectangle in continuous pixel coordinates plus a class label.
// Construction enforces x1 < x2, y1 < y2 and finite, non-negative
// coordinates, so every LabeledBox in the system has strictly positive area.
class LabeledBox {
 public:
  LabeledBox(double x1, double y1, double x2, double y2, std::string label);

  // Non-throwing variant for untrusted inputs (parsers, salvage paths).
  static std::optional<LabeledBox> try_make(double x1, double y1, double x2,
                                            double y2, std::string label);

  double x1() const { return x1_; }
  double y1() const { return y1_; }
  double x2() const { return x2_; }
  double y2() const { return y2_; }
  const std::string& label() const { return label_; }

  double width() const { return x2_ - x1_; }
  double height() const { return y2_ - y1_; }
  double area() const { return width() * height(); }

  // Returns a copy translated by (dx, dy). Caller keeps coordinates valid.
  LabeledBox translated(double dx, double dy) const;

  bool operator==(const LabeledBox& other) const = default;

 private:
  double x1_, y1_, x2_, y2_;
  std::string label_;
};

struct MatchedPair {
  std::size_t prediction;
  std::size_t ground_truth;
  double iou;

  bool operator==(const MatchedPair&) const = default;
};

// One-to-one assignment between predictions and ground truth. The pair list
// and the two unmatched index lists partition both index ranges exactly.
struct MatchResult {
  std::vector<MatchedPair> pairs;
  std::vector<std::size_t> unmatched_predictions;
  std::vector<std::size_t> unmatched_ground_truth;
};

struct PrecisionRecall {
  double precision;
  double recall;
};

// Intersection-over-union of two boxes; symmetric, label-agnostic, in [0, 1].
double iou(const LabeledBox& a, const LabeledBox& b);

// Greedy one-to-one matching: candidate pairs with IoU >= threshold (and
// equal labels when required) are sorted by IoU descending, ties broken by
// lower prediction index then lower ground-truth index, and accepted in order
// skipping pairs with an already-matched endpoint. Deterministic.
MatchResult match_boxes(std::span<const LabeledBox> predictions,
                        std::span<const LabeledBox> ground_truth,
                        double iou_threshold, bool require_label_match = true);

// Set precision/recall at a fixed IoU threshold. Empty-set conventions:
// both lists empty -> (1, 1); no predictions against non-empty ground truth
// -> precision 0; recall is 1 whenever ground truth is empty.
PrecisionRecall precision_recall(std::span<const LabeledBox> predictions,
                                 std::span<const LabeledBox> ground_truth,
                                 double iou_threshold);

}  // namespace dipr
