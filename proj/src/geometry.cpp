#include "dipr/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>
#include <utility>

namespace dipr {

namespace {

bool coordinates_valid(double x1, double y1, double x2, double y2) {
  if (!std::isfinite(x1) || !std::isfinite(y1) || !std::isfinite(x2) ||
      !std::isfinite(y2)) {
    return false;
  }
  if (x1 < 0.0 || y1 < 0.0) {
    return false;
  }
  return x1 < x2 && y1 < y2;
}

}  // namespace

LabeledBox::LabeledBox(double x1, double y1, double x2, double y2,
                       std::string label)
    : x1_(x1), y1_(y1), x2_(x2), y2_(y2), label_(std::move(label)) {
  if (!coordinates_valid(x1_, y1_, x2_, y2_)) {
    throw std::invalid_argument("LabeledBox: invalid coordinates [" +
                                std::to_string(x1) + ", " + std::to_string(y1) +
                                ", " + std::to_string(x2) + ", " +
                                std::to_string(y2) + "]");
  }
}

std::optional<LabeledBox> LabeledBox::try_make(double x1, double y1, double x2,
                                               double y2, std::string label) {
  if (!coordinates_valid(x1, y1, x2, y2)) {
    return std::nullopt;
  }
  return LabeledBox(x1, y1, x2, y2, std::move(label));
}

LabeledBox LabeledBox::translated(double dx, double dy) const {
  return LabeledBox(x1_ + dx, y1_ + dy, x2_ + dx, y2_ + dy, label_);
}

double iou(const LabeledBox& a, const LabeledBox& b) {
  const double ix1 = std::max(a.x1(), b.x1());
  const double iy1 = std::max(a.y1(), b.y1());
  const double ix2 = std::min(a.x2(), b.x2());
  const double iy2 = std::min(a.y2(), b.y2());
  const double iw = ix2 - ix1;
  const double ih = iy2 - iy1;
  if (iw <= 0.0 || ih <= 0.0) {
    return 0.0;
  }
  const double intersection = iw * ih;
  const double uni = a.area() + b.area() - intersection;
  return intersection / uni;
}

MatchResult match_boxes(std::span<const LabeledBox> predictions,
                        std::span<const LabeledBox> ground_truth,
                        double iou_threshold, bool require_label_match) {
  if (!(iou_threshold > 0.0) || iou_threshold > 1.0) {
    throw std::invalid_argument("match_boxes: iou_threshold must be in (0, 1]");
  }

  struct Candidate {
    double iou;
    std::size_t prediction;
    std::size_t ground_truth;
  };
  std::vector<Candidate> candidates;
  for (std::size_t p = 0; p < predictions.size(); ++p) {
    for (std::size_t g = 0; g < ground_truth.size(); ++g) {
      if (require_label_match &&
          predictions[p].label() != ground_truth[g].label()) {
        continue;
      }
      const double overlap = iou(predictions[p], ground_truth[g]);
      if (overlap >= iou_threshold) {
        candidates.push_back({overlap, p, g});
      }
    }
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& a, const Candidate& b) {
              return std::tuple(-a.iou, a.prediction, a.ground_truth) <
                     std::tuple(-b.iou, b.prediction, b.ground_truth);
            });

  MatchResult result;
  std::vector<bool> prediction_used(predictions.size(), false);
  std::vector<bool> ground_truth_used(ground_truth.size(), false);
  for (const Candidate& c : candidates) {
    if (prediction_used[c.prediction] || ground_truth_used[c.ground_truth]) {
      continue;
    }
    prediction_used[c.prediction] = true;
    ground_truth_used[c.ground_truth] = true;
    result.pairs.push_back({c.prediction, c.ground_truth, c.iou});
  }
  for (std::size_t p = 0; p < predictions.size(); ++p) {
    if (!prediction_used[p]) {
      result.unmatched_predictions.push_back(p);
    }
  }
  for (std::size_t g = 0; g < ground_truth.size(); ++g) {
    if (!ground_truth_used[g]) {
      result.unmatched_ground_truth.push_back(g);
    }
  }
  return result;
}

PrecisionRecall precision_recall(std::span<const LabeledBox> predictions,
                                 std::span<const LabeledBox> ground_truth,
                                 double iou_threshold) {
  if (predictions.empty() && ground_truth.empty()) {
    return {1.0, 1.0};
  }
  const MatchResult match =
      match_boxes(predictions, ground_truth, iou_threshold);
  const double true_positives = static_cast<double>(match.pairs.size());
  const double precision =
      predictions.empty() ? 0.0
                          : true_positives / static_cast<double>(predictions.size());
  const double recall =
      ground_truth.empty() ? 1.0
                           : true_positives / static_cast<double>(ground_truth.size());
  return {precision, recall};
}

}  // namespace dipr
