#pragma once

#include <span>
#include <string>
#include <vector>

#include "dipr/geometry.hpp"
#include "dipr/response.hpp"

namespace dipr {

// The G responses sampled for one scene, with shared ground truth.
struct ResponseGroup {
  std::string scene_id;
  std::vector<LabeledBox> ground_truth;
  std::vector<StructuredResponse> responses;  // size G >= 2
};

// Controls the variance-guided look reward. alpha is tied to the group size:
// the largest achievable variance over frequencies k/G is scaled to exactly 1.
struct LookRewardConfig {
  double iou_threshold = 0.5;  // box-equivalence threshold (tau)
  int group_size = 8;
  double alpha = 4.0;
  double penalty = -0.25;  // applied to certain (zero-variance) boxes: -1/alpha
};

// Tightest normalization mapping the maximum achievable variance
// max_{k in 1..G-1} (k/G)(1 - k/G) to 1.
double look_alpha(int group_size);

LookRewardConfig make_look_config(int group_size, double iou_threshold = 0.5);

// How the recall weight is discretized. Fraction keeps the weight in [1, 2]
// (floor to hundredths); Integer uses the raw interval index 0..100.
enum class RecallBinMode { Fraction, Integer };

struct RewardConfig {
  LookRewardConfig look = {};
  double accuracy_iou_threshold = 0.5;
  RecallBinMode recall_bin_mode = RecallBinMode::Fraction;
};

// Per-response reward components. advantage is filled by the GRPO side.
struct RewardBreakdown {
  double format = 0.0;    // {0, 1}
  double look = 0.0;      // [-1/alpha, 1]
  double accuracy = 0.0;  // [0, 2] in Fraction bin mode
  double total = 0.0;     // equal-weight sum of the three
  double advantage = 0.0;
};

// Fraction of the G answer sets containing a box IoU-equivalent (>= tau) to
// `box`; each set counts at most once regardless of how many of its boxes
// match.
double box_frequency(const LabeledBox& box,
                     std::span<const std::vector<LabeledBox>> answer_sets,
                     double iou_threshold);

// Bernoulli occurrence variance f(1 - f), the constant G omitted.
double box_variance(double frequency);

// Variance-guided look reward, one value per response. Union boxes are built
// from all answer sections across the group (deduplicated at tau against the
// first-seen representative); each look box inherits the reward of its
// highest-IoU union box, or the penalty when it matches none. Responses with
// an invalid format or an empty look section receive 0.
std::vector<double> look_reward(const ResponseGroup& group,
                                const LookRewardConfig& config);

// Recall discretized into 100 equal intervals over [0, 1]; bin(1) saturates
// at the top interval.
double recall_bin(double recall, RecallBinMode mode);

// Weighted precision-recall reward: (1 + bin[recall]) * precision, matched
// at the given IoU threshold.
double accuracy_reward(std::span<const LabeledBox> answer_boxes,
                       std::span<const LabeledBox> ground_truth,
                       double iou_threshold = 0.5,
                       RecallBinMode bin_mode = RecallBinMode::Fraction);

// Computes all three rewards and the equal-weight total for every response
// in the group. Deterministic; advantage is left at 0.
std::vector<RewardBreakdown> score_group(const ResponseGroup& group,
                                         const RewardConfig& config);

}  // namespace dipr
