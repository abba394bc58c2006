#include "dipr/rewards.hpp"

#include <cmath>
#include <stdexcept>

namespace dipr {

namespace {

// Answer boxes a response contributes to the group union: salvaged boxes
// when the section parsed (a "None" answer is an empty set), nothing when
// the section could not be read at all.
std::span<const LabeledBox> answer_set(const StructuredResponse& response) {
  static const std::vector<LabeledBox> kEmpty;
  if (response.answer_boxes.has_value()) {
    return *response.answer_boxes;
  }
  return kEmpty;
}

void check_group(const ResponseGroup& group, int group_size) {
  if (group.responses.size() < 2) {
    throw std::invalid_argument("ResponseGroup: needs at least 2 responses");
  }
  if (static_cast<int>(group.responses.size()) != group_size) {
    throw std::invalid_argument(
        "ResponseGroup: size does not match configured group size");
  }
}

}  // namespace

double look_alpha(int group_size) {
  if (group_size < 2) {
    throw std::invalid_argument("look_alpha: group size must be >= 2");
  }
  double max_variance = 0.0;
  for (int k = 1; k < group_size; ++k) {
    const double f = static_cast<double>(k) / group_size;
    max_variance = std::max(max_variance, f * (1.0 - f));
  }
  return 1.0 / max_variance;
}

LookRewardConfig make_look_config(int group_size, double iou_threshold) {
  if (!(iou_threshold > 0.0) || iou_threshold > 1.0) {
    throw std::invalid_argument("make_look_config: tau must be in (0, 1]");
  }
  LookRewardConfig config;
  config.iou_threshold = iou_threshold;
  config.group_size = group_size;
  config.alpha = look_alpha(group_size);
  config.penalty = -1.0 / config.alpha;
  return config;
}

double box_frequency(const LabeledBox& box,
                     std::span<const std::vector<LabeledBox>> answer_sets,
                     double iou_threshold) {
  if (answer_sets.size() < 2) {
    throw std::invalid_argument("box_frequency: needs G >= 2 answer sets");
  }
  int occurrences = 0;
  for (const std::vector<LabeledBox>& set : answer_sets) {
    for (const LabeledBox& candidate : set) {
      if (iou(box, candidate) >= iou_threshold) {
        ++occurrences;
        break;  // at most one count per response
      }
    }
  }
  return static_cast<double>(occurrences) /
         static_cast<double>(answer_sets.size());
}

double box_variance(double frequency) {
  if (frequency < 0.0 || frequency > 1.0) {
    throw std::invalid_argument("box_variance: frequency outside [0, 1]");
  }
  return frequency * (1.0 - frequency);
}

std::vector<double> look_reward(const ResponseGroup& group,
                                const LookRewardConfig& config) {
  check_group(group, config.group_size);

  std::vector<std::vector<LabeledBox>> answer_sets;
  answer_sets.reserve(group.responses.size());
  for (const StructuredResponse& response : group.responses) {
    const auto boxes = answer_set(response);
    answer_sets.emplace_back(boxes.begin(), boxes.end());
  }

  // Union of answer boxes, deduplicated greedily: a box joins the first
  // representative it overlaps at tau, otherwise becomes a new one.
  std::vector<LabeledBox> representatives;
  for (const std::vector<LabeledBox>& set : answer_sets) {
    for (const LabeledBox& box : set) {
      bool joined = false;
      for (const LabeledBox& representative : representatives) {
        if (iou(box, representative) >= config.iou_threshold) {
          joined = true;
          break;
        }
      }
      if (!joined) {
        representatives.push_back(box);
      }
    }
  }

  std::vector<double> representative_rewards(representatives.size());
  for (std::size_t i = 0; i < representatives.size(); ++i) {
    const double f =
        box_frequency(representatives[i], answer_sets, config.iou_threshold);
    const double variance = box_variance(f);
    representative_rewards[i] =
        variance > 0.0 ? config.alpha * variance : config.penalty;
  }

  std::vector<double> rewards(group.responses.size(), 0.0);
  for (std::size_t i = 0; i < group.responses.size(); ++i) {
    const StructuredResponse& response = group.responses[i];
    if (!response.format_valid || !response.look_boxes.has_value() ||
        response.look_boxes->empty()) {
      continue;  // reward stays 0
    }
    double sum = 0.0;
    for (const LabeledBox& look_box : *response.look_boxes) {
      // Highest-IoU union box at or above tau; none -> certain-box penalty.
      double best_iou = 0.0;
      std::size_t best_index = representatives.size();
      for (std::size_t r = 0; r < representatives.size(); ++r) {
        const double overlap = iou(look_box, representatives[r]);
        if (overlap >= config.iou_threshold && overlap > best_iou) {
          best_iou = overlap;
          best_index = r;
        }
      }
      sum += best_index < representatives.size()
                 ? representative_rewards[best_index]
                 : config.penalty;
    }
    rewards[i] = sum / static_cast<double>(response.look_boxes->size());
  }
  return rewards;
}

double recall_bin(double recall, RecallBinMode mode) {
  if (recall < 0.0 || recall > 1.0) {
    throw std::invalid_argument("recall_bin: recall outside [0, 1]");
  }
  const double interval = std::floor(recall * 100.0);
  const double clamped = std::min(interval, 100.0);
  return mode == RecallBinMode::Fraction ? clamped / 100.0 : clamped;
}

double accuracy_reward(std::span<const LabeledBox> answer_boxes,
                       std::span<const LabeledBox> ground_truth,
                       double iou_threshold, RecallBinMode bin_mode) {
  const PrecisionRecall pr =
      precision_recall(answer_boxes, ground_truth, iou_threshold);
  const double weight = 1.0 + recall_bin(pr.recall, bin_mode);
  return weight * pr.precision;
}

std::vector<RewardBreakdown> score_group(const ResponseGroup& group,
                                         const RewardConfig& config) {
  check_group(group, config.look.group_size);
  const std::vector<double> look = look_reward(group, config.look);

  std::vector<RewardBreakdown> breakdowns(group.responses.size());
  for (std::size_t i = 0; i < group.responses.size(); ++i) {
    const StructuredResponse& response = group.responses[i];
    RewardBreakdown& breakdown = breakdowns[i];
    breakdown.format = format_reward(response);
    breakdown.look = look[i];
    if (response.format_valid && response.answer_boxes.has_value()) {
      breakdown.accuracy =
          accuracy_reward(*response.answer_boxes, group.ground_truth,
                          config.accuracy_iou_threshold, config.recall_bin_mode);
    }
    breakdown.total = breakdown.format + breakdown.look + breakdown.accuracy;
  }
  return breakdowns;
}

}  // namespace dipr
