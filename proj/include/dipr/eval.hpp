#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dipr/geometry.hpp"

namespace dipr {

// Fixed evaluation thresholds matching the AP30/AR30/AP50/AR50 report style.
inline constexpr double kLooseIouThreshold = 0.3;
inline constexpr double kStrictIouThreshold = 0.5;

struct SceneMetrics {
  std::string scene_id;
  std::size_t predictions = 0;
  std::size_t ground_truth = 0;
  std::size_t tp_loose = 0;   // IoU 0.3
  std::size_t tp_strict = 0;  // IoU 0.5
  double precision_loose = 0.0;
  double recall_loose = 0.0;
  double precision_strict = 0.0;
  double recall_strict = 0.0;
};

struct ThresholdAggregate {
  double iou_threshold = 0.0;
  std::size_t true_positives = 0;
  double micro_precision = 0.0;
  double micro_recall = 0.0;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
};

// These are threshold-fixed set metrics: MLLM-style box answers carry no
// confidence scores, so there is no ranking to sweep. The AP/AR names are
// kept for table compatibility and the definition ships in the report.
struct MetricsReport {
  std::size_t scenes = 0;
  std::size_t predictions = 0;
  std::size_t ground_truth = 0;
  ThresholdAggregate loose;   // 0.3
  ThresholdAggregate strict;  // 0.5
  std::vector<SceneMetrics> per_scene;
  std::vector<std::string> errors;  // e.g. prediction scene ids without GT
  std::string definition =
      "AP/AR are set precision/recall at a fixed IoU threshold "
      "(no confidence ranking)";
};

// Matches each scene independently at both thresholds. Prediction scene ids
// missing from the ground truth are reported as errors and excluded; ground
// truth scenes without predictions count as empty prediction lists.
MetricsReport evaluate(
    const std::map<std::string, std::vector<LabeledBox>>& predictions,
    const std::map<std::string, std::vector<LabeledBox>>& ground_truth);

nlohmann::json report_to_json(const MetricsReport& report);

// Aligned table, percent with one decimal.
std::string format_report_table(const MetricsReport& report);

struct CurveSummary {
  int window = 0;
  std::size_t steps = 0;
  double initial_window_mean = 0.0;
  double final_window_mean = 0.0;
  double delta = 0.0;  // final - initial
  double ratio = 0.0;  // final / initial (0 when initial is 0)
  double minimum = 0.0;
  double maximum = 0.0;
  std::vector<double> moving_average;  // one entry per step
};

// Moving-average summary of a training reward log. Throws on an empty log;
// windows longer than the log are clamped to its length.
CurveSummary reward_curve_report(std::span<const double> values, int window);

nlohmann::json curve_summary_to_json(const CurveSummary& summary);

// Plot-ready CSV: step, value, moving_average.
std::string curve_csv(std::span<const double> values,
                      const CurveSummary& summary);

// Reads one named column from a metrics CSV produced by the training loop.
std::vector<double> read_csv_column(const std::filesystem::path& path,
                                    const std::string& column);

}  // namespace dipr
