#include "dipr/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace dipr {

namespace {

using nlohmann::json;

double micro_precision_of(std::size_t tp, std::size_t predictions,
                          std::size_t ground_truth) {
  if (predictions == 0) {
    return ground_truth == 0 ? 1.0 : 0.0;
  }
  return static_cast<double>(tp) / static_cast<double>(predictions);
}

double micro_recall_of(std::size_t tp, std::size_t ground_truth) {
  if (ground_truth == 0) {
    return 1.0;
  }
  return static_cast<double>(tp) / static_cast<double>(ground_truth);
}

}  // namespace

MetricsReport evaluate(
    const std::map<std::string, std::vector<LabeledBox>>& predictions,
    const std::map<std::string, std::vector<LabeledBox>>& ground_truth) {
  MetricsReport report;
  report.loose.iou_threshold = kLooseIouThreshold;
  report.strict.iou_threshold = kStrictIouThreshold;

  for (const auto& [scene_id, boxes] : predictions) {
    if (!ground_truth.contains(scene_id)) {
      report.errors.push_back("prediction scene \"" + scene_id +
                              "\" has no ground truth; excluded");
    }
  }

  static const std::vector<LabeledBox> kNoBoxes;
  double macro_p_loose = 0.0, macro_r_loose = 0.0;
  double macro_p_strict = 0.0, macro_r_strict = 0.0;
  for (const auto& [scene_id, gt_boxes] : ground_truth) {
    const auto it = predictions.find(scene_id);
    const std::vector<LabeledBox>& pred_boxes =
        it != predictions.end() ? it->second : kNoBoxes;

    SceneMetrics scene;
    scene.scene_id = scene_id;
    scene.predictions = pred_boxes.size();
    scene.ground_truth = gt_boxes.size();
    scene.tp_loose =
        match_boxes(pred_boxes, gt_boxes, kLooseIouThreshold).pairs.size();
    scene.tp_strict =
        match_boxes(pred_boxes, gt_boxes, kStrictIouThreshold).pairs.size();
    const PrecisionRecall loose =
        precision_recall(pred_boxes, gt_boxes, kLooseIouThreshold);
    const PrecisionRecall strict =
        precision_recall(pred_boxes, gt_boxes, kStrictIouThreshold);
    scene.precision_loose = loose.precision;
    scene.recall_loose = loose.recall;
    scene.precision_strict = strict.precision;
    scene.recall_strict = strict.recall;

    report.scenes += 1;
    report.predictions += scene.predictions;
    report.ground_truth += scene.ground_truth;
    report.loose.true_positives += scene.tp_loose;
    report.strict.true_positives += scene.tp_strict;
    macro_p_loose += scene.precision_loose;
    macro_r_loose += scene.recall_loose;
    macro_p_strict += scene.precision_strict;
    macro_r_strict += scene.recall_strict;
    report.per_scene.push_back(std::move(scene));
  }

  report.loose.micro_precision = micro_precision_of(
      report.loose.true_positives, report.predictions, report.ground_truth);
  report.loose.micro_recall =
      micro_recall_of(report.loose.true_positives, report.ground_truth);
  report.strict.micro_precision = micro_precision_of(
      report.strict.true_positives, report.predictions, report.ground_truth);
  report.strict.micro_recall =
      micro_recall_of(report.strict.true_positives, report.ground_truth);
  if (report.scenes > 0) {
    const double n = static_cast<double>(report.scenes);
    report.loose.macro_precision = macro_p_loose / n;
    report.loose.macro_recall = macro_r_loose / n;
    report.strict.macro_precision = macro_p_strict / n;
    report.strict.macro_recall = macro_r_strict / n;
  }
  return report;
}

namespace {

json aggregate_to_json(const ThresholdAggregate& aggregate) {
  return json{{"iou_threshold", aggregate.iou_threshold},
              {"true_positives", aggregate.true_positives},
              {"micro_precision", aggregate.micro_precision},
              {"micro_recall", aggregate.micro_recall},
              {"macro_precision", aggregate.macro_precision},
              {"macro_recall", aggregate.macro_recall}};
}

}  // namespace

json report_to_json(const MetricsReport& report) {
  json per_scene = json::array();
  for (const SceneMetrics& scene : report.per_scene) {
    per_scene.push_back(json{{"scene_id", scene.scene_id},
                             {"predictions", scene.predictions},
                             {"ground_truth", scene.ground_truth},
                             {"tp30", scene.tp_loose},
                             {"tp50", scene.tp_strict},
                             {"p30", scene.precision_loose},
                             {"r30", scene.recall_loose},
                             {"p50", scene.precision_strict},
                             {"r50", scene.recall_strict}});
  }
  return json{{"definition", report.definition},
              {"scenes", report.scenes},
              {"predictions", report.predictions},
              {"ground_truth", report.ground_truth},
              {"at_0.30", aggregate_to_json(report.loose)},
              {"at_0.50", aggregate_to_json(report.strict)},
              {"per_scene", std::move(per_scene)},
              {"errors", report.errors}};
}

std::string format_report_table(const MetricsReport& report) {
  const auto pct = [](double v) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%5.1f", v * 100.0);
    return std::string(buffer);
  };
  std::ostringstream out;
  out << "           AP30   AR30   AP50   AR50\n";
  out << "micro     " << pct(report.loose.micro_precision) << "  "
      << pct(report.loose.micro_recall) << "  "
      << pct(report.strict.micro_precision) << "  "
      << pct(report.strict.micro_recall) << "\n";
  out << "macro     " << pct(report.loose.macro_precision) << "  "
      << pct(report.loose.macro_recall) << "  "
      << pct(report.strict.macro_precision) << "  "
      << pct(report.strict.macro_recall) << "\n";
  out << "(scenes " << report.scenes << ", predictions " << report.predictions
      << ", ground truth " << report.ground_truth << "; " << report.definition
      << ")\n";
  return out.str();
}

CurveSummary reward_curve_report(std::span<const double> values, int window) {
  if (values.empty()) {
    throw std::invalid_argument("reward_curve_report: empty log");
  }
  if (window < 1) {
    throw std::invalid_argument("reward_curve_report: window must be >= 1");
  }
  const int effective =
      std::min<int>(window, static_cast<int>(values.size()));

  CurveSummary summary;
  summary.window = effective;
  summary.steps = values.size();
  summary.minimum = *std::min_element(values.begin(), values.end());
  summary.maximum = *std::max_element(values.begin(), values.end());

  summary.moving_average.resize(values.size());
  double rolling = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    rolling += values[i];
    if (i >= static_cast<std::size_t>(effective)) {
      rolling -= values[i - effective];
    }
    const double count = static_cast<double>(
        std::min<std::size_t>(i + 1, static_cast<std::size_t>(effective)));
    summary.moving_average[i] = rolling / count;
  }

  summary.initial_window_mean =
      std::accumulate(values.begin(), values.begin() + effective, 0.0) /
      effective;
  summary.final_window_mean =
      std::accumulate(values.end() - effective, values.end(), 0.0) / effective;
  summary.delta = summary.final_window_mean - summary.initial_window_mean;
  summary.ratio = summary.initial_window_mean != 0.0
                      ? summary.final_window_mean / summary.initial_window_mean
                      : 0.0;
  return summary;
}

json curve_summary_to_json(const CurveSummary& summary) {
  return json{{"window", summary.window},
              {"steps", summary.steps},
              {"initial_window_mean", summary.initial_window_mean},
              {"final_window_mean", summary.final_window_mean},
              {"delta", summary.delta},
              {"ratio", summary.ratio},
              {"min", summary.minimum},
              {"max", summary.maximum}};
}

std::string curve_csv(std::span<const double> values,
                      const CurveSummary& summary) {
  std::ostringstream out;
  out << "step,value,moving_average\n";
  for (std::size_t i = 0; i < values.size(); ++i) {
    char buffer[128];
    std::snprintf(buffer, sizeof(buffer), "%zu,%.17g,%.17g\n", i, values[i],
                  summary.moving_average[i]);
    out << buffer;
  }
  return out.str();
}

std::vector<double> read_csv_column(const std::filesystem::path& path,
                                    const std::string& column) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open file: " + path.string());
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("empty CSV file: " + path.string());
  }
  const auto split = [](const std::string& text) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream stream(text);
    while (std::getline(stream, field, ',')) {
      fields.push_back(field);
    }
    return fields;
  };
  const std::vector<std::string> header = split(line);
  const auto it = std::find(header.begin(), header.end(), column);
  if (it == header.end()) {
    throw std::runtime_error("column \"" + column + "\" not found in " +
                             path.string());
  }
  const std::size_t index = static_cast<std::size_t>(it - header.begin());

  std::vector<double> values;
  std::size_t line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) {
      continue;
    }
    const std::vector<std::string> fields = split(line);
    if (index >= fields.size()) {
      throw std::runtime_error("row " + std::to_string(line_number) +
                               " is missing column \"" + column + "\"");
    }
    values.push_back(std::stod(fields[index]));
  }
  return values;
}

}  // namespace dipr
