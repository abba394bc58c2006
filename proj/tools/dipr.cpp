// dipr: command-line front door for scene generation, batch reward scoring,
// GRPO training, greedy prediction, and detection evaluation. Every command
// is deterministic given its recorded config and seed.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dipr/eval.hpp"
#include "dipr/grpo.hpp"
#include "dipr/io.hpp"
#include "dipr/policy.hpp"
#include "dipr/response.hpp"
#include "dipr/rewards.hpp"
#include "dipr/scene.hpp"
#include "dipr/train.hpp"

namespace {

using dipr::JsonlError;
using nlohmann::json;
using nlohmann::ordered_json;

constexpr int kExitSuccess = 0;
constexpr int kExitFailure = 1;   // unexpected runtime failure
constexpr int kExitUsage = 2;     // bad flags or config
constexpr int kExitDataError = 3; // run finished but some records failed

bool quiet_logging() {
  const char* level = std::getenv("DIPR_LOG");
  return level != nullptr && std::string(level) == "quiet";
}

void info(const std::string& message) {
  if (!quiet_logging()) {
    std::cout << message << "\n";
  }
}

// Full run configuration; a JSON config file fills any subset of fields and
// command-line flags override on top.
struct RunConfig {
  std::uint64_t seed = 0;
  dipr::SceneConfig scene;
  dipr::PolicyConfig policy;
  dipr::GrpoConfig grpo;
  double look_iou_threshold = 0.5;
  double accuracy_iou_threshold = 0.5;
  std::string recall_bin_mode = "fraction";
  dipr::OptimizerConfig optimizer;
  int steps = 200;
  int batch_scenes = 0;
  int checkpoint_every = 0;  // 0 = only init/final

  dipr::RewardConfig rewards() const {
    dipr::RewardConfig config;
    config.look = dipr::make_look_config(grpo.group_size, look_iou_threshold);
    config.accuracy_iou_threshold = accuracy_iou_threshold;
    config.recall_bin_mode = recall_bin_mode == "integer"
                                 ? dipr::RecallBinMode::Integer
                                 : dipr::RecallBinMode::Fraction;
    return config;
  }
};

template <typename T>
void maybe_get(const json& section, const char* key, T& out) {
  if (section.contains(key)) {
    out = section.at(key).get<T>();
  }
}

void apply_config_file(RunConfig& config, const std::filesystem::path& path) {
  const json doc = json::parse(dipr::read_text_file(path));
  if (!doc.is_object()) {
    throw std::runtime_error("config file must hold a JSON object");
  }
  maybe_get(doc, "seed", config.seed);
  if (doc.contains("scene")) {
    const json& s = doc["scene"];
    if (s.contains("canvas")) {
      config.scene.canvas.width = s["canvas"].at(0).get<double>();
      config.scene.canvas.height = s["canvas"].at(1).get<double>();
    }
    maybe_get(s, "min_boxes", config.scene.min_boxes);
    maybe_get(s, "max_boxes", config.scene.max_boxes);
    maybe_get(s, "min_side", config.scene.min_side);
    maybe_get(s, "max_side", config.scene.max_side);
    maybe_get(s, "overlap_target", config.scene.overlap_target);
    maybe_get(s, "overlap_tolerance", config.scene.overlap_tolerance);
    maybe_get(s, "labels", config.scene.labels);
    maybe_get(s, "max_restarts", config.scene.max_restarts);
    maybe_get(s, "adjust_iterations", config.scene.adjust_iterations);
  }
  if (doc.contains("policy")) {
    const json& p = doc["policy"];
    maybe_get(p, "grid_size", config.policy.grid_size);
    maybe_get(p, "feature_grid", config.policy.features.grid);
    maybe_get(p, "noise_stddev", config.policy.features.noise_stddev);
    maybe_get(p, "noise_seed", config.policy.features.noise_seed);
    maybe_get(p, "init_scale", config.policy.init_scale);
    maybe_get(p, "control_token_bias", config.policy.control_token_bias);
    maybe_get(p, "max_tokens", config.policy.max_tokens);
    maybe_get(p, "temperature", config.policy.temperature);
    maybe_get(p, "box_label", config.policy.box_label);
    if (p.contains("mode")) {
      config.policy.mode = p["mode"].get<std::string>() == "raw"
                               ? dipr::DecodeMode::Raw
                               : dipr::DecodeMode::Structured;
    }
  }
  if (doc.contains("grpo")) {
    const json& g = doc["grpo"];
    maybe_get(g, "group_size", config.grpo.group_size);
    maybe_get(g, "clip_epsilon", config.grpo.clip_epsilon);
    maybe_get(g, "kl_coefficient", config.grpo.kl_coefficient);
    maybe_get(g, "advantage_std_floor", config.grpo.advantage_std_floor);
  }
  if (doc.contains("rewards")) {
    const json& r = doc["rewards"];
    maybe_get(r, "look_iou_threshold", config.look_iou_threshold);
    maybe_get(r, "accuracy_iou_threshold", config.accuracy_iou_threshold);
    maybe_get(r, "recall_bin_mode", config.recall_bin_mode);
  }
  if (doc.contains("optimizer")) {
    const json& o = doc["optimizer"];
    maybe_get(o, "kind", config.optimizer.kind);
    maybe_get(o, "learning_rate", config.optimizer.learning_rate);
    maybe_get(o, "beta1", config.optimizer.beta1);
    maybe_get(o, "beta2", config.optimizer.beta2);
    maybe_get(o, "epsilon", config.optimizer.epsilon);
  }
  if (doc.contains("train")) {
    const json& t = doc["train"];
    maybe_get(t, "steps", config.steps);
    maybe_get(t, "batch_scenes", config.batch_scenes);
    maybe_get(t, "checkpoint_every", config.checkpoint_every);
  }
}

ordered_json config_to_json(const RunConfig& config) {
  ordered_json doc;
  doc["seed"] = config.seed;
  doc["scene"] = {
      {"canvas", {config.scene.canvas.width, config.scene.canvas.height}},
      {"min_boxes", config.scene.min_boxes},
      {"max_boxes", config.scene.max_boxes},
      {"min_side", config.scene.min_side},
      {"max_side", config.scene.max_side},
      {"overlap_target", config.scene.overlap_target},
      {"overlap_tolerance", config.scene.overlap_tolerance},
      {"labels", config.scene.labels},
      {"max_restarts", config.scene.max_restarts},
      {"adjust_iterations", config.scene.adjust_iterations}};
  doc["policy"] = {
      {"grid_size", config.policy.grid_size},
      {"feature_grid", config.policy.features.grid},
      {"noise_stddev", config.policy.features.noise_stddev},
      {"noise_seed", config.policy.features.noise_seed},
      {"init_scale", config.policy.init_scale},
      {"control_token_bias", config.policy.control_token_bias},
      {"max_tokens", config.policy.max_tokens},
      {"temperature", config.policy.temperature},
      {"mode",
       config.policy.mode == dipr::DecodeMode::Raw ? "raw" : "structured"},
      {"box_label", config.policy.box_label}};
  doc["grpo"] = {{"group_size", config.grpo.group_size},
                 {"clip_epsilon", config.grpo.clip_epsilon},
                 {"kl_coefficient", config.grpo.kl_coefficient},
                 {"advantage_std_floor", config.grpo.advantage_std_floor}};
  doc["rewards"] = {{"look_iou_threshold", config.look_iou_threshold},
                    {"accuracy_iou_threshold", config.accuracy_iou_threshold},
                    {"recall_bin_mode", config.recall_bin_mode}};
  doc["optimizer"] = {{"kind", config.optimizer.kind},
                      {"learning_rate", config.optimizer.learning_rate},
                      {"beta1", config.optimizer.beta1},
                      {"beta2", config.optimizer.beta2},
                      {"epsilon", config.optimizer.epsilon}};
  doc["train"] = {{"steps", config.steps},
                  {"batch_scenes", config.batch_scenes},
                  {"checkpoint_every", config.checkpoint_every}};
  return doc;
}

int run_gen(const RunConfig& config, int count,
            const std::filesystem::path& out) {
  // All scenes are generated before anything is written, so a generation
  // failure leaves no partial file behind.
  const std::vector<dipr::Scene> scenes =
      dipr::generate_scenes(config.seed, config.scene, count);
  if (out.has_parent_path()) {
    std::filesystem::create_directories(out.parent_path());
  }
  dipr::write_scenes_jsonl(out, scenes);

  ordered_json manifest;
  manifest["command"] = "gen";
  manifest["count"] = count;
  manifest["output"] = out.string();
  manifest["config"] = config_to_json(config);
  std::filesystem::path manifest_path = out;
  manifest_path.replace_extension(".manifest.json");
  dipr::write_text_file(manifest_path, manifest.dump(2) + "\n");
  info("wrote " + std::to_string(scenes.size()) + " scenes to " +
       out.string());
  return kExitSuccess;
}

struct ComponentStats {
  double sum = 0.0;
  double minimum = std::numeric_limits<double>::infinity();
  double maximum = -std::numeric_limits<double>::infinity();
  std::size_t count = 0;

  void add(double value) {
    sum += value;
    minimum = std::min(minimum, value);
    maximum = std::max(maximum, value);
    ++count;
  }
  ordered_json to_json() const {
    if (count == 0) {
      return ordered_json{{"mean", 0.0}, {"min", 0.0}, {"max", 0.0}};
    }
    return ordered_json{{"mean", sum / static_cast<double>(count)},
                        {"min", minimum},
                        {"max", maximum}};
  }
};

int run_score(const RunConfig& config,
              const std::filesystem::path& responses_path,
              const std::filesystem::path& gt_path,
              const std::filesystem::path& out) {
  std::vector<JsonlError> file_errors;
  const std::vector<dipr::ResponseGroupRecord> groups =
      dipr::read_response_groups_jsonl(responses_path, file_errors);
  std::vector<JsonlError> gt_errors;
  const std::vector<dipr::SceneBoxesRecord> gt_records =
      dipr::read_scene_boxes_jsonl(gt_path, gt_errors);
  std::map<std::string, std::vector<dipr::LabeledBox>> ground_truth;
  for (const dipr::SceneBoxesRecord& record : gt_records) {
    ground_truth[record.scene_id] = record.boxes;
  }

  const dipr::RewardConfig reward_config = config.rewards();
  const int group_size = config.grpo.group_size;

  std::vector<std::string> lines;
  std::size_t error_records = 0;
  ComponentStats format_stats, look_stats, accuracy_stats, total_stats,
      advantage_stats;

  for (const JsonlError& e : file_errors) {
    ordered_json record{{"error", e.message},
                        {"file", responses_path.string()},
                        {"line", e.line_number}};
    lines.push_back(record.dump());
    ++error_records;
  }
  for (const JsonlError& e : gt_errors) {
    ordered_json record{{"error", e.message},
                        {"file", gt_path.string()},
                        {"line", e.line_number}};
    lines.push_back(record.dump());
    ++error_records;
  }

  for (const dipr::ResponseGroupRecord& record : groups) {
    if (static_cast<int>(record.responses.size()) != group_size) {
      ordered_json error{{"error", "group has " +
                                       std::to_string(record.responses.size()) +
                                       " responses, expected " +
                                       std::to_string(group_size)},
                         {"scene_id", record.scene_id}};
      lines.push_back(error.dump());
      ++error_records;
      continue;
    }
    const auto gt_it = ground_truth.find(record.scene_id);
    if (gt_it == ground_truth.end()) {
      ordered_json error{{"error", "scene_id not present in ground truth"},
                         {"scene_id", record.scene_id}};
      lines.push_back(error.dump());
      ++error_records;
      continue;
    }

    dipr::ResponseGroup group;
    group.scene_id = record.scene_id;
    group.ground_truth = gt_it->second;
    group.responses.reserve(record.responses.size());
    for (const std::string& raw : record.responses) {
      group.responses.push_back(dipr::parse_response(raw));
    }
    const std::vector<dipr::RewardBreakdown> breakdowns =
        dipr::score_group(group, reward_config);
    std::vector<double> totals(breakdowns.size());
    for (std::size_t i = 0; i < breakdowns.size(); ++i) {
      totals[i] = breakdowns[i].total;
    }
    const std::vector<double> advantages =
        dipr::group_advantages(totals, config.grpo.advantage_std_floor);

    for (std::size_t i = 0; i < breakdowns.size(); ++i) {
      ordered_json line{{"scene_id", record.scene_id},
                        {"response_index", i},
                        {"format", breakdowns[i].format},
                        {"look", breakdowns[i].look},
                        {"accuracy", breakdowns[i].accuracy},
                        {"total", breakdowns[i].total},
                        {"advantage", advantages[i]}};
      lines.push_back(line.dump());
      format_stats.add(breakdowns[i].format);
      look_stats.add(breakdowns[i].look);
      accuracy_stats.add(breakdowns[i].accuracy);
      total_stats.add(breakdowns[i].total);
      advantage_stats.add(advantages[i]);
    }
  }

  if (out.has_parent_path()) {
    std::filesystem::create_directories(out.parent_path());
  }
  dipr::write_lines(out, lines);

  ordered_json summary;
  summary["groups"] = groups.size();
  summary["responses"] = total_stats.count;
  summary["error_records"] = error_records;
  summary["format"] = format_stats.to_json();
  summary["look"] = look_stats.to_json();
  summary["accuracy"] = accuracy_stats.to_json();
  summary["total"] = total_stats.to_json();
  summary["advantage"] = advantage_stats.to_json();
  std::filesystem::path summary_path = out;
  summary_path.replace_extension(".summary.json");
  dipr::write_text_file(summary_path, summary.dump(2) + "\n");
  info(summary.dump(2));
  return error_records == 0 ? kExitSuccess : kExitDataError;
}

int run_train(RunConfig config, const std::filesystem::path& scenes_path,
              const std::filesystem::path& out_dir) {
  std::vector<JsonlError> errors;
  const std::vector<dipr::Scene> scenes =
      dipr::read_scenes_jsonl(scenes_path, errors);
  for (const JsonlError& e : errors) {
    std::cerr << "warning: " << scenes_path.string() << ":" << e.line_number
              << ": " << e.message << "\n";
  }
  if (scenes.empty()) {
    std::cerr << "error: no scenes in " << scenes_path.string() << "\n";
    return kExitUsage;
  }
  config.policy.canvas = scenes.front().canvas;

  std::filesystem::create_directories(out_dir);
  dipr::write_text_file(out_dir / "config.json",
                        config_to_json(config).dump(2) + "\n");

  dipr::ToyPolicy policy(config.policy, config.seed);
  policy.save(out_dir / "checkpoint_init.json");

  dipr::TrainConfig train_config;
  train_config.grpo = config.grpo;
  train_config.rewards = config.rewards();
  train_config.optimizer = config.optimizer;
  train_config.steps = config.steps;
  train_config.batch_scenes = config.batch_scenes;
  train_config.seed = config.seed;

  std::ofstream metrics(out_dir / "metrics.csv");
  if (!metrics) {
    std::cerr << "error: cannot write metrics log\n";
    return kExitFailure;
  }
  metrics << dipr::metrics_csv_header() << "\n";

  dipr::train(policy, scenes, train_config,
              [&](const dipr::StepDiagnostics& d) {
                metrics << dipr::metrics_csv_row(d) << "\n";
                metrics.flush();
                for (const dipr::SceneError& e : d.errors) {
                  std::cerr << "warning: step " << d.step << " scene "
                            << e.scene_id << ": " << e.message << "\n";
                }
                if (config.checkpoint_every > 0 &&
                    (d.step + 1) % config.checkpoint_every == 0) {
                  char name[64];
                  std::snprintf(name, sizeof(name), "checkpoint_%06d.json",
                                d.step + 1);
                  policy.save(out_dir / name);
                }
                if (!quiet_logging() && (d.step % 10 == 0)) {
                  std::cout << "step " << d.step << " mean_total "
                            << d.mean_total << " loss " << d.loss << "\n";
                }
              });

  policy.save(out_dir / "checkpoint_final.json");
  info("training done; artifacts in " + out_dir.string());
  return kExitSuccess;
}

int run_predict(const std::filesystem::path& checkpoint_path,
                const std::filesystem::path& scenes_path,
                const std::filesystem::path& out,
                const std::optional<std::filesystem::path>& responses_out) {
  const dipr::ToyPolicy policy = dipr::ToyPolicy::load(checkpoint_path);
  std::vector<JsonlError> errors;
  const std::vector<dipr::Scene> scenes =
      dipr::read_scenes_jsonl(scenes_path, errors);
  for (const JsonlError& e : errors) {
    std::cerr << "warning: " << scenes_path.string() << ":" << e.line_number
              << ": " << e.message << "\n";
  }

  std::vector<dipr::SceneBoxesRecord> predictions;
  std::vector<dipr::ResponseGroupRecord> raw_records;
  predictions.reserve(scenes.size());
  for (const dipr::Scene& scene : scenes) {
    const dipr::RolloutResult result = dipr::greedy_rollout(policy, scene);
    dipr::SceneBoxesRecord record;
    record.scene_id = scene.scene_id;
    if (result.response.answer_boxes.has_value()) {
      record.boxes = *result.response.answer_boxes;
    }
    predictions.push_back(std::move(record));
    if (responses_out) {
      raw_records.push_back({scene.scene_id, {result.response.raw}});
    }
  }
  if (out.has_parent_path()) {
    std::filesystem::create_directories(out.parent_path());
  }
  dipr::write_scene_boxes_jsonl(out, predictions);
  if (responses_out) {
    dipr::write_response_groups_jsonl(*responses_out, raw_records);
  }
  info("wrote greedy predictions for " + std::to_string(predictions.size()) +
       " scenes to " + out.string());
  return kExitSuccess;
}

int run_eval(const std::filesystem::path& pred_path,
             const std::filesystem::path& gt_path,
             const std::optional<std::filesystem::path>& out) {
  std::vector<JsonlError> errors;
  const std::vector<dipr::SceneBoxesRecord> pred_records =
      dipr::read_scene_boxes_jsonl(pred_path, errors);
  const std::vector<dipr::SceneBoxesRecord> gt_records =
      dipr::read_scene_boxes_jsonl(gt_path, errors);
  std::map<std::string, std::vector<dipr::LabeledBox>> predictions;
  std::map<std::string, std::vector<dipr::LabeledBox>> ground_truth;
  for (const dipr::SceneBoxesRecord& record : pred_records) {
    predictions[record.scene_id] = record.boxes;
  }
  for (const dipr::SceneBoxesRecord& record : gt_records) {
    ground_truth[record.scene_id] = record.boxes;
  }

  const dipr::MetricsReport report = dipr::evaluate(predictions, ground_truth);
  std::cout << dipr::format_report_table(report);
  if (out) {
    if (out->has_parent_path()) {
      std::filesystem::create_directories(out->parent_path());
    }
    dipr::write_text_file(*out, dipr::report_to_json(report).dump(2) + "\n");
  }
  return report.errors.empty() && errors.empty() ? kExitSuccess
                                                 : kExitDataError;
}

int run_report(const std::filesystem::path& metrics_path,
               const std::string& column, int window,
               const std::optional<std::filesystem::path>& out,
               const std::optional<std::filesystem::path>& csv_out) {
  const std::vector<double> values =
      dipr::read_csv_column(metrics_path, column);
  const dipr::CurveSummary summary = dipr::reward_curve_report(values, window);
  const json doc = dipr::curve_summary_to_json(summary);
  std::cout << doc.dump(2) << "\n";
  if (out) {
    dipr::write_text_file(*out, doc.dump(2) + "\n");
  }
  if (csv_out) {
    dipr::write_text_file(*csv_out, dipr::curve_csv(values, summary));
  }
  return kExitSuccess;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DIP-R1 style rewards, GRPO training, and detection metrics "
               "on a synthetic crowded-scene environment"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "JSON config file")
      ->check(CLI::ExistingFile);

  // gen
  auto* gen = app.add_subcommand("gen", "generate synthetic scenes");
  int gen_count = 10;
  std::string gen_out = "scenes.jsonl";
  std::optional<std::uint64_t> seed_flag;
  gen->add_option("--count", gen_count, "number of scenes")
      ->check(CLI::NonNegativeNumber);
  gen->add_option("--out", gen_out, "output scenes JSONL");
  gen->add_option("--seed", seed_flag, "master seed");
  std::optional<double> gen_overlap, gen_tolerance;
  std::optional<int> gen_min_boxes, gen_max_boxes;
  gen->add_option("--overlap-target", gen_overlap, "mean pairwise IoU target");
  gen->add_option("--overlap-tolerance", gen_tolerance, "tolerance band");
  gen->add_option("--min-boxes", gen_min_boxes, "minimum boxes per scene");
  gen->add_option("--max-boxes", gen_max_boxes, "maximum boxes per scene");

  // score
  auto* score = app.add_subcommand("score", "score response groups");
  std::string score_responses, score_gt, score_out = "rewards.jsonl";
  std::optional<int> score_group_size;
  score->add_option("--responses", score_responses, "response groups JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  score->add_option("--gt", score_gt, "ground-truth JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  score->add_option("--out", score_out, "output rewards JSONL");
  score->add_option("--group-size", score_group_size, "expected G");

  // train
  auto* train_cmd = app.add_subcommand("train", "run GRPO training");
  std::string train_scenes, train_out = "run";
  std::optional<int> steps_flag, batch_flag;
  std::optional<double> lr_flag;
  train_cmd->add_option("--scenes", train_scenes, "training scenes JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--out", train_out, "output run directory");
  train_cmd->add_option("--steps", steps_flag, "training steps");
  train_cmd->add_option("--batch-scenes", batch_flag,
                        "scenes per step (0 = all)");
  train_cmd->add_option("--seed", seed_flag, "master seed");
  train_cmd->add_option("--learning-rate", lr_flag, "optimizer step size");

  // predict
  auto* predict = app.add_subcommand("predict", "greedy-decode predictions");
  std::string predict_checkpoint, predict_scenes, predict_out = "preds.jsonl";
  std::optional<std::filesystem::path> predict_responses;
  predict->add_option("--checkpoint", predict_checkpoint, "policy checkpoint")
      ->required()
      ->check(CLI::ExistingFile);
  predict->add_option("--scenes", predict_scenes, "scenes JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  predict->add_option("--out", predict_out, "predictions JSONL");
  predict->add_option("--responses-out", predict_responses,
                      "also write raw response texts");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "detection metrics report");
  std::string eval_pred, eval_gt;
  std::optional<std::filesystem::path> eval_out;
  eval_cmd->add_option("--pred", eval_pred, "predictions JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--gt", eval_gt, "ground-truth JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--out", eval_out, "report JSON path");

  // report
  auto* report = app.add_subcommand("report", "summarize a metrics log");
  std::string report_metrics, report_column = "mean_total";
  int report_window = 20;
  std::optional<std::filesystem::path> report_out, report_csv;
  report->add_option("--metrics", report_metrics, "metrics CSV")
      ->required()
      ->check(CLI::ExistingFile);
  report->add_option("--column", report_column, "CSV column to summarize");
  report->add_option("--window", report_window, "moving-average window")
      ->check(CLI::PositiveNumber);
  report->add_option("--out", report_out, "summary JSON path");
  report->add_option("--csv", report_csv, "plot-ready CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    RunConfig config;
    if (!config_path.empty()) {
      apply_config_file(config, config_path);
    }
    if (seed_flag) {
      config.seed = *seed_flag;
    }
    if (gen_overlap) {
      config.scene.overlap_target = *gen_overlap;
    }
    if (gen_tolerance) {
      config.scene.overlap_tolerance = *gen_tolerance;
    }
    if (gen_min_boxes) {
      config.scene.min_boxes = *gen_min_boxes;
    }
    if (gen_max_boxes) {
      config.scene.max_boxes = *gen_max_boxes;
    }
    if (score_group_size) {
      config.grpo.group_size = *score_group_size;
    }
    if (steps_flag) {
      config.steps = *steps_flag;
    }
    if (batch_flag) {
      config.batch_scenes = *batch_flag;
    }
    if (lr_flag) {
      config.optimizer.learning_rate = *lr_flag;
    }

    if (gen->parsed()) {
      return run_gen(config, gen_count, gen_out);
    }
    if (score->parsed()) {
      return run_score(config, score_responses, score_gt, score_out);
    }
    if (train_cmd->parsed()) {
      return run_train(config, train_scenes, train_out);
    }
    if (predict->parsed()) {
      return run_predict(predict_checkpoint, predict_scenes, predict_out,
                         predict_responses);
    }
    if (eval_cmd->parsed()) {
      return run_eval(eval_pred, eval_gt, eval_out);
    }
    if (report->parsed()) {
      return run_report(report_metrics, report_column, report_window,
                        report_out, report_csv);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}
