#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dipr/grpo.hpp"
#include "dipr/policy.hpp"
#include "dipr/rewards.hpp"
#include "dipr/scene.hpp"

namespace dipr {

struct OptimizerConfig {
  std::string kind = "adam";  // "adam" or "sgd"
  double learning_rate = 0.05;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class Optimizer {
 public:
  Optimizer(OptimizerConfig config, Eigen::Index parameter_count);

  void step(Eigen::VectorXd& params, const Eigen::VectorXd& gradient);

 private:
  OptimizerConfig config_;
  bool adam_;
  int steps_taken_ = 0;
  Eigen::VectorXd first_moment_;
  Eigen::VectorXd second_moment_;
};

struct TrainConfig {
  GrpoConfig grpo;
  RewardConfig rewards;
  OptimizerConfig optimizer;
  int steps = 200;
  int batch_scenes = 0;  // 0 = all scenes every step
  std::uint64_t seed = 0;
};

struct SceneError {
  std::string scene_id;
  std::string message;
};

struct StepDiagnostics {
  int step = 0;
  double loss = 0.0;
  double mean_total = 0.0;
  double mean_format = 0.0;
  double mean_look = 0.0;
  double mean_accuracy = 0.0;
  double mean_advantage = 0.0;
  double mean_kl = 0.0;
  double clip_fraction = 0.0;
  double mean_ratio = 0.0;
  double grad_norm = 0.0;
  std::size_t rollouts = 0;
  std::vector<SceneError> errors;
};

// One GRPO iteration: samples G rollouts per scene from the current policy
// (which serves as the old policy for this step), scores them, computes
// group-relative advantages and the clipped KL-regularized loss, and applies
// one optimizer step. Per-scene scoring failures are recorded and skipped
// rather than aborting the batch.
StepDiagnostics train_step(ToyPolicy& policy, const ToyPolicy& reference,
                           std::span<const Scene> scenes,
                           const TrainConfig& config, int step_index,
                           Optimizer& optimizer);

// Runs `config.steps` iterations against a frozen copy of the initial policy
// as the KL reference. The callback sees every step's diagnostics.
std::vector<StepDiagnostics> train(
    ToyPolicy& policy, std::span<const Scene> scenes, const TrainConfig& config,
    const std::function<void(const StepDiagnostics&)>& on_step = {});

// Metrics-log CSV format; rows print doubles with %.17g so reruns with the
// same seed produce byte-identical logs.
std::string metrics_csv_header();
std::string metrics_csv_row(const StepDiagnostics& diagnostics);

}  // namespace dipr
