#include "dipr/train.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace dipr {

Optimizer::Optimizer(OptimizerConfig config, Eigen::Index parameter_count)
    : config_(std::move(config)), adam_(config_.kind == "adam") {
  if (!adam_ && config_.kind != "sgd") {
    throw std::invalid_argument("Optimizer: unknown kind \"" + config_.kind +
                                "\"");
  }
  if (!(config_.learning_rate > 0.0)) {
    throw std::invalid_argument("Optimizer: learning_rate must be positive");
  }
  if (adam_) {
    first_moment_ = Eigen::VectorXd::Zero(parameter_count);
    second_moment_ = Eigen::VectorXd::Zero(parameter_count);
  }
}

void Optimizer::step(Eigen::VectorXd& params, const Eigen::VectorXd& gradient) {
  if (gradient.size() != params.size()) {
    throw std::invalid_argument("Optimizer::step: size mismatch");
  }
  if (!adam_) {
    params -= config_.learning_rate * gradient;
    return;
  }
  ++steps_taken_;
  first_moment_ = config_.beta1 * first_moment_ + (1.0 - config_.beta1) * gradient;
  second_moment_ = config_.beta2 * second_moment_ +
                   (1.0 - config_.beta2) * gradient.cwiseProduct(gradient);
  const double bias1 = 1.0 - std::pow(config_.beta1, steps_taken_);
  const double bias2 = 1.0 - std::pow(config_.beta2, steps_taken_);
  params.array() -= config_.learning_rate * (first_moment_.array() / bias1) /
                    ((second_moment_.array() / bias2).sqrt() + config_.epsilon);
}

namespace {

// Deterministic rotating batch: step k covers scenes
// [k*batch, k*batch + batch) modulo the pool size.
std::vector<std::size_t> batch_indices(std::size_t scene_count,
                                       int batch_scenes, int step_index) {
  std::vector<std::size_t> indices;
  if (batch_scenes <= 0 ||
      static_cast<std::size_t>(batch_scenes) >= scene_count) {
    indices.resize(scene_count);
    for (std::size_t i = 0; i < scene_count; ++i) {
      indices[i] = i;
    }
    return indices;
  }
  const std::size_t start =
      (static_cast<std::size_t>(step_index) * batch_scenes) % scene_count;
  indices.reserve(batch_scenes);
  for (int i = 0; i < batch_scenes; ++i) {
    indices.push_back((start + i) % scene_count);
  }
  return indices;
}

}  // namespace

StepDiagnostics train_step(ToyPolicy& policy, const ToyPolicy& reference,
                           std::span<const Scene> scenes,
                           const TrainConfig& config, int step_index,
                           Optimizer& optimizer) {
  if (scenes.empty()) {
    throw std::invalid_argument("train_step: empty scene set");
  }
  if (config.grpo.group_size != config.rewards.look.group_size) {
    throw std::invalid_argument(
        "train_step: GRPO and look-reward group sizes differ");
  }

  StepDiagnostics diagnostics;
  diagnostics.step = step_index;

  const SplitRng step_rng =
      SplitRng(config.seed).substream("train").substream(
          static_cast<std::uint64_t>(step_index));

  Eigen::VectorXd gradient = Eigen::VectorXd::Zero(policy.parameter_count());
  const int group_size = config.grpo.group_size;

  double loss_sum = 0.0;
  double total_sum = 0.0, format_sum = 0.0, look_sum = 0.0, accuracy_sum = 0.0;
  double advantage_sum = 0.0, kl_sum = 0.0, clip_sum = 0.0, ratio_sum = 0.0;
  std::size_t groups_done = 0;

  for (std::size_t scene_index :
       batch_indices(scenes.size(), config.batch_scenes, step_index)) {
    const Scene& scene = scenes[scene_index];
    try {
      const SplitRng scene_rng = step_rng.substream(scene_index);

      ResponseGroup group;
      group.scene_id = scene.scene_id;
      group.ground_truth = scene.ground_truth;
      std::vector<TokenTrajectory> trajectories;
      trajectories.reserve(group_size);
      for (int g = 0; g < group_size; ++g) {
        SplitRng sample_rng = scene_rng.substream(static_cast<std::uint64_t>(g));
        RolloutResult result = rollout(policy, scene, sample_rng.next_u64());
        result.trajectory.logp_reference =
            score_log_probs(reference, result.trajectory.tokens, scene);
        group.responses.push_back(std::move(result.response));
        trajectories.push_back(std::move(result.trajectory));
      }

      const std::vector<RewardBreakdown> breakdowns =
          score_group(group, config.rewards);
      std::vector<double> totals(breakdowns.size());
      for (std::size_t i = 0; i < breakdowns.size(); ++i) {
        totals[i] = breakdowns[i].total;
        trajectories[i].reward = totals[i];
      }
      const std::vector<double> advantages =
          group_advantages(totals, config.grpo.advantage_std_floor);

      const GrpoLossResult loss =
          grpo_loss(trajectories, advantages, config.grpo);
      const std::vector<Eigen::VectorXd> coefficients =
          grpo_loss_backward(trajectories, advantages, config.grpo);
      for (std::size_t i = 0; i < trajectories.size(); ++i) {
        policy.accumulate_logp_gradient(trajectories[i].tokens, scene,
                                        coefficients[i], gradient);
      }

      loss_sum += loss.loss;
      kl_sum += loss.diagnostics.mean_kl;
      clip_sum += loss.diagnostics.clip_fraction;
      ratio_sum += loss.diagnostics.mean_ratio;
      for (std::size_t i = 0; i < breakdowns.size(); ++i) {
        total_sum += breakdowns[i].total;
        format_sum += breakdowns[i].format;
        look_sum += breakdowns[i].look;
        accuracy_sum += breakdowns[i].accuracy;
        advantage_sum += advantages[i];
      }
      diagnostics.rollouts += breakdowns.size();
      ++groups_done;
    } catch (const std::exception& e) {
      diagnostics.errors.push_back({scene.scene_id, e.what()});
    }
  }

  if (groups_done == 0) {
    return diagnostics;  // nothing to update; errors carry the story
  }

  const double group_count = static_cast<double>(groups_done);
  const double rollout_count = static_cast<double>(diagnostics.rollouts);
  gradient /= group_count;

  diagnostics.loss = loss_sum / group_count;
  diagnostics.mean_kl = kl_sum / group_count;
  diagnostics.clip_fraction = clip_sum / group_count;
  diagnostics.mean_ratio = ratio_sum / group_count;
  diagnostics.mean_total = total_sum / rollout_count;
  diagnostics.mean_format = format_sum / rollout_count;
  diagnostics.mean_look = look_sum / rollout_count;
  diagnostics.mean_accuracy = accuracy_sum / rollout_count;
  diagnostics.mean_advantage = advantage_sum / rollout_count;
  diagnostics.grad_norm = gradient.norm();

  optimizer.step(policy.parameters(), gradient);
  return diagnostics;
}

std::vector<StepDiagnostics> train(
    ToyPolicy& policy, std::span<const Scene> scenes, const TrainConfig& config,
    const std::function<void(const StepDiagnostics&)>& on_step) {
  const ToyPolicy reference = policy;  // frozen KL anchor
  Optimizer optimizer(config.optimizer, policy.parameter_count());
  std::vector<StepDiagnostics> history;
  history.reserve(config.steps);
  for (int step = 0; step < config.steps; ++step) {
    StepDiagnostics diagnostics =
        train_step(policy, reference, scenes, config, step, optimizer);
    if (on_step) {
      on_step(diagnostics);
    }
    history.push_back(std::move(diagnostics));
  }
  return history;
}

std::string metrics_csv_header() {
  return "step,loss,mean_total,mean_format,mean_look,mean_accuracy,"
         "mean_advantage,mean_kl,clip_fraction,mean_ratio,grad_norm,rollouts,"
         "errors";
}

std::string metrics_csv_row(const StepDiagnostics& d) {
  char buffer[512];
  std::snprintf(buffer, sizeof(buffer),
                "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                "%.17g,%zu,%zu",
                d.step, d.loss, d.mean_total, d.mean_format, d.mean_look,
                d.mean_accuracy, d.mean_advantage, d.mean_kl, d.clip_fraction,
                d.mean_ratio, d.grad_norm, d.rollouts, d.errors.size());
  return buffer;
}

}  // namespace dipr
