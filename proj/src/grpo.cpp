#include "dipr/grpo.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dipr {

namespace {

void check_config(const GrpoConfig& config) {
  if (config.group_size < 2) {
    throw std::invalid_argument("GrpoConfig: group_size must be >= 2");
  }
  if (!(config.clip_epsilon > 0.0) || config.clip_epsilon >= 1.0) {
    throw std::invalid_argument("GrpoConfig: clip_epsilon must be in (0, 1)");
  }
  if (config.kl_coefficient < 0.0) {
    throw std::invalid_argument("GrpoConfig: kl_coefficient must be >= 0");
  }
}

void check_structure(std::span<const TokenTrajectory> trajectories,
                     std::span<const double> advantages) {
  if (trajectories.size() != advantages.size()) {
    throw std::invalid_argument(
        "grpo_loss: trajectory and advantage counts differ");
  }
  for (std::size_t i = 0; i < trajectories.size(); ++i) {
    const TokenTrajectory& t = trajectories[i];
    const auto n = static_cast<Eigen::Index>(t.tokens.size());
    if (t.logp_current.size() != n || t.logp_old.size() != n ||
        t.logp_reference.size() != n) {
      throw std::invalid_argument(
          "grpo_loss: log-prob sequence length mismatch in trajectory " +
          std::to_string(i));
    }
  }
}

}  // namespace

std::vector<double> group_advantages(std::span<const double> rewards,
                                     double std_floor) {
  if (rewards.size() < 2) {
    throw std::invalid_argument("group_advantages: needs at least 2 rewards");
  }
  const double n = static_cast<double>(rewards.size());
  double mean = 0.0;
  for (double r : rewards) {
    mean += r;
  }
  mean /= n;
  double variance = 0.0;
  for (double r : rewards) {
    variance += (r - mean) * (r - mean);
  }
  variance /= n;  // population variance
  const double std_dev = std::sqrt(variance);

  std::vector<double> advantages(rewards.size(), 0.0);
  if (std_dev < std_floor) {
    return advantages;
  }
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    advantages[i] = (rewards[i] - mean) / std_dev;
  }
  return advantages;
}

double kl_estimate(double logp_reference, double logp_current) {
  const double d = logp_reference - logp_current;
  return std::exp(d) - d - 1.0;
}

GrpoLossResult grpo_loss(std::span<const TokenTrajectory> trajectories,
                         std::span<const double> advantages,
                         const GrpoConfig& config) {
  check_config(config);
  check_structure(trajectories, advantages);

  std::size_t total_tokens = 0;
  for (const TokenTrajectory& t : trajectories) {
    total_tokens += t.tokens.size();
  }
  GrpoLossResult result;
  if (total_tokens == 0) {
    return result;
  }

  double objective = 0.0;
  double ratio_sum = 0.0;
  double kl_sum = 0.0;
  std::size_t clipped = 0;
  for (std::size_t i = 0; i < trajectories.size(); ++i) {
    const TokenTrajectory& t = trajectories[i];
    const double advantage = advantages[i];
    for (Eigen::Index k = 0; k < t.logp_current.size(); ++k) {
      const double ratio = std::exp(t.logp_current[k] - t.logp_old[k]);
      const double clipped_ratio =
          std::clamp(ratio, 1.0 - config.clip_epsilon, 1.0 + config.clip_epsilon);
      const double surrogate =
          std::min(ratio * advantage, clipped_ratio * advantage);
      const double kl = kl_estimate(t.logp_reference[k], t.logp_current[k]);
      objective += surrogate - config.kl_coefficient * kl;

      ratio_sum += ratio;
      kl_sum += kl;
      if (std::abs(ratio - 1.0) > config.clip_epsilon) {
        ++clipped;
      }
    }
  }

  const double n = static_cast<double>(total_tokens);
  result.loss = -objective / n;
  result.diagnostics.mean_ratio = ratio_sum / n;
  result.diagnostics.mean_kl = kl_sum / n;
  result.diagnostics.clip_fraction = static_cast<double>(clipped) / n;
  return result;
}

std::vector<Eigen::VectorXd> grpo_loss_backward(
    std::span<const TokenTrajectory> trajectories,
    std::span<const double> advantages, const GrpoConfig& config) {
  check_config(config);
  check_structure(trajectories, advantages);

  std::size_t total_tokens = 0;
  for (const TokenTrajectory& t : trajectories) {
    total_tokens += t.tokens.size();
  }
  std::vector<Eigen::VectorXd> gradients(trajectories.size());
  if (total_tokens == 0) {
    for (std::size_t i = 0; i < trajectories.size(); ++i) {
      gradients[i] = Eigen::VectorXd::Zero(0);
    }
    return gradients;
  }
  const double inv_n = 1.0 / static_cast<double>(total_tokens);

  for (std::size_t i = 0; i < trajectories.size(); ++i) {
    const TokenTrajectory& t = trajectories[i];
    const double advantage = advantages[i];
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(t.logp_current.size());
    for (Eigen::Index k = 0; k < t.logp_current.size(); ++k) {
      const double ratio = std::exp(t.logp_current[k] - t.logp_old[k]);
      const double clipped_ratio =
          std::clamp(ratio, 1.0 - config.clip_epsilon, 1.0 + config.clip_epsilon);
      // The surrogate depends on logp_current only through the unclipped
      // branch; ties at a clip boundary resolve to the unclipped branch.
      double surrogate_grad = 0.0;
      if (ratio * advantage <= clipped_ratio * advantage) {
        surrogate_grad = advantage * ratio;
      }
      // d/dlogp_cur [exp(d) - d - 1], d = ref - cur, is 1 - exp(d).
      const double kl_grad =
          1.0 - std::exp(t.logp_reference[k] - t.logp_current[k]);
      grad[k] = -inv_n * (surrogate_grad - config.kl_coefficient * kl_grad);
    }
    gradients[i] = std::move(grad);
  }
  return gradients;
}

}  // namespace dipr
