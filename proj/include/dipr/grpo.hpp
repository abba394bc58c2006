#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

namespace dipr {

// One policy rollout: token ids plus per-token log-probabilities under the
// current, old (sampling-time), and frozen reference policies. All three
// sequences have exactly |tokens| entries of finite, non-positive values.
struct TokenTrajectory {
  std::vector<int> tokens;
  Eigen::VectorXd logp_current;
  Eigen::VectorXd logp_old;
  Eigen::VectorXd logp_reference;
  double reward = 0.0;
};

struct GrpoConfig {
  int group_size = 8;
  double clip_epsilon = 0.2;
  double kl_coefficient = 0.04;
  double advantage_std_floor = 1e-8;
};

// Group-relative advantages (r_i - mean) / std with the population standard
// deviation; a group whose std falls below the floor gets all-zero
// advantages instead of dividing by (near) zero.
std::vector<double> group_advantages(std::span<const double> rewards,
                                     double std_floor = 1e-8);

// Non-negative per-token KL estimator exp(d) - d - 1, d = logp_ref - logp_cur;
// zero exactly when the two log-probabilities agree.
double kl_estimate(double logp_reference, double logp_current);

struct GrpoDiagnostics {
  double mean_ratio = 0.0;
  double clip_fraction = 0.0;
  double mean_kl = 0.0;
};

struct GrpoLossResult {
  double loss = 0.0;
  GrpoDiagnostics diagnostics;
};

// Token-length-normalized clipped surrogate with KL penalty:
//   loss = -(1 / sum |o_i|) sum_i sum_t [ min(rho * A_i, clip(rho) * A_i)
//                                         - beta * kl_t ]
// with rho = exp(logp_current - logp_old). The per-response advantage is
// applied uniformly to all tokens of its trajectory.
GrpoLossResult grpo_loss(std::span<const TokenTrajectory> trajectories,
                         std::span<const double> advantages,
                         const GrpoConfig& config);

// d(loss)/d(logp_current), one vector per trajectory, aligned with tokens.
// Composes with any policy's d(logp)/d(parameters) for the gradient step.
std::vector<Eigen::VectorXd> grpo_loss_backward(
    std::span<const TokenTrajectory> trajectories,
    std::span<const double> advantages, const GrpoConfig& config);

}  // namespace dipr
