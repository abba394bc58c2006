#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dipr/grpo.hpp"
#include "dipr/response.hpp"
#include "dipr/rng.hpp"
#include "dipr/scene.hpp"

namespace dipr {

// Token vocabulary of the toy detector: one token per grid cell (row-major)
// plus three control tokens.
class Vocabulary {
 public:
  explicit Vocabulary(int grid_size);

  int grid_size() const { return grid_size_; }
  int size() const { return grid_size_ * grid_size_ + 3; }

  int cell_token(int col, int row) const { return row * grid_size_ + col; }
  bool is_cell(int token) const {
    return token >= 0 && token < grid_size_ * grid_size_;
  }
  int cell_col(int token) const { return token % grid_size_; }
  int cell_row(int token) const { return token / grid_size_; }

  int emit_look() const { return grid_size_ * grid_size_; }
  int emit_answer() const { return grid_size_ * grid_size_ + 1; }
  int stop() const { return grid_size_ * grid_size_ + 2; }

 private:
  int grid_size_;
};

// Decode position within the emission grammar. Look/Answer alternate between
// expecting a first corner (or a control token) and a mandatory second corner.
enum class Phase : int {
  kStart = 0,
  kLookFirst = 1,
  kLookSecond = 2,
  kAnswerFirst = 3,
  kAnswerSecond = 4,
};
inline constexpr int kNumPhases = 5;

Phase next_phase(Phase phase, int token, const Vocabulary& vocab);

// Structured mode masks sampling to tokens that keep the response grammar
// valid by construction; Raw mode samples the full vocabulary and can emit
// malformed streams (exercising the format reward).
enum class DecodeMode { Structured, Raw };

struct PolicyConfig {
  int grid_size = 16;
  CanvasSize canvas;
  FeatureConfig features;
  double init_scale = 0.01;
  // Added to the initial bias of control tokens so that early rollouts emit
  // short sections instead of wandering through cell tokens until the cap.
  double control_token_bias = 4.0;
  int max_tokens = 64;
  double temperature = 1.0;
  DecodeMode mode = DecodeMode::Structured;
  std::string box_label = "person";
};

// Factored categorical token model: per decode phase, a linear map from the
// scene feature vector to logits over the vocabulary. Small enough to train
// with plain policy gradients in seconds, expressive enough to localize
// boxes on the feature grid.
class ToyPolicy {
 public:
  ToyPolicy(PolicyConfig config, std::uint64_t init_seed);

  const PolicyConfig& config() const { return config_; }
  const Vocabulary& vocab() const { return vocab_; }
  int feature_dim() const { return feature_dim_; }

  Eigen::VectorXd& parameters() { return params_; }
  const Eigen::VectorXd& parameters() const { return params_; }
  Eigen::Index parameter_count() const { return params_.size(); }

  // Log-probabilities over the whole vocabulary for one decode step;
  // masked-out tokens get -inf. Identical arithmetic on the sampling and
  // offline scoring paths, so recomputed log-probs match bit for bit.
  Eigen::VectorXd step_log_probs(Phase phase,
                                 const Eigen::VectorXd& features) const;

  // Tokens allowed in `phase` under this policy's decode mode.
  std::vector<int> allowed_tokens(Phase phase) const;

  Eigen::VectorXd features_for(const Scene& scene) const;

  // Accumulates coeff * d(logp(token))/d(params) into `gradient` for every
  // step of the replayed trajectory.
  void accumulate_logp_gradient(std::span<const int> tokens,
                                const Scene& scene,
                                const Eigen::VectorXd& per_token_coeff,
                                Eigen::VectorXd& gradient) const;

  void save(const std::filesystem::path& path) const;
  static ToyPolicy load(const std::filesystem::path& path);

 private:
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                 Eigen::RowMajor>>
  phase_weights(int phase) const;

  PolicyConfig config_;
  Vocabulary vocab_;
  int feature_dim_;
  Eigen::VectorXd params_;
};

struct RolloutResult {
  StructuredResponse response;
  TokenTrajectory trajectory;  // logp_current == logp_old at sampling time;
                               // logp_reference left empty for the caller
};

// Samples one trajectory autoregressively until STOP or the length cap and
// decodes it into response text. Deterministic for a fixed seed.
RolloutResult rollout(const ToyPolicy& policy, const Scene& scene,
                      std::uint64_t seed);

// Greedy (argmax) variant used for evaluation; ties break toward the lowest
// token id.
RolloutResult greedy_rollout(const ToyPolicy& policy, const Scene& scene);

// Per-token log-probabilities of an existing token sequence under `policy`;
// matches the sampling-time values exactly for the policy that produced it.
Eigen::VectorXd score_log_probs(const ToyPolicy& policy,
                                std::span<const int> tokens,
                                const Scene& scene);

// Renders a token stream as think-look-answer text. Structured mode always
// emits all three sections; Raw mode emits only the sections whose control
// token appeared, so malformed streams yield format-invalid text.
std::string decode_tokens(std::span<const int> tokens, const Vocabulary& vocab,
                          const CanvasSize& canvas, DecodeMode mode,
                          const std::string& box_label,
                          std::vector<std::string>* diagnostics = nullptr);

// Inverse of decode_tokens for grid-aligned boxes: emits
// [EMIT_LOOK, look corners..., EMIT_ANSWER, answer corners..., STOP].
std::vector<int> encode_boxes(std::span<const LabeledBox> look_boxes,
                              std::span<const LabeledBox> answer_boxes,
                              const Vocabulary& vocab,
                              const CanvasSize& canvas);

}  // namespace dipr
