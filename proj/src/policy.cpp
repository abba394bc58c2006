#include "dipr/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "dipr/io.hpp"

namespace dipr {

namespace {

using nlohmann::json;

constexpr std::string_view kThinkPlaceholder =
    "Scanning the scene and checking regions that are hard to separate.";

Vocabulary vocab_of(const PolicyConfig& config) {
  if (config.grid_size < 2) {
    throw std::invalid_argument("PolicyConfig: grid_size must be >= 2");
  }
  return Vocabulary(config.grid_size);
}

// Corner cells are mapped to their centers.
double cell_center(int index, double canvas_extent, int grid) {
  return (index + 0.5) * canvas_extent / grid;
}

int center_to_cell(double coordinate, double canvas_extent, int grid) {
  const int cell =
      static_cast<int>(std::lround(coordinate * grid / canvas_extent - 0.5));
  return std::clamp(cell, 0, grid - 1);
}

}  // namespace

Vocabulary::Vocabulary(int grid_size) : grid_size_(grid_size) {
  if (grid_size < 1) {
    throw std::invalid_argument("Vocabulary: grid_size must be positive");
  }
}

Phase next_phase(Phase phase, int token, const Vocabulary& vocab) {
  if (token == vocab.emit_look()) {
    return Phase::kLookFirst;
  }
  if (token == vocab.emit_answer()) {
    return Phase::kAnswerFirst;
  }
  if (!vocab.is_cell(token)) {
    return phase;  // STOP; the caller terminates the walk
  }
  switch (phase) {
    case Phase::kLookFirst:
      return Phase::kLookSecond;
    case Phase::kLookSecond:
      return Phase::kLookFirst;
    case Phase::kAnswerFirst:
      return Phase::kAnswerSecond;
    case Phase::kAnswerSecond:
      return Phase::kAnswerFirst;
    case Phase::kStart:
      return Phase::kStart;  // cell outside any section (raw mode only)
  }
  return phase;
}

ToyPolicy::ToyPolicy(PolicyConfig config, std::uint64_t init_seed)
    : config_(std::move(config)),
      vocab_(vocab_of(config_)),
      feature_dim_(config_.features.grid * config_.features.grid + 1) {
  if (config_.max_tokens < 2) {
    throw std::invalid_argument("PolicyConfig: max_tokens must be >= 2");
  }
  if (!(config_.temperature > 0.0)) {
    throw std::invalid_argument("PolicyConfig: temperature must be positive");
  }
  const Eigen::Index count =
      static_cast<Eigen::Index>(kNumPhases) * vocab_.size() * feature_dim_;
  params_.resize(count);
  SplitRng rng = SplitRng(init_seed).substream("policy_init");
  for (Eigen::Index i = 0; i < count; ++i) {
    params_[i] = config_.init_scale * rng.normal();
  }
  // Bias column of the control tokens; keeps early sections short.
  for (int phase = 0; phase < kNumPhases; ++phase) {
    for (int token : {vocab_.emit_look(), vocab_.emit_answer(), vocab_.stop()}) {
      const Eigen::Index offset =
          (static_cast<Eigen::Index>(phase) * vocab_.size() + token) *
              feature_dim_ +
          (feature_dim_ - 1);
      params_[offset] += config_.control_token_bias;
    }
  }
}

Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                               Eigen::RowMajor>>
ToyPolicy::phase_weights(int phase) const {
  return {params_.data() +
              static_cast<Eigen::Index>(phase) * vocab_.size() * feature_dim_,
          vocab_.size(), feature_dim_};
}

std::vector<int> ToyPolicy::allowed_tokens(Phase phase) const {
  std::vector<int> allowed;
  if (config_.mode == DecodeMode::Raw) {
    allowed.resize(vocab_.size());
    for (int t = 0; t < vocab_.size(); ++t) {
      allowed[t] = t;
    }
    return allowed;
  }
  const int cells = vocab_.grid_size() * vocab_.grid_size();
  switch (phase) {
    case Phase::kStart:
      allowed = {vocab_.emit_look(), vocab_.emit_answer()};
      break;
    case Phase::kLookFirst:
      allowed.reserve(cells + 1);
      for (int t = 0; t < cells; ++t) {
        allowed.push_back(t);
      }
      allowed.push_back(vocab_.emit_answer());
      break;
    case Phase::kAnswerFirst:
      allowed.reserve(cells + 1);
      for (int t = 0; t < cells; ++t) {
        allowed.push_back(t);
      }
      allowed.push_back(vocab_.stop());
      break;
    case Phase::kLookSecond:
    case Phase::kAnswerSecond:
      allowed.resize(cells);
      for (int t = 0; t < cells; ++t) {
        allowed[t] = t;
      }
      break;
  }
  return allowed;
}

Eigen::VectorXd ToyPolicy::step_log_probs(
    Phase phase, const Eigen::VectorXd& features) const {
  if (features.size() != feature_dim_) {
    throw std::invalid_argument("step_log_probs: feature dimension mismatch");
  }
  const Eigen::VectorXd logits =
      phase_weights(static_cast<int>(phase)) * features / config_.temperature;
  const std::vector<int> allowed = allowed_tokens(phase);

  double max_logit = -std::numeric_limits<double>::infinity();
  for (int t : allowed) {
    max_logit = std::max(max_logit, logits[t]);
  }
  double normalizer = 0.0;
  for (int t : allowed) {
    normalizer += std::exp(logits[t] - max_logit);
  }
  const double log_normalizer = max_logit + std::log(normalizer);

  Eigen::VectorXd log_probs = Eigen::VectorXd::Constant(
      vocab_.size(), -std::numeric_limits<double>::infinity());
  for (int t : allowed) {
    log_probs[t] = logits[t] - log_normalizer;
  }
  return log_probs;
}

Eigen::VectorXd ToyPolicy::features_for(const Scene& scene) const {
  return scene_features(scene, config_.features);
}

void ToyPolicy::accumulate_logp_gradient(std::span<const int> tokens,
                                         const Scene& scene,
                                         const Eigen::VectorXd& per_token_coeff,
                                         Eigen::VectorXd& gradient) const {
  if (per_token_coeff.size() != static_cast<Eigen::Index>(tokens.size())) {
    throw std::invalid_argument(
        "accumulate_logp_gradient: coefficient/token length mismatch");
  }
  if (gradient.size() != params_.size()) {
    throw std::invalid_argument(
        "accumulate_logp_gradient: gradient size mismatch");
  }
  const Eigen::VectorXd features = features_for(scene);
  Phase phase = Phase::kStart;
  for (std::size_t step = 0; step < tokens.size(); ++step) {
    const int token = tokens[step];
    const double coeff = per_token_coeff[static_cast<Eigen::Index>(step)];
    const Eigen::VectorXd log_probs = step_log_probs(phase, features);
    if (!std::isfinite(log_probs[token])) {
      throw std::invalid_argument(
          "accumulate_logp_gradient: token not allowed at its step");
    }
    // d logp(a) / d logits_v = (1[v=a] - softmax_v) / temperature over the
    // allowed set; masked tokens carry no gradient.
    const double inv_temperature = 1.0 / config_.temperature;
    auto block = Eigen::Map<
        Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        gradient.data() + static_cast<Eigen::Index>(phase) * vocab_.size() *
                              feature_dim_,
        vocab_.size(), feature_dim_);
    for (int t : allowed_tokens(phase)) {
      const double prob = std::exp(log_probs[t]);
      const double delta = (t == token ? 1.0 : 0.0) - prob;
      if (delta != 0.0) {
        block.row(t) += coeff * inv_temperature * delta * features.transpose();
      }
    }
    if (token == vocab_.stop()) {
      break;
    }
    phase = next_phase(phase, token, vocab_);
  }
}

namespace {

// Shared sampling/greedy walk; `pick` maps step log-probs to a token id.
template <typename PickFn>
RolloutResult run_rollout(const ToyPolicy& policy, const Scene& scene,
                          PickFn&& pick) {
  const Vocabulary& vocab = policy.vocab();
  const Eigen::VectorXd features = policy.features_for(scene);

  std::vector<int> tokens;
  std::vector<double> log_probs;
  Phase phase = Phase::kStart;
  for (int step = 0; step < policy.config().max_tokens; ++step) {
    const Eigen::VectorXd step_logps = policy.step_log_probs(phase, features);
    const int token = pick(step_logps, phase);
    tokens.push_back(token);
    log_probs.push_back(step_logps[token]);
    if (token == vocab.stop()) {
      break;
    }
    phase = next_phase(phase, token, vocab);
  }

  RolloutResult result;
  std::vector<std::string> diagnostics;
  const std::string text =
      decode_tokens(tokens, vocab, policy.config().canvas,
                    policy.config().mode, policy.config().box_label,
                    &diagnostics);
  result.response = parse_response(text);
  for (std::string& diag : diagnostics) {
    result.response.diagnostics.push_back(std::move(diag));
  }
  result.trajectory.tokens = std::move(tokens);
  result.trajectory.logp_current = Eigen::Map<const Eigen::VectorXd>(
      log_probs.data(), static_cast<Eigen::Index>(log_probs.size()));
  result.trajectory.logp_old = result.trajectory.logp_current;
  return result;
}

}  // namespace

RolloutResult rollout(const ToyPolicy& policy, const Scene& scene,
                      std::uint64_t seed) {
  SplitRng rng = SplitRng(seed).substream("rollout");
  return run_rollout(policy, scene,
                     [&](const Eigen::VectorXd& logps, Phase phase) {
                       const std::vector<int> allowed =
                           policy.allowed_tokens(phase);
                       std::vector<double> weights(allowed.size());
                       for (std::size_t i = 0; i < allowed.size(); ++i) {
                         weights[i] = std::exp(logps[allowed[i]]);
                       }
                       return allowed[static_cast<std::size_t>(
                           rng.categorical(weights))];
                     });
}

RolloutResult greedy_rollout(const ToyPolicy& policy, const Scene& scene) {
  return run_rollout(policy, scene,
                     [&](const Eigen::VectorXd& logps, Phase phase) {
                       int best = -1;
                       double best_logp =
                           -std::numeric_limits<double>::infinity();
                       for (int t : policy.allowed_tokens(phase)) {
                         if (logps[t] > best_logp) {
                           best_logp = logps[t];
                           best = t;
                         }
                       }
                       return best;
                     });
}

Eigen::VectorXd score_log_probs(const ToyPolicy& policy,
                                std::span<const int> tokens,
                                const Scene& scene) {
  const Eigen::VectorXd features = policy.features_for(scene);
  Eigen::VectorXd result(static_cast<Eigen::Index>(tokens.size()));
  Phase phase = Phase::kStart;
  for (std::size_t step = 0; step < tokens.size(); ++step) {
    const int token = tokens[step];
    const Eigen::VectorXd step_logps = policy.step_log_probs(phase, features);
    if (!std::isfinite(step_logps[token])) {
      throw std::invalid_argument(
          "score_log_probs: token not allowed at its step");
    }
    result[static_cast<Eigen::Index>(step)] = step_logps[token];
    if (token == policy.vocab().stop()) {
      break;
    }
    phase = next_phase(phase, token, policy.vocab());
  }
  return result;
}

std::string decode_tokens(std::span<const int> tokens, const Vocabulary& vocab,
                          const CanvasSize& canvas, DecodeMode mode,
                          const std::string& box_label,
                          std::vector<std::string>* diagnostics) {
  const auto note = [&](const std::string& message) {
    if (diagnostics) {
      diagnostics->push_back(message);
    }
  };

  std::vector<LabeledBox> look_boxes;
  std::vector<LabeledBox> answer_boxes;
  bool saw_look = false;
  bool saw_answer = false;

  std::vector<LabeledBox>* section = nullptr;
  int pending_corner = -1;
  const auto flush_pending = [&](const char* where) {
    if (pending_corner >= 0) {
      note(std::string("dangling corner token dropped in ") + where);
      pending_corner = -1;
    }
  };

  const int grid = vocab.grid_size();
  for (int token : tokens) {
    if (token == vocab.emit_look()) {
      flush_pending("look");
      section = &look_boxes;
      saw_look = true;
    } else if (token == vocab.emit_answer()) {
      flush_pending(section == &look_boxes ? "look" : "answer");
      section = &answer_boxes;
      saw_answer = true;
    } else if (token == vocab.stop()) {
      break;
    } else if (vocab.is_cell(token)) {
      if (section == nullptr) {
        note("cell token outside any section dropped");
        continue;
      }
      if (pending_corner < 0) {
        pending_corner = token;
        continue;
      }
      const double x1 = cell_center(vocab.cell_col(pending_corner),
                                    canvas.width, grid);
      const double y1 = cell_center(vocab.cell_row(pending_corner),
                                    canvas.height, grid);
      const double x2 = cell_center(vocab.cell_col(token), canvas.width, grid);
      const double y2 = cell_center(vocab.cell_row(token), canvas.height, grid);
      pending_corner = -1;
      if (auto box = LabeledBox::try_make(x1, y1, x2, y2, box_label)) {
        section->push_back(std::move(*box));
      } else {
        note("corner pair in wrong order dropped");
      }
    } else {
      note("unknown token id " + std::to_string(token) + " dropped");
    }
  }
  flush_pending(section == &answer_boxes ? "answer" : "look");

  std::string text;
  const bool render_think_look = mode == DecodeMode::Structured || saw_look;
  const bool render_answer = mode == DecodeMode::Structured || saw_answer;
  if (render_think_look) {
    text += "<think>";
    text += kThinkPlaceholder;
    text += "</think>";
    text += "<look>";
    text += serialize_boxes(look_boxes);
    text += "</look>";
  }
  if (render_answer) {
    text += "<answer>";
    text += serialize_boxes(answer_boxes);
    text += "</answer>";
  }
  return text;
}

std::vector<int> encode_boxes(std::span<const LabeledBox> look_boxes,
                              std::span<const LabeledBox> answer_boxes,
                              const Vocabulary& vocab,
                              const CanvasSize& canvas) {
  const int grid = vocab.grid_size();
  std::vector<int> tokens;
  tokens.reserve(2 * (look_boxes.size() + answer_boxes.size()) + 3);
  const auto push_box = [&](const LabeledBox& box) {
    tokens.push_back(vocab.cell_token(
        center_to_cell(box.x1(), canvas.width, grid),
        center_to_cell(box.y1(), canvas.height, grid)));
    tokens.push_back(vocab.cell_token(
        center_to_cell(box.x2(), canvas.width, grid),
        center_to_cell(box.y2(), canvas.height, grid)));
  };
  tokens.push_back(vocab.emit_look());
  for (const LabeledBox& box : look_boxes) {
    push_box(box);
  }
  tokens.push_back(vocab.emit_answer());
  for (const LabeledBox& box : answer_boxes) {
    push_box(box);
  }
  tokens.push_back(vocab.stop());
  return tokens;
}

void ToyPolicy::save(const std::filesystem::path& path) const {
  json doc{
      {"kind", "toy_policy"},
      {"grid_size", config_.grid_size},
      {"canvas", {config_.canvas.width, config_.canvas.height}},
      {"feature_grid", config_.features.grid},
      {"noise_stddev", config_.features.noise_stddev},
      {"noise_seed", config_.features.noise_seed},
      {"init_scale", config_.init_scale},
      {"control_token_bias", config_.control_token_bias},
      {"max_tokens", config_.max_tokens},
      {"temperature", config_.temperature},
      {"mode", config_.mode == DecodeMode::Structured ? "structured" : "raw"},
      {"box_label", config_.box_label},
      {"params", std::vector<double>(params_.data(),
                                     params_.data() + params_.size())},
  };
  write_text_file(path, doc.dump());
}

ToyPolicy ToyPolicy::load(const std::filesystem::path& path) {
  const json doc = json::parse(read_text_file(path));
  if (!doc.is_object() || doc.value("kind", "") != "toy_policy") {
    throw std::runtime_error("ToyPolicy::load: not a toy_policy checkpoint: " +
                             path.string());
  }
  PolicyConfig config;
  config.grid_size = doc.at("grid_size").get<int>();
  config.canvas.width = doc.at("canvas").at(0).get<double>();
  config.canvas.height = doc.at("canvas").at(1).get<double>();
  config.features.grid = doc.at("feature_grid").get<int>();
  config.features.noise_stddev = doc.at("noise_stddev").get<double>();
  config.features.noise_seed = doc.at("noise_seed").get<std::uint64_t>();
  config.init_scale = doc.at("init_scale").get<double>();
  config.control_token_bias = doc.value("control_token_bias", 0.0);
  config.max_tokens = doc.at("max_tokens").get<int>();
  config.temperature = doc.at("temperature").get<double>();
  config.mode = doc.at("mode").get<std::string>() == "raw"
                    ? DecodeMode::Raw
                    : DecodeMode::Structured;
  config.box_label = doc.value("box_label", "person");

  ToyPolicy policy(config, /*init_seed=*/0);
  const auto& stored = doc.at("params");
  if (!stored.is_array() ||
      static_cast<Eigen::Index>(stored.size()) != policy.parameter_count()) {
    throw std::runtime_error("ToyPolicy::load: parameter count mismatch");
  }
  for (Eigen::Index i = 0; i < policy.parameter_count(); ++i) {
    policy.params_[i] = stored[static_cast<std::size_t>(i)].get<double>();
  }
  return policy;
}

}  // namespace dipr
