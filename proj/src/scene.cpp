#include "dipr/scene.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

namespace dipr {

namespace {

using nlohmann::json;

struct PlacedBox {
  double cx, cy, w, h;
  std::string label;
};

LabeledBox to_box(const PlacedBox& p) {
  return LabeledBox(p.cx - p.w / 2.0, p.cy - p.h / 2.0, p.cx + p.w / 2.0,
                    p.cy + p.h / 2.0, p.label);
}

void clamp_center(PlacedBox& p, const CanvasSize& canvas) {
  p.cx = std::clamp(p.cx, p.w / 2.0, canvas.width - p.w / 2.0);
  p.cy = std::clamp(p.cy, p.h / 2.0, canvas.height - p.h / 2.0);
}

double crowding_of(const std::vector<PlacedBox>& placed) {
  std::vector<LabeledBox> boxes;
  boxes.reserve(placed.size());
  for (const PlacedBox& p : placed) {
    boxes.push_back(to_box(p));
  }
  return mean_pairwise_iou(boxes);
}

}  // namespace

double mean_pairwise_iou(std::span<const LabeledBox> boxes) {
  if (boxes.size() < 2) {
    return 0.0;
  }
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    for (std::size_t j = i + 1; j < boxes.size(); ++j) {
      sum += iou(boxes[i], boxes[j]);
      ++pairs;
    }
  }
  return sum / static_cast<double>(pairs);
}

Scene generate_scene(std::uint64_t seed, const SceneConfig& config,
                     std::string scene_id) {
  if (config.min_boxes < 1 || config.max_boxes < config.min_boxes) {
    throw std::invalid_argument("SceneConfig: invalid box count range");
  }
  if (!(config.min_side > 0.0) || config.max_side < config.min_side) {
    throw std::invalid_argument("SceneConfig: invalid size range");
  }
  if (config.max_side > config.canvas.width ||
      config.max_side > config.canvas.height) {
    throw std::invalid_argument("SceneConfig: boxes larger than canvas");
  }
  if (config.labels.empty()) {
    throw std::invalid_argument("SceneConfig: empty label set");
  }

  SplitRng rng = SplitRng(seed).substream("scene_gen");
  for (int attempt = 0; attempt < config.max_restarts; ++attempt) {
    const int count = rng.uniform_int(config.min_boxes, config.max_boxes);
    std::vector<PlacedBox> placed;
    placed.reserve(count);
    for (int i = 0; i < count; ++i) {
      PlacedBox p;
      p.w = rng.uniform(config.min_side, config.max_side);
      p.h = rng.uniform(config.min_side, config.max_side);
      p.cx = rng.uniform(p.w / 2.0, config.canvas.width - p.w / 2.0);
      p.cy = rng.uniform(p.h / 2.0, config.canvas.height - p.h / 2.0);
      p.label = config.labels[static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<int>(config.labels.size()) - 1))];
      placed.push_back(std::move(p));
    }

    const double lo = config.overlap_target - config.overlap_tolerance;
    const double hi = config.overlap_target + config.overlap_tolerance;
    double crowding = crowding_of(placed);

    // Nudge random boxes toward/away from a random partner until the mean
    // pairwise IoU enters the tolerance band.
    for (int iter = 0; iter < config.adjust_iterations && count >= 2; ++iter) {
      if (crowding >= lo && crowding <= hi) {
        break;
      }
      const int a = rng.uniform_int(0, count - 1);
      int b = rng.uniform_int(0, count - 2);
      if (b >= a) {
        ++b;
      }
      PlacedBox& mover = placed[a];
      const PlacedBox& anchor = placed[b];
      const double step = rng.uniform(0.15, 0.45);
      const double dx = anchor.cx - mover.cx;
      const double dy = anchor.cy - mover.cy;
      const PlacedBox saved = mover;
      if (crowding < lo) {
        mover.cx += step * dx;
        mover.cy += step * dy;
      } else {
        const double norm = std::max(1.0, std::hypot(dx, dy));
        mover.cx -= step * 80.0 * dx / norm;
        mover.cy -= step * 80.0 * dy / norm;
      }
      clamp_center(mover, config.canvas);
      const double adjusted = crowding_of(placed);
      // Keep only moves in the right direction; prevents oscillation.
      const bool improved = crowding < lo ? adjusted > crowding
                                          : adjusted < crowding;
      if (improved) {
        crowding = adjusted;
      } else {
        mover = saved;
      }
    }

    if (crowding >= lo && crowding <= hi) {
      Scene scene;
      scene.scene_id = std::move(scene_id);
      scene.canvas = config.canvas;
      scene.crowding = crowding;
      scene.ground_truth.reserve(placed.size());
      for (const PlacedBox& p : placed) {
        scene.ground_truth.push_back(to_box(p));
      }
      return scene;
    }
  }
  throw GenerationError("generate_scene: overlap target " +
                        std::to_string(config.overlap_target) + " +- " +
                        std::to_string(config.overlap_tolerance) +
                        " unreachable for scene " + scene_id);
}

std::vector<Scene> generate_scenes(std::uint64_t seed, const SceneConfig& config,
                                   int count, const std::string& id_prefix) {
  std::vector<Scene> scenes;
  scenes.reserve(count);
  SplitRng master(seed);
  for (int i = 0; i < count; ++i) {
    char suffix[16];
    std::snprintf(suffix, sizeof(suffix), "-%06d", i);
    scenes.push_back(generate_scene(master.substream(i).next_u64(), config,
                                    id_prefix + suffix));
  }
  return scenes;
}

Eigen::VectorXd scene_features(const Scene& scene,
                               const FeatureConfig& config) {
  const int grid = config.grid;
  if (grid <= 0) {
    throw std::invalid_argument("FeatureConfig: grid must be positive");
  }
  const double cell_w = scene.canvas.width / grid;
  const double cell_h = scene.canvas.height / grid;
  Eigen::VectorXd features = Eigen::VectorXd::Zero(grid * grid + 1);
  for (int row = 0; row < grid; ++row) {
    for (int col = 0; col < grid; ++col) {
      const double cx1 = col * cell_w;
      const double cy1 = row * cell_h;
      const double cx2 = cx1 + cell_w;
      const double cy2 = cy1 + cell_h;
      double covered = 0.0;
      for (const LabeledBox& box : scene.ground_truth) {
        const double ix = std::max(
            0.0, std::min(cx2, box.x2()) - std::max(cx1, box.x1()));
        const double iy = std::max(
            0.0, std::min(cy2, box.y2()) - std::max(cy1, box.y1()));
        covered = std::max(covered, (ix * iy) / (cell_w * cell_h));
      }
      features[row * grid + col] = covered;
    }
  }
  if (config.noise_stddev > 0.0) {
    SplitRng noise = SplitRng(config.noise_seed)
                         .substream("feature_noise")
                         .substream(fnv1a64(scene.scene_id));
    for (int i = 0; i < grid * grid; ++i) {
      features[i] = std::clamp(
          features[i] + config.noise_stddev * noise.normal(), 0.0, 1.0);
    }
  }
  features[grid * grid] = 1.0;  // bias input
  return features;
}

void write_scenes_jsonl(const std::filesystem::path& path,
                        std::span<const Scene> scenes) {
  std::vector<std::string> lines;
  lines.reserve(scenes.size());
  for (const Scene& scene : scenes) {
    json boxes = json::array();
    for (const LabeledBox& box : scene.ground_truth) {
      boxes.push_back(box_to_json(box));
    }
    json line{{"scene_id", scene.scene_id},
              {"canvas", {scene.canvas.width, scene.canvas.height}},
              {"crowding", scene.crowding},
              {"boxes", std::move(boxes)}};
    lines.push_back(line.dump());
  }
  write_lines(path, lines);
}

std::vector<Scene> read_scenes_jsonl(const std::filesystem::path& path,
                                     std::vector<JsonlError>& errors) {
  std::vector<Scene> scenes;
  for (auto& [line_number, value] : read_jsonl(path, errors)) {
    if (!value.is_object() || !value.contains("scene_id") ||
        !value["scene_id"].is_string() || !value.contains("boxes") ||
        !value["boxes"].is_array()) {
      errors.push_back({line_number, "missing \"scene_id\" or \"boxes\""});
      continue;
    }
    Scene scene;
    scene.scene_id = value["scene_id"].get<std::string>();
    if (value.contains("canvas") && value["canvas"].is_array() &&
        value["canvas"].size() == 2 && value["canvas"][0].is_number() &&
        value["canvas"][1].is_number()) {
      scene.canvas.width = value["canvas"][0].get<double>();
      scene.canvas.height = value["canvas"][1].get<double>();
    }
    std::vector<std::string> diagnostics;
    scene.ground_truth = boxes_from_json_array(value["boxes"], diagnostics);
    for (const std::string& diag : diagnostics) {
      errors.push_back({line_number, diag});
    }
    scene.crowding = value.contains("crowding") && value["crowding"].is_number()
                         ? value["crowding"].get<double>()
                         : mean_pairwise_iou(scene.ground_truth);
    scenes.push_back(std::move(scene));
  }
  return scenes;
}

void write_occupancy_pgm(const std::filesystem::path& path, const Scene& scene,
                         int grid) {
  FeatureConfig config;
  config.grid = grid;
  config.noise_stddev = 0.0;
  const Eigen::VectorXd features = scene_features(scene, config);
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open file for writing: " + path.string());
  }
  out << "P2\n" << grid << " " << grid << "\n255\n";
  for (int row = 0; row < grid; ++row) {
    for (int col = 0; col < grid; ++col) {
      out << static_cast<int>(std::lround(features[row * grid + col] * 255.0));
      out << (col + 1 == grid ? '\n' : ' ');
    }
  }
}

}  // namespace dipr
