#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dipr/geometry.hpp"
#include "dipr/io.hpp"
#include "dipr/rng.hpp"

namespace dipr {

struct CanvasSize {
  double width = 512.0;
  double height = 512.0;

  bool operator==(const CanvasSize&) const = default;
};

struct SceneConfig {
  CanvasSize canvas;
  int min_boxes = 1;
  int max_boxes = 4;
  double min_side = 80.0;   // box side lengths, pixels
  double max_side = 200.0;
  double overlap_target = 0.05;  // mean pairwise IoU among GT boxes
  double overlap_tolerance = 0.10;
  std::vector<std::string> labels = {"person"};
  int max_restarts = 64;
  int adjust_iterations = 400;
};

// A synthetic crowded scene: the ground truth every reward is scored against.
struct Scene {
  std::string scene_id;
  CanvasSize canvas;
  std::vector<LabeledBox> ground_truth;
  double crowding = 0.0;  // mean pairwise IoU among GT boxes
};

struct GenerationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

double mean_pairwise_iou(std::span<const LabeledBox> boxes);

// Deterministic for a fixed seed. Boxes are placed randomly and then nudged
// toward or away from each other until the mean pairwise IoU lands within
// overlap_target +- overlap_tolerance; throws GenerationError when the
// target stays unreachable across max_restarts attempts.
Scene generate_scene(std::uint64_t seed, const SceneConfig& config,
                     std::string scene_id);

std::vector<Scene> generate_scenes(std::uint64_t seed, const SceneConfig& config,
                                   int count, const std::string& id_prefix = "scene");

// Observation the toy policy conditions on: a grid x grid occupancy map of
// the ground truth with additive Gaussian noise, clamped to [0, 1], plus a
// trailing constant 1 (bias). Deterministic per (scene_id, noise_seed).
struct FeatureConfig {
  int grid = 8;
  double noise_stddev = 0.15;
  std::uint64_t noise_seed = 0;
};

Eigen::VectorXd scene_features(const Scene& scene, const FeatureConfig& config);

// Scenes JSONL: {"scene_id", "canvas": [w, h], "crowding", "boxes": [...]}.
void write_scenes_jsonl(const std::filesystem::path& path,
                        std::span<const Scene> scenes);
std::vector<Scene> read_scenes_jsonl(const std::filesystem::path& path,
                                     std::vector<JsonlError>& errors);

// Debug rendering of the noise-free occupancy grid as a binary PGM image.
void write_occupancy_pgm(const std::filesystem::path& path, const Scene& scene,
                         int grid);

}  // namespace dipr
