#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "dipr/geometry.hpp"

namespace dipr {

// A problem on one line of a JSONL file; the line is skipped, the run
// continues, and callers decide whether accumulated errors are fatal.
struct JsonlError {
  std::size_t line_number = 0;  // 1-based
  std::string message;
};

// Reads a whole JSONL file; blank lines are skipped, unparseable lines are
// reported in `errors`.
std::vector<std::pair<std::size_t, nlohmann::json>> read_jsonl(
    const std::filesystem::path& path, std::vector<JsonlError>& errors);

void write_lines(const std::filesystem::path& path,
                 std::span<const std::string> lines);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path,
                     const std::string& content);

// {"bbox_2d": [x1, y1, x2, y2], "label": "..."}; coordinates are kept at
// full precision unless round_coords is set (the response grammar rounds).
nlohmann::json box_to_json(const LabeledBox& box, bool round_coords = false);

// Accepts integer or float coordinates; returns nullopt and fills `diag`
// for anything that is not a well-formed, geometrically valid box object.
std::optional<LabeledBox> box_from_json(const nlohmann::json& value,
                                        std::string* diag);

// Parses a JSON array of box objects with per-element salvage: malformed
// elements are skipped and described in `diagnostics`.
std::vector<LabeledBox> boxes_from_json_array(
    const nlohmann::json& array, std::vector<std::string>& diagnostics);

// One scene's boxes, as used by ground-truth and prediction JSONL files:
// {"scene_id": "...", "boxes": [ ... ]}.
struct SceneBoxesRecord {
  std::string scene_id;
  std::vector<LabeledBox> boxes;
};

std::vector<SceneBoxesRecord> read_scene_boxes_jsonl(
    const std::filesystem::path& path, std::vector<JsonlError>& errors);

void write_scene_boxes_jsonl(const std::filesystem::path& path,
                             std::span<const SceneBoxesRecord> records);

}  // namespace dipr
