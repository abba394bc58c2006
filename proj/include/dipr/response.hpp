#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dipr/geometry.hpp"
#include "dipr/io.hpp"

namespace dipr {

// One sampled model output decomposed into its three tagged sections.
//
// format_valid is true iff the raw text contains each of the six tags
// exactly once, in the order <think>..</think><look>..</look>
// <answer>..</answer>, and both box sections parse (the answer section may
// be the literal "None"). Text outside the tags is tolerated; duplicate or
// out-of-order tags are not.
struct StructuredResponse {
  std::string raw;
  std::optional<std::string> think;
  std::optional<std::vector<LabeledBox>> look_boxes;
  // Engaged (possibly empty) when the section parsed; none_answer marks the
  // distinguished "None" answer, in which case the list is empty.
  std::optional<std::vector<LabeledBox>> answer_boxes;
  bool none_answer = false;
  bool format_valid = false;
  // Per-box salvage notes and other non-fatal parse problems.
  std::vector<std::string> diagnostics;
};

// Total over arbitrary bytes: never throws, malformed inputs come back with
// format_valid = false and whatever sections could be salvaged.
StructuredResponse parse_response(std::string_view raw);

// 1 iff the response follows the full three-section format, else 0.
int format_reward(const StructuredResponse& response);

// Emits the Markdown box-list format used inside <look> and <answer>:
// ```json\n[{"bbox_2d": [x1, y1, x2, y2], "label": "..."}, ...]\n```
// Coordinates are rounded to the nearest integer (ties to even).
std::string serialize_boxes(std::span<const LabeledBox> boxes);

// One line of the batch-scoring input: the G raw responses for one scene.
struct ResponseGroupRecord {
  std::string scene_id;
  std::vector<std::string> responses;
};

std::vector<ResponseGroupRecord> read_response_groups_jsonl(
    const std::filesystem::path& path, std::vector<JsonlError>& errors);

void write_response_groups_jsonl(const std::filesystem::path& path,
                                 std::span<const ResponseGroupRecord> records);

}  // namespace dipr
