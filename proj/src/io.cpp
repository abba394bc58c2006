#include "dipr/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dipr {

namespace {

using nlohmann::json;

long long round_half_even(double v) {
  return static_cast<long long>(std::nearbyint(v));
}

}  // namespace

std::vector<std::pair<std::size_t, json>> read_jsonl(
    const std::filesystem::path& path, std::vector<JsonlError>& errors) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open file: " + path.string());
  }
  std::vector<std::pair<std::size_t, json>> lines;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) {
      continue;
    }
    json value = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (value.is_discarded()) {
      errors.push_back({line_number, "malformed JSON"});
      continue;
    }
    lines.emplace_back(line_number, std::move(value));
  }
  return lines;
}

void write_lines(const std::filesystem::path& path,
                 std::span<const std::string> lines) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open file for writing: " + path.string());
  }
  for (const std::string& line : lines) {
    out << line << '\n';
  }
  if (!out) {
    throw std::runtime_error("write failed: " + path.string());
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open file: " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open file for writing: " + path.string());
  }
  out << content;
  if (!out) {
    throw std::runtime_error("write failed: " + path.string());
  }
}

json box_to_json(const LabeledBox& box, bool round_coords) {
  json coords = json::array();
  if (round_coords) {
    coords.push_back(round_half_even(box.x1()));
    coords.push_back(round_half_even(box.y1()));
    coords.push_back(round_half_even(box.x2()));
    coords.push_back(round_half_even(box.y2()));
  } else {
    coords.push_back(box.x1());
    coords.push_back(box.y1());
    coords.push_back(box.x2());
    coords.push_back(box.y2());
  }
  return json{{"bbox_2d", std::move(coords)}, {"label", box.label()}};
}

std::optional<LabeledBox> box_from_json(const json& value, std::string* diag) {
  const auto fail = [&](const std::string& message) -> std::optional<LabeledBox> {
    if (diag) {
      *diag = message;
    }
    return std::nullopt;
  };
  if (!value.is_object()) {
    return fail("box element is not an object");
  }
  const auto bbox_it = value.find("bbox_2d");
  if (bbox_it == value.end()) {
    return fail("missing \"bbox_2d\"");
  }
  if (!bbox_it->is_array() || bbox_it->size() != 4) {
    return fail("\"bbox_2d\" is not a 4-element array");
  }
  double coords[4];
  for (std::size_t i = 0; i < 4; ++i) {
    const json& c = (*bbox_it)[i];
    if (!c.is_number()) {
      return fail("\"bbox_2d\" has a non-numeric coordinate");
    }
    coords[i] = c.get<double>();
  }
  const auto label_it = value.find("label");
  if (label_it == value.end() || !label_it->is_string()) {
    return fail("missing or non-string \"label\"");
  }
  auto box = LabeledBox::try_make(coords[0], coords[1], coords[2], coords[3],
                                  label_it->get<std::string>());
  if (!box) {
    return fail("degenerate or out-of-range coordinates");
  }
  return box;
}

std::vector<LabeledBox> boxes_from_json_array(
    const json& array, std::vector<std::string>& diagnostics) {
  std::vector<LabeledBox> boxes;
  for (std::size_t i = 0; i < array.size(); ++i) {
    std::string diag;
    if (auto box = box_from_json(array[i], &diag)) {
      boxes.push_back(std::move(*box));
    } else {
      diagnostics.push_back("box " + std::to_string(i) + " skipped: " + diag);
    }
  }
  return boxes;
}

std::vector<SceneBoxesRecord> read_scene_boxes_jsonl(
    const std::filesystem::path& path, std::vector<JsonlError>& errors) {
  std::vector<SceneBoxesRecord> records;
  for (auto& [line_number, value] : read_jsonl(path, errors)) {
    if (!value.is_object() || !value.contains("scene_id") ||
        !value["scene_id"].is_string()) {
      errors.push_back({line_number, "missing string \"scene_id\""});
      continue;
    }
    if (!value.contains("boxes") || !value["boxes"].is_array()) {
      errors.push_back({line_number, "missing array \"boxes\""});
      continue;
    }
    SceneBoxesRecord record;
    record.scene_id = value["scene_id"].get<std::string>();
    std::vector<std::string> diagnostics;
    record.boxes = boxes_from_json_array(value["boxes"], diagnostics);
    for (const std::string& diag : diagnostics) {
      errors.push_back({line_number, diag});
    }
    records.push_back(std::move(record));
  }
  return records;
}

void write_scene_boxes_jsonl(const std::filesystem::path& path,
                             std::span<const SceneBoxesRecord> records) {
  std::vector<std::string> lines;
  lines.reserve(records.size());
  for (const SceneBoxesRecord& record : records) {
    json boxes = json::array();
    for (const LabeledBox& box : record.boxes) {
      boxes.push_back(box_to_json(box));
    }
    json line{{"scene_id", record.scene_id}, {"boxes", std::move(boxes)}};
    lines.push_back(line.dump());
  }
  write_lines(path, lines);
}

}  // namespace dipr
