#include "dipr/response.hpp"

#include <cmath>
#include <cstddef>
#include <sstream>

#include <nlohmann/json.hpp>

namespace dipr {

namespace {

using nlohmann::json;

constexpr std::string_view kThinkOpen = "<think>";
constexpr std::string_view kThinkClose = "</think>";
constexpr std::string_view kLookOpen = "<look>";
constexpr std::string_view kLookClose = "</look>";
constexpr std::string_view kAnswerOpen = "<answer>";
constexpr std::string_view kAnswerClose = "</answer>";

std::size_t count_occurrences(std::string_view text, std::string_view needle) {
  std::size_t count = 0;
  std::size_t pos = text.find(needle);
  while (pos != std::string_view::npos) {
    ++count;
    pos = text.find(needle, pos + 1);
  }
  return count;
}

std::string_view trim(std::string_view text) {
  const auto begin = text.find_first_not_of(" \t\r\n");
  if (begin == std::string_view::npos) {
    return {};
  }
  const auto end = text.find_last_not_of(" \t\r\n");
  return text.substr(begin, end - begin + 1);
}

// Section content located between one open/close tag pair. `ok` is false
// when the pair is missing, duplicated, or inverted.
struct Section {
  bool ok = false;
  std::size_t open_pos = std::string_view::npos;
  std::size_t close_pos = std::string_view::npos;
  std::string_view content;
};

Section locate_section(std::string_view raw, std::string_view open,
                       std::string_view close) {
  Section section;
  if (count_occurrences(raw, open) != 1 || count_occurrences(raw, close) != 1) {
    return section;
  }
  section.open_pos = raw.find(open);
  section.close_pos = raw.find(close);
  if (section.close_pos < section.open_pos + open.size()) {
    return section;
  }
  const std::size_t begin = section.open_pos + open.size();
  section.content = raw.substr(begin, section.close_pos - begin);
  section.ok = true;
  return section;
}

// Finds the first balanced JSON array in `text`, honoring string literals
// and escapes, and returns the exact "[...]" extent.
std::optional<std::string_view> find_json_array(std::string_view text) {
  const std::size_t start = text.find('[');
  if (start == std::string_view::npos) {
    return std::nullopt;
  }
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = start; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    switch (c) {
      case '"':
        in_string = true;
        break;
      case '[':
      case '{':
        ++depth;
        break;
      case ']':
      case '}':
        --depth;
        if (depth == 0) {
          return text.substr(start, i - start + 1);
        }
        if (depth < 0) {
          return std::nullopt;
        }
        break;
      default:
        break;
    }
  }
  return std::nullopt;
}

// Strips a ```json (or bare ```) fence if the trimmed content starts with
// one; otherwise returns the input unchanged.
std::string_view strip_markdown_fence(std::string_view content) {
  std::string_view trimmed = trim(content);
  if (!trimmed.starts_with("```")) {
    return content;
  }
  trimmed.remove_prefix(3);
  if (trimmed.starts_with("json")) {
    trimmed.remove_prefix(4);
  }
  const std::size_t closing = trimmed.find("```");
  if (closing == std::string_view::npos) {
    return trimmed;  // unterminated fence; parse whatever is inside
  }
  return trimmed.substr(0, closing);
}

// Parses a box-list section. Empty content is a parseable empty list; the
// whole section fails only when no well-formed JSON array can be extracted.
std::optional<std::vector<LabeledBox>> parse_box_section(
    std::string_view content, std::string_view section_name,
    std::vector<std::string>& diagnostics) {
  const std::string_view body = strip_markdown_fence(content);
  if (trim(body).empty()) {
    return std::vector<LabeledBox>{};
  }
  const auto array_text = find_json_array(body);
  if (!array_text) {
    diagnostics.push_back(std::string(section_name) +
                          ": no JSON array found");
    return std::nullopt;
  }
  const json parsed =
      json::parse(*array_text, nullptr, /*allow_exceptions=*/false);
  if (parsed.is_discarded() || !parsed.is_array()) {
    diagnostics.push_back(std::string(section_name) +
                          ": malformed JSON array");
    return std::nullopt;
  }
  std::vector<std::string> box_diags;
  std::vector<LabeledBox> boxes = boxes_from_json_array(parsed, box_diags);
  for (const std::string& diag : box_diags) {
    diagnostics.push_back(std::string(section_name) + ": " + diag);
  }
  return boxes;
}

}  // namespace

StructuredResponse parse_response(std::string_view raw) {
  StructuredResponse response;
  response.raw = std::string(raw);

  const Section think = locate_section(raw, kThinkOpen, kThinkClose);
  const Section look = locate_section(raw, kLookOpen, kLookClose);
  const Section answer = locate_section(raw, kAnswerOpen, kAnswerClose);

  if (think.ok) {
    response.think = std::string(think.content);
  }
  if (look.ok) {
    response.look_boxes =
        parse_box_section(look.content, "look", response.diagnostics);
  }
  if (answer.ok) {
    if (trim(answer.content) == "None") {
      response.none_answer = true;
      response.answer_boxes = std::vector<LabeledBox>{};
    } else {
      response.answer_boxes =
          parse_box_section(answer.content, "answer", response.diagnostics);
    }
  }

  const bool ordered = think.ok && look.ok && answer.ok &&
                       think.close_pos > think.open_pos &&
                       look.open_pos > think.close_pos &&
                       answer.open_pos > look.close_pos;
  response.format_valid = ordered && response.look_boxes.has_value() &&
                          response.answer_boxes.has_value();
  return response;
}

int format_reward(const StructuredResponse& response) {
  return response.format_valid ? 1 : 0;
}

std::string serialize_boxes(std::span<const LabeledBox> boxes) {
  std::ostringstream out;
  out << "```json\n[";
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    if (i > 0) {
      out << ", ";
    }
    const LabeledBox& box = boxes[i];
    out << "{\"bbox_2d\": ["
        << static_cast<long long>(std::nearbyint(box.x1())) << ", "
        << static_cast<long long>(std::nearbyint(box.y1())) << ", "
        << static_cast<long long>(std::nearbyint(box.x2())) << ", "
        << static_cast<long long>(std::nearbyint(box.y2())) << "], \"label\": "
        << json(box.label()).dump() << "}";
  }
  out << "]\n```";
  return out.str();
}

std::vector<ResponseGroupRecord> read_response_groups_jsonl(
    const std::filesystem::path& path, std::vector<JsonlError>& errors) {
  std::vector<ResponseGroupRecord> records;
  for (auto& [line_number, value] : read_jsonl(path, errors)) {
    if (!value.is_object() || !value.contains("scene_id") ||
        !value["scene_id"].is_string()) {
      errors.push_back({line_number, "missing string \"scene_id\""});
      continue;
    }
    if (!value.contains("responses") || !value["responses"].is_array()) {
      errors.push_back({line_number, "missing array \"responses\""});
      continue;
    }
    ResponseGroupRecord record;
    record.scene_id = value["scene_id"].get<std::string>();
    bool ok = true;
    for (const json& item : value["responses"]) {
      if (!item.is_string()) {
        errors.push_back({line_number, "non-string response entry"});
        ok = false;
        break;
      }
      record.responses.push_back(item.get<std::string>());
    }
    if (ok) {
      records.push_back(std::move(record));
    }
  }
  return records;
}

void write_response_groups_jsonl(const std::filesystem::path& path,
                                 std::span<const ResponseGroupRecord> records) {
  std::vector<std::string> lines;
  lines.reserve(records.size());
  for (const ResponseGroupRecord& record : records) {
    json line{{"scene_id", record.scene_id}, {"responses", record.responses}};
    lines.push_back(line.dump());
  }
  write_lines(path, lines);
}

}  // namespace dipr
