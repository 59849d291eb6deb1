#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "locreward/model.hpp"

namespace locreward::response {

// Response grammar, in order:
//   <think>...</think><rethink>...</rethink><answer>...</answer>
// Only whitespace may surround the three spans. Region proposals are
// bracketed numeric quadruples "[x1, y1, x2, y2]" inside the think span.
inline constexpr std::string_view kThinkOpen = "<think>";
inline constexpr std::string_view kThinkClose = "</think>";
inline constexpr std::string_view kRethinkOpen = "<rethink>";
inline constexpr std::string_view kRethinkClose = "</rethink>";
inline constexpr std::string_view kAnswerOpen = "<answer>";
inline constexpr std::string_view kAnswerClose = "</answer>";

struct ParsedResponse {
  std::string think_text;
  std::string rethink_text;
  std::string answer_text;
  std::vector<BBox> pred_boxes;
  std::optional<Label> label;
  bool format_ok = false;
  std::vector<std::string> warnings;
};

struct ExtractedBoxes {
  std::vector<BBox> boxes;
  std::vector<std::string> warnings;
};

/// Total and deterministic. Structural defects (missing, duplicated or
/// misordered stages, stray text, empty answer) set format_ok = false and
/// add a warning; the stage texts, boxes and label are still filled in on
/// a best-effort basis.
ParsedResponse parse(std::string_view text);

/// Every bracketed numeric quadruple, in order of appearance. Quadruples
/// that violate x1 < x2, y1 < y2 are dropped with a warning.
ExtractedBoxes extract_boxes(std::string_view stage_text);

/// Trimmed, case-insensitive lexicon lookup:
///   abnormal | anomaly | yes | defect  -> Abnormal
///   normal | no anomaly | no           -> Normal
std::optional<Label> extract_label(std::string_view answer_text);

struct ResponseTemplate {
  std::string think;
  std::string rethink;
  std::string answer;
  std::vector<BBox> boxes;
};

/// Inverse of parse: boxes are appended to the think text in shortest
/// round-trip decimal form. Throws InvalidTemplate when the answer is blank,
/// a field contains a stage tag, the think text already holds a quadruple,
/// or a box is invalid.
std::string render(const ResponseTemplate& t);

}  // namespace locreward::response
