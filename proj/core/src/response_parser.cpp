#include "locreward/response_parser.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>

namespace locreward::response {

namespace {

constexpr std::size_t npos = std::string_view::npos;

constexpr std::array<std::string_view, 6> kAllTags{kThinkOpen,   kThinkClose,  kRethinkOpen,
                                                   kRethinkClose, kAnswerOpen, kAnswerClose};

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

bool blank(std::string_view s) { return trim(s).empty(); }

std::vector<std::size_t> occurrences(std::string_view text, std::string_view tag) {
  std::vector<std::size_t> out;
  for (std::size_t pos = text.find(tag); pos != npos; pos = text.find(tag, pos + tag.size())) {
    out.push_back(pos);
  }
  return out;
}

std::size_t next_tag(std::string_view text, std::size_t from) {
  std::size_t best = text.size();
  for (auto tag : kAllTags) {
    const std::size_t p = text.find(tag, from);
    if (p != npos) best = std::min(best, p);
  }
  return best;
}

struct Span {
  bool found = false;
  std::size_t open = npos;   // position of the opening tag
  std::size_t close = npos;  // position of the closing tag, npos if unterminated
  std::string_view content;
};

struct Stage {
  std::string_view name;
  std::string_view open_tag;
  std::string_view close_tag;
};

constexpr std::array<Stage, 3> kStages{{
    {"think", kThinkOpen, kThinkClose},
    {"rethink", kRethinkOpen, kRethinkClose},
    {"answer", kAnswerOpen, kAnswerClose},
}};

Span locate(std::string_view text, const Stage& stage, std::vector<std::string>& warnings,
            bool& ok) {
  const auto opens = occurrences(text, stage.open_tag);
  const auto closes = occurrences(text, stage.close_tag);
  if (opens.size() != 1 || closes.size() != 1) {
    ok = false;
    warnings.push_back("expected exactly one " + std::string(stage.open_tag) + "..." +
                       std::string(stage.close_tag) + " span, found " +
                       std::to_string(opens.size()) + " opening and " +
                       std::to_string(closes.size()) + " closing tags");
  }
  Span span;
  if (opens.empty()) return span;
  span.found = true;
  span.open = opens.front();
  const std::size_t begin = span.open + stage.open_tag.size();
  const std::size_t close = text.find(stage.close_tag, begin);
  if (close == npos) {
    ok = false;
    warnings.push_back("unterminated " + std::string(stage.open_tag) + " span");
    span.content = text.substr(begin, next_tag(text, begin) - begin);
  } else {
    span.close = close;
    span.content = text.substr(begin, close - begin);
  }
  return span;
}

// Parses one coordinate at `pos`; accepts an optional sign, decimal digits
// with optional fraction and exponent. Rejects inf/nan spellings.
std::optional<double> scan_number(std::string_view s, std::size_t& pos, bool& out_of_range) {
  std::size_t p = pos;
  if (p < s.size() && s[p] == '+') ++p;
  const std::size_t digits_at = (p < s.size() && s[p] == '-') ? p + 1 : p;
  if (digits_at >= s.size() ||
      !(std::isdigit(static_cast<unsigned char>(s[digits_at])) || s[digits_at] == '.')) {
    return std::nullopt;
  }
  double value = 0.0;
  const auto [end, ec] = std::from_chars(s.data() + p, s.data() + s.size(), value,
                                         std::chars_format::general);
  if (ec == std::errc::result_out_of_range) {
    out_of_range = true;
    pos = static_cast<std::size_t>(end - s.data());
    return std::nullopt;
  }
  if (ec != std::errc{} || !std::isfinite(value)) return std::nullopt;
  pos = static_cast<std::size_t>(end - s.data());
  return value;
}

void skip_space(std::string_view s, std::size_t& pos) {
  while (pos < s.size() && is_space(s[pos])) ++pos;
}

struct Quadruple {
  std::array<double, 4> v{};
  std::size_t end = 0;
};

// Attempts to read "[a, b, c, d]" starting at the '[' at `open`.
std::optional<Quadruple> scan_quadruple(std::string_view s, std::size_t open,
                                        bool& out_of_range) {
  std::size_t pos = open + 1;
  Quadruple q;
  for (std::size_t k = 0; k < 4; ++k) {
    skip_space(s, pos);
    const auto value = scan_number(s, pos, out_of_range);
    if (!value) return std::nullopt;
    q.v[k] = *value;
    skip_space(s, pos);
    const char expected = (k < 3) ? ',' : ']';
    if (pos >= s.size() || s[pos] != expected) return std::nullopt;
    ++pos;
  }
  q.end = pos;
  return q;
}

void append_number(std::string& out, double v) {
  std::array<char, 64> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  out.append(buf.data(), end);
}

std::string format_box(const BBox& b) {
  std::string s = "[";
  append_number(s, b.x1);
  s += ", ";
  append_number(s, b.y1);
  s += ", ";
  append_number(s, b.x2);
  s += ", ";
  append_number(s, b.y2);
  s += ']';
  return s;
}

}  // namespace

ExtractedBoxes extract_boxes(std::string_view stage_text) {
  ExtractedBoxes out;
  std::size_t pos = stage_text.find('[');
  while (pos != npos) {
    bool out_of_range = false;
    const auto q = scan_quadruple(stage_text, pos, out_of_range);
    if (!q) {
      if (out_of_range) {
        out.warnings.push_back("box with out-of-range coordinate dropped at offset " +
                               std::to_string(pos));
      }
      pos = stage_text.find('[', pos + 1);
      continue;
    }
    const BBox box{q->v[0], q->v[1], q->v[2], q->v[3]};
    if (box.valid()) {
      out.boxes.push_back(box);
    } else {
      out.warnings.push_back("degenerate box dropped: " + format_box(box));
    }
    pos = stage_text.find('[', q->end);
  }
  return out;
}

std::optional<Label> extract_label(std::string_view answer_text) {
  std::string key(trim(answer_text));
  std::transform(key.begin(), key.end(), key.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (std::string_view token : {"abnormal", "anomaly", "yes", "defect"}) {
    if (key == token) return Label::Abnormal;
  }
  for (std::string_view token : {"normal", "no anomaly", "no"}) {
    if (key == token) return Label::Normal;
  }
  return std::nullopt;
}

ParsedResponse parse(std::string_view text) {
  ParsedResponse out;
  bool ok = true;
  std::array<Span, 3> spans;
  for (std::size_t i = 0; i < kStages.size(); ++i) {
    spans[i] = locate(text, kStages[i], out.warnings, ok);
  }

  if (ok) {
    // Counts are all exactly one here; check ordering and the gaps.
    std::size_t cursor = 0;
    for (std::size_t i = 0; i < spans.size(); ++i) {
      const Span& s = spans[i];
      if (s.open < cursor || s.close == npos) {
        ok = false;
        out.warnings.push_back("stage <" + std::string(kStages[i].name) + "> is out of order");
        break;
      }
      if (!blank(text.substr(cursor, s.open - cursor))) {
        ok = false;
        out.warnings.push_back("stray text before <" + std::string(kStages[i].name) + ">");
      }
      cursor = s.close + kStages[i].close_tag.size();
    }
    if (ok && !blank(text.substr(cursor))) {
      ok = false;
      out.warnings.push_back("stray text after </answer>");
    }
  }

  const Span& think = spans[0];
  const Span& rethink = spans[1];
  const Span& answer = spans[2];
  out.think_text = std::string(think.content);
  out.rethink_text = std::string(rethink.content);
  out.answer_text = std::string(answer.content);

  if (answer.found && blank(answer.content)) {
    ok = false;
    out.warnings.emplace_back("empty <answer> span");
  }
  if (answer.found) out.label = extract_label(answer.content);
  if (answer.found && !blank(answer.content) && !out.label) {
    out.warnings.push_back("answer '" + std::string(trim(answer.content)) +
                           "' matches no label token");
  }

  auto boxes = extract_boxes(think.content);
  out.pred_boxes = std::move(boxes.boxes);
  out.warnings.insert(out.warnings.end(), boxes.warnings.begin(), boxes.warnings.end());
  out.format_ok = ok;
  return out;
}

std::string render(const ResponseTemplate& t) {
  if (blank(t.answer)) {
    throw Error(ErrorCode::InvalidTemplate, "answer must not be empty");
  }
  for (const std::string* field : {&t.think, &t.rethink, &t.answer}) {
    for (auto tag : kAllTags) {
      if (field->find(tag) != npos) {
        throw Error(ErrorCode::InvalidTemplate,
                    "template field contains the stage tag " + std::string(tag));
      }
    }
  }
  {
    const auto embedded = extract_boxes(t.think);
    if (!embedded.boxes.empty() || !embedded.warnings.empty()) {
      throw Error(ErrorCode::InvalidTemplate,
                  "think text already contains a box quadruple; pass boxes separately");
    }
  }
  std::string out;
  out += kThinkOpen;
  out += t.think;
  for (const BBox& b : t.boxes) {
    if (!b.valid()) {
      throw Error(ErrorCode::InvalidTemplate, "template box " + format_box(b) + " is invalid");
    }
    if (!out.empty() && !is_space(out.back()) && out.back() != '>') out += ' ';
    out += format_box(b);
  }
  out += kThinkClose;
  out += kRethinkOpen;
  out += t.rethink;
  out += kRethinkClose;
  out += kAnswerOpen;
  out += t.answer;
  out += kAnswerClose;
  return out;
}

}  // namespace locreward::response
