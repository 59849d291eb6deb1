#include "locreward/model.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <sstream>

namespace locreward {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::LabelBoxMismatch: return "LabelBoxMismatch";
    case ErrorCode::DegenerateBox: return "DegenerateBox";
    case ErrorCode::OutOfFrame: return "OutOfFrame";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidTemplate: return "InvalidTemplate";
    case ErrorCode::GroupTooSmall: return "GroupTooSmall";
    case ErrorCode::MissingLogprobs: return "MissingLogprobs";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::EvenKernel: return "EvenKernel";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

bool BBox::valid() const noexcept {
  return std::isfinite(x1) && std::isfinite(y1) && std::isfinite(x2) && std::isfinite(y2) &&
         x1 < x2 && y1 < y2;
}

namespace {

constexpr std::array<std::pair<RewardScheme, std::string_view>, 5> kSchemeNames{{
    {RewardScheme::Cls, "cls"},
    {RewardScheme::ClsCount, "cls_count"},
    {RewardScheme::ClsLoc, "cls_loc"},
    {RewardScheme::ClsLocFormat, "cls_loc_format"},
    {RewardScheme::ClsRandom, "cls_random"},
}};

std::string describe(const BBox& b) {
  std::ostringstream os;
  os << '[' << b.x1 << ", " << b.y1 << ", " << b.x2 << ", " << b.y2 << ']';
  return os.str();
}

}  // namespace

std::string_view to_string(RewardScheme scheme) noexcept {
  for (const auto& [s, name] : kSchemeNames) {
    if (s == scheme) return name;
  }
  return "unknown";
}

std::optional<RewardScheme> parse_scheme(std::string_view name) noexcept {
  std::string lowered(name);
  std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (const auto& [s, n] : kSchemeNames) {
    if (n == lowered) return s;
  }
  return std::nullopt;
}

void RewardConfig::validate() const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw Error(ErrorCode::InvalidArgument, "alpha must be a finite value >= 0");
  }
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw Error(ErrorCode::InvalidArgument, "beta must be a finite value >= 0");
  }
  if (!(std_eps > 0.0) || !std::isfinite(std_eps)) {
    throw Error(ErrorCode::InvalidArgument, "std_eps must be a finite value > 0");
  }
  if (!(random_sigma >= 0.0) || !std::isfinite(random_sigma)) {
    throw Error(ErrorCode::InvalidArgument, "random_sigma must be a finite value >= 0");
  }
}

const Sample& validate_sample(const Sample& s) {
  if (s.label == Label::Abnormal && s.gt_boxes.empty()) {
    throw Error(ErrorCode::LabelBoxMismatch,
                "sample '" + s.id + "' is labelled abnormal but has no boxes");
  }
  if (s.label == Label::Normal && !s.gt_boxes.empty()) {
    throw Error(ErrorCode::LabelBoxMismatch,
                "sample '" + s.id + "' is labelled normal but has boxes");
  }
  for (const auto dim : {s.image_width, s.image_height}) {
    if (dim && (!std::isfinite(*dim) || *dim <= 0.0)) {
      throw Error(ErrorCode::InvalidArgument,
                  "sample '" + s.id + "' has a non-positive image dimension");
    }
  }
  for (const BBox& b : s.gt_boxes) {
    if (!b.valid()) {
      throw Error(ErrorCode::DegenerateBox, "sample '" + s.id + "' box " + describe(b));
    }
    if (s.image_width && (b.x1 < 0.0 || b.x2 > *s.image_width)) {
      throw Error(ErrorCode::OutOfFrame, "sample '" + s.id + "' box " + describe(b));
    }
    if (s.image_height && (b.y1 < 0.0 || b.y2 > *s.image_height)) {
      throw Error(ErrorCode::OutOfFrame, "sample '" + s.id + "' box " + describe(b));
    }
  }
  return s;
}

const ResponseRecord& validate_record(const ResponseRecord& r) {
  const auto check = [&](const std::optional<std::vector<double>>& lp, std::string_view which) {
    if (!lp) return;
    for (double v : *lp) {
      if (!std::isfinite(v) || v > 0.0) {
        throw Error(ErrorCode::InvalidArgument, "response for '" + r.sample_id + "' has " +
                                                    std::string(which) +
                                                    " logprob outside (-inf, 0]");
      }
    }
  };
  check(r.token_logprobs_policy, "policy");
  check(r.token_logprobs_ref, "reference");
  if (r.token_logprobs_policy && r.token_logprobs_ref) {
    if (r.token_logprobs_policy->size() != r.token_logprobs_ref->size()) {
      throw Error(ErrorCode::LengthMismatch,
                  "response for '" + r.sample_id + "' has policy/reference logprob lists of "
                  "different lengths");
    }
    if (r.token_logprobs_policy->empty()) {
      throw Error(ErrorCode::LengthMismatch,
                  "response for '" + r.sample_id + "' has empty logprob lists");
    }
  }
  return r;
}

}  // namespace locreward
