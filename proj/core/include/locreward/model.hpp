#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "locreward/error.hpp"

namespace locreward {

/// Axis-aligned rectangle in continuous pixel coordinates.
struct BBox {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  double width() const noexcept { return x2 - x1; }
  double height() const noexcept { return y2 - y1; }
  double area() const noexcept { return width() * height(); }

  /// Finite coordinates and strictly positive extent on both axes.
  bool valid() const noexcept;

  friend bool operator==(const BBox&, const BBox&) = default;
};

enum class Label : std::uint8_t { Normal = 0, Abnormal = 1 };

/// Ground truth for one image.
struct Sample {
  std::string id;
  Label label = Label::Normal;
  std::vector<BBox> gt_boxes;
  std::optional<double> image_width;
  std::optional<double> image_height;
};

/// One generated response plus optional per-token log-likelihoods under
/// the trained policy and the frozen reference.
struct ResponseRecord {
  std::string sample_id;
  std::string text;
  std::optional<std::vector<double>> token_logprobs_policy;
  std::optional<std::vector<double>> token_logprobs_ref;
};

enum class RewardScheme : std::uint8_t {
  Cls,           // r_cls
  ClsCount,      // r_cls + count/focus term
  ClsLoc,        // r_cls + r_loc
  ClsLocFormat,  // r_cls + r_loc + r_format
  ClsRandom,     // r_cls + gaussian noise
};

std::string_view to_string(RewardScheme scheme) noexcept;
/// Accepts the lower-case snake names ("cls", "cls_count", "cls_loc",
/// "cls_loc_format", "cls_random"), case-insensitively.
std::optional<RewardScheme> parse_scheme(std::string_view name) noexcept;

struct RewardConfig {
  double alpha = 0.5;         // weight of the count term inside r_loc
  double beta = 0.04;         // KL weight
  RewardScheme scheme = RewardScheme::ClsLocFormat;
  double std_eps = 1e-6;      // groups with population std below this carry no signal
  double random_sigma = 0.3;  // std of the CLS_RANDOM perturbation
  std::uint64_t seed = 0;

  /// Throws InvalidArgument on negative weights or non-positive std_eps.
  void validate() const;
};

/// Returns `s` unchanged when every Sample invariant holds, otherwise
/// throws LabelBoxMismatch, DegenerateBox, OutOfFrame or InvalidArgument.
const Sample& validate_sample(const Sample& s);

/// Logprob lists, when both present, must have equal non-zero length and
/// contain only finite values <= 0.
const ResponseRecord& validate_record(const ResponseRecord& r);

}  // namespace locreward
