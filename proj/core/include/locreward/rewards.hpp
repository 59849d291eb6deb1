#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string_view>

#include "locreward/assignment.hpp"
#include "locreward/model.hpp"
#include "locreward/response_parser.hpp"

namespace locreward::rewards {

/// Generator used for the CLS_RANDOM perturbation.
using Rng = std::mt19937_64;

/// Per-response reward components. Every component is filled in regardless
/// of scheme; `total` sums only the ones the scheme selects. r_random is
/// drawn (and non-zero) only under CLS_RANDOM.
struct RewardBreakdown {
  double r_cls = 0.0;
  double r_count_or_focus = 0.0;  // r_count(m, n) when abnormal, r_focus(m) when normal
  double r_giou_mean = 0.0;
  double r_loc = 0.0;
  double r_format = 0.0;
  double r_random = 0.0;
  double total = 0.0;
  assignment::Matching matched_pairs;
  std::size_t m = 0;
  std::size_t n = 0;
};

struct LocalizationReward {
  double value = 0.0;
  double giou_mean = 0.0;
  double count_or_focus = 0.0;
  assignment::Matching matching;
};

double r_cls(std::optional<Label> predicted, Label truth) noexcept;

/// 1 for an exact count, 0.5 when off by one, -0.1 otherwise.
double r_count(std::size_t m, std::size_t n) noexcept;

/// Normal samples: 0 for no box, 0.5 for exactly one, -0.1 for more.
double r_focus(std::size_t m) noexcept;

/// Abnormal: mean GIoU over Hungarian-matched pairs (0 with no pairs)
/// plus alpha * r_count. Normal: r_focus(m).
LocalizationReward r_loc(std::span<const BBox> preds, const Sample& sample, double alpha);

double r_format(const response::ParsedResponse& parsed) noexcept;

/// N(0, sigma^2) draw; exactly 0 without touching the generator when sigma = 0.
double r_random(double sigma, Rng& rng);

/// Deterministic generator for one group, derived from the run seed, the
/// sample id and a per-sample group ordinal (epoch or repeat index).
Rng group_rng(std::uint64_t seed, std::string_view sample_id, std::uint64_t ordinal = 0);

RewardBreakdown assemble(const response::ParsedResponse& parsed, const Sample& sample,
                         const RewardConfig& cfg, Rng& rng);

}  // namespace locreward::rewards
