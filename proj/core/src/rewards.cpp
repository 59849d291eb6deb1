#include "locreward/rewards.hpp"


#include "locreward/geometry.hpp"

namespace locreward::rewards {

double r_cls(std::optional<Label> predicted, Label truth) noexcept {
  return (predicted && *predicted == truth) ? 1.0 : 0.0;
}

double r_count(std::size_t m, std::size_t n) noexcept {
  const std::size_t diff = m > n ? m - n : n - m;
  if (diff == 0) return 1.0;
  if (diff == 1) return 0.5;
  return -0.1;
}

double r_focus(std::size_t m) noexcept {
  if (m == 0) return 0.0;
  if (m == 1) return 0.5;
  return -0.1;
}

LocalizationReward r_loc(std::span<const BBox> preds, const Sample& sample, double alpha) {
  LocalizationReward out;
  if (sample.label == Label::Normal) {
    out.count_or_focus = r_focus(preds.size());
    out.value = out.count_or_focus;
    return out;
  }
  const auto cost = assignment::cost_matrix(preds, sample.gt_boxes);
  out.matching = assignment::solve(cost);
  if (!out.matching.pairs.empty()) {
    double sum = 0.0;
    for (const auto& [i, j] : out.matching.pairs) sum += geometry::giou(preds[i], sample.gt_boxes[j]);
    out.giou_mean = sum / static_cast<double>(out.matching.pairs.size());
  }
  out.count_or_focus = r_count(preds.size(), sample.gt_boxes.size());
  out.value = out.giou_mean + alpha * out.count_or_focus;
  return out;
}

double r_format(const response::ParsedResponse& parsed) noexcept {
  return parsed.format_ok ? 1.0 : 0.0;
}

double r_random(double sigma, Rng& rng) {
  if (sigma == 0.0) return 0.0;
  if (!(sigma > 0.0)) throw Error(ErrorCode::InvalidArgument, "random_sigma must be >= 0");
  std::normal_distribution<double> noise(0.0, sigma);
  return noise(rng);
}

Rng group_rng(std::uint64_t seed, std::string_view sample_id, std::uint64_t ordinal) {
  // FNV-1a keeps the derivation stable across platforms and runs.
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : sample_id) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32),
                    static_cast<std::uint32_t>(ordinal),
                    static_cast<std::uint32_t>(ordinal >> 32)};
  return Rng(seq);
}

RewardBreakdown assemble(const response::ParsedResponse& parsed, const Sample& sample,
                         const RewardConfig& cfg, Rng& rng) {
  RewardBreakdown out;
  out.m = parsed.pred_boxes.size();
  out.n = sample.gt_boxes.size();
  out.r_cls = r_cls(parsed.label, sample.label);
  auto loc = r_loc(parsed.pred_boxes, sample, cfg.alpha);
  out.r_count_or_focus = loc.count_or_focus;
  out.r_giou_mean = loc.giou_mean;
  out.r_loc = loc.value;
  out.matched_pairs = std::move(loc.matching);
  out.r_format = r_format(parsed);

  switch (cfg.scheme) {
    case RewardScheme::Cls:
      out.total = out.r_cls;
      break;
    case RewardScheme::ClsCount:
      out.total = out.r_cls + out.r_count_or_focus;
      break;
    case RewardScheme::ClsLoc:
      out.total = out.r_cls + out.r_loc;
      break;
    case RewardScheme::ClsLocFormat:
      out.total = out.r_cls + out.r_loc + out.r_format;
      break;
    case RewardScheme::ClsRandom:
      out.r_random = r_random(cfg.random_sigma, rng);
      out.total = out.r_cls + out.r_random;
      break;
  }
  return out;
}

}  // namespace locreward::rewards
