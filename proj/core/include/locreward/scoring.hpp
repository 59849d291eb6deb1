#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "locreward/grpo.hpp"
#include "locreward/model.hpp"
#include "locreward/response_parser.hpp"
#include "locreward/rewards.hpp"

namespace locreward::scoring {

struct ScoredGroup {
  std::vector<response::ParsedResponse> parsed;
  std::vector<rewards::RewardBreakdown> breakdowns;
  /// Rewards and advantages are always set. Losses and per-response KL are
  /// set only when has_losses is true.
  grpo::GroupSignal signal;
  bool has_losses = false;
};

/// Scores one group of G >= 2 responses to the same sample: parse, assemble
/// rewards, normalise into advantages. Noise for CLS_RANDOM comes from
/// rewards::group_rng(cfg.seed, sample.id, ordinal). When any response
/// carries logprobs, every response must carry both lists and the losses
/// are computed. Throws GroupTooSmall, MissingLogprobs, LengthMismatch.
ScoredGroup score_group(const Sample& sample, std::span<const ResponseRecord> responses,
                        const RewardConfig& cfg, std::uint64_t ordinal = 0);

}  // namespace locreward::scoring
