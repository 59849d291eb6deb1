#include "locreward/scoring.hpp"

#include <algorithm>
#include <string>

namespace locreward::scoring {

ScoredGroup score_group(const Sample& sample, std::span<const ResponseRecord> responses,
                        const RewardConfig& cfg, std::uint64_t ordinal) {
  cfg.validate();
  validate_sample(sample);
  if (responses.size() < 2) {
    throw Error(ErrorCode::GroupTooSmall,
                "group needs at least 2 responses, got " + std::to_string(responses.size()));
  }
  for (const ResponseRecord& r : responses) {
    if (r.sample_id != sample.id) {
      throw Error(ErrorCode::InvalidArgument,
                  "response for '" + r.sample_id + "' scored against sample '" + sample.id + "'");
    }
    validate_record(r);
  }

  ScoredGroup out;
  auto rng = rewards::group_rng(cfg.seed, sample.id, ordinal);
  std::vector<double> totals;
  totals.reserve(responses.size());
  for (const ResponseRecord& r : responses) {
    out.parsed.push_back(response::parse(r.text));
    out.breakdowns.push_back(rewards::assemble(out.parsed.back(), sample, cfg, rng));
    totals.push_back(out.breakdowns.back().total);
  }

  out.has_losses = std::any_of(responses.begin(), responses.end(), [](const ResponseRecord& r) {
    return r.token_logprobs_policy.has_value() || r.token_logprobs_ref.has_value();
  });
  if (out.has_losses) {
    out.signal = grpo::losses(responses, totals, cfg);
  } else {
    out.signal.zero_variance =
        grpo::is_zero_variance(grpo::population_moments(totals).variance, cfg.std_eps);
    out.signal.advantages = grpo::advantages(totals, cfg.std_eps);
    out.signal.rewards = std::move(totals);
  }
  return out;
}

}  // namespace locreward::scoring
