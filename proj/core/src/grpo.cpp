#include "locreward/grpo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace locreward::grpo {

Moments population_moments(std::span<const double> values) {
  if (values.size() < 2) {
    throw Error(ErrorCode::GroupTooSmall,
                "group needs at least 2 rewards, got " + std::to_string(values.size()));
  }
  const double g = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  Moments mo;
  mo.mean = sum / g;
  double ss = 0.0;
  for (double v : values) ss += (v - mo.mean) * (v - mo.mean);
  mo.variance = ss / g;
  return mo;
}

bool is_zero_variance(double variance, double std_eps) noexcept {
  return variance < std_eps * std_eps;
}

std::vector<double> advantages(std::span<const double> rewards, double std_eps) {
  const Moments mo = population_moments(rewards);
  std::vector<double> out(rewards.size(), 0.0);
  if (is_zero_variance(mo.variance, std_eps)) return out;
  const double sd = std::sqrt(mo.variance);
  for (std::size_t i = 0; i < rewards.size(); ++i) out[i] = (rewards[i] - mo.mean) / sd;
  return out;
}

double kl_per_token(double logp_policy, double logp_ref) {
  if (!std::isfinite(logp_policy) || !std::isfinite(logp_ref)) {
    throw Error(ErrorCode::InvalidArgument, "log-probabilities must be finite");
  }
  const double d = logp_ref - logp_policy;
  if (d == 0.0) return 0.0;
  double value;
  if (std::abs(d) < 1e-3) {
    // e^d - d - 1 by its Taylor series; expm1(d) - d cancels badly here.
    value = d * d * (1.0 / 2 + d * (1.0 / 6 + d * (1.0 / 24 + d * (1.0 / 120 + d / 720))));
  } else {
    value = std::expm1(d) - d;
  }
  // Positive for d != 0 even when the true value is below double range.
  return std::max(value, std::numeric_limits<double>::denorm_min());
}

double mean_kl(std::span<const double> logp_policy, std::span<const double> logp_ref) {
  if (logp_policy.size() != logp_ref.size()) {
    throw Error(ErrorCode::LengthMismatch, "policy and reference logprob lists differ in length");
  }
  if (logp_policy.empty()) {
    throw Error(ErrorCode::LengthMismatch, "logprob lists must be non-empty");
  }
  double sum = 0.0;
  for (std::size_t t = 0; t < logp_policy.size(); ++t) sum += kl_per_token(logp_policy[t], logp_ref[t]);
  return sum / static_cast<double>(logp_policy.size());
}

GroupSignal losses(std::span<const ResponseRecord> group, std::span<const double> rewards,
                   const RewardConfig& cfg) {
  if (group.size() != rewards.size()) {
    throw Error(ErrorCode::LengthMismatch, "group has " + std::to_string(group.size()) +
                                               " responses but " + std::to_string(rewards.size()) +
                                               " rewards");
  }
  GroupSignal sig;
  sig.rewards.assign(rewards.begin(), rewards.end());
  const Moments mo = population_moments(rewards);
  sig.zero_variance = is_zero_variance(mo.variance, cfg.std_eps);
  sig.advantages = advantages(rewards, cfg.std_eps);

  const double g = static_cast<double>(group.size());
  double rew = 0.0;
  double reg = 0.0;
  sig.kl_per_response.reserve(group.size());
  for (std::size_t i = 0; i < group.size(); ++i) {
    const ResponseRecord& r = group[i];
    if (!r.token_logprobs_policy || !r.token_logprobs_ref) {
      throw Error(ErrorCode::MissingLogprobs,
                  "response " + std::to_string(i) + " for '" + r.sample_id + "' lacks logprobs");
    }
    validate_record(r);
    const auto& lp = *r.token_logprobs_policy;
    double weighted = 0.0;
    for (double v : lp) weighted += sig.advantages[i] * v;
    rew += weighted / static_cast<double>(lp.size());
    const double kl = mean_kl(lp, *r.token_logprobs_ref);
    sig.kl_per_response.push_back(kl);
    reg += kl;
  }
  sig.loss_rew = -rew / g;
  sig.loss_reg = reg / g;
  sig.loss_total = sig.loss_rew + cfg.beta * sig.loss_reg;
  return sig;
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> p(logits.size());
  if (logits.empty()) return p;
  const double peak = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    p[k] = std::exp(logits[k] - peak);
    z += p[k];
  }
  for (double& v : p) v /= z;
  return p;
}

std::vector<double> policy_gradient_categorical(std::span<const double> logits,
                                                std::span<const std::size_t> chosen,
                                                std::span<const double> advantages) {
  if (chosen.size() != advantages.size()) {
    throw Error(ErrorCode::LengthMismatch, "chosen and advantages differ in length");
  }
  const auto probs = softmax(logits);
  std::vector<double> grad(logits.size(), 0.0);
  double weight = 0.0;
  for (std::size_t i = 0; i < chosen.size(); ++i) {
    if (chosen[i] >= logits.size()) {
      throw Error(ErrorCode::IndexOutOfRange, "chosen index " + std::to_string(chosen[i]) +
                                                  " outside " + std::to_string(logits.size()) +
                                                  " logits");
    }
    grad[chosen[i]] += advantages[i];
    weight += advantages[i];
  }
  for (std::size_t k = 0; k < grad.size(); ++k) grad[k] -= weight * probs[k];
  return grad;
}

}  // namespace locreward::grpo
