#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "locreward/model.hpp"

namespace locreward::grpo {

struct GroupSignal {
  std::vector<double> rewards;
  std::vector<double> advantages;
  std::vector<double> kl_per_response;  // mean per-token KL estimate
  double loss_rew = 0.0;
  double loss_reg = 0.0;
  double loss_total = 0.0;
  bool zero_variance = false;
};

struct Moments {
  double mean = 0.0;
  double variance = 0.0;  // population (divide by G)
};

/// Population mean and variance. Throws GroupTooSmall for fewer than 2 values.
Moments population_moments(std::span<const double> values);

/// The single predicate shared with analytics for "this group has no
/// learning signal": variance < std_eps^2.
bool is_zero_variance(double variance, double std_eps) noexcept;

/// Group z-scores with population statistics; all zeros when the group is
/// zero-variance. Throws GroupTooSmall for G < 2.
std::vector<double> advantages(std::span<const double> rewards, double std_eps);

/// Non-negative per-token estimate rho - ln(rho) - 1, rho = pi_ref / pi_theta.
double kl_per_token(double logp_policy, double logp_ref);

/// Mean of kl_per_token over the tokens of one response.
double mean_kl(std::span<const double> logp_policy, std::span<const double> logp_ref);

/// Advantage-weighted negative log-likelihood plus beta times mean KL.
/// Throws MissingLogprobs or LengthMismatch.
GroupSignal losses(std::span<const ResponseRecord> group, std::span<const double> rewards,
                   const RewardConfig& cfg);

/// Numerically stable softmax.
std::vector<double> softmax(std::span<const double> logits);

/// Exact gradient of sum_i A_i * log softmax(logits)[chosen_i] with respect
/// to the logits: sum_i A_i * (onehot(chosen_i) - softmax(logits)).
std::vector<double> policy_gradient_categorical(std::span<const double> logits,
                                                std::span<const std::size_t> chosen,
                                                std::span<const double> advantages);

}  // namespace locreward::grpo
