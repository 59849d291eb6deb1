#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "locreward/model.hpp"

namespace locreward::analytics {

struct VarianceReport {
  std::optional<RewardScheme> scheme;
  std::size_t groups_total = 0;
  std::size_t groups_zero_variance = 0;
  double zero_variance_pct = 0.0;
  std::vector<double> per_group_variance;
};

/// Population variance. Throws GroupTooSmall for fewer than 2 rewards.
double group_variance(std::span<const double> rewards);

/// Counts groups whose variance is below std_eps^2.
VarianceReport report(std::span<const std::vector<double>> groups, double std_eps,
                      std::optional<RewardScheme> scheme = std::nullopt);

/// Aligned-column text table, one row per report.
std::string format_table(std::span<const VarianceReport> reports);

/// "group,variance,zero_variance" rows for external plotting.
std::string format_csv(const VarianceReport& report, double std_eps);

}  // namespace locreward::analytics
