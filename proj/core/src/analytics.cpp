#include "locreward/analytics.hpp"

#include <cstdio>
#include <sstream>

#include "locreward/grpo.hpp"

namespace locreward::analytics {

double group_variance(std::span<const double> rewards) {
  return grpo::population_moments(rewards).variance;
}

VarianceReport report(std::span<const std::vector<double>> groups, double std_eps,
                      std::optional<RewardScheme> scheme) {
  VarianceReport out;
  out.scheme = scheme;
  out.per_group_variance.reserve(groups.size());
  for (const auto& g : groups) {
    const double v = group_variance(g);
    out.per_group_variance.push_back(v);
    if (grpo::is_zero_variance(v, std_eps)) ++out.groups_zero_variance;
  }
  out.groups_total = groups.size();
  if (out.groups_total > 0) {
    out.zero_variance_pct = 100.0 * static_cast<double>(out.groups_zero_variance) /
                            static_cast<double>(out.groups_total);
  }
  return out;
}

std::string format_table(std::span<const VarianceReport> reports) {
  std::ostringstream os;
  char line[128];
  std::snprintf(line, sizeof line, "%-16s %8s %12s %10s\n", "scheme", "groups", "zero_var",
                "zero_pct");
  os << line;
  for (const auto& r : reports) {
    const std::string name = r.scheme ? std::string(to_string(*r.scheme)) : "-";
    std::snprintf(line, sizeof line, "%-16s %8zu %12zu %9.2f%%\n", name.c_str(), r.groups_total,
                  r.groups_zero_variance, r.zero_variance_pct);
    os << line;
  }
  return os.str();
}

std::string format_csv(const VarianceReport& report, double std_eps) {
  std::ostringstream os;
  os.precision(17);
  os << "group,variance,zero_variance\n";
  for (std::size_t i = 0; i < report.per_group_variance.size(); ++i) {
    const double v = report.per_group_variance[i];
    os << i << ',' << v << ',' << (grpo::is_zero_variance(v, std_eps) ? 1 : 0) << '\n';
  }
  return os.str();
}

}  // namespace locreward::analytics
