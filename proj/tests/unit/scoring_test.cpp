#include <doctest.h>

#include <cmath>

#include "locreward/scoring.hpp"

using namespace locreward;

namespace {

const char* kPerfect =
    "<think>crack at [0, 0, 10, 10]</think><rethink>edges confirm it</rethink>"
    "<answer>abnormal</answer>";
const char* kMissed =
    "<think>looks clean</think><rethink>nothing</rethink><answer>normal</answer>";

Sample sample() { return {"s1", Label::Abnormal, {{0, 0, 10, 10}}, 64.0, 64.0}; }

}  // namespace

TEST_CASE("score_group without logprobs") {
  std::vector<ResponseRecord> group{{"s1", kPerfect, {}, {}}, {"s1", kMissed, {}, {}}};
  const auto out = scoring::score_group(sample(), group, RewardConfig{});
  REQUIRE(out.breakdowns.size() == 2);
  CHECK(out.breakdowns[0].total == doctest::Approx(3.5));
  CHECK(out.breakdowns[1].total == doctest::Approx(0.0 + 0.5 * 0.5 + 1.0));
  CHECK(out.signal.advantages == std::vector<double>{1, -1});
  CHECK_FALSE(out.has_losses);
  CHECK(out.signal.kl_per_response.empty());
  CHECK(out.parsed[0].format_ok);
}

TEST_CASE("score_group with logprobs") {
  std::vector<ResponseRecord> group{{"s1", kPerfect, std::vector<double>{-0.5}, std::vector<double>{-0.5}},
                                    {"s1", kMissed, std::vector<double>{-1.0}, std::vector<double>{-2.0}}};
  const auto out = scoring::score_group(sample(), group, RewardConfig{});
  CHECK(out.has_losses);
  CHECK(out.signal.kl_per_response.size() == 2);
  CHECK(out.signal.loss_total ==
        doctest::Approx(out.signal.loss_rew + 0.04 * out.signal.loss_reg));
}

TEST_CASE("score_group errors") {
  std::vector<ResponseRecord> one{{"s1", kPerfect, {}, {}}};
  try {
    scoring::score_group(sample(), one, RewardConfig{});
    FAIL("expected GroupTooSmall");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::GroupTooSmall);
  }
  std::vector<ResponseRecord> partial{{"s1", kPerfect, std::vector<double>{-0.5}, std::vector<double>{-0.5}},
                                      {"s1", kMissed, {}, {}}};
  try {
    scoring::score_group(sample(), partial, RewardConfig{});
    FAIL("expected MissingLogprobs");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingLogprobs);
  }
  std::vector<ResponseRecord> foreign{{"s1", kPerfect, {}, {}}, {"s2", kMissed, {}, {}}};
  CHECK_THROWS_AS(scoring::score_group(sample(), foreign, RewardConfig{}), Error);
}

TEST_CASE("score_group random scheme is reproducible per ordinal") {
  RewardConfig cfg;
  cfg.scheme = RewardScheme::ClsRandom;
  cfg.seed = 9;
  std::vector<ResponseRecord> group(4, {"s1", kPerfect, {}, {}});
  const auto a = scoring::score_group(sample(), group, cfg, 0);
  const auto b = scoring::score_group(sample(), group, cfg, 0);
  const auto c = scoring::score_group(sample(), group, cfg, 1);
  CHECK(a.signal.rewards == b.signal.rewards);
  CHECK(a.signal.rewards != c.signal.rewards);
  CHECK_FALSE(a.signal.zero_variance);
}
