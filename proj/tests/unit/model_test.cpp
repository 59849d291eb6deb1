#include <doctest.h>

#include <cmath>
#include <limits>

#include "locreward/model.hpp"

using namespace locreward;

namespace {

ErrorCode code_of(const Sample& s) {
  try {
    validate_sample(s);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected validate_sample to throw");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("bbox validity") {
  CHECK(BBox{0, 0, 1, 1}.valid());
  CHECK_FALSE(BBox{0, 0, 0, 1}.valid());
  CHECK_FALSE(BBox{3, 3, 1, 1}.valid());
  CHECK_FALSE(BBox{0, 0, std::numeric_limits<double>::infinity(), 1}.valid());
  CHECK_FALSE(BBox{0, 0, std::nan(""), 1}.valid());
  CHECK(BBox{0, 0, 4, 5}.area() == 20.0);
}

TEST_CASE("validate_sample accepts well-formed samples") {
  const Sample abnormal{"a", Label::Abnormal, {{0, 0, 10, 10}}, {}, {}};
  const Sample normal{"n", Label::Normal, {}, {}, {}};
  CHECK(&validate_sample(abnormal) == &abnormal);
  CHECK(&validate_sample(normal) == &normal);
  // Idempotent.
  CHECK(validate_sample(validate_sample(abnormal)).gt_boxes == abnormal.gt_boxes);
}

TEST_CASE("validate_sample error kinds") {
  CHECK(code_of({"x", Label::Abnormal, {}, {}, {}}) == ErrorCode::LabelBoxMismatch);
  CHECK(code_of({"x", Label::Normal, {{0, 0, 1, 1}}, {}, {}}) == ErrorCode::LabelBoxMismatch);
  CHECK(code_of({"x", Label::Abnormal, {{2, 0, 1, 1}}, {}, {}}) == ErrorCode::DegenerateBox);
  CHECK(code_of({"x", Label::Abnormal, {{0, 0, 11, 5}}, 10.0, 10.0}) == ErrorCode::OutOfFrame);
  CHECK(code_of({"x", Label::Abnormal, {{0, 0, 1, 1}}, -1.0, 10.0}) == ErrorCode::InvalidArgument);
}

TEST_CASE("validate_record") {
  ResponseRecord r{"s", "t", std::vector<double>{-0.1, -0.2}, std::vector<double>{-0.3, -0.4}};
  CHECK_NOTHROW(validate_record(r));
  r.token_logprobs_ref = std::vector<double>{-0.3};
  CHECK_THROWS_AS(validate_record(r), Error);
  r.token_logprobs_ref = std::vector<double>{-0.3, 0.5};
  CHECK_THROWS_AS(validate_record(r), Error);
  r.token_logprobs_policy = std::vector<double>{};
  r.token_logprobs_ref = std::vector<double>{};
  CHECK_THROWS_AS(validate_record(r), Error);
}

TEST_CASE("scheme names round-trip") {
  for (RewardScheme s : {RewardScheme::Cls, RewardScheme::ClsCount, RewardScheme::ClsLoc,
                         RewardScheme::ClsLocFormat, RewardScheme::ClsRandom}) {
    CHECK(parse_scheme(to_string(s)) == s);
  }
  CHECK(parse_scheme("CLS_LOC") == RewardScheme::ClsLoc);
  CHECK_FALSE(parse_scheme("loc").has_value());
}

TEST_CASE("reward config validation") {
  RewardConfig cfg;
  CHECK(cfg.alpha == 0.5);
  CHECK(cfg.beta == 0.04);
  CHECK(cfg.std_eps == 1e-6);
  CHECK_NOTHROW(cfg.validate());
  cfg.std_eps = 0.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = RewardConfig{};
  cfg.alpha = -1.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = RewardConfig{};
  cfg.random_sigma = -0.1;
  CHECK_THROWS_AS(cfg.validate(), Error);
}
