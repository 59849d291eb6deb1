#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include <json.hpp>

#include "locreward/analytics.hpp"
#include "locreward/grpo.hpp"
#include "locreward/model.hpp"
#include "locreward/rewards.hpp"
#include "locreward/simulator.hpp"

namespace locreward::cli {

using Json = nlohmann::ordered_json;

/// Schema or I/O failure tied to a location ("file:line" or "file: path").
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reads a whole JSON document; syntax errors are reported as file:line:col.
Json read_json_file(const std::filesystem::path& path);

using SampleTable = std::unordered_map<std::string, Sample>;

/// {"samples": [{"id", "label", "gt_boxes", "image_width"?, "image_height"?}]}
/// Unknown fields, duplicate ids and invariant violations are rejected.
SampleTable load_samples(const std::filesystem::path& path);

/// One responses-JSONL line:
/// {"sample_id", "response_text", "token_logprobs_policy"?, "token_logprobs_ref"?}
ResponseRecord parse_response_line(const std::string& line, const std::string& where);

/// Scenario config file for the simulator.
sim::Scenario load_scenario(const std::filesystem::path& path);

Json box_to_json(const BBox& b);
Json report_to_json(const analytics::VarianceReport& r);
Json epoch_to_json(const sim::EpochStats& e);

/// Scored-JSONL record for one response of a group.
Json scored_line(std::size_t group_id, const std::string& sample_id, std::size_t index,
                 RewardScheme scheme, const response::ParsedResponse& parsed,
                 const rewards::RewardBreakdown& b, double advantage, bool zero_variance,
                 const grpo::GroupSignal* signal);

}  // namespace locreward::cli
