#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "locreward/analytics.hpp"
#include "locreward/model.hpp"
#include "locreward/response_parser.hpp"
#include "locreward/rewards.hpp"

namespace locreward::sim {

/// One enumerable response: a final answer plus a subset of the shared
/// candidate boxes proposed in the think stage.
struct Template {
  Label answer = Label::Normal;
  std::vector<std::size_t> box_ids;  // indices into Scenario::candidate_boxes, ascending
  std::string text;                  // rendered response
};

struct Scenario {
  double grid_width = 0.0;
  double grid_height = 0.0;
  std::vector<Sample> samples;
  std::vector<BBox> candidate_boxes;
  std::size_t max_boxes = 0;
  std::vector<Template> templates;
  std::vector<std::vector<double>> reference_logits;  // [sample][template], frozen
  std::size_t group_size = 6;
  std::size_t epochs = 0;
  double learning_rate = 0.0;
  RewardConfig cfg;

  /// Throws InvalidArgument (or the sample validation errors) on any
  /// inconsistency between the fields.
  void validate() const;
};

/// Answer x box-subset enumeration: Normal before Abnormal, subsets by size
/// then lexicographically. Each template is rendered through
/// response::render.
std::vector<Template> enumerate_templates(std::span<const BBox> candidates, std::size_t max_boxes);

/// Per-sample knobs of the reference policy
///   logit(t) = answer_logits[answer(t)] + sum_{b in t} box_logits[b] + count_logits[|t|]
///              + coupling * evidence(t) * (answer(t) == Abnormal ? +1 : -1)
/// where evidence(t) is the best IoU between a proposed box and a ground
/// truth box (0 for normal samples or no proposals). The coupling term makes
/// the answer depend on what the think stage localized.
struct ReferencePrior {
  double answer_logits[2] = {0.0, 0.0};  // [normal, abnormal]
  std::vector<double> box_logits;        // one per candidate box
};

struct ReferenceShape {
  std::vector<double> count_logits;  // indexed by number of proposed boxes; missing entries are 0
  double evidence_coupling = 0.0;
};

/// Best IoU between the template's boxes and the sample's ground truth.
double evidence(const Template& t, std::span<const BBox> candidates, const Sample& sample);

std::vector<double> reference_logits(const ReferencePrior& prior, const ReferenceShape& shape,
                                     const Sample& sample, std::span<const BBox> candidates,
                                     std::span<const Template> templates);

struct EpochStats {
  std::size_t epoch = 0;                  // 1-based
  double mean_reward = 0.0;               // over all rollouts of the epoch
  double zero_variance_fraction = 0.0;    // groups with no signal / groups
  double accuracy = 0.0;                  // probability that a sampled response has the right answer
  double greedy_accuracy = 0.0;           // the modal template has the right answer
  double mean_kl = 0.0;                   // exact KL(pi_theta || pi_ref), averaged over samples
};

struct TrainTrace {
  RewardScheme scheme = RewardScheme::Cls;
  std::vector<EpochStats> epochs;
  std::vector<std::vector<double>> final_policy;  // [sample][template]
  std::vector<std::size_t> modal_templates;       // argmax per sample (lowest index on ties)
  double modal_mean_r_loc = 0.0;                  // mean r_loc of the modal templates
  double modal_count_optimal = 0.0;               // fraction of samples whose modal template earns the
                                                  // top count/focus score (m == n, or m == 1 when normal)
};

/// G i.i.d. draws from softmax(logits); returns template indices.
std::vector<std::size_t> sample_templates(std::span<const double> logits, std::size_t group_size,
                                          rewards::Rng& rng);

/// Rendered texts of a sampled group.
std::vector<std::string> rollout(const Scenario& scenario, std::span<const double> logits,
                                 rewards::Rng& rng, std::vector<std::size_t>* chosen = nullptr);

/// Exact KL(softmax(logits) || softmax(ref)).
double categorical_kl(std::span<const double> logits, std::span<const double> ref);

/// Gradient of categorical_kl with respect to `logits`.
std::vector<double> categorical_kl_gradient(std::span<const double> logits,
                                            std::span<const double> ref);

/// Ascent direction for one group: (1/G) * policy gradient - beta * grad KL.
/// Exposed so the zero-gradient behaviour of uniform groups can be checked.
struct GroupUpdate {
  std::vector<double> rewards;
  std::vector<double> advantages;
  std::vector<double> reward_gradient;  // (1/G) * sum_i A_i (onehot - pi)
  std::vector<double> direction;        // reward_gradient - beta * grad KL
};

GroupUpdate group_update(const Scenario& scenario, std::size_t sample_index,
                         std::span<const double> logits, std::span<const std::size_t> chosen,
                         const RewardConfig& cfg, rewards::Rng& reward_rng);

/// Runs the deterministic GRPO loop with scenario.cfg.scheme.
TrainTrace train(const Scenario& scenario);

/// Same scenario, seed and initial logits per scheme; only reward assembly differs.
std::vector<TrainTrace> compare_schemes(const Scenario& scenario,
                                        std::span<const RewardScheme> schemes);

/// Zero-variance survey: one group of G responses per sample drawn from the
/// reference policy, the identical response set scored under every scheme.
std::vector<analytics::VarianceReport> variance_survey(const Scenario& scenario,
                                                       std::span<const RewardScheme> schemes);

}  // namespace locreward::sim
