#include "locreward/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "locreward/geometry.hpp"
#include "locreward/grpo.hpp"

namespace locreward::sim {

namespace {

void require(bool cond, const std::string& what) {
  if (!cond) throw Error(ErrorCode::InvalidArgument, "scenario: " + what);
}

std::size_t argmax(std::span<const double> v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

std::vector<double> log_softmax(std::span<const double> logits) {
  const double peak = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double l : logits) z += std::exp(l - peak);
  const double log_z = peak + std::log(z);
  std::vector<double> out(logits.size());
  for (std::size_t k = 0; k < logits.size(); ++k) out[k] = logits[k] - log_z;
  return out;
}

std::vector<BBox> boxes_of(const Scenario& sc, const Template& t) {
  std::vector<BBox> out;
  out.reserve(t.box_ids.size());
  for (std::size_t id : t.box_ids) out.push_back(sc.candidate_boxes[id]);
  return out;
}

void combinations(std::size_t n, std::size_t k, std::size_t start, std::vector<std::size_t>& cur,
                  std::vector<std::vector<std::size_t>>& out) {
  if (cur.size() == k) {
    out.push_back(cur);
    return;
  }
  for (std::size_t i = start; i < n; ++i) {
    cur.push_back(i);
    combinations(n, k, i + 1, cur, out);
    cur.pop_back();
  }
}

}  // namespace

void Scenario::validate() const {
  require(grid_width > 0.0 && grid_height > 0.0, "grid dimensions must be positive");
  require(!samples.empty(), "needs at least one sample");
  require(group_size >= 2, "group size must be >= 2");
  require(!templates.empty(), "template set is empty");
  require(learning_rate >= 0.0 && std::isfinite(learning_rate),
          "learning rate must be finite and >= 0");
  require(reference_logits.size() == samples.size(),
          "need one reference logit vector per sample");
  cfg.validate();
  for (const BBox& b : candidate_boxes) require(b.valid(), "candidate box is degenerate");
  for (const Template& t : templates) {
    require(t.box_ids.size() <= max_boxes, "template proposes more than max_boxes boxes");
    for (std::size_t id : t.box_ids) require(id < candidate_boxes.size(), "template box id out of range");
  }
  for (std::size_t s = 0; s < samples.size(); ++s) {
    Sample framed = samples[s];
    framed.image_width = grid_width;
    framed.image_height = grid_height;
    validate_sample(framed);
    require(reference_logits[s].size() == templates.size(),
            "sample '" + samples[s].id + "' reference logits do not match the template count");
    for (double l : reference_logits[s]) require(std::isfinite(l), "non-finite reference logit");
  }
}

std::vector<Template> enumerate_templates(std::span<const BBox> candidates, std::size_t max_boxes) {
  std::vector<std::vector<std::size_t>> subsets;
  for (std::size_t k = 0; k <= std::min(max_boxes, candidates.size()); ++k) {
    std::vector<std::size_t> cur;
    combinations(candidates.size(), k, 0, cur, subsets);
  }
  std::vector<Template> out;
  for (Label answer : {Label::Normal, Label::Abnormal}) {
    for (const auto& subset : subsets) {
      response::ResponseTemplate rt;
      rt.think = subset.empty() ? "Scanned the whole surface; nothing stands out."
                                : "Scanned the whole surface; suspicious regions at";
      rt.rethink = subset.empty() ? "A second pass over the surface confirms the first impression."
                                  : "Examined each proposed region at higher detail.";
      rt.answer = answer == Label::Abnormal ? "abnormal" : "normal";
      for (std::size_t id : subset) rt.boxes.push_back(candidates[id]);
      out.push_back({answer, subset, response::render(rt)});
    }
  }
  return out;
}

double evidence(const Template& t, std::span<const BBox> candidates, const Sample& sample) {
  double best = 0.0;
  for (std::size_t id : t.box_ids) {
    for (const BBox& g : sample.gt_boxes) best = std::max(best, geometry::iou(candidates[id], g));
  }
  return best;
}

std::vector<double> reference_logits(const ReferencePrior& prior, const ReferenceShape& shape,
                                     const Sample& sample, std::span<const BBox> candidates,
                                     std::span<const Template> templates) {
  std::vector<double> out;
  out.reserve(templates.size());
  for (const Template& t : templates) {
    double l = prior.answer_logits[t.answer == Label::Abnormal ? 1 : 0];
    for (std::size_t id : t.box_ids) {
      if (id >= prior.box_logits.size()) {
        throw Error(ErrorCode::IndexOutOfRange, "reference prior lacks a logit for box " +
                                                    std::to_string(id));
      }
      l += prior.box_logits[id];
    }
    if (t.box_ids.size() < shape.count_logits.size()) l += shape.count_logits[t.box_ids.size()];
    if (shape.evidence_coupling != 0.0) {
      const double sign = t.answer == Label::Abnormal ? 1.0 : -1.0;
      l += shape.evidence_coupling * sign * evidence(t, candidates, sample);
    }
    out.push_back(l);
  }
  return out;
}

std::vector<std::size_t> sample_templates(std::span<const double> logits, std::size_t group_size,
                                          rewards::Rng& rng) {
  const auto probs = grpo::softmax(logits);
  std::discrete_distribution<std::size_t> pick(probs.begin(), probs.end());
  std::vector<std::size_t> out(group_size);
  for (auto& c : out) c = pick(rng);
  return out;
}

std::vector<std::string> rollout(const Scenario& scenario, std::span<const double> logits,
                                 rewards::Rng& rng, std::vector<std::size_t>* chosen) {
  if (logits.size() != scenario.templates.size()) {
    throw Error(ErrorCode::LengthMismatch, "logit vector does not match the template count");
  }
  const auto picks = sample_templates(logits, scenario.group_size, rng);
  std::vector<std::string> texts;
  texts.reserve(picks.size());
  for (std::size_t k : picks) texts.push_back(scenario.templates[k].text);
  if (chosen) *chosen = picks;
  return texts;
}

double categorical_kl(std::span<const double> logits, std::span<const double> ref) {
  const auto lp = log_softmax(logits);
  const auto lq = log_softmax(ref);
  double kl = 0.0;
  for (std::size_t k = 0; k < lp.size(); ++k) kl += std::exp(lp[k]) * (lp[k] - lq[k]);
  return std::max(kl, 0.0);
}

std::vector<double> categorical_kl_gradient(std::span<const double> logits,
                                            std::span<const double> ref) {
  // d/d theta_k KL = pi_k * (d_k - E_pi[d]),  d = log pi - log q.
  const auto lp = log_softmax(logits);
  const auto lq = log_softmax(ref);
  std::vector<double> d(lp.size());
  double mean_d = 0.0;
  for (std::size_t k = 0; k < lp.size(); ++k) {
    d[k] = lp[k] - lq[k];
    mean_d += std::exp(lp[k]) * d[k];
  }
  for (std::size_t k = 0; k < lp.size(); ++k) d[k] = std::exp(lp[k]) * (d[k] - mean_d);
  return d;
}

GroupUpdate group_update(const Scenario& scenario, std::size_t sample_index,
                         std::span<const double> logits, std::span<const std::size_t> chosen,
                         const RewardConfig& cfg, rewards::Rng& reward_rng) {
  const Sample& sample = scenario.samples.at(sample_index);
  GroupUpdate up;
  up.rewards.reserve(chosen.size());
  for (std::size_t k : chosen) {
    const auto parsed = response::parse(scenario.templates.at(k).text);
    up.rewards.push_back(rewards::assemble(parsed, sample, cfg, reward_rng).total);
  }
  up.advantages = grpo::advantages(up.rewards, cfg.std_eps);
  up.reward_gradient = grpo::policy_gradient_categorical(logits, chosen, up.advantages);
  const double inv_g = 1.0 / static_cast<double>(chosen.size());
  for (double& g : up.reward_gradient) g *= inv_g;
  up.direction = up.reward_gradient;
  if (cfg.beta > 0.0) {
    const auto kl_grad = categorical_kl_gradient(logits, scenario.reference_logits[sample_index]);
    for (std::size_t k = 0; k < up.direction.size(); ++k) up.direction[k] -= cfg.beta * kl_grad[k];
  }
  return up;
}

TrainTrace train(const Scenario& scenario) {
  scenario.validate();
  const RewardConfig& cfg = scenario.cfg;
  const std::size_t n_samples = scenario.samples.size();
  std::vector<std::vector<double>> logits = scenario.reference_logits;

  TrainTrace trace;
  trace.scheme = cfg.scheme;
  trace.epochs.reserve(scenario.epochs);

  for (std::size_t epoch = 1; epoch <= scenario.epochs; ++epoch) {
    EpochStats st;
    st.epoch = epoch;
    std::size_t zero_groups = 0;
    double reward_sum = 0.0;
    for (std::size_t s = 0; s < n_samples; ++s) {
      const std::string& id = scenario.samples[s].id;
      auto draw_rng = rewards::group_rng(cfg.seed, "rollout/" + id, epoch);
      auto reward_rng = rewards::group_rng(cfg.seed, id, epoch);
      std::vector<std::size_t> chosen;
      rollout(scenario, logits[s], draw_rng, &chosen);
      const auto up = group_update(scenario, s, logits[s], chosen, cfg, reward_rng);
      for (double r : up.rewards) reward_sum += r;
      if (std::all_of(up.advantages.begin(), up.advantages.end(), [](double a) { return a == 0.0; })) {
        ++zero_groups;
      }
      for (std::size_t k = 0; k < logits[s].size(); ++k) {
        logits[s][k] += scenario.learning_rate * up.direction[k];
        if (!std::isfinite(logits[s][k])) {
          throw Error(ErrorCode::InvalidArgument, "policy logits diverged at epoch " +
                                                      std::to_string(epoch));
        }
      }
    }
    st.mean_reward = reward_sum / static_cast<double>(n_samples * scenario.group_size);
    st.zero_variance_fraction = static_cast<double>(zero_groups) / static_cast<double>(n_samples);

    double greedy = 0.0, acc = 0.0, kl = 0.0;
    for (std::size_t s = 0; s < n_samples; ++s) {
      const Label truth = scenario.samples[s].label;
      const auto probs = grpo::softmax(logits[s]);
      if (scenario.templates[argmax(probs)].answer == truth) greedy += 1.0;
      for (std::size_t k = 0; k < probs.size(); ++k) {
        if (scenario.templates[k].answer == truth) acc += probs[k];
      }
      kl += categorical_kl(logits[s], scenario.reference_logits[s]);
    }
    const double n = static_cast<double>(n_samples);
    st.accuracy = acc / n;
    st.greedy_accuracy = greedy / n;
    st.mean_kl = kl / n;
    trace.epochs.push_back(st);
  }

  double loc_sum = 0.0, count_optimal = 0.0;
  for (std::size_t s = 0; s < n_samples; ++s) {
    auto probs = grpo::softmax(logits[s]);
    const std::size_t modal = argmax(probs);
    trace.modal_templates.push_back(modal);
    const Template& t = scenario.templates[modal];
    const auto boxes = boxes_of(scenario, t);
    const auto loc = rewards::r_loc(boxes, scenario.samples[s], cfg.alpha);
    loc_sum += loc.value;
    const bool normal = scenario.samples[s].label == Label::Normal;
    if (loc.count_or_focus == (normal ? rewards::r_focus(1) : rewards::r_count(0, 0))) {
      count_optimal += 1.0;
    }
    trace.final_policy.push_back(std::move(probs));
  }
  trace.modal_mean_r_loc = loc_sum / static_cast<double>(n_samples);
  trace.modal_count_optimal = count_optimal / static_cast<double>(n_samples);
  return trace;
}

std::vector<TrainTrace> compare_schemes(const Scenario& scenario,
                                        std::span<const RewardScheme> schemes) {
  if (schemes.empty()) throw Error(ErrorCode::InvalidArgument, "no schemes to compare");
  std::vector<TrainTrace> out;
  out.reserve(schemes.size());
  for (RewardScheme scheme : schemes) {
    Scenario run = scenario;
    run.cfg.scheme = scheme;
    out.push_back(train(run));
  }
  return out;
}

std::vector<analytics::VarianceReport> variance_survey(const Scenario& scenario,
                                                       std::span<const RewardScheme> schemes) {
  scenario.validate();
  std::vector<std::vector<std::vector<double>>> groups(schemes.size());
  for (std::size_t s = 0; s < scenario.samples.size(); ++s) {
    const Sample& sample = scenario.samples[s];
    auto draw_rng = rewards::group_rng(scenario.cfg.seed, "survey/" + sample.id);
    const auto texts = rollout(scenario, scenario.reference_logits[s], draw_rng);
    std::vector<response::ParsedResponse> parsed;
    parsed.reserve(texts.size());
    for (const auto& t : texts) parsed.push_back(response::parse(t));
    for (std::size_t k = 0; k < schemes.size(); ++k) {
      RewardConfig cfg = scenario.cfg;
      cfg.scheme = schemes[k];
      auto reward_rng = rewards::group_rng(cfg.seed, sample.id);
      std::vector<double> totals;
      totals.reserve(parsed.size());
      for (const auto& p : parsed) totals.push_back(rewards::assemble(p, sample, cfg, reward_rng).total);
      groups[k].push_back(std::move(totals));
    }
  }
  std::vector<analytics::VarianceReport> out;
  out.reserve(schemes.size());
  for (std::size_t k = 0; k < schemes.size(); ++k) {
    out.push_back(analytics::report(groups[k], scenario.cfg.std_eps, schemes[k]));
  }
  return out;
}

}  // namespace locreward::sim
