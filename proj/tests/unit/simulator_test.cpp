#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "cli/json_io.hpp"
#include "locreward/grpo.hpp"
#include "locreward/simulator.hpp"
#include "support/gen.hpp"
#include "support/scenarios.hpp"

using namespace locreward;
using namespace locreward::sim;

namespace {

double exact_reward(const Scenario& sc, std::size_t s, std::size_t t) {
  rewards::Rng unused(0);
  return rewards::assemble(response::parse(sc.templates[t].text), sc.samples[s], sc.cfg, unused)
      .total;
}

Scenario demo() { return cli::load_scenario(LOCREWARD_DEMO_SCENARIO); }

double mean_zero_variance(const TrainTrace& t) {
  double sum = 0.0;
  for (const auto& e : t.epochs) sum += e.zero_variance_fraction;
  return sum / static_cast<double>(t.epochs.size());
}

}  // namespace

TEST_CASE("template enumeration") {
  const std::vector<BBox> cands{{0, 0, 1, 1}, {2, 2, 3, 3}, {4, 4, 5, 5}};
  const auto ts = enumerate_templates(cands, 2);
  REQUIRE(ts.size() == 14);
  CHECK(ts[0].answer == Label::Normal);
  CHECK(ts[0].box_ids.empty());
  CHECK(ts[1].box_ids == std::vector<std::size_t>{0});
  CHECK(ts[4].box_ids == std::vector<std::size_t>{0, 1});
  CHECK(ts[7].answer == Label::Abnormal);
  std::set<std::string> texts;
  for (const auto& t : ts) {
    const auto p = response::parse(t.text);
    CHECK(p.format_ok);
    CHECK(p.label == t.answer);
    CHECK(p.pred_boxes.size() == t.box_ids.size());
    for (std::size_t i = 0; i < t.box_ids.size(); ++i) CHECK(p.pred_boxes[i] == cands[t.box_ids[i]]);
    texts.insert(t.text);
  }
  CHECK(texts.size() == ts.size());
  CHECK(enumerate_templates(cands, 0).size() == 2);
}

TEST_CASE("reference logits") {
  auto sc = scenarios::small(RewardScheme::ClsLoc);
  ReferencePrior prior;
  prior.answer_logits[0] = 0.5;
  prior.answer_logits[1] = -0.5;
  prior.box_logits = {0.1, 0.2, 0.3};
  ReferenceShape shape{{0.0, 1.0}, 2.0};
  const auto l = reference_logits(prior, shape, sc.samples[0], sc.candidate_boxes, sc.templates);
  REQUIRE(l.size() == sc.templates.size());
  CHECK(l[0] == doctest::Approx(0.5));              // normal, no boxes
  CHECK(l[1] == doctest::Approx(0.5 + 0.1 + 1.0 - 2.0));  // normal + box 0 (evidence 1)
  CHECK(l[8] == doctest::Approx(-0.5 + 0.1 + 1.0 + 2.0)); // abnormal + box 0
  CHECK(l[13] == doctest::Approx(-0.5 + 0.2 + 0.3));      // abnormal + boxes 1,2, no overlap
  prior.box_logits.pop_back();
  CHECK_THROWS_AS(reference_logits(prior, shape, sc.samples[0], sc.candidate_boxes, sc.templates),
                  Error);
}

TEST_CASE("scenario validation") {
  auto sc = scenarios::small(RewardScheme::Cls);
  CHECK_NOTHROW(sc.validate());
  auto bad = sc;
  bad.group_size = 1;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = sc;
  bad.reference_logits[0].pop_back();
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = sc;
  bad.samples[0].gt_boxes = {{0, 0, 40, 4}};
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("rollout") {
  auto sc = scenarios::small(RewardScheme::Cls);
  std::vector<double> peaked(sc.templates.size(), 0.0);
  peaked[5] = 20.0;
  rewards::Rng rng(1);
  const auto texts = rollout(sc, peaked, rng);
  REQUIRE(texts.size() == sc.group_size);
  for (const auto& t : texts) CHECK(t == sc.templates[5].text);

  rewards::Rng a(2), b(2);
  CHECK(rollout(sc, sc.reference_logits[0], a) == rollout(sc, sc.reference_logits[0], b));
  CHECK_THROWS_AS(rollout(sc, std::vector<double>{0, 1}, a), Error);
}

TEST_CASE("rollout frequencies follow the softmax") {
  gen::Gen g(81);
  const auto logits = g.vec(14, -1.5, 1.5);
  const auto probs = grpo::softmax(logits);
  rewards::Rng rng(82);
  const std::size_t n = 10000;
  const auto picks = sample_templates(logits, n, rng);
  std::vector<double> counts(logits.size(), 0.0);
  for (std::size_t k : picks) counts[k] += 1.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    const double mean = double(n) * probs[k];
    CHECK(std::abs(counts[k] - mean) <= 3.0 * std::sqrt(mean * (1.0 - probs[k])));
  }
}

TEST_CASE("categorical KL and its gradient") {
  gen::Gen g(83);
  for (int trial = 0; trial < 50; ++trial) {
    const auto p = g.vec(g.index(2, 10), -2, 2);
    auto q = g.vec(p.size(), -2, 2);
    CHECK(categorical_kl(p, q) >= 0.0);
    CHECK(categorical_kl(p, p) == doctest::Approx(0.0).epsilon(1e-15));
    const auto grad = categorical_kl_gradient(p, q);
    const double h = 1e-5;
    for (std::size_t k = 0; k < p.size(); ++k) {
      auto up = p, down = p;
      up[k] += h;
      down[k] -= h;
      const double fd = (categorical_kl(up, q) - categorical_kl(down, q)) / (2 * h);
      CHECK(grad[k] == doctest::Approx(fd).epsilon(1e-5).scale(1.0));
    }
  }
}

TEST_CASE("zero learning rate keeps the reference policy") {
  auto sc = scenarios::small(RewardScheme::ClsLoc);
  sc.learning_rate = 0.0;
  sc.epochs = 5;
  const auto tr = train(sc);
  for (std::size_t s = 0; s < sc.samples.size(); ++s) {
    CHECK(tr.final_policy[s] == grpo::softmax(sc.reference_logits[s]));
  }
  for (const auto& e : tr.epochs) CHECK(e.mean_kl == 0.0);
}

TEST_CASE("small scenario converges to the best template") {
  const auto sc = scenarios::small(RewardScheme::ClsLoc);
  const auto tr = train(sc);
  CHECK(tr.epochs.back().greedy_accuracy == 1.0);
  CHECK(tr.epochs.back().accuracy > 0.99);
  for (std::size_t s = 0; s < sc.samples.size(); ++s) {
    std::size_t best = 0;
    for (std::size_t t = 1; t < sc.templates.size(); ++t) {
      if (exact_reward(sc, s, t) > exact_reward(sc, s, best)) best = t;
    }
    CHECK(tr.modal_templates[s] == best);
    // r_focus pays most for a single box on a normal sample.
    const std::size_t want = sc.samples[s].label == Label::Normal ? 1 : sc.samples[s].gt_boxes.size();
    CHECK(sc.templates[tr.modal_templates[s]].box_ids.size() == want);
  }
  CHECK(tr.modal_count_optimal == 1.0);
}

TEST_CASE("large beta pins the policy to a uniform reference") {
  auto sc = scenarios::small(RewardScheme::ClsLoc);
  sc.cfg.beta = 100.0;
  sc.learning_rate = 0.01;
  sc.epochs = 200;
  const auto tr = train(sc);
  for (const auto& e : tr.epochs) CHECK(e.mean_kl <= 0.01);
  const auto uniform = std::vector<double>(sc.templates.size(), 0.0);
  for (const auto& p : tr.final_policy) {
    std::vector<double> logits;
    for (double v : p) logits.push_back(std::log(v));
    CHECK(categorical_kl(logits, uniform) <= 0.01);
  }
}

TEST_CASE("policies stay normalised") {
  const auto tr = train(scenarios::small(RewardScheme::ClsLocFormat));
  for (const auto& p : tr.final_policy) {
    double sum = 0.0;
    for (double v : p) {
      CHECK(std::isfinite(v));
      CHECK(v >= 0.0);
      sum += v;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
  for (const auto& e : tr.epochs) {
    CHECK(e.zero_variance_fraction >= 0.0);
    CHECK(e.zero_variance_fraction <= 1.0);
    CHECK(e.accuracy >= 0.0);
    CHECK(e.accuracy <= 1.0 + 1e-12);
  }
}

TEST_CASE("collapse witness") {
  auto sc = scenarios::small(RewardScheme::Cls);
  // Abnormal-answer templates with distinct, non-empty box sets.
  std::vector<std::size_t> chosen;
  for (std::size_t t = 0; t < sc.templates.size() && chosen.size() < sc.group_size; ++t) {
    if (sc.templates[t].answer == Label::Abnormal && !sc.templates[t].box_ids.empty()) chosen.push_back(t);
  }
  REQUIRE(chosen.size() == sc.group_size);
  const auto& logits = sc.reference_logits[0];
  rewards::Rng rng(0);
  const auto cls = group_update(sc, 0, logits, chosen, sc.cfg, rng);
  CHECK(std::all_of(cls.rewards.begin(), cls.rewards.end(), [](double r) { return r == 1.0; }));
  CHECK(std::all_of(cls.advantages.begin(), cls.advantages.end(), [](double a) { return a == 0.0; }));
  CHECK(std::all_of(cls.direction.begin(), cls.direction.end(), [](double d) { return d == 0.0; }));

  RewardConfig loc = sc.cfg;
  loc.scheme = RewardScheme::ClsLoc;
  const auto fine = group_update(sc, 0, logits, chosen, loc, rng);
  std::set<double> distinct(fine.rewards.begin(), fine.rewards.end());
  CHECK(distinct.size() > 1);
  CHECK(std::any_of(fine.direction.begin(), fine.direction.end(), [](double d) { return d != 0.0; }));
}

TEST_CASE("training is deterministic") {
  const auto sc = scenarios::small(RewardScheme::ClsRandom);
  const auto a = train(sc), b = train(sc);
  CHECK(a.final_policy == b.final_policy);
  REQUIRE(a.epochs.size() == b.epochs.size());
  for (std::size_t i = 0; i < a.epochs.size(); ++i) {
    CHECK(a.epochs[i].mean_reward == b.epochs[i].mean_reward);
    CHECK(a.epochs[i].mean_kl == b.epochs[i].mean_kl);
  }
}

TEST_CASE("compare_schemes on the demo scenario") {
  auto sc = demo();
  sc.epochs = 30;
  const RewardScheme twice[] = {RewardScheme::Cls, RewardScheme::Cls};
  const auto same = compare_schemes(sc, twice);
  CHECK(same[0].final_policy == same[1].final_policy);

  const RewardScheme ladder[] = {RewardScheme::Cls, RewardScheme::ClsCount, RewardScheme::ClsLoc,
                                 RewardScheme::ClsRandom};
  const auto runs = compare_schemes(sc, ladder);
  const double cls = mean_zero_variance(runs[0]);
  const double count = mean_zero_variance(runs[1]);
  const double fine = mean_zero_variance(runs[2]);
  const double noisy = mean_zero_variance(runs[3]);
  CHECK(cls >= count);
  CHECK(count >= fine);
  CHECK(noisy < cls);
  CHECK_THROWS_AS(compare_schemes(sc, std::span<const RewardScheme>{}), Error);
}

TEST_CASE("variance survey dominance") {
  const auto sc = demo();
  const RewardScheme ladder[] = {RewardScheme::Cls, RewardScheme::ClsCount, RewardScheme::ClsLoc};
  const auto reps = variance_survey(sc, ladder);
  CHECK(reps[0].groups_zero_variance >= reps[1].groups_zero_variance);
  CHECK(reps[1].groups_zero_variance >= reps[2].groups_zero_variance);
}
