#pragma once

#include "locreward/simulator.hpp"

namespace scenarios {

using namespace locreward;

// Two samples on a 32x32 grid, three candidate boxes, at most two boxes per
// response: 14 templates. Sample "hit" is abnormal with candidate 0 as its
// ground truth, sample "clean" is normal.
inline sim::Scenario small(RewardScheme scheme) {
  sim::Scenario sc;
  sc.grid_width = sc.grid_height = 32;
  sc.candidate_boxes = {{2, 2, 10, 10}, {16, 4, 28, 12}, {6, 18, 20, 30}};
  sc.max_boxes = 2;
  sc.templates = sim::enumerate_templates(sc.candidate_boxes, sc.max_boxes);
  sc.samples = {{"hit", Label::Abnormal, {{2, 2, 10, 10}}, {}, {}},
                {"clean", Label::Normal, {}, {}, {}}};
  for (std::size_t s = 0; s < sc.samples.size(); ++s) {
    sc.reference_logits.emplace_back(sc.templates.size(), 0.0);
  }
  sc.group_size = 6;
  sc.epochs = 300;
  sc.learning_rate = 1.0;
  sc.cfg.scheme = scheme;
  sc.cfg.seed = 3;
  return sc;
}

}  // namespace scenarios
