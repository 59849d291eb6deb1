#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "locreward/assignment.hpp"
#include "locreward/geometry.hpp"
#include "locreward/mask2box.hpp"
#include "locreward/response_parser.hpp"
#include "locreward/rewards.hpp"

using namespace locreward;

namespace {

std::vector<BBox> random_boxes(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> pos(0.0, 200.0), size(1.0, 60.0);
  std::vector<BBox> out;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = pos(rng), y = pos(rng);
    out.push_back({x, y, x + size(rng), y + size(rng)});
  }
  return out;
}

const char* kResponse =
    "<think>Scratch near the thread root [12, 20, 40, 52] and a dent [60,8,90,30].</think>\n"
    "<rethink>Both regions are consistent with damage.</rethink>\n"
    "<answer>abnormal</answer>";

void BM_Giou(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const auto boxes = random_boxes(1024, rng);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(geometry::giou(boxes[i % 1024], boxes[(i * 7 + 3) % 1024]));
    ++i;
  }
}
BENCHMARK(BM_Giou);

void BM_Hungarian(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(2);
  const auto preds = random_boxes(k, rng), gts = random_boxes(k, rng);
  const auto cost = assignment::cost_matrix(preds, gts);
  for (auto _ : state) benchmark::DoNotOptimize(assignment::solve(cost));
}
BENCHMARK(BM_Hungarian)->Arg(2)->Arg(5)->Arg(10)->Arg(50);

void BM_Parse(benchmark::State& state) {
  const std::string text = kResponse;
  for (auto _ : state) benchmark::DoNotOptimize(response::parse(text));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_Parse);

void BM_Assemble(benchmark::State& state) {
  const auto parsed = response::parse(kResponse);
  const Sample sample{"bolt_017", Label::Abnormal, {{12, 20, 40, 52}}, 64.0, 64.0};
  RewardConfig cfg;
  auto rng = rewards::group_rng(0, sample.id);
  for (auto _ : state) benchmark::DoNotOptimize(rewards::assemble(parsed, sample, cfg, rng));
}
BENCHMARK(BM_Assemble);

void BM_Mask2Box(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(3);
  std::bernoulli_distribution on(0.02);
  mask2box::BinaryMask mask(side, side);
  for (std::size_t y = 0; y < side; ++y)
    for (std::size_t x = 0; x < side; ++x) mask.set(x, y, on(rng));
  for (auto _ : state) benchmark::DoNotOptimize(mask2box::to_boxes(mask, {}));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * side * side));
}
BENCHMARK(BM_Mask2Box)->Arg(64)->Arg(256)->Arg(1024);

}  // namespace

BENCHMARK_MAIN();
