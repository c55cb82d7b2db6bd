#include <benchmark/benchmark.h>

#include "rnli/classifier.hpp"
#include "rnli/dataset.hpp"
#include "rnli/logic.hpp"
#include "rnli/training.hpp"

using namespace rnli;

namespace {

std::vector<Example> pairs_up_to(int max_bin, std::size_t per_bin) {
  GenConfig g;
  g.seed = 11;
  g.max_bin = max_bin;
  g.per_bin_pairs = per_bin;
  return generate_pairs(g);
}

void BM_RelationOfPair(benchmark::State& state) {
  const auto examples = pairs_up_to(static_cast<int>(state.range(0)), 64);
  std::size_t i = 0;
  for (auto _ : state) {
    const Example& e = examples[i++ % examples.size()];
    benchmark::DoNotOptimize(relation_of_pair(e.premise, e.hypothesis));
  }
}
BENCHMARK(BM_RelationOfPair)->Arg(4)->Arg(12);

void BM_GenerateBin(benchmark::State& state) {
  GenConfig g;
  g.per_bin_pairs = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    g.seed++;
    benchmark::DoNotOptimize(generate_pairs(g));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(g.per_bin_pairs) * kNumBins);
}
BENCHMARK(BM_GenerateBin)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_Predict(benchmark::State& state) {
  const auto kind = kAllEncoderKinds[static_cast<std::size_t>(state.range(0))];
  const Model m(ModelConfig::defaults(kind));
  const auto batch = prepare_all(pairs_up_to(8, 8));
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(m.predict(batch[i++ % batch.size()]));
  state.SetLabel(std::string(encoder_name(kind)));
}
BENCHMARK(BM_Predict)->DenseRange(0, 4);

// One minibatch of 32: forward, backward and the AdaDelta update.
void BM_TrainStep(benchmark::State& state) {
  const auto kind = kAllEncoderKinds[static_cast<std::size_t>(state.range(0))];
  Model m(ModelConfig::defaults(kind));
  const auto all = prepare_all(pairs_up_to(4, 16));
  const std::vector<PreparedExample> batch(all.begin(), all.begin() + 32);
  Gradients grads(m.params());
  for (auto _ : state) {
    grads.zero();
    benchmark::DoNotOptimize(m.batch_objective(batch, 1e-4, &grads));
    adadelta_step(m.params(), grads);
  }
  state.SetLabel(std::string(encoder_name(kind)));
  state.SetItemsProcessed(state.iterations() * 32);
}
BENCHMARK(BM_TrainStep)->DenseRange(0, 4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
