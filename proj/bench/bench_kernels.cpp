// Parallel kernels against their serial references.

#include <benchmark/benchmark.h>

#include "buyflow/common/rng.hpp"
#include "buyflow/predictor.hpp"
#include "buyflow/social.hpp"
#include "buyflow/synth.hpp"

using namespace buyflow;

namespace {

const synth::Ingested& data() {
  static const synth::Ingested in = [] {
    auto cfg = synth::preset("predictor");
    cfg.population = 3000;
    return synth::ingest(synth::generate(cfg));
  }();
  return in;
}

predict::DiscreteMatrix matrix(std::size_t rows, std::size_t cols, int card) {
  Rng rng(1);
  predict::DiscreteMatrix x;
  x.rows = rows;
  x.cols = cols;
  x.cardinality.assign(cols, card);
  x.cells.resize(rows * cols);
  for (auto& c : x.cells) c = static_cast<int>(rng.below(static_cast<std::uint64_t>(card)));
  return x;
}

template <bool Parallel>
void BM_BuildInstances(benchmark::State& state) {
  const auto& in = data();
  const predict::FeatureExtractor fx(in.dataset, &in.graph);
  for (auto _ : state) {
    auto v = Parallel ? predict::build_instances(fx, in.dataset, {}) : predict::build_instances_serial(fx, in.dataset, {});
    benchmark::DoNotOptimize(v.data());
  }
}

template <bool Parallel>
void BM_FitNaiveBayes(benchmark::State& state) {
  const auto x = matrix(50000, predict::kFeatureCount, 6);
  Rng rng(2);
  std::vector<int> labels(x.rows);
  for (auto& l : labels) l = static_cast<int>(rng.below(5));
  for (auto _ : state) {
    auto m = Parallel ? predict::fit_naive_bayes(x, labels, 5, 0.5) : predict::fit_naive_bayes_serial(x, labels, 5, 0.5);
    benchmark::DoNotOptimize(m.priors.data());
  }
}

template <bool Parallel>
void BM_PairSimilarities(benchmark::State& state) {
  Rng rng(3);
  std::vector<social::CategoryVector> vectors(5000);
  for (auto& v : vectors) {
    for (std::int32_t k = 0; k < 72; ++k) {
      if (rng.bernoulli(0.15)) v.entries.emplace_back(k, 1.0 + static_cast<double>(rng.below(9)));
    }
    if (v.empty()) v.entries.emplace_back(0, 1.0);
  }
  std::vector<social::UserPair> pairs(200000);
  for (auto& p : pairs) {
    p = {static_cast<Dataset::UserIndex>(rng.below(vectors.size())), static_cast<Dataset::UserIndex>(rng.below(vectors.size()))};
  }
  for (auto _ : state) {
    auto s = Parallel ? social::pair_similarities(vectors, pairs) : social::pair_similarities_serial(vectors, pairs);
    benchmark::DoNotOptimize(s.data());
  }
}

}  // namespace

BENCHMARK(BM_BuildInstances<false>)->Name("build_instances/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BuildInstances<true>)->Name("build_instances/parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FitNaiveBayes<false>)->Name("fit_naive_bayes/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FitNaiveBayes<true>)->Name("fit_naive_bayes/parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PairSimilarities<false>)->Name("pair_similarities/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PairSimilarities<true>)->Name("pair_similarities/parallel")->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
