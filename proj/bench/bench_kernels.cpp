// Serial reference vs OpenMP kernels on a batch shaped like the reference
// cohort (9 inputs, 64x64 trunk).

#include <benchmark/benchmark.h>

#include <numeric>
#include <random>

#include "cfpt/kernels.hpp"

namespace {

using namespace cfpt;

std::vector<LabeledScan> make_data(std::size_t n) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<LabeledScan> data(n);
    for (std::size_t i = 0; i < n; ++i) {
        data[i].label = {"s" + std::to_string(i), "p" + std::to_string(i), 2.0 + normal(rng),
                         static_cast<int>(i % 2), static_cast<int>(i % 4 == 0), i % 2 == 0};
        for (int j = 0; j < 9; ++j) data[i].features.push_back(normal(rng));
    }
    return data;
}

const Network& net() {
    static const Network n = init_params(ModelConfig{9, {64, 64}, 3, true}, 2.0);
    return n;
}

template <BatchGradient (*Fn)(const Network&, std::span<const LabeledScan>, std::span<const std::size_t>,
                              const LossConfig&)>
void BM_Backward(benchmark::State& state) {
    const auto data = make_data(static_cast<std::size_t>(state.range(0)));
    std::vector<std::size_t> rows(data.size());
    std::iota(rows.begin(), rows.end(), 0);
    const LossConfig cfg;
    for (auto _ : state) benchmark::DoNotOptimize(Fn(net(), data, rows, cfg));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <std::vector<Prediction> (*Fn)(const Network&, std::span<const LabeledScan>)>
void BM_Predict(benchmark::State& state) {
    const auto data = make_data(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(Fn(net(), data));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_Backward<serial::backward>)->Name("backward/serial")->Arg(32)->Arg(1024)->Arg(4096);
BENCHMARK(BM_Backward<parallel::backward>)->Name("backward/parallel")->Arg(32)->Arg(1024)->Arg(4096);
BENCHMARK(BM_Predict<serial::predict>)->Name("predict/serial")->Arg(1024)->Arg(4096);
BENCHMARK(BM_Predict<parallel::predict>)->Name("predict/parallel")->Arg(1024)->Arg(4096);

BENCHMARK_MAIN();
