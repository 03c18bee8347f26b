// Serial reference kernels against their OpenMP versions.
//
//   advdist_bench --benchmark_filter=Attack
//
// Parallel cases take the worker count as the benchmark argument.

#include "advdist/classifier.hpp"
#include "advdist/dense_net.hpp"
#include "advdist/kernels.hpp"
#include "advdist/rng.hpp"
#include "advdist/synthetic.hpp"

#include <benchmark/benchmark.h>

#include <thread>

using namespace advdist;

namespace {

struct Fixture {
    Dataset pool;
    Dataset attack_pool;  ///< first 500 rows; attacks are far costlier per row
    FeedForwardClassifier classifier;
    DenseNet pseudo;
    AttackConfig attack;

    Fixture() : pool(gaussian_mixture(4000, 3)), classifier(make_classifier(pool)), pseudo(make_pseudo()) {
        std::vector<std::size_t> head(500);
        for (std::size_t i = 0; i < head.size(); ++i) head[i] = i;
        attack_pool = pool.select(head);
        attack.epsilon = 0.02;
        attack.max_iters = 200;
    }

    static FeedForwardClassifier make_classifier(const Dataset& d) { return train_mlp(d, {16, 16}, 50, 0.5, 1); }
    static DenseNet make_pseudo() {
        Rng rng(7);
        const std::vector<std::size_t> hidden{64, 64, 64, 64};
        return DenseNet::create(2, hidden, rng);
    }
};

const Fixture& fixture() {
    static const Fixture f;
    return f;
}

void worker_args(benchmark::internal::Benchmark* b) {
    const int hw = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    for (int w = 1; w <= hw; w *= 2) b->Arg(w);
    if ((hw & (hw - 1)) != 0) b->Arg(hw);
}

void BM_PredictSerial(benchmark::State& state) {
    const auto& f = fixture();
    for (auto _ : state) benchmark::DoNotOptimize(kernels::predict_batch_serial(f.classifier, f.pool));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.pool.rows()));
}

void BM_PredictParallel(benchmark::State& state) {
    const auto& f = fixture();
    const int w = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(kernels::predict_batch(f.classifier, f.pool, w));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.pool.rows()));
}

void BM_ForwardSerial(benchmark::State& state) {
    const auto& f = fixture();
    for (auto _ : state) benchmark::DoNotOptimize(kernels::forward_batch_serial(f.pseudo, f.pool));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.pool.rows()));
}

void BM_ForwardParallel(benchmark::State& state) {
    const auto& f = fixture();
    const int w = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(kernels::forward_batch(f.pseudo, f.pool, w));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.pool.rows()));
}

void BM_AttackSerial(benchmark::State& state) {
    const auto& f = fixture();
    for (auto _ : state)
        benchmark::DoNotOptimize(kernels::attack_batch_serial(f.classifier, f.pseudo, f.attack_pool, f.attack));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.attack_pool.rows()));
}

void BM_AttackParallel(benchmark::State& state) {
    const auto& f = fixture();
    const int w = static_cast<int>(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(kernels::attack_batch(f.classifier, f.pseudo, f.attack_pool, f.attack, w));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.attack_pool.rows()));
}

}  // namespace

BENCHMARK(BM_PredictSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PredictParallel)->Apply(worker_args)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_ForwardSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ForwardParallel)->Apply(worker_args)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_AttackSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AttackParallel)->Apply(worker_args)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
