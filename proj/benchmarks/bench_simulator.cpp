#include <benchmark/benchmark.h>

#include "fillprob/simulator.hpp"

using namespace fillprob;

namespace {

IntensityModelPtr bench_model() {
    ModelIII::Grid lambda{{{0, 1}, 1.0}, {{0, 2}, 1.0}, {{1, 2}, 0.3}};
    std::map<int, double> mu{{1, 2.0}, {2, 2.0}};
    ModelIII::Grid theta{{{0, 1}, 0.5}, {{0, 2}, 0.5}, {{2, 1}, 0.5}};
    return std::make_shared<ModelIII>(lambda, mu, theta);
}

IntensityModelPtr dense_model() {
    ModelIII::Grid lambda;
    std::map<int, double> mu;
    ModelIII::Grid theta;
    for (int s = 1; s <= 6; ++s) {
        mu[s] = s <= 2 ? 1.0 : 0.5;
        for (int d = 1; d <= 4; ++d) {
            lambda[{d, s}] = d < s ? 5.0 : 3.0 / d;
            if (d >= s) theta[{d, s}] = 0.25;
        }
    }
    return std::make_shared<ModelIII>(lambda, mu, theta);
}

void BM_FrozenMidRace(benchmark::State& state) {
    FrozenConfig cfg;
    cfg.model = bench_model();
    cfg.q_ask = 5;
    cfg.q_bid = 5;
    cfg.spread = 2;
    cfg.paths = static_cast<std::uint64_t>(state.range(0));
    cfg.seed = 1;
    cfg.threads = 1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(frozen_mid_price_up(cfg).successes);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FrozenMidRace)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_FullBookEvents(benchmark::State& state) {
    LogRunConfig cfg;
    cfg.model = dense_model();
    cfg.initial = make_symmetric_book(60, 1, 3, 3, 5, 4);
    cfg.max_events = static_cast<std::uint64_t>(state.range(0));
    cfg.seed = 2;
    cfg.snapshot_stride = 1 << 30;  // no snapshots, measure the event loop
    for (auto _ : state) {
        benchmark::DoNotOptimize(run_event_log(cfg).events.size());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FullBookEvents)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace
