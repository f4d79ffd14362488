#include <benchmark/benchmark.h>

#include <complex>

#include "fillprob/inversion.hpp"
#include "fillprob/probabilities.hpp"
#include "fillprob/transforms.hpp"

using namespace fillprob;

namespace {

IntensityModelPtr bench_model() {
    ModelIII::Grid lambda{{{0, 1}, 1.0}, {{0, 2}, 1.0}, {{1, 2}, 0.3}};
    std::map<int, double> mu{{1, 2.0}, {2, 2.0}};
    ModelIII::Grid theta{{{0, 1}, 0.5}, {{0, 2}, 0.5}, {{2, 1}, 0.5}};
    return std::make_shared<ModelIII>(lambda, mu, theta);
}

void BM_LentzBusyPeriod(benchmark::State& state) {
    const RateLadder ladder{[](std::int64_t) { return 1.0; },
                            [](std::int64_t) { return 2.0; }};
    const Complex s(1.0, 2.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(birth_death_fpt_transform(ladder, 1, s));
    }
}
BENCHMARK(BM_LentzBusyPeriod);

void BM_BirthDeathEvalImagAxis(benchmark::State& state) {
    const auto model = bench_model();
    const RateLadder ladder = best_quote_ladder(model, 1);
    auto node = birth_death_fpt(ladder, static_cast<int>(state.range(0)));
    std::int64_t k = 1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(node->eval(Complex(0.0, 0.05 * static_cast<double>(k++ % 512))));
    }
}
BENCHMARK(BM_BirthDeathEvalImagAxis)->Arg(1)->Arg(5);

void BM_MidPriceMoveProb(benchmark::State& state) {
    const auto model = bench_model();
    MarketQuery q;
    q.model = model;
    q.q_ask = 3;
    q.q_bid = 2;
    q.spread = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(mid_price_move_prob(q, PriceDirection::Up).value);
    }
}
BENCHMARK(BM_MidPriceMoveProb)->Arg(1)->Arg(2);

void BM_DeeperFillProb(benchmark::State& state) {
    const auto model = bench_model();
    MarketQuery q;
    q.model = model;
    q.q_ask = 2;
    q.q_bid = 2;
    q.spread = 1;
    q.depth = Depth::OneDeeper;
    q.q_deep = 2;
    const QueueDistribution opp = stationary_best_quote_distribution(model, 1);
    for (auto _ : state) {
        const QueueDistribution w = w_distribution(q);
        benchmark::DoNotOptimize(deeper_fill_prob(q, opp, w).value);
    }
}
BENCHMARK(BM_DeeperFillProb);

}  // namespace
