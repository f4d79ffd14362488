#include <doctest.h>

#include <cmath>

#include "fillprob/errors.hpp"
#include "fillprob/probabilities.hpp"
#include "fillprob/simulator.hpp"

using namespace fillprob;

namespace {

// The synthetic Model III set used throughout the oracle comparisons:
// best-quote lambda 1, market rate 2, per-unit cancellation 0.5 at spreads 1
// and 2, one in-spread tick at rate 0.3 for spread 2, and cancellation rates
// for the level one tick behind each quote.
IntensityModelPtr synthetic_model() {
    ModelIII::Grid lambda{{{0, 1}, 1.0}, {{0, 2}, 1.0}, {{0, 3}, 1.0},
                          {{1, 2}, 0.3}, {{1, 3}, 0.3}, {{2, 3}, 0.3}};
    std::map<int, double> mu{{1, 2.0}, {2, 2.0}, {3, 2.0}};
    ModelIII::Grid theta{{{0, 1}, 0.5}, {{0, 2}, 0.5}, {{0, 3}, 0.5},
                         {{2, 1}, 0.4}, {{3, 2}, 0.35}};
    return std::make_shared<ModelIII>(lambda, mu, theta);
}

MarketQuery make_query(IntensityModelPtr model, int qa, int qb, int s0) {
    MarketQuery q;
    q.model = std::move(model);
    q.q_ask = qa;
    q.q_bid = qb;
    q.spread = s0;
    return q;
}

}  // namespace

TEST_CASE("mid price move probability is one half for symmetric states") {
    const auto model = synthetic_model();
    for (int s0 : {1, 2}) {
        for (int q = 1; q <= 4; ++q) {
            const auto r = mid_price_move_prob(make_query(model, q, q, s0), PriceDirection::Up);
            CHECK(r.value == doctest::Approx(0.5).epsilon(2e-4));
        }
    }
}

TEST_CASE("complement symmetry: up(qA,qB) + up(qB,qA) = 1") {
    const auto model = synthetic_model();
    for (int s0 : {1, 2}) {
        for (int qa = 1; qa <= 4; ++qa) {
            for (int qb = 1; qb <= 4; ++qb) {
                const double up =
                    mid_price_move_prob(make_query(model, qa, qb, s0), PriceDirection::Up).value;
                const double swapped =
                    mid_price_move_prob(make_query(model, qb, qa, s0), PriceDirection::Up).value;
                CHECK(up + swapped == doctest::Approx(1.0).epsilon(2e-4));
                // Down is the complement race of up.
                const double down =
                    mid_price_move_prob(make_query(model, qa, qb, s0), PriceDirection::Down)
                        .value;
                CHECK(up + down == doctest::Approx(1.0).epsilon(2e-4));
            }
        }
    }
}

TEST_CASE("mid price move probability is monotone in the queue sizes") {
    const auto model = synthetic_model();
    for (int s0 : {1, 2}) {
        for (int qb = 1; qb <= 5; ++qb) {
            double prev = 1.1;
            for (int qa = 1; qa <= 5; ++qa) {
                const double p =
                    mid_price_move_prob(make_query(model, qa, qb, s0), PriceDirection::Up).value;
                CHECK(p < prev);  // nonincreasing in q_ask, strictly here
                prev = p;
            }
        }
        for (int qa = 1; qa <= 5; ++qa) {
            double prev = -0.1;
            for (int qb = 1; qb <= 5; ++qb) {
                const double p =
                    mid_price_move_prob(make_query(model, qa, qb, s0), PriceDirection::Up).value;
                CHECK(p > prev);  // nondecreasing in q_bid
                prev = p;
            }
        }
    }
}

TEST_CASE("mid price move matches the frozen-rate simulator") {
    const auto model = synthetic_model();
    for (int s0 : {1, 2}) {
        for (const auto& [qa, qb] : std::vector<std::pair<int, int>>{{2, 1}, {1, 3}, {4, 2}}) {
            const double analytic =
                mid_price_move_prob(make_query(model, qa, qb, s0), PriceDirection::Up).value;
            FrozenConfig cfg;
            cfg.model = model;
            cfg.q_ask = qa;
            cfg.q_bid = qb;
            cfg.spread = s0;
            cfg.paths = 200000;
            cfg.seed = 91;
            const FrequencyEstimate est = frozen_mid_price_up(cfg);
            CHECK(std::abs(analytic - est.probability) <= 3.0 * est.std_error);
        }
    }
}

TEST_CASE("best quote fill probability") {
    const auto model = synthetic_model();
    SUBCASE("nonincreasing in the agent's own queue position") {
        for (int s0 : {1, 2}) {
            double prev = 1.1;
            for (int qb = 1; qb <= 5; ++qb) {
                MarketQuery q = make_query(model, 2, qb, s0);
                q.side = Side::Bid;
                const double p = best_quote_fill_prob(q).value;
                CHECK(p < prev);
                prev = p;
            }
        }
    }
    SUBCASE("nondecreasing in the opposite survival (queue size)") {
        // A slower opposite depletion can only help the agent; in the limit of
        // an inexhaustible opposite queue the fill becomes certain.
        double prev = -0.1;
        for (int q_opp : {1, 2, 4, 8, 16, 40}) {
            MarketQuery q = make_query(model, q_opp, 2, 1);
            q.side = Side::Bid;
            const double p = best_quote_fill_prob(q).value;
            CHECK(p > prev);
            prev = p;
        }
        CHECK(prev > 0.9);
    }
    SUBCASE("matches the frozen-rate simulator") {
        for (int s0 : {1, 2}) {
            for (const auto& [qa, qb] : std::vector<std::pair<int, int>>{{1, 1}, {3, 2}}) {
                MarketQuery q = make_query(model, qa, qb, s0);
                q.side = Side::Bid;
                const double analytic = best_quote_fill_prob(q).value;
                FrozenConfig cfg;
                cfg.model = model;
                cfg.q_ask = qa;
                cfg.q_bid = qb;
                cfg.spread = s0;
                cfg.side = Side::Bid;
                cfg.paths = 200000;
                cfg.seed = 92;
                const FrequencyEstimate est = frozen_best_quote_fill(cfg);
                CHECK(std::abs(analytic - est.probability) <= 3.0 * est.std_error);
            }
        }
    }
}

TEST_CASE("quote shift probability") {
    const auto model = synthetic_model();
    SUBCASE("one half for the symmetric race without in-spread arrivals") {
        const auto r = quote_shift_prob(make_query(model, 3, 3, 1));
        CHECK(r.value == doctest::Approx(0.5).epsilon(2e-4));
    }
    SUBCASE("below one half when in-spread arrivals can preempt") {
        const auto r = quote_shift_prob(make_query(model, 3, 3, 2));
        CHECK(r.value < 0.5 - 1e-3);
    }
    SUBCASE("matches the frozen-rate simulator") {
        for (int s0 : {1, 2}) {
            MarketQuery q = make_query(model, 2, 1, s0);
            q.side = Side::Bid;
            const double analytic = quote_shift_prob(q).value;
            FrozenConfig cfg;
            cfg.model = model;
            cfg.q_ask = 2;
            cfg.q_bid = 1;
            cfg.spread = s0;
            cfg.side = Side::Bid;
            cfg.paths = 200000;
            cfg.seed = 93;
            const FrequencyEstimate est = frozen_quote_shift(cfg);
            CHECK(std::abs(analytic - est.probability) <= 3.0 * est.std_error);
        }
    }
}

TEST_CASE("W distribution") {
    const auto model = synthetic_model();
    SUBCASE("single initial order: all mass at 1") {
        MarketQuery q = make_query(model, 2, 2, 1);
        q.depth = Depth::OneDeeper;
        q.q_deep = 1;
        const QueueDistribution w = w_distribution(q);
        CHECK(w.min_value == 1);
        REQUIRE(w.masses.size() == 1);
        CHECK(w.masses[0] == doctest::Approx(1.0));
    }
    SUBCASE("no deeper-level cancellations: all mass at q_deep") {
        ModelIII::Grid lambda{{{0, 1}, 1.0}};
        std::map<int, double> mu{{1, 2.0}};
        ModelIII::Grid theta{{{0, 1}, 0.5}};  // nothing at distance 2
        auto frozen = std::make_shared<ModelIII>(lambda, mu, theta);
        MarketQuery q = make_query(frozen, 2, 2, 1);
        q.depth = Depth::OneDeeper;
        q.q_deep = 4;
        const QueueDistribution w = w_distribution(q);
        CHECK(w.mass_at(4) == doctest::Approx(1.0));
        CHECK(w.total() == doctest::Approx(1.0));
    }
    SUBCASE("masses sum to one across queue sizes") {
        for (int q_deep = 2; q_deep <= 5; ++q_deep) {
            MarketQuery q = make_query(model, 3, 2, 1);
            q.depth = Depth::OneDeeper;
            q.q_deep = q_deep;
            const QueueDistribution w = w_distribution(q);
            CHECK(w.total() == doctest::Approx(1.0).epsilon(1e-9));
            for (double m : w.masses) CHECK(m >= 0.0);
        }
    }
    SUBCASE("step-count convention matches the simulated W; the full range does not") {
        MarketQuery q = make_query(model, 2, 2, 1);
        q.side = Side::Bid;
        q.depth = Depth::OneDeeper;
        q.q_deep = 4;

        FrozenConfig cfg;
        cfg.model = model;
        cfg.q_ask = 2;
        cfg.q_bid = 2;
        cfg.spread = 1;
        cfg.side = Side::Bid;
        cfg.q_deep = 4;
        cfg.paths = 400000;
        cfg.seed = 94;
        const auto counts = frozen_w_histogram(cfg);

        ProbabilityOptions step;
        step.hit_convention = HitIndexConvention::StepCount;
        const QueueDistribution w_step = w_distribution(q, step);
        ProbabilityOptions paper;
        paper.hit_convention = HitIndexConvention::Paper;
        const QueueDistribution w_paper = w_distribution(q, paper);

        bool paper_rejected = false;
        for (int m = 1; m <= 4; ++m) {
            const auto est = estimate_frequency(counts[static_cast<std::size_t>(m - 1)],
                                                cfg.paths);
            CHECK(std::abs(w_step.mass_at(m) - est.probability) <= 3.0 * est.std_error);
            if (std::abs(w_paper.mass_at(m) - est.probability) > 3.0 * est.std_error) {
                paper_rejected = true;
            }
        }
        CHECK(paper_rejected);
    }
}

TEST_CASE("stationary queue distribution") {
    SUBCASE("constant rates give a geometric distribution") {
        const RateLadder ladder{[](std::int64_t) { return 1.0; },
                                [](std::int64_t) { return 2.0; }};
        const QueueDistribution pi = stationary_queue_distribution(ladder, 40);
        CHECK(pi.mass_at(0) == doctest::Approx(0.5).epsilon(1e-9));
        CHECK(pi.mass_at(1) == doctest::Approx(0.25).epsilon(1e-9));
        CHECK(pi.mass_at(2) == doctest::Approx(0.125).epsilon(1e-9));
    }
    SUBCASE("zero arrivals put all mass at the empty queue") {
        const RateLadder ladder{[](std::int64_t) { return 0.0; },
                                [](std::int64_t) { return 1.0; }};
        const QueueDistribution pi = stationary_queue_distribution(ladder, 10);
        CHECK(pi.mass_at(0) == doctest::Approx(1.0));
    }
    SUBCASE("linear death growth decays faster than geometric and normalizes") {
        const auto model = synthetic_model();
        const RateLadder ladder = best_quote_ladder(model, 1);
        const QueueDistribution pi = stationary_queue_distribution(ladder, 30);
        CHECK(pi.total() == doctest::Approx(1.0).epsilon(1e-9));
        for (int n = 1; n < 30; ++n) {
            if (pi.mass_at(n) > 0.0 && pi.mass_at(n - 1) > 0.0) {
                CHECK(pi.mass_at(n) / pi.mass_at(n - 1) <
                      doctest::Approx(0.5).epsilon(1e-9));  // rho_0 = 1/2.5
            }
        }
    }
    SUBCASE("diverging series is rejected") {
        const RateLadder ladder{[](std::int64_t) { return 2.0; },
                                [](std::int64_t) { return 1.0; }};
        CHECK_THROWS_AS(stationary_queue_distribution(ladder, 50), DivergentSeries);
    }
}

TEST_CASE("deeper fill probability") {
    const auto model = synthetic_model();

    SUBCASE("degenerate mixtures reduce to shift times one conditional fill") {
        MarketQuery q = make_query(model, 2, 2, 1);
        q.side = Side::Bid;
        q.depth = Depth::OneDeeper;
        q.q_deep = 1;
        QueueDistribution opp_point{1, {1.0}};  // opposite queue surely 1
        QueueDistribution w_point{1, {1.0}};
        const double total = deeper_fill_prob(q, opp_point, w_point).value;
        const double shift = quote_shift_prob(q).value;

        // Conditional fill at spread 2 with W = 1 against opposite queue 1.
        MarketQuery cond = make_query(model, 1, 1, 2);
        cond.side = Side::Bid;
        const double fill = best_quote_fill_prob(cond).value;
        CHECK(total == doctest::Approx(shift * fill).epsilon(1e-6));
    }
    SUBCASE("bounded by the quote shift probability") {
        for (int s0 : {1, 2}) {
            for (int q_deep : {1, 2, 4}) {
                MarketQuery q = make_query(model, 2, 3, s0);
                q.side = Side::Bid;
                q.depth = Depth::OneDeeper;
                q.q_deep = q_deep;
                const QueueDistribution opp = stationary_best_quote_distribution(model, s0);
                const QueueDistribution w = w_distribution(q);
                const double deep = deeper_fill_prob(q, opp, w).value;
                CHECK(deep <= quote_shift_prob(q).value);
                CHECK(deep >= 0.0);
            }
        }
    }
    SUBCASE("matches the two-stage frozen simulator") {
        for (int s0 : {1, 2}) {
            MarketQuery q = make_query(model, 1, 1, s0);
            q.side = Side::Bid;
            q.depth = Depth::OneDeeper;
            q.q_deep = 2;
            const QueueDistribution opp = stationary_best_quote_distribution(model, s0);
            const QueueDistribution w = w_distribution(q);
            const double analytic = deeper_fill_prob(q, opp, w).value;

            FrozenConfig cfg;
            cfg.model = model;
            cfg.q_ask = 1;
            cfg.q_bid = 1;
            cfg.spread = s0;
            cfg.side = Side::Bid;
            cfg.q_deep = 2;
            cfg.paths = 400000;
            cfg.seed = 95;
            const FrequencyEstimate est = frozen_deeper_fill(cfg, opp);
            CHECK(std::abs(analytic - est.probability) <= 3.0 * est.std_error);
        }
    }
    SUBCASE("truncation flags zero out deep mixture cells") {
        MarketQuery q = make_query(model, 2, 2, 1);
        q.side = Side::Bid;
        q.depth = Depth::OneDeeper;
        q.q_deep = 4;
        const QueueDistribution opp = stationary_best_quote_distribution(model, 1);
        const QueueDistribution w = w_distribution(q);
        ProbabilityOptions trunc;
        trunc.truncate_conditional_fill_m2 = true;
        trunc.truncate_opposite_n2 = true;
        const double truncated = deeper_fill_prob(q, opp, w, trunc).value;
        const double full = deeper_fill_prob(q, opp, w).value;
        CHECK(truncated < full);
        CHECK(truncated > 0.0);
    }
}

TEST_CASE("query validation") {
    const auto model = synthetic_model();
    MarketQuery q = make_query(model, 1, 1, 1);
    q.q_ask = 0;
    CHECK_THROWS_AS(mid_price_move_prob(q, PriceDirection::Up), InputError);
    q = make_query(model, 1, 1, 200);
    CHECK_THROWS_AS(mid_price_move_prob(q, PriceDirection::Up), GridTooSmall);
    q = make_query(nullptr, 1, 1, 1);
    CHECK_THROWS_AS(best_quote_fill_prob(q), InputError);
    q = make_query(model, 1, 1, 1);
    CHECK_THROWS_AS(w_distribution(q), InputError);  // depth must be OneDeeper
}
