#include <doctest.h>

#include <cmath>

#include "fillprob/errors.hpp"
#include "fillprob/intensity.hpp"
#include "fillprob/json_io.hpp"

using namespace fillprob;

namespace {

BookState two_sided_book(int spread) {
    // p_B = 10, p_A = 10 + spread on a 30-tick grid, two deep levels per side.
    std::vector<std::int64_t> q(30, 0);
    q[9] = -1;
    q[8] = -4;
    q[9 + spread] = +3;
    q[10 + spread] = +2;
    return BookState::from_queues(q);
}

std::shared_ptr<ModelIII> synthetic_model_iii() {
    ModelIII::Grid lambda{{{0, 1}, 1.0}, {{0, 2}, 1.0}, {{1, 2}, 0.3}, {{2, 1}, 0.7}};
    std::map<int, double> mu{{1, 2.0}, {2, 2.0}};
    ModelIII::Grid theta{{{0, 1}, 0.5}, {{0, 2}, 0.5}, {{2, 1}, 0.25}};
    return std::make_shared<ModelIII>(lambda, mu, theta);
}

}  // namespace

TEST_CASE("Model I rates") {
    const ModelI model(1.0, 2.0, 0.9, [](int) { return 0.1; });
    const BookState book = two_sided_book(1);

    // Limit-sell rate two ticks from the opposite best quote: beta / 2^alpha.
    CHECK(rate_of(model, book, EventKind::LimitArrival, Side::Ask, 12) ==
          doctest::Approx(1.0).epsilon(1e-12));
    // Market order at the best quote.
    CHECK(rate_of(model, book, EventKind::MarketOrder, Side::Ask, 11) ==
          doctest::Approx(0.9).epsilon(1e-12));
    // Cancellation rate is linear in the resting queue size.
    CHECK(rate_of(model, book, EventKind::Cancellation, Side::Bid, 9) ==
          doctest::Approx(0.4).epsilon(1e-12));

    // Best-quote ladder evaluates lambda at the distance-0 alias, i.e. at 1.
    const RateLadder ladder = rate_ladder(model, book, Side::Ask);
    CHECK(ladder.birth(0) == doctest::Approx(2.0));
    CHECK(ladder.birth(7) == doctest::Approx(2.0));
    CHECK(ladder.death(3) == doctest::Approx(0.9 + 0.3));
}

TEST_CASE("Model II log-quadratic evaluator") {
    LogQuadCoeffs lambda{std::log(2.0), 0, 0, 0, 0, 0};
    LogQuadCoeffs mu{0.0, 1.0, 0, 0, 0, 0};       // mu = S
    LogQuadCoeffs phi{0.0, 0, 0, 1.0, 0, 0};      // phi = 1 + q
    const ModelII model(lambda, mu, phi);
    const LevelContext ctx{0, 3};
    CHECK(model.limit_rate(ctx, 5) == doctest::Approx(2.0));
    CHECK(model.market_rate(ctx, 1) == doctest::Approx(3.0));
    CHECK(model.cancel_rate(ctx, 4) == doctest::Approx(5.0));
    CHECK(model.cancel_rate(ctx, 0) == doctest::Approx(0.0));
}

TEST_CASE("Model III tabulated rates and aliases") {
    const auto model = synthetic_model_iii();
    const BookState book = two_sided_book(1);

    // A tabulated empirical entry is served back exactly.
    ModelIII::Grid week1{{{1, 1}, 13.27}};
    const ModelIII tabulated(week1, {}, {});
    CHECK(tabulated.lambda(1, 1) == doctest::Approx(13.27));

    // The best-quote column aliases delta == 0 and delta == spread.
    CHECK(model->lambda(1, 1) == doctest::Approx(1.0));   // (0,1) via alias
    CHECK(model->lambda(0, 1) == doctest::Approx(1.0));
    CHECK(model->lambda(2, 2) == doctest::Approx(1.0));   // (0,2) via alias
    CHECK(model->theta(1, 1) == doctest::Approx(0.5));
    // Missing cells evaluate to zero rate.
    CHECK(model->lambda(5, 1) == doctest::Approx(0.0));

    // Cancellation with theta = 0.25 and |Q| = 4 at distance 2.
    CHECK(rate_of(*model, book, EventKind::Cancellation, Side::Bid, 9) ==
          doctest::Approx(0.25 * 4).epsilon(1e-12));

    // Best-quote ladder per the queue-size-linear death rule.
    const RateLadder ladder = rate_ladder(*model, book, Side::Bid);
    for (int k = 1; k <= 4; ++k) {
        CHECK(ladder.death(k) == doctest::Approx(2.0 + 0.5 * k));
        CHECK(ladder.birth(k) == doctest::Approx(1.0));
    }

    // In-spread arrival rate sums lambda(m, S) over m = 1..S-1.
    CHECK(in_spread_rate(*model, 1) == doctest::Approx(0.0));
    CHECK(in_spread_rate(*model, 2) == doctest::Approx(0.3));
}

TEST_CASE("rate_of side symmetry for Model III") {
    const auto model = synthetic_model_iii();
    const BookState book = two_sided_book(2);
    // Equal distance and spread on mirrored sides give equal rates.
    const double bid_limit = rate_of(*model, book, EventKind::LimitArrival, Side::Bid, 11);
    const double ask_limit = rate_of(*model, book, EventKind::LimitArrival, Side::Ask, 11);
    CHECK(bid_limit == doctest::Approx(ask_limit));
    const double bid_mkt = rate_of(*model, book, EventKind::MarketOrder, Side::Bid, 10);
    const double ask_mkt = rate_of(*model, book, EventKind::MarketOrder, Side::Ask, 12);
    CHECK(bid_mkt == doctest::Approx(ask_mkt));
}

TEST_CASE("rate_of rejects impossible combinations") {
    const auto model = synthetic_model_iii();
    const BookState book = two_sided_book(1);
    CHECK_THROWS_AS(rate_of(*model, book, EventKind::MarketOrder, Side::Ask, 12),
                    UnsupportedEvent);
    CHECK_THROWS_AS(rate_of(*model, book, EventKind::LimitArrival, Side::Bid, 11),
                    UnsupportedEvent);
    CHECK_THROWS_AS(rate_of(*model, book, EventKind::Cancellation, Side::Ask, 9),
                    UnsupportedEvent);
    CHECK_THROWS_AS(rate_of(*model, book, EventKind::LimitArrival, Side::Bid, 0),
                    UnsupportedEvent);
}

TEST_CASE("model JSON round trips") {
    SUBCASE("Model III") {
        const auto model = synthetic_model_iii();
        const std::string text = model_to_json(*model);
        const auto loaded = model_from_json(text);
        const auto* m3 = dynamic_cast<const ModelIII*>(loaded.get());
        REQUIRE(m3 != nullptr);
        CHECK(m3->lambda(0, 1) == doctest::Approx(1.0));
        CHECK(m3->lambda(1, 2) == doctest::Approx(0.3));
        CHECK(m3->mu(2) == doctest::Approx(2.0));
        CHECK(m3->theta(2, 1) == doctest::Approx(0.25));
    }
    SUBCASE("Model I") {
        const ModelI model(1.5, 2.5, 0.75, std::map<int, double>{{1, 0.1}, {2, 0.05}});
        const auto loaded = model_from_json(model_to_json(model));
        const auto* m1 = dynamic_cast<const ModelI*>(loaded.get());
        REQUIRE(m1 != nullptr);
        CHECK(m1->alpha() == doctest::Approx(1.5));
        CHECK(m1->theta(2) == doctest::Approx(0.05));
        CHECK(m1->theta(9) == doctest::Approx(0.0));
    }
    SUBCASE("Model II") {
        const ModelII model({0.1, 0.2, 0, 0, 0, 0}, {0.3, 0, 0, 0.4, 0, 0}, {0, 0, 0, 0, 0.5, 0});
        const auto loaded = model_from_json(model_to_json(model));
        const auto* m2 = dynamic_cast<const ModelII*>(loaded.get());
        REQUIRE(m2 != nullptr);
        CHECK(m2->lambda_coeffs().cS == doctest::Approx(0.2));
        CHECK(m2->phi_coeffs().cQQ == doctest::Approx(0.5));
    }
    SUBCASE("malformed documents are rejected") {
        CHECK_THROWS_AS(model_from_json("{"), InputError);
        CHECK_THROWS_AS(model_from_json(R"({"model":"X"})"), InputError);
    }
}
