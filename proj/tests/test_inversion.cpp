#include <doctest.h>

#include <cmath>
#include <vector>

#include "fillprob/errors.hpp"
#include "fillprob/inversion.hpp"
#include "fillprob/rng.hpp"
#include "fillprob/simulator.hpp"
#include "fillprob/transforms.hpp"

using namespace fillprob;

namespace {

TransformPtr exp_density(double rate = 1.0) {
    return make_transform(
        [rate](Complex s) { return Complex(rate, 0.0) / (Complex(rate, 0.0) + s); });
}

TransformPtr erlang_density(int k, double rate = 1.0) {
    return make_transform([k, rate](Complex s) {
        return std::pow(Complex(rate, 0.0) / (Complex(rate, 0.0) + s), k);
    });
}

double erlang_cdf(int k, double rate, double t) {
    // 1 - sum_{i<k} (rate t)^i e^{-rate t} / i!
    double term = 1.0;
    double sum = 0.0;
    for (int i = 0; i < k; ++i) {
        if (i > 0) term *= rate * t / i;
        sum += term;
    }
    return 1.0 - sum * std::exp(-rate * t);
}

}  // namespace

TEST_CASE("euler inversion of analytic transforms") {
    SUBCASE("Exp(1) density at t = 1") {
        CHECK(euler_invert(*exp_density(), 1.0) ==
              doctest::Approx(std::exp(-1.0)).epsilon(1e-6));
    }
    SUBCASE("Exp(1) CDF at t = 1") {
        CHECK(euler_invert(*cdf_of(exp_density()), 1.0) ==
              doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-6));
    }
    SUBCASE("unit step at t = 3") {
        auto step = cdf_of(constant(1.0));
        CHECK(euler_invert(*step, 3.0) == doctest::Approx(1.0).epsilon(1e-7));
    }
    SUBCASE("requires t > 0") {
        CHECK_THROWS_AS(euler_invert(*exp_density(), 0.0), InputError);
    }
}

TEST_CASE("euler discretization error is controlled by A and stable under n doubling") {
    for (int k = 1; k <= 4; ++k) {
        for (double t : {0.5, 1.0, 2.5}) {
            auto cdf = cdf_of(erlang_density(k));
            EulerConfig cfg;  // A = 18.4, m = 11, n = 15
            const double base = euler_invert(*cdf, t, cfg);
            CHECK(base == doctest::Approx(erlang_cdf(k, 1.0, t)).epsilon(5e-7));
            EulerConfig doubled = cfg;
            doubled.base_terms = 2 * cfg.base_terms;
            CHECK(std::abs(euler_invert(*cdf, t, doubled) - base) <= 1e-7);
        }
    }
}

TEST_CASE("cumulants and interval selection") {
    SUBCASE("exponential cumulants c_n = (n-1)!") {
        const Cumulants c = transform_cumulants(*exp_density(), 1e-4);
        CHECK(c.c1 == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(c.c2 == doctest::Approx(1.0).epsilon(1e-4));
        CHECK(c.c4 == doctest::Approx(6.0).epsilon(0.05));
        CosConfig cfg;  // L = 8
        const auto [a, b] = select_interval(*exp_density(), cfg);
        CHECK(a == doctest::Approx(-13.858).epsilon(1e-2));
        CHECK(b == doctest::Approx(15.858).epsilon(1e-2));
    }
    SUBCASE("deterministic time: degenerate interval raises") {
        auto point = make_transform([](Complex s) { return std::exp(-s * 2.0); });
        CHECK_THROWS_AS(select_interval(*point, CosConfig{}), CumulantError);
    }
    SUBCASE("difference of iid variables is centered at 0") {
        auto diff = product({exp_density(), reflect_arg(exp_density())});
        const auto [a, b] = select_interval(*diff, CosConfig{});
        CHECK(a == doctest::Approx(-b).epsilon(1e-4));
        CHECK(a < 0.0);
        CHECK(b > 0.0);
    }
}

TEST_CASE("cos inversion of analytic transforms") {
    SUBCASE("Exp(1) CDF at t = 1") {
        // The density jump at 0 slows the cosine series; 8k terms reach 1e-5.
        CosConfig cfg;
        cfg.n_terms = 8192;
        CHECK(cos_invert(*cdf_of(exp_density()), 1.0, cfg) ==
              doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-5));
    }
    SUBCASE("Erlang(2,1) density at t = 1") {
        CosConfig cfg;
        cfg.n_terms = 4096;
        CHECK(cos_invert(*erlang_density(2), 1.0, cfg) ==
              doctest::Approx(std::exp(-1.0)).epsilon(1e-5));
    }
    SUBCASE("difference CDF at 0 by symmetry") {
        auto diff_cdf = cdf_of(product({exp_density(), reflect_arg(exp_density())}));
        CHECK(cos_invert(*diff_cdf, 0.0) == doctest::Approx(0.5).epsilon(1e-5));
    }
    SUBCASE("outside the truncation interval") {
        CHECK_THROWS_AS(cos_invert(*exp_density(), 100.0), IntervalError);
    }
    SUBCASE("result is stable under N doubling once the series resolves") {
        auto diff_cdf = cdf_of(product({erlang_density(3), reflect_arg(exp_density())}));
        CosConfig cfg;
        cfg.n_terms = 2048;
        const double v2048 = cos_invert(*diff_cdf, 0.0, cfg);
        cfg.n_terms = 4096;
        const double v4096 = cos_invert(*diff_cdf, 0.0, cfg);
        cfg.n_terms = 8192;
        const double v8192 = cos_invert(*diff_cdf, 0.0, cfg);
        CHECK(std::abs(v4096 - v2048) <= 1e-6);
        CHECK(std::abs(v8192 - v4096) <= 1e-6);
    }
}

TEST_CASE("euler and cos agree on the analytic test set") {
    std::vector<std::pair<TransformPtr, double>> cases;
    for (int k = 1; k <= 4; ++k) {
        for (double t : {0.5, 1.0, 3.0}) {
            cases.emplace_back(cdf_of(erlang_density(k)), t);
        }
    }
    // Mixture of exponentials.
    auto mixture = make_transform([](Complex s) {
        return 0.3 * (Complex(1.0, 0.0) / (Complex(1.0, 0.0) + s)) +
               0.7 * (Complex(2.0, 0.0) / (Complex(2.0, 0.0) + s));
    });
    cases.emplace_back(cdf_of(mixture), 1.0);

    CosConfig cfg;
    cfg.n_terms = 4096;
    for (const auto& [transform, t] : cases) {
        const double e = euler_invert(*transform, t);
        const double c = cos_invert(*transform, t, cfg);
        CHECK(std::abs(e - c) <= 1e-4);
    }
}

TEST_CASE("invert_cdf_at_zero") {
    SUBCASE("symmetric difference is one half") {
        auto diff = cdf_of(product({exp_density(), reflect_arg(exp_density())}));
        CHECK(invert_cdf_at_zero(diff, InversionMethod::Cos).value ==
              doctest::Approx(0.5).epsilon(1e-6));
        CHECK(invert_cdf_at_zero(diff, InversionMethod::Euler).value ==
              doctest::Approx(0.5).epsilon(1e-6));
    }
    SUBCASE("Erlang(2,1) minus Exp(1): P = 1/4") {
        auto diff = cdf_of(product({erlang_density(2), reflect_arg(exp_density())}));
        CosConfig cfg;
        cfg.n_terms = 1024;
        CHECK(invert_cdf_at_zero(diff, InversionMethod::Cos, {}, cfg).value ==
              doctest::Approx(0.25).epsilon(1e-6));
        CHECK(invert_cdf_at_zero(diff, InversionMethod::Euler).value ==
              doctest::Approx(0.25).epsilon(1e-6));
    }
    SUBCASE("busy-period difference against the Monte Carlo oracle") {
        // sigma(lambda=1, mu=2, q0=1) minus an independent Exp(1).
        const RateLadder ladder{[](std::int64_t) { return 1.0; },
                                [](std::int64_t) { return 2.0; }};
        auto diff = cdf_of(product({birth_death_fpt(ladder, 1), reflect_arg(exp_density())}));
        const double analytic = invert_cdf_at_zero(diff, InversionMethod::Cos).value;

        std::uint64_t hits = 0;
        const std::uint64_t paths = 1000000;
        for (std::uint64_t p = 0; p < paths; ++p) {
            Rng rng(20250811, p);
            std::int64_t q = 1;
            for (;;) {
                double u = rng.uniform() * 4.0;  // death 2 + birth 1 + clock 1
                if ((u -= 2.0) < 0.0) {
                    if (--q == 0) {
                        ++hits;
                        break;
                    }
                    continue;
                }
                if ((u -= 1.0) < 0.0) {
                    ++q;
                    continue;
                }
                break;  // the exponential clock fired first
            }
        }
        const FrequencyEstimate est = estimate_frequency(hits, paths);
        CHECK(std::abs(analytic - est.probability) <= 3.0 * est.std_error);
    }
    SUBCASE("interval entirely positive short-circuits to zero") {
        auto shifted = cdf_of(shift_variable(exp_density(), 50.0));
        const CdfAtZero r = invert_cdf_at_zero(shifted, InversionMethod::Cos);
        CHECK(r.boundary_shortcut);
        CHECK(r.value == doctest::Approx(0.0));
    }
    SUBCASE("rejects non-CDF transforms") {
        CHECK_THROWS_AS(invert_cdf_at_zero(exp_density(), InversionMethod::Cos), InputError);
    }
}
