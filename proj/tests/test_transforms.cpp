#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "fillprob/continued_fraction.hpp"
#include "fillprob/errors.hpp"
#include "fillprob/transforms.hpp"

using namespace fillprob;

namespace {

// Closed-form M/M/1 busy-period transform: the independent oracle for the
// continued-fraction path with constant rates.
Complex busy_period_transform(double lambda, double mu, Complex s) {
    const Complex z = Complex(lambda + mu, 0.0) + s;
    return (z - std::sqrt(z * z - Complex(4.0 * lambda * mu, 0.0))) / Complex(2.0 * lambda, 0.0);
}

RateLadder constant_ladder(double lambda, double mu) {
    return RateLadder{[lambda](std::int64_t) { return lambda; },
                      [mu](std::int64_t) { return mu; }};
}

}  // namespace

TEST_CASE("lentz: golden ratio fraction") {
    ContinuedFraction cf{[](int) {
        return std::make_optional(std::make_pair(Complex(1.0, 0.0), Complex(1.0, 0.0)));
    }};
    const Complex f = lentz_evaluate(cf, LentzParams{});
    CHECK(f.real() == doctest::Approx(0.6180339887498949).epsilon(1e-12));
    CHECK(f.imag() == doctest::Approx(0.0));
}

TEST_CASE("lentz: single-term fraction evaluates exactly") {
    ContinuedFraction cf{[](int k) -> std::optional<std::pair<Complex, Complex>> {
        if (k > 1) return std::nullopt;
        return std::make_pair(Complex(1.0, 0.0), Complex(2.0, 0.0));
    }};
    const Complex f = lentz_evaluate(cf, LentzParams{});
    CHECK(f.real() == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("lentz: zero a_k rejected, no convergence reported") {
    ContinuedFraction zero_a{[](int) {
        return std::make_optional(std::make_pair(Complex(0.0, 0.0), Complex(1.0, 0.0)));
    }};
    CHECK_THROWS_AS(lentz_evaluate(zero_a, LentzParams{}), DomainError);

    // Alternating signs that never settle within two terms.
    ContinuedFraction slow{[](int k) {
        return std::make_optional(
            std::make_pair(Complex(k % 2 ? 1.0 : -1.0, 0.0), Complex(1e-3, 0.0)));
    }};
    CHECK_THROWS_AS(lentz_evaluate(slow, 1e-12, 5), NoConvergence);
}

TEST_CASE("birth-death transform matches the busy-period closed form") {
    const RateLadder ladder = constant_ladder(1.0, 2.0);
    SUBCASE("q0 = 1, s = 1") {
        const Complex f = birth_death_fpt_transform(ladder, 1, Complex(1.0, 0.0));
        CHECK(f.real() == doctest::Approx(0.5857864376269049).epsilon(1e-10));
    }
    SUBCASE("q0 = 2 is the square of q0 = 1") {
        const Complex f = birth_death_fpt_transform(ladder, 2, Complex(1.0, 0.0));
        CHECK(f.real() == doctest::Approx(0.3431457505076198).epsilon(1e-10));
    }
    SUBCASE("sweep of rate ratios and arguments") {
        for (const double ratio : {0.25, 0.5, 1.0, 2.0}) {
            const double lambda = ratio;
            const double mu = 1.0;
            const RateLadder lad = constant_ladder(lambda, mu);
            for (const double s : {0.1, 0.5, 1.0, 2.0, 5.0, 10.0}) {
                for (const int q0 : {1, 2, 5}) {
                    const Complex expected = std::pow(busy_period_transform(lambda, mu, s), q0);
                    const Complex got = birth_death_fpt_transform(lad, q0, Complex(s, 0.0));
                    CHECK(std::abs(got - expected) <=
                          doctest::Approx(1e-8 * std::abs(expected)));
                }
            }
        }
    }
    SUBCASE("null-recurrent chain is proper at s = 0") {
        const RateLadder critical = constant_ladder(1.0, 1.0);
        const Complex f = birth_death_fpt_transform(critical, 1, Complex(0.0, 0.0));
        CHECK(f.real() == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("transient chain absorbs with probability mu/lambda at s = 0") {
        const RateLadder transient = constant_ladder(2.0, 1.0);
        CHECK(birth_death_absorption_probability(transient, 1) == doctest::Approx(0.5).epsilon(1e-10));
        CHECK(birth_death_absorption_probability(transient, 3) ==
              doctest::Approx(0.125).epsilon(1e-10));
    }
    SUBCASE("zero birth rate at a passed state is a domain error") {
        const RateLadder bad{[](std::int64_t k) { return k == 0 ? 0.0 : 1.0; },
                             [](std::int64_t) { return 2.0; }};
        CHECK_THROWS_AS(birth_death_fpt_transform(bad, 1, Complex(1.0, 0.0)), DomainError);
    }
}

TEST_CASE("birth-death transform at complex arguments stays conjugate-symmetric") {
    const RateLadder ladder = constant_ladder(1.0, 2.0);
    const Complex s(0.7, 1.3);
    const Complex a = birth_death_fpt_transform(ladder, 2, s);
    const Complex b = birth_death_fpt_transform(ladder, 2, std::conj(s));
    CHECK(a.real() == doctest::Approx(b.real()).epsilon(1e-12));
    CHECK(a.imag() == doctest::Approx(-b.imag()).epsilon(1e-12));
}

TEST_CASE("pure-death transform") {
    CHECK(pure_death_fpt_transform({1.0, 1.0}, 2, Complex(1.0, 0.0)).real() ==
          doctest::Approx(0.25).epsilon(1e-15));
    CHECK(pure_death_fpt_transform({1.0, 2.0}, 2, Complex(1.0, 0.0)).real() ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(pure_death_fpt_transform({3.0, 7.0, 0.4}, 3, Complex(0.0, 0.0)).real() ==
          doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(pure_death_fpt_transform({1.0}, 1, Complex(-1.0, 0.0)), DomainError);
    CHECK_THROWS_AS(pure_death_fpt_transform({0.0}, 1, Complex(1.0, 0.0)), DomainError);
}

TEST_CASE("min with exponential") {
    // Y ~ Exp(1), so min(Y, Exp(1)) ~ Exp(2).
    auto exp1 = make_transform([](Complex s) { return Complex(1.0, 0.0) / (Complex(1.0, 0.0) + s); });
    const Complex v = min_with_exponential(*exp1, 1.0, Complex(1.0, 0.0));
    CHECK(v.real() == doctest::Approx(2.0 / 3.0).epsilon(1e-14));

    // Proper distribution at s = 0.
    const Complex at0 = min_with_exponential(*exp1, 3.7, Complex(0.0, 0.0));
    CHECK(at0.real() == doctest::Approx(1.0).epsilon(1e-14));

    // Y = 0 a.s.: the min is 0 and its transform is 1.
    auto unit = constant(1.0);
    const Complex degenerate = min_with_exponential(*unit, 5.0, Complex(2.0, 0.0));
    CHECK(degenerate.real() == doctest::Approx(1.0).epsilon(1e-14));

    // rate == 0 degenerates to the inner transform.
    const Complex identity = min_with_exponential(*exp1, 0.0, Complex(1.0, 0.0));
    CHECK(identity.real() == doctest::Approx(0.5).epsilon(1e-14));

    CHECK_THROWS_AS(min_with_exponential(*exp1, 2.0, Complex(-2.0, 0.0)), DomainError);
}

TEST_CASE("partial hit transform index conventions") {
    auto unit_phi = [](std::int64_t) { return 1.0; };
    // The Paper convention uses the full k = m..q0 product.
    CHECK(partial_hit_transform(unit_phi, 3, 2, Complex(1.0, 0.0), HitIndexConvention::Paper)
              .real() == doctest::Approx(0.25).epsilon(1e-15));
    // StepCount uses one factor per consumed step, k = m+1..q0.
    CHECK(partial_hit_transform(unit_phi, 3, 2, Complex(1.0, 0.0), HitIndexConvention::StepCount)
              .real() == doctest::Approx(0.5).epsilon(1e-15));

    auto ramp_phi = [](std::int64_t k) { return static_cast<double>(k); };
    CHECK(partial_hit_transform(ramp_phi, 3, 3, Complex(1.0, 0.0), HitIndexConvention::Paper)
              .real() == doctest::Approx(0.75).epsilon(1e-15));
    // Zero steps from q0 to q0 under step counting.
    CHECK(partial_hit_transform(ramp_phi, 3, 3, Complex(1.0, 0.0), HitIndexConvention::StepCount)
              .real() == doctest::Approx(1.0).epsilon(1e-15));

    CHECK(partial_hit_transform(unit_phi, 5, 2, Complex(0.0, 0.0), HitIndexConvention::Paper)
              .real() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("density transforms are completely monotone on the real axis") {
    std::mt19937_64 gen(20240811);
    std::uniform_real_distribution<double> rate(0.2, 3.0);
    for (int trial = 0; trial < 20; ++trial) {
        const double lambda = rate(gen);
        const double mu = rate(gen) + lambda;  // keep the chain recurrent
        const RateLadder ladder = constant_ladder(lambda, mu);
        auto bd = birth_death_fpt(ladder, 1 + trial % 3);
        auto pd = pure_death_fpt({mu, mu + 0.5, mu + 1.0}, 3);
        auto wrapped = min_with_exp(bd, 0.3);
        for (const Transform* t : {bd.get(), pd.get(), wrapped.get()}) {
            double prev = 1.0 + 1e-12;
            for (double s = 0.1; s <= 10.0; s += 0.9) {
                const double v = t->eval(Complex(s, 0.0)).real();
                CHECK(v > 0.0);
                CHECK(v < prev);
                prev = v;
            }
        }
    }
}

TEST_CASE("product law: per-step factors compose") {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> rate(0.5, 2.5);
    for (int trial = 0; trial < 10; ++trial) {
        // State-dependent but recurrent ladder.
        const double l0 = rate(gen);
        const double d0 = rate(gen) + 1.0;
        const RateLadder ladder{[l0](std::int64_t k) { return l0 / (1.0 + 0.1 * k); },
                                [d0](std::int64_t k) { return d0 + 0.4 * k; }};
        const Complex s(0.8, 0.0);

        // Pure death: passage from a+b splits into a then b more steps.
        std::vector<double> rates;
        for (int k = 1; k <= 5; ++k) rates.push_back(ladder.death(k));
        const Complex whole = pure_death_fpt_transform(rates, 5, s);
        Complex split = pure_death_fpt_transform(rates, 3, s);
        // Remaining two steps from state 5 down to 3.
        split *= partial_hit_transform([&](std::int64_t k) { return ladder.death(k); }, 5, 3, s,
                                       HitIndexConvention::StepCount);
        CHECK(std::abs(whole - split) <= 1e-12);

        // Birth-death: the q0-product equals the product of its step factors.
        const Complex f3 = birth_death_fpt_transform(ladder, 3, s);
        Complex per_step(1.0, 0.0);
        for (int i = 1; i <= 3; ++i) {
            // Step factor via a ladder shifted so that state i maps to 1.
            const Complex fi = birth_death_fpt_transform(ladder, i, s) /
                               (i == 1 ? Complex(1.0, 0.0)
                                       : birth_death_fpt_transform(ladder, i - 1, s));
            per_step *= fi;
        }
        CHECK(std::abs(f3 - per_step) <= 1e-10 * std::abs(f3));
    }
}

TEST_CASE("lentz result is stable once converged when the term budget doubles") {
    const RateLadder ladder = constant_ladder(1.0, 2.0);
    LentzParams p;
    p.max_terms = 5000;
    const Complex a = birth_death_fpt_transform(ladder, 1, Complex(0.5, 0.0), p);
    p.max_terms = 10000;
    const Complex b = birth_death_fpt_transform(ladder, 1, Complex(0.5, 0.0), p);
    CHECK(std::abs(a - b) <= 1e-10);
}
