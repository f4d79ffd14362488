#include "fillprob/probabilities.hpp"

#include <cmath>

#include "fillprob/errors.hpp"

namespace fillprob {

namespace {

void validate_query(const MarketQuery& q, const ProbabilityOptions& opts) {
    if (!q.model) throw InputError("query has no intensity model");
    if (q.q_ask < 1 || q.q_bid < 1) throw InputError("queue sizes must be >= 1");
    if (q.spread < 1) throw InputError("spread must be >= 1");
    if (q.depth == Depth::OneDeeper && q.q_deep < 1) throw InputError("q_deep must be >= 1");
    // The implied book needs both quotes plus one tick of room per side.
    const int needed = q.spread + (q.depth == Depth::OneDeeper ? 3 : 2);
    if (needed > opts.grid_size) {
        throw GridTooSmall("spread " + std::to_string(q.spread) + " on grid of " +
                           std::to_string(opts.grid_size) + " ticks");
    }
}

int own_queue(const MarketQuery& q, Side side) { return side == Side::Bid ? q.q_bid : q.q_ask; }

ProbabilityResult to_result(const CdfAtZero& inv) {
    ProbabilityResult r;
    r.value = inv.value;
    r.method = inv.method;
    r.interval_a = inv.interval_a;
    r.interval_b = inv.interval_b;
    r.terms = inv.terms;
    r.boundary_shortcut = inv.boundary_shortcut;
    return r;
}

std::vector<double> death_rate_prefix(const RateLadder& ladder, int count) {
    std::vector<double> rates;
    rates.reserve(static_cast<std::size_t>(count));
    for (int k = 1; k <= count; ++k) rates.push_back(ladder.death(k));
    return rates;
}

// P[X < Y] as the difference CDF at 0 with D = X - Y, i.e. (1/s) fX(s) fY(-s).
CdfAtZero race_probability(TransformPtr x, TransformPtr y, const ProbabilityOptions& opts) {
    auto diff = cdf_of(product({std::move(x), reflect_arg(std::move(y))}));
    return invert_cdf_at_zero(diff, opts.method, opts.euler, opts.cos);
}

}  // namespace

double QueueDistribution::total() const {
    double t = 0.0;
    for (double m : masses) t += m;
    return t;
}

RateLadder best_quote_ladder(IntensityModelPtr model, int spread) {
    if (!model) throw InputError("null model");
    if (spread < 1) throw InputError("spread must be >= 1");
    const LevelContext ctx{0, spread};
    return RateLadder{
        [model, ctx](std::int64_t k) { return model->limit_rate(ctx, k); },
        [model, ctx](std::int64_t k) {
            return model->market_rate(ctx, k) + model->cancel_rate(ctx, k);
        },
    };
}

std::function<double(std::int64_t)> deeper_level_cancel_rates(IntensityModelPtr model,
                                                              int spread) {
    if (!model) throw InputError("null model");
    const LevelContext ctx{spread + 1, spread};
    return [model, ctx](std::int64_t k) { return model->cancel_rate(ctx, k); };
}

ProbabilityResult mid_price_move_prob(const MarketQuery& query, PriceDirection direction,
                                      const ProbabilityOptions& opts) {
    validate_query(query, opts);
    const Side i = direction == PriceDirection::Up ? Side::Ask : Side::Bid;
    const Side j = direction == PriceDirection::Up ? Side::Bid : Side::Ask;
    const RateLadder ladder = best_quote_ladder(query.model, query.spread);
    const double lambda_in = in_spread_rate(*query.model, query.spread);

    auto fi = birth_death_fpt(ladder, own_queue(query, i), opts.lentz);
    auto fj = birth_death_fpt(ladder, own_queue(query, j), opts.lentz);
    // Each side races its own depletion against the opposite-side in-spread
    // clock at rate Lambda.
    return to_result(race_probability(min_with_exp(std::move(fi), lambda_in),
                                      min_with_exp(std::move(fj), lambda_in), opts));
}

ProbabilityResult best_quote_fill_prob(const MarketQuery& query, const ProbabilityOptions& opts) {
    validate_query(query, opts);
    const Side i = query.side;
    const Side j = i == Side::Bid ? Side::Ask : Side::Bid;
    const RateLadder ladder = best_quote_ladder(query.model, query.spread);
    const double lambda_in = in_spread_rate(*query.model, query.spread);

    const int q_own = own_queue(query, i);
    auto g = pure_death_fpt(death_rate_prefix(ladder, q_own), q_own);
    auto fj = birth_death_fpt(ladder, own_queue(query, j), opts.lentz);
    // Any in-spread arrival moves the mid, so the opposite clock runs at 2 Lambda.
    return to_result(
        race_probability(std::move(g), min_with_exp(std::move(fj), 2.0 * lambda_in), opts));
}

ProbabilityResult quote_shift_prob(const MarketQuery& query, const ProbabilityOptions& opts) {
    validate_query(query, opts);
    const Side i = query.side;
    const Side j = i == Side::Bid ? Side::Ask : Side::Bid;
    const RateLadder ladder = best_quote_ladder(query.model, query.spread);
    const double lambda_in = in_spread_rate(*query.model, query.spread);

    auto fi = birth_death_fpt(ladder, own_queue(query, i), opts.lentz);
    auto fj = birth_death_fpt(ladder, own_queue(query, j), opts.lentz);
    return to_result(
        race_probability(std::move(fi), min_with_exp(std::move(fj), 2.0 * lambda_in), opts));
}

QueueDistribution w_distribution(const MarketQuery& query, const ProbabilityOptions& opts) {
    validate_query(query, opts);
    if (query.depth != Depth::OneDeeper) throw InputError("w_distribution needs depth OneDeeper");
    const int q0 = query.q_deep;
    QueueDistribution dist;
    dist.min_value = 1;
    dist.masses.assign(static_cast<std::size_t>(q0), 0.0);
    if (q0 == 1) {
        dist.masses[0] = 1.0;  // W >= 1 always: the agent itself never cancels
        return dist;
    }

    const auto phi = deeper_level_cancel_rates(query.model, query.spread);
    const RateLadder ladder = best_quote_ladder(query.model, query.spread);
    auto sigma = birth_death_fpt(ladder, own_queue(query, query.side), opts.lentz);

    auto range_has_zero_rate = [&](int to) {
        const int k_lo = opts.hit_convention == HitIndexConvention::Paper ? to : to + 1;
        for (int k = k_lo; k <= q0; ++k) {
            if (phi(k) <= 0.0) return true;
        }
        return false;
    };

    // Top mass: the quote depletes before the first cancellation step.
    if (range_has_zero_rate(q0 - 1)) {
        // The first step never fires; all initial orders survive.
        dist.masses[static_cast<std::size_t>(q0 - 1)] = 1.0;
        return dist;
    }
    dist.masses[static_cast<std::size_t>(q0 - 1)] =
        race_probability(sigma, partial_hit(phi, q0, q0 - 1, opts.hit_convention), opts).value;

    // P_m = P[passage q0 -> m completes before the quote depletes].
    std::vector<double> hit_first(static_cast<std::size_t>(q0), 0.0);  // index m = 1..q0-1
    for (int m = 1; m <= q0 - 1; ++m) {
        if (range_has_zero_rate(m)) continue;  // passage impossible, P_m = 0
        hit_first[static_cast<std::size_t>(m)] =
            race_probability(partial_hit(phi, q0, m, opts.hit_convention), sigma, opts).value;
    }
    dist.masses[0] = hit_first[1];
    for (int m = 2; m <= q0 - 1; ++m) {
        dist.masses[static_cast<std::size_t>(m - 1)] =
            hit_first[static_cast<std::size_t>(m)] - hit_first[static_cast<std::size_t>(m - 1)];
    }

    double sum = dist.total();
    if (std::abs(sum - 1.0) > 1e-6) {
        throw MassLeak("w_distribution masses sum to " + std::to_string(sum));
    }
    for (double& m : dist.masses) m = std::max(0.0, m);
    sum = dist.total();
    for (double& m : dist.masses) m /= sum;
    return dist;
}

QueueDistribution stationary_queue_distribution(const RateLadder& ladder, int n_max) {
    if (n_max < 1) throw InputError("n_max must be >= 1");
    QueueDistribution dist;
    dist.min_value = 0;
    dist.masses.assign(static_cast<std::size_t>(n_max) + 1, 0.0);

    double weight = 1.0;  // unnormalized pi_n / pi_0
    double sum = 1.0;
    dist.masses[0] = 1.0;
    double rho = 0.0;
    for (int n = 1; n <= n_max; ++n) {
        const double birth = ladder.birth(n - 1);
        const double death = ladder.death(n);
        if (!(death > 0.0)) throw DomainError("stationary distribution needs death rates > 0");
        rho = birth / death;
        weight *= rho;
        dist.masses[static_cast<std::size_t>(n)] = weight;
        sum += weight;
    }
    // Geometric bound on the truncated tail.
    if (rho >= 1.0) {
        throw DivergentSeries("rho >= 1 at truncation point " + std::to_string(n_max));
    }
    const double tail = weight * rho / (1.0 - rho);
    if (tail > 1e-6 * sum) {
        throw DivergentSeries("tail mass " + std::to_string(tail / (sum + tail)) +
                              " at n_max " + std::to_string(n_max));
    }
    for (double& m : dist.masses) m /= sum;
    return dist;
}

QueueDistribution stationary_best_quote_distribution(const IntensityModelPtr& model, int spread,
                                                     int n_max_start, int n_max_limit) {
    const RateLadder ladder = best_quote_ladder(model, spread);
    for (int n = n_max_start; n <= n_max_limit; n *= 2) {
        try {
            return conditioned_on_positive(stationary_queue_distribution(ladder, n));
        } catch (const DivergentSeries&) {
            if (2 * n > n_max_limit) throw;
        }
    }
    throw DivergentSeries("stationary distribution did not converge below n_max limit");
}

QueueDistribution conditioned_on_positive(const QueueDistribution& dist) {
    QueueDistribution out;
    out.min_value = std::max(1, dist.min_value);
    double kept = 0.0;
    for (int v = out.min_value; v <= dist.max_value(); ++v) kept += dist.mass_at(v);
    if (!(kept > 0.0)) throw InputError("distribution has no mass on n >= 1");
    for (int v = out.min_value; v <= dist.max_value(); ++v) {
        out.masses.push_back(dist.mass_at(v) / kept);
    }
    return out;
}

ProbabilityResult deeper_fill_prob(const MarketQuery& query,
                                   const QueueDistribution& opposite_dist,
                                   const QueueDistribution& w_dist,
                                   const ProbabilityOptions& opts) {
    validate_query(query, opts);
    if (query.depth != Depth::OneDeeper) throw InputError("deeper_fill_prob needs depth OneDeeper");

    const ProbabilityResult shift = quote_shift_prob(query, opts);

    QueueDistribution opposite = conditioned_on_positive(opposite_dist);
    if (opts.truncate_opposite_n2) {
        for (int v = 3; v <= opposite.max_value(); ++v) {
            opposite.masses[static_cast<std::size_t>(v - opposite.min_value)] = 0.0;
        }
    }

    // After the shift the agent's level is the new best quote and the spread
    // is s0 + 1; everything below is evaluated at the shifted state.
    const int spread_after = query.spread + 1;
    const RateLadder after = best_quote_ladder(query.model, spread_after);
    const double lambda_in_after = in_spread_rate(*query.model, spread_after);

    // Mixture cells below the mass floor cannot move the result at the
    // tolerances used anywhere downstream; skip their inversions.
    constexpr double kMassFloor = 1e-9;
    double mixture = 0.0;
    for (int m = w_dist.min_value; m <= w_dist.max_value(); ++m) {
        const double wm = w_dist.mass_at(m);
        if (wm <= kMassFloor) continue;
        if (opts.truncate_conditional_fill_m2 && m > 2) continue;
        auto g = pure_death_fpt(death_rate_prefix(after, m), m);
        for (int n = opposite.min_value; n <= opposite.max_value(); ++n) {
            const double pn = opposite.mass_at(n);
            if (pn <= kMassFloor) continue;
            auto fj = birth_death_fpt(after, n, opts.lentz);
            const double fill =
                race_probability(g, min_with_exp(std::move(fj), 2.0 * lambda_in_after), opts)
                    .value;
            mixture += fill * wm * pn;
        }
    }

    ProbabilityResult result = shift;
    result.value = shift.value * mixture;
    return result;
}

}  // namespace fillprob
