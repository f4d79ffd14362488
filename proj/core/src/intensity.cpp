#include "fillprob/intensity.hpp"

#include <cmath>

#include "fillprob/errors.hpp"

namespace fillprob {

namespace {

double require_finite_nonneg(double r, const char* what) {
    if (!std::isfinite(r) || r < 0.0) {
        throw DomainError(std::string(what) + " rate is not finite and nonnegative");
    }
    return r;
}

}  // namespace

// ---------------------------------------------------------------------------
// Model I

ModelI::ModelI(double alpha, double beta, double mu, std::function<double(int)> theta)
    : alpha_(alpha), beta_(beta), mu_(mu), theta_(std::move(theta)) {
    if (alpha_ <= 0 || beta_ <= 0 || mu_ <= 0) {
        throw InputError("Model I requires alpha, beta, mu > 0");
    }
}

ModelI::ModelI(double alpha, double beta, double mu, std::map<int, double> theta_table)
    : ModelI(alpha, beta, mu, std::function<double(int)>{}) {
    theta_table_ = std::make_shared<const std::map<int, double>>(std::move(theta_table));
    theta_ = [table = theta_table_](int delta) {
        auto it = table->find(delta);
        return it == table->end() ? 0.0 : it->second;
    };
}

double ModelI::limit_rate(const LevelContext& ctx, std::int64_t) const {
    const int d = ctx.delta < 1 ? 1 : ctx.delta;
    return require_finite_nonneg(beta_ / std::pow(static_cast<double>(d), alpha_), "limit");
}

double ModelI::market_rate(const LevelContext&, std::int64_t) const { return mu_; }

double ModelI::cancel_rate(const LevelContext& ctx, std::int64_t q) const {
    return require_finite_nonneg(theta(ctx.delta) * static_cast<double>(q), "cancel");
}

// ---------------------------------------------------------------------------
// Model II

double LogQuadCoeffs::eval(int spread, std::int64_t q) const {
    const double ls = std::log(static_cast<double>(spread));
    const double lq = std::log1p(static_cast<double>(q));
    return std::exp(c0 + cS * ls + cSS * ls * ls + cQ * lq + cQQ * lq * lq + cSQ * ls * lq);
}

double ModelII::limit_rate(const LevelContext& ctx, std::int64_t q) const {
    return require_finite_nonneg(lambda_.eval(ctx.spread, q), "limit");
}

double ModelII::market_rate(const LevelContext& ctx, std::int64_t q) const {
    return require_finite_nonneg(mu_.eval(ctx.spread, q), "market");
}

double ModelII::cancel_rate(const LevelContext& ctx, std::int64_t q) const {
    if (q == 0) return 0.0;
    return require_finite_nonneg(phi_.eval(ctx.spread, q), "cancel");
}

// ---------------------------------------------------------------------------
// Model III

ModelIII::ModelIII(Grid lambda, std::map<int, double> mu, Grid theta)
    : lambda_(std::move(lambda)), mu_(std::move(mu)), theta_(std::move(theta)) {
    for (const auto& kv : lambda_) require_finite_nonneg(kv.second, "lambda");
    for (const auto& kv : mu_) require_finite_nonneg(kv.second, "mu");
    for (const auto& kv : theta_) require_finite_nonneg(kv.second, "theta");
}

double ModelIII::grid_lookup(const Grid& g, int delta, int spread) {
    auto it = g.find({delta, spread});
    if (it != g.end()) return it->second;
    if (delta == 0) {
        it = g.find({spread, spread});
        if (it != g.end()) return it->second;
    } else if (delta == spread) {
        it = g.find({0, spread});
        if (it != g.end()) return it->second;
    }
    return 0.0;
}

double ModelIII::mu(int spread) const {
    auto it = mu_.find(spread);
    return it == mu_.end() ? 0.0 : it->second;
}

double ModelIII::limit_rate(const LevelContext& ctx, std::int64_t) const {
    return lambda(ctx.delta, ctx.spread);
}

double ModelIII::market_rate(const LevelContext& ctx, std::int64_t) const {
    return mu(ctx.spread);
}

double ModelIII::cancel_rate(const LevelContext& ctx, std::int64_t q) const {
    return theta(ctx.delta, ctx.spread) * static_cast<double>(q);
}

double CustomModel::checked(double r) { return require_finite_nonneg(r, "custom"); }

// ---------------------------------------------------------------------------
// Operations

double rate_of(const IntensityModel& model, const BookState& state, EventKind kind, Side side,
               int level) {
    if (level < 1 || level > state.grid_size()) {
        throw UnsupportedEvent("level outside grid");
    }
    if (!state.has_both_sides()) {
        throw UnsupportedEvent("book must have both sides");
    }
    const LevelContext ctx{state.distance_to_opposite(side, level), state.spread()};
    const std::int64_t q = std::abs(state.queue(level));

    switch (kind) {
        case EventKind::LimitArrival:
            if (side == Side::Bid && level >= state.best_ask()) {
                throw UnsupportedEvent("limit buy at/above best ask");
            }
            if (side == Side::Ask && level <= state.best_bid()) {
                throw UnsupportedEvent("limit sell at/below best bid");
            }
            return model.limit_rate(ctx, q);
        case EventKind::MarketOrder:
            if (side == Side::Ask && level != state.best_ask()) {
                throw UnsupportedEvent("market order away from best ask");
            }
            if (side == Side::Bid && level != state.best_bid()) {
                throw UnsupportedEvent("market order away from best bid");
            }
            return model.market_rate(ctx, q);
        case EventKind::Cancellation:
            if (side == Side::Bid && level > state.best_bid()) {
                throw UnsupportedEvent("bid cancellation above best bid");
            }
            if (side == Side::Ask && level < state.best_ask()) {
                throw UnsupportedEvent("ask cancellation below best ask");
            }
            return model.cancel_rate(ctx, q);
    }
    throw UnsupportedEvent("unknown event kind");
}

RateLadder best_quote_ladder(const IntensityModel& model, int spread) {
    if (spread < 1) throw InputError("spread must be >= 1");
    // The ladder holds a pointer to the model; the model must outlive it.
    const LevelContext ctx{0, spread};
    const IntensityModel* m = &model;
    return RateLadder{
        [m, ctx](std::int64_t k) { return m->limit_rate(ctx, k); },
        [m, ctx](std::int64_t k) { return m->market_rate(ctx, k) + m->cancel_rate(ctx, k); },
    };
}

RateLadder rate_ladder(const IntensityModel& model, const BookState& state, Side side) {
    if (side == Side::Ask && !state.has_ask()) throw InputError("no best ask");
    if (side == Side::Bid && !state.has_bid()) throw InputError("no best bid");
    return best_quote_ladder(model, state.spread());
}

std::function<double(std::int64_t)> deeper_level_cancel_rates(const IntensityModel& model,
                                                              int spread) {
    const LevelContext ctx{spread + 1, spread};
    const IntensityModel* m = &model;
    return [m, ctx](std::int64_t k) { return m->cancel_rate(ctx, k); };
}

double in_spread_rate(const IntensityModel& model, int spread) {
    double total = 0.0;
    for (int m = 1; m <= spread - 1; ++m) {
        total += model.limit_rate(LevelContext{m, spread}, 0);
    }
    return total;
}

}  // namespace fillprob
