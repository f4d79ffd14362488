#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>

#include "fillprob/book.hpp"

namespace fillprob {

// Frozen per-level factor vector: distance to the opposite best quote and the
// prevailing spread. delta == 0 aliases the best-quote column (the tabulated
// rate grids index the best quote either as delta == spread, its physical
// distance to the opposite quote, or as an explicit 0 column).
struct LevelContext {
    int delta = 0;
    int spread = 1;
};

// State-dependent order flow intensities. All rates are per side and per
// second; cancellation rates are totals for the level (linear in queue size
// for Models I/III).
class IntensityModel {
public:
    virtual ~IntensityModel() = default;
    virtual std::string name() const = 0;

    // Limit arrival rate at a level with context ctx and queue size q.
    virtual double limit_rate(const LevelContext& ctx, std::int64_t q) const = 0;
    // Market order rate at a best quote with queue size q.
    virtual double market_rate(const LevelContext& ctx, std::int64_t q) const = 0;
    // Total cancellation rate of a level with queue size q.
    virtual double cancel_rate(const LevelContext& ctx, std::int64_t q) const = 0;
};

using IntensityModelPtr = std::shared_ptr<const IntensityModel>;

// Power-law distance model: lambda = beta / delta^alpha, constant market rate,
// cancellation theta(delta) per unit. Distance 0 (the best-quote column) is
// evaluated at distance 1.
class ModelI final : public IntensityModel {
public:
    ModelI(double alpha, double beta, double mu, std::function<double(int)> theta);
    // Table-backed cancellation function (missing distances cancel at rate 0);
    // only this form serializes to JSON.
    ModelI(double alpha, double beta, double mu, std::map<int, double> theta_table);
    std::string name() const override { return "I"; }
    double limit_rate(const LevelContext& ctx, std::int64_t q) const override;
    double market_rate(const LevelContext& ctx, std::int64_t q) const override;
    double cancel_rate(const LevelContext& ctx, std::int64_t q) const override;

    double alpha() const { return alpha_; }
    double beta() const { return beta_; }
    double mu() const { return mu_; }
    double theta(int delta) const { return theta_(delta < 1 ? 1 : delta); }
    const std::map<int, double>* theta_table() const { return theta_table_.get(); }

private:
    double alpha_, beta_, mu_;
    std::function<double(int)> theta_;
    std::shared_ptr<const std::map<int, double>> theta_table_;
};

// Log-quadratic spread/queue-size model. Six coefficients per intensity in
// the order (c0, cS, cSS, cQ, cQQ, cSQ) applied to
// exp[c0 + cS log S + cSS log^2 S + cQ log(1+q) + cQQ log^2(1+q)
//     + cSQ log S log(1+q)].
struct LogQuadCoeffs {
    double c0 = 0, cS = 0, cSS = 0, cQ = 0, cQQ = 0, cSQ = 0;
    double eval(int spread, std::int64_t q) const;
};

class ModelII final : public IntensityModel {
public:
    ModelII(LogQuadCoeffs lambda, LogQuadCoeffs mu, LogQuadCoeffs phi)
        : lambda_(lambda), mu_(mu), phi_(phi) {}
    std::string name() const override { return "II"; }
    double limit_rate(const LevelContext& ctx, std::int64_t q) const override;
    double market_rate(const LevelContext& ctx, std::int64_t q) const override;
    double cancel_rate(const LevelContext& ctx, std::int64_t q) const override;

    const LogQuadCoeffs& lambda_coeffs() const { return lambda_; }
    const LogQuadCoeffs& mu_coeffs() const { return mu_; }
    const LogQuadCoeffs& phi_coeffs() const { return phi_; }

private:
    LogQuadCoeffs lambda_, mu_, phi_;
};

// Tabulated (distance, spread) model used in the numerical experiments:
// lambda(delta, S) per-side arrivals, mu(S) per-side market orders,
// theta(delta, S) per-unit cancellations. Missing cells evaluate to rate 0.
class ModelIII final : public IntensityModel {
public:
    using Grid = std::map<std::pair<int, int>, double>;  // (delta, spread) -> rate

    ModelIII(Grid lambda, std::map<int, double> mu, Grid theta);
    std::string name() const override { return "III"; }
    double limit_rate(const LevelContext& ctx, std::int64_t q) const override;
    double market_rate(const LevelContext& ctx, std::int64_t q) const override;
    double cancel_rate(const LevelContext& ctx, std::int64_t q) const override;

    double lambda(int delta, int spread) const { return grid_lookup(lambda_, delta, spread); }
    double mu(int spread) const;
    double theta(int delta, int spread) const { return grid_lookup(theta_, delta, spread); }

    const Grid& lambda_grid() const { return lambda_; }
    const std::map<int, double>& mu_map() const { return mu_; }
    const Grid& theta_grid() const { return theta_; }

private:
    // Exact key first; the best-quote column (delta == 0 and delta == spread
    // are the same physical level) falls back to its alias.
    static double grid_lookup(const Grid& g, int delta, int spread);
    Grid lambda_;
    std::map<int, double> mu_;
    Grid theta_;
};

// Arbitrary rate functions, mostly for tests and synthetic oracles.
class CustomModel final : public IntensityModel {
public:
    using RateFn = std::function<double(const LevelContext&, std::int64_t)>;
    CustomModel(RateFn limit, RateFn market, RateFn cancel)
        : limit_(std::move(limit)), market_(std::move(market)), cancel_(std::move(cancel)) {}
    std::string name() const override { return "custom"; }
    double limit_rate(const LevelContext& ctx, std::int64_t q) const override {
        return checked(limit_(ctx, q));
    }
    double market_rate(const LevelContext& ctx, std::int64_t q) const override {
        return checked(market_(ctx, q));
    }
    double cancel_rate(const LevelContext& ctx, std::int64_t q) const override {
        return checked(cancel_(ctx, q));
    }

private:
    static double checked(double r);
    RateFn limit_, market_, cancel_;
};

// Birth/death rate sequences of a best-quote queue viewed as a birth-death
// process with factors frozen at the query-time state. birth(k) is defined
// for k >= 0, death(k) = mu_k + phi_k for k >= 1.
struct RateLadder {
    std::function<double(std::int64_t)> birth;
    std::function<double(std::int64_t)> death;
};

// Intensity of the given event at `level` under `model` for the current book
// state. Cancellation rates are level totals (theta * |Q|). Throws
// UnsupportedEvent for impossible (kind, level) combinations.
double rate_of(const IntensityModel& model, const BookState& state, EventKind kind, Side side,
               int level);

// Frozen best-quote ladder for `side` of `state`.
RateLadder rate_ladder(const IntensityModel& model, const BookState& state, Side side);

// Same ladder addressed by spread alone (the best-quote context is fully
// determined by the spread once factors are frozen).
RateLadder best_quote_ladder(const IntensityModel& model, int spread);

// Per-unit-of-time rate sequence phi_k of the level one tick behind a best
// quote (distance spread+1 from the opposite quote), frozen at spread.
std::function<double(std::int64_t)> deeper_level_cancel_rates(const IntensityModel& model,
                                                              int spread);

// Total one-side in-spread arrival rate: sum of lambda(m, spread) over
// m = 1..spread-1. Zero iff spread == 1 (or no in-spread rates are tabulated).
double in_spread_rate(const IntensityModel& model, int spread);

}  // namespace fillprob
