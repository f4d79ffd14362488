#pragma once

#include <vector>

#include "fillprob/intensity.hpp"
#include "fillprob/inversion.hpp"

namespace fillprob {

enum class Depth { BestQuote, OneDeeper };
enum class PriceDirection { Up, Down };

inline const char* to_string(Depth d) { return d == Depth::BestQuote ? "best" : "deeper"; }
inline const char* to_string(PriceDirection d) { return d == PriceDirection::Up ? "up" : "down"; }

// Conditional state for a probability computation: both best-quote queue
// sizes, the spread, the agent side, and (for depth == OneDeeper) the initial
// queue ahead of and including the agent order one tick behind its quote.
struct MarketQuery {
    IntensityModelPtr model;
    int q_ask = 1;
    int q_bid = 1;
    int spread = 1;
    Side side = Side::Bid;
    Depth depth = Depth::BestQuote;
    int q_deep = 1;
};

struct ProbabilityOptions {
    InversionMethod method = InversionMethod::Cos;
    EulerConfig euler;
    CosConfig cos;
    LentzParams lentz;
    // Pinned to StepCount: simulated W frequencies match one factor per
    // consumed cancellation step, not the k = m..q0 range.
    HitIndexConvention hit_convention = HitIndexConvention::StepCount;
    bool truncate_conditional_fill_m2 = false;  // conditional fill = 0 for m > 2
    bool truncate_opposite_n2 = false;          // P[Q_j = n] = 0 for n > 2, no renorm
    int grid_size = 100;                        // price grid the query must fit on
};

struct ProbabilityResult {
    double value = 0.0;
    InversionMethod method = InversionMethod::Cos;
    double interval_a = 0.0;
    double interval_b = 0.0;
    int terms = 0;
    bool boundary_shortcut = false;
};

// Discrete distribution on consecutive integers min_value .. min_value+n-1.
struct QueueDistribution {
    int min_value = 0;
    std::vector<double> masses;

    int max_value() const { return min_value + static_cast<int>(masses.size()) - 1; }
    double mass_at(int v) const {
        const int i = v - min_value;
        return (i < 0 || i >= static_cast<int>(masses.size())) ? 0.0 : masses[static_cast<std::size_t>(i)];
    }
    double total() const;
};

// P[next mid-price move is in `direction` | q_ask, q_bid, spread]: the race
// between the two best-quote depletions, each min-wrapped with the one-sided
// in-spread arrival clock, inverted at 0 as a difference CDF.
ProbabilityResult mid_price_move_prob(const MarketQuery& query, PriceDirection direction,
                                      const ProbabilityOptions& opts = {});

// P[agent order at the back of its best-quote queue fills before the
// mid-price moves | never cancelled]: own pure-death depletion raced against
// min(opposite depletion, both in-spread clocks at total rate 2 Lambda).
ProbabilityResult best_quote_fill_prob(const MarketQuery& query,
                                       const ProbabilityOptions& opts = {});

// P[own best quote depletes before the opposite quote moves or any in-spread
// arrival]: the quote-shift term of the one-level-deeper fill probability.
ProbabilityResult quote_shift_prob(const MarketQuery& query,
                                   const ProbabilityOptions& opts = {});

// Distribution of W, the surviving initial orders (agent included) one tick
// behind the agent's best quote at the moment that quote depletes. Masses for
// m = 1..q_deep via the three-case transform table; throws MassLeak when the
// telescoping sum misses 1 by more than 1e-6.
QueueDistribution w_distribution(const MarketQuery& query, const ProbabilityOptions& opts = {});

// Stationary distribution pi_n over queue sizes 0..n_max for a level whose
// rates depend only on its queue size, truncated and renormalized. Throws
// DivergentSeries if the truncated tail mass exceeds 1e-6.
QueueDistribution stationary_queue_distribution(const RateLadder& ladder, int n_max);

// The same distribution conditioned on n >= 1 (a best quote exists).
QueueDistribution conditioned_on_positive(const QueueDistribution& dist);

// Stationary best-quote queue distribution at the given spread, conditioned
// on n >= 1, with the truncation point doubled until the tail bound holds.
QueueDistribution stationary_best_quote_distribution(const IntensityModelPtr& model, int spread,
                                                     int n_max_start = 32,
                                                     int n_max_limit = 65536);

// Fill probability of the agent order one tick behind its best quote, before
// the opposite quote moves: quote-shift probability times the mixture of
// conditional best-quote-style fills at spread s0+1 over (W, opposite queue).
ProbabilityResult deeper_fill_prob(const MarketQuery& query,
                                   const QueueDistribution& opposite_dist,
                                   const QueueDistribution& w_dist,
                                   const ProbabilityOptions& opts = {});

// Owning ladder variants: the closures keep the model alive.
RateLadder best_quote_ladder(IntensityModelPtr model, int spread);
std::function<double(std::int64_t)> deeper_level_cancel_rates(IntensityModelPtr model, int spread);

}  // namespace fillprob
