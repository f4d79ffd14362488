#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <tuple>
#include <vector>

#include "fillprob/book.hpp"
#include "fillprob/probabilities.hpp"

namespace fillprob {

struct FrequencyEstimate {
    double probability = 0.0;
    double std_error = 0.0;
    std::uint64_t successes = 0;
    std::uint64_t trials = 0;
};

// Relative frequency with binomial standard error sqrt(p(1-p)/n).
// Throws EmptyCell when the conditioning count is zero.
FrequencyEstimate estimate_frequency(std::uint64_t successes, std::uint64_t trials);

// --- frozen-rate oracle experiments ------------------------------------------
//
// These simulate exactly the stochastic race each analytic formula computes, with
// all intensities frozen at the query-time factors: best-quote queues evolve
// as birth-death chains, the agent queue as a pure-death chain, and in-spread
// arrivals as exponential clocks. Outcomes depend only on event order, so no
// holding times are sampled. Identical configs (including seed) give
// bit-identical counts regardless of the worker count.

struct FrozenConfig {
    IntensityModelPtr model;
    int q_ask = 1;
    int q_bid = 1;
    int spread = 1;
    Side side = Side::Bid;  // agent / own side for fill, shift, W and deeper runs
    int q_deep = 1;
    std::uint64_t paths = 100000;
    std::uint64_t seed = 1;
    unsigned threads = 0;  // 0: FILLPROB_THREADS or hardware
};

// P[next mid move is up]: both depletions raced against the two one-sided
// in-spread clocks.
FrequencyEstimate frozen_mid_price_up(const FrozenConfig& cfg);

// P[agent at the back of its best-quote queue fills before the mid moves].
FrequencyEstimate frozen_best_quote_fill(const FrozenConfig& cfg);

// P[own best quote depletes before the opposite quote moves].
FrequencyEstimate frozen_quote_shift(const FrozenConfig& cfg);

// Counts of W (surviving initial deeper-level orders, agent included) at the
// moment the own best quote depletes; index m-1 holds W == m, m = 1..q_deep.
std::vector<std::uint64_t> frozen_w_histogram(const FrozenConfig& cfg);

// Two-stage deeper fill matching the analytic mixture's independence
// structure:
// the shift race decides stage one, W is drawn from an independent replica
// race, the opposite queue is resampled from `opposite`, and the conditional
// fill race runs at spread s0+1.
FrequencyEstimate frozen_deeper_fill(const FrozenConfig& cfg, const QueueDistribution& opposite);

// --- full event-driven book simulation ---------------------------------------

struct AgentSpec {
    Side side = Side::Bid;
    Depth depth = Depth::BestQuote;
    // Queue ahead of and including the agent at t = 0 (the agent is last).
    int initial_queue = 1;
    bool never_cancelled = true;
};

struct BookSimConfig {
    IntensityModelPtr model;
    BookState initial{BookState(100)};
    std::optional<AgentSpec> agent;
    std::uint64_t paths = 1;
    std::uint64_t seed = 1;
    unsigned threads = 0;
    std::uint64_t max_events_per_path = 10000000;
    // Drop limit arrivals at the agent's own level. Time priority means they
    // queue behind the agent and cannot affect its fill; the toggle exists so
    // tests can verify exactly that.
    bool suppress_arrivals_behind_agent = false;
};

// Aggregate over paths that each run until the first mid-price change (or
// until the agent order is filled, when an agent is tracked). Event counts
// are keyed by (kind, distance, spread) at event time.
struct BookAggregate {
    std::uint64_t paths = 0;
    std::uint64_t mid_up = 0;
    std::uint64_t mid_down = 0;
    std::uint64_t agent_filled = 0;
    std::uint64_t shift_first = 0;  // own quote moved toward the agent first
    std::map<int, double> spread_occupation;
    double total_time = 0.0;
    std::map<std::tuple<int, int, int>, std::uint64_t> event_counts;
};

BookAggregate run_book_paths(const BookSimConfig& cfg);

// --- event-log recording (calibration input) ---------------------------------

struct LogRunConfig {
    IntensityModelPtr model;
    BookState initial{BookState(100)};
    double horizon = 0.0;                // stop after this many seconds, if > 0
    std::uint64_t max_events = 100000;   // stop after this many events
    std::uint64_t seed = 1;
    int snapshot_stride = 0;  // 0: choose so that ~10k snapshots are taken
    int distance_cap = 15;    // snapshot rows recorded out to this distance
};

struct RecordedEvent {
    double time = 0.0;
    EventKind kind = EventKind::LimitArrival;
    Side side = Side::Bid;
    int level = 0;
    int distance = 0;  // from the opposite best quote, pre-event
    int spread = 0;    // pre-event
};

struct DepthRow {
    double time = 0.0;
    int spread = 0;
    Side side = Side::Bid;
    int distance = 0;
    double volume = 0.0;
};

struct SimLog {
    BookState initial{BookState(100)};
    BookState final{BookState(100)};
    std::vector<RecordedEvent> events;
    std::vector<DepthRow> depth;
    std::map<int, double> spread_occupation;
    double duration = 0.0;
};

// One long path of the full dynamics, recording every event with its
// (distance, spread) annotation plus periodic depth snapshots at event times.
SimLog run_event_log(const LogRunConfig& cfg);

}  // namespace fillprob
