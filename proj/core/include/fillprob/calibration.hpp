#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "fillprob/intensity.hpp"
#include "fillprob/simulator.hpp"

namespace fillprob {

// One pre-annotated order flow event: kind, side, distance to the opposite
// best quote and spread at event time, and the traded/cancelled volume.
struct EventRecord {
    double time = 0.0;  // seconds, nondecreasing within a file
    EventKind kind = EventKind::LimitArrival;
    Side side = Side::Bid;
    int distance = 0;
    int spread = 1;
    double size = 1.0;
};

// Occupation time per spread value over the sample.
struct SpreadClock {
    std::map<int, double> occupation;
    double total() const;
    double at(int spread) const;
};

struct DepthSnapshot {
    double time = 0.0;
    int spread = 1;
    Side side = Side::Bid;
    int distance = 0;
    double volume = 0.0;
};

struct SizeRatios {
    double market_to_limit = 1.0;  // S_m / S_l
    double cancel_to_limit = 1.0;  // S_c / S_l
    double avg_limit_size = 1.0;   // S_l, used to express depth in unit orders
};

// Spread-conditioned rate estimates. The `pooled` grids are the raw
// estimators (both book sides counted together); the top-level grids are the
// published per-side rates (half the pooled values under the symmetry
// assumption) that plug directly into Model III.
struct RateTable {
    ModelIII::Grid lambda;       // per-side lambda(delta, S)
    std::map<int, double> mu;    // per-side mu(S)
    ModelIII::Grid theta;        // per-side per-unit theta(delta, S)
    ModelIII::Grid avg_depth;    // Q_delta^S in unit orders
    SizeRatios ratios;

    ModelIII::Grid lambda_pooled;
    std::map<int, double> mu_pooled;
    ModelIII::Grid theta_pooled;

    std::uint64_t events_used = 0;
    std::uint64_t events_overflow = 0;  // beyond the distance/spread caps
    std::vector<std::string> warnings;

    IntensityModelPtr to_model() const;
};

struct CalibrationConfig {
    int distance_cap = 15;
    int spread_cap = 5;
    std::optional<double> market_ratio_override;
    std::optional<double> cancel_ratio_override;
};

// --- estimator operations -----------------------------------------------------

// Occupation times derived from the recorded per-event spreads: the gap
// between consecutive events is attributed to the later event's (pre-event)
// spread.
SpreadClock build_spread_clock(const std::vector<EventRecord>& events);

// Mean event sizes from the log; ratios default to 1 for kinds with no events.
SizeRatios size_ratios_from_log(const std::vector<EventRecord>& events);

// lambda_hat^S(delta) = N_l^S(delta) / T_*^S (pooled across sides). Throws
// EmptySpreadCell when events exist for a spread with zero occupation time.
ModelIII::Grid estimate_lambda(const std::vector<EventRecord>& events, const SpreadClock& clock,
                               const CalibrationConfig& cfg = {});

// mu_hat^S = N_m^S / T_*^S * (S_m / S_l) (pooled).
std::map<int, double> estimate_mu(const std::vector<EventRecord>& events, const SpreadClock& clock,
                                  const SizeRatios& ratios, const CalibrationConfig& cfg = {});

// Average outstanding unit orders Q_delta^S from depth snapshots.
ModelIII::Grid average_depth(const std::vector<DepthSnapshot>& snapshots, double avg_limit_size,
                             const CalibrationConfig& cfg = {});

// theta_hat^S(delta) = N_c^S(delta) / (T_*^S Q_delta^S) * (S_c / S_l) (pooled).
// Throws ZeroDepth where cancellations occur at zero recorded depth.
ModelIII::Grid estimate_theta(const std::vector<EventRecord>& events, const SpreadClock& clock,
                              const ModelIII::Grid& avg_depth, const SizeRatios& ratios,
                              const CalibrationConfig& cfg = {});

// Full calibration: clock, ratios, all three estimators, per-side publication.
RateTable calibrate(const std::vector<EventRecord>& events,
                    const std::vector<DepthSnapshot>& snapshots,
                    const CalibrationConfig& cfg = {});

// --- empirical conditional tables ---------------------------------------------

// Post-event book state row used to derive empirical conditional
// probabilities; mid_x2 = best_ask + best_bid avoids half-tick fractions.
struct BookStateRecord {
    double time = 0.0;
    std::int64_t q_ask = 0;
    std::int64_t q_bid = 0;
    int spread = 1;
    int mid_x2 = 0;
};

// Replays a recorded event log through apply_event and emits the post-event
// state after every event.
std::vector<BookStateRecord> book_state_records(const SimLog& log);

struct GridCell {
    std::uint64_t total = 0;
    std::uint64_t up = 0;
};

struct EmpiricalPriceMoveTable {
    std::map<std::tuple<int, int, int>, GridCell> cells;  // (spread, q_ask, q_bid)
    std::uint64_t min_count = 100;

    // Frequency for a sufficiently observed cell; nullopt marks
    // insufficient data under the count floor.
    std::optional<double> probability(int spread, int q_ask, int q_bid) const;
};

// Empirical P[next mid move up | q_ask, q_bid, spread] grids with the
// minimum-observation filter.
EmpiricalPriceMoveTable empirical_price_move_table(const std::vector<BookStateRecord>& records,
                                                   std::uint64_t min_count = 100);

// --- error metric ---------------------------------------------------------------

struct MapeResult {
    double value = 0.0;
    int cells_used = 0;
    int cells_excluded_zero = 0;  // empirical value 0, division flagged and skipped
};

// Mean absolute percentage error between paired probability lists.
MapeResult mape(const std::vector<double>& empirical, const std::vector<double>& model);

// --- CSV formats ----------------------------------------------------------------
// Event CSV:  time_s,kind,side,distance_ticks,spread_ticks,size   (kind L/M/C, side B/A)
// Depth CSV:  time_s,spread_ticks,side,distance_ticks,volume
// State CSV:  time_s,q_ask,q_bid,spread_ticks,mid_x2

std::vector<EventRecord> read_events_csv(std::istream& in);
std::vector<EventRecord> read_events_csv_file(const std::string& path);
void write_events_csv(std::ostream& out, const std::vector<EventRecord>& events);

std::vector<DepthSnapshot> read_depth_csv(std::istream& in);
std::vector<DepthSnapshot> read_depth_csv_file(const std::string& path);
void write_depth_csv(std::ostream& out, const std::vector<DepthSnapshot>& snapshots);

std::vector<BookStateRecord> read_states_csv(std::istream& in);
void write_states_csv(std::ostream& out, const std::vector<BookStateRecord>& records);

// Conversions from simulator logs to calibration inputs.
std::vector<EventRecord> to_event_records(const SimLog& log);
std::vector<DepthSnapshot> to_depth_snapshots(const SimLog& log);

}  // namespace fillprob
