#include "fillprob/calibration.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "fillprob/errors.hpp"

namespace fillprob {

namespace {

bool in_caps(int distance, int spread, const CalibrationConfig& cfg) {
    return distance >= 0 && distance <= cfg.distance_cap && spread >= 1 &&
           spread <= cfg.spread_cap;
}

std::string cell_name(int distance, int spread) {
    return "(delta=" + std::to_string(distance) + ", S=" + std::to_string(spread) + ")";
}

}  // namespace

double SpreadClock::total() const {
    double t = 0.0;
    for (const auto& [s, dt] : occupation) t += dt;
    return t;
}

double SpreadClock::at(int spread) const {
    auto it = occupation.find(spread);
    return it == occupation.end() ? 0.0 : it->second;
}

SpreadClock build_spread_clock(const std::vector<EventRecord>& events) {
    SpreadClock clock;
    for (std::size_t i = 1; i < events.size(); ++i) {
        const double dt = events[i].time - events[i - 1].time;
        if (dt < 0.0) throw InputError("non-monotone time");
        clock.occupation[events[i].spread] += dt;
    }
    return clock;
}

SizeRatios size_ratios_from_log(const std::vector<EventRecord>& events) {
    double sum[3] = {0, 0, 0};
    std::uint64_t count[3] = {0, 0, 0};
    for (const auto& e : events) {
        if (e.size <= 0.0) throw InputError("event size must be > 0");
        const int k = static_cast<int>(e.kind);
        sum[k] += e.size;
        ++count[k];
    }
    SizeRatios r;
    const int l = static_cast<int>(EventKind::LimitArrival);
    const int m = static_cast<int>(EventKind::MarketOrder);
    const int c = static_cast<int>(EventKind::Cancellation);
    if (count[l] > 0) r.avg_limit_size = sum[l] / static_cast<double>(count[l]);
    if (count[m] > 0 && count[l] > 0) {
        r.market_to_limit = (sum[m] / static_cast<double>(count[m])) / r.avg_limit_size;
    }
    if (count[c] > 0 && count[l] > 0) {
        r.cancel_to_limit = (sum[c] / static_cast<double>(count[c])) / r.avg_limit_size;
    }
    return r;
}

ModelIII::Grid estimate_lambda(const std::vector<EventRecord>& events, const SpreadClock& clock,
                               const CalibrationConfig& cfg) {
    std::map<std::pair<int, int>, std::uint64_t> counts;
    for (const auto& e : events) {
        if (e.kind != EventKind::LimitArrival) continue;
        if (!in_caps(e.distance, e.spread, cfg)) continue;
        ++counts[{e.distance, e.spread}];
    }
    ModelIII::Grid grid;
    for (const auto& [key, n] : counts) {
        const double t = clock.at(key.second);
        if (!(t > 0.0)) {
            throw EmptySpreadCell(cell_name(key.first, key.second) +
                                  " has events but zero occupation time");
        }
        grid[key] = static_cast<double>(n) / t;
    }
    return grid;
}

std::map<int, double> estimate_mu(const std::vector<EventRecord>& events, const SpreadClock& clock,
                                  const SizeRatios& ratios, const CalibrationConfig& cfg) {
    std::map<int, std::uint64_t> counts;
    for (const auto& e : events) {
        if (e.kind != EventKind::MarketOrder) continue;
        if (e.spread < 1 || e.spread > cfg.spread_cap) continue;
        ++counts[e.spread];
    }
    std::map<int, double> mu;
    for (const auto& [spread, n] : counts) {
        const double t = clock.at(spread);
        if (!(t > 0.0)) {
            throw EmptySpreadCell("market orders at S=" + std::to_string(spread) +
                                  " with zero occupation time");
        }
        mu[spread] = static_cast<double>(n) / t * ratios.market_to_limit;
    }
    return mu;
}

ModelIII::Grid average_depth(const std::vector<DepthSnapshot>& snapshots, double avg_limit_size,
                             const CalibrationConfig& cfg) {
    if (!(avg_limit_size > 0.0)) throw InputError("average limit size must be > 0");
    // Volumes averaged per (side, delta, S) over the snapshots taken at that
    // spread, then the two sides averaged.
    std::map<std::tuple<int, int, int>, double> volume_sum;  // (side, delta, S)
    std::map<std::tuple<int, int, int>, std::uint64_t> volume_obs;
    for (const auto& d : snapshots) {
        if (!in_caps(d.distance, d.spread, cfg)) continue;
        const auto key = std::make_tuple(d.side == Side::Bid ? 0 : 1, d.distance, d.spread);
        volume_sum[key] += d.volume;
        ++volume_obs[key];
    }
    ModelIII::Grid depth;
    for (const auto& [key, sum] : volume_sum) {
        const double mean_units = sum / static_cast<double>(volume_obs[key]) / avg_limit_size;
        depth[{std::get<1>(key), std::get<2>(key)}] += 0.5 * mean_units;
    }
    return depth;
}

ModelIII::Grid estimate_theta(const std::vector<EventRecord>& events, const SpreadClock& clock,
                              const ModelIII::Grid& avg_depth, const SizeRatios& ratios,
                              const CalibrationConfig& cfg) {
    std::map<std::pair<int, int>, std::uint64_t> counts;
    for (const auto& e : events) {
        if (e.kind != EventKind::Cancellation) continue;
        if (!in_caps(e.distance, e.spread, cfg)) continue;
        ++counts[{e.distance, e.spread}];
    }
    ModelIII::Grid grid;
    for (const auto& [key, n] : counts) {
        const double t = clock.at(key.second);
        if (!(t > 0.0)) {
            throw EmptySpreadCell(cell_name(key.first, key.second) +
                                  " has cancellations but zero occupation time");
        }
        auto it = avg_depth.find(key);
        const double q = it == avg_depth.end() ? 0.0 : it->second;
        if (!(q > 0.0)) {
            throw ZeroDepth("cancellations at " + cell_name(key.first, key.second) +
                            " with zero recorded depth");
        }
        grid[key] = static_cast<double>(n) / (t * q) * ratios.cancel_to_limit;
    }
    return grid;
}

IntensityModelPtr RateTable::to_model() const {
    return std::make_shared<ModelIII>(lambda, mu, theta);
}

RateTable calibrate(const std::vector<EventRecord>& events,
                    const std::vector<DepthSnapshot>& snapshots, const CalibrationConfig& cfg) {
    RateTable table;
    const SpreadClock clock = build_spread_clock(events);
    table.ratios = size_ratios_from_log(events);
    if (cfg.market_ratio_override) table.ratios.market_to_limit = *cfg.market_ratio_override;
    if (cfg.cancel_ratio_override) table.ratios.cancel_to_limit = *cfg.cancel_ratio_override;

    for (const auto& e : events) {
        if (in_caps(e.distance, e.spread, cfg)) {
            ++table.events_used;
        } else {
            ++table.events_overflow;
        }
    }

    table.lambda_pooled = estimate_lambda(events, clock, cfg);
    table.mu_pooled = estimate_mu(events, clock, table.ratios, cfg);
    table.avg_depth = average_depth(snapshots, table.ratios.avg_limit_size, cfg);
    table.theta_pooled = estimate_theta(events, clock, table.avg_depth, table.ratios, cfg);

    // Published per-side rates: half the pooled estimates under symmetry.
    auto publish = [&table](const ModelIII::Grid& pooled) {
        ModelIII::Grid out;
        for (const auto& [key, v] : pooled) {
            double rate = 0.5 * v;
            if (rate < 0.0) {
                table.warnings.push_back("clamped negative rate at " +
                                         cell_name(key.first, key.second));
                rate = 0.0;
            }
            out[key] = rate;
        }
        return out;
    };
    table.lambda = publish(table.lambda_pooled);
    table.theta = publish(table.theta_pooled);
    for (const auto& [spread, v] : table.mu_pooled) table.mu[spread] = 0.5 * v;
    return table;
}

// ---------------------------------------------------------------------------
// Empirical conditional tables

std::vector<BookStateRecord> book_state_records(const SimLog& log) {
    std::vector<BookStateRecord> records;
    records.reserve(log.events.size());
    BookState state = log.initial;
    for (const auto& e : log.events) {
        OrderEvent ev{e.kind, e.side, e.level, e.time};
        state = apply_event(state, ev);
        if (!state.has_both_sides()) break;
        BookStateRecord rec;
        rec.time = e.time;
        rec.q_ask = state.queue(state.best_ask());
        rec.q_bid = -state.queue(state.best_bid());
        rec.spread = state.spread();
        rec.mid_x2 = state.best_ask() + state.best_bid();
        records.push_back(rec);
    }
    return records;
}

EmpiricalPriceMoveTable empirical_price_move_table(const std::vector<BookStateRecord>& records,
                                                   std::uint64_t min_count) {
    EmpiricalPriceMoveTable table;
    table.min_count = min_count;
    if (records.size() < 2) return table;

    // next_move[i]: direction of the first mid change strictly after record i.
    const std::size_t n = records.size();
    std::vector<signed char> next_move(n, 0);
    signed char pending = 0;
    for (std::size_t i = n - 1; i-- > 0;) {
        const int diff = records[i + 1].mid_x2 - records[i].mid_x2;
        if (diff > 0) {
            pending = +1;
        } else if (diff < 0) {
            pending = -1;
        }
        next_move[i] = pending;
    }
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (next_move[i] == 0) continue;  // no further mid change observed
        const auto key = std::make_tuple(records[i].spread, static_cast<int>(records[i].q_ask),
                                         static_cast<int>(records[i].q_bid));
        GridCell& cell = table.cells[key];
        ++cell.total;
        if (next_move[i] > 0) ++cell.up;
    }
    return table;
}

std::optional<double> EmpiricalPriceMoveTable::probability(int spread, int q_ask,
                                                           int q_bid) const {
    auto it = cells.find(std::make_tuple(spread, q_ask, q_bid));
    if (it == cells.end() || it->second.total < min_count) return std::nullopt;
    return static_cast<double>(it->second.up) / static_cast<double>(it->second.total);
}

MapeResult mape(const std::vector<double>& empirical, const std::vector<double>& model) {
    if (empirical.size() != model.size()) throw InputError("mape requires equal-length lists");
    if (empirical.empty()) throw InputError("mape requires at least one cell");
    MapeResult r;
    double sum = 0.0;
    for (std::size_t i = 0; i < empirical.size(); ++i) {
        if (empirical[i] == 0.0) {
            ++r.cells_excluded_zero;
            continue;
        }
        sum += std::abs(empirical[i] - model[i]) / std::abs(empirical[i]);
        ++r.cells_used;
    }
    if (r.cells_used == 0) throw InputError("mape: all empirical cells are zero");
    r.value = sum / static_cast<double>(r.cells_used);
    return r;
}

// ---------------------------------------------------------------------------
// CSV formats

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(field);
            field.clear();
        } else if (ch != '\r') {
            field += ch;
        }
    }
    fields.push_back(field);
    return fields;
}

double parse_double(const std::string& s, const char* what) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw InputError(std::string("bad ") + what + " value '" + s + "'");
    }
}

int parse_int(const std::string& s, const char* what) {
    try {
        std::size_t pos = 0;
        const int v = std::stoi(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw InputError(std::string("bad ") + what + " value '" + s + "'");
    }
}

EventKind parse_kind(const std::string& s) {
    if (s == "L") return EventKind::LimitArrival;
    if (s == "M") return EventKind::MarketOrder;
    if (s == "C") return EventKind::Cancellation;
    throw InputError("bad kind '" + s + "' (expected L, M or C)");
}

Side parse_side(const std::string& s) {
    if (s == "B") return Side::Bid;
    if (s == "A") return Side::Ask;
    throw InputError("bad side '" + s + "' (expected B or A)");
}

void expect_header(std::istream& in, const std::string& expected) {
    std::string line;
    if (!std::getline(in, line)) throw InputError("empty file, expected header " + expected);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != expected) {
        throw InputError("unexpected header '" + line + "', expected '" + expected + "'");
    }
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

}  // namespace

std::vector<EventRecord> read_events_csv(std::istream& in) {
    expect_header(in, "time_s,kind,side,distance_ticks,spread_ticks,size");
    std::vector<EventRecord> events;
    std::string line;
    double last_time = -1e300;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 6) throw InputError("event row needs 6 fields: " + line);
        EventRecord e;
        e.time = parse_double(f[0], "time_s");
        e.kind = parse_kind(f[1]);
        e.side = parse_side(f[2]);
        e.distance = parse_int(f[3], "distance_ticks");
        e.spread = parse_int(f[4], "spread_ticks");
        e.size = parse_double(f[5], "size");
        if (e.time < last_time) throw InputError("non-monotone time");
        if (e.spread < 1) throw InputError("spread_ticks must be >= 1");
        if (e.distance < 0) throw InputError("distance_ticks must be >= 0");
        if (!(e.size > 0.0)) throw InputError("size must be > 0");
        last_time = e.time;
        events.push_back(e);
    }
    return events;
}

std::vector<EventRecord> read_events_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    return read_events_csv(in);
}

void write_events_csv(std::ostream& out, const std::vector<EventRecord>& events) {
    out << "time_s,kind,side,distance_ticks,spread_ticks,size\n";
    for (const auto& e : events) {
        out << format_double(e.time) << ',' << to_string(e.kind) << ',' << to_string(e.side)
            << ',' << e.distance << ',' << e.spread << ',' << format_double(e.size) << '\n';
    }
}

std::vector<DepthSnapshot> read_depth_csv(std::istream& in) {
    expect_header(in, "time_s,spread_ticks,side,distance_ticks,volume");
    std::vector<DepthSnapshot> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 5) throw InputError("depth row needs 5 fields: " + line);
        DepthSnapshot d;
        d.time = parse_double(f[0], "time_s");
        d.spread = parse_int(f[1], "spread_ticks");
        d.side = parse_side(f[2]);
        d.distance = parse_int(f[3], "distance_ticks");
        d.volume = parse_double(f[4], "volume");
        if (d.volume < 0.0) throw InputError("volume must be >= 0");
        rows.push_back(d);
    }
    return rows;
}

std::vector<DepthSnapshot> read_depth_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    return read_depth_csv(in);
}

void write_depth_csv(std::ostream& out, const std::vector<DepthSnapshot>& snapshots) {
    out << "time_s,spread_ticks,side,distance_ticks,volume\n";
    for (const auto& d : snapshots) {
        out << format_double(d.time) << ',' << d.spread << ',' << to_string(d.side) << ','
            << d.distance << ',' << format_double(d.volume) << '\n';
    }
}

std::vector<BookStateRecord> read_states_csv(std::istream& in) {
    expect_header(in, "time_s,q_ask,q_bid,spread_ticks,mid_x2");
    std::vector<BookStateRecord> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 5) throw InputError("state row needs 5 fields: " + line);
        BookStateRecord r;
        r.time = parse_double(f[0], "time_s");
        r.q_ask = parse_int(f[1], "q_ask");
        r.q_bid = parse_int(f[2], "q_bid");
        r.spread = parse_int(f[3], "spread_ticks");
        r.mid_x2 = parse_int(f[4], "mid_x2");
        rows.push_back(r);
    }
    return rows;
}

void write_states_csv(std::ostream& out, const std::vector<BookStateRecord>& records) {
    out << "time_s,q_ask,q_bid,spread_ticks,mid_x2\n";
    for (const auto& r : records) {
        out << format_double(r.time) << ',' << r.q_ask << ',' << r.q_bid << ',' << r.spread << ','
            << r.mid_x2 << '\n';
    }
}

std::vector<EventRecord> to_event_records(const SimLog& log) {
    std::vector<EventRecord> events;
    events.reserve(log.events.size());
    for (const auto& e : log.events) {
        EventRecord r;
        r.time = e.time;
        r.kind = e.kind;
        r.side = e.side;
        r.distance = e.distance;
        r.spread = e.spread;
        r.size = 1.0;
        events.push_back(r);
    }
    return events;
}

std::vector<DepthSnapshot> to_depth_snapshots(const SimLog& log) {
    std::vector<DepthSnapshot> rows;
    rows.reserve(log.depth.size());
    for (const auto& d : log.depth) {
        rows.push_back({d.time, d.spread, d.side, d.distance, d.volume});
    }
    return rows;
}

}  // namespace fillprob
