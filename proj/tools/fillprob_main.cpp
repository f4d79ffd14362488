// fillprob: calibrate Model III rate tables from LOB event logs, compute
// semi-analytical mid-price-move and fill probabilities, run the Monte Carlo
// simulator, and validate analytic grids against simulated or empirical
// frequencies.
//
// Exit codes: 0 success, 1 partial (some grid cells failed), 2 input error.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fillprob/calibration.hpp"
#include "fillprob/errors.hpp"
#include "fillprob/json_io.hpp"
#include "fillprob/probabilities.hpp"
#include "fillprob/simulator.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fillprob;

namespace {

struct Range {
    int lo = 1;
    int hi = 1;
};

struct GridSpec {
    Range q_ask{1, 5};
    Range q_bid{1, 5};
    Range spread{1, 1};
};

Range parse_range(const std::string& text) {
    const auto dots = text.find("..");
    try {
        if (dots == std::string::npos) {
            const int v = std::stoi(text);
            return {v, v};
        }
        return {std::stoi(text.substr(0, dots)), std::stoi(text.substr(dots + 2))};
    } catch (const std::exception&) {
        throw InputError("bad range '" + text + "'");
    }
}

// Grid syntax: qA=1..5,qB=1..5,s0=1..5 (each key optional, single values allowed).
GridSpec parse_grid(const std::string& text) {
    GridSpec grid;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw InputError("bad grid item '" + item + "'");
        const std::string key = item.substr(0, eq);
        const Range r = parse_range(item.substr(eq + 1));
        if (r.lo < 1 || r.hi < r.lo) throw InputError("bad grid range '" + item + "'");
        if (key == "qA") {
            grid.q_ask = r;
        } else if (key == "qB") {
            grid.q_bid = r;
        } else if (key == "s0") {
            grid.spread = r;
        } else {
            throw InputError("unknown grid key '" + key + "'");
        }
    }
    return grid;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    out << content;
}

Side parse_side_flag(const std::string& s) {
    if (s == "bid") return Side::Bid;
    if (s == "ask") return Side::Ask;
    throw InputError("side must be bid or ask");
}

// ---------------------------------------------------------------------------
// calibrate

struct CalibrateArgs {
    std::string events_path;
    std::string depth_path;
    std::string out_dir = ".";
    CalibrationConfig cfg;
    double market_ratio = -1.0;
    double cancel_ratio = -1.0;
};

int run_calibrate(const CalibrateArgs& args) {
    const auto events = read_events_csv_file(args.events_path);
    std::vector<DepthSnapshot> depth;
    if (!args.depth_path.empty()) depth = read_depth_csv_file(args.depth_path);

    CalibrationConfig cfg = args.cfg;
    if (args.market_ratio > 0.0) cfg.market_ratio_override = args.market_ratio;
    if (args.cancel_ratio > 0.0) cfg.cancel_ratio_override = args.cancel_ratio;

    RateTable table = calibrate(events, depth, cfg);
    if (events.empty()) table.warnings.push_back("empty event log: all-zero rate table");

    fs::create_directories(args.out_dir);
    write_file(fs::path(args.out_dir) / "ratetable.json", rate_table_to_json(table));

    const SpreadClock clock = build_spread_clock(events);
    std::ostringstream report;
    report << "calibration report\n";
    report << "events used: " << table.events_used << "\n";
    report << "events beyond caps: " << table.events_overflow << "\n";
    report << "sample duration: " << fmt(clock.total()) << " s\n";
    report << "occupation time by spread:\n";
    for (const auto& [s, t] : clock.occupation) {
        report << "  S=" << s << ": " << fmt(t) << " s\n";
    }
    report << "size ratios: market/limit=" << fmt(table.ratios.market_to_limit)
           << " cancel/limit=" << fmt(table.ratios.cancel_to_limit)
           << " avg limit size=" << fmt(table.ratios.avg_limit_size) << "\n";
    report << "warnings: " << table.warnings.size() << "\n";
    for (const auto& w : table.warnings) report << "  " << w << "\n";
    write_file(fs::path(args.out_dir) / "calibration_report.txt", report.str());
    std::cout << "wrote " << (fs::path(args.out_dir) / "ratetable.json").string() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// prob

struct ProbArgs {
    std::string model_path;
    std::string grid = "qA=1..5,qB=1..5,s0=1..5";
    std::string quantity = "mid";  // mid | fill | shift | deeper
    std::string direction = "up";  // up | down (mid only)
    std::string side = "bid";      // fill / shift / deeper
    std::string method = "cos";
    int q_deep = 1;
    bool paper_s54 = false;
    int n_max = 32;
    std::string out_dir = ".";
};

int run_prob(const ProbArgs& args) {
    const IntensityModelPtr model = load_model_file(args.model_path);
    const GridSpec grid = parse_grid(args.grid);

    ProbabilityOptions opts;
    opts.method = args.method == "euler" ? InversionMethod::Euler : InversionMethod::Cos;
    opts.truncate_conditional_fill_m2 = args.paper_s54;
    opts.truncate_opposite_n2 = args.paper_s54;

    const bool deeper = args.quantity == "deeper";
    const Side side = parse_side_flag(args.side);

    std::ostringstream csv;
    csv << "s0,qA,qB,depth,q_deep,direction,value,method,converged\n";
    json rows = json::array();
    std::uint64_t failed = 0;
    std::uint64_t succeeded = 0;

    for (int s0 = grid.spread.lo; s0 <= grid.spread.hi; ++s0) {
        // The opposite-queue mixture source is shared per spread.
        QueueDistribution opposite;
        if (deeper) {
            opposite = stationary_best_quote_distribution(model, s0, args.n_max);
        }
        for (int qa = grid.q_ask.lo; qa <= grid.q_ask.hi; ++qa) {
            for (int qb = grid.q_bid.lo; qb <= grid.q_bid.hi; ++qb) {
                MarketQuery query;
                query.model = model;
                query.q_ask = qa;
                query.q_bid = qb;
                query.spread = s0;
                query.side = side;
                query.depth = deeper ? Depth::OneDeeper : Depth::BestQuote;
                query.q_deep = args.q_deep;

                std::string direction = args.direction;
                json row{{"s0", s0}, {"qA", qa}, {"qB", qb},
                         {"depth", deeper ? "deeper" : "best"},
                         {"q_deep", deeper ? args.q_deep : 0}};
                try {
                    ProbabilityResult r;
                    if (args.quantity == "mid") {
                        r = mid_price_move_prob(query,
                                                args.direction == "down" ? PriceDirection::Down
                                                                         : PriceDirection::Up,
                                                opts);
                    } else if (args.quantity == "fill") {
                        direction = args.side;
                        r = best_quote_fill_prob(query, opts);
                    } else if (args.quantity == "shift") {
                        direction = args.side;
                        r = quote_shift_prob(query, opts);
                    } else if (args.quantity == "deeper") {
                        direction = args.side;
                        const QueueDistribution w = w_distribution(query, opts);
                        r = deeper_fill_prob(query, opposite, w, opts);
                    } else {
                        throw InputError("unknown quantity '" + args.quantity + "'");
                    }
                    csv << s0 << ',' << qa << ',' << qb << ','
                        << (deeper ? "deeper" : "best") << ',' << (deeper ? args.q_deep : 0)
                        << ',' << direction << ',' << fmt(r.value) << ','
                        << to_string(r.method) << ",1\n";
                    row["direction"] = direction;
                    row["value"] = r.value;
                    row["method"] = to_string(r.method);
                    row["converged"] = true;
                    row["interval"] = json::array({r.interval_a, r.interval_b});
                    row["terms"] = r.terms;
                    ++succeeded;
                } catch (const InputError&) {
                    throw;
                } catch (const Error& e) {
                    csv << s0 << ',' << qa << ',' << qb << ','
                        << (deeper ? "deeper" : "best") << ',' << (deeper ? args.q_deep : 0)
                        << ',' << direction << ",nan," << args.method << ",0\n";
                    row["direction"] = direction;
                    row["converged"] = false;
                    row["error"] = e.what();
                    ++failed;
                }
                rows.push_back(row);
            }
        }
    }

    fs::create_directories(args.out_dir);
    write_file(fs::path(args.out_dir) / "probs.csv", csv.str());
    json doc{{"quantity", args.quantity}, {"model", args.model_path}, {"rows", rows}};
    write_file(fs::path(args.out_dir) / "probs.json", doc.dump(2));
    std::cout << "wrote " << (fs::path(args.out_dir) / "probs.csv").string() << " ("
              << succeeded << " ok, " << failed << " failed)\n";
    if (succeeded == 0) {
        throw InputError("no grid cell succeeded");
    }
    return failed == 0 ? 0 : 1;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
    std::string model_path;
    std::string grid = "qA=1..5,qB=1..5,s0=1..1";
    std::string experiment = "mid";  // mid | fill | shift | deeper
    std::string mode = "frozen";
    std::string side = "bid";
    int q_deep = 1;
    std::uint64_t paths = 100000;
    std::uint64_t seed = 1;
    int n_max = 32;
    std::string out_dir = ".";
    // full-mode book construction
    int book_levels = 10;
    int book_depth = 5;
    int grid_size = 100;
    // event-log emission
    std::uint64_t emit_events = 0;
    double horizon = 0.0;
};

int run_simulate(const SimulateArgs& args) {
    const IntensityModelPtr model = load_model_file(args.model_path);
    fs::create_directories(args.out_dir);

    if (args.emit_events > 0) {
        // One long full-dynamics path recorded as calibration input.
        GridSpec grid = parse_grid(args.grid);
        LogRunConfig cfg;
        cfg.model = model;
        cfg.initial = make_symmetric_book(args.grid_size, grid.spread.lo, grid.q_bid.lo,
                                          grid.q_ask.lo, args.book_levels, args.book_depth);
        cfg.max_events = args.emit_events;
        cfg.horizon = args.horizon;
        cfg.seed = args.seed;
        const SimLog log = run_event_log(cfg);

        std::ostringstream events;
        write_events_csv(events, to_event_records(log));
        write_file(fs::path(args.out_dir) / "events.csv", events.str());
        std::ostringstream depth;
        write_depth_csv(depth, to_depth_snapshots(log));
        write_file(fs::path(args.out_dir) / "depth.csv", depth.str());
        std::ostringstream states;
        write_states_csv(states, book_state_records(log));
        write_file(fs::path(args.out_dir) / "states.csv", states.str());
        std::cout << "wrote " << log.events.size() << " events to "
                  << (fs::path(args.out_dir) / "events.csv").string() << "\n";
        return 0;
    }

    const GridSpec grid = parse_grid(args.grid);
    const Side side = parse_side_flag(args.side);
    const bool frozen = args.mode == "frozen";
    const bool deeper = args.experiment == "deeper";

    std::ostringstream csv;
    csv << "s0,qA,qB,depth,q_deep,direction,value,se,n\n";

    for (int s0 = grid.spread.lo; s0 <= grid.spread.hi; ++s0) {
        QueueDistribution opposite;
        if (deeper && frozen) {
            opposite = stationary_best_quote_distribution(model, s0, args.n_max);
        }
        for (int qa = grid.q_ask.lo; qa <= grid.q_ask.hi; ++qa) {
            for (int qb = grid.q_bid.lo; qb <= grid.q_bid.hi; ++qb) {
                FrequencyEstimate est;
                std::string direction = args.experiment == "mid" ? "up" : args.side;
                if (frozen) {
                    FrozenConfig cfg;
                    cfg.model = model;
                    cfg.q_ask = qa;
                    cfg.q_bid = qb;
                    cfg.spread = s0;
                    cfg.side = side;
                    cfg.q_deep = args.q_deep;
                    cfg.paths = args.paths;
                    cfg.seed = args.seed;
                    if (args.experiment == "mid") {
                        est = frozen_mid_price_up(cfg);
                    } else if (args.experiment == "fill") {
                        est = frozen_best_quote_fill(cfg);
                    } else if (args.experiment == "shift") {
                        est = frozen_quote_shift(cfg);
                    } else if (deeper) {
                        est = frozen_deeper_fill(cfg, opposite);
                    } else {
                        throw InputError("unknown experiment '" + args.experiment + "'");
                    }
                } else {
                    BookSimConfig cfg;
                    cfg.model = model;
                    cfg.paths = args.paths;
                    cfg.seed = args.seed;
                    cfg.initial = make_symmetric_book(args.grid_size, s0, qb, qa,
                                                      args.book_levels, args.book_depth);
                    if (args.experiment == "mid") {
                        const BookAggregate agg = run_book_paths(cfg);
                        est = estimate_frequency(agg.mid_up, agg.mid_up + agg.mid_down);
                    } else if (args.experiment == "fill") {
                        AgentSpec agent;
                        agent.side = side;
                        agent.depth = Depth::BestQuote;
                        agent.initial_queue = side == Side::Bid ? qb : qa;
                        cfg.agent = agent;
                        const BookAggregate agg = run_book_paths(cfg);
                        est = estimate_frequency(agg.agent_filled, agg.paths);
                    } else if (deeper) {
                        AgentSpec agent;
                        agent.side = side;
                        agent.depth = Depth::OneDeeper;
                        agent.initial_queue = args.q_deep;
                        cfg.initial = make_symmetric_book(args.grid_size, s0, qb, qa,
                                                          args.book_levels, args.q_deep);
                        cfg.agent = agent;
                        const BookAggregate agg = run_book_paths(cfg);
                        est = estimate_frequency(agg.agent_filled, agg.paths);
                    } else {
                        throw InputError("experiment '" + args.experiment +
                                         "' is not available in full mode");
                    }
                }
                csv << s0 << ',' << qa << ',' << qb << ',' << (deeper ? "deeper" : "best")
                    << ',' << (deeper ? args.q_deep : 0) << ',' << direction << ','
                    << fmt(est.probability) << ',' << fmt(est.std_error) << ',' << est.trials
                    << "\n";
            }
        }
    }
    write_file(fs::path(args.out_dir) / "freqs.csv", csv.str());
    std::cout << "wrote " << (fs::path(args.out_dir) / "freqs.csv").string() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// validate

struct CsvTable {
    // key: s0,qA,qB,depth,q_deep,direction
    std::map<std::string, std::map<std::string, std::string>> rows;
};

CsvTable read_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw InputError("empty file " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> header;
    {
        std::istringstream hs(line);
        std::string f;
        while (std::getline(hs, f, ',')) header.push_back(f);
    }
    CsvTable table;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ls(line);
        std::string f;
        std::map<std::string, std::string> row;
        std::size_t i = 0;
        while (std::getline(ls, f, ',')) {
            if (i < header.size()) row[header[i]] = f;
            ++i;
        }
        const std::string key = row["s0"] + "," + row["qA"] + "," + row["qB"] + "," +
                                row["depth"] + "," + row["q_deep"] + "," + row["direction"];
        table.rows[key] = row;
    }
    return table;
}

struct ValidateArgs {
    std::string probs_path;
    std::string freqs_path;
    std::string out_path = "report.json";
};

int run_validate(const ValidateArgs& args) {
    const CsvTable probs = read_table(args.probs_path);
    const CsvTable freqs = read_table(args.freqs_path);

    std::vector<std::string> unmatched;
    for (const auto& [key, row] : probs.rows) {
        (void)row;
        if (!freqs.rows.count(key)) unmatched.push_back("probs-only: " + key);
    }
    for (const auto& [key, row] : freqs.rows) {
        (void)row;
        if (!probs.rows.count(key)) unmatched.push_back("freqs-only: " + key);
    }
    if (!unmatched.empty()) {
        std::string msg = "grids do not match:";
        for (const auto& u : unmatched) msg += "\n  " + u;
        throw KeyMismatch(msg);
    }

    json cells = json::array();
    std::map<int, std::pair<std::vector<double>, std::vector<double>>> by_spread;
    std::vector<double> emp_all, model_all;
    int skipped = 0;
    int se_pass = 0, se_fail = 0, se_checked = 0;

    for (const auto& [key, prow] : probs.rows) {
        const auto& frow = freqs.rows.at(key);
        if (prow.at("converged") == "0") {
            ++skipped;
            continue;
        }
        const double model_v = std::stod(prow.at("value"));
        const double emp_v = std::stod(frow.at("value"));
        json cell{{"key", key}, {"model", model_v}, {"empirical", emp_v},
                  {"abs_error", std::abs(model_v - emp_v)}};
        if (frow.count("se")) {
            const double se = std::stod(frow.at("se"));
            const bool pass = std::abs(model_v - emp_v) <= 3.0 * se;
            cell["se"] = se;
            cell["within_3se"] = pass;
            ++se_checked;
            (pass ? se_pass : se_fail)++;
        }
        cells.push_back(cell);
        emp_all.push_back(emp_v);
        model_all.push_back(model_v);
        const int s0 = std::stoi(key.substr(0, key.find(',')));
        by_spread[s0].first.push_back(emp_v);
        by_spread[s0].second.push_back(model_v);
    }
    if (emp_all.empty()) throw InputError("no comparable cells");

    const MapeResult overall = mape(emp_all, model_all);
    json per_spread = json::object();
    for (const auto& [s0, lists] : by_spread) {
        const MapeResult r = mape(lists.first, lists.second);
        per_spread[std::to_string(s0)] =
            json{{"mape", r.value}, {"cells", r.cells_used}, {"excluded_zero", r.cells_excluded_zero}};
    }

    json report{{"mape", overall.value},
                {"cells_used", overall.cells_used},
                {"cells_excluded_zero", overall.cells_excluded_zero},
                {"cells_skipped_unconverged", skipped},
                {"mape_by_spread", per_spread},
                {"cells", cells}};
    if (se_checked > 0) {
        report["within_3se"] = json{{"pass", se_pass}, {"fail", se_fail}};
    }
    write_file(args.out_path, report.dump(2));
    std::cout << "MAPE " << fmt(overall.value) << " over " << overall.cells_used
              << " cells -> " << args.out_path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fill probabilities in a state-dependent limit order book queueing model"};
    app.require_subcommand(1);

    CalibrateArgs cal;
    auto* c = app.add_subcommand("calibrate", "estimate a Model III rate table from event logs");
    c->add_option("--events", cal.events_path, "event CSV")->required();
    c->add_option("--depth", cal.depth_path, "depth snapshot CSV");
    c->add_option("--out", cal.out_dir, "output directory");
    c->add_option("--distance-cap", cal.cfg.distance_cap, "max distance kept (default 15)");
    c->add_option("--spread-cap", cal.cfg.spread_cap, "max spread kept (default 5)");
    c->add_option("--market-ratio", cal.market_ratio, "override S_m/S_l");
    c->add_option("--cancel-ratio", cal.cancel_ratio, "override S_c/S_l");

    ProbArgs prob;
    auto* p = app.add_subcommand("prob", "compute model-implied probability grids");
    p->add_option("--model", prob.model_path, "model or rate table JSON")->required();
    p->add_option("--grid", prob.grid, "grid spec, e.g. qA=1..5,qB=1..5,s0=1..5");
    p->add_option("--quantity", prob.quantity, "mid | fill | shift | deeper");
    p->add_option("--direction", prob.direction, "up | down (mid only)");
    p->add_option("--side", prob.side, "bid | ask (fill/shift/deeper)");
    p->add_option("--method", prob.method, "euler | cos");
    p->add_option("--q-deep", prob.q_deep, "initial deeper-level queue (deeper only)");
    p->add_flag("--paper-s54", prob.paper_s54, "apply the m<=2 and n<=2 truncations");
    p->add_option("--nmax", prob.n_max, "stationary distribution truncation start");
    p->add_option("--out", prob.out_dir, "output directory");

    SimulateArgs sim;
    auto* s = app.add_subcommand("simulate", "Monte Carlo frequencies or event-log emission");
    s->add_option("--model", sim.model_path, "model or rate table JSON")->required();
    s->add_option("--grid", sim.grid, "grid spec");
    s->add_option("--experiment", sim.experiment, "mid | fill | shift | deeper");
    s->add_option("--mode", sim.mode, "frozen | full");
    s->add_option("--side", sim.side, "bid | ask");
    s->add_option("--q-deep", sim.q_deep, "initial deeper-level queue");
    s->add_option("--paths", sim.paths, "Monte Carlo paths per cell");
    s->add_option("--seed", sim.seed, "RNG seed");
    s->add_option("--nmax", sim.n_max, "stationary distribution truncation start");
    s->add_option("--out", sim.out_dir, "output directory");
    s->add_option("--book-levels", sim.book_levels, "full mode: occupied levels per side");
    s->add_option("--book-depth", sim.book_depth, "full mode: units per deeper level");
    s->add_option("--grid-size", sim.grid_size, "full mode: price grid ticks");
    s->add_option("--emit-events", sim.emit_events, "record one full-dynamics path of N events");
    s->add_option("--horizon", sim.horizon, "stop recording after this many seconds");

    ValidateArgs val;
    auto* v = app.add_subcommand("validate", "compare probability and frequency grids");
    v->add_option("--probs", val.probs_path, "probs.csv from `prob`")->required();
    v->add_option("--freqs", val.freqs_path, "freqs.csv from `simulate` or empirical grid")
        ->required();
    v->add_option("--out", val.out_path, "report JSON path");

    try {
        app.parse(argc, argv);
        if (*c) return run_calibrate(cal);
        if (*p) return run_prob(prob);
        if (*s) return run_simulate(sim);
        if (*v) return run_validate(val);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const InputError& e) {
        json err{{"error", "input"}, {"message", e.what()}};
        std::cerr << err.dump() << "\n";
        return 2;
    } catch (const Error& e) {
        json err{{"error", "runtime"}, {"message", e.what()}};
        std::cerr << err.dump() << "\n";
        return 2;
    }
    return 0;
}
