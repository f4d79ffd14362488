#include "fillprob/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <mutex>

#include "fillprob/errors.hpp"
#include "fillprob/parallel.hpp"
#include "fillprob/rng.hpp"

namespace fillprob {

namespace {

constexpr std::uint64_t kMaxStepsPerRace = 100000000;
constexpr std::uint64_t kPathBlock = 8192;

// Memoized chain rates; one instance per worker block, so growth needs no
// synchronization.
class ChainCache {
public:
    explicit ChainCache(const RateLadder& ladder) : ladder_(&ladder) {
        birth_.reserve(64);
        death_.reserve(64);
    }
    double birth(std::int64_t k) {
        grow(k);
        return birth_[static_cast<std::size_t>(k)];
    }
    double death(std::int64_t k) {
        grow(k);
        return death_[static_cast<std::size_t>(k)];
    }

private:
    void grow(std::int64_t k) {
        while (static_cast<std::int64_t>(birth_.size()) <= k) {
            const std::int64_t i = static_cast<std::int64_t>(birth_.size());
            const double b = ladder_->birth(i);
            const double d = i == 0 ? 0.0 : ladder_->death(i);
            if (!(b >= 0.0) || !(d >= 0.0)) throw DomainError("negative chain rate");
            birth_.push_back(b);
            death_.push_back(d);
        }
    }
    const RateLadder* ladder_;
    std::vector<double> birth_;
    std::vector<double> death_;
};

class PhiCache {
public:
    explicit PhiCache(const std::function<double(std::int64_t)>& phi) : phi_(&phi) {}
    double operator()(std::int64_t k) {
        while (static_cast<std::int64_t>(rates_.size()) <= k) {
            const std::int64_t i = static_cast<std::int64_t>(rates_.size());
            rates_.push_back(i == 0 ? 0.0 : (*phi_)(i));
        }
        return rates_[static_cast<std::size_t>(k)];
    }

private:
    const std::function<double(std::int64_t)>* phi_;
    std::vector<double> rates_;
};

[[noreturn]] void stalled() { throw Stalled("zero total rate before any terminal event"); }

// First of {own depletion (true branch), opposite/in-spread (false)} decides
// these races; only the event order matters, so each step is one uniform.

bool mid_path_up(Rng& rng, ChainCache& chain, int q_ask, int q_bid, double lambda_in) {
    std::int64_t a = q_ask;
    std::int64_t b = q_bid;
    for (std::uint64_t step = 0; step < kMaxStepsPerRace; ++step) {
        const double da = chain.death(a);
        const double ba = chain.birth(a);
        const double db = chain.death(b);
        const double bb = chain.birth(b);
        const double total = da + ba + db + bb + 2.0 * lambda_in;
        if (!(total > 0.0)) stalled();
        double u = rng.uniform() * total;
        if ((u -= da) < 0.0) {
            if (--a == 0) return true;  // ask depleted: mid up
            continue;
        }
        if ((u -= db) < 0.0) {
            if (--b == 0) return false;  // bid depleted: mid down
            continue;
        }
        if ((u -= ba) < 0.0) {
            ++a;
            continue;
        }
        if ((u -= bb) < 0.0) {
            ++b;
            continue;
        }
        // In-spread arrival: a bid inside the spread raises the mid, an ask
        // lowers it; both one-sided clocks run at rate lambda_in.
        return (u -= lambda_in) < 0.0;
    }
    throw Stalled("race exceeded step budget");
}

bool fill_path(Rng& rng, ChainCache& chain, std::int64_t q_own, std::int64_t q_opp,
               double lambda_both) {
    std::int64_t w = q_own;
    std::int64_t o = q_opp;
    for (std::uint64_t step = 0; step < kMaxStepsPerRace; ++step) {
        const double dw = chain.death(w);
        const double doo = chain.death(o);
        const double bo = chain.birth(o);
        const double total = dw + doo + bo + lambda_both;
        if (!(total > 0.0)) stalled();
        double u = rng.uniform() * total;
        if ((u -= dw) < 0.0) {
            if (--w == 0) return true;  // agent reached the front and was consumed
            continue;
        }
        if ((u -= doo) < 0.0) {
            if (--o == 0) return false;  // opposite quote moved first
            continue;
        }
        if ((u -= bo) < 0.0) {
            ++o;
            continue;
        }
        return false;  // in-spread arrival moved the mid
    }
    throw Stalled("race exceeded step budget");
}

bool shift_path(Rng& rng, ChainCache& chain, std::int64_t q_own, std::int64_t q_opp,
                double lambda_both) {
    std::int64_t i = q_own;
    std::int64_t j = q_opp;
    for (std::uint64_t step = 0; step < kMaxStepsPerRace; ++step) {
        const double di = chain.death(i);
        const double bi = chain.birth(i);
        const double dj = chain.death(j);
        const double bj = chain.birth(j);
        const double total = di + bi + dj + bj + lambda_both;
        if (!(total > 0.0)) stalled();
        double u = rng.uniform() * total;
        if ((u -= di) < 0.0) {
            if (--i == 0) return true;
            continue;
        }
        if ((u -= dj) < 0.0) {
            if (--j == 0) return false;
            continue;
        }
        if ((u -= bi) < 0.0) {
            ++i;
            continue;
        }
        if ((u -= bj) < 0.0) {
            ++j;
            continue;
        }
        return false;
    }
    throw Stalled("race exceeded step budget");
}

// W at the moment the own best quote depletes; the W chain floors at 1
// because the agent itself never cancels.
std::int64_t w_path(Rng& rng, ChainCache& chain, PhiCache& phi, std::int64_t q_own,
                    std::int64_t q_deep) {
    std::int64_t a = q_own;
    std::int64_t w = q_deep;
    for (std::uint64_t step = 0; step < kMaxStepsPerRace; ++step) {
        const double da = chain.death(a);
        const double ba = chain.birth(a);
        const double pw = w >= 2 ? phi(w) : 0.0;
        const double total = da + ba + pw;
        if (!(total > 0.0)) stalled();
        double u = rng.uniform() * total;
        if ((u -= da) < 0.0) {
            if (--a == 0) return w;
            continue;
        }
        if ((u -= ba) < 0.0) {
            ++a;
            continue;
        }
        --w;
    }
    throw Stalled("race exceeded step budget");
}

void validate(const FrozenConfig& cfg) {
    if (!cfg.model) throw InputError("frozen experiment needs a model");
    if (cfg.q_ask < 1 || cfg.q_bid < 1 || cfg.q_deep < 1) {
        throw InputError("queue sizes must be >= 1");
    }
    if (cfg.spread < 1) throw InputError("spread must be >= 1");
    if (cfg.paths < 1) throw InputError("paths must be >= 1");
}

using PathFn = std::function<bool(std::uint64_t path, Rng& rng)>;

std::uint64_t count_paths(const FrozenConfig& cfg, const PathFn& path) {
    std::atomic<std::uint64_t> hits{0};
    parallel_blocks(cfg.paths, kPathBlock, cfg.threads,
                    [&](std::uint64_t, std::uint64_t lo, std::uint64_t hi) {
                        std::uint64_t local = 0;
                        for (std::uint64_t p = lo; p < hi; ++p) {
                            Rng rng(cfg.seed, p);
                            if (path(p, rng)) ++local;
                        }
                        hits.fetch_add(local, std::memory_order_relaxed);
                    });
    return hits.load();
}

}  // namespace

FrequencyEstimate estimate_frequency(std::uint64_t successes, std::uint64_t trials) {
    if (trials == 0) throw EmptyCell("no observations in conditioning event");
    FrequencyEstimate e;
    e.successes = successes;
    e.trials = trials;
    e.probability = static_cast<double>(successes) / static_cast<double>(trials);
    e.std_error = std::sqrt(e.probability * (1.0 - e.probability) / static_cast<double>(trials));
    return e;
}

FrequencyEstimate frozen_mid_price_up(const FrozenConfig& cfg) {
    validate(cfg);
    const RateLadder ladder = best_quote_ladder(cfg.model, cfg.spread);
    const double lambda_in = in_spread_rate(*cfg.model, cfg.spread);
    const std::uint64_t hits = count_paths(cfg, [&](std::uint64_t, Rng& rng) {
        ChainCache chain(ladder);
        return mid_path_up(rng, chain, cfg.q_ask, cfg.q_bid, lambda_in);
    });
    return estimate_frequency(hits, cfg.paths);
}

FrequencyEstimate frozen_best_quote_fill(const FrozenConfig& cfg) {
    validate(cfg);
    const RateLadder ladder = best_quote_ladder(cfg.model, cfg.spread);
    const double lambda2 = 2.0 * in_spread_rate(*cfg.model, cfg.spread);
    const int q_own = cfg.side == Side::Bid ? cfg.q_bid : cfg.q_ask;
    const int q_opp = cfg.side == Side::Bid ? cfg.q_ask : cfg.q_bid;
    const std::uint64_t hits = count_paths(cfg, [&](std::uint64_t, Rng& rng) {
        ChainCache chain(ladder);
        return fill_path(rng, chain, q_own, q_opp, lambda2);
    });
    return estimate_frequency(hits, cfg.paths);
}

FrequencyEstimate frozen_quote_shift(const FrozenConfig& cfg) {
    validate(cfg);
    const RateLadder ladder = best_quote_ladder(cfg.model, cfg.spread);
    const double lambda2 = 2.0 * in_spread_rate(*cfg.model, cfg.spread);
    const int q_own = cfg.side == Side::Bid ? cfg.q_bid : cfg.q_ask;
    const int q_opp = cfg.side == Side::Bid ? cfg.q_ask : cfg.q_bid;
    const std::uint64_t hits = count_paths(cfg, [&](std::uint64_t, Rng& rng) {
        ChainCache chain(ladder);
        return shift_path(rng, chain, q_own, q_opp, lambda2);
    });
    return estimate_frequency(hits, cfg.paths);
}

std::vector<std::uint64_t> frozen_w_histogram(const FrozenConfig& cfg) {
    validate(cfg);
    const RateLadder ladder = best_quote_ladder(cfg.model, cfg.spread);
    const auto phi = deeper_level_cancel_rates(cfg.model, cfg.spread);
    const int q_own = cfg.side == Side::Bid ? cfg.q_bid : cfg.q_ask;

    std::vector<std::atomic<std::uint64_t>> counts(static_cast<std::size_t>(cfg.q_deep));
    parallel_blocks(cfg.paths, kPathBlock, cfg.threads,
                    [&](std::uint64_t, std::uint64_t lo, std::uint64_t hi) {
                        ChainCache chain(ladder);
                        PhiCache phic(phi);
                        std::vector<std::uint64_t> local(static_cast<std::size_t>(cfg.q_deep), 0);
                        for (std::uint64_t p = lo; p < hi; ++p) {
                            Rng rng(cfg.seed, p);
                            const std::int64_t w = w_path(rng, chain, phic, q_own, cfg.q_deep);
                            ++local[static_cast<std::size_t>(w - 1)];
                        }
                        for (std::size_t i = 0; i < local.size(); ++i) {
                            counts[i].fetch_add(local[i], std::memory_order_relaxed);
                        }
                    });
    std::vector<std::uint64_t> out(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) out[i] = counts[i].load();
    return out;
}

FrequencyEstimate frozen_deeper_fill(const FrozenConfig& cfg, const QueueDistribution& opposite) {
    validate(cfg);
    const QueueDistribution opp = conditioned_on_positive(opposite);
    std::vector<double> cdf(opp.masses.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < opp.masses.size(); ++i) {
        acc += opp.masses[i];
        cdf[i] = acc;
    }

    const RateLadder pre = best_quote_ladder(cfg.model, cfg.spread);
    const RateLadder post = best_quote_ladder(cfg.model, cfg.spread + 1);
    const auto phi = deeper_level_cancel_rates(cfg.model, cfg.spread);
    const double lambda2_pre = 2.0 * in_spread_rate(*cfg.model, cfg.spread);
    const double lambda2_post = 2.0 * in_spread_rate(*cfg.model, cfg.spread + 1);
    const int q_own = cfg.side == Side::Bid ? cfg.q_bid : cfg.q_ask;
    const int q_opp = cfg.side == Side::Bid ? cfg.q_ask : cfg.q_bid;

    const std::uint64_t hits = count_paths(cfg, [&](std::uint64_t, Rng& rng) {
        ChainCache chain_pre(pre);
        ChainCache chain_post(post);
        PhiCache phic(phi);
        // Stage 1: does the own quote shift toward the agent first?
        if (!shift_path(rng, chain_pre, q_own, q_opp, lambda2_pre)) return false;
        // Stage 2: W from an independent replica race (the analytic mixture
        // treats W, the shift indicator, and the opposite queue as independent).
        const std::int64_t w = w_path(rng, chain_pre, phic, q_own, cfg.q_deep);
        // Stage 3: opposite queue resampled from the supplied distribution.
        const double u = rng.uniform();
        std::size_t idx = 0;
        while (idx + 1 < cdf.size() && u > cdf[idx]) ++idx;
        const std::int64_t n = opp.min_value + static_cast<std::int64_t>(idx);
        // Stage 4: conditional best-quote fill at spread s0 + 1.
        return fill_path(rng, chain_post, w, n, lambda2_post);
    });
    return estimate_frequency(hits, cfg.paths);
}

// ---------------------------------------------------------------------------
// Full event-driven book

namespace {

struct MutableBook {
    std::vector<std::int64_t> q;
    int n = 0;
    int p_ask = 0;
    int p_bid = 0;

    explicit MutableBook(const BookState& s)
        : q(s.queues()), n(s.grid_size()), p_ask(s.best_ask()), p_bid(s.best_bid()) {}

    std::int64_t& at(int level) { return q[static_cast<std::size_t>(level - 1)]; }
    std::int64_t at(int level) const { return q[static_cast<std::size_t>(level - 1)]; }

    void rescan_ask() {
        p_ask = n + 1;
        for (int i = 1; i <= n; ++i) {
            if (q[static_cast<std::size_t>(i - 1)] > 0) {
                p_ask = i;
                break;
            }
        }
    }
    void rescan_bid() {
        p_bid = 0;
        for (int i = n; i >= 1; --i) {
            if (q[static_cast<std::size_t>(i - 1)] < 0) {
                p_bid = i;
                break;
            }
        }
    }
};

struct Candidate {
    double rate;
    EventKind kind;
    Side side;
    int level;
};

struct AgentState {
    bool tracked = false;
    Side side = Side::Bid;
    Depth depth = Depth::BestQuote;
    int level = 0;
    std::int64_t ahead = 0;
    std::int64_t behind = 0;
    bool shifted = false;
    bool filled = false;
};

// Enumerates every admissible event with a positive rate. The agent order is
// exempt from cancellation at its level.
void enumerate(const MutableBook& book, const IntensityModel& model, const AgentState& agent,
               bool suppress_behind, std::vector<Candidate>& out, double& total) {
    out.clear();
    total = 0.0;
    const int spread = book.p_ask - book.p_bid;
    auto push = [&](double rate, EventKind kind, Side side, int level) {
        if (rate > 0.0) {
            out.push_back({rate, kind, side, level});
            total += rate;
        }
    };
    auto behind_agent = [&](Side side, int level) {
        return suppress_behind && agent.tracked && !agent.filled && level == agent.level &&
               side == agent.side;
    };

    for (int level = 1; level <= book.n; ++level) {
        const std::int64_t q = book.at(level);
        // Limit arrivals.
        if (level < book.p_ask && !behind_agent(Side::Bid, level)) {
            const LevelContext ctx{book.p_ask - level, spread};
            push(model.limit_rate(ctx, std::llabs(q)), EventKind::LimitArrival, Side::Bid, level);
        }
        if (level > book.p_bid && !behind_agent(Side::Ask, level)) {
            const LevelContext ctx{level - book.p_bid, spread};
            push(model.limit_rate(ctx, std::llabs(q)), EventKind::LimitArrival, Side::Ask, level);
        }
        // Cancellations of resting orders.
        if (q != 0) {
            const bool bid_side = q < 0;
            std::int64_t cancellable = std::llabs(q);
            if (agent.tracked && !agent.filled && level == agent.level &&
                bid_side == (agent.side == Side::Bid)) {
                cancellable = agent.ahead + agent.behind;  // agent never cancels
            }
            if (cancellable > 0) {
                const LevelContext ctx{
                    bid_side ? book.p_ask - level : level - book.p_bid, spread};
                const double unit_total = model.cancel_rate(ctx, cancellable);
                push(unit_total, EventKind::Cancellation, bid_side ? Side::Bid : Side::Ask,
                     level);
            }
        }
    }
    if (book.p_ask <= book.n) {
        const LevelContext ctx{spread, spread};
        push(model.market_rate(ctx, book.at(book.p_ask)), EventKind::MarketOrder, Side::Ask,
             book.p_ask);
    }
    if (book.p_bid >= 1) {
        const LevelContext ctx{spread, spread};
        push(model.market_rate(ctx, std::llabs(book.at(book.p_bid))), EventKind::MarketOrder,
             Side::Bid, book.p_bid);
    }
}

enum class StepOutcome { Continue, MidUp, MidDown, AgentFilled };

// Applies one sampled event; detects mid moves and agent transitions.
StepOutcome apply_candidate(MutableBook& book, AgentState& agent, const Candidate& c, Rng& rng) {
    const double old_mid = 0.5 * (book.p_ask + book.p_bid);
    const bool agent_level_event = agent.tracked && !agent.filled && c.level == agent.level &&
                                   (c.side == agent.side);

    switch (c.kind) {
        case EventKind::LimitArrival:
            if (c.side == Side::Bid) {
                book.at(c.level) -= 1;
                if (c.level > book.p_bid) book.p_bid = c.level;
            } else {
                book.at(c.level) += 1;
                if (c.level < book.p_ask) book.p_ask = c.level;
            }
            if (agent_level_event) agent.behind += 1;
            break;

        case EventKind::MarketOrder: {
            const int level = c.level;
            if (agent_level_event) {
                if (agent.ahead > 0) {
                    agent.ahead -= 1;
                } else {
                    agent.filled = true;
                }
            }
            if (c.side == Side::Ask) {
                book.at(level) -= 1;
                if (book.at(level) == 0) book.rescan_ask();
            } else {
                book.at(level) += 1;
                if (book.at(level) == 0) book.rescan_bid();
            }
            if (agent.filled) return StepOutcome::AgentFilled;
            break;
        }

        case EventKind::Cancellation: {
            if (agent_level_event) {
                // Uniform choice among the cancellable (non-agent) orders.
                const std::int64_t pool = agent.ahead + agent.behind;
                if (rng.uniform() * static_cast<double>(pool) < static_cast<double>(agent.ahead)) {
                    agent.ahead -= 1;
                } else {
                    agent.behind -= 1;
                }
            }
            if (c.side == Side::Bid) {
                book.at(c.level) += 1;
                if (book.at(c.level) == 0 && c.level == book.p_bid) book.rescan_bid();
            } else {
                book.at(c.level) -= 1;
                if (book.at(c.level) == 0 && c.level == book.p_ask) book.rescan_ask();
            }
            break;
        }
    }

    // Boundary policy: an emptied side terminates the path as a quote move of
    // that side (mid pushed away from it).
    if (book.p_ask > book.n) return StepOutcome::MidUp;
    if (book.p_bid < 1) return StepOutcome::MidDown;

    const double new_mid = 0.5 * (book.p_ask + book.p_bid);
    if (new_mid > old_mid) return StepOutcome::MidUp;
    if (new_mid < old_mid) return StepOutcome::MidDown;
    return StepOutcome::Continue;
}

}  // namespace

BookAggregate run_book_paths(const BookSimConfig& cfg) {
    if (!cfg.model) throw InputError("simulation needs a model");
    if (!cfg.initial.has_both_sides()) throw InputError("initial book needs both sides");
    if (cfg.paths < 1) throw InputError("paths must be >= 1");

    std::atomic<std::uint64_t> mid_up{0}, mid_down{0}, filled{0}, shift_first{0};
    std::mutex merge_mutex;
    BookAggregate agg;
    agg.paths = cfg.paths;

    parallel_blocks(cfg.paths, 256, cfg.threads, [&](std::uint64_t, std::uint64_t lo,
                                                     std::uint64_t hi) {
        std::vector<Candidate> candidates;
        std::map<int, double> occupation;
        std::map<std::tuple<int, int, int>, std::uint64_t> counts;
        double time_sum = 0.0;

        for (std::uint64_t p = lo; p < hi; ++p) {
            Rng rng(cfg.seed, p);
            MutableBook book(cfg.initial);
            AgentState agent;
            if (cfg.agent) {
                agent.tracked = true;
                agent.side = cfg.agent->side;
                agent.depth = cfg.agent->depth;
                agent.ahead = cfg.agent->initial_queue - 1;
                agent.behind = 0;
                const int quote = agent.side == Side::Bid ? book.p_bid : book.p_ask;
                agent.level = agent.depth == Depth::BestQuote
                                  ? quote
                                  : (agent.side == Side::Bid ? quote - 1 : quote + 1);
                if (agent.level < 1 || agent.level > book.n) {
                    throw GridTooSmall("agent level outside grid");
                }
                // The agent order itself must be present in the initial book.
                const std::int64_t q = book.at(agent.level);
                const std::int64_t have = std::llabs(q);
                if (have != agent.ahead + 1) {
                    throw InputError("initial book queue at the agent level must equal the "
                                     "agent's initial queue");
                }
            }

            double t = 0.0;
            for (std::uint64_t step = 0; step < cfg.max_events_per_path; ++step) {
                double total = 0.0;
                enumerate(book, *cfg.model, agent, cfg.suppress_arrivals_behind_agent, candidates, total);
                if (!(total > 0.0)) throw Stalled("no admissible events");
                const int spread_before = book.p_ask - book.p_bid;
                const double dt = rng.exponential(total);
                t += dt;
                occupation[spread_before] += dt;

                double u = rng.uniform() * total;
                std::size_t pick = 0;
                while (pick + 1 < candidates.size() && u >= candidates[pick].rate) {
                    u -= candidates[pick].rate;
                    ++pick;
                }
                const Candidate& c = candidates[pick];
                const int delta = c.side == Side::Bid ? book.p_ask - c.level : c.level - book.p_bid;
                ++counts[{static_cast<int>(c.kind), delta, spread_before}];

                const int own_quote_before =
                    agent.side == Side::Bid ? book.p_bid : book.p_ask;
                const StepOutcome outcome = apply_candidate(book, agent, c, rng);

                if (agent.tracked && !agent.shifted && agent.depth == Depth::OneDeeper) {
                    const int own_quote_now = agent.side == Side::Bid ? book.p_bid : book.p_ask;
                    if (own_quote_now == agent.level && own_quote_before != own_quote_now) {
                        agent.shifted = true;
                        shift_first.fetch_add(1, std::memory_order_relaxed);
                        // The agent's level is now the best quote; the race
                        // continues until the next mid move.
                        if (outcome == StepOutcome::Continue) continue;
                        // Quote moves onto the agent are mid moves themselves;
                        // keep racing for the fill.
                        continue;
                    }
                }

                if (outcome == StepOutcome::AgentFilled) {
                    filled.fetch_add(1, std::memory_order_relaxed);
                    break;
                }
                if (outcome == StepOutcome::MidUp) {
                    mid_up.fetch_add(1, std::memory_order_relaxed);
                    break;
                }
                if (outcome == StepOutcome::MidDown) {
                    mid_down.fetch_add(1, std::memory_order_relaxed);
                    break;
                }
            }
            time_sum += t;
        }

        std::lock_guard<std::mutex> lock(merge_mutex);
        for (const auto& [s, dt] : occupation) agg.spread_occupation[s] += dt;
        for (const auto& [k, c] : counts) agg.event_counts[k] += c;
        agg.total_time += time_sum;
    });

    agg.mid_up = mid_up.load();
    agg.mid_down = mid_down.load();
    agg.agent_filled = filled.load();
    agg.shift_first = shift_first.load();
    return agg;
}

SimLog run_event_log(const LogRunConfig& cfg) {
    if (!cfg.model) throw InputError("simulation needs a model");
    if (!cfg.initial.has_both_sides()) throw InputError("initial book needs both sides");
    if (cfg.max_events < 1) throw InputError("max_events must be >= 1");

    SimLog log;
    log.initial = cfg.initial;
    MutableBook book(cfg.initial);
    AgentState no_agent;
    Rng rng(cfg.seed, 0x51b07ULL);
    std::vector<Candidate> candidates;
    log.events.reserve(cfg.max_events);

    const int stride = cfg.snapshot_stride > 0
                           ? cfg.snapshot_stride
                           : std::max<int>(1, static_cast<int>(cfg.max_events / 10000));

    double t = 0.0;
    for (std::uint64_t step = 0; step < cfg.max_events; ++step) {
        double total = 0.0;
        enumerate(book, *cfg.model, no_agent, false, candidates, total);
        if (!(total > 0.0)) throw Stalled("no admissible events while recording log");
        const int spread_before = book.p_ask - book.p_bid;
        const double dt = rng.exponential(total);
        if (cfg.horizon > 0.0 && t + dt > cfg.horizon) break;
        t += dt;
        log.spread_occupation[spread_before] += dt;

        double u = rng.uniform() * total;
        std::size_t pick = 0;
        while (pick + 1 < candidates.size() && u >= candidates[pick].rate) {
            u -= candidates[pick].rate;
            ++pick;
        }
        const Candidate& c = candidates[pick];

        if (step % static_cast<std::uint64_t>(stride) == 0) {
            for (int delta = 1; delta <= cfg.distance_cap; ++delta) {
                const int bid_level = book.p_ask - delta;
                if (bid_level >= 1) {
                    const std::int64_t q = book.at(bid_level);
                    log.depth.push_back({t, spread_before, Side::Bid, delta,
                                         q < 0 ? static_cast<double>(-q) : 0.0});
                }
                const int ask_level = book.p_bid + delta;
                if (ask_level <= book.n) {
                    const std::int64_t q = book.at(ask_level);
                    log.depth.push_back({t, spread_before, Side::Ask, delta,
                                         q > 0 ? static_cast<double>(q) : 0.0});
                }
            }
        }

        RecordedEvent rec;
        rec.time = t;
        rec.kind = c.kind;
        rec.side = c.side;
        rec.level = c.level;
        rec.distance = c.side == Side::Bid ? book.p_ask - c.level : c.level - book.p_bid;
        rec.spread = spread_before;
        log.events.push_back(rec);

        apply_candidate(book, no_agent, c, rng);
        if (book.p_ask > book.n || book.p_bid < 1) {
            throw GridTooSmall("a book side emptied while recording the event log");
        }
    }
    log.duration = t;
    log.final = BookState::from_queues(book.q);
    return log;
}

}  // namespace fillprob
