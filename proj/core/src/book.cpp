#include "fillprob/book.hpp"

#include <sstream>

#include "fillprob/errors.hpp"

namespace fillprob {

BookState::BookState(int grid_size) {
    if (grid_size < 2) throw InputError("grid size must be >= 2");
    queues_.assign(static_cast<std::size_t>(grid_size), 0);
    recompute_quotes();
}

BookState BookState::from_queues(std::vector<std::int64_t> queues) {
    BookState s(static_cast<int>(queues.size()));
    s.queues_ = std::move(queues);
    s.recompute_quotes();
    s.check_ordering();
    return s;
}

void BookState::recompute_quotes() {
    const int n = grid_size();
    best_ask_ = n + 1;
    for (int i = 1; i <= n; ++i) {
        if (queues_[static_cast<std::size_t>(i - 1)] > 0) {
            best_ask_ = i;
            break;
        }
    }
    best_bid_ = 0;
    for (int i = n; i >= 1; --i) {
        if (queues_[static_cast<std::size_t>(i - 1)] < 0) {
            best_bid_ = i;
            break;
        }
    }
}

void BookState::check_ordering() const {
    if (has_both_sides() && best_bid_ >= best_ask_) {
        throw InvalidEvent("bid level " + std::to_string(best_bid_) +
                           " not below ask level " + std::to_string(best_ask_));
    }
}

BookState BookState::with_queue(int level, std::int64_t value) const {
    BookState next = *this;
    next.queues_[static_cast<std::size_t>(level - 1)] = value;
    next.recompute_quotes();
    next.check_ordering();
    return next;
}

std::string BookState::to_string() const {
    std::ostringstream os;
    os << "book[pB=" << best_bid_ << " pA=" << best_ask_ << " q=(";
    for (std::size_t i = 0; i < queues_.size(); ++i) {
        if (i) os << ',';
        os << queues_[i];
    }
    os << ")]";
    return os.str();
}

BookState make_symmetric_book(int grid_size, int spread, std::int64_t q_bid, std::int64_t q_ask,
                              int levels_per_side, std::int64_t depth) {
    if (spread < 1) throw InputError("spread must be >= 1");
    std::vector<std::int64_t> q(static_cast<std::size_t>(grid_size), 0);
    const int p_bid = (grid_size - spread) / 2;
    const int p_ask = p_bid + spread;
    if (p_bid - levels_per_side < 1 || p_ask + levels_per_side > grid_size) {
        throw GridTooSmall("book with spread " + std::to_string(spread) + " and " +
                           std::to_string(levels_per_side) + " deep levels on grid " +
                           std::to_string(grid_size));
    }
    q[static_cast<std::size_t>(p_bid - 1)] = -q_bid;
    q[static_cast<std::size_t>(p_ask - 1)] = q_ask;
    for (int d = 1; d <= levels_per_side; ++d) {
        q[static_cast<std::size_t>(p_bid - d - 1)] = -depth;
        q[static_cast<std::size_t>(p_ask + d - 1)] = depth;
    }
    return BookState::from_queues(std::move(q));
}

BookState apply_event(const BookState& state, const OrderEvent& event) {
    const int level = event.level;
    if (level < 1 || level > state.grid_size()) {
        throw InvalidEvent("level " + std::to_string(level) + " outside grid");
    }
    const std::int64_t q = state.queue(level);
    const int p_ask = state.best_ask();
    const int p_bid = state.best_bid();

    switch (event.kind) {
        case EventKind::LimitArrival:
            if (event.side == Side::Bid) {
                if (level >= p_ask) throw InvalidEvent("limit buy at/above best ask");
                return state.with_queue(level, q - 1);
            }
            if (level <= p_bid) throw InvalidEvent("limit sell at/below best bid");
            return state.with_queue(level, q + 1);

        case EventKind::MarketOrder:
            if (event.side == Side::Ask) {
                if (!state.has_ask() || level != p_ask) {
                    throw InvalidEvent("buy market order away from best ask");
                }
                return state.with_queue(level, q - 1);
            }
            if (!state.has_bid() || level != p_bid) {
                throw InvalidEvent("sell market order away from best bid");
            }
            return state.with_queue(level, q + 1);

        case EventKind::Cancellation:
            if (event.side == Side::Bid) {
                if (level > p_bid) throw InvalidEvent("bid cancellation above best bid");
                if (q >= 0) throw InvalidEvent("bid cancellation at empty level");
                return state.with_queue(level, q + 1);
            }
            if (level < p_ask) throw InvalidEvent("ask cancellation below best ask");
            if (q <= 0) throw InvalidEvent("ask cancellation at empty level");
            return state.with_queue(level, q - 1);
    }
    throw InvalidEvent("unknown event kind");
}

}  // namespace fillprob
