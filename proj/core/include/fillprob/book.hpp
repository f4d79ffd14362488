#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fillprob {

enum class Side { Bid, Ask };
enum class EventKind { LimitArrival, MarketOrder, Cancellation };

inline const char* to_string(Side s) { return s == Side::Bid ? "B" : "A"; }
inline const char* to_string(EventKind k) {
    switch (k) {
        case EventKind::LimitArrival: return "L";
        case EventKind::MarketOrder: return "M";
        case EventKind::Cancellation: return "C";
    }
    return "?";
}

// One unit-size order book event. For market orders `side` names the side of
// the book that is consumed: Side::Ask is a buy market order hitting the best
// ask, Side::Bid a sell market order hitting the best bid.
struct OrderEvent {
    EventKind kind = EventKind::LimitArrival;
    Side side = Side::Bid;
    int level = 0;       // price level index in ticks, 1..N
    double time = 0.0;   // seconds
};

// Order book state on a discrete tick grid 1..N. Bid queues are stored as
// negative counts, ask queues as positive counts; all orders have unit size.
class BookState {
public:
    explicit BookState(int grid_size);
    static BookState from_queues(std::vector<std::int64_t> queues);

    int grid_size() const { return static_cast<int>(queues_.size()); }
    std::int64_t queue(int level) const { return queues_[static_cast<std::size_t>(level - 1)]; }
    const std::vector<std::int64_t>& queues() const { return queues_; }

    // Best ask: lowest level with a positive queue, or N+1 if the ask side is
    // empty. Best bid: highest level with a negative queue, or 0 if empty.
    int best_ask() const { return best_ask_; }
    int best_bid() const { return best_bid_; }
    bool has_ask() const { return best_ask_ <= grid_size(); }
    bool has_bid() const { return best_bid_ >= 1; }
    bool has_both_sides() const { return has_ask() && has_bid(); }

    int spread() const { return best_ask_ - best_bid_; }
    double mid_price() const { return 0.5 * (best_ask_ + best_bid_); }

    // Distance in ticks from the opposite best quote for a level on `side`.
    int distance_to_opposite(Side side, int level) const {
        return side == Side::Bid ? best_ask_ - level : level - best_bid_;
    }

    BookState with_queue(int level, std::int64_t value) const;

    std::string to_string() const;

private:
    std::vector<std::int64_t> queues_;
    int best_ask_ = 0;
    int best_bid_ = 0;

    void recompute_quotes();
    void check_ordering() const;
};

// Builds a book with the bid/ask best quotes `spread` ticks apart, centered on
// the grid, with the given queue sizes at the best quotes and `depth` units at
// every deeper level out to `levels_per_side` ticks behind each quote.
BookState make_symmetric_book(int grid_size, int spread, std::int64_t q_bid, std::int64_t q_ask,
                              int levels_per_side = 0, std::int64_t depth = 0);

// Applies one event per the queue update table and returns the new state.
// Throws InvalidEvent when the event violates its side/level precondition.
BookState apply_event(const BookState& state, const OrderEvent& event);

}  // namespace fillprob
