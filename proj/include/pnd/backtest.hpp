#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pnd/events.hpp"
#include "pnd/features.hpp"
#include "pnd/market_data.hpp"

namespace pnd {

// (high - open) / open of the pump-hour candle. Throws DataError if open <= 0.
double pump_gain(const Candle& pump_hour);

// (close - high) / close. Throws DataError if close <= 0.
double post_pump_drop(const Candle& pump_hour);

struct StrategyConfig {
    double threshold = 0.3;
    double baseline_qty = 0.37;  // BTC invested at vote 1.0
    double gain_haircut = 0.5;   // share of the pump gain actually captured
    double fee_rate = 0.002;     // per side

    void validate() const;
};

struct Position {
    std::string coin;
    EpochSeconds event_time = 0;
    double vote = 0.0;
    double invested = 0.0;  // baseline_qty * vote
    double pump_gain = 0.0;
    double assumed_gain = 0.0;  // pump_gain * haircut
    double gained = 0.0;        // invested * pump_gain * haircut, 0 if not pumped
    bool was_pumped = false;
};

Position make_position(std::string coin, EpochSeconds event_time, double vote, double pump_gain,
                       bool was_pumped, const StrategyConfig& cfg);

struct BacktestReport {
    std::vector<Position> positions;  // sorted by (event_time, coin)
    double total_invested = 0.0;
    double total_gained = 0.0;
    std::optional<double> return_ratio;  // absent with no trades
    double fee_drag = 0.0;               // BTC paid in fees on both legs
    std::optional<double> net_return_ratio;
    std::vector<std::string> warnings;

    bool no_trades() const { return positions.empty(); }
};

// Totals, fee drag and ordering for a set of positions.
BacktestReport summarize(std::vector<Position> positions, const StrategyConfig& cfg);

// Precomputed positions, CSV `coin,date,pumped,weight,pump_gain` with date
// as YYYY-MM-DD or full ISO-8601 and pumped TRUE/FALSE.
std::vector<Position> parse_positions(std::istream& in, const StrategyConfig& cfg);

struct CandidateVote {
    std::string coin;
    double vote = 0.0;
    bool pumped = false;
};

struct EventVotes {
    PumpEvent event;
    std::vector<CandidateVote> candidates;
};

// Groups scored observations by event id. The event's exchange, time and
// pumped coin are recovered from the id.
std::vector<EventVotes> group_votes(const Dataset& dataset, std::span<const double> scores);

// Buys every candidate voted >= threshold at the open one hour before the
// announcement, sized baseline_qty * vote; pumped coins earn
// invested * pump_gain * haircut, the rest earn zero. Candidates without a
// pump-hour candle are skipped with a warning.
BacktestReport run_strategy(std::span<const EventVotes> events, const CandleStore& candles,
                            const StrategyConfig& cfg);

// CSV `coin,date,pumped,weight,invested,pump_gain,assumed_gain,gained` plus
// a TOTAL row.
void write_backtest_csv(std::ostream& out, const BacktestReport& report);
void write_backtest_summary(std::ostream& out, const BacktestReport& report,
                            const StrategyConfig& cfg);

struct AdminProfit {
    double profit_btc = 0.0;
    double cost_basis_btc = 0.0;
    std::optional<double> return_ratio;
    double reference_price = 0.0;
    EpochMillis peak_time = 0;
};

// Reference price p0 is the last trade strictly before pump_time (first
// later trade if there is none). Over buy-aggressor ticks in
// (pump_time, peak], profit = sum q * (p - p0) and cost = sum q * p0; the
// peak is the earliest tick holding the maximum post-pump price.
AdminProfit estimate_admin_profit(std::span<const Tick> ticks, EpochMillis pump_time);

struct VolumeGap {
    double buy_btc = 0.0;
    double sell_btc = 0.0;
    double buy_coin = 0.0;
    double sell_coin = 0.0;
};

// Aggressor-partitioned volume over [from, to).
VolumeGap buy_sell_volume_gap(std::span<const Tick> ticks, EpochMillis from, EpochMillis to);

struct PumpVolume {
    double pre_pump_btc = 0.0;  // [pump_hour - 3h, pump_hour)
    double pump_btc = 0.0;      // [pump_hour, pump_hour + 3h)
};

struct AggregateVolume {
    std::map<std::string, PumpVolume> per_exchange;
    PumpVolume total;
    std::size_t events_used = 0;
    std::size_t events_skipped = 0;
};

AggregateVolume aggregate_pump_volume(std::span<const PumpEvent> events,
                                      const CandleStore& candles);

inline constexpr EpochMillis kDepthWindowMillis = 15 * 60 * 1000;

// Mean over events with ticks in [event_time, +15 min) of the buy-aggressor
// BTC volume in that window. Throws DataError when no event has ticks.
double estimate_market_depth(std::span<const PumpEvent> events, const TickStore& ticks);

}  // namespace pnd
