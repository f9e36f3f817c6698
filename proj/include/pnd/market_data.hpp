#pragma once

#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pnd/common.hpp"

namespace pnd {

// One hourly OHLCV bar. Prices are BTC per coin; volumefrom is in coin
// units and volumeto in BTC.
struct Candle {
    EpochSeconds timestamp = 0;
    double open = 0.0;
    double high = 0.0;
    double low = 0.0;
    double close = 0.0;
    double volumefrom = 0.0;
    double volumeto = 0.0;

    friend bool operator==(const Candle&, const Candle&) = default;
};

struct CandleSeries {
    std::string coin;
    std::string exchange;
    std::vector<Candle> candles;  // strictly increasing timestamps

    // Candle starting exactly at `t`, or nullptr.
    const Candle* at(EpochSeconds t) const;

    friend bool operator==(const CandleSeries&, const CandleSeries&) = default;
};

enum class Aggressor { Buy, Sell };

struct Tick {
    EpochMillis timestamp = 0;
    double price = 0.0;
    double quantity = 0.0;
    Aggressor aggressor = Aggressor::Buy;

    friend bool operator==(const Tick&, const Tick&) = default;
};

struct TickSeries {
    std::string coin;
    std::string exchange;
    std::vector<Tick> ticks;  // non-decreasing timestamps

    friend bool operator==(const TickSeries&, const TickSeries&) = default;
};

struct CoinMeta {
    std::string coin;
    double cap_btc = 0.0;
    EpochSeconds launch_time = 0;
    int rating = 0;
    double withdraw_fee = 0.0;
    double min_withdraw = 0.0;
    double max_withdraw = 0.0;
    double min_base_trade = 0.0;
    std::set<std::string> listed_on;

    friend bool operator==(const CoinMeta&, const CoinMeta&) = default;
};

using MarketKey = std::pair<std::string, std::string>;  // (coin, exchange)

class CandleStore {
public:
    CandleStore() = default;
    explicit CandleStore(std::vector<CandleSeries> series);

    void add(CandleSeries series);
    const CandleSeries* find(const std::string& coin, const std::string& exchange) const;
    std::vector<const CandleSeries*> all() const;
    std::size_t size() const { return series_.size(); }

private:
    std::map<MarketKey, CandleSeries> series_;
};

class TickStore {
public:
    TickStore() = default;
    explicit TickStore(std::vector<TickSeries> series);

    void add(TickSeries series);
    const TickSeries* find(const std::string& coin, const std::string& exchange) const;
    std::vector<const TickSeries*> all() const;

private:
    std::map<MarketKey, TickSeries> series_;
};

// Candle CSV: `coin,exchange,timestamp,open,high,low,close,volumefrom,volumeto`.
// Rows are grouped by (coin, exchange) and sorted by time; groups come back
// ordered by (coin, exchange). Throws DataError naming the line on any
// malformed row, OHLC ordering violation, or duplicate timestamp.
std::vector<CandleSeries> parse_candles(std::istream& in);
void write_candles(std::ostream& out, std::span<const CandleSeries> series);

// Tick CSV: `coin,exchange,timestamp,price,quantity,aggressor`.
std::vector<TickSeries> parse_ticks(std::istream& in);
void write_ticks(std::ostream& out, std::span<const TickSeries> series);

// Coin metadata, JSON Lines.
std::vector<CoinMeta> parse_coin_meta(std::istream& in);
void write_coin_meta(std::ostream& out, std::span<const CoinMeta> metas);

struct Gap {
    EpochSeconds start = 0;  // first missing hour
    std::int64_t hours = 0;
    friend bool operator==(const Gap&, const Gap&) = default;
};

struct ZeroVolumeRun {
    EpochSeconds start = 0;
    std::int64_t hours = 0;
    friend bool operator==(const ZeroVolumeRun&, const ZeroVolumeRun&) = default;
};

struct InvariantBreach {
    EpochSeconds timestamp = 0;
    std::string what;
};

struct ValidationReport {
    std::string coin;
    std::string exchange;
    std::size_t candle_count = 0;
    std::int64_t span_hours = 0;  // first..last inclusive
    std::vector<Gap> gaps;
    std::vector<ZeroVolumeRun> zero_volume_runs;
    std::vector<InvariantBreach> breaches;

    std::int64_t missing_hours() const;
    bool clean() const { return gaps.empty() && breaches.empty(); }
};

ValidationReport validate_series(const CandleSeries& series);

// Candles with timestamp in [end - hours, end). Missing hours are absent.
std::span<const Candle> window_slice(const CandleSeries& series, EpochSeconds end, int hours);

// Half-open range of candles [from, to).
std::span<const Candle> candles_between(const CandleSeries& series, EpochSeconds from,
                                        EpochSeconds to);

// Ticks with timestamp in [from, to).
std::span<const Tick> ticks_between(const TickSeries& series, EpochMillis from, EpochMillis to);

}  // namespace pnd
