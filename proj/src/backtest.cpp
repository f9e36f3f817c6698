#include "pnd/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include <nlohmann/json.hpp>

#include "pnd/csv.hpp"

namespace pnd {

double pump_gain(const Candle& c) {
    if (!(c.open > 0)) throw DataError("pump_gain: open price must be positive");
    return (c.high - c.open) / c.open;
}

double post_pump_drop(const Candle& c) {
    if (!(c.close > 0)) throw DataError("post_pump_drop: close price must be positive");
    return (c.close - c.high) / c.close;
}

void StrategyConfig::validate() const {
    // Thresholds above 1 are accepted and simply buy nothing.
    if (!(threshold >= 0) || !std::isfinite(threshold))
        throw UsageError("threshold must be a finite value >= 0");
    if (!(baseline_qty > 0)) throw UsageError("baseline_qty must be positive");
    if (!(gain_haircut > 0 && gain_haircut <= 1)) throw UsageError("gain_haircut must be in (0, 1]");
    if (!(fee_rate >= 0 && fee_rate < 1)) throw UsageError("fee_rate must be in [0, 1)");
}

Position make_position(std::string coin, EpochSeconds event_time, double vote, double pg,
                       bool was_pumped, const StrategyConfig& cfg) {
    Position p;
    p.coin = std::move(coin);
    p.event_time = event_time;
    p.vote = vote;
    p.invested = cfg.baseline_qty * vote;
    p.pump_gain = pg;
    p.assumed_gain = pg * cfg.gain_haircut;
    p.was_pumped = was_pumped;
    p.gained = was_pumped ? p.invested * pg * cfg.gain_haircut : 0.0;
    return p;
}

BacktestReport summarize(std::vector<Position> positions, const StrategyConfig& cfg) {
    std::stable_sort(positions.begin(), positions.end(), [](const Position& a, const Position& b) {
        if (a.event_time != b.event_time) return a.event_time < b.event_time;
        return a.coin < b.coin;
    });
    BacktestReport r;
    for (const auto& p : positions) {
        r.total_invested += p.invested;
        r.total_gained += p.gained;
        // Buy leg at cost, sell leg at cost plus the captured gain.
        double sell_notional = p.invested + p.gained;
        r.fee_drag += cfg.fee_rate * (p.invested + sell_notional);
    }
    r.positions = std::move(positions);
    if (r.total_invested > 0) {
        r.return_ratio = r.total_gained / r.total_invested;
        r.net_return_ratio = (r.total_gained - r.fee_drag) / r.total_invested;
    }
    return r;
}

std::vector<Position> parse_positions(std::istream& in, const StrategyConfig& cfg) {
    cfg.validate();
    std::string line;
    if (!csv::read_line(in, line) || line != "coin,date,pumped,weight,pump_gain")
        throw DataError("positions: expected header coin,date,pumped,weight,pump_gain");
    std::vector<Position> out;
    std::size_t line_no = 1;
    while (csv::read_line(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto where = "positions line " + std::to_string(line_no) + ": ";
        auto f = csv::split(line);
        if (f.size() != 5) throw DataError(where + "expected 5 fields");
        std::string date(f[1]);
        if (date.size() == 10) date += "T00:00:00Z";
        EpochSeconds t = parse_iso8601(date);
        bool pumped;
        if (f[2] == "TRUE" || f[2] == "1")
            pumped = true;
        else if (f[2] == "FALSE" || f[2] == "0")
            pumped = false;
        else
            throw DataError(where + "pumped must be TRUE or FALSE");
        auto weight = parse_decimal(f[3]);
        auto pg = parse_decimal(f[4]);
        if (!weight || !pg) throw DataError(where + "bad number");
        if (*weight < 0 || *weight > 1) throw DataError(where + "weight must be in [0, 1]");
        out.push_back(make_position(std::string(f[0]), t, *weight, *pg, pumped, cfg));
    }
    return out;
}

std::vector<EventVotes> group_votes(const Dataset& dataset, std::span<const double> scores) {
    if (scores.size() != dataset.size())
        throw DataError("score count does not match dataset size");
    std::map<std::string, std::size_t> index;
    std::vector<EventVotes> out;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const auto& o = dataset.observations[i];
        auto [it, inserted] = index.emplace(o.event_id, out.size());
        if (inserted) {
            EventVotes ev;
            auto first = o.event_id.find('/');
            auto second = o.event_id.find('/', first + 1);
            if (first == std::string::npos || second == std::string::npos)
                throw DataError("event id '" + o.event_id + "' lacks exchange/coin parts");
            ev.event.id = static_cast<int>(out.size());
            ev.event.event_time = o.event_time;
            ev.event.pump_hour = floor_hour(o.event_time);
            ev.event.exchange = o.event_id.substr(first + 1, second - first - 1);
            ev.event.coin = o.event_id.substr(second + 1);
            out.push_back(std::move(ev));
        }
        out[it->second].candidates.push_back({o.coin, scores[i], o.label});
    }
    return out;
}

BacktestReport run_strategy(std::span<const EventVotes> events, const CandleStore& candles,
                            const StrategyConfig& cfg) {
    cfg.validate();
    std::vector<Position> positions;
    std::vector<std::string> warnings;
    for (const auto& ev : events) {
        for (const auto& c : ev.candidates) {
            if (c.vote < cfg.threshold) continue;
            const CandleSeries* series = candles.find(c.coin, ev.event.exchange);
            const Candle* pump = series ? series->at(ev.event.pump_hour) : nullptr;
            if (pump == nullptr || !(pump->open > 0)) {
                warnings.push_back("unpriceable position " + c.coin + " at " +
                                   format_iso8601(ev.event.event_time) +
                                   ": no pump-hour candle");
                continue;
            }
            positions.push_back(
                make_position(c.coin, ev.event.event_time, c.vote, pump_gain(*pump), c.pumped, cfg));
        }
    }
    BacktestReport r = summarize(std::move(positions), cfg);
    r.warnings = std::move(warnings);
    return r;
}

void write_backtest_csv(std::ostream& out, const BacktestReport& report) {
    out << "coin,date,pumped,weight,invested,pump_gain,assumed_gain,gained\n";
    for (const auto& p : report.positions) {
        out << p.coin << ',' << format_iso8601(p.event_time) << ','
            << (p.was_pumped ? "TRUE" : "FALSE") << ',' << format_decimal(p.vote) << ','
            << format_decimal(p.invested) << ',' << format_decimal(p.pump_gain) << ','
            << format_decimal(p.assumed_gain) << ',' << format_decimal(p.gained) << '\n';
    }
    out << "TOTAL,,,," << format_decimal(report.total_invested) << ",,,"
        << format_decimal(report.total_gained) << '\n';
}

void write_backtest_summary(std::ostream& out, const BacktestReport& report,
                            const StrategyConfig& cfg) {
    nlohmann::ordered_json j;
    j["trades"] = report.positions.size();
    j["status"] = report.no_trades() ? "no trades" : "ok";
    j["threshold"] = cfg.threshold;
    j["baseline_qty"] = cfg.baseline_qty;
    j["gain_haircut"] = cfg.gain_haircut;
    j["fee_rate"] = cfg.fee_rate;
    j["total_invested"] = report.total_invested;
    j["total_gained"] = report.total_gained;
    j["return_ratio"] = report.return_ratio ? nlohmann::ordered_json(*report.return_ratio)
                                            : nlohmann::ordered_json();
    j["fee_drag"] = report.fee_drag;
    j["net_return_ratio"] = report.net_return_ratio
                                ? nlohmann::ordered_json(*report.net_return_ratio)
                                : nlohmann::ordered_json();
    j["warnings"] = report.warnings;
    out << j.dump(2) << '\n';
}

AdminProfit estimate_admin_profit(std::span<const Tick> ticks, EpochMillis pump_time) {
    std::optional<double> before;
    const Tick* first_after = nullptr;
    const Tick* peak = nullptr;
    for (const auto& t : ticks) {
        if (t.timestamp < pump_time) {
            before = t.price;  // ticks are time-ordered; the last one wins
        } else if (t.timestamp > pump_time) {
            if (first_after == nullptr) first_after = &t;
            if (peak == nullptr || t.price > peak->price) peak = &t;
        }
    }
    if (first_after == nullptr) throw DataError("admin profit: no ticks after the pump time");

    AdminProfit r;
    r.reference_price = before ? *before : first_after->price;
    r.peak_time = peak->timestamp;
    for (const auto& t : ticks) {
        if (t.timestamp <= pump_time || t.timestamp > peak->timestamp) continue;
        if (t.aggressor != Aggressor::Buy) continue;
        r.profit_btc += t.quantity * (t.price - r.reference_price);
        r.cost_basis_btc += t.quantity * r.reference_price;
    }
    if (r.cost_basis_btc > 0) r.return_ratio = r.profit_btc / r.cost_basis_btc;
    return r;
}

VolumeGap buy_sell_volume_gap(std::span<const Tick> ticks, EpochMillis from, EpochMillis to) {
    VolumeGap g;
    for (const auto& t : ticks) {
        if (t.timestamp < from || t.timestamp >= to) continue;
        if (t.aggressor == Aggressor::Buy) {
            g.buy_btc += t.quantity * t.price;
            g.buy_coin += t.quantity;
        } else {
            g.sell_btc += t.quantity * t.price;
            g.sell_coin += t.quantity;
        }
    }
    return g;
}

AggregateVolume aggregate_pump_volume(std::span<const PumpEvent> events,
                                      const CandleStore& candles) {
    AggregateVolume agg;
    for (const auto& e : events) {
        const CandleSeries* s = candles.find(e.coin, e.exchange);
        if (s == nullptr) {
            ++agg.events_skipped;
            continue;
        }
        auto pre = candles_between(*s, e.pump_hour - 3 * kHour, e.pump_hour);
        auto during = candles_between(*s, e.pump_hour, e.pump_hour + 3 * kHour);
        if (pre.empty() || during.empty()) {
            ++agg.events_skipped;
            continue;
        }
        PumpVolume v;
        for (const auto& c : pre) v.pre_pump_btc += c.volumeto;
        for (const auto& c : during) v.pump_btc += c.volumeto;
        auto& ex = agg.per_exchange[e.exchange];
        ex.pre_pump_btc += v.pre_pump_btc;
        ex.pump_btc += v.pump_btc;
        ++agg.events_used;
    }
    for (const auto& [name, v] : agg.per_exchange) {
        agg.total.pre_pump_btc += v.pre_pump_btc;
        agg.total.pump_btc += v.pump_btc;
    }
    return agg;
}

double estimate_market_depth(std::span<const PumpEvent> events, const TickStore& ticks) {
    double sum = 0.0;
    std::size_t counted = 0;
    for (const auto& e : events) {
        const TickSeries* s = ticks.find(e.coin, e.exchange);
        if (s == nullptr) continue;
        EpochMillis start = e.event_time * 1000;
        auto window = ticks_between(*s, start, start + kDepthWindowMillis);
        if (window.empty()) continue;
        for (const auto& t : window)
            if (t.aggressor == Aggressor::Buy) sum += t.quantity * t.price;
        ++counted;
    }
    if (counted == 0) throw DataError("market depth: no event has tick data");
    return sum / static_cast<double>(counted);
}

}  // namespace pnd
