#include "pnd/market_data.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

#include <nlohmann/json.hpp>

#include "pnd/csv.hpp"

namespace pnd {

namespace {

constexpr std::string_view kCandleHeader =
    "coin,exchange,timestamp,open,high,low,close,volumefrom,volumeto";
constexpr std::string_view kTickHeader = "coin,exchange,timestamp,price,quantity,aggressor";

[[noreturn]] void fail_at(std::size_t line, const std::string& what) {
    throw DataError("line " + std::to_string(line) + ": " + what);
}

double field_decimal(std::string_view text, std::size_t line, const char* name) {
    auto v = parse_decimal(text);
    if (!v) fail_at(line, std::string("field '") + name + "' is not a decimal: '" +
                              std::string(text) + "'");
    return *v;
}

void require_header(std::istream& in, std::string_view expected) {
    std::string header;
    if (!csv::read_line(in, header)) throw DataError("line 1: missing header");
    if (header != expected)
        throw DataError("line 1: expected header '" + std::string(expected) + "', got '" +
                        header + "'");
}

template <class Series>
std::vector<Series> flatten(std::map<MarketKey, Series>& groups) {
    std::vector<Series> out;
    out.reserve(groups.size());
    for (auto& [key, s] : groups) out.push_back(std::move(s));
    return out;
}

}  // namespace

const Candle* CandleSeries::at(EpochSeconds t) const {
    auto it = std::lower_bound(candles.begin(), candles.end(), t,
                               [](const Candle& c, EpochSeconds v) { return c.timestamp < v; });
    return it != candles.end() && it->timestamp == t ? &*it : nullptr;
}

CandleStore::CandleStore(std::vector<CandleSeries> series) {
    for (auto& s : series) add(std::move(s));
}

void CandleStore::add(CandleSeries series) {
    MarketKey key{series.coin, series.exchange};
    series_.insert_or_assign(std::move(key), std::move(series));
}

const CandleSeries* CandleStore::find(const std::string& coin, const std::string& exchange) const {
    auto it = series_.find(MarketKey{coin, exchange});
    return it == series_.end() ? nullptr : &it->second;
}

std::vector<const CandleSeries*> CandleStore::all() const {
    std::vector<const CandleSeries*> out;
    for (const auto& [key, s] : series_) out.push_back(&s);
    return out;
}

TickStore::TickStore(std::vector<TickSeries> series) {
    for (auto& s : series) add(std::move(s));
}

void TickStore::add(TickSeries series) {
    MarketKey key{series.coin, series.exchange};
    series_.insert_or_assign(std::move(key), std::move(series));
}

const TickSeries* TickStore::find(const std::string& coin, const std::string& exchange) const {
    auto it = series_.find(MarketKey{coin, exchange});
    return it == series_.end() ? nullptr : &it->second;
}

std::vector<const TickSeries*> TickStore::all() const {
    std::vector<const TickSeries*> out;
    for (const auto& [key, s] : series_) out.push_back(&s);
    return out;
}

std::vector<CandleSeries> parse_candles(std::istream& in) {
    require_header(in, kCandleHeader);
    std::map<MarketKey, CandleSeries> groups;
    std::map<MarketKey, std::vector<std::size_t>> lines;  // line numbers, for error reports
    std::string row;
    std::size_t line_no = 1;
    while (csv::read_line(in, row)) {
        ++line_no;
        if (row.empty()) continue;
        auto f = csv::split(row);
        if (f.size() != 9)
            fail_at(line_no, "expected 9 fields, got " + std::to_string(f.size()));
        if (f[0].empty()) fail_at(line_no, "field 'coin' is empty");
        if (f[1].empty()) fail_at(line_no, "field 'exchange' is empty");
        Candle c;
        try {
            c.timestamp = parse_iso8601(f[2]);
        } catch (const DataError& e) {
            fail_at(line_no, std::string("field 'timestamp': ") + e.what());
        }
        if (!is_hour_aligned(c.timestamp))
            fail_at(line_no, "field 'timestamp' is not aligned to a full hour");
        c.open = field_decimal(f[3], line_no, "open");
        c.high = field_decimal(f[4], line_no, "high");
        c.low = field_decimal(f[5], line_no, "low");
        c.close = field_decimal(f[6], line_no, "close");
        c.volumefrom = field_decimal(f[7], line_no, "volumefrom");
        c.volumeto = field_decimal(f[8], line_no, "volumeto");
        if (!(c.low <= c.open && c.open <= c.high && c.low <= c.close && c.close <= c.high))
            fail_at(line_no, "OHLC ordering violation (need low <= open,close <= high)");
        if (c.volumefrom < 0) fail_at(line_no, "field 'volumefrom' is negative");
        if (c.volumeto < 0) fail_at(line_no, "field 'volumeto' is negative");

        MarketKey key{std::string(f[0]), std::string(f[1])};
        auto& series = groups[key];
        if (series.coin.empty()) {
            series.coin = key.first;
            series.exchange = key.second;
        }
        series.candles.push_back(c);
        lines[key].push_back(line_no);
    }
    for (auto& [key, series] : groups) {
        auto& ln = lines[key];
        std::vector<std::size_t> order(series.candles.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return series.candles[a].timestamp < series.candles[b].timestamp;
        });
        std::vector<Candle> sorted;
        sorted.reserve(order.size());
        for (std::size_t k = 0; k < order.size(); ++k) {
            const Candle& c = series.candles[order[k]];
            if (!sorted.empty() && sorted.back().timestamp == c.timestamp)
                fail_at(ln[order[k]], "duplicate candle for (" + key.first + ", " + key.second +
                                          ", " + format_iso8601(c.timestamp) + ")");
            sorted.push_back(c);
        }
        series.candles = std::move(sorted);
    }
    return flatten(groups);
}

void write_candles(std::ostream& out, std::span<const CandleSeries> series) {
    out << kCandleHeader << '\n';
    for (const auto& s : series) {
        for (const auto& c : s.candles) {
            out << s.coin << ',' << s.exchange << ',' << format_iso8601(c.timestamp) << ','
                << format_decimal(c.open) << ',' << format_decimal(c.high) << ','
                << format_decimal(c.low) << ',' << format_decimal(c.close) << ','
                << format_decimal(c.volumefrom) << ',' << format_decimal(c.volumeto) << '\n';
        }
    }
}

std::vector<TickSeries> parse_ticks(std::istream& in) {
    require_header(in, kTickHeader);
    std::map<MarketKey, TickSeries> groups;
    std::string row;
    std::size_t line_no = 1;
    while (csv::read_line(in, row)) {
        ++line_no;
        if (row.empty()) continue;
        auto f = csv::split(row);
        if (f.size() != 6)
            fail_at(line_no, "expected 6 fields, got " + std::to_string(f.size()));
        if (f[0].empty() || f[1].empty()) fail_at(line_no, "coin and exchange must be non-empty");
        Tick t;
        try {
            t.timestamp = parse_iso8601_millis(f[2]);
        } catch (const DataError& e) {
            fail_at(line_no, std::string("field 'timestamp': ") + e.what());
        }
        t.price = field_decimal(f[3], line_no, "price");
        t.quantity = field_decimal(f[4], line_no, "quantity");
        if (!(t.price > 0)) fail_at(line_no, "field 'price' must be positive");
        if (!(t.quantity > 0)) fail_at(line_no, "field 'quantity' must be positive");
        if (f[5] == "buy") {
            t.aggressor = Aggressor::Buy;
        } else if (f[5] == "sell") {
            t.aggressor = Aggressor::Sell;
        } else {
            fail_at(line_no, "field 'aggressor' must be 'buy' or 'sell'");
        }
        MarketKey key{std::string(f[0]), std::string(f[1])};
        auto& series = groups[key];
        if (series.coin.empty()) {
            series.coin = key.first;
            series.exchange = key.second;
        }
        series.ticks.push_back(t);
    }
    for (auto& [key, s] : groups) {
        std::stable_sort(s.ticks.begin(), s.ticks.end(),
                         [](const Tick& a, const Tick& b) { return a.timestamp < b.timestamp; });
    }
    return flatten(groups);
}

void write_ticks(std::ostream& out, std::span<const TickSeries> series) {
    out << kTickHeader << '\n';
    for (const auto& s : series) {
        for (const auto& t : s.ticks) {
            out << s.coin << ',' << s.exchange << ',' << format_iso8601_millis(t.timestamp) << ','
                << format_decimal(t.price) << ',' << format_decimal(t.quantity) << ','
                << (t.aggressor == Aggressor::Buy ? "buy" : "sell") << '\n';
        }
    }
}

std::vector<CoinMeta> parse_coin_meta(std::istream& in) {
    std::vector<CoinMeta> out;
    std::string row;
    std::size_t line_no = 0;
    while (csv::read_line(in, row)) {
        ++line_no;
        if (row.empty()) continue;
        try {
            auto j = nlohmann::json::parse(row);
            CoinMeta m;
            m.coin = j.at("coin").get<std::string>();
            m.cap_btc = j.at("cap_btc").get<double>();
            m.launch_time = parse_iso8601(j.at("launch_time").get<std::string>());
            m.rating = j.at("rating").get<int>();
            m.withdraw_fee = j.value("withdraw_fee", 0.0);
            m.min_withdraw = j.value("min_withdraw", 0.0);
            m.max_withdraw = j.value("max_withdraw", 0.0);
            m.min_base_trade = j.value("min_base_trade", 0.0);
            for (const auto& ex : j.value("listed_on", nlohmann::json::array()))
                m.listed_on.insert(ex.get<std::string>());
            if (m.coin.empty()) fail_at(line_no, "coin must be non-empty");
            if (m.cap_btc < 0) fail_at(line_no, "cap_btc must be >= 0");
            if (m.rating < 0 || m.rating > 5) fail_at(line_no, "rating must be within 0..5");
            out.push_back(std::move(m));
        } catch (const nlohmann::json::exception& e) {
            fail_at(line_no, std::string("invalid coin metadata: ") + e.what());
        } catch (const DataError& e) {
            if (std::string_view(e.what()).starts_with("line ")) throw;
            fail_at(line_no, e.what());
        }
    }
    return out;
}

void write_coin_meta(std::ostream& out, std::span<const CoinMeta> metas) {
    for (const auto& m : metas) {
        nlohmann::ordered_json j;
        j["coin"] = m.coin;
        j["cap_btc"] = m.cap_btc;
        j["launch_time"] = format_iso8601(m.launch_time);
        j["rating"] = m.rating;
        j["withdraw_fee"] = m.withdraw_fee;
        j["min_withdraw"] = m.min_withdraw;
        j["max_withdraw"] = m.max_withdraw;
        j["min_base_trade"] = m.min_base_trade;
        j["listed_on"] = std::vector<std::string>(m.listed_on.begin(), m.listed_on.end());
        out << j.dump() << '\n';
    }
}

std::int64_t ValidationReport::missing_hours() const {
    std::int64_t total = 0;
    for (const auto& g : gaps) total += g.hours;
    return total;
}

ValidationReport validate_series(const CandleSeries& series) {
    ValidationReport r;
    r.coin = series.coin;
    r.exchange = series.exchange;
    r.candle_count = series.candles.size();
    const auto& cs = series.candles;
    if (cs.empty()) return r;
    r.span_hours = (cs.back().timestamp - cs.front().timestamp) / kHour + 1;

    for (std::size_t i = 0; i < cs.size(); ++i) {
        const Candle& c = cs[i];
        if (!is_hour_aligned(c.timestamp))
            r.breaches.push_back({c.timestamp, "timestamp not hour-aligned"});
        if (!(c.low <= c.open && c.open <= c.high && c.low <= c.close && c.close <= c.high))
            r.breaches.push_back({c.timestamp, "OHLC ordering violation"});
        if (c.volumefrom < 0 || c.volumeto < 0)
            r.breaches.push_back({c.timestamp, "negative volume"});
        if (i > 0) {
            EpochSeconds prev = cs[i - 1].timestamp;
            if (c.timestamp <= prev) {
                r.breaches.push_back({c.timestamp, "timestamps not strictly increasing"});
            } else if (c.timestamp - prev > kHour) {
                r.gaps.push_back({prev + kHour, (c.timestamp - prev) / kHour - 1});
            }
        }
    }

    // Runs of zero-volume hours among consecutive present candles.
    std::size_t i = 0;
    while (i < cs.size()) {
        if (cs[i].volumeto != 0.0) {
            ++i;
            continue;
        }
        std::size_t j = i + 1;
        while (j < cs.size() && cs[j].volumeto == 0.0 &&
               cs[j].timestamp == cs[j - 1].timestamp + kHour)
            ++j;
        r.zero_volume_runs.push_back({cs[i].timestamp, static_cast<std::int64_t>(j - i)});
        i = j;
    }
    return r;
}

std::span<const Candle> candles_between(const CandleSeries& series, EpochSeconds from,
                                        EpochSeconds to) {
    const auto& cs = series.candles;
    if (to <= from) return {};
    auto lo = std::lower_bound(cs.begin(), cs.end(), from,
                               [](const Candle& c, EpochSeconds v) { return c.timestamp < v; });
    auto hi = std::lower_bound(lo, cs.end(), to,
                               [](const Candle& c, EpochSeconds v) { return c.timestamp < v; });
    return {lo, hi};
}

std::span<const Candle> window_slice(const CandleSeries& series, EpochSeconds end, int hours) {
    if (hours <= 0) return {};
    return candles_between(series, end - static_cast<EpochSeconds>(hours) * kHour, end);
}

std::span<const Tick> ticks_between(const TickSeries& series, EpochMillis from, EpochMillis to) {
    const auto& ts = series.ticks;
    if (to <= from) return {};
    auto lo = std::lower_bound(ts.begin(), ts.end(), from,
                               [](const Tick& t, EpochMillis v) { return t.timestamp < v; });
    auto hi = std::lower_bound(lo, ts.end(), to,
                               [](const Tick& t, EpochMillis v) { return t.timestamp < v; });
    return {lo, hi};
}

}  // namespace pnd
