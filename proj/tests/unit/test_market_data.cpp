#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "pnd/market_data.hpp"

using namespace pnd;
using pnd::test::kT0;

namespace {

const char* kHeader = "coin,exchange,timestamp,open,high,low,close,volumefrom,volumeto\n";

std::string candle_row(const std::string& coin, EpochSeconds t, double o, double h, double l,
                       double c, double vf, double vt) {
    return coin + ",cryptopia," + format_iso8601(t) + "," + format_decimal(o) + "," +
           format_decimal(h) + "," + format_decimal(l) + "," + format_decimal(c) + "," +
           format_decimal(vf) + "," + format_decimal(vt) + "\n";
}

std::string error_of(const std::string& text) {
    std::istringstream in(text);
    try {
        parse_candles(in);
    } catch (const DataError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("iso8601 and decimal helpers") {
    CHECK(parse_iso8601("2018-11-01T00:00:00Z") == kT0);
    CHECK(format_iso8601(kT0 + 19 * kHour + 1804) == "2018-11-01T19:30:04Z");
    CHECK(parse_iso8601_millis("2018-11-01T00:00:00.250Z") == kT0 * 1000 + 250);
    CHECK(parse_iso8601_millis("2018-11-01T00:00:01Z") == kT0 * 1000 + 1000);
    CHECK(format_iso8601_millis(kT0 * 1000 + 7) == "2018-11-01T00:00:00.007Z");
    CHECK_THROWS_AS(parse_iso8601("2018-11-01 00:00:00"), DataError);
    CHECK_THROWS_AS(parse_iso8601("2018-02-30T00:00:00Z"), DataError);
    CHECK(floor_hour(kT0 + 1799) == kT0);
    CHECK(floor_hour(-1) == -kHour);

    CHECK(parse_decimal("35e-8") == 35e-8);
    CHECK_FALSE(parse_decimal("abc").has_value());
    CHECK_FALSE(parse_decimal("1.0x").has_value());
    CHECK_FALSE(parse_decimal("").has_value());
    Rng rng(3);
    for (int i = 0; i < 1000; ++i) {
        double x = std::exp(rng.uniform(-40.0, 20.0)) * (rng.uniform() < 0.5 ? -1 : 1);
        CHECK(*parse_decimal(format_decimal(x)) == x);
    }
}

TEST_CASE("parse_candles: one row") {
    std::istringstream in(std::string(kHeader) + candle_row("BVB", kT0, 35e-8, 115e-8, 30e-8, 50e-8, 1000, 0.0005));
    auto series = parse_candles(in);
    REQUIRE(series.size() == 1);
    REQUIRE(series[0].candles.size() == 1);
    CHECK(series[0].coin == "BVB");
    CHECK(series[0].candles[0].high == 115e-8);
}

TEST_CASE("parse_candles: errors name the line") {
    std::string ok = candle_row("A", kT0, 1, 2, 0.5, 1.5, 1, 1);
    CHECK(error_of(std::string(kHeader) + ok + candle_row("A", kT0 + kHour, 1, 0.4, 0.5, 0.45, 1, 1))
              .find("line 3: OHLC") != std::string::npos);
    CHECK(error_of(std::string(kHeader) + ok + ok).find("line 3: duplicate") != std::string::npos);
    CHECK(error_of(std::string(kHeader) + "A,cryptopia,2018-11-01T00:30:00Z,1,1,1,1,1,1\n")
              .find("line 2: field 'timestamp' is not aligned") != std::string::npos);
    CHECK(error_of(std::string(kHeader) + "A,cryptopia,2018-11-01T00:00:00Z,1,x,1,1,1,1\n")
              .find("field 'high'") != std::string::npos);
    CHECK(error_of(std::string(kHeader) + "A,cryptopia,2018-11-01T00:00:00Z,1,1,1,1,1\n")
              .find("expected 9 fields") != std::string::npos);
    CHECK(error_of(std::string(kHeader) + "A,cryptopia,2018-11-01T00:00:00Z,1,1,1,1,-1,1\n")
              .find("negative") != std::string::npos);
    CHECK(error_of("").find("missing header") != std::string::npos);
    CHECK(error_of("coin,open\n").find("expected header") != std::string::npos);
}

TEST_CASE("parse_candles: shuffled rows match a sort-and-group oracle") {
    Rng rng(11);
    std::vector<std::string> rows;
    std::map<std::string, std::vector<Candle>> oracle;
    for (std::string coin : {"ZZZ", "AAA", "MMM"}) {
        auto s = test::random_series(rng, coin, kT0, 72);
        for (const auto& c : s.candles) {
            rows.push_back(candle_row(coin, c.timestamp, c.open, c.high, c.low, c.close,
                                      c.volumefrom, c.volumeto));
            oracle[coin].push_back(c);
        }
    }
    for (std::size_t i = rows.size(); i > 1; --i) std::swap(rows[i - 1], rows[rng.below(i)]);
    std::string text = kHeader;
    for (const auto& r : rows) text += r;
    std::istringstream in(text);
    auto series = parse_candles(in);
    REQUIRE(series.size() == 3);
    std::size_t k = 0;
    for (auto& [coin, candles] : oracle) {  // std::map iterates coins in order
        CHECK(series[k].coin == coin);
        CHECK(series[k].candles == candles);
        ++k;
    }
}

TEST_CASE("candles and ticks round-trip bit-exactly") {
    Rng rng(5);
    std::vector<CandleSeries> series;
    for (std::string coin : {"AAA", "BBB"}) series.push_back(test::random_series(rng, coin, kT0, 50));
    std::ostringstream out;
    write_candles(out, series);
    std::istringstream in(out.str());
    CHECK(parse_candles(in) == series);

    TickSeries ts{"AAA", "cryptopia", {}};
    for (int i = 0; i < 40; ++i)
        ts.ticks.push_back({kT0 * 1000 + i * 137, rng.uniform(1e-8, 1e-6), rng.uniform(1.0, 1e4),
                            i % 3 ? Aggressor::Buy : Aggressor::Sell});
    std::vector<TickSeries> tick_series{ts};
    std::ostringstream tout;
    write_ticks(tout, tick_series);
    std::istringstream tin(tout.str());
    CHECK(parse_ticks(tin) == tick_series);
}

TEST_CASE("parse_ticks rejects bad rows") {
    auto err = [](const std::string& body) {
        std::istringstream in("coin,exchange,timestamp,price,quantity,aggressor\n" + body);
        try {
            parse_ticks(in);
        } catch (const DataError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK(err("A,x,2018-11-01T00:00:00.000Z,0,1,buy\n").find("price") != std::string::npos);
    CHECK(err("A,x,2018-11-01T00:00:00.000Z,1,0,buy\n").find("quantity") != std::string::npos);
    CHECK(err("A,x,2018-11-01T00:00:00.000Z,1,1,hold\n").find("aggressor") != std::string::npos);
    CHECK(err("A,x,2018-11-01T00:00:00.000Z,1,1,buy\n").empty());
}

TEST_CASE("coin metadata round-trip and checks") {
    CoinMeta m;
    m.coin = "TUSD";
    m.cap_btc = 27600;
    m.launch_time = kT0 - 1000 * kHour;
    m.rating = 4;
    m.withdraw_fee = 0.01;
    m.listed_on = {"cryptopia", "yobit"};
    std::vector<CoinMeta> metas{m};
    std::ostringstream out;
    write_coin_meta(out, metas);
    std::istringstream in(out.str());
    CHECK(parse_coin_meta(in) == metas);

    std::istringstream bad(R"({"coin":"X","cap_btc":1,"launch_time":"2018-01-01T00:00:00Z","rating":6})");
    CHECK_THROWS_WITH_AS(parse_coin_meta(bad), doctest::Contains("rating"), DataError);
}

TEST_CASE("validate_series") {
    auto s = test::make_series("A", kT0, 48, [](int) { return 1e-6; });
    CHECK(validate_series(s).gaps.empty());
    CHECK(validate_series(s).span_hours == 48);

    auto gapped = s;
    gapped.candles.erase(gapped.candles.begin() + 10, gapped.candles.begin() + 13);
    auto r = validate_series(gapped);
    REQUIRE(r.gaps.size() == 1);
    CHECK(r.gaps[0] == Gap{kT0 + 10 * kHour, 3});
    CHECK(r.missing_hours() == 3);

    auto zero = s;
    for (int i = 5; i < 9; ++i) zero.candles[static_cast<std::size_t>(i)].volumeto = 0;
    auto zr = validate_series(zero);
    REQUIRE(zr.zero_volume_runs.size() == 1);
    CHECK(zr.zero_volume_runs[0] == ZeroVolumeRun{kT0 + 5 * kHour, 4});
}

TEST_CASE("validate_series: random deletions match a set-difference oracle") {
    Rng rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        auto s = test::make_series("A", kT0, 200, [](int) { return 1e-6; });
        std::vector<Candle> kept;
        for (std::size_t i = 0; i < s.candles.size(); ++i)
            if (i == 0 || i + 1 == s.candles.size() || rng.uniform() >= 0.1) kept.push_back(s.candles[i]);
        s.candles = kept;
        auto r = validate_series(s);

        std::set<EpochSeconds> present, missing;
        for (const auto& c : s.candles) present.insert(c.timestamp);
        for (EpochSeconds t = kT0; t < kT0 + 200 * kHour; t += kHour)
            if (!present.count(t)) missing.insert(t);
        std::set<EpochSeconds> reported;
        for (const auto& g : r.gaps)
            for (std::int64_t h = 0; h < g.hours; ++h) reported.insert(g.start + h * kHour);
        CHECK(reported == missing);
        CHECK(r.missing_hours() == r.span_hours - static_cast<std::int64_t>(r.candle_count));
    }
}

TEST_CASE("window_slice") {
    auto s = test::make_series("A", kT0, 100, [](int i) { return 1e-6 * (1 + i); });
    const EpochSeconds end = kT0 + 80 * kHour;
    auto one = window_slice(s, end, 1);
    REQUIRE(one.size() == 1);
    CHECK(one[0].timestamp == end - kHour);
    CHECK(window_slice(s, end, 3).size() == 3);
    CHECK(window_slice(s, kT0, 5).empty());

    // 72h window with 5 known gaps: filter oracle.
    auto gapped = s;
    std::set<EpochSeconds> removed;
    for (int h : {9, 20, 21, 50, 70}) removed.insert(kT0 + h * kHour);
    std::erase_if(gapped.candles, [&](const Candle& c) { return removed.count(c.timestamp) > 0; });
    auto w = window_slice(gapped, end, 72);
    std::vector<Candle> oracle;
    for (const auto& c : gapped.candles)
        if (c.timestamp >= end - 72 * kHour && c.timestamp < end) oracle.push_back(c);
    CHECK(w.size() == 67);
    CHECK(std::equal(w.begin(), w.end(), oracle.begin(), oracle.end()));
    for (const auto& c : w) CHECK(c.timestamp != end);
}
