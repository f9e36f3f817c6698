#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "fixtures.hpp"
#include "pnd/events.hpp"
#include "pnd/features.hpp"

using namespace pnd;
using pnd::test::kT0;

namespace {

const EpochSeconds kPump = kT0 + 100 * kHour;

PumpEvent event_for(const std::string& coin, EpochSeconds pump_hour, EpochSeconds offset = 1800) {
    PumpEvent e;
    e.coin = coin;
    e.exchange = "cryptopia";
    e.event_time = pump_hour + offset;
    e.pump_hour = pump_hour;
    e.channels = {"ch"};
    return e;
}

CoinMeta meta_for(const std::string& coin) {
    CoinMeta m;
    m.coin = coin;
    m.cap_btc = 120.0;
    m.launch_time = kT0 - 500 * kHour;
    m.rating = 3;
    m.withdraw_fee = 0.01;
    m.min_withdraw = 0.1;
    m.max_withdraw = 1000;
    m.min_base_trade = 0.0005;
    m.listed_on = {"cryptopia"};
    return m;
}

double sample_sd(const std::vector<double>& v) {
    double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

// Spreadsheet-style recomputation on a gapless series: column k holds the
// candle starting k hours before the pump hour.
FeatureVector oracle_features(const CandleSeries& s, const CoinMeta& m, const PumpEvent& e,
                              int prior_pumps) {
    auto col = [&](int k) -> const Candle& {
        return s.candles[static_cast<std::size_t>((e.pump_hour - k * kHour - s.candles[0].timestamp) / kHour)];
    };
    FeatureVector fv;
    std::vector<double> out;
    out.push_back(m.cap_btc);
    std::vector<double> ret, vf, vt;
    for (int x : {1, 3, 12, 24, 36, 48, 60, 72}) {
        ret.push_back(std::log(col(1).open / col(x + 1).open));
        double sf = 0, st = 0;
        for (int k = 2; k <= x + 1; ++k) {
            sf += col(k).volumefrom;
            st += col(k).volumeto;
        }
        vf.push_back(sf);
        vt.push_back(st);
    }
    std::vector<double> rv, vfv, vtv;
    for (int y : {3, 12, 24, 36, 48, 60, 72}) {
        std::vector<double> r, a, b;
        for (int k = y; k >= 1; --k) r.push_back(std::log(col(k).open / col(k + 1).open));
        for (int k = 2; k <= y + 1; ++k) {
            a.push_back(col(k).volumefrom);
            b.push_back(col(k).volumeto);
        }
        rv.push_back(sample_sd(r));
        vfv.push_back(sample_sd(a));
        vtv.push_back(sample_sd(b));
    }
    for (auto* block : {&ret, &vf, &vt, &rv, &vfv, &vtv}) out.insert(out.end(), block->begin(), block->end());
    out.push_back(col(1).open);
    out.push_back(static_cast<double>(e.pump_hour - m.launch_time) / 3600.0);
    out.push_back(prior_pumps);
    out.push_back(m.rating);
    out.push_back(m.withdraw_fee);
    out.push_back(m.min_withdraw);
    out.push_back(m.max_withdraw);
    out.push_back(m.min_base_trade);
    REQUIRE(out.size() == kFeatureCount);
    for (std::size_t i = 0; i < out.size(); ++i) fv.set(i, out[i]);
    return fv;
}

}  // namespace

TEST_CASE("feature names: 54 in table order") {
    const auto& n = feature_names();
    CHECK(n.size() == 54);
    CHECK(n[0] == "caps");
    CHECK(n[1] == "return1h");
    CHECK(n[8] == "return72h");
    CHECK(n[9] == "volumefrom1h");
    CHECK(n[17] == "volumeto1h");
    CHECK(n[25] == "returnvola3h");
    CHECK(n[32] == "volumefromvola3h");
    CHECK(n[39] == "volumetovola3h");
    CHECK(n[45] == "volumetovola72h");
    CHECK(n[46] == "lastprice");
    CHECK(n[53] == "MinBaseTrade");
    CHECK(feature_index("pumpedtimes") == feature::kPumpedTimes);
    CHECK_FALSE(feature_index("nope").has_value());
}

TEST_CASE("log_return") {
    auto flat = test::make_series("A", kT0, 100, [](int) { return 5e-7; });
    for (int x : kReturnHorizons) CHECK(log_return(flat, x, kPump - kHour) == 0.0);

    auto s = test::make_series("A", kT0, 100, [](int) { return 35e-8; });
    s.candles[98].open = 70e-8;  // open(t0 - 1h); open(t0 - 2h) stays 35e-8
    const EpochSeconds t0 = kT0 + 99 * kHour;
    auto r = log_return(s, 1, t0);
    REQUIRE(r.has_value());
    CHECK(*r == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(*r == doctest::Approx(0.6931).epsilon(1e-4));

    auto gapped = s;
    gapped.candles.erase(gapped.candles.begin() + 97);  // t0 - 2h
    CHECK_FALSE(log_return(gapped, 1, t0).has_value());
    CHECK(log_return(gapped, 3, t0).has_value());
}

TEST_CASE("window_volume") {
    CandleSeries s{"A", "cryptopia", {}};
    const EpochSeconds t0 = kT0 + 10 * kHour;
    double v[3] = {0.1, 0.2, 0.3};
    for (int k = 0; k < 3; ++k) {
        Candle c = test::flat_candle(t0 - (4 - k) * kHour, 1e-6, v[k]);
        s.candles.push_back(c);
    }
    s.candles.push_back(test::flat_candle(t0 - kHour, 1e-6, 100.0));  // outside the window
    CHECK(*window_volume(s, 3, t0, VolumeBase::Btc) == doctest::Approx(0.6));
    CHECK_FALSE(window_volume(s, 1, kT0, VolumeBase::Btc).has_value());

    // Gapped 72h window equals filter-and-sum.
    Rng rng(2);
    auto g = test::random_series(rng, "B", kT0, 100);
    std::erase_if(g.candles, [&](const Candle&) { return rng.uniform() < 0.2; });
    double oracle = 0;
    for (const auto& c : g.candles)
        if (c.timestamp >= kPump - 73 * kHour && c.timestamp < kPump - kHour) oracle += c.volumefrom;
    auto got = window_volume(g, 72, kPump, VolumeBase::Coin);
    REQUIRE(got.has_value());
    CHECK(*got == doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("window_volatility") {
    auto flat = test::make_series("A", kT0, 100, [](int) { return 1e-6; });
    for (auto& c : flat.candles) c.volumeto = 2.0;
    CHECK(*window_volatility(flat, 12, kPump - kHour, VolatilityKind::VolumeTo) == 0.0);

    // Opens 1, 1, 2, 1 over t0-4h..t0-1h give returns {0, ln2, -ln2}.
    const double opens[4] = {1e-6, 1e-6, 2e-6, 1e-6};
    CandleSeries s{"A", "cryptopia", {}};
    const EpochSeconds t0 = kT0 + 10 * kHour;
    for (int k = 0; k < 4; ++k) s.candles.push_back(test::flat_candle(t0 - (4 - k) * kHour, opens[k]));
    double l2 = std::log(2.0);
    double expected = std::sqrt((0.0 + l2 * l2 + l2 * l2) / 2.0);  // mean is 0
    CHECK(*window_volatility(s, 3, t0, VolatilityKind::Return) == doctest::Approx(expected).epsilon(1e-14));

    CandleSeries one{"A", "cryptopia", {test::flat_candle(t0 - 2 * kHour, 1e-6)}};
    CHECK_FALSE(window_volatility(one, 3, t0, VolatilityKind::VolumeTo).has_value());
    CHECK_FALSE(window_volatility(one, 3, t0, VolatilityKind::Return).has_value());
}

TEST_CASE("build_feature_vector matches the spreadsheet oracle on gapless history") {
    Rng rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        auto s = test::random_series(rng, "A", kT0, 100);
        auto m = meta_for("A");
        m.cap_btc = rng.uniform(1, 30000);
        auto e = event_for("A", kPump);
        std::vector<PumpEvent> history{event_for("A", kPump - 90 * kHour), event_for("A", kPump),
                                       event_for("B", kPump - 10 * kHour)};
        auto fv = build_feature_vector(m, e, &s, history);
        auto oracle = oracle_features(s, m, e, 1);
        CHECK(fv.present.all());
        for (std::size_t i = 0; i < kFeatureCount; ++i) {
            INFO(feature_names()[i]);
            CHECK(fv.values[i] == doctest::Approx(oracle.values[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("build_feature_vector edge cases") {
    auto m = meta_for("TUSD");
    m.cap_btc = 27600;
    m.launch_time = kPump;
    auto e = event_for("TUSD", kPump);
    auto fv = build_feature_vector(m, e, nullptr, {});
    CHECK(fv.get(feature::kCaps) == 27600.0);
    CHECK(fv.get(feature::kAge) == 0.0);
    CHECK(fv.get(feature::kPumpedTimes) == 0.0);
    CHECK_FALSE(fv.get(feature::kReturn).has_value());
    CHECK_FALSE(fv.get(feature::kLastPrice).has_value());

    m.launch_time = kPump + kHour;
    CHECK_FALSE(build_feature_vector(m, e, nullptr, {}).get(feature::kAge).has_value());
}

TEST_CASE("feature properties: additivity and price scaling") {
    Rng rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        auto s = test::random_series(rng, "A", kT0, 100);
        // return over a+b hours = return(a) at t + return(b) at t - a.
        for (auto [a, b] : {std::pair{1, 3}, std::pair{12, 24}, std::pair{24, 48}}) {
            double whole = std::log(s.at(kPump - kHour)->open / s.at(kPump - (a + b + 1) * kHour)->open);
            double parts = *log_return(s, a, kPump) + *log_return(s, b, kPump - a * kHour);
            CHECK(whole == doctest::Approx(parts).epsilon(1e-12));
        }
        auto scaled = s;
        const double k = 37.5;
        for (auto& c : scaled.candles) {
            c.open *= k;
            c.high *= k;
            c.low *= k;
            c.close *= k;
        }
        auto m = meta_for("A");
        auto e = event_for("A", kPump);
        auto f1 = build_feature_vector(m, e, &s, {});
        auto f2 = build_feature_vector(m, e, &scaled, {});
        for (std::size_t i = 0; i < 8; ++i)
            CHECK(f2.values[feature::kReturn + i] == doctest::Approx(f1.values[feature::kReturn + i]).epsilon(1e-12));
        for (std::size_t i = 0; i < 7; ++i)
            CHECK(f2.values[feature::kReturnVola + i] ==
                  doctest::Approx(f1.values[feature::kReturnVola + i]).epsilon(1e-10));
        CHECK(f2.values[feature::kLastPrice] == doctest::Approx(k * f1.values[feature::kLastPrice]));
        for (std::size_t i = feature::kVolumeFrom; i < feature::kReturnVola; ++i) CHECK(f1.values[i] >= 0);
    }
}

TEST_CASE("build_dataset") {
    std::vector<CoinMeta> metas;
    for (std::string c : {"A", "B", "C"}) metas.push_back(meta_for(c));
    CandleStore store;
    Rng rng(1);
    for (std::string c : {"A", "B", "C"}) store.add(test::random_series(rng, c, kT0, 200));

    std::vector<PumpEvent> events{event_for("B", kPump)};
    std::vector<std::vector<CoinMeta>> universe{metas};
    auto ds = build_dataset(events, universe, store);
    REQUIRE(ds.size() == 3);
    CHECK(ds.positives() == 1);
    CHECK(ds.observations[1].coin == "B");
    CHECK(ds.observations[1].label);

    // Two events sharing a coin: event-specific features.
    events.push_back(event_for("C", kPump + 50 * kHour));
    universe.push_back(metas);
    auto ds2 = build_dataset(events, universe, store);
    CHECK(ds2.size() == 6);
    CHECK(ds2.positives() == 2);
    CHECK(ds2.observations[0].coin == ds2.observations[3].coin);
    CHECK(ds2.observations[0].features != ds2.observations[3].features);

    // Pumped coin without data: whole event dropped and reported.
    events.push_back(event_for("D", kPump + 60 * kHour));
    auto with_d = metas;
    with_d.push_back(meta_for("D"));
    universe.push_back(with_d);
    DatasetReport report;
    auto ds3 = build_dataset(events, universe, store, &report);
    CHECK(ds3.size() == 6);
    REQUIRE(report.dropped.size() == 1);
    CHECK(report.dropped[0].event_id == make_event_id(events[2]));
    CHECK(report.candidates_per_event.size() == 2);
}

TEST_CASE("build_dataset: counting oracle and thread independence") {
    Rng rng(33);
    std::vector<CoinMeta> metas;
    CandleStore store;
    for (int i = 0; i < 50; ++i) {
        auto name = "K" + std::to_string(i);
        auto m = meta_for(name);
        m.launch_time = kT0 + static_cast<EpochSeconds>(rng.below(400)) * kHour - 200 * kHour;
        if (i % 9 == 0) m.listed_on = {"yobit"};
        metas.push_back(m);
        store.add(test::random_series(rng, name, kT0, 400));
    }
    std::vector<PumpEvent> events;
    std::vector<std::vector<CoinMeta>> universe;
    std::size_t expected_total = 0, expected_events = 0;
    for (int k = 0; k < 10; ++k) {
        auto e = event_for("K" + std::to_string(1 + k * 4), kT0 + (100 + k * 25) * kHour);
        events.push_back(e);
        universe.push_back(universe_for(e, metas));
        // Events whose pumped coin is not a candidate are dropped whole.
        bool listed = std::any_of(universe.back().begin(), universe.back().end(),
                                  [&](const CoinMeta& m) { return m.coin == e.coin; });
        if (listed) {
            expected_total += universe.back().size();
            ++expected_events;
        }
        for (const auto& m : universe.back()) {
            CHECK(m.listed_on.count("cryptopia"));
            CHECK(m.launch_time <= e.pump_hour);
        }
    }
    auto ds = build_dataset(events, universe, store, nullptr, 1);
    CHECK(expected_events >= 5);
    CHECK(ds.positives() == expected_events);
    CHECK(ds.size() == expected_total);
    auto ds4 = build_dataset(events, universe, store, nullptr, 4);
    CHECK(ds4.observations == ds.observations);
}

TEST_CASE("chrono_split and dataset CSV") {
    Dataset ds;
    for (int k = 0; k < 6; ++k) {
        Observation o;
        o.event_time = kT0 + k * 24 * kHour;
        o.event_id = format_iso8601(o.event_time) + "/cryptopia/A";
        o.coin = "A";
        o.label = k % 2 == 0;
        o.features.set(0, k * 1.5);
        if (k != 3) o.features.set(53, 0.25);
        ds.observations.push_back(o);
    }
    auto parts = chrono_split(ds, kT0 + 48 * kHour, kT0 + 96 * kHour);
    CHECK(parts[0].size() == 2);
    CHECK(parts[1].size() == 2);
    CHECK(parts[2].size() == 2);
    CHECK(parts[0].split_tag == SplitTag::Train);
    CHECK(parts[2].split_tag == SplitTag::Test);
    CHECK_THROWS_AS(chrono_split(ds, kT0 - kHour, kT0 + 96 * kHour), DataError);
    CHECK_THROWS_AS(chrono_split(ds, kT0 + 96 * kHour, kT0), UsageError);

    std::ostringstream out;
    write_dataset(out, ds);
    std::string text = out.str();
    auto header = text.substr(0, text.find('\n'));
    CHECK(std::count(header.begin(), header.end(), ',') == 56);
    std::istringstream in(text);
    auto back = read_dataset(in);
    CHECK(back.observations == ds.observations);

    std::string tampered = text;
    tampered.replace(tampered.find("return1h"), 8, "return2h");
    std::istringstream bad(tampered);
    CHECK_THROWS_AS(read_dataset(bad), DataError);
}

TEST_CASE("rank_split_bounds") {
    std::vector<PumpEvent> events;
    for (int k = 0; k < 10; ++k) {
        PumpEvent e;
        e.coin = "A";
        e.exchange = "cryptopia";
        e.event_time = kT0 + (9 - k) * kHour;
        events.push_back(e);
    }
    auto [a, b] = rank_split_bounds(events);
    CHECK(a == kT0 + 6 * kHour);
    CHECK(b == kT0 + 8 * kHour);
    events.resize(3);
    auto [c, d] = rank_split_bounds(events);
    CHECK(c < d);
    events.resize(2);
    CHECK_THROWS_AS(rank_split_bounds(events), DataError);
}
