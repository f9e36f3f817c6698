#pragma once

#include <cmath>
#include <vector>

#include "pnd/common.hpp"
#include "pnd/market_data.hpp"
#include "pnd/rng.hpp"

namespace pnd::test {

inline constexpr EpochSeconds kT0 = 1541030400;  // 2018-11-01T00:00:00Z

inline Candle flat_candle(EpochSeconds t, double price, double volume_btc = 1.0) {
    return {t, price, price, price, price, volume_btc / price, volume_btc};
}

// Gapless series of `hours` candles from `start`, opens given by price(i).
template <class PriceFn>
CandleSeries make_series(const std::string& coin, EpochSeconds start, int hours, PriceFn price,
                         double volume_btc = 1.0) {
    CandleSeries s;
    s.coin = coin;
    s.exchange = "cryptopia";
    for (int i = 0; i < hours; ++i) {
        double o = price(i);
        double c = price(i + 1);
        Candle k;
        k.timestamp = start + i * kHour;
        k.open = o;
        k.close = c;
        k.high = std::max(o, c) * 1.01;
        k.low = std::min(o, c) * 0.99;
        k.volumeto = volume_btc * (1.0 + 0.1 * (i % 7));
        k.volumefrom = k.volumeto / o;
        s.candles.push_back(k);
    }
    return s;
}

// Random-walk series with valid OHLC, for property tests.
inline CandleSeries random_series(Rng& rng, const std::string& coin, EpochSeconds start, int hours) {
    std::vector<double> opens{std::exp(rng.uniform(std::log(1e-7), std::log(1e-3)))};
    for (int i = 0; i < hours; ++i) opens.push_back(opens.back() * std::exp(0.05 * rng.normal()));
    auto s = make_series(coin, start, hours, [&](int i) { return opens[static_cast<std::size_t>(i)]; });
    for (auto& c : s.candles) {
        c.volumeto = std::exp(rng.normal(-2.0, 1.0));
        c.volumefrom = c.volumeto / c.open;
    }
    return s;
}

}  // namespace pnd::test
