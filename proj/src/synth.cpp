#include "pnd/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <tuple>

#include <nlohmann/json.hpp>

#include "pnd/parallel.hpp"

namespace pnd {

namespace {

// Stream ids; coin series use their own index directly.
constexpr std::uint64_t kUniverseStream = 1ULL << 40;
constexpr std::uint64_t kPlanStream = (1ULL << 40) + 1;
constexpr std::uint64_t kEventStreamBase = 1ULL << 41;
constexpr std::uint64_t kGapStreamBase = 1ULL << 42;

constexpr std::size_t kChannelPool = 20;

std::string ticker(std::size_t index) {
    std::string s = "X";
    std::string letters;
    for (int k = 0; k < 3; ++k) {
        letters.insert(letters.begin(), static_cast<char>('A' + index % 26));
        index /= 26;
    }
    return s + letters + (index > 0 ? std::to_string(index) : "");
}

void scale_prices(Candle& c, double factor) {
    c.open *= factor;
    c.high *= factor;
    c.low *= factor;
    c.close *= factor;
    c.volumeto *= factor;
}

std::size_t index_of(const CandleSeries& series, EpochSeconds t) {
    if (series.candles.empty()) throw DataError("cannot plant into an empty series");
    EpochSeconds first = series.candles.front().timestamp;
    if (t < first) throw DataError("pump hour precedes the series");
    auto i = static_cast<std::size_t>((t - first) / kHour);
    if (i >= series.candles.size() || series.candles[i].timestamp != t)
        throw DataError("series is not gapless around " + format_iso8601(t));
    return i;
}

}  // namespace

void SynthConfig::validate() const {
    if (n_coins < 1 || hours < 1 || n_events < 1) throw UsageError("synth counts must be >= 1");
    if (exchanges.empty()) throw UsageError("synth needs at least one exchange");
    if (!(spike_min > 1.0) || spike_max < spike_min)
        throw UsageError("spike multiples must satisfy 1 < spike_min <= spike_max");
    if (!(dump_min > 0) || dump_max > 1 || dump_max < dump_min)
        throw UsageError("dump factors must satisfy 0 < dump_min <= dump_max <= 1");
    if (!(cap_min > 0) || cap_max < cap_min) throw UsageError("cap range is invalid");
    if (!(price_min > 0) || price_max < price_min) throw UsageError("price range is invalid");
    if (hourly_volatility < 0) throw UsageError("hourly_volatility must be >= 0");
    if (!(buy_share > 0 && buy_share < 1)) throw UsageError("buy_share must be in (0, 1)");
    if (ticks_per_pump < 8) throw UsageError("ticks_per_pump must be >= 8");
    if (warmup_hours < 76) throw UsageError("warmup_hours must cover the 73h feature lookback");
    if (hours < warmup_hours + 8) throw UsageError("hours too short for the warmup period");
    if (gap_probability < 0 || gap_probability >= 1)
        throw UsageError("gap_probability must be in [0, 1)");
}

std::vector<CoinMeta> gen_universe(const SynthConfig& cfg, Rng& rng) {
    std::vector<CoinMeta> out;
    out.reserve(cfg.n_coins);
    const double log_span = std::log(cfg.cap_max / cfg.cap_min);
    constexpr EpochSeconds kYear = 365 * 24 * kHour;
    for (std::size_t i = 0; i < cfg.n_coins; ++i) {
        CoinMeta m;
        m.coin = ticker(i);
        m.cap_btc = cfg.cap_min * std::exp(log_span * std::pow(rng.uniform(), cfg.cap_skew));
        m.launch_time = cfg.start_time - kYear -
                        static_cast<EpochSeconds>(rng.below(4 * kYear / kHour)) * kHour;
        m.rating = static_cast<int>(rng.below(6));
        m.withdraw_fee = std::exp(rng.uniform(std::log(1e-4), std::log(10.0)));
        m.min_withdraw = m.withdraw_fee * rng.uniform(2.0, 20.0);
        m.max_withdraw = m.min_withdraw * std::exp(rng.uniform(std::log(100.0), std::log(1e6)));
        m.min_base_trade = 0.0005;
        m.listed_on.insert(cfg.exchanges.begin(), cfg.exchanges.end());
        out.push_back(std::move(m));
    }
    return out;
}

CandleSeries gen_baseline_candles(const CoinMeta& coin, const std::string& exchange,
                                  const SynthConfig& cfg, Rng& rng) {
    CandleSeries s;
    s.coin = coin.coin;
    s.exchange = exchange;
    s.candles.reserve(cfg.hours);
    double price = std::exp(rng.uniform(std::log(cfg.price_min), std::log(cfg.price_max)));
    const double volume_level = cfg.base_volume_btc * std::sqrt(std::max(coin.cap_btc, 1e-9) / 100.0);
    const double sigma = cfg.hourly_volatility;
    for (std::size_t h = 0; h < cfg.hours; ++h) {
        Candle c;
        c.timestamp = cfg.start_time + static_cast<EpochSeconds>(h) * kHour;
        c.open = price;
        c.close = price * std::exp(sigma * rng.normal());
        c.high = std::max(c.open, c.close) * std::exp(std::fabs(0.5 * sigma * rng.normal()));
        c.low = std::min(c.open, c.close) * std::exp(-std::fabs(0.5 * sigma * rng.normal()));
        c.volumeto = volume_level * std::exp(cfg.volume_noise * rng.normal());
        c.volumefrom = c.volumeto / (0.5 * (c.open + c.close));
        s.candles.push_back(c);
        price = c.close;
    }
    return s;
}

PlantResult plant_pump(CandleSeries& series, const PlantSpec& spec, Rng& rng,
                       std::vector<EpochSeconds>* planted_hours) {
    if (!(spec.spike_multiple > 1.0)) throw DataError("spike_multiple must exceed 1");
    if (spec.tick_count < 8) throw DataError("tick_count must be >= 8");
    const std::size_t lags = std::max<std::size_t>(spec.leak_by_lag.size(), 3);
    const std::size_t i = index_of(series, spec.pump_hour);
    if (i < lags + 1 || i + 2 >= series.candles.size())
        throw DataError("pump hour " + format_iso8601(spec.pump_hour) +
                        " lacks lead-in or follow-up candles");
    if (planted_hours) {
        const EpochSeconds reach = static_cast<EpochSeconds>(lags + 3) * kHour;
        for (EpochSeconds p : *planted_hours)
            if (std::llabs(p - spec.pump_hour) <= reach)
                throw DataError("overlapping pump plant at " + format_iso8601(spec.pump_hour));
        planted_hours->push_back(spec.pump_hour);
    }
    auto& cs = series.candles;

    // Leakage: lag k lifts the step open(h-k-1) -> open(h-k) by leak[k-1]
    // and carries the new level forward.
    for (std::size_t k = 1; k <= spec.leak_by_lag.size(); ++k) {
        double leak = spec.leak_by_lag[k - 1];
        if (leak == 0.0) continue;
        double factor = std::exp(leak);
        for (std::size_t j = i - k; j < cs.size(); ++j) scale_prices(cs[j], factor);
        Candle& before = cs[i - k - 1];
        before.close *= factor;
        before.high = std::max(before.high, before.close);
        before.low = std::min(before.low, before.close);
    }

    double pre3 = cs[i - 3].volumeto + cs[i - 2].volumeto + cs[i - 1].volumeto;
    const double window_volume = spec.pump_volume_multiple * pre3;
    const double pump_volume = 0.6 * window_volume;

    // Tick stream for the pump hour.
    const double open = cs[i].open;
    const double peak = open * spec.spike_multiple;
    const EpochMillis hour_ms = spec.pump_hour * 1000;
    const EpochMillis announce_ms = (spec.pump_hour + spec.announce_offset) * 1000;
    std::vector<Tick> ticks;
    std::size_t n_pre = spec.announce_offset > 0 ? std::max<std::size_t>(1, spec.tick_count / 8) : 1;
    std::size_t n_up = std::max<std::size_t>(2, spec.tick_count * 3 / 8);
    std::size_t n_down = std::max<std::size_t>(2, spec.tick_count - n_pre - n_up);

    ticks.push_back({hour_ms, open, 1.0, Aggressor::Buy});
    std::vector<EpochMillis> pre_times;
    for (std::size_t k = 1; k < n_pre; ++k)
        pre_times.push_back(hour_ms + 1 + static_cast<EpochMillis>(rng.below(
                                              static_cast<std::uint64_t>(announce_ms - hour_ms - 1))));
    std::sort(pre_times.begin(), pre_times.end());
    for (EpochMillis t : pre_times) {
        double p = std::clamp(open * std::exp(0.002 * rng.normal()), open * 0.995, open * 1.005);
        ticks.push_back({t, p, 1.0, rng.uniform() < 0.5 ? Aggressor::Buy : Aggressor::Sell});
    }
    const EpochMillis ramp_ms = 60'000;
    for (std::size_t k = 1; k <= n_up; ++k) {
        double frac = static_cast<double>(k) / static_cast<double>(n_up);
        double p = k == n_up ? peak : open * std::pow(spec.spike_multiple, frac);
        EpochMillis t = announce_ms + static_cast<EpochMillis>(frac * ramp_ms);
        ticks.push_back({t, p, 1.0, Aggressor::Buy});
    }
    const EpochMillis dump_start = announce_ms + ramp_ms + 1000;
    const EpochMillis dump_end = hour_ms + 3'599'000;
    const double close = peak * spec.dump_factor;
    for (std::size_t k = 1; k <= n_down; ++k) {
        double frac = static_cast<double>(k) / static_cast<double>(n_down);
        double p = k == n_down ? close
                               : std::min(peak * std::pow(spec.dump_factor, frac) *
                                              std::exp(0.005 * rng.normal()),
                                          peak * 0.999);
        EpochMillis t = dump_start + static_cast<EpochMillis>(frac * static_cast<double>(dump_end - dump_start));
        Aggressor side = (k == 1 || rng.uniform() < 0.85) ? Aggressor::Sell : Aggressor::Buy;
        ticks.push_back({t, p, 1.0, side});
    }

    // Quantities: random shapes, then each side scaled to its BTC target.
    double buy_notional = 0, sell_notional = 0;
    for (auto& t : ticks) {
        t.quantity = std::exp(0.6 * rng.normal());
        (t.aggressor == Aggressor::Buy ? buy_notional : sell_notional) += t.quantity * t.price;
    }
    double buy_scale = spec.buy_share * pump_volume / buy_notional;
    double sell_scale = (1.0 - spec.buy_share) * pump_volume / sell_notional;
    for (auto& t : ticks) t.quantity *= t.aggressor == Aggressor::Buy ? buy_scale : sell_scale;

    Candle& pump = cs[i];
    pump.open = open;
    pump.high = open;
    pump.low = open;
    pump.volumefrom = 0;
    pump.volumeto = 0;
    for (const auto& t : ticks) {
        pump.high = std::max(pump.high, t.price);
        pump.low = std::min(pump.low, t.price);
        pump.volumefrom += t.quantity;
        pump.volumeto += t.quantity * t.price;
    }
    pump.close = ticks.back().price;

    // Later path continues from the pump-hour close.
    double rebase = pump.close / cs[i + 1].open;
    for (std::size_t j = i + 1; j < cs.size(); ++j) scale_prices(cs[j], rebase);
    const double follow_share[2] = {0.25, 0.15};
    for (std::size_t k = 0; k < 2; ++k) {
        Candle& c = cs[i + 1 + k];
        c.volumeto = follow_share[k] * window_volume;
        c.volumefrom = c.volumeto / (0.5 * (c.open + c.close));
    }

    PlantResult result;
    result.ticks = std::move(ticks);
    std::size_t n_ann = std::clamp<std::size_t>(spec.announcements, 1, 3);
    std::vector<std::size_t> channel_ids;
    while (channel_ids.size() < n_ann) {
        std::size_t c = rng.below(kChannelPool);
        if (std::find(channel_ids.begin(), channel_ids.end(), c) == channel_ids.end())
            channel_ids.push_back(c);
    }
    EpochSeconds t = spec.pump_hour + spec.announce_offset;
    for (std::size_t k = 0; k < n_ann; ++k) {
        if (k > 0) t += 1 + static_cast<EpochSeconds>(rng.below(60));
        char name[32];
        std::snprintf(name, sizeof name, "channel_%02zu", channel_ids[k]);
        result.announcements.push_back({series.coin, series.exchange, name, t,
                                        static_cast<std::int64_t>(1000 + rng.below(50000))});
    }
    result.truth = {series.coin,
                    series.exchange,
                    spec.pump_hour + spec.announce_offset,
                    spec.pump_hour,
                    spec.spike_multiple,
                    spec.dump_factor,
                    spec.leak_by_lag.empty() ? 0.0 : spec.leak_by_lag.front()};
    return result;
}

Scenario gen_scenario(const SynthConfig& cfg, unsigned threads) {
    cfg.validate();
    Scenario sc;
    Rng universe_rng(cfg.seed, kUniverseStream);
    sc.coins = gen_universe(cfg, universe_rng);

    // Event plan: evenly spread pump hours with jitter; coins drawn so that
    // repeat pumps of one market stay min_event_spacing_hours apart.
    struct Planned {
        std::size_t coin;
        std::size_t exchange;
        PlantSpec spec;
    };
    std::vector<Planned> plan;
    Rng plan_rng(cfg.seed, kPlanStream);
    const double first = static_cast<double>(cfg.warmup_hours);
    const double span = static_cast<double>(cfg.hours - 4) - first;
    const double slot = span / static_cast<double>(cfg.n_events);
    const auto spacing = static_cast<EpochSeconds>(cfg.min_event_spacing_hours) * kHour;
    for (std::size_t k = 0; k < cfg.n_events; ++k) {
        double centre = first + (static_cast<double>(k) + 0.5) * slot;
        double jitter = (plan_rng.uniform() - 0.5) * slot * 0.8;
        auto hour = static_cast<std::size_t>(std::clamp(centre + jitter, first, first + span - 1));
        EpochSeconds pump_hour = cfg.start_time + static_cast<EpochSeconds>(hour) * kHour;
        std::size_t ex = plan_rng.below(cfg.exchanges.size());
        std::size_t coin = 0;
        for (int attempt = 0;; ++attempt) {
            coin = plan_rng.below(cfg.n_coins);
            bool clash = std::any_of(plan.begin(), plan.end(), [&](const Planned& p) {
                return p.coin == coin && p.exchange == ex &&
                       std::llabs(p.spec.pump_hour - pump_hour) < spacing;
            });
            if (!clash) break;
            if (attempt > 10000) throw UsageError("cannot place events: too few coins for n_events");
        }
        PlantSpec spec;
        spec.coin = sc.coins[coin].coin;
        spec.exchange = cfg.exchanges[ex];
        spec.pump_hour = pump_hour;
        spec.announce_offset = plan_rng.uniform() < 0.7 ? 1800 : 0;
        spec.spike_multiple =
            std::exp(plan_rng.uniform(std::log(cfg.spike_min), std::log(cfg.spike_max)));
        spec.dump_factor = plan_rng.uniform(cfg.dump_min, cfg.dump_max);
        double base_leak = cfg.prepump_signal_strength *
                           (1.0 + cfg.prepump_signal_dispersion * plan_rng.normal());
        if (cfg.leak_decay_hours > 0) {
            for (int lag = 1; lag <= 48; ++lag)
                spec.leak_by_lag.push_back(base_leak *
                                           std::exp(-(lag - 1) / cfg.leak_decay_hours));
        } else {
            spec.leak_by_lag.push_back(base_leak);
        }
        spec.pump_volume_multiple = cfg.pump_volume_multiple;
        spec.buy_share = cfg.buy_share;
        spec.tick_count = cfg.ticks_per_pump;
        spec.announcements = 1 + plan_rng.below(3);
        plan.push_back({coin, ex, std::move(spec)});
    }

    // Per-market generation; each market and each event own a stream.
    const std::size_t n_markets = cfg.n_coins * cfg.exchanges.size();
    std::vector<std::vector<std::size_t>> events_of(n_markets);
    for (std::size_t k = 0; k < plan.size(); ++k)
        events_of[plan[k].coin * cfg.exchanges.size() + plan[k].exchange].push_back(k);

    std::vector<CandleSeries> series(n_markets);
    std::vector<std::vector<PlantResult>> results(n_markets);
    parallel_for(n_markets, threads, [&](std::size_t m) {
        std::size_t coin = m / cfg.exchanges.size();
        std::size_t ex = m % cfg.exchanges.size();
        Rng rng(cfg.seed, m);
        series[m] = gen_baseline_candles(sc.coins[coin], cfg.exchanges[ex], cfg, rng);
        std::vector<EpochSeconds> planted;
        auto& evs = events_of[m];
        std::sort(evs.begin(), evs.end(),
                  [&](std::size_t a, std::size_t b) { return plan[a].spec.pump_hour < plan[b].spec.pump_hour; });
        for (std::size_t k : evs) {
            Rng event_rng(cfg.seed, kEventStreamBase + k);
            results[m].push_back(plant_pump(series[m], plan[k].spec, event_rng, &planted));
        }
        if (cfg.gap_probability > 0) {
            Rng gap_rng(cfg.seed, kGapStreamBase + m);
            auto protected_hour = [&](EpochSeconds t) {
                return std::any_of(planted.begin(), planted.end(), [&](EpochSeconds p) {
                    return t >= p - 80 * kHour && t <= p + 3 * kHour;
                });
            };
            auto& cs = series[m].candles;
            std::vector<Candle> kept;
            kept.reserve(cs.size());
            for (const auto& c : cs)
                if (gap_rng.uniform() >= cfg.gap_probability || protected_hour(c.timestamp))
                    kept.push_back(c);
            cs = std::move(kept);
        }
    });

    for (std::size_t m = 0; m < n_markets; ++m) {
        sc.candles.push_back(std::move(series[m]));
        if (results[m].empty()) continue;
        TickSeries ts;
        ts.coin = sc.candles.back().coin;
        ts.exchange = sc.candles.back().exchange;
        for (auto& r : results[m]) {
            ts.ticks.insert(ts.ticks.end(), r.ticks.begin(), r.ticks.end());
        }
        sc.ticks.push_back(std::move(ts));
    }
    // Announcements and truth in plan (chronological) order.
    std::vector<const PlantResult*> by_event(plan.size(), nullptr);
    for (std::size_t m = 0; m < n_markets; ++m)
        for (std::size_t k = 0; k < events_of[m].size(); ++k)
            by_event[events_of[m][k]] = &results[m][k];
    for (const PlantResult* r : by_event) {
        sc.announcements.insert(sc.announcements.end(), r->announcements.begin(),
                                r->announcements.end());
        sc.ground_truth.push_back(r->truth);
    }
    auto key = [](const CandleSeries& s) { return std::tie(s.coin, s.exchange); };
    std::sort(sc.candles.begin(), sc.candles.end(),
              [&](const CandleSeries& a, const CandleSeries& b) { return key(a) < key(b); });
    std::sort(sc.ticks.begin(), sc.ticks.end(), [](const TickSeries& a, const TickSeries& b) {
        return std::tie(a.coin, a.exchange) < std::tie(b.coin, b.exchange);
    });
    return sc;
}

void write_ground_truth(std::ostream& out, const std::vector<GroundTruthEvent>& truth) {
    for (const auto& t : truth) {
        nlohmann::ordered_json j;
        j["coin"] = t.coin;
        j["exchange"] = t.exchange;
        j["event_time"] = format_iso8601(t.event_time);
        j["pump_hour"] = format_iso8601(t.pump_hour);
        j["spike_multiple"] = t.spike_multiple;
        j["dump_factor"] = t.dump_factor;
        j["leak"] = t.leak;
        out << j.dump() << '\n';
    }
}

void write_scenario(const std::filesystem::path& dir, const Scenario& sc) {
    std::filesystem::create_directories(dir);
    auto open = [&](const char* name) {
        std::ofstream f(dir / name, std::ios::binary);
        if (!f) throw DataError("cannot write " + (dir / name).string());
        return f;
    };
    {
        auto f = open("candles.csv");
        write_candles(f, sc.candles);
    }
    {
        auto f = open("ticks.csv");
        write_ticks(f, sc.ticks);
    }
    {
        auto f = open("announcements.jsonl");
        write_announcements(f, sc.announcements);
    }
    {
        auto f = open("coins.jsonl");
        write_coin_meta(f, sc.coins);
    }
    {
        auto f = open("ground_truth.jsonl");
        write_ground_truth(f, sc.ground_truth);
    }
}

void apply_synth_setting(SynthConfig& cfg, const std::string& key, const std::string& value) {
    auto num = [&]() {
        auto v = parse_decimal(value);
        if (!v) throw UsageError("setting '" + key + "' expects a number, got '" + value + "'");
        return *v;
    };
    auto count = [&]() {
        double v = num();
        if (v < 0 || v != std::floor(v)) throw UsageError("setting '" + key + "' expects a count");
        return static_cast<std::size_t>(v);
    };
    static const std::map<std::string, double SynthConfig::*> doubles = {
        {"cap_min", &SynthConfig::cap_min},
        {"cap_max", &SynthConfig::cap_max},
        {"cap_skew", &SynthConfig::cap_skew},
        {"price_min", &SynthConfig::price_min},
        {"price_max", &SynthConfig::price_max},
        {"hourly_volatility", &SynthConfig::hourly_volatility},
        {"base_volume_btc", &SynthConfig::base_volume_btc},
        {"volume_noise", &SynthConfig::volume_noise},
        {"prepump_signal_strength", &SynthConfig::prepump_signal_strength},
        {"prepump_signal_dispersion", &SynthConfig::prepump_signal_dispersion},
        {"leak_decay_hours", &SynthConfig::leak_decay_hours},
        {"spike_min", &SynthConfig::spike_min},
        {"spike_max", &SynthConfig::spike_max},
        {"dump_min", &SynthConfig::dump_min},
        {"dump_max", &SynthConfig::dump_max},
        {"pump_volume_multiple", &SynthConfig::pump_volume_multiple},
        {"buy_share", &SynthConfig::buy_share},
        {"gap_probability", &SynthConfig::gap_probability},
    };
    static const std::map<std::string, std::size_t SynthConfig::*> counts = {
        {"n_coins", &SynthConfig::n_coins},
        {"hours", &SynthConfig::hours},
        {"n_events", &SynthConfig::n_events},
        {"ticks_per_pump", &SynthConfig::ticks_per_pump},
        {"min_event_spacing_hours", &SynthConfig::min_event_spacing_hours},
        {"warmup_hours", &SynthConfig::warmup_hours},
    };
    if (auto it = doubles.find(key); it != doubles.end()) {
        cfg.*(it->second) = num();
    } else if (auto ct = counts.find(key); ct != counts.end()) {
        cfg.*(ct->second) = count();
    } else if (key == "start_time") {
        cfg.start_time = parse_iso8601(value);
    } else if (key == "exchanges") {
        cfg.exchanges.clear();
        std::size_t start = 0;
        while (start <= value.size()) {
            auto comma = value.find(',', start);
            auto part = value.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
            if (!part.empty()) cfg.exchanges.push_back(part);
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
    } else {
        throw UsageError("unknown synth setting '" + key + "'");
    }
}

}  // namespace pnd
