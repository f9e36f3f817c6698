#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "pnd/events.hpp"
#include "pnd/market_data.hpp"
#include "pnd/rng.hpp"

namespace pnd {

struct SynthConfig {
    std::size_t n_coins = 300;
    std::size_t hours = 1900;
    std::size_t n_events = 150;
    std::vector<std::string> exchanges = {"cryptopia"};
    EpochSeconds start_time = 1527811200;  // 2018-06-01T00:00:00Z

    // Caps: cap_min * (cap_max / cap_min)^(u^cap_skew), u uniform. Skew > 1
    // pulls the median below the log-midpoint.
    double cap_min = 1.0;
    double cap_max = 30000.0;
    double cap_skew = 1.4;

    double price_min = 2e-7;  // BTC; initial prices are log-uniform
    double price_max = 1e-4;
    double hourly_volatility = 0.02;  // sd of hourly log returns
    double base_volume_btc = 0.05;    // typical hourly volumeto of a 100 BTC cap coin
    double volume_noise = 0.5;        // sd of log volume noise

    // Log return injected into the last pre-announcement hour (the step
    // from open(t0 - 2h) to open(t0 - 1h)), scaled by 1 + dispersion * N(0,1).
    double prepump_signal_strength = 0.15;
    double prepump_signal_dispersion = 0.3;
    // 0: last hour only. Otherwise lag k (1..48) receives
    // strength * exp(-(k - 1) / leak_decay_hours).
    double leak_decay_hours = 0.0;

    double spike_min = 1.1;  // pump-hour high / open, log-uniform
    double spike_max = 4.0;
    double dump_min = 0.35;  // pump-hour close / high
    double dump_max = 0.8;
    double pump_volume_multiple = 9.0;  // 3h pump window vs 3h before
    double buy_share = 1.06 / 1.64;     // BTC share of pump-hour volume bought by aggressors
    std::size_t ticks_per_pump = 40;
    std::size_t min_event_spacing_hours = 80;  // same coin
    std::size_t warmup_hours = 80;

    double gap_probability = 0.001;  // random missing hours away from events
    std::uint64_t seed = 1;

    void validate() const;
};

struct GroundTruthEvent {
    std::string coin;
    std::string exchange;
    EpochSeconds event_time = 0;
    EpochSeconds pump_hour = 0;
    double spike_multiple = 0.0;
    double dump_factor = 0.0;
    double leak = 0.0;  // injected into the final pre-announcement hour
};

struct PlantSpec {
    std::string coin;
    std::string exchange;
    EpochSeconds pump_hour = 0;
    EpochSeconds announce_offset = 1800;  // 0 or 1800 s into the pump hour
    double spike_multiple = 2.0;
    double dump_factor = 0.5;
    std::vector<double> leak_by_lag;  // [0] is the last pre-announcement hour
    double pump_volume_multiple = 9.0;
    double buy_share = 0.6;
    std::size_t tick_count = 40;
    std::size_t announcements = 1;  // 1..3
};

struct PlantResult {
    std::vector<Tick> ticks;
    std::vector<Announcement> announcements;
    GroundTruthEvent truth;
};

struct Scenario {
    std::vector<CoinMeta> coins;
    std::vector<CandleSeries> candles;
    std::vector<TickSeries> ticks;
    std::vector<Announcement> announcements;
    std::vector<GroundTruthEvent> ground_truth;
};

std::vector<CoinMeta> gen_universe(const SynthConfig& cfg, Rng& rng);

// Gapless geometric random walk from cfg.start_time over cfg.hours.
CandleSeries gen_baseline_candles(const CoinMeta& coin, const std::string& exchange,
                                  const SynthConfig& cfg, Rng& rng);

// Mutates a gapless series around spec.pump_hour: pre-pump leakage, the
// pump-hour candle rebuilt from a generated tick stream (so its volumes
// reconcile with the ticks), elevated volume for two more hours, and the
// later path re-anchored at the pump-hour close. Throws DataError if the
// pump hour or its 48h lead-in is missing or was already planted.
PlantResult plant_pump(CandleSeries& series, const PlantSpec& spec, Rng& rng,
                       std::vector<EpochSeconds>* planted_hours = nullptr);

// Deterministic for a fixed cfg.seed regardless of `threads`.
Scenario gen_scenario(const SynthConfig& cfg, unsigned threads = 1);

// candles.csv, ticks.csv, announcements.jsonl, coins.jsonl, ground_truth.jsonl
void write_scenario(const std::filesystem::path& dir, const Scenario& scenario);

void write_ground_truth(std::ostream& out, const std::vector<GroundTruthEvent>& truth);

// Reads a small `key = value` description into a SynthConfig (unknown keys
// are rejected). Used by the CLI config loader.
void apply_synth_setting(SynthConfig& cfg, const std::string& key, const std::string& value);

}  // namespace pnd
