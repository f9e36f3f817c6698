#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pnd/common.hpp"
#include "pnd/market_data.hpp"

namespace pnd {

struct Announcement {
    std::string coin;
    std::string exchange;
    std::string channel;
    EpochSeconds announce_time = 0;
    std::optional<std::int64_t> views;

    friend bool operator==(const Announcement&, const Announcement&) = default;
};

struct PumpEvent {
    int id = 0;  // position in chronological order after dedup
    std::string coin;
    std::string exchange;
    EpochSeconds event_time = 0;  // earliest announcement of the group
    std::vector<std::string> channels;  // sorted, unique
    std::optional<std::int64_t> views_total;
    EpochSeconds pump_hour = 0;

    friend bool operator==(const PumpEvent&, const PumpEvent&) = default;
};

// Successive announcements of the same (coin, exchange) at most this far
// apart are one event.
inline constexpr EpochSeconds kDedupWindow = 180;

// Groups announcements per (coin, exchange), chaining each successor that
// follows the previous group member by <= 180 s. Output is sorted by
// (event_time, coin, exchange) and ids are assigned in that order.
std::vector<PumpEvent> dedup_events(std::span<const Announcement> announcements);

// Re-expands events into one announcement per channel at event_time.
std::vector<Announcement> to_announcements(std::span<const PumpEvent> events);

struct PlausibilityConfig {
    EpochSeconds time_tolerance = 120;  // seconds from a :00 or :30 mark
    double volume_multiple = 5.0;       // pump-hour volumeto vs mean of previous 24 candles
    double price_multiple = 1.05;       // pump-hour high vs pump-hour open
    int volume_lookback_hours = 24;
};

struct PlausibilityVerdict {
    bool time_plausible = false;
    bool volume_spike = false;
    bool price_spike = false;
    bool accepted = false;
    std::string notes;
};

PlausibilityVerdict plausibility_check(const PumpEvent& event, const CandleSeries& series,
                                       const PlausibilityConfig& cfg = {});

// Keeps events whose verdict is accepted. Events without a candle series
// are kept so later stages can report them as dropped. `rejected` receives
// the count of filtered events.
std::vector<PumpEvent> filter_plausible(std::span<const PumpEvent> events, const CandleStore& store,
                                        const PlausibilityConfig& cfg = {},
                                        std::size_t* rejected = nullptr);

// Events on the same coin and exchange strictly before `before`.
int count_prior_pumps(std::span<const PumpEvent> events, const std::string& coin,
                      const std::string& exchange, EpochSeconds before);

// JSON Lines: `coin, exchange, channel, announce_time, views`.
std::vector<Announcement> parse_announcements(std::istream& in);
void write_announcements(std::ostream& out, std::span<const Announcement> announcements);

// PumpEvent JSON Lines: announcement keys plus `id`, `channels` and `pump_hour`.
std::vector<PumpEvent> parse_events(std::istream& in);
void write_events(std::ostream& out, std::span<const PumpEvent> events);

}  // namespace pnd
