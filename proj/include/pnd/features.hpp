#pragma once

#include <array>
#include <bitset>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pnd/common.hpp"
#include "pnd/events.hpp"
#include "pnd/market_data.hpp"

namespace pnd {

inline constexpr std::size_t kFeatureCount = 54;

// Horizons (hours) of the window features.
inline constexpr std::array<int, 8> kReturnHorizons = {1, 3, 12, 24, 36, 48, 60, 72};
inline constexpr std::array<int, 7> kVolatilityHorizons = {3, 12, 24, 36, 48, 60, 72};

// Column layout. Block offsets index into FeatureVector::values.
namespace feature {
inline constexpr std::size_t kCaps = 0;
inline constexpr std::size_t kReturn = 1;           // 8 columns
inline constexpr std::size_t kVolumeFrom = 9;       // 8 columns
inline constexpr std::size_t kVolumeTo = 17;        // 8 columns
inline constexpr std::size_t kReturnVola = 25;      // 7 columns
inline constexpr std::size_t kVolumeFromVola = 32;  // 7 columns
inline constexpr std::size_t kVolumeToVola = 39;    // 7 columns
inline constexpr std::size_t kLastPrice = 46;
inline constexpr std::size_t kAge = 47;
inline constexpr std::size_t kPumpedTimes = 48;
inline constexpr std::size_t kRating = 49;
inline constexpr std::size_t kWithdrawFee = 50;
inline constexpr std::size_t kMinWithdraw = 51;
inline constexpr std::size_t kMaxWithdraw = 52;
inline constexpr std::size_t kMinBaseTrade = 53;
}  // namespace feature

// caps, return1h..return72h, volumefrom1h.., volumeto1h.., returnvola3h..,
// volumefromvola3h.., volumetovola3h.., lastprice, age, pumpedtimes,
// rating, WithdrawFee, MinWithdraw, MaxWithdraw, MinBaseTrade.
const std::array<std::string, kFeatureCount>& feature_names();

// Index of a feature name, or nullopt.
std::optional<std::size_t> feature_index(std::string_view name);

struct FeatureVector {
    std::array<double, kFeatureCount> values{};
    std::bitset<kFeatureCount> present;  // missing_mask is the complement

    std::optional<double> get(std::size_t i) const {
        return present.test(i) ? std::optional<double>(values[i]) : std::nullopt;
    }
    void set(std::size_t i, std::optional<double> v) {
        values[i] = v.value_or(0.0);
        present.set(i, v.has_value());
    }
    friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

enum class VolumeBase { Coin, Btc };
enum class VolatilityKind { Return, VolumeFrom, VolumeTo };

// ln(open(t0 - 1h) / open(t0 - (x+1)h)); missing if either candle is absent
// or either open is not positive.
std::optional<double> log_return(const CandleSeries& series, int x, EpochSeconds t0);

// Sum of volumefrom or volumeto over [t0 - (x+1)h, t0 - 1h).
std::optional<double> window_volume(const CandleSeries& series, int x, EpochSeconds t0,
                                    VolumeBase base);

// Sample standard deviation (n - 1) of the hourly series in the window.
// For Return the points are the log returns between consecutive present
// opens over [t0 - (y+1)h, t0 - 1h]; for volumes the raw hourly values over
// [t0 - (y+1)h, t0 - 1h). Missing with fewer than two points.
std::optional<double> window_volatility(const CandleSeries& series, int y, EpochSeconds t0,
                                        VolatilityKind kind);

// `series` may be null when the coin has no candle data at all; every
// market feature is then missing.
FeatureVector build_feature_vector(const CoinMeta& coin, const PumpEvent& event,
                                   const CandleSeries* series, std::span<const PumpEvent> history);

enum class SplitTag { Train, Validation, Test, Unsplit };
std::string to_string(SplitTag tag);

struct Observation {
    std::string event_id;  // "<event time>/<exchange>/<pumped coin>"
    EpochSeconds event_time = 0;
    std::string coin;
    FeatureVector features;
    bool label = false;

    friend bool operator==(const Observation&, const Observation&) = default;
};

std::string make_event_id(const PumpEvent& event);
EpochSeconds event_time_from_id(std::string_view event_id);

struct Dataset {
    std::vector<Observation> observations;
    SplitTag split_tag = SplitTag::Unsplit;

    std::size_t positives() const;
    std::size_t size() const { return observations.size(); }
};

struct DroppedEvent {
    std::string event_id;
    std::string reason;
};

struct DatasetReport {
    std::vector<std::pair<std::string, std::size_t>> candidates_per_event;
    std::vector<DroppedEvent> dropped;
};

// Coins listed on the event's exchange and launched by the pump hour.
std::vector<CoinMeta> universe_for(const PumpEvent& event, std::span<const CoinMeta> metas);

// One observation per (event, candidate coin), label true iff the candidate
// is the pumped coin. Events whose pumped coin has no candle in the 73-hour
// lookback (or no metadata) are dropped whole and reported. Output order is
// (event order, coin) regardless of `threads`.
Dataset build_dataset(std::span<const PumpEvent> events,
                      std::span<const std::vector<CoinMeta>> universe, const CandleStore& store,
                      DatasetReport* report = nullptr, unsigned threads = 1);

// Train: t < first; Validation: first <= t < second; Test: t >= second.
// Throws DataError when any split comes out empty.
std::array<Dataset, 3> chrono_split(const Dataset& dataset, EpochSeconds first,
                                    EpochSeconds second);

// Split boundaries at the 60% and 80% ranks of the distinct event times.
// Throws DataError with fewer than three distinct times.
std::pair<EpochSeconds, EpochSeconds> rank_split_bounds(std::span<const PumpEvent> events);

// CSV: `event_id,coin,label,<54 feature names>`; missing values empty.
void write_dataset(std::ostream& out, const Dataset& dataset);
Dataset read_dataset(std::istream& in);

}  // namespace pnd
