#include "pnd/features.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "pnd/csv.hpp"
#include "pnd/parallel.hpp"

namespace pnd {

namespace {

std::array<std::string, kFeatureCount> make_names() {
    std::array<std::string, kFeatureCount> n;
    n[feature::kCaps] = "caps";
    for (std::size_t i = 0; i < kReturnHorizons.size(); ++i) {
        auto h = std::to_string(kReturnHorizons[i]);
        n[feature::kReturn + i] = "return" + h + "h";
        n[feature::kVolumeFrom + i] = "volumefrom" + h + "h";
        n[feature::kVolumeTo + i] = "volumeto" + h + "h";
    }
    for (std::size_t i = 0; i < kVolatilityHorizons.size(); ++i) {
        auto h = std::to_string(kVolatilityHorizons[i]);
        n[feature::kReturnVola + i] = "returnvola" + h + "h";
        n[feature::kVolumeFromVola + i] = "volumefromvola" + h + "h";
        n[feature::kVolumeToVola + i] = "volumetovola" + h + "h";
    }
    n[feature::kLastPrice] = "lastprice";
    n[feature::kAge] = "age";
    n[feature::kPumpedTimes] = "pumpedtimes";
    n[feature::kRating] = "rating";
    n[feature::kWithdrawFee] = "WithdrawFee";
    n[feature::kMinWithdraw] = "MinWithdraw";
    n[feature::kMaxWithdraw] = "MaxWithdraw";
    n[feature::kMinBaseTrade] = "MinBaseTrade";
    return n;
}

std::optional<double> sample_std(std::span<const double> xs) {
    if (xs.size() < 2) return std::nullopt;
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

constexpr EpochSeconds hours(int h) { return static_cast<EpochSeconds>(h) * kHour; }

constexpr int kLookbackHours = 73;

}  // namespace

const std::array<std::string, kFeatureCount>& feature_names() {
    static const auto names = make_names();
    return names;
}

std::optional<std::size_t> feature_index(std::string_view name) {
    const auto& names = feature_names();
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) return std::nullopt;
    return static_cast<std::size_t>(it - names.begin());
}

std::optional<double> log_return(const CandleSeries& series, int x, EpochSeconds t0) {
    const Candle* end = series.at(t0 - hours(1));
    const Candle* start = series.at(t0 - hours(x + 1));
    if (end == nullptr || start == nullptr) return std::nullopt;
    if (!(end->open > 0) || !(start->open > 0)) return std::nullopt;
    return std::log(end->open / start->open);
}

std::optional<double> window_volume(const CandleSeries& series, int x, EpochSeconds t0,
                                    VolumeBase base) {
    auto window = candles_between(series, t0 - hours(x + 1), t0 - hours(1));
    if (window.empty()) return std::nullopt;
    double sum = 0.0;
    for (const auto& c : window) sum += base == VolumeBase::Coin ? c.volumefrom : c.volumeto;
    return sum;
}

std::optional<double> window_volatility(const CandleSeries& series, int y, EpochSeconds t0,
                                        VolatilityKind kind) {
    std::vector<double> points;
    if (kind == VolatilityKind::Return) {
        // Opens at both window endpoints are included, so y + 1 opens give y
        // hourly returns on a gapless series.
        auto window = candles_between(series, t0 - hours(y + 1), t0 - hours(1) + 1);
        const Candle* prev = nullptr;
        for (const auto& c : window) {
            if (!(c.open > 0)) {
                prev = nullptr;
                continue;
            }
            if (prev != nullptr) points.push_back(std::log(c.open / prev->open));
            prev = &c;
        }
    } else {
        auto window = candles_between(series, t0 - hours(y + 1), t0 - hours(1));
        for (const auto& c : window)
            points.push_back(kind == VolatilityKind::VolumeFrom ? c.volumefrom : c.volumeto);
    }
    return sample_std(points);
}

FeatureVector build_feature_vector(const CoinMeta& coin, const PumpEvent& event,
                                   const CandleSeries* series, std::span<const PumpEvent> history) {
    FeatureVector fv;
    const EpochSeconds t0 = event.pump_hour;
    fv.set(feature::kCaps, coin.cap_btc);
    if (series != nullptr) {
        for (std::size_t i = 0; i < kReturnHorizons.size(); ++i) {
            int x = kReturnHorizons[i];
            fv.set(feature::kReturn + i, log_return(*series, x, t0));
            fv.set(feature::kVolumeFrom + i, window_volume(*series, x, t0, VolumeBase::Coin));
            fv.set(feature::kVolumeTo + i, window_volume(*series, x, t0, VolumeBase::Btc));
        }
        for (std::size_t i = 0; i < kVolatilityHorizons.size(); ++i) {
            int y = kVolatilityHorizons[i];
            fv.set(feature::kReturnVola + i,
                   window_volatility(*series, y, t0, VolatilityKind::Return));
            fv.set(feature::kVolumeFromVola + i,
                   window_volatility(*series, y, t0, VolatilityKind::VolumeFrom));
            fv.set(feature::kVolumeToVola + i,
                   window_volatility(*series, y, t0, VolatilityKind::VolumeTo));
        }
        if (const Candle* last = series->at(t0 - kHour)) fv.set(feature::kLastPrice, last->open);
    }
    EpochSeconds age_seconds = t0 - coin.launch_time;
    if (age_seconds >= 0)
        fv.set(feature::kAge, static_cast<double>(age_seconds) / static_cast<double>(kHour));
    fv.set(feature::kPumpedTimes,
           count_prior_pumps(history, coin.coin, event.exchange, event.event_time));
    fv.set(feature::kRating, coin.rating);
    fv.set(feature::kWithdrawFee, coin.withdraw_fee);
    fv.set(feature::kMinWithdraw, coin.min_withdraw);
    fv.set(feature::kMaxWithdraw, coin.max_withdraw);
    fv.set(feature::kMinBaseTrade, coin.min_base_trade);
    return fv;
}

std::string to_string(SplitTag tag) {
    switch (tag) {
        case SplitTag::Train: return "train";
        case SplitTag::Validation: return "validation";
        case SplitTag::Test: return "test";
        case SplitTag::Unsplit: return "unsplit";
    }
    return "unsplit";
}

std::string make_event_id(const PumpEvent& event) {
    return format_iso8601(event.event_time) + "/" + event.exchange + "/" + event.coin;
}

EpochSeconds event_time_from_id(std::string_view event_id) {
    auto slash = event_id.find('/');
    return parse_iso8601(event_id.substr(0, slash));
}

std::size_t Dataset::positives() const {
    return static_cast<std::size_t>(std::count_if(observations.begin(), observations.end(),
                                                  [](const Observation& o) { return o.label; }));
}

std::vector<CoinMeta> universe_for(const PumpEvent& event, std::span<const CoinMeta> metas) {
    std::vector<CoinMeta> out;
    for (const auto& m : metas)
        if (m.listed_on.contains(event.exchange) && m.launch_time <= event.pump_hour)
            out.push_back(m);
    std::sort(out.begin(), out.end(),
              [](const CoinMeta& a, const CoinMeta& b) { return a.coin < b.coin; });
    return out;
}

Dataset build_dataset(std::span<const PumpEvent> events,
                      std::span<const std::vector<CoinMeta>> universe, const CandleStore& store,
                      DatasetReport* report, unsigned threads) {
    if (universe.size() != events.size())
        throw DataError("universe must list candidates for every event");

    struct EventResult {
        std::vector<Observation> observations;
        std::optional<std::string> dropped_reason;
    };
    std::vector<EventResult> results(events.size());

    parallel_for(events.size(), threads, [&](std::size_t k) {
        const PumpEvent& event = events[k];
        EventResult& out = results[k];
        const std::string id = make_event_id(event);

        std::vector<const CoinMeta*> candidates;
        for (const auto& m : universe[k]) candidates.push_back(&m);
        std::sort(candidates.begin(), candidates.end(),
                  [](const CoinMeta* a, const CoinMeta* b) { return a->coin < b->coin; });

        bool pumped_listed = std::any_of(candidates.begin(), candidates.end(),
                                         [&](const CoinMeta* m) { return m->coin == event.coin; });
        if (!pumped_listed) {
            out.dropped_reason = "pumped coin missing from the candidate universe";
            return;
        }
        const CandleSeries* pumped = store.find(event.coin, event.exchange);
        if (pumped == nullptr ||
            candles_between(*pumped, event.pump_hour - hours(kLookbackHours), event.pump_hour)
                .empty()) {
            out.dropped_reason = "pumped coin has no candle data before the pump";
            return;
        }

        out.observations.reserve(candidates.size());
        for (const CoinMeta* m : candidates) {
            Observation o;
            o.event_id = id;
            o.event_time = event.event_time;
            o.coin = m->coin;
            o.label = m->coin == event.coin;
            o.features =
                build_feature_vector(*m, event, store.find(m->coin, event.exchange), events);
            out.observations.push_back(std::move(o));
        }
    });

    Dataset ds;
    for (std::size_t k = 0; k < events.size(); ++k) {
        auto& r = results[k];
        std::string id = make_event_id(events[k]);
        if (r.dropped_reason) {
            if (report) report->dropped.push_back({id, *r.dropped_reason});
            continue;
        }
        if (report) report->candidates_per_event.emplace_back(id, r.observations.size());
        for (auto& o : r.observations) ds.observations.push_back(std::move(o));
    }
    return ds;
}

std::array<Dataset, 3> chrono_split(const Dataset& dataset, EpochSeconds first,
                                    EpochSeconds second) {
    if (second < first) throw UsageError("split boundaries must be ordered");
    std::array<Dataset, 3> out;
    out[0].split_tag = SplitTag::Train;
    out[1].split_tag = SplitTag::Validation;
    out[2].split_tag = SplitTag::Test;
    for (const auto& o : dataset.observations) {
        std::size_t k = o.event_time < first ? 0 : (o.event_time < second ? 1 : 2);
        out[k].observations.push_back(o);
    }
    for (const auto& d : out)
        if (d.observations.empty())
            throw DataError("chronological split '" + to_string(d.split_tag) + "' is empty");
    return out;
}

void write_dataset(std::ostream& out, const Dataset& dataset) {
    out << "event_id,coin,label";
    for (const auto& n : feature_names()) out << ',' << n;
    out << '\n';
    for (const auto& o : dataset.observations) {
        out << o.event_id << ',' << o.coin << ',' << (o.label ? 1 : 0);
        for (std::size_t i = 0; i < kFeatureCount; ++i) {
            out << ',';
            if (o.features.present.test(i)) out << format_decimal(o.features.values[i]);
        }
        out << '\n';
    }
}

Dataset read_dataset(std::istream& in) {
    std::string line;
    if (!csv::read_line(in, line)) throw DataError("line 1: missing dataset header");
    auto header = csv::split(line);
    if (header.size() != kFeatureCount + 3 || header[0] != "event_id" || header[1] != "coin" ||
        header[2] != "label")
        throw DataError("line 1: dataset header must be event_id,coin,label + 54 features");
    for (std::size_t i = 0; i < kFeatureCount; ++i)
        if (header[i + 3] != feature_names()[i])
            throw DataError("line 1: feature column " + std::to_string(i) + " is '" +
                            std::string(header[i + 3]) + "', expected '" + feature_names()[i] +
                            "'");
    Dataset ds;
    std::size_t line_no = 1;
    while (csv::read_line(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto f = csv::split(line);
        auto where = "line " + std::to_string(line_no) + ": ";
        if (f.size() != kFeatureCount + 3) throw DataError(where + "wrong field count");
        Observation o;
        o.event_id = std::string(f[0]);
        try {
            o.event_time = event_time_from_id(o.event_id);
        } catch (const DataError& e) {
            throw DataError(where + "bad event_id: " + e.what());
        }
        o.coin = std::string(f[1]);
        if (f[2] == "1" || f[2] == "TRUE") {
            o.label = true;
        } else if (f[2] == "0" || f[2] == "FALSE") {
            o.label = false;
        } else {
            throw DataError(where + "label must be 0/1");
        }
        for (std::size_t i = 0; i < kFeatureCount; ++i) {
            if (f[i + 3].empty()) continue;
            auto v = parse_decimal(f[i + 3]);
            if (!v) throw DataError(where + "feature '" + feature_names()[i] + "' not numeric");
            o.features.set(i, *v);
        }
        ds.observations.push_back(std::move(o));
    }
    return ds;
}

std::pair<EpochSeconds, EpochSeconds> rank_split_bounds(std::span<const PumpEvent> events) {
    std::vector<EpochSeconds> times;
    for (const auto& e : events) times.push_back(e.event_time);
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    if (times.size() < 3) throw DataError("auto split needs at least 3 distinct event times");
    auto rank = [&](double q) {
        auto i = static_cast<std::size_t>(q * static_cast<double>(times.size()));
        return std::clamp<std::size_t>(i, 1, times.size() - 1);
    };
    std::size_t a = rank(0.6), b = rank(0.8);
    if (b <= a) b = std::min(times.size() - 1, a + 1);
    return {times[a], times[b]};
}

}  // namespace pnd
