#include "pnd/events.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <set>

#include <nlohmann/json.hpp>

#include "pnd/csv.hpp"

namespace pnd {

std::vector<PumpEvent> dedup_events(std::span<const Announcement> announcements) {
    std::vector<const Announcement*> sorted;
    sorted.reserve(announcements.size());
    for (const auto& a : announcements) sorted.push_back(&a);
    std::stable_sort(sorted.begin(), sorted.end(), [](const Announcement* a, const Announcement* b) {
        if (a->coin != b->coin) return a->coin < b->coin;
        if (a->exchange != b->exchange) return a->exchange < b->exchange;
        if (a->announce_time != b->announce_time) return a->announce_time < b->announce_time;
        return a->channel < b->channel;
    });

    std::vector<PumpEvent> events;
    std::set<std::string> channels;
    EpochSeconds last_member = 0;
    auto close_group = [&] {
        if (events.empty()) return;
        events.back().channels.assign(channels.begin(), channels.end());
        channels.clear();
    };
    for (const Announcement* a : sorted) {
        bool extends = !events.empty() && events.back().coin == a->coin &&
                       events.back().exchange == a->exchange &&
                       a->announce_time - last_member <= kDedupWindow;
        if (!extends) {
            close_group();
            PumpEvent e;
            e.coin = a->coin;
            e.exchange = a->exchange;
            e.event_time = a->announce_time;
            e.pump_hour = floor_hour(a->announce_time);
            events.push_back(std::move(e));
        }
        PumpEvent& e = events.back();
        if (!a->channel.empty()) channels.insert(a->channel);
        if (a->views) e.views_total = e.views_total.value_or(0) + *a->views;
        last_member = a->announce_time;
    }
    close_group();

    std::stable_sort(events.begin(), events.end(), [](const PumpEvent& a, const PumpEvent& b) {
        if (a.event_time != b.event_time) return a.event_time < b.event_time;
        if (a.coin != b.coin) return a.coin < b.coin;
        return a.exchange < b.exchange;
    });
    for (std::size_t i = 0; i < events.size(); ++i) events[i].id = static_cast<int>(i);
    return events;
}

std::vector<Announcement> to_announcements(std::span<const PumpEvent> events) {
    std::vector<Announcement> out;
    for (const auto& e : events) {
        bool first = true;
        for (const auto& ch : e.channels) {
            out.push_back({e.coin, e.exchange, ch, e.event_time,
                           first ? e.views_total : std::nullopt});
            first = false;
        }
        if (e.channels.empty()) out.push_back({e.coin, e.exchange, "", e.event_time, e.views_total});
    }
    return out;
}

PlausibilityVerdict plausibility_check(const PumpEvent& event, const CandleSeries& series,
                                       const PlausibilityConfig& cfg) {
    PlausibilityVerdict v;
    constexpr EpochSeconds kHalfHour = 1800;
    EpochSeconds r = event.event_time % kHalfHour;
    if (r < 0) r += kHalfHour;
    EpochSeconds distance = std::min(r, kHalfHour - r);
    v.time_plausible = distance <= cfg.time_tolerance;
    if (!v.time_plausible)
        v.notes += "announcement " + std::to_string(distance) + " s from the nearest :00/:30 mark; ";

    const Candle* pump = series.at(event.pump_hour);
    if (pump == nullptr) {
        v.notes += "no candle for the pump hour";
        v.accepted = false;
        return v;
    }

    auto history = window_slice(series, event.pump_hour, cfg.volume_lookback_hours);
    if (history.empty()) {
        v.volume_spike = true;
        v.notes += "no volume history, spike assumed; ";
    } else {
        double sum = 0.0;
        for (const auto& c : history) sum += c.volumeto;
        double mean = sum / static_cast<double>(history.size());
        v.volume_spike = pump->volumeto >= cfg.volume_multiple * mean;
    }
    v.price_spike = pump->high >= cfg.price_multiple * pump->open;
    if (!v.volume_spike && !v.price_spike) v.notes += "no volume or price spike in the pump hour";
    v.accepted = v.time_plausible && (v.volume_spike || v.price_spike);
    return v;
}

std::vector<PumpEvent> filter_plausible(std::span<const PumpEvent> events, const CandleStore& store,
                                        const PlausibilityConfig& cfg, std::size_t* rejected) {
    std::vector<PumpEvent> kept;
    std::size_t dropped = 0;
    for (const auto& e : events) {
        const CandleSeries* s = store.find(e.coin, e.exchange);
        if (s == nullptr || plausibility_check(e, *s, cfg).accepted)
            kept.push_back(e);
        else
            ++dropped;
    }
    if (rejected) *rejected = dropped;
    return kept;
}

int count_prior_pumps(std::span<const PumpEvent> events, const std::string& coin,
                      const std::string& exchange, EpochSeconds before) {
    return static_cast<int>(std::count_if(events.begin(), events.end(), [&](const PumpEvent& e) {
        return e.coin == coin && e.exchange == exchange && e.event_time < before;
    }));
}

namespace {

std::optional<std::int64_t> optional_views(const nlohmann::json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    auto v = it->get<std::int64_t>();
    if (v < 0) throw DataError(std::string(key) + " must be non-negative");
    return v;
}

template <class Fn>
void for_each_json_line(std::istream& in, Fn&& fn) {
    std::string row;
    std::size_t line_no = 0;
    while (csv::read_line(in, row)) {
        ++line_no;
        if (row.empty()) continue;
        try {
            fn(nlohmann::json::parse(row));
        } catch (const nlohmann::json::exception& e) {
            throw DataError("line " + std::to_string(line_no) + ": " + e.what());
        } catch (const DataError& e) {
            throw DataError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
}

}  // namespace

std::vector<Announcement> parse_announcements(std::istream& in) {
    std::vector<Announcement> out;
    for_each_json_line(in, [&](const nlohmann::json& j) {
        Announcement a;
        a.coin = j.at("coin").get<std::string>();
        a.exchange = j.at("exchange").get<std::string>();
        a.channel = j.value("channel", std::string{});
        a.announce_time = parse_iso8601(j.at("announce_time").get<std::string>());
        a.views = optional_views(j, "views");
        if (a.coin.empty() || a.exchange.empty())
            throw DataError("coin and exchange must be non-empty");
        out.push_back(std::move(a));
    });
    return out;
}

void write_announcements(std::ostream& out, std::span<const Announcement> announcements) {
    for (const auto& a : announcements) {
        nlohmann::ordered_json j;
        j["coin"] = a.coin;
        j["exchange"] = a.exchange;
        j["channel"] = a.channel;
        j["announce_time"] = format_iso8601(a.announce_time);
        j["views"] = a.views ? nlohmann::ordered_json(*a.views) : nlohmann::ordered_json();
        out << j.dump() << '\n';
    }
}

std::vector<PumpEvent> parse_events(std::istream& in) {
    std::vector<PumpEvent> out;
    for_each_json_line(in, [&](const nlohmann::json& j) {
        PumpEvent e;
        e.id = j.value("id", static_cast<int>(out.size()));
        e.coin = j.at("coin").get<std::string>();
        e.exchange = j.at("exchange").get<std::string>();
        e.event_time = parse_iso8601(j.at("announce_time").get<std::string>());
        e.views_total = optional_views(j, "views");
        e.channels = j.value("channels", std::vector<std::string>{});
        e.pump_hour = floor_hour(e.event_time);
        if (j.contains("pump_hour") &&
            parse_iso8601(j.at("pump_hour").get<std::string>()) != e.pump_hour)
            throw DataError("pump_hour does not match announce_time");
        out.push_back(std::move(e));
    });
    return out;
}

void write_events(std::ostream& out, std::span<const PumpEvent> events) {
    for (const auto& e : events) {
        nlohmann::ordered_json j;
        j["id"] = e.id;
        j["coin"] = e.coin;
        j["exchange"] = e.exchange;
        j["channel"] = e.channels.empty() ? std::string{} : e.channels.front();
        j["announce_time"] = format_iso8601(e.event_time);
        j["views"] = e.views_total ? nlohmann::ordered_json(*e.views_total) : nlohmann::ordered_json();
        j["channels"] = e.channels;
        j["pump_hour"] = format_iso8601(e.pump_hour);
        out << j.dump() << '\n';
    }
}

}  // namespace pnd
