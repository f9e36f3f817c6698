#include "pnd/common.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>

namespace pnd {

namespace {

bool read_digits(std::string_view s, std::size_t pos, std::size_t n, int& out) {
    if (pos + n > s.size()) return false;
    int v = 0;
    for (std::size_t i = pos; i < pos + n; ++i) {
        char c = s[i];
        if (c < '0' || c > '9') return false;
        v = v * 10 + (c - '0');
    }
    out = v;
    return true;
}

// Parses the `YYYY-MM-DDTHH:MM:SS` prefix; returns epoch seconds.
EpochSeconds parse_prefix(std::string_view text) {
    int y, mo, d, h, mi, s;
    bool ok = text.size() >= 19 && read_digits(text, 0, 4, y) && text[4] == '-' &&
              read_digits(text, 5, 2, mo) && text[7] == '-' && read_digits(text, 8, 2, d) &&
              text[10] == 'T' && read_digits(text, 11, 2, h) && text[13] == ':' &&
              read_digits(text, 14, 2, mi) && text[16] == ':' && read_digits(text, 17, 2, s);
    if (!ok || h > 23 || mi > 59 || s > 59)
        throw DataError("malformed timestamp '" + std::string(text) + "'");
    using namespace std::chrono;
    year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) throw DataError("invalid calendar date '" + std::string(text) + "'");
    auto days = sys_days{ymd}.time_since_epoch().count();
    return static_cast<EpochSeconds>(days) * 86400 + h * 3600 + mi * 60 + s;
}

std::string format_prefix(EpochSeconds t) {
    using namespace std::chrono;
    EpochSeconds days = t / 86400;
    EpochSeconds rem = t % 86400;
    if (rem < 0) {
        rem += 86400;
        days -= 1;
    }
    year_month_day ymd{sys_days{std::chrono::days{days}}};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(rem / 3600), static_cast<int>(rem / 60 % 60),
                  static_cast<int>(rem % 60));
    return buf;
}

}  // namespace

EpochSeconds parse_iso8601(std::string_view text) {
    EpochSeconds t = parse_prefix(text);
    if (text.size() != 20 || text[19] != 'Z')
        throw DataError("timestamp must end in 'Z': '" + std::string(text) + "'");
    return t;
}

std::string format_iso8601(EpochSeconds t) { return format_prefix(t) + "Z"; }

EpochMillis parse_iso8601_millis(std::string_view text) {
    EpochSeconds t = parse_prefix(text);
    std::string_view rest = text.substr(19);
    int ms = 0;
    if (!rest.empty() && rest.front() == '.') {
        if (!read_digits(rest, 1, 3, ms) || rest.size() != 5 || rest[4] != 'Z')
            throw DataError("malformed millisecond timestamp '" + std::string(text) + "'");
    } else if (rest != "Z") {
        throw DataError("timestamp must end in 'Z': '" + std::string(text) + "'");
    }
    return t * 1000 + ms;
}

std::string format_iso8601_millis(EpochMillis t) {
    EpochSeconds s = t / 1000;
    EpochMillis ms = t % 1000;
    if (ms < 0) {
        ms += 1000;
        s -= 1;
    }
    char buf[8];
    std::snprintf(buf, sizeof buf, ".%03dZ", static_cast<int>(ms));
    return format_prefix(s) + buf;
}

std::optional<double> parse_decimal(std::string_view text) {
    if (text.empty()) return std::nullopt;
    if (text.front() == '+') text.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
    return v;
}

std::string format_decimal(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, ptr);
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace pnd
