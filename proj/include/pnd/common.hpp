#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace pnd {

// Epoch seconds (UTC) for candles and events, epoch milliseconds for ticks.
using EpochSeconds = std::int64_t;
using EpochMillis = std::int64_t;

inline constexpr EpochSeconds kHour = 3600;

// Error families. The CLI maps each onto a distinct exit code.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ISO-8601 UTC, `YYYY-MM-DDTHH:MM:SSZ`. Throws DataError on malformed input.
EpochSeconds parse_iso8601(std::string_view text);
std::string format_iso8601(EpochSeconds t);

// Same with optional `.mmm` fraction; output always carries milliseconds.
EpochMillis parse_iso8601_millis(std::string_view text);
std::string format_iso8601_millis(EpochMillis t);

constexpr bool is_hour_aligned(EpochSeconds t) { return t % kHour == 0; }

constexpr EpochSeconds floor_hour(EpochSeconds t) {
    EpochSeconds r = t % kHour;
    return r < 0 ? t - r - kHour : t - r;
}

// Decimal text <-> double. Formatting is the shortest text that parses back
// to the same double, so parse(format(x)) == x bit for bit.
std::optional<double> parse_decimal(std::string_view text);
std::string format_decimal(double value);

// 64-bit FNV-1a; used for model checksums and run manifests.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);

}  // namespace pnd
