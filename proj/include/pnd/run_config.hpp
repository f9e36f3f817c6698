#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>

namespace pnd {

// Flat key/value settings read from a TOML-style file:
//
//   # comment
//   seed = 7
//   candles = "data/candles.csv"
//   [synth]
//   n_coins = 50        -> key "synth.n_coins"
//
// Values are scalars (quoted strings, numbers, true/false). Later overrides
// replace file values, which is how command-line flags win.
class RunConfig {
public:
    static RunConfig parse(std::string_view text);
    static RunConfig load(const std::string& path);

    void set(const std::string& key, std::string value);
    // "key=value" as given to --set.
    void set_assignment(std::string_view assignment);

    bool has(const std::string& key) const { return values_.count(key) > 0; }
    std::optional<std::string> get(const std::string& key) const;
    std::string require(const std::string& key) const;

    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    // Throws UsageError naming the first key that is neither in `allowed`
    // nor under one of `allowed_prefixes`.
    void check_keys(const std::set<std::string>& allowed,
                    const std::set<std::string>& allowed_prefixes = {}) const;

    // Sorted `key=value` lines without the keys in `exclude`.
    std::string canonical(const std::set<std::string>& exclude = {}) const;

    const std::map<std::string, std::string>& values() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

}  // namespace pnd
