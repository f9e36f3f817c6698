#include "pnd/run_config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "pnd/common.hpp"

namespace pnd {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

bool valid_key(std::string_view k) {
    if (k.empty()) return false;
    for (char c : k)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.'))
            return false;
    return true;
}

// Drops a trailing comment and unquotes the value.
std::string parse_value(std::string_view raw, std::size_t line_no) {
    raw = trim(raw);
    if (!raw.empty() && raw.front() == '"') {
        auto close = raw.find('"', 1);
        if (close == std::string_view::npos)
            throw UsageError("config line " + std::to_string(line_no) + ": unterminated string");
        auto rest = trim(raw.substr(close + 1));
        if (!rest.empty() && rest.front() != '#')
            throw UsageError("config line " + std::to_string(line_no) + ": text after string");
        return std::string(raw.substr(1, close - 1));
    }
    auto hash = raw.find('#');
    if (hash != std::string_view::npos) raw = trim(raw.substr(0, hash));
    if (raw.empty()) throw UsageError("config line " + std::to_string(line_no) + ": empty value");
    return std::string(raw);
}

}  // namespace

RunConfig RunConfig::parse(std::string_view text) {
    RunConfig cfg;
    std::string section;
    std::size_t line_no = 0;
    while (!text.empty()) {
        auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        line = trim(line);
        if (line.empty() || line.front() == '#') continue;
        if (line.front() == '[') {
            auto close = line.find(']');
            auto name = close == std::string_view::npos ? std::string_view{} : trim(line.substr(1, close - 1));
            if (!valid_key(name))
                throw UsageError("config line " + std::to_string(line_no) + ": bad section header");
            section = std::string(name) + ".";
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw UsageError("config line " + std::to_string(line_no) + ": expected key = value");
        auto key = trim(line.substr(0, eq));
        if (!valid_key(key))
            throw UsageError("config line " + std::to_string(line_no) + ": bad key '" +
                             std::string(key) + "'");
        std::string full = section + std::string(key);
        if (cfg.values_.count(full))
            throw UsageError("config line " + std::to_string(line_no) + ": duplicate key '" + full + "'");
        cfg.values_[full] = parse_value(line.substr(eq + 1), line_no);
    }
    return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot read config file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

void RunConfig::set(const std::string& key, std::string value) {
    if (!valid_key(key)) throw UsageError("bad config key '" + key + "'");
    values_[key] = std::move(value);
}

void RunConfig::set_assignment(std::string_view assignment) {
    auto eq = assignment.find('=');
    if (eq == std::string_view::npos)
        throw UsageError("--set expects key=value, got '" + std::string(assignment) + "'");
    set(std::string(trim(assignment.substr(0, eq))), std::string(trim(assignment.substr(eq + 1))));
}

std::optional<std::string> RunConfig::get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
}

std::string RunConfig::require(const std::string& key) const {
    auto v = get(key);
    if (!v) throw UsageError("missing required setting '" + key + "'");
    return *v;
}

std::string RunConfig::get_string(const std::string& key, const std::string& fallback) const {
    return get(key).value_or(fallback);
}

double RunConfig::get_double(const std::string& key, double fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    auto d = parse_decimal(*v);
    if (!d) throw UsageError("setting '" + key + "' expects a number, got '" + *v + "'");
    return *d;
}

std::uint64_t RunConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc{} || ptr != v->data() + v->size())
        throw UsageError("setting '" + key + "' expects a non-negative integer, got '" + *v + "'");
    return out;
}

bool RunConfig::get_bool(const std::string& key, bool fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1") return true;
    if (*v == "false" || *v == "0") return false;
    throw UsageError("setting '" + key + "' expects true or false, got '" + *v + "'");
}

void RunConfig::check_keys(const std::set<std::string>& allowed,
                           const std::set<std::string>& allowed_prefixes) const {
    for (const auto& [key, value] : values_) {
        if (allowed.count(key)) continue;
        bool ok = false;
        for (const auto& p : allowed_prefixes) ok = ok || key.rfind(p, 0) == 0;
        if (!ok) throw UsageError("unknown setting '" + key + "' for this command");
    }
}

std::string RunConfig::canonical(const std::set<std::string>& exclude) const {
    std::string out;
    for (const auto& [key, value] : values_) {
        if (exclude.count(key)) continue;
        out += key;
        out += '=';
        out += value;
        out += '\n';
    }
    return out;
}

}  // namespace pnd
