#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace levylab {

// Small TOML subset sufficient for experiment configs: top-level and
// single-level [section] tables, keys mapping to strings, integers, floats,
// booleans, or flat arrays of those. Comments start with '#'.
struct TomlValue {
    std::variant<bool, std::int64_t, double, std::string,
                 std::vector<TomlValue>> data;

    bool is_number() const;
    double as_double() const;
    std::int64_t as_int() const;
    bool as_bool() const;
    const std::string& as_string() const;
    std::vector<double> as_double_array() const;
};

struct TomlDoc {
    // section "" holds top-level keys
    std::map<std::string, std::map<std::string, TomlValue>> sections;

    bool has(const std::string& section, const std::string& key) const;
    const TomlValue& at(const std::string& section, const std::string& key) const;

    double get_double(const std::string& section, const std::string& key,
                      double fallback) const;
    std::int64_t get_int(const std::string& section, const std::string& key,
                         std::int64_t fallback) const;
    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& fallback) const;
    bool get_bool(const std::string& section, const std::string& key,
                  bool fallback) const;

    // whitespace-insensitive canonical dump used for config hashing
    std::string canonical() const;
};

TomlDoc parse_toml(const std::string& text);
TomlDoc load_toml_file(const std::string& path);

} // namespace levylab
