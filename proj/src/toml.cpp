#include "levylab/toml.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace levylab {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

// strips a trailing comment, respecting quoted strings
std::string strip_comment(const std::string& line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_string = !in_string;
        if (line[i] == '#' && !in_string) return line.substr(0, i);
    }
    return line;
}

TomlValue parse_scalar(const std::string& raw) {
    const std::string s = trim(raw);
    if (s.empty()) throw std::runtime_error("toml: empty value");
    if (s.front() == '"') {
        if (s.size() < 2 || s.back() != '"')
            throw std::runtime_error("toml: unterminated string");
        std::string out;
        for (std::size_t i = 1; i + 1 < s.size(); ++i) {
            if (s[i] == '\\' && i + 2 < s.size()) {
                ++i;
                switch (s[i]) {
                    case 'n': out.push_back('\n'); break;
                    case 't': out.push_back('\t'); break;
                    case '"': out.push_back('"'); break;
                    case '\\': out.push_back('\\'); break;
                    default: throw std::runtime_error("toml: bad escape");
                }
            } else {
                out.push_back(s[i]);
            }
        }
        return TomlValue{out};
    }
    if (s == "true") return TomlValue{true};
    if (s == "false") return TomlValue{false};
    const bool looks_float = s.find_first_of(".eE") != std::string::npos ||
                             s == "inf" || s == "-inf" || s == "nan";
    try {
        std::size_t used = 0;
        if (!looks_float) {
            const std::int64_t v = std::stoll(s, &used);
            if (used == s.size()) return TomlValue{v};
        }
        const double v = std::stod(s, &used);
        if (used == s.size()) return TomlValue{v};
    } catch (const std::exception&) {
    }
    throw std::runtime_error("toml: unparsable value '" + s + "'");
}

TomlValue parse_value(const std::string& raw) {
    const std::string s = trim(raw);
    if (!s.empty() && s.front() == '[') {
        if (s.back() != ']') throw std::runtime_error("toml: unterminated array");
        std::vector<TomlValue> items;
        std::string body = s.substr(1, s.size() - 2);
        std::string cur;
        bool in_string = false;
        int depth = 0;
        for (char c : body) {
            if (c == '"') in_string = !in_string;
            if (!in_string && c == '[') ++depth;
            if (!in_string && c == ']') --depth;
            if (c == ',' && !in_string && depth == 0) {
                if (!trim(cur).empty()) items.push_back(parse_value(cur));
                cur.clear();
            } else {
                cur.push_back(c);
            }
        }
        if (!trim(cur).empty()) items.push_back(parse_value(cur));
        return TomlValue{items};
    }
    return parse_scalar(s);
}

void canonical_value(const TomlValue& v, std::ostringstream& out) {
    if (std::holds_alternative<bool>(v.data)) {
        out << (std::get<bool>(v.data) ? "true" : "false");
    } else if (std::holds_alternative<std::int64_t>(v.data)) {
        out << std::get<std::int64_t>(v.data);
    } else if (std::holds_alternative<double>(v.data)) {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.17g", std::get<double>(v.data));
        out << buf;
    } else if (std::holds_alternative<std::string>(v.data)) {
        out << '"' << std::get<std::string>(v.data) << '"';
    } else {
        out << '[';
        const auto& items = std::get<std::vector<TomlValue>>(v.data);
        for (std::size_t i = 0; i < items.size(); ++i) {
            if (i) out << ',';
            canonical_value(items[i], out);
        }
        out << ']';
    }
}

} // namespace

bool TomlValue::is_number() const {
    return std::holds_alternative<std::int64_t>(data) ||
           std::holds_alternative<double>(data);
}

double TomlValue::as_double() const {
    if (std::holds_alternative<double>(data)) return std::get<double>(data);
    if (std::holds_alternative<std::int64_t>(data))
        return static_cast<double>(std::get<std::int64_t>(data));
    throw std::runtime_error("toml: expected a number");
}

std::int64_t TomlValue::as_int() const {
    if (std::holds_alternative<std::int64_t>(data))
        return std::get<std::int64_t>(data);
    throw std::runtime_error("toml: expected an integer");
}

bool TomlValue::as_bool() const {
    if (std::holds_alternative<bool>(data)) return std::get<bool>(data);
    throw std::runtime_error("toml: expected a boolean");
}

const std::string& TomlValue::as_string() const {
    if (std::holds_alternative<std::string>(data))
        return std::get<std::string>(data);
    throw std::runtime_error("toml: expected a string");
}

std::vector<double> TomlValue::as_double_array() const {
    if (!std::holds_alternative<std::vector<TomlValue>>(data))
        throw std::runtime_error("toml: expected an array");
    std::vector<double> out;
    for (const auto& item : std::get<std::vector<TomlValue>>(data))
        out.push_back(item.as_double());
    return out;
}

bool TomlDoc::has(const std::string& section, const std::string& key) const {
    auto it = sections.find(section);
    return it != sections.end() && it->second.count(key) > 0;
}

const TomlValue& TomlDoc::at(const std::string& section,
                             const std::string& key) const {
    auto it = sections.find(section);
    if (it == sections.end() || !it->second.count(key))
        throw std::runtime_error("toml: missing key '" + section + "." + key + "'");
    return it->second.at(key);
}

double TomlDoc::get_double(const std::string& section, const std::string& key,
                           double fallback) const {
    return has(section, key) ? at(section, key).as_double() : fallback;
}

std::int64_t TomlDoc::get_int(const std::string& section, const std::string& key,
                              std::int64_t fallback) const {
    return has(section, key) ? at(section, key).as_int() : fallback;
}

std::string TomlDoc::get_string(const std::string& section, const std::string& key,
                                const std::string& fallback) const {
    return has(section, key) ? at(section, key).as_string() : fallback;
}

bool TomlDoc::get_bool(const std::string& section, const std::string& key,
                       bool fallback) const {
    return has(section, key) ? at(section, key).as_bool() : fallback;
}

std::string TomlDoc::canonical() const {
    std::ostringstream out;
    for (const auto& [name, table] : sections) {
        for (const auto& [key, value] : table) {
            out << name << '.' << key << '=';
            canonical_value(value, out);
            out << '\n';
        }
    }
    return out.str();
}

TomlDoc parse_toml(const std::string& text) {
    TomlDoc doc;
    std::string section;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(strip_comment(line));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::runtime_error("toml: bad section at line " +
                                         std::to_string(lineno));
            section = trim(line.substr(1, line.size() - 2));
            doc.sections[section];
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("toml: expected key = value at line " +
                                     std::to_string(lineno));
        const std::string key = trim(line.substr(0, eq));
        if (key.empty())
            throw std::runtime_error("toml: empty key at line " +
                                     std::to_string(lineno));
        doc.sections[section][key] = parse_value(line.substr(eq + 1));
    }
    return doc;
}

TomlDoc load_toml_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("toml: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_toml(buf.str());
}

} // namespace levylab
