#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "areabd/io.hpp"
#include "areabd/measure.hpp"

namespace areabd {

/// Error carrying the config line/field that caused it.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Nested key-value config text:  [section] headers, `key = value` lines,
/// '#' comments.  Keys are tracked with their line numbers for diagnostics
/// and consumption is recorded so unknown keys can be reported.
class Config {
public:
    static Config parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file: " + path);
        std::stringstream ss;
        ss << in.rdbuf();
        return parse(ss.str(), path);
    }

    static Config parse(const std::string& text, const std::string& origin = "<string>") {
        Config cfg;
        cfg.origin_ = origin;
        std::istringstream in(text);
        std::string line, section;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            std::string s = strip(line);
            if (s.empty() || s[0] == '#') continue;
            if (s.front() == '[') {
                if (s.back() != ']')
                    throw ConfigError(cfg.where(lineno) + ": malformed section header: " + s);
                section = strip(s.substr(1, s.size() - 2));
                if (section.empty())
                    throw ConfigError(cfg.where(lineno) + ": empty section name");
                cfg.sections_[section];
                continue;
            }
            auto eq = s.find('=');
            if (eq == std::string::npos)
                throw ConfigError(cfg.where(lineno) + ": expected key = value, got: " + s);
            std::string key = strip(s.substr(0, eq));
            std::string value = strip(s.substr(eq + 1));
            auto hash = value.find('#');
            if (hash != std::string::npos) value = strip(value.substr(0, hash));
            if (key.empty()) throw ConfigError(cfg.where(lineno) + ": empty key");
            if (section.empty())
                throw ConfigError(cfg.where(lineno) + ": key outside any [section]");
            auto& sec = cfg.sections_[section];
            if (sec.count(key))
                throw ConfigError(cfg.where(lineno) + ": duplicate key '" + key + "' in [" +
                                  section + "]");
            sec[key] = Entry{value, lineno, false};
        }
        return cfg;
    }

    bool has(const std::string& section, const std::string& key) const {
        auto s = sections_.find(section);
        return s != sections_.end() && s->second.count(key);
    }

    std::string get_string(const std::string& section, const std::string& key) const {
        return entry(section, key).value;
    }

    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& fallback) const {
        return has(section, key) ? get_string(section, key) : fallback;
    }

    double get_double(const std::string& section, const std::string& key) const {
        const Entry& e = entry(section, key);
        try {
            std::size_t pos = 0;
            double v = std::stod(e.value, &pos);
            if (pos != e.value.size()) throw std::invalid_argument("");
            return v;
        } catch (...) {
            throw ConfigError(where(e.line) + ": field '" + key + "' in [" + section +
                              "] is not a number: " + e.value);
        }
    }

    double get_double(const std::string& section, const std::string& key, double fallback) const {
        return has(section, key) ? get_double(section, key) : fallback;
    }

    long get_long(const std::string& section, const std::string& key) const {
        const Entry& e = entry(section, key);
        try {
            std::size_t pos = 0;
            long v = std::stol(e.value, &pos);
            if (pos != e.value.size()) throw std::invalid_argument("");
            return v;
        } catch (...) {
            throw ConfigError(where(e.line) + ": field '" + key + "' in [" + section +
                              "] is not an integer: " + e.value);
        }
    }

    long get_long(const std::string& section, const std::string& key, long fallback) const {
        return has(section, key) ? get_long(section, key) : fallback;
    }

    std::uint64_t get_u64(const std::string& section, const std::string& key) const {
        const Entry& e = entry(section, key);
        try {
            std::size_t pos = 0;
            unsigned long long v = std::stoull(e.value, &pos);
            if (pos != e.value.size()) throw std::invalid_argument("");
            return v;
        } catch (...) {
            throw ConfigError(where(e.line) + ": field '" + key + "' in [" + section +
                              "] is not an unsigned integer: " + e.value);
        }
    }

    bool get_bool(const std::string& section, const std::string& key, bool fallback) const {
        if (!has(section, key)) return fallback;
        std::string v = get_string(section, key);
        if (v == "true" || v == "1" || v == "yes") return true;
        if (v == "false" || v == "0" || v == "no") return false;
        throw ConfigError(where(entry(section, key).line) + ": field '" + key +
                          "' must be a boolean, got: " + v);
    }

    std::vector<double> get_doubles(const std::string& section, const std::string& key) const {
        const Entry& e = entry(section, key);
        std::vector<double> out;
        std::stringstream ss(e.value);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = strip(item);
            if (item.empty()) continue;
            try {
                out.push_back(std::stod(item));
            } catch (...) {
                throw ConfigError(where(e.line) + ": field '" + key + "' in [" + section +
                                  "] has a non-numeric entry: " + item);
            }
        }
        if (out.empty())
            throw ConfigError(where(e.line) + ": field '" + key + "' is an empty list");
        return out;
    }

    int line_of(const std::string& section, const std::string& key) const {
        return entry(section, key).line;
    }

    /// Serialize back to text (canonical order) for round-trip checks and
    /// the resolved-config block of the manifest.
    std::string serialize() const {
        std::ostringstream os;
        for (const auto& [sec, kv] : sections_) {
            os << '[' << sec << "]\n";
            for (const auto& [k, e] : kv) os << k << " = " << e.value << '\n';
            os << '\n';
        }
        return os.str();
    }

    std::vector<std::pair<std::string, std::string>> all_entries() const {
        std::vector<std::pair<std::string, std::string>> out;
        for (const auto& [sec, kv] : sections_)
            for (const auto& [k, e] : kv) out.push_back({sec + "." + k, e.value});
        return out;
    }

    void override_value(const std::string& section, const std::string& key,
                        const std::string& value) {
        sections_[section][key] = Entry{value, 0, false};
    }

private:
    struct Entry {
        std::string value;
        int line = 0;
        bool used = false;
    };

    static std::string strip(const std::string& s) {
        std::size_t a = s.find_first_not_of(" \t\r\n");
        if (a == std::string::npos) return "";
        std::size_t b = s.find_last_not_of(" \t\r\n");
        return s.substr(a, b - a + 1);
    }

    const Entry& entry(const std::string& section, const std::string& key) const {
        auto s = sections_.find(section);
        if (s == sections_.end())
            throw ConfigError(origin_ + ": missing section [" + section + "]");
        auto k = s->second.find(key);
        if (k == s->second.end())
            throw ConfigError(origin_ + ": missing field '" + key + "' in [" + section + "]");
        return k->second;
    }

    std::string where(int line) const { return origin_ + ":" + std::to_string(line); }

    std::string origin_;
    std::map<std::string, std::map<std::string, Entry>> sections_;
};

/// Model block shared by all experiments.
inline ModelParams model_from_config(const Config& cfg) {
    int d = static_cast<int>(cfg.get_long("model", "d"));
    double R = cfg.get_double("model", "R");
    std::string kind = cfg.get_string("model", "domain");
    std::string mode = cfg.get_string("model", "rate_mode", "area");
    RateMode rm;
    if (mode == "area") rm = RateMode::area;
    else if (mode == "unit") rm = RateMode::unit;
    else throw ConfigError("model.rate_mode must be 'area' or 'unit', got: " + mode);
    DomainSpec dom;
    if (kind == "torus") {
        double L = cfg.get_double("model", "L");
        if (d >= 1 && d <= 2 && L > 0 && !(L > 4.0 * R))
            throw ConfigError("config line " + std::to_string(cfg.line_of("model", "L")) +
                              ": torus requires L > 4R (L = " + std::to_string(L) +
                              ", R = " + std::to_string(R) + ")");
        dom = DomainSpec::torus(d, L);
    } else if (kind == "box") {
        std::vector<double> b = cfg.get_doubles("model", "bounds");
        if (d == 1 && b.size() == 2) dom = DomainSpec::box(b[0], b[1]);
        else if (d == 2 && b.size() == 4) dom = DomainSpec::box(b[0], b[1], b[2], b[3]);
        else throw ConfigError("model.bounds needs 2 (d=1) or 4 (d=2) numbers");
    } else {
        throw ConfigError("model.domain must be 'torus' or 'box', got: " + kind);
    }
    return ModelParams(R, dom, rm);
}

inline Region region_from_list(const std::vector<double>& v, int d, const std::string& what) {
    if (d == 1 && v.size() == 2) return Region::box1(v[0], v[1]);
    if (d == 2 && v.size() == 4) return Region::box2(v[0], v[1], v[2], v[3]);
    throw ConfigError(what + " needs 2 (d=1) or 4 (d=2) numbers");
}

}  // namespace areabd
