#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "mobimetrics/calendar.hpp"
#include "mobimetrics/util.hpp"

namespace mobimetrics {

// Flat `key = value` config file. '#' starts a comment, blank lines are
// ignored. Everything that affects numbers lives in a config file so a run is
// auditable from its inputs alone.
class ConfigFile {
public:
    static ConfigFile parse(const std::string& text, const std::string& origin = "<config>") {
        ConfigFile cfg;
        cfg.origin_ = origin;
        for_each_line(text, [&](std::size_t line_no, std::string_view raw) {
            std::string_view line = raw;
            if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
            line = trim(line);
            if (line.empty()) return;
            auto eq = line.find('=');
            if (eq == std::string_view::npos)
                throw std::runtime_error(origin + ":" + std::to_string(line_no) + ": expected 'key = value'");
            std::string key(trim(line.substr(0, eq)));
            std::string value(trim(line.substr(eq + 1)));
            if (key.empty())
                throw std::runtime_error(origin + ":" + std::to_string(line_no) + ": empty key");
            if (!cfg.values_.emplace(key, value).second)
                throw std::runtime_error(origin + ":" + std::to_string(line_no) + ": duplicate key '" + key + "'");
        });
        return cfg;
    }

    static ConfigFile load(const std::string& path) { return parse(read_file(path), path); }

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::string get_string(const std::string& key) const { return raw(key); }
    std::string get_string(const std::string& key, const std::string& dflt) const {
        return has(key) ? raw(key) : dflt;
    }

    std::int64_t get_int(const std::string& key) const { return parse_int(raw(key), key.c_str()); }
    std::int64_t get_int(const std::string& key, std::int64_t dflt) const {
        return has(key) ? get_int(key) : dflt;
    }

    double get_double(const std::string& key) const { return parse_double(raw(key), key.c_str()); }
    double get_double(const std::string& key, double dflt) const { return has(key) ? get_double(key) : dflt; }

    bool get_bool(const std::string& key, bool dflt) const {
        if (!has(key)) return dflt;
        const std::string v = raw(key);
        if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
        if (v == "false" || v == "0" || v == "no" || v == "off") return false;
        throw std::runtime_error(origin_ + ": key '" + key + "': expected boolean, got '" + v + "'");
    }

    std::int64_t get_date(const std::string& key) const { return parse_date(raw(key)); }
    std::int64_t get_date(const std::string& key, std::int64_t dflt) const {
        return has(key) ? get_date(key) : dflt;
    }

    MonthId get_month(const std::string& key) const { return parse_month(raw(key)); }

    std::vector<std::string> get_list(const std::string& key) const {
        if (!has(key)) return {};
        auto items = split_trimmed(raw(key), ',');
        std::vector<std::string> out;
        for (auto& s : items)
            if (!s.empty()) out.push_back(std::move(s));
        return out;
    }

    const std::map<std::string, std::string>& entries() const { return values_; }
    const std::string& origin() const { return origin_; }

private:
    std::string raw(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) throw std::runtime_error(origin_ + ": missing required key '" + key + "'");
        return it->second;
    }

    std::string origin_;
    std::map<std::string, std::string> values_;
};

}  // namespace mobimetrics
