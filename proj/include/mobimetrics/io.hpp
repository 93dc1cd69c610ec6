#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mobimetrics/records.hpp"
#include "mobimetrics/util.hpp"

namespace mobimetrics {

// Event streams are dirty at scale: a malformed line is logged and skipped,
// never fatal. Catalogs are curated: any defect there aborts the run.
struct RejectEntry {
    std::size_t line = 0;
    std::string reason;
};

struct RejectLog {
    std::vector<RejectEntry> entries;

    void add(std::size_t line, std::string reason) { entries.push_back({line, std::move(reason)}); }
    std::size_t size() const { return entries.size(); }

    std::string to_csv() const {
        std::string out = "line,reason\n";
        for (const auto& e : entries) {
            out += std::to_string(e.line);
            out += ',';
            out += '"';
            for (char c : e.reason) {
                if (c == '"') out += "\"\"";
                else out += c;
            }
            out += "\"\n";
        }
        return out;
    }
};

namespace detail {

// Strict scanner for one flat NDJSON object. The event formats are a fixed
// wire contract (fields u/lon/lat/t and u/poi/kw/t, nothing else), so this
// parses exactly that shape and reports anything else as a reject reason.
class JsonLineScanner {
public:
    explicit JsonLineScanner(std::string_view line) : s_(line), pos_(0) {}

    std::optional<std::string> parse_object(
        const std::vector<std::string_view>& known_keys,
        std::vector<std::pair<std::string_view, std::string>>& string_fields,
        std::vector<std::pair<std::string_view, std::string_view>>& number_fields) {
        skip_ws();
        if (!consume('{')) return "expected '{'";
        skip_ws();
        if (consume('}')) return finish();
        while (true) {
            skip_ws();
            std::string key;
            if (auto err = parse_string(key)) return err;
            skip_ws();
            if (!consume(':')) return "expected ':' after field name";
            skip_ws();
            std::string_view interned;
            for (auto k : known_keys)
                if (k == key) interned = k;
            if (interned.empty()) return "unexpected field '" + key + "'";
            for (auto seen : seen_keys_)
                if (seen == interned) return "duplicate field '" + key + "'";
            seen_keys_.push_back(interned);
            if (pos_ < s_.size() && s_[pos_] == '"') {
                std::string val;
                if (auto err = parse_string(val)) return err;
                string_fields.emplace_back(interned, std::move(val));
            } else {
                std::size_t start = pos_;
                while (pos_ < s_.size() && s_[pos_] != ',' && s_[pos_] != '}' && s_[pos_] != ' ' &&
                       s_[pos_] != '\t')
                    ++pos_;
                if (pos_ == start) return "empty value for field '" + key + "'";
                number_fields.emplace_back(interned, s_.substr(start, pos_ - start));
            }
            skip_ws();
            if (consume(',')) continue;
            if (consume('}')) return finish();
            return "expected ',' or '}'";
        }
    }

private:
    std::optional<std::string> finish() {
        skip_ws();
        if (pos_ != s_.size()) return "trailing content after object";
        return std::nullopt;
    }

    std::optional<std::string> parse_string(std::string& out) {
        if (!consume('"')) return "expected string";
        out.clear();
        while (pos_ < s_.size()) {
            char c = s_[pos_++];
            if (c == '"') return std::nullopt;
            if (c == '\\') {
                if (pos_ >= s_.size()) return "unterminated escape";
                char e = s_[pos_++];
                switch (e) {
                    case '"': out += '"'; break;
                    case '\\': out += '\\'; break;
                    case '/': out += '/'; break;
                    case 'b': out += '\b'; break;
                    case 'f': out += '\f'; break;
                    case 'n': out += '\n'; break;
                    case 'r': out += '\r'; break;
                    case 't': out += '\t'; break;
                    case 'u': {
                        if (pos_ + 4 > s_.size()) return "bad \\u escape";
                        unsigned cp = 0;
                        for (int i = 0; i < 4; ++i) {
                            char h = s_[pos_++];
                            cp <<= 4;
                            if (h >= '0' && h <= '9') cp |= unsigned(h - '0');
                            else if (h >= 'a' && h <= 'f') cp |= unsigned(h - 'a' + 10);
                            else if (h >= 'A' && h <= 'F') cp |= unsigned(h - 'A' + 10);
                            else return "bad \\u escape";
                        }
                        append_utf8(out, cp);
                        break;
                    }
                    default: return "unknown escape";
                }
            } else {
                out += c;
            }
        }
        return "unterminated string";
    }

    static void append_utf8(std::string& out, unsigned cp) {
        if (cp < 0x80) {
            out += char(cp);
        } else if (cp < 0x800) {
            out += char(0xC0 | (cp >> 6));
            out += char(0x80 | (cp & 0x3F));
        } else {
            out += char(0xE0 | (cp >> 12));
            out += char(0x80 | ((cp >> 6) & 0x3F));
            out += char(0x80 | (cp & 0x3F));
        }
    }

    void skip_ws() {
        while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
    }
    bool consume(char c) {
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    std::string_view s_;
    std::size_t pos_;
    std::vector<std::string_view> seen_keys_;
};

inline std::optional<double> to_finite_double(std::string_view s) {
    double v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

inline std::optional<std::int64_t> to_int64(std::string_view s) {
    std::int64_t v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

}  // namespace detail

// Parses one positioning line. Returns the reject reason, or nullopt and
// fills `rec`.
inline std::optional<std::string> parse_positioning_line(std::string_view line, const TimeWindow& window,
                                                         PositioningRecord& rec) {
    if (trim(line).empty()) return "blank line";
    static const std::vector<std::string_view> keys = {"u", "lon", "lat", "t"};
    std::vector<std::pair<std::string_view, std::string>> strs;
    std::vector<std::pair<std::string_view, std::string_view>> nums;
    detail::JsonLineScanner scanner(line);
    if (auto err = scanner.parse_object(keys, strs, nums)) return err;

    const std::string* u = nullptr;
    std::optional<double> lon, lat;
    std::optional<std::int64_t> t;
    for (auto& [k, v] : strs) {
        if (k == "u") u = &v;
        else return "field '" + std::string(k) + "' must be a number";
    }
    for (auto& [k, v] : nums) {
        if (k == "lon") lon = detail::to_finite_double(v);
        else if (k == "lat") lat = detail::to_finite_double(v);
        else if (k == "t") t = detail::to_int64(v);
        else return "field '" + std::string(k) + "' must be a string";
    }
    if (!u) return "missing field 'u'";
    if (!lon) return "missing or invalid field 'lon'";
    if (!lat) return "missing or invalid field 'lat'";
    if (!t) return "missing or non-integer field 't'";
    if (u->empty()) return "empty user_id";
    if (contains_whitespace(*u)) return "user_id contains whitespace";
    if (*lon < -180.0 || *lon > 180.0) return "lon out of range";
    if (*lat < -90.0 || *lat > 90.0) return "lat out of range";
    if (!window.contains(*t)) return "timestamp outside study window";
    rec.user_id = *u;
    rec.point = GeoPoint{*lon, *lat};
    rec.timestamp = *t;
    return std::nullopt;
}

inline std::optional<std::string> parse_query_line(std::string_view line,
                                                   const std::optional<TimeWindow>& window,
                                                   MapQueryRecord& rec) {
    if (trim(line).empty()) return "blank line";
    static const std::vector<std::string_view> keys = {"u", "poi", "kw", "t"};
    std::vector<std::pair<std::string_view, std::string>> strs;
    std::vector<std::pair<std::string_view, std::string_view>> nums;
    detail::JsonLineScanner scanner(line);
    if (auto err = scanner.parse_object(keys, strs, nums)) return err;

    const std::string* u = nullptr;
    const std::string* poi = nullptr;
    const std::string* kw = nullptr;
    std::optional<std::int64_t> t;
    for (auto& [k, v] : strs) {
        if (k == "u") u = &v;
        else if (k == "poi") poi = &v;
        else if (k == "kw") kw = &v;
        else return "field 't' must be a number";
    }
    for (auto& [k, v] : nums) {
        if (k == "t") t = detail::to_int64(v);
        else return "field '" + std::string(k) + "' must be a string";
    }
    if (!u) return "missing field 'u'";
    if (!poi) return "missing field 'poi'";
    if (!t) return "missing or non-integer field 't'";
    if (u->empty()) return "empty user_id";
    if (contains_whitespace(*u)) return "user_id contains whitespace";
    if (poi->empty()) return "empty poi_id";
    if (window && !window->contains(*t)) return "timestamp outside study window";
    rec.user_id = *u;
    rec.poi_id = *poi;
    rec.keyword = kw ? std::optional<std::string>(*kw) : std::nullopt;
    rec.timestamp = *t;
    return std::nullopt;
}

// NDJSON positioning loader. Every input line becomes either a record or a
// reject entry; file order is preserved. Throws only when the file itself is
// unreadable.
inline std::pair<std::vector<PositioningRecord>, RejectLog> load_positioning(const std::string& path,
                                                                             const TimeWindow& window) {
    std::string buf = read_file(path);
    std::vector<PositioningRecord> records;
    RejectLog rejects;
    records.reserve(buf.size() / 64 + 1);
    PositioningRecord rec;
    for_each_line(buf, [&](std::size_t line_no, std::string_view line) {
        if (auto err = parse_positioning_line(line, window, rec))
            rejects.add(line_no, std::move(*err));
        else
            records.push_back(rec);
    });
    return {std::move(records), std::move(rejects)};
}

inline std::pair<std::vector<MapQueryRecord>, RejectLog> load_queries(
    const std::string& path, const std::optional<TimeWindow>& window = std::nullopt) {
    std::string buf = read_file(path);
    std::vector<MapQueryRecord> records;
    RejectLog rejects;
    records.reserve(buf.size() / 64 + 1);
    MapQueryRecord rec;
    for_each_line(buf, [&](std::size_t line_no, std::string_view line) {
        if (auto err = parse_query_line(line, window, rec))
            rejects.add(line_no, std::move(*err));
        else
            records.push_back(rec);
    });
    return {std::move(records), std::move(rejects)};
}

inline void append_json_string(std::string& out, std::string_view s) {
    out += '"';
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            case '\b': out += "\\b"; break;
            case '\f': out += "\\f"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    out += '"';
}

inline void serialize_positioning(std::string& out, const PositioningRecord& r) {
    out += "{\"u\":";
    append_json_string(out, r.user_id);
    out += ",\"lon\":";
    out += format_double(r.point.lon);
    out += ",\"lat\":";
    out += format_double(r.point.lat);
    out += ",\"t\":";
    out += std::to_string(r.timestamp);
    out += "}\n";
}

inline void serialize_query(std::string& out, const MapQueryRecord& r) {
    out += "{\"u\":";
    append_json_string(out, r.user_id);
    out += ",\"poi\":";
    append_json_string(out, r.poi_id);
    if (r.keyword) {
        out += ",\"kw\":";
        append_json_string(out, *r.keyword);
    }
    out += ",\"t\":";
    out += std::to_string(r.timestamp);
    out += "}\n";
}

namespace detail {

// RFC-4180-style CSV field splitter (quotes, doubled quotes). Good enough for
// the catalog files; event streams never go through CSV.
inline std::optional<std::vector<std::string>> split_csv_row(std::string_view line) {
    std::vector<std::string> fields;
    std::string cur;
    bool in_quotes = false;
    std::size_t i = 0;
    while (i < line.size()) {
        char c = line[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    i += 2;
                    continue;
                }
                in_quotes = false;
                ++i;
                continue;
            }
            cur += c;
            ++i;
        } else if (c == '"') {
            if (!cur.empty()) return std::nullopt;  // quote must open a field
            in_quotes = true;
            ++i;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
            ++i;
        } else {
            cur += c;
            ++i;
        }
    }
    if (in_quotes) return std::nullopt;
    fields.push_back(std::move(cur));
    return fields;
}

}  // namespace detail

inline std::string csv_escape(std::string_view s) {
    bool needs = s.find_first_of(",\"\n") != std::string_view::npos;
    if (!needs) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

// POI catalog CSV: header `poi_id,name,lon,lat,category_path`, one row per
// POI, category path segments joined by '/'. Any malformed row is fatal.
inline PoiCatalog load_poi_catalog(const std::string& path) {
    std::string buf = read_file(path);
    std::vector<Poi> pois;
    bool saw_header = false;
    for_each_line(buf, [&](std::size_t line_no, std::string_view line) {
        if (trim(line).empty()) return;
        auto fields = detail::split_csv_row(line);
        if (!fields || fields->size() != 5)
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": malformed POI row");
        if (!saw_header) {
            if ((*fields)[0] != "poi_id" || (*fields)[1] != "name" || (*fields)[2] != "lon" ||
                (*fields)[3] != "lat" || (*fields)[4] != "category_path")
                throw std::runtime_error(path + ": expected header poi_id,name,lon,lat,category_path");
            saw_header = true;
            return;
        }
        Poi p;
        p.poi_id = (*fields)[0];
        p.name = (*fields)[1];
        p.location.lon = parse_double((*fields)[2], "lon");
        p.location.lat = parse_double((*fields)[3], "lat");
        if (p.poi_id.empty())
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": empty poi_id");
        if (!geo_point_valid(p.location))
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": POI coordinates out of range");
        for (auto& seg : split_trimmed((*fields)[4], '/'))
            if (!seg.empty()) p.category_path.push_back(std::move(seg));
        if (p.category_path.empty())
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": empty category_path");
        pois.push_back(std::move(p));
    });
    if (!saw_header) throw std::runtime_error(path + ": missing POI header row");
    return PoiCatalog(std::move(pois));  // throws on duplicate poi_id
}

// AOI catalog: JSON array of {aoi_id, name, kind, polygon=[[lon,lat],...]}.
// Invalid polygons are fatal and name the offending aoi_id.
inline AoiCatalog load_aoi_catalog(const std::string& path) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(path + ": invalid JSON: " + e.what());
    }
    if (!doc.is_array()) throw std::runtime_error(path + ": expected a JSON array of AOIs");
    std::vector<Aoi> aois;
    for (const auto& item : doc) {
        Aoi a;
        try {
            a.aoi_id = item.at("aoi_id").get<std::string>();
            a.name = item.at("name").get<std::string>();
            a.kind = aoi_kind_from_string(item.at("kind").get<std::string>());
            for (const auto& v : item.at("polygon")) {
                if (!v.is_array() || v.size() != 2)
                    throw std::runtime_error("polygon vertex must be [lon, lat]");
                a.polygon.push_back(GeoPoint{v[0].get<double>(), v[1].get<double>()});
            }
        } catch (const nlohmann::json::exception& e) {
            throw std::runtime_error(path + ": malformed AOI entry: " + e.what());
        }
        if (a.aoi_id.empty()) throw std::runtime_error(path + ": AOI with empty aoi_id");
        if (auto err = validate_polygon(a.polygon))
            throw std::runtime_error(path + ": aoi '" + a.aoi_id + "': " + *err);
        aois.push_back(std::move(a));
    }
    return AoiCatalog(std::move(aois));  // throws on duplicate aoi_id
}

inline std::pair<PoiCatalog, AoiCatalog> load_catalog(const std::string& poi_path, const std::string& aoi_path) {
    return {load_poi_catalog(poi_path), load_aoi_catalog(aoi_path)};
}

}  // namespace mobimetrics
