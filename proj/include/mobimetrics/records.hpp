#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "mobimetrics/calendar.hpp"
#include "mobimetrics/geo.hpp"

namespace mobimetrics {

// Inclusive timestamp window bounding a study, in seconds since epoch (UTC).
struct TimeWindow {
    std::int64_t start = 0;
    std::int64_t end = 0;

    bool contains(std::int64_t t) const { return t >= start && t <= end; }
};

struct PositioningRecord {
    std::string user_id;  // opaque anonymized token, non-empty, no whitespace
    GeoPoint point;
    std::int64_t timestamp = 0;  // seconds since epoch, UTC

    friend bool operator==(const PositioningRecord&, const PositioningRecord&) = default;
};

struct MapQueryRecord {
    std::string user_id;
    std::string poi_id;  // resolved against the POI catalog at join time, not parse time
    std::optional<std::string> keyword;
    std::int64_t timestamp = 0;

    friend bool operator==(const MapQueryRecord&, const MapQueryRecord&) = default;
};

struct Poi {
    std::string poi_id;
    std::string name;
    GeoPoint location;
    std::vector<std::string> category_path;  // root first, e.g. {"Shopping", "Supermarket"}
};

enum class AoiKind { IndustrialTraditional, IndustrialHighTech, Commercial };

inline const char* to_string(AoiKind k) {
    switch (k) {
        case AoiKind::IndustrialTraditional: return "IndustrialTraditional";
        case AoiKind::IndustrialHighTech: return "IndustrialHighTech";
        case AoiKind::Commercial: return "Commercial";
    }
    return "?";
}

inline AoiKind aoi_kind_from_string(const std::string& s) {
    if (s == "IndustrialTraditional") return AoiKind::IndustrialTraditional;
    if (s == "IndustrialHighTech") return AoiKind::IndustrialHighTech;
    if (s == "Commercial") return AoiKind::Commercial;
    throw std::runtime_error("unknown AOI kind label: '" + s + "'");
}

struct Aoi {
    std::string aoi_id;
    std::string name;
    AoiKind kind = AoiKind::Commercial;
    Polygon polygon;  // open ring, >= 3 vertices, simple, closure implicit
};

// Catalogs are immutable after load and safely shareable across threads.
// AOIs are kept sorted by aoi_id so that index positions give ascending-id
// iteration for free.
class AoiCatalog {
public:
    explicit AoiCatalog(std::vector<Aoi> aois = {}) : aois_(std::move(aois)) { reindex(); }

    const std::vector<Aoi>& all() const { return aois_; }
    std::size_t size() const { return aois_.size(); }
    const Aoi& at(std::size_t idx) const { return aois_.at(idx); }

    const Aoi* find(const std::string& id) const {
        auto it = by_id_.find(id);
        return it == by_id_.end() ? nullptr : &aois_[it->second];
    }
    std::optional<std::uint32_t> index_of(const std::string& id) const {
        auto it = by_id_.find(id);
        if (it == by_id_.end()) return std::nullopt;
        return it->second;
    }

private:
    void reindex() {
        std::sort(aois_.begin(), aois_.end(), [](const Aoi& a, const Aoi& b) { return a.aoi_id < b.aoi_id; });
        by_id_.clear();
        for (std::uint32_t i = 0; i < aois_.size(); ++i) {
            if (!by_id_.emplace(aois_[i].aoi_id, i).second)
                throw std::runtime_error("duplicate aoi_id: '" + aois_[i].aoi_id + "'");
        }
    }

    std::vector<Aoi> aois_;
    std::unordered_map<std::string, std::uint32_t> by_id_;
};

class PoiCatalog {
public:
    explicit PoiCatalog(std::vector<Poi> pois = {}) : pois_(std::move(pois)) {
        for (std::uint32_t i = 0; i < pois_.size(); ++i) {
            if (!by_id_.emplace(pois_[i].poi_id, i).second)
                throw std::runtime_error("duplicate poi_id: '" + pois_[i].poi_id + "'");
        }
    }

    const std::vector<Poi>& all() const { return pois_; }
    std::size_t size() const { return pois_.size(); }

    const Poi* find(const std::string& id) const {
        auto it = by_id_.find(id);
        return it == by_id_.end() ? nullptr : &pois_[it->second];
    }

private:
    std::vector<Poi> pois_;
    std::unordered_map<std::string, std::uint32_t> by_id_;
};

}  // namespace mobimetrics
