#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mobimetrics {

// Planar geometry in lon/lat degrees. AOIs are city-block scale (well under
// ~1 km across), where the curvature error of treating degrees as planar
// coordinates is negligible. Polygons crossing the antimeridian are rejected
// at load, so no wraparound handling exists anywhere downstream.
struct GeoPoint {
    double lon = 0.0;
    double lat = 0.0;

    friend constexpr bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

inline bool geo_point_valid(const GeoPoint& p) {
    return std::isfinite(p.lon) && std::isfinite(p.lat) && p.lon >= -180.0 && p.lon <= 180.0 &&
           p.lat >= -90.0 && p.lat <= 90.0;
}

using Polygon = std::vector<GeoPoint>;

// Twice the signed area (shoelace). Positive for counter-clockwise rings.
inline double polygon_signed_area2(const Polygon& poly) {
    double acc = 0.0;
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++)
        acc += (poly[j].lon * poly[i].lat - poly[i].lon * poly[j].lat);
    return acc;
}

// > 0 when c lies left of a->b, < 0 right, == 0 collinear.
inline double orient(const GeoPoint& a, const GeoPoint& b, const GeoPoint& c) {
    return (b.lon - a.lon) * (c.lat - a.lat) - (b.lat - a.lat) * (c.lon - a.lon);
}

inline bool on_segment(const GeoPoint& a, const GeoPoint& b, const GeoPoint& p) {
    if (orient(a, b, p) != 0.0) return false;
    return std::min(a.lon, b.lon) <= p.lon && p.lon <= std::max(a.lon, b.lon) &&
           std::min(a.lat, b.lat) <= p.lat && p.lat <= std::max(a.lat, b.lat);
}

// True when segments [a,b] and [c,d] share any point, including endpoint
// touches and collinear overlap.
inline bool segments_intersect(const GeoPoint& a, const GeoPoint& b, const GeoPoint& c, const GeoPoint& d) {
    double d1 = orient(c, d, a);
    double d2 = orient(c, d, b);
    double d3 = orient(a, b, c);
    double d4 = orient(a, b, d);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
    if (d1 == 0 && on_segment(c, d, a)) return true;
    if (d2 == 0 && on_segment(c, d, b)) return true;
    if (d3 == 0 && on_segment(a, b, c)) return true;
    if (d4 == 0 && on_segment(a, b, d)) return true;
    return false;
}

// Euclidean distance from p to segment [a,b], in degrees. Test-support for
// excluding points inside an edge buffer from fuzz comparisons.
inline double point_segment_distance(const GeoPoint& a, const GeoPoint& b, const GeoPoint& p) {
    double vx = b.lon - a.lon, vy = b.lat - a.lat;
    double wx = p.lon - a.lon, wy = p.lat - a.lat;
    double c1 = vx * wx + vy * wy;
    double c2 = vx * vx + vy * vy;
    double t = c2 > 0 ? std::clamp(c1 / c2, 0.0, 1.0) : 0.0;
    double dx = wx - t * vx, dy = wy - t * vy;
    return std::sqrt(dx * dx + dy * dy);
}

// Validates the storage invariants of an AOI ring: >= 3 vertices, open storage
// (closure implicit, first vertex not repeated), in-range finite coordinates,
// non-zero area, no antimeridian crossing, and simplicity (no contact between
// non-adjacent edges, no zero-length edges, no collinear spike at a vertex).
// Returns an error description, or nullopt when valid.
inline std::optional<std::string> validate_polygon(const Polygon& poly) {
    const std::size_t n = poly.size();
    if (n < 3) return "polygon has < 3 vertices";
    for (const auto& p : poly)
        if (!geo_point_valid(p)) return "polygon vertex out of range";
    if (poly.front() == poly.back()) return "polygon repeats its first vertex (closure is implicit)";

    double min_lon = poly[0].lon, max_lon = poly[0].lon;
    for (const auto& p : poly) {
        min_lon = std::min(min_lon, p.lon);
        max_lon = std::max(max_lon, p.lon);
    }
    if (max_lon - min_lon > 180.0) return "polygon crosses the antimeridian";

    for (std::size_t i = 0; i < n; ++i) {
        const GeoPoint& a = poly[i];
        const GeoPoint& b = poly[(i + 1) % n];
        if (a == b) return "polygon has a zero-length edge";
    }

    for (std::size_t i = 0; i < n; ++i) {
        const GeoPoint& a = poly[i];
        const GeoPoint& b = poly[(i + 1) % n];
        // spike: next edge folds back onto this one
        const GeoPoint& c = poly[(i + 2) % n];
        if (orient(a, b, c) == 0.0 && on_segment(a, b, c) && c != a) return "polygon self-intersects";
        for (std::size_t j = i + 1; j < n; ++j) {
            bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
            if (adjacent) continue;
            const GeoPoint& c2 = poly[j];
            const GeoPoint& d2 = poly[(j + 1) % n];
            if (segments_intersect(a, b, c2, d2)) return "polygon self-intersects";
        }
    }
    if (polygon_signed_area2(poly) == 0.0) return "polygon has zero area";
    return std::nullopt;
}

struct BoundingBox {
    double min_lon = 0, min_lat = 0, max_lon = 0, max_lat = 0;

    bool contains(const GeoPoint& p) const {
        return p.lon >= min_lon && p.lon <= max_lon && p.lat >= min_lat && p.lat <= max_lat;
    }
};

inline BoundingBox bounding_box(const Polygon& poly) {
    BoundingBox b{poly[0].lon, poly[0].lat, poly[0].lon, poly[0].lat};
    for (const auto& p : poly) {
        b.min_lon = std::min(b.min_lon, p.lon);
        b.min_lat = std::min(b.min_lat, p.lat);
        b.max_lon = std::max(b.max_lon, p.lon);
        b.max_lat = std::max(b.max_lat, p.lat);
    }
    return b;
}

}  // namespace mobimetrics
