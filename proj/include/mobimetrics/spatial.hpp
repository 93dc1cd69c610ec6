#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "mobimetrics/geo.hpp"
#include "mobimetrics/records.hpp"

namespace mobimetrics {

// Ray-casting parity test. Boundary convention: points exactly on an edge or
// vertex count as inside (closed polygons). The convention is load-bearing for
// determinism, not geography — callers must not depend on which side of a
// shared edge a boundary point lands.
inline bool contains(const Polygon& poly, const GeoPoint& p) {
    bool inside = false;
    const std::size_t n = poly.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const GeoPoint& a = poly[j];
        const GeoPoint& b = poly[i];
        if (on_segment(a, b, p)) return true;
        if ((b.lat > p.lat) != (a.lat > p.lat)) {
            double x_cross = (a.lon - b.lon) * (p.lat - b.lat) / (a.lat - b.lat) + b.lon;
            if (p.lon < x_cross) inside = !inside;
        }
    }
    return inside;
}

// Uniform grid over AOI bounding boxes. Every AOI is registered in exactly the
// cells its bbox overlaps, so a point lookup degrades to a handful of exact
// contains() tests. ~6,000 city-block AOIs at the default 0.01 degree cell
// (~1 km) keep candidate lists at a few entries.
class AoiIndex {
public:
    AoiIndex() = default;

    AoiIndex(const AoiCatalog& catalog, double cell_size) : catalog_(&catalog), cell_size_(cell_size) {
        if (!(cell_size > 0.0)) throw std::invalid_argument("cell_size must be > 0");
        boxes_.reserve(catalog.size());
        for (std::uint32_t idx = 0; idx < catalog.size(); ++idx) {
            const Aoi& aoi = catalog.at(idx);
            BoundingBox box = bounding_box(aoi.polygon);
            boxes_.push_back(box);
            const std::int64_t cx0 = cell_coord(box.min_lon);
            const std::int64_t cx1 = cell_coord(box.max_lon);
            const std::int64_t cy0 = cell_coord(box.min_lat);
            const std::int64_t cy1 = cell_coord(box.max_lat);
            for (std::int64_t cx = cx0; cx <= cx1; ++cx)
                for (std::int64_t cy = cy0; cy <= cy1; ++cy) grid_[pack(cx, cy)].push_back(idx);
        }
    }

    double cell_size() const { return cell_size_; }
    const AoiCatalog& catalog() const { return *catalog_; }

    // Exactly the AOIs whose polygon contains the point, as ascending catalog
    // indices (the catalog is sorted by aoi_id, so index order is id order).
    void assign_indices(const GeoPoint& p, std::vector<std::uint32_t>& out) const {
        out.clear();
        auto it = grid_.find(pack(cell_coord(p.lon), cell_coord(p.lat)));
        if (it == grid_.end()) return;
        for (std::uint32_t idx : it->second) {
            if (!boxes_[idx].contains(p)) continue;
            if (contains(catalog_->at(idx).polygon, p)) out.push_back(idx);
        }
    }

    std::size_t grid_cells() const { return grid_.size(); }
    std::size_t candidates_in_cell_of(const GeoPoint& p) const {
        auto it = grid_.find(pack(cell_coord(p.lon), cell_coord(p.lat)));
        return it == grid_.end() ? 0 : it->second.size();
    }

private:
    std::int64_t cell_coord(double deg) const { return static_cast<std::int64_t>(std::floor(deg / cell_size_)); }

    static std::uint64_t pack(std::int64_t cx, std::int64_t cy) {
        return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(cx + 0x40000000)) << 32) |
               static_cast<std::uint64_t>(static_cast<std::uint32_t>(cy + 0x40000000));
    }

    const AoiCatalog* catalog_ = nullptr;
    double cell_size_ = 0.01;
    std::vector<BoundingBox> boxes_;
    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> grid_;
};

inline AoiIndex build_aoi_index(const AoiCatalog& catalog, double cell_size = 0.01) {
    return AoiIndex(catalog, cell_size);
}

// Ascending aoi_id list of the AOIs containing the point.
inline std::vector<std::string> assign(const GeoPoint& p, const AoiIndex& index) {
    std::vector<std::uint32_t> idxs;
    index.assign_indices(p, idxs);
    std::vector<std::string> ids;
    ids.reserve(idxs.size());
    for (auto i : idxs) ids.push_back(index.catalog().at(i).aoi_id);
    return ids;
}

// Streaming assignment of a point batch. The stream is split into fixed
// chunks processed by worker threads; per-chunk outputs are concatenated in
// chunk order, so the result is independent of the thread count. Output
// encoding per point: match count, then the matched catalog indices.
inline std::vector<std::uint32_t> assign_stream(const std::vector<GeoPoint>& points, const AoiIndex& index,
                                                unsigned n_threads) {
    if (n_threads == 0) n_threads = 1;
    const std::size_t n = points.size();
    const std::size_t n_chunks = std::max<std::size_t>(1, std::min<std::size_t>(n_threads * 4, (n + 4095) / 4096));
    const std::size_t chunk_len = (n + n_chunks - 1) / n_chunks;
    std::vector<std::vector<std::uint32_t>> chunk_out(n_chunks);

    auto work = [&](std::size_t chunk) {
        const std::size_t begin = chunk * chunk_len;
        const std::size_t end = std::min(n, begin + chunk_len);
        auto& out = chunk_out[chunk];
        out.reserve((end - begin) * 2);
        std::vector<std::uint32_t> idxs;
        for (std::size_t i = begin; i < end; ++i) {
            index.assign_indices(points[i], idxs);
            out.push_back(static_cast<std::uint32_t>(idxs.size()));
            out.insert(out.end(), idxs.begin(), idxs.end());
        }
    };

    if (n_threads == 1) {
        for (std::size_t c = 0; c < n_chunks; ++c) work(c);
    } else {
        std::vector<std::thread> pool;
        std::atomic<std::size_t> next{0};
        for (unsigned tNo = 0; tNo < n_threads; ++tNo)
            pool.emplace_back([&] {
                while (true) {
                    std::size_t c = next.fetch_add(1);
                    if (c >= n_chunks) break;
                    work(c);
                }
            });
        for (auto& t : pool) t.join();
    }

    std::size_t total = 0;
    for (const auto& c : chunk_out) total += c.size();
    std::vector<std::uint32_t> out;
    out.reserve(total);
    for (const auto& c : chunk_out) out.insert(out.end(), c.begin(), c.end());
    return out;
}

}  // namespace mobimetrics
