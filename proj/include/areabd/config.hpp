#pragma once

#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include "areabd/model.hpp"

namespace areabd {

/// Hash index over points with cell side >= 2R, so that all points within
/// distance 2R of a query location sit in the 3^d cells around it.  On a
/// torus the lattice tiles [0,L)^d exactly (cell side L / floor(L/2R));
/// on boxes the lattice has side exactly 2R, anchored at the box corner,
/// and extends over all of R^d via integer keys.
class SpatialGrid {
public:
    SpatialGrid() = default;

    SpatialGrid(const DomainSpec& dom, double R) : dom_(dom) {
        if (dom.kind == DomainKind::torus) {
            for (int c = 0; c < dom.d; ++c) {
                ncells_[c] = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(dom.L / (2.0 * R))));
                cell_[c] = dom.L / static_cast<double>(ncells_[c]);
            }
        } else {
            for (int c = 0; c < dom.d; ++c) {
                ncells_[c] = 0;  // unbounded lattice
                cell_[c] = 2.0 * R;
            }
        }
    }

    std::int64_t cell_index(double x, int axis) const {
        double base = dom_.kind == DomainKind::torus ? 0.0 : dom_.lo[axis];
        auto i = static_cast<std::int64_t>(std::floor((x - base) / cell_[axis]));
        if (dom_.kind == DomainKind::torus) {
            i %= ncells_[axis];
            if (i < 0) i += ncells_[axis];
        }
        return i;
    }

    std::int64_t key_of(const Vec& x) const {
        std::int64_t i = cell_index(x[0], 0);
        std::int64_t j = dom_.d == 2 ? cell_index(x[1], 1) : 0;
        return pack(i, j);
    }

    void insert(int id, const Vec& x) { buckets_[key_of(x)].push_back(id); }

    void erase(int id, const Vec& x) {
        auto it = buckets_.find(key_of(x));
        if (it == buckets_.end()) return;
        auto& v = it->second;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (v[i] == id) {
                v[i] = v.back();
                v.pop_back();
                break;
            }
        }
        if (v.empty()) buckets_.erase(it);
    }

    /// Visit ids in the (2*rings+1)^d cells around x (each id exactly once).
    /// One ring reaches distance >= one cell side >= 2R.
    template <typename F>
    void for_candidates(const Vec& x, F&& f, int rings = 1) const {
        std::int64_t ci = cell_index(x[0], 0);
        std::int64_t cj = dom_.d == 2 ? cell_index(x[1], 1) : 0;
        std::int64_t seen[49];
        int nseen = 0;
        if (rings > 3) rings = 3;
        for (std::int64_t di = -rings; di <= rings; ++di) {
            std::int64_t djmax = dom_.d == 2 ? rings : 0;
            for (std::int64_t dj = -djmax; dj <= djmax; ++dj) {
                std::int64_t i = wrap_cell(ci + di, 0);
                std::int64_t j = dom_.d == 2 ? wrap_cell(cj + dj, 1) : 0;
                std::int64_t k = pack(i, j);
                // small tori can alias neighbor cells; dedupe
                bool dup = false;
                for (int s = 0; s < nseen; ++s)
                    if (seen[s] == k) { dup = true; break; }
                if (dup) continue;
                seen[nseen++] = k;
                auto it = buckets_.find(k);
                if (it == buckets_.end()) continue;
                for (int id : it->second) f(id);
            }
        }
    }

    /// Rings needed so the scan reaches at least `range` from x.
    int rings_for(double range) const {
        double m = std::min(cell_[0], dom_.d == 2 ? cell_[1] : cell_[0]);
        int r = static_cast<int>(std::ceil(range / m));
        return std::max(1, std::min(r, 3));
    }

    const DomainSpec& domain() const { return dom_; }

private:
    static std::int64_t pack(std::int64_t i, std::int64_t j) {
        return (i << 32) ^ (j & 0xffffffffll);
    }

    std::int64_t wrap_cell(std::int64_t i, int axis) const {
        if (dom_.kind != DomainKind::torus) return i;
        i %= ncells_[axis];
        if (i < 0) i += ncells_[axis];
        return i;
    }

    DomainSpec dom_;
    double cell_[2] = {1.0, 1.0};
    std::int64_t ncells_[2] = {0, 0};
    std::unordered_map<std::int64_t, std::vector<int>> buckets_;
};

/// A finite simple point configuration with its neighbor index.
/// Immutable after construction; duplicate points are rejected.
class PointConfiguration {
public:
    PointConfiguration() = default;

    PointConfiguration(const ModelParams& params, std::vector<Vec> pts)
        : params_(params), grid_(params.domain, params.R) {
        pts_.reserve(pts.size());
        for (Vec p : pts) {
            if (params.domain.kind == DomainKind::torus) p = params.domain.wrap(p);
            if (!params.domain.contains(p))
                throw std::invalid_argument("configuration: point outside domain");
            pts_.push_back(p);
        }
        for (std::size_t i = 0; i < pts_.size(); ++i) grid_.insert(static_cast<int>(i), pts_[i]);
        // simple configuration: exact coincidences are an error
        for (std::size_t i = 0; i < pts_.size(); ++i) {
            bool dup = false;
            grid_.for_candidates(pts_[i], [&](int j) {
                if (static_cast<std::size_t>(j) != i && pts_[j][0] == pts_[i][0] &&
                    pts_[j][1] == pts_[i][1])
                    dup = true;
            });
            if (dup) throw std::invalid_argument("configuration: duplicate point");
        }
    }

    const ModelParams& params() const { return params_; }
    const std::vector<Vec>& points() const { return pts_; }
    std::size_t size() const { return pts_.size(); }
    bool empty() const { return pts_.empty(); }
    const Vec& operator[](std::size_t i) const { return pts_[i]; }

    /// Indices of points within distance `range` of x (torus metric aware).
    /// `exclude` is skipped if >= 0.  Supported up to range = 6R.
    std::vector<int> neighbors(const Vec& x, double range, int exclude = -1) const {
        std::vector<int> out;
        double r2 = range * range;
        grid_.for_candidates(
            x,
            [&](int id) {
                if (id == exclude) return;
                if (params_.domain.distance2(x, pts_[id]) <= r2) out.push_back(id);
            },
            grid_.rings_for(range));
        return out;
    }

    std::size_t count_in(const Region& reg) const {
        std::size_t n = 0;
        for (const Vec& p : pts_)
            if (reg.contains(params_.domain, p)) ++n;
        return n;
    }

    PointConfiguration restricted_to(const Region& reg) const {
        std::vector<Vec> kept;
        for (const Vec& p : pts_)
            if (reg.contains(params_.domain, p)) kept.push_back(p);
        return PointConfiguration(params_, std::move(kept));
    }

private:
    ModelParams params_;
    std::vector<Vec> pts_;
    SpatialGrid grid_;
};

}  // namespace areabd
