#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "areabd/config.hpp"

namespace areabd {
namespace geom {

/// Absolute tolerance for geometric predicates (arc intersections,
/// containment tests, coincidence).
inline constexpr double kEps = 1e-12;

/// Length of a union of closed intervals [lo, hi].
inline double union_length(std::vector<std::pair<double, double>> iv) {
    if (iv.empty()) return 0.0;
    std::sort(iv.begin(), iv.end());
    double total = 0.0;
    double lo = iv[0].first, hi = iv[0].second;
    for (std::size_t i = 1; i < iv.size(); ++i) {
        if (iv[i].first <= hi) {
            hi = std::max(hi, iv[i].second);
        } else {
            total += hi - lo;
            lo = iv[i].first;
            hi = iv[i].second;
        }
    }
    return total + (hi - lo);
}

struct Disk {
    double x, y, r;
};

/// Area of a union of disks, computed exactly (up to floating point) by
/// Green's theorem over the uncovered boundary arcs of every circle: each
/// circle's arcs not interior to any other disk are traversed
/// counterclockwise and contribute
///   1/2 * [ r^2 (t1 - t0) + r (cx (sin t1 - sin t0) - cy (cos t1 - cos t0)) ].
/// Interior holes get the right (clockwise) orientation automatically.
inline double union_area(std::span<const Disk> disks_in) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    // Drop exact duplicates; a duplicate pair would otherwise mark each
    // other as fully covered and erase the disk from the union.
    std::vector<Disk> ds;
    ds.reserve(disks_in.size());
    for (const Disk& d : disks_in) {
        bool dup = false;
        for (const Disk& e : ds) {
            if (std::abs(d.x - e.x) <= kEps && std::abs(d.y - e.y) <= kEps &&
                std::abs(d.r - e.r) <= kEps) {
                dup = true;
                break;
            }
        }
        if (!dup) ds.push_back(d);
    }

    double area = 0.0;
    std::vector<std::pair<double, double>> covered;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const Disk& di = ds[i];
        covered.clear();
        bool swallowed = false;
        for (std::size_t j = 0; j < ds.size() && !swallowed; ++j) {
            if (j == i) continue;
            const Disk& dj = ds[j];
            double dx = dj.x - di.x, dy = dj.y - di.y;
            double dist = std::hypot(dx, dy);
            if (dist >= di.r + dj.r - kEps) continue;       // disjoint or tangent
            if (dist + di.r <= dj.r + kEps) {               // circle i inside disk j
                swallowed = true;
                break;
            }
            if (dist + dj.r <= di.r + kEps) continue;       // disk j inside disk i
            // angular half-width of the arc of circle i inside disk j
            double c = (di.r * di.r + dist * dist - dj.r * dj.r) / (2.0 * di.r * dist);
            c = std::clamp(c, -1.0, 1.0);
            double half = std::acos(c);
            double alpha = std::atan2(dy, dx);
            covered.push_back({alpha - half, alpha + half});
        }
        if (swallowed) continue;
        if (covered.empty()) {
            area += std::numbers::pi * di.r * di.r;
            continue;
        }
        // Normalize to [0, 2pi), splitting arcs that wrap.
        std::vector<std::pair<double, double>> segs;
        segs.reserve(covered.size() + 1);
        for (auto [a, b] : covered) {
            double w = b - a;
            a = std::fmod(a, two_pi);
            if (a < 0.0) a += two_pi;
            b = a + w;
            if (b <= two_pi) {
                segs.push_back({a, b});
            } else {
                segs.push_back({a, two_pi});
                segs.push_back({0.0, b - two_pi});
            }
        }
        std::sort(segs.begin(), segs.end());
        // Walk the complement (uncovered arcs) and accumulate Green terms.
        auto green = [&](double t0, double t1) {
            if (t1 - t0 <= 0.0) return;
            area += 0.5 * (di.r * di.r * (t1 - t0) +
                           di.r * (di.x * (std::sin(t1) - std::sin(t0)) -
                                   di.y * (std::cos(t1) - std::cos(t0))));
        };
        double cursor = 0.0;       // end of merged coverage so far
        double first_start = segs[0].first;
        cursor = segs[0].second;
        for (std::size_t s = 1; s < segs.size(); ++s) {
            if (segs[s].first > cursor) green(cursor, segs[s].first);
            cursor = std::max(cursor, segs[s].second);
        }
        // wrap-around gap from the last coverage end to the first start
        green(cursor, two_pi);
        green(0.0, first_start);
    }
    return area;
}

}  // namespace geom

namespace detail {

/// Nearest-image coordinates of `p` in the chart centered at `x`.
/// Valid for local computations (everything within L/2 of x).
inline Vec chart(const DomainSpec& dom, const Vec& x, const Vec& p) {
    Vec d = dom.displacement(x, p);
    return {x[0] + d[0], x[1] + d[1]};
}

/// |union of balls B(c_k, r_k)| in planar coordinates.
inline double union_volume_planar(int d, std::span<const Vec> centers,
                                  std::span<const double> radii) {
    if (centers.empty()) return 0.0;
    if (d == 1) {
        std::vector<std::pair<double, double>> iv;
        iv.reserve(centers.size());
        for (std::size_t k = 0; k < centers.size(); ++k)
            iv.push_back({centers[k][0] - radii[k], centers[k][0] + radii[k]});
        return geom::union_length(std::move(iv));
    }
    std::vector<geom::Disk> ds;
    ds.reserve(centers.size());
    for (std::size_t k = 0; k < centers.size(); ++k)
        ds.push_back({centers[k][0], centers[k][1], radii[k]});
    return geom::union_area(ds);
}

/// Volume added to a union of radius-`rn` balls at `neighbors` by inserting
/// a ball of radius `rx` at x.  All coordinates must already live in one
/// planar chart around x; neighbors farther than rx + rn are harmless.
inline double added_volume_planar(int d, const Vec& x, double rx, std::span<const Vec> neighbors,
                                  double rn) {
    std::vector<Vec> cs(neighbors.begin(), neighbors.end());
    std::vector<double> rs(cs.size(), rn);
    double before = union_volume_planar(d, cs, rs);
    cs.push_back(x);
    rs.push_back(rx);
    double after = union_volume_planar(d, cs, rs);
    double dv = after - before;
    return std::max(0.0, dv);
}

}  // namespace detail

/// |B_R(eta)| within the domain geometry.  Boxes are measured in all of
/// R^d (balls may stick out); tori use the flat metric, where the volume
/// is assembled by inserting balls one at a time into locally unwrapped
/// charts (exact because L > 4R).
inline double union_volume(const PointConfiguration& eta, const ModelParams& params) {
    const DomainSpec& dom = params.domain;
    if (!eta.points().empty() && !same_model(eta.params(), params))
        throw std::invalid_argument("union_volume: configuration/params mismatch");
    const auto& pts = eta.points();
    if (pts.empty()) return 0.0;
    if (dom.kind == DomainKind::box) {
        std::vector<double> rs(pts.size(), params.R);
        return detail::union_volume_planar(dom.d, pts, rs);
    }
    // torus: telescoping over insertion order
    SpatialGrid grid(dom, params.R);
    double total = 0.0;
    std::vector<Vec> chart_neigh;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        chart_neigh.clear();
        double reach2 = 4.0 * params.R * params.R;
        grid.for_candidates(pts[i], [&](int j) {
            if (dom.distance2(pts[i], pts[j]) <= reach2)
                chart_neigh.push_back(detail::chart(dom, pts[i], pts[j]));
        });
        total += detail::added_volume_planar(dom.d, pts[i], params.R, chart_neigh, params.R);
        grid.insert(static_cast<int>(i), pts[i]);
    }
    return std::min(total, dom.volume());
}

/// h(x, eta): covered volume added by inserting x, using only points of eta
/// within 2R of x.  Always in [0, kappa_d R^d].
inline double conditional_energy(const Vec& x_in, const PointConfiguration& eta,
                                 const ModelParams& params) {
    const DomainSpec& dom = params.domain;
    Vec x = dom.kind == DomainKind::torus ? dom.wrap(x_in) : x_in;
    std::vector<int> near = eta.neighbors(x, 2.0 * params.R);
    for (int id : near)
        if (dom.distance2(x, eta[id]) <= geom::kEps * geom::kEps)
            throw std::invalid_argument("conditional_energy: duplicate point");
    std::vector<Vec> chart_neigh;
    chart_neigh.reserve(near.size());
    for (int id : near) chart_neigh.push_back(detail::chart(dom, x, eta[id]));
    double h = detail::added_volume_planar(dom.d, x, params.R, chart_neigh, params.R);
    return std::min(h, params.ball_volume());
}

/// b(x, eta) = exp(-h(x, eta)); identically 1 in unit-rate test mode.
inline double birth_rate(const Vec& x, const PointConfiguration& eta, const ModelParams& params) {
    if (params.rate_mode == RateMode::unit) return 1.0;
    return std::exp(-conditional_energy(x, eta, params));
}

/// H_Lambda(eta | omega) = |B_R(eta omega)| - |B_R(omega)| where eta lives
/// in Lambda and omega outside it; only boundary points within 2R of the
/// inserted points matter.  Computed by inserting eta's points one at a
/// time on top of the boundary.
inline double local_energy(const PointConfiguration& eta_in, const PointConfiguration& boundary,
                           const Region& lambda, const ModelParams& params) {
    const DomainSpec& dom = params.domain;
    for (const Vec& p : eta_in.points())
        if (!lambda.contains(dom, p))
            throw std::invalid_argument("local_energy: interior point outside Lambda");
    for (const Vec& p : boundary.points())
        if (lambda.contains(dom, p))
            throw std::invalid_argument("local_energy: boundary point inside Lambda");
    double total = 0.0;
    const auto& pts = eta_in.points();
    SpatialGrid inserted(dom, params.R);
    std::vector<Vec> chart_neigh;
    double reach2 = 4.0 * params.R * params.R;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        chart_neigh.clear();
        for (int id : boundary.neighbors(pts[i], 2.0 * params.R))
            chart_neigh.push_back(detail::chart(dom, pts[i], boundary[id]));
        inserted.for_candidates(pts[i], [&](int j) {
            if (dom.distance2(pts[i], pts[j]) <= reach2)
                chart_neigh.push_back(detail::chart(dom, pts[i], pts[j]));
        });
        total += detail::added_volume_planar(dom.d, pts[i], params.R, chart_neigh, params.R);
        inserted.insert(static_cast<int>(i), pts[i]);
    }
    return total;
}

}  // namespace areabd
