#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace areabd {

/// Coordinates always carry two slots; dimension-1 code ignores the second.
using Vec = std::array<double, 2>;

enum class DomainKind { torus, box };

/// The arena points live in: a flat torus of side L, or an axis-aligned box.
/// Torus coordinates are kept canonical in [0, L).
struct DomainSpec {
    int d = 1;
    DomainKind kind = DomainKind::torus;
    double L = 0.0;               // torus side length
    Vec lo{0.0, 0.0};             // box bounds
    Vec hi{0.0, 0.0};

    static DomainSpec torus(int d, double L) {
        if (d < 1 || d > 2) throw std::invalid_argument("domain: d must be 1 or 2");
        if (!(L > 0.0)) throw std::invalid_argument("domain: torus side L must be > 0");
        DomainSpec s;
        s.d = d;
        s.kind = DomainKind::torus;
        s.L = L;
        s.lo = {0.0, 0.0};
        s.hi = {L, d == 2 ? L : 0.0};
        return s;
    }

    static DomainSpec box(double a0, double b0) {
        if (!(a0 < b0)) throw std::invalid_argument("domain: empty box bounds");
        DomainSpec s;
        s.d = 1;
        s.kind = DomainKind::box;
        s.lo = {a0, 0.0};
        s.hi = {b0, 0.0};
        return s;
    }

    static DomainSpec box(double a0, double b0, double a1, double b1) {
        if (!(a0 < b0) || !(a1 < b1)) throw std::invalid_argument("domain: empty box bounds");
        DomainSpec s;
        s.d = 2;
        s.kind = DomainKind::box;
        s.lo = {a0, a1};
        s.hi = {b0, b1};
        return s;
    }

    double volume() const {
        double v = 1.0;
        for (int c = 0; c < d; ++c) v *= hi[c] - lo[c];
        return v;
    }

    double side(int axis) const { return hi[axis] - lo[axis]; }

    bool contains(const Vec& x) const {
        for (int c = 0; c < d; ++c) {
            if (kind == DomainKind::torus) {
                if (x[c] < 0.0 || x[c] >= L) return false;
            } else {
                if (x[c] < lo[c] || x[c] > hi[c]) return false;
            }
        }
        return true;
    }

    /// Canonical torus representative in [0, L); identity on boxes.
    Vec wrap(Vec x) const {
        if (kind == DomainKind::torus) {
            for (int c = 0; c < d; ++c) {
                x[c] = std::fmod(x[c], L);
                if (x[c] < 0.0) x[c] += L;
                if (x[c] == L) x[c] = 0.0;  // fmod may return L after rounding
            }
        }
        return x;
    }

    /// Shortest displacement to - from (nearest image on the torus).
    Vec displacement(const Vec& from, const Vec& to) const {
        Vec r{0.0, 0.0};
        for (int c = 0; c < d; ++c) {
            double diff = to[c] - from[c];
            if (kind == DomainKind::torus) {
                if (diff > 0.5 * L) diff -= L;
                else if (diff < -0.5 * L) diff += L;
            }
            r[c] = diff;
        }
        return r;
    }

    double distance2(const Vec& a, const Vec& b) const {
        Vec r = displacement(a, b);
        double s = 0.0;
        for (int c = 0; c < d; ++c) s += r[c] * r[c];
        return s;
    }

    double distance(const Vec& a, const Vec& b) const { return std::sqrt(distance2(a, b)); }
};

/// Axis-aligned sub-window of a domain, or the whole domain, or a shell
/// (outer box minus inner box).  On a torus a box region may use coordinates
/// outside [0, L) -- "[-2, 3] on a torus of side 8" -- as long as its extent
/// does not exceed L; membership is decided by wrapped offsets from lo.
struct Region {
    enum class Kind { whole, box, shell };
    Kind kind = Kind::whole;
    Vec lo{0.0, 0.0};
    Vec hi{0.0, 0.0};
    Vec inner_lo{0.0, 0.0};  // shell only
    Vec inner_hi{0.0, 0.0};

    static Region whole() { return Region{}; }

    static Region box1(double a, double b) {
        if (!(a < b)) throw std::invalid_argument("region: empty box");
        Region r;
        r.kind = Kind::box;
        r.lo = {a, 0.0};
        r.hi = {b, 0.0};
        return r;
    }

    static Region box2(double a0, double b0, double a1, double b1) {
        if (!(a0 < b0) || !(a1 < b1)) throw std::invalid_argument("region: empty box");
        Region r;
        r.kind = Kind::box;
        r.lo = {a0, a1};
        r.hi = {b0, b1};
        return r;
    }

    /// outer minus inner; both given as boxes in the same coordinates.
    static Region shell(const Region& inner, const Region& outer) {
        if (inner.kind != Kind::box || outer.kind != Kind::box)
            throw std::invalid_argument("region: shell needs two boxes");
        Region r;
        r.kind = Kind::shell;
        r.lo = outer.lo;
        r.hi = outer.hi;
        r.inner_lo = inner.lo;
        r.inner_hi = inner.hi;
        return r;
    }

    bool contains(const DomainSpec& dom, const Vec& x) const {
        if (kind == Kind::whole) return dom.contains(x);
        if (!in_box(dom, x, lo, hi)) return false;
        if (kind == Kind::shell && in_box(dom, x, inner_lo, inner_hi)) return false;
        return true;
    }

    double volume(const DomainSpec& dom) const {
        if (kind == Kind::whole) return dom.volume();
        double v = 1.0;
        for (int c = 0; c < dom.d; ++c) v *= hi[c] - lo[c];
        if (kind == Kind::shell) {
            double vi = 1.0;
            for (int c = 0; c < dom.d; ++c) vi *= inner_hi[c] - inner_lo[c];
            v -= vi;
        }
        return v;
    }

    /// Distance from x (inside the box) to the box boundary; 0 outside.
    double boundary_distance(const DomainSpec& dom, const Vec& x) const {
        if (kind == Kind::whole) return std::numeric_limits<double>::infinity();
        double best = std::numeric_limits<double>::infinity();
        for (int c = 0; c < dom.d; ++c) {
            double u = offset(dom, x[c], lo[c], c);
            double len = hi[c] - lo[c];
            if (u < 0.0 || u > len) return 0.0;
            best = std::min(best, std::min(u, len - u));
        }
        return best;
    }

    void validate(const DomainSpec& dom) const {
        if (kind == Kind::whole) return;
        for (int c = 0; c < dom.d; ++c) {
            double len = hi[c] - lo[c];
            if (!(len > 0.0)) throw std::invalid_argument("region: empty extent");
            if (dom.kind == DomainKind::torus) {
                if (len > dom.L + 1e-12)
                    throw std::invalid_argument("region: extent exceeds torus side");
            } else {
                if (lo[c] < dom.lo[c] - 1e-12 || hi[c] > dom.hi[c] + 1e-12)
                    throw std::invalid_argument("region: not contained in box domain");
            }
        }
        if (kind == Kind::shell) {
            for (int c = 0; c < dom.d; ++c)
                if (inner_lo[c] < lo[c] - 1e-12 || inner_hi[c] > hi[c] + 1e-12)
                    throw std::invalid_argument("region: shell inner box not inside outer");
        }
    }

private:
    static double offset(const DomainSpec& dom, double x, double base, int /*axis*/) {
        double u = x - base;
        if (dom.kind == DomainKind::torus) {
            u = std::fmod(u, dom.L);
            if (u < 0.0) u += dom.L;
        }
        return u;
    }

    bool in_box(const DomainSpec& dom, const Vec& x, const Vec& blo, const Vec& bhi) const {
        for (int c = 0; c < dom.d; ++c) {
            double u = offset(dom, x[c], blo[c], c);
            if (u < 0.0 || u > bhi[c] - blo[c]) return false;
        }
        return true;
    }
};

}  // namespace areabd
