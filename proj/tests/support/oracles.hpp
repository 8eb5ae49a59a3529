#pragma once

// Test-only oracles, independent of the library's computation paths:
//  - union volume by slice quadrature (midpoint in y, exact interval
//    arithmetic in x),
//  - 1-d partition functions by a transfer-operator recursion,
//  - Kolmogorov-Smirnov helpers.

#include <algorithm>
#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "areabd/domain.hpp"

namespace oracles {

/// Area of a union of disks (center, radius) by horizontal slices of height
/// h: each slice contributes the exact length of the union of its disk
/// chords.  Error is O(h^{3/2}) per disk, far below 5e-3 for h = 1e-3.
inline double union_area_slices(const std::vector<areabd::Vec>& centers, double R, double h) {
    if (centers.empty()) return 0.0;
    double ymin = 1e300, ymax = -1e300;
    for (const auto& c : centers) {
        ymin = std::min(ymin, c[1] - R);
        ymax = std::max(ymax, c[1] + R);
    }
    long rows = static_cast<long>(std::ceil((ymax - ymin) / h));
    double area = 0.0;
    std::vector<std::pair<double, double>> iv;
    for (long j = 0; j < rows; ++j) {
        double y = ymin + (static_cast<double>(j) + 0.5) * h;
        iv.clear();
        for (const auto& c : centers) {
            double dy = y - c[1];
            double s2 = R * R - dy * dy;
            if (s2 <= 0.0) continue;
            double s = std::sqrt(s2);
            iv.push_back({c[0] - s, c[0] + s});
        }
        if (iv.empty()) continue;
        std::sort(iv.begin(), iv.end());
        double len = 0.0, lo = iv[0].first, hi = iv[0].second;
        for (std::size_t i = 1; i < iv.size(); ++i) {
            if (iv[i].first <= hi) hi = std::max(hi, iv[i].second);
            else { len += hi - lo; lo = iv[i].first; hi = iv[i].second; }
        }
        len += hi - lo;
        area += len * h;
    }
    return area;
}

/// Covered fraction of a flat torus [0,L)^2 by slice quadrature, using the
/// nine periodic images of every disk with chords clipped to [0, L].
inline double union_area_slices_torus(const std::vector<areabd::Vec>& centers, double R, double L,
                                      double h) {
    if (centers.empty()) return 0.0;
    long rows = static_cast<long>(std::ceil(L / h));
    double area = 0.0;
    std::vector<std::pair<double, double>> iv;
    for (long j = 0; j < rows; ++j) {
        double y = (static_cast<double>(j) + 0.5) * h;
        iv.clear();
        for (const auto& c : centers) {
            for (int sx = -1; sx <= 1; ++sx) {
                for (int sy = -1; sy <= 1; ++sy) {
                    double cx = c[0] + sx * L, cy = c[1] + sy * L;
                    double dy = y - cy;
                    double s2 = R * R - dy * dy;
                    if (s2 <= 0.0) continue;
                    double s = std::sqrt(s2);
                    double lo = std::max(0.0, cx - s), hi = std::min(L, cx + s);
                    if (lo < hi) iv.push_back({lo, hi});
                }
            }
        }
        if (iv.empty()) continue;
        std::sort(iv.begin(), iv.end());
        double len = 0.0, lo = iv[0].first, hi = iv[0].second;
        for (std::size_t i = 1; i < iv.size(); ++i) {
            if (iv[i].first <= hi) hi = std::max(hi, iv[i].second);
            else { len += hi - lo; lo = iv[i].first; hi = iv[i].second; }
        }
        len += hi - lo;
        area += len * h;
    }
    return area;
}

/// Covered length of a d=1 torus by midpoint sampling.
inline double union_length_torus_grid(const std::vector<areabd::Vec>& centers, double R, double L,
                                      long m) {
    long hit = 0;
    for (long i = 0; i < m; ++i) {
        double x = (static_cast<double>(i) + 0.5) * L / static_cast<double>(m);
        for (const auto& c : centers) {
            double d = std::abs(x - c[0]);
            d = std::min(d, L - d);
            if (d < R) { ++hit; break; }
        }
    }
    return L * static_cast<double>(hit) / static_cast<double>(m);
}

/// Z_Lambda = E_pi[e^{-H}] for the d=1 area interaction on [0, len] with
/// empty boundary, summed over n <= nmax points by the gap factorization
///   H(x_1 < ... < x_n) = 2R + sum_i min(2R, x_{i+1} - x_i)
/// (balls measured on all of R), with each ordered integral evaluated by an
/// iterated trapezoid transfer recursion on an m-point grid.  The leading
/// e^{-len} is the Poisson normalization.
inline double partition_1d(double len, double R, int nmax, int m = 2001) {
    double hstep = len / (m - 1);
    auto g = [&](double gap) { return std::exp(-std::min(2.0 * R, gap)); };
    double Z = 1.0;  // n = 0
    std::vector<double> v(m, 1.0), next(m);
    for (int n = 1; n <= nmax; ++n) {
        if (n > 1) {
            for (int i = 0; i < m; ++i) {
                double acc = 0.0;
                double yi = i * hstep;
                for (int j = 0; j <= i; ++j) {
                    double w = (j == 0 || j == i) ? 0.5 : 1.0;
                    acc += w * v[j] * g(yi - j * hstep);
                }
                next[i] = acc * hstep;
            }
            v.swap(next);
        }
        double zn = 0.0;
        for (int i = 0; i < m; ++i) zn += ((i == 0 || i == m - 1) ? 0.5 : 1.0) * v[i];
        zn *= hstep;
        Z += std::exp(-2.0 * R) * zn;
    }
    return std::exp(-len) * Z;
}

/// One-sample KS statistic against a cdf, plus the asymptotic p-value.
inline double ks_statistic(std::vector<double> xs, const std::function<double(double)>& cdf) {
    std::sort(xs.begin(), xs.end());
    double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double f = cdf(xs[i]);
        d = std::max(d, std::abs(f - static_cast<double>(i) / n));
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
    }
    return d;
}

inline double ks_pvalue(double d, std::size_t n) {
    double sn = std::sqrt(static_cast<double>(n));
    double lam = (sn + 0.12 + 0.11 / sn) * d;
    double p = 0.0;
    for (int j = 1; j <= 100; ++j)
        p += 2.0 * ((j % 2 == 1) ? 1.0 : -1.0) * std::exp(-2.0 * j * j * lam * lam);
    return std::clamp(p, 0.0, 1.0);
}

}  // namespace oracles
