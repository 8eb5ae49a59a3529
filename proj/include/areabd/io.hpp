#pragma once

#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "areabd/config.hpp"

namespace areabd {

// Plain text format for configurations:
//   d=<d> kind=<torus|box> L=<...> R=<...>
//   <x> [<y>]
//   ...
// For a torus, L is the side; for a box, L lists lo,hi per axis.
// A blank line ends a record, so several configurations can share a stream.

namespace io {

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_configuration(std::ostream& os, const PointConfiguration& cfg) {
    const ModelParams& p = cfg.params();
    const DomainSpec& dom = p.domain;
    os << "d=" << dom.d << " kind=" << (dom.kind == DomainKind::torus ? "torus" : "box") << " L=";
    if (dom.kind == DomainKind::torus) {
        os << fmt(dom.L);
    } else {
        os << fmt(dom.lo[0]) << ',' << fmt(dom.hi[0]);
        if (dom.d == 2) os << ',' << fmt(dom.lo[1]) << ',' << fmt(dom.hi[1]);
    }
    os << " R=" << fmt(p.R) << '\n';
    for (const Vec& pt : cfg.points()) {
        os << fmt(pt[0]);
        if (dom.d == 2) os << ' ' << fmt(pt[1]);
        os << '\n';
    }
}

inline PointConfiguration read_configuration(std::istream& is) {
    std::string line;
    // skip leading blank lines
    while (std::getline(is, line)) {
        if (!line.empty()) break;
    }
    if (line.empty()) throw std::runtime_error("config read: missing header");
    int d = 0;
    char kindbuf[8] = {0};
    char lbuf[160] = {0};
    double R = 0.0;
    if (std::sscanf(line.c_str(), "d=%d kind=%7s L=%159s R=%lf", &d, kindbuf, lbuf, &R) != 4)
        throw std::runtime_error("config read: bad header: " + line);
    std::string kind = kindbuf;
    DomainSpec dom;
    if (kind == "torus") {
        dom = DomainSpec::torus(d, std::strtod(lbuf, nullptr));
    } else if (kind == "box") {
        double b[4] = {0, 0, 0, 0};
        int n = std::sscanf(lbuf, "%lf,%lf,%lf,%lf", &b[0], &b[1], &b[2], &b[3]);
        if (d == 1 && n >= 2) dom = DomainSpec::box(b[0], b[1]);
        else if (d == 2 && n == 4) dom = DomainSpec::box(b[0], b[1], b[2], b[3]);
        else throw std::runtime_error("config read: bad box bounds: " + std::string(lbuf));
    } else {
        throw std::runtime_error("config read: unknown kind: " + kind);
    }
    std::vector<Vec> pts;
    while (std::getline(is, line)) {
        if (line.empty()) break;
        std::istringstream ls(line);
        Vec p{0.0, 0.0};
        ls >> p[0];
        if (d == 2) ls >> p[1];
        if (ls.fail()) throw std::runtime_error("config read: bad point line: " + line);
        pts.push_back(p);
    }
    return PointConfiguration(ModelParams(R, dom), std::move(pts));
}

}  // namespace io
}  // namespace areabd
