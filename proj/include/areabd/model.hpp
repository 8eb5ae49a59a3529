#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "areabd/domain.hpp"

namespace areabd {

/// Birth-rate law.  `area` is the shipped interaction (b = exp(-added
/// covered volume)); `unit` forces b == 1 and zero energy, turning the
/// dynamics into independent immigration-death (test mode).
enum class RateMode { area, unit };

struct ModelParams {
    double R = 0.0;  // interaction radius; range of the interaction is 2R
    DomainSpec domain;
    RateMode rate_mode = RateMode::area;

    ModelParams() = default;
    ModelParams(double radius, DomainSpec dom, RateMode mode = RateMode::area)
        : R(radius), domain(dom), rate_mode(mode) {
        if (!(R > 0.0)) throw std::invalid_argument("params: R must be > 0");
        if (domain.kind == DomainKind::torus && !(domain.L > 4.0 * R))
            throw std::invalid_argument("params: torus requires L > 4R");
    }

    /// kappa_d R^d: volume of one ball, the a.s. bound on conditional energy.
    double ball_volume() const {
        return domain.d == 1 ? 2.0 * R : std::numbers::pi * R * R;
    }
};

inline bool same_model(const ModelParams& a, const ModelParams& b) {
    if (a.R != b.R || a.domain.d != b.domain.d || a.domain.kind != b.domain.kind) return false;
    if (a.domain.kind == DomainKind::torus) return a.domain.L == b.domain.L;
    return a.domain.lo == b.domain.lo && a.domain.hi == b.domain.hi;
}

}  // namespace areabd
