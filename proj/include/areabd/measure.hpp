#pragma once

#include <optional>
#include <stdexcept>

#include "areabd/config.hpp"
#include "areabd/geometry.hpp"

namespace areabd {

enum class BoundaryKind { empty, frozen, torus_periodic };

/// Finite-volume Gibbs specification: the window Lambda inside the domain
/// together with a boundary condition.  `torus_periodic` means Lambda is
/// the whole torus and the energy is the torus union volume.
struct GibbsSpec {
    ModelParams params;
    Region lambda = Region::whole();
    BoundaryKind boundary = BoundaryKind::empty;
    std::optional<PointConfiguration> frozen;  // boundary == frozen

    GibbsSpec() = default;
    GibbsSpec(ModelParams p, Region lam, BoundaryKind b = BoundaryKind::empty,
              std::optional<PointConfiguration> fr = std::nullopt)
        : params(std::move(p)), lambda(lam), boundary(b), frozen(std::move(fr)) {
        lambda.validate(params.domain);
        if (boundary == BoundaryKind::frozen) {
            if (!frozen) throw std::invalid_argument("gibbs spec: frozen boundary missing");
            for (const Vec& q : frozen->points())
                if (lambda.contains(params.domain, q))
                    throw std::invalid_argument("gibbs spec: frozen boundary intersects Lambda");
        }
        if (boundary == BoundaryKind::torus_periodic &&
            params.domain.kind != DomainKind::torus)
            throw std::invalid_argument("gibbs spec: periodic boundary needs a torus");
    }

    /// H_Lambda(eta | boundary); eta must be supported in Lambda.
    double energy(const PointConfiguration& eta) const {
        if (params.rate_mode == RateMode::unit) return 0.0;
        if (boundary == BoundaryKind::frozen)
            return local_energy(eta, *frozen, lambda, params);
        return union_volume(eta, params);
    }
};

}  // namespace areabd
