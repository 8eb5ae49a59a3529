#pragma once

#include <cstdint>
#include <vector>

#include "areabd/config.hpp"
#include "areabd/rng.hpp"

namespace areabd {

// Hash channels keeping unrelated draws on disjoint key ranges.
namespace channel {
inline constexpr std::uint64_t proposal = 0x50;
inline constexpr std::uint64_t initial_lifetime = 0x51;
inline constexpr std::uint64_t replica = 0x52;
inline constexpr std::uint64_t boundary = 0x53;
}  // namespace channel

/// Deterministic space-time proposal marks: the k-th proposal of lattice
/// cell c is a pure function of (seed, c, k).  Coupled runs over different
/// regions therefore consume bit-identical marks on shared cells no matter
/// in which order they query them.  The cell lattice is anchored to the
/// domain (not to any region).
class EventStream {
public:
    struct Mark {
        Vec x;          // location, uniform in the cell
        double u;       // thinning mark, uniform in [0,1)
        double r;       // unit-exponential lifetime
        double s;       // waiting time to the next proposal of this cell
    };

    EventStream() = default;

    EventStream(std::uint64_t seed, const DomainSpec& dom, double R)
        : seed_(seed), dom_(dom), grid_(dom, R) {
        if (dom.kind == DomainKind::torus) {
            for (int c = 0; c < dom.d; ++c) {
                ncells_[c] = std::max<std::int64_t>(
                    1, static_cast<std::int64_t>(std::floor(dom.L / (2.0 * R))));
                cell_[c] = dom.L / static_cast<double>(ncells_[c]);
            }
        } else {
            for (int c = 0; c < dom.d; ++c) {
                cell_[c] = 2.0 * R;
                ncells_[c] = static_cast<std::int64_t>(
                    std::ceil((dom.hi[c] - dom.lo[c]) / cell_[c] - 1e-12));
            }
        }
        if (dom.d == 1) {
            ncells_[1] = 1;
            cell_[1] = 1.0;
        }
    }

    std::uint64_t seed() const { return seed_; }

    double cell_volume() const { return dom_.d == 1 ? cell_[0] : cell_[0] * cell_[1]; }

    /// Cells (as packed keys) whose box intersects the region.
    std::vector<std::int64_t> cells_for(const Region& reg) const {
        std::vector<std::int64_t> out;
        for (std::int64_t i = 0; i < ncells_[0]; ++i) {
            for (std::int64_t j = 0; j < ncells_[1]; ++j) {
                if (cell_overlaps(reg, i, j)) out.push_back(pack(i, j));
            }
        }
        return out;
    }

    Mark mark(std::int64_t cell_key, std::uint64_t counter) const {
        std::uint64_t base =
            rng::hash({seed_, channel::proposal, static_cast<std::uint64_t>(cell_key), counter});
        Mark m;
        std::int64_t i = cell_key >> 32;
        std::int64_t j = static_cast<std::int32_t>(cell_key & 0xffffffffll);
        double base0 = dom_.kind == DomainKind::torus ? 0.0 : dom_.lo[0];
        m.x[0] = base0 + (static_cast<double>(i) + rng::u01(rng::mix(base + 1))) * cell_[0];
        if (dom_.d == 2) {
            double base1 = dom_.kind == DomainKind::torus ? 0.0 : dom_.lo[1];
            m.x[1] = base1 + (static_cast<double>(j) + rng::u01(rng::mix(base + 2))) * cell_[1];
        } else {
            m.x[1] = 0.0;
        }
        m.u = rng::u01(rng::mix(base + 3));
        m.r = rng::exponential(rng::mix(base + 4));
        m.s = rng::exponential(rng::mix(base + 5)) / cell_volume();
        return m;
    }

    /// Lifetime of the idx-th initial point; keyed by index so that region
    /// restrictions of a shared initial configuration keep their lifetimes.
    double initial_lifetime(std::uint64_t idx) const {
        return rng::exponential(rng::hash({seed_, channel::initial_lifetime, idx}));
    }

    const DomainSpec& domain() const { return dom_; }

private:
    static std::int64_t pack(std::int64_t i, std::int64_t j) {
        return (i << 32) ^ (j & 0xffffffffll);
    }

    bool cell_overlaps(const Region& reg, std::int64_t i, std::int64_t j) const {
        if (reg.kind == Region::Kind::whole) return true;
        double base0 = dom_.kind == DomainKind::torus ? 0.0 : dom_.lo[0];
        double a0 = base0 + static_cast<double>(i) * cell_[0];
        if (!axis_overlap(a0, a0 + cell_[0], reg.lo[0], reg.hi[0])) return false;
        if (dom_.d == 2) {
            double base1 = dom_.kind == DomainKind::torus ? 0.0 : dom_.lo[1];
            double a1 = base1 + static_cast<double>(j) * cell_[1];
            if (!axis_overlap(a1, a1 + cell_[1], reg.lo[1], reg.hi[1])) return false;
        }
        // a shell's hole never hides a whole cell unless the cell is inside
        if (reg.kind == Region::Kind::shell) {
            bool inside = axis_inside(a0, a0 + cell_[0], reg.inner_lo[0], reg.inner_hi[0]);
            if (dom_.d == 2) {
                double base1 = dom_.kind == DomainKind::torus ? 0.0 : dom_.lo[1];
                double a1 = base1 + static_cast<double>(j) * cell_[1];
                inside = inside && axis_inside(a1, a1 + cell_[1], reg.inner_lo[1], reg.inner_hi[1]);
            }
            if (inside) return false;
        }
        return true;
    }

    // Overlap of [a0,a1] with [b0,b1], modulo L on tori.
    bool axis_overlap(double a0, double a1, double b0, double b1) const {
        if (dom_.kind != DomainKind::torus) return a0 < b1 && b0 < a1;
        double L = dom_.L;
        double la = a1 - a0, lb = b1 - b0;
        double off = std::fmod(b0 - a0, L);
        if (off < 0) off += L;
        return off < la || L - off < lb;
    }

    bool axis_inside(double a0, double a1, double b0, double b1) const {
        if (dom_.kind != DomainKind::torus) return a0 >= b0 && a1 <= b1;
        double L = dom_.L;
        double off = std::fmod(a0 - b0, L);
        if (off < 0) off += L;
        return off + (a1 - a0) <= (b1 - b0) + 1e-12;
    }

    std::uint64_t seed_ = 0;
    DomainSpec dom_;
    SpatialGrid grid_;
    double cell_[2] = {1.0, 1.0};
    std::int64_t ncells_[2] = {1, 1};
};

}  // namespace areabd
