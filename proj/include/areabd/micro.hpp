#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "areabd/geometry.hpp"

namespace areabd {

using DistributionVector = std::vector<double>;

/// Birth-and-death chain on a fixed set of k <= 16 candidate sites with the
/// continuum-geometry energies: from state s (an occupancy bitmask),
///   rate(s -> s + x) = exp(-(H[s+x] - H[s]))   for vacant x,
///   rate(s -> s - x) = 1                        for occupied x,
/// where H[s] is the covered volume of the occupied sites.  Detailed balance
/// with pi ~ exp(-H) holds exactly because the rates are built from the same
/// tabulated H.
class MicroSystem {
public:
    MicroSystem(ModelParams params, std::vector<Vec> sites)
        : params_(std::move(params)), sites_(std::move(sites)) {
        k_ = static_cast<int>(sites_.size());
        if (k_ < 1) throw std::invalid_argument("micro: need at least one site");
        if (k_ > 16) throw std::invalid_argument("micro: k exceeds 16");
        nstates_ = std::size_t{1} << k_;
        // validity (domain membership, distinctness) via PointConfiguration
        PointConfiguration check(params_, sites_);
        sites_ = check.points();  // canonical (wrapped) coordinates
        H_.resize(nstates_);
        H_[0] = 0.0;
        for (std::size_t s = 1; s < nstates_; ++s) {
            int low = lowest_bit(s);
            std::size_t rest = s & (s - std::size_t{1});
            std::vector<Vec> occupied;
            for (int x = 0; x < k_; ++x)
                if (rest & bit(x)) occupied.push_back(sites_[x]);
            PointConfiguration eta(params_, occupied);
            H_[s] = H_[rest] + conditional_energy(sites_[low], eta, params_);
        }
    }

    int k() const { return k_; }
    std::size_t num_states() const { return nstates_; }
    const std::vector<Vec>& sites() const { return sites_; }
    const ModelParams& params() const { return params_; }
    double energy(std::size_t s) const { return H_[s]; }

    static std::size_t bit(int x) { return std::size_t{1} << x; }
    static bool occupied(std::size_t s, int x) { return (s >> x) & 1u; }

    /// Birth rate at vacant site x given state s.
    double birth(std::size_t s, int x) const {
        if (params_.rate_mode == RateMode::unit) return 1.0;
        return std::exp(-(H_[s | bit(x)] - H_[s]));
    }

    double exit_rate(std::size_t s) const {
        double r = 0.0;
        for (int x = 0; x < k_; ++x) r += occupied(s, x) ? 1.0 : birth(s, x);
        return r;
    }

    /// One application of the uniformized kernel P = I + Q/lambda.
    void apply_kernel(const DistributionVector& p, DistributionVector& out, double lambda) const {
        for (std::size_t s = 0; s < nstates_; ++s) out[s] = 0.0;
        for (std::size_t s = 0; s < nstates_; ++s) {
            double mass = p[s];
            if (mass == 0.0) continue;
            double exit = 0.0;
            for (int x = 0; x < k_; ++x) {
                if (occupied(s, x)) {
                    out[s ^ bit(x)] += mass / lambda;
                    exit += 1.0;
                } else {
                    double b = birth(s, x);
                    out[s | bit(x)] += mass * b / lambda;
                    exit += b;
                }
            }
            out[s] += mass * (1.0 - exit / lambda);
        }
    }

private:
    static int lowest_bit(std::size_t s) {
        int i = 0;
        while (!((s >> i) & 1u)) ++i;
        return i;
    }

    ModelParams params_;
    std::vector<Vec> sites_;
    int k_ = 0;
    std::size_t nstates_ = 0;
    std::vector<double> H_;
};

/// pi(s) = exp(-H(s)) / Z.  Satisfies detailed balance against the chain's
/// rates exactly (same H table on both sides).
inline DistributionVector stationary(const MicroSystem& sys) {
    DistributionVector pi(sys.num_states());
    double Z = 0.0;
    for (std::size_t s = 0; s < sys.num_states(); ++s) {
        pi[s] = std::exp(-sys.energy(s));
        Z += pi[s];
    }
    for (double& v : pi) v /= Z;
    return pi;
}

/// p0 e^{tQ} by uniformization, split into chunks of lambda*tau <= 32 so the
/// Poisson weights stay in range; per-chunk truncation 1e-15 keeps the total
/// error below 1e-12 for the horizons used here.
inline DistributionVector evolve(const MicroSystem& sys, DistributionVector p, double t) {
    if (t < 0.0) throw std::invalid_argument("evolve: t < 0");
    if (p.size() != sys.num_states()) throw std::invalid_argument("evolve: bad vector length");
    if (t == 0.0) return p;
    double lambda = static_cast<double>(sys.k());
    int chunks = std::max(1, static_cast<int>(std::ceil(lambda * t / 32.0)));
    double tau = t / chunks;
    DistributionVector term = p, next(p.size()), acc(p.size());
    for (int c = 0; c < chunks; ++c) {
        double lt = lambda * tau;
        double w = std::exp(-lt);
        double cum = w;
        term = p;
        for (std::size_t s = 0; s < p.size(); ++s) acc[s] = w * term[s];
        for (int n = 1; cum < 1.0 - 1e-15; ++n) {
            sys.apply_kernel(term, next, lambda);
            term.swap(next);
            w *= lt / n;
            cum += w;
            for (std::size_t s = 0; s < p.size(); ++s) acc[s] += w * term[s];
            if (n > 2000) break;
        }
        p = acc;
    }
    return p;
}

/// Kullback-Leibler divergence with the 0 log 0 = 0 convention; +infinity
/// when p is not absolutely continuous with respect to q.
inline double relative_entropy(const DistributionVector& p, const DistributionVector& q) {
    if (p.size() != q.size()) throw std::invalid_argument("relative_entropy: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] == 0.0) continue;
        if (q[i] == 0.0) return std::numeric_limits<double>::infinity();
        s += p[i] * std::log(p[i] / q[i]);
    }
    return std::max(0.0, s);
}

namespace detail {

/// (a - b)(log a - log b) with the boundary conventions: 0 if a == b,
/// +infinity if exactly one of them vanishes.
inline double bracket(double a, double b) {
    if (a == b) return 0.0;
    if (a == 0.0 || b == 0.0) return std::numeric_limits<double>::infinity();
    return (a - b) * (std::log(a) - std::log(b));
}

/// Extended KL term a log(a/b) - a + b >= 0 for unnormalized masses.
inline double kl_term(double a, double b) {
    if (a == 0.0) return b;
    if (b == 0.0) return std::numeric_limits<double>::infinity();
    return a * std::log(a / b) - a + b;
}

}  // namespace detail

/// Modified Fisher information of p relative to pi:
///   sum_x sum_{s: x vacant} pi(s) b(x,s) D_x(p/pi)(s) D_x log(p/pi)(s),
/// each bracket nonnegative.  Infinite whenever p vanishes on a state whose
/// neighbor across some site carries mass.
inline double fisher(const MicroSystem& sys, const DistributionVector& p) {
    DistributionVector pi = stationary(sys);
    double total = 0.0;
    for (std::size_t s = 0; s < sys.num_states(); ++s) {
        for (int x = 0; x < sys.k(); ++x) {
            if (MicroSystem::occupied(s, x)) continue;
            std::size_t sx = s | MicroSystem::bit(x);
            double f0 = p[s] / pi[s];
            double f1 = p[sx] / pi[sx];
            double term = detail::bracket(f1, f0);
            if (std::isinf(term)) return term;
            total += pi[s] * sys.birth(s, x) * term;
        }
    }
    return total;
}

/// The two double-layer measures at site x: pairs (eta, zeta) differing
/// exactly at x, with the star measure placing the birth weight on
/// (s, s+x) and the Palm weight on (s+x, s), and the circle measure the
/// transpose.  Indexed by the reduced state (x vacant).
struct DoubleLayerPair {
    int site;
    std::vector<std::size_t> base_states;  // states with x vacant
    std::vector<double> star_up, star_down, circle_up, circle_down;
    double star_mass = 0.0, circle_mass = 0.0;
};

/// Builds the pair and returns (pair, I(star | circle)).  The relative
/// density of star against circle is (p/pi)(first) * (pi/p)(second), which
/// the test suite cross-checks against the direct ratio.
inline std::pair<DoubleLayerPair, double> double_layer(const MicroSystem& sys,
                                                       const DistributionVector& p, int x) {
    DistributionVector pi = stationary(sys);
    DoubleLayerPair out;
    out.site = x;
    double kl = 0.0;
    for (std::size_t s = 0; s < sys.num_states(); ++s) {
        if (MicroSystem::occupied(s, x)) continue;
        std::size_t sx = s | MicroSystem::bit(x);
        double b = sys.birth(s, x);
        double su = p[s] * b;    // star on (s, s+x)
        double sd = p[sx];       // star on (s+x, s)
        double cu = p[sx];       // circle on (s, s+x)
        double cd = p[s] * b;    // circle on (s+x, s)
        out.base_states.push_back(s);
        out.star_up.push_back(su);
        out.star_down.push_back(sd);
        out.circle_up.push_back(cu);
        out.circle_down.push_back(cd);
        out.star_mass += su + sd;
        out.circle_mass += cu + cd;
        for (auto [a, c] : {std::pair{su, cu}, std::pair{sd, cd}}) {
            if (a == 0.0) continue;
            if (c == 0.0) return {out, std::numeric_limits<double>::infinity()};
            kl += a * std::log(a / c);
        }
    }
    return {out, std::max(0.0, kl)};
}

/// xi(p): for every site x compare the birth-weighted measure
/// A_x(s) = b(x,s) p(s) (x vacant) with the discrete Palm analog
/// B_x(s) = p(s + x), summing the symmetrized unnormalized KL.  Vanishes
/// exactly at p = pi (detailed balance), positive otherwise.
inline double xi(const MicroSystem& sys, const DistributionVector& p) {
    double total = 0.0;
    for (int x = 0; x < sys.k(); ++x) {
        for (std::size_t s = 0; s < sys.num_states(); ++s) {
            if (MicroSystem::occupied(s, x)) continue;
            double a = sys.birth(s, x) * p[s];
            double b = p[s | MicroSystem::bit(x)];
            double t1 = detail::kl_term(a, b);
            double t2 = detail::kl_term(b, a);
            if (std::isinf(t1) || std::isinf(t2)) return std::numeric_limits<double>::infinity();
            total += t1 + t2;
        }
    }
    return total;
}

}  // namespace areabd
