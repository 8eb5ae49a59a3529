#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "areabd/dynamics.hpp"
#include "areabd/gibbs.hpp"

namespace areabd {

/// Localized dynamics on a window Lambda of an enclosing torus: at every
/// birth proposal whose acceptance could depend on points beyond Lambda
/// (closer than 2R to the boundary), one boundary configuration is drawn
/// from (an approximation of) nu( . | eta_Lambda) and the proposal is
/// thinned against b(x, eta_Lambda zeta).  With an exact boundary draw the
/// tower property makes the effective rate exactly the boundary-averaged
/// one; the mcmc mode truncates at a finite annulus and its width/burn-in
/// are recorded by the caller.
inline Trajectory simulate_localized(const PointConfiguration& initial, const Region& lambda,
                                     const GibbsSpec& nu_spec, double T, const EventStream& stream,
                                     const BoundarySamplerConfig& bconf = {},
                                     const SimOptions& opt_in = {}) {
    const ModelParams& params = nu_spec.params;
    const DomainSpec& dom = params.domain;
    if (dom.kind != DomainKind::torus)
        throw std::invalid_argument("simulate_localized: enclosing domain must be a torus");
    lambda.validate(dom);
    if (lambda.kind != Region::Kind::box)
        throw std::invalid_argument("simulate_localized: Lambda must be a box inside the torus");
    for (int c = 0; c < dom.d; ++c)
        if (lambda.hi[c] - lambda.lo[c] >= dom.L - 1e-12)
            throw std::invalid_argument("simulate_localized: Lambda must be strictly inside");

    double W = bconf.width > 0.0 ? bconf.width : 4.0 * params.R;

    // truncation annulus for the mcmc boundary sampler
    Region outer = lambda;
    for (int c = 0; c < dom.d; ++c) {
        outer.lo[c] = lambda.lo[c] - std::min(W, (dom.L - (lambda.hi[c] - lambda.lo[c])) / 2.0);
        outer.hi[c] = lambda.hi[c] + std::min(W, (dom.L - (lambda.hi[c] - lambda.lo[c])) / 2.0);
    }
    Region annulus = Region::shell(lambda, outer);

    // full complement of Lambda within the torus (exact mode)
    Region complement_outer = lambda;
    for (int c = 0; c < dom.d; ++c) complement_outer.hi[c] = lambda.lo[c] + dom.L;
    Region complement = Region::shell(lambda, complement_outer);

    std::uint64_t draws = 0;
    std::vector<std::string> warnings;

    detail::RateFn rate = [&](const Vec& x, std::int64_t cell, std::uint64_t counter,
                              const detail::EngineState& state) -> double {
        if (params.rate_mode == RateMode::unit) return 1.0;
        if (lambda.boundary_distance(dom, x) >= 2.0 * params.R) return state.birth_rate(x);
        if (bconf.mode == BoundarySamplerConfig::Mode::empty) return state.birth_rate(x);

        ++draws;
        std::uint64_t sub_seed = rng::hash({stream.seed(), channel::boundary,
                                            static_cast<std::uint64_t>(cell), counter});
        PointConfiguration interior(params, state.alive_points());
        PointConfiguration zeta(params, {});
        if (bconf.mode == BoundarySamplerConfig::Mode::exact) {
            // rejection from the unit Poisson on the whole complement
            Rng rng(sub_seed);
            bool ok = false;
            for (long a = 0; a < bconf.max_attempts; ++a) {
                PointConfiguration cand = sample_poisson(params, complement, 1.0, rng);
                double H = local_energy(cand, interior, complement, params);
                if (rng.u01() < std::exp(-H)) {
                    zeta = std::move(cand);
                    ok = true;
                    break;
                }
            }
            if (!ok) warnings.push_back("boundary rejection budget exhausted; empty draw used");
        } else {
            // birth-death run on the annulus with eta_Lambda frozen inside
            EventStream sub_stream(sub_seed, dom, params.R);
            GibbsSpec sub_spec(params, annulus, BoundaryKind::frozen, interior);
            PointConfiguration empty(params, {});
            Trajectory sub = simulate(empty, sub_spec, bconf.burn_in, sub_stream);
            zeta = sub.terminal;
        }
        // thin against b(x, eta_Lambda zeta): neighbors of x among zeta,
        // in the chart around x
        std::vector<Vec> extra;
        for (int id : zeta.neighbors(x, 2.0 * params.R))
            extra.push_back(areabd::detail::chart(dom, x, zeta[id]));
        return state.birth_rate_with(x, std::move(extra));
    };

    Trajectory out = detail::run_engine(initial, params, lambda, nullptr, T, stream, opt_in, rate);
    out.n_boundary_draws = draws;
    out.warnings = std::move(warnings);
    return out;
}

/// Shared-noise coupling experiment: run the plain dynamics on every region
/// of a nested list (the last, largest one is the reference), all driven by
/// the same stream and started from the same configuration restricted per
/// region, and record when the restriction to `window` first differs from
/// the reference run.
struct CouplingReport {
    struct PerRegion {
        Region region;
        double ell;            // dist(window, region^c)
        bool disagreed;
        double t_first;        // +inf when the runs agree on [0, T]
    };
    Region window;
    std::vector<PerRegion> regions;
    bool monotone_ok = true;   // agreement monotone in region size
};

namespace detail {

inline std::vector<Event> window_events(const Trajectory& traj, const DomainSpec& dom,
                                        const Region& window) {
    std::vector<Event> out;
    for (const Event& e : traj.log) {
        if (e.kind == EventKind::proposal) continue;
        if (window.contains(dom, e.x)) out.push_back(e);
    }
    return out;
}

}  // namespace detail

inline CouplingReport couple(const PointConfiguration& initial, const Region& window,
                             const std::vector<Region>& regions, double T,
                             const EventStream& stream) {
    if (regions.size() < 2) throw std::invalid_argument("couple: need at least two regions");
    const ModelParams& params = initial.params();
    const DomainSpec& dom = params.domain;
    window.validate(dom);
    // nesting check (box containment; `whole` swallows everything)
    for (std::size_t i = 0; i + 1 < regions.size(); ++i) {
        const Region& a = regions[i];
        const Region& b = regions[i + 1];
        if (b.kind == Region::Kind::whole) continue;
        if (a.kind == Region::Kind::whole)
            throw std::invalid_argument("couple: regions not nested");
        for (int c = 0; c < dom.d; ++c)
            if (a.lo[c] < b.lo[c] - 1e-12 || a.hi[c] > b.hi[c] + 1e-12)
                throw std::invalid_argument("couple: regions not nested");
    }

    // shared initial configuration with stable indices per region
    std::vector<Trajectory> runs;
    runs.reserve(regions.size());
    for (const Region& reg : regions) {
        std::vector<Vec> pts;
        std::vector<std::int64_t> ids;
        for (std::size_t i = 0; i < initial.size(); ++i) {
            if (reg.contains(dom, initial[i])) {
                pts.push_back(initial[i]);
                ids.push_back(static_cast<std::int64_t>(i));
            }
        }
        SimOptions opt;
        opt.record_log = true;
        opt.initial_ids = std::move(ids);
        opt.region_id = static_cast<int>(runs.size());
        GibbsSpec spec(params, reg, BoundaryKind::empty);
        runs.push_back(simulate(PointConfiguration(params, std::move(pts)), spec, T, stream, opt));
    }

    std::vector<Event> ref = detail::window_events(runs.back(), dom, window);
    CouplingReport rep;
    rep.window = window;
    for (std::size_t r = 0; r < regions.size(); ++r) {
        std::vector<Event> ev = detail::window_events(runs[r], dom, window);
        double t_first = std::numeric_limits<double>::infinity();
        std::size_t n = std::min(ev.size(), ref.size());
        for (std::size_t i = 0; i < n; ++i) {
            if (ev[i].t != ref[i].t || ev[i].kind != ref[i].kind || ev[i].x != ref[i].x) {
                t_first = std::min(ev[i].t, ref[i].t);
                break;
            }
        }
        if (t_first == std::numeric_limits<double>::infinity() && ev.size() != ref.size()) {
            const std::vector<Event>& longer = ev.size() > ref.size() ? ev : ref;
            t_first = longer[n].t;
        }
        double ell = std::numeric_limits<double>::infinity();
        if (regions[r].kind == Region::Kind::box && window.kind == Region::Kind::box) {
            for (int c = 0; c < dom.d; ++c) {
                ell = std::min(ell, window.lo[c] - regions[r].lo[c]);
                ell = std::min(ell, regions[r].hi[c] - window.hi[c]);
            }
        }
        rep.regions.push_back(
            {regions[r], ell, std::isfinite(t_first), t_first});
    }
    bool seen_agree = false;
    for (const auto& pr : rep.regions) {
        if (!pr.disagreed) seen_agree = true;
        else if (seen_agree) rep.monotone_ok = false;
    }
    return rep;
}

}  // namespace areabd
