#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>

#include "areabd/dynamics.hpp"
#include "areabd/measure.hpp"
#include "areabd/rng.hpp"

namespace areabd {

struct SampleReport {
    PointConfiguration configuration;
    long attempts = 1;             // rejection attempts, or proposal count for MCMC
    double acceptance_rate = 1.0;
    double autocorr = std::numeric_limits<double>::quiet_NaN();  // lag-1 of N along MCMC
};

/// Uniform point in a region.
inline Vec sample_uniform(const Region& reg, const DomainSpec& dom, Rng& rng) {
    if (reg.kind == Region::Kind::whole) {
        Vec x{0.0, 0.0};
        for (int c = 0; c < dom.d; ++c)
            x[c] = dom.kind == DomainKind::torus ? rng.uniform(0.0, dom.L)
                                                 : rng.uniform(dom.lo[c], dom.hi[c]);
        return x;
    }
    for (;;) {
        Vec x{0.0, 0.0};
        for (int c = 0; c < dom.d; ++c) x[c] = rng.uniform(reg.lo[c], reg.hi[c]);
        x = dom.wrap(x);
        if (reg.contains(dom, x)) return x;
    }
}

/// Draw from the homogeneous Poisson process of the given intensity on a region.
inline PointConfiguration sample_poisson(const ModelParams& params, const Region& reg,
                                         double intensity, Rng& rng) {
    int n = rng.poisson(intensity * reg.volume(params.domain));
    std::vector<Vec> pts;
    pts.reserve(n);
    for (int i = 0; i < n; ++i) pts.push_back(sample_uniform(reg, params.domain, rng));
    return PointConfiguration(params, std::move(pts));
}

/// Exact draw from nu_Lambda^omega by rejection from the unit Poisson
/// process: H_Lambda >= 0 makes exp(-H) a valid acceptance probability.
inline SampleReport sample_rejection(const GibbsSpec& spec, std::uint64_t seed,
                                     long max_attempts = 1000000) {
    Rng rng(rng::hash({seed, 0xA11Dull}));
    for (long attempt = 1; attempt <= max_attempts; ++attempt) {
        PointConfiguration eta = sample_poisson(spec.params, spec.lambda, 1.0, rng);
        double H = spec.energy(eta);
        if (rng.u01() < std::exp(-H)) {
            SampleReport rep;
            rep.configuration = std::move(eta);
            rep.attempts = attempt;
            rep.acceptance_rate = 1.0 / static_cast<double>(attempt);
            return rep;
        }
    }
    throw std::runtime_error("sample_rejection: max_attempts exceeded (" +
                             std::to_string(max_attempts) + "); window too large");
}

/// Approximate draw: run the exact dynamics from the empty configuration for
/// `burn_in_time` and return the terminal state.
inline SampleReport sample_mcmc(const GibbsSpec& spec, std::uint64_t seed, double burn_in_time,
                                bool diagnostics = false) {
    if (burn_in_time < 0.0) throw std::invalid_argument("sample_mcmc: negative burn-in");
    EventStream stream(rng::hash({seed, 0x3CC0ull}), spec.params.domain, spec.params.R);
    SimOptions opt;
    if (diagnostics) {
        for (double t = 1.0; t < burn_in_time; t += 1.0) opt.snapshot_times.push_back(t);
    }
    PointConfiguration empty(spec.params, {});
    Trajectory traj = simulate(empty, spec, burn_in_time, stream, opt);
    SampleReport rep;
    rep.configuration = traj.terminal;
    rep.attempts = static_cast<long>(traj.n_proposals);
    rep.acceptance_rate = traj.n_proposals == 0
                              ? 1.0
                              : static_cast<double>(traj.n_accepts) /
                                    static_cast<double>(traj.n_proposals);
    if (diagnostics && traj.snapshots.size() >= 3) {
        std::vector<double> ns;
        for (const auto& c : traj.snapshots) ns.push_back(static_cast<double>(c.size()));
        double m = 0.0;
        for (double v : ns) m += v;
        m /= static_cast<double>(ns.size());
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i + 1 < ns.size(); ++i) num += (ns[i] - m) * (ns[i + 1] - m);
        for (double v : ns) den += (v - m) * (v - m);
        rep.autocorr = den > 0.0 ? num / den : 0.0;
    }
    return rep;
}

/// log Z_Lambda(omega) by plain Monte Carlo over unit-Poisson draws, with
/// delta-method standard error.
inline std::pair<double, double> log_partition_estimate(const GibbsSpec& spec, int n_samples,
                                                        std::uint64_t seed) {
    if (n_samples < 100) throw std::invalid_argument("log_partition: need >= 100 samples");
    Rng rng(rng::hash({seed, 0x10A7ull}));
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n_samples; ++i) {
        PointConfiguration eta = sample_poisson(spec.params, spec.lambda, 1.0, rng);
        double w = std::exp(-spec.energy(eta));
        sum += w;
        sumsq += w * w;
    }
    double n = static_cast<double>(n_samples);
    double mean = sum / n;
    double var = std::max(0.0, sumsq / n - mean * mean) / (n - 1.0);
    return {std::log(mean), std::sqrt(var) / mean};
}

}  // namespace areabd
