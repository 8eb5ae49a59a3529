#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>

#include "areabd/localized.hpp"
#include "support/oracles.hpp"

using namespace areabd;
using Catch::Approx;

namespace {

bool logs_equal(const std::vector<Event>& a, const std::vector<Event>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].t != b[i].t || a[i].kind != b[i].kind || a[i].x != b[i].x ||
            a[i].point_id != b[i].point_id)
            return false;
    }
    return true;
}

}  // namespace

TEST_CASE("T = 0 leaves the initial configuration untouched") {
    ModelParams params(0.25, DomainSpec::torus(1, 2.0));
    GibbsSpec spec(params, Region::whole(), BoundaryKind::torus_periodic);
    PointConfiguration init(params, {{0.3, 0}, {1.1, 0}});
    EventStream stream(7, params.domain, params.R);
    Trajectory traj = simulate(init, spec, 0.0, stream);
    REQUIRE(traj.terminal.size() == 2);
    CHECK(traj.n_proposals == 0);
    CHECK_THROWS_AS(simulate(init, spec, -1.0, stream), std::invalid_argument);
}

TEST_CASE("initial points outside the window are rejected") {
    ModelParams params(0.25, DomainSpec::torus(1, 4.0));
    GibbsSpec spec(params, Region::box1(0.0, 1.0));
    PointConfiguration outside(params, {{2.5, 0}});
    EventStream stream(7, params.domain, params.R);
    CHECK_THROWS_AS(simulate(outside, spec, 1.0, stream), std::invalid_argument);
}

TEST_CASE("unit-mode immigration-death keeps the Poisson profile") {
    // M/M/infty: births at rate |Lambda|, unit deaths; Poisson(|Lambda|)
    // is stationary.
    ModelParams params(0.25, DomainSpec::torus(1, 2.0), RateMode::unit);
    GibbsSpec spec(params, Region::whole(), BoundaryKind::torus_periodic);
    long n = 10000;
    double vol = 2.0;
    double sum = 0.0;
    for (long rep = 0; rep < n; ++rep) {
        Rng rng(rng::hash({static_cast<std::uint64_t>(rep), 0xF00ull}));
        PointConfiguration init = sample_poisson(params, Region::whole(), 1.0, rng);
        EventStream stream(rng::hash({static_cast<std::uint64_t>(rep), 0xFEEull}), params.domain,
                           params.R);
        Trajectory traj = simulate(init, spec, 1.0, stream);
        sum += static_cast<double>(traj.terminal.size());
    }
    double mean = sum / static_cast<double>(n);
    double sigma = std::sqrt(vol / static_cast<double>(n));
    CHECK(std::abs(mean - vol) < 3.0 * sigma);
}

TEST_CASE("identical inputs give bit-identical event logs") {
    ModelParams params(0.5, DomainSpec::torus(2, 4.0));
    GibbsSpec spec(params, Region::whole(), BoundaryKind::torus_periodic);
    Rng rng(1);
    PointConfiguration init = sample_poisson(params, Region::whole(), 1.0, rng);
    SimOptions opt;
    opt.record_log = true;
    EventStream s1(555, params.domain, params.R);
    EventStream s2(555, params.domain, params.R);
    Trajectory a = simulate(init, spec, 5.0, s1, opt);
    Trajectory b = simulate(init, spec, 5.0, s2, opt);
    REQUIRE(!a.log.empty());
    CHECK(logs_equal(a.log, b.log));
    EventStream s3(556, params.domain, params.R);
    Trajectory c = simulate(init, spec, 5.0, s3, opt);
    CHECK(!logs_equal(a.log, c.log));
}

TEST_CASE("proposal marks form a unit-rate space-time Poisson process") {
    ModelParams params(0.5, DomainSpec::torus(1, 8.0), RateMode::unit);
    GibbsSpec spec(params, Region::whole(), BoundaryKind::torus_periodic);
    PointConfiguration empty(params, {});
    SimOptions opt;
    opt.record_log = true;
    double T = 4.0;
    Region sub = Region::box1(1.0, 5.0);

    long reps = 2500;
    double vol_time = 4.0 * T;
    double sum = 0.0, sumsq = 0.0;
    std::vector<double> xs, ts;
    for (long rep = 0; rep < reps; ++rep) {
        EventStream stream(rng::hash({static_cast<std::uint64_t>(rep), 0x9999ull}), params.domain,
                           params.R);
        Trajectory traj = simulate(empty, spec, T, stream, opt);
        double cnt = 0.0;
        for (const Event& e : traj.log) {
            if (e.kind != EventKind::proposal) continue;
            if (!sub.contains(params.domain, e.x)) continue;
            cnt += 1.0;
            if (rep < 50) {
                xs.push_back((e.x[0] - 1.0) / 4.0);
                ts.push_back(e.t / T);
            }
        }
        sum += cnt;
        sumsq += cnt * cnt;
    }
    double mean = sum / reps;
    double var = sumsq / reps - mean * mean;
    CHECK(std::abs(mean - vol_time) < 3.0 * std::sqrt(vol_time / reps));
    CHECK(std::abs(var - vol_time) < 4.0 * vol_time * std::sqrt(2.0 / reps));
    auto unif = [](double u) { return std::clamp(u, 0.0, 1.0); };
    CHECK(oracles::ks_pvalue(oracles::ks_statistic(xs, unif), xs.size()) > 0.01);
    CHECK(oracles::ks_pvalue(oracles::ks_statistic(ts, unif), ts.size()) > 0.01);
}

TEST_CASE("death ages are unit exponential") {
    ModelParams params(0.25, DomainSpec::torus(1, 6.0));
    GibbsSpec spec(params, Region::whole(), BoundaryKind::torus_periodic);
    PointConfiguration empty(params, {});
    SimOptions opt;
    opt.record_log = true;
    double T = 40.0;
    std::vector<double> ages;
    for (long rep = 0; rep < 60; ++rep) {
        EventStream stream(rng::hash({static_cast<std::uint64_t>(rep), 0xA6E5ull}), params.domain,
                           params.R);
        Trajectory traj = simulate(empty, spec, T, stream, opt);
        std::map<std::int64_t, double> born;
        for (const Event& e : traj.log) {
            if (e.kind == EventKind::accept) born[e.point_id] = e.t;
            if (e.kind == EventKind::death && born.count(e.point_id)) {
                double birth = born[e.point_id];
                if (birth < T - 10.0) ages.push_back(e.t - birth);
            }
        }
    }
    REQUIRE(ages.size() > 3000);
    auto expo = [](double x) { return 1.0 - std::exp(-x); };
    CHECK(oracles::ks_pvalue(oracles::ks_statistic(ages, expo), ages.size()) > 0.01);
}

TEST_CASE("snapshots reconstruct the trajectory") {
    ModelParams params(0.5, DomainSpec::torus(1, 4.0));
    GibbsSpec spec(params, Region::whole(), BoundaryKind::torus_periodic);
    PointConfiguration empty(params, {});
    SimOptions opt;
    opt.record_log = true;
    opt.snapshot_times = {0.0, 1.0, 2.0, 3.0};
    EventStream stream(1234, params.domain, params.R);
    Trajectory traj = simulate(empty, spec, 3.0, stream, opt);
    REQUIRE(traj.snapshots.size() == 4);
    CHECK(traj.snapshots[0].empty());
    // replay the log up to each snapshot time and compare point counts
    for (std::size_t i = 0; i < traj.snapshot_times.size(); ++i) {
        double t = traj.snapshot_times[i];
        long n = 0;
        for (const Event& e : traj.log) {
            if (e.t >= t) break;
            if (e.kind == EventKind::accept) ++n;
            if (e.kind == EventKind::death) --n;
        }
        CHECK(static_cast<long>(traj.snapshots[i].size()) == n);
    }
}

TEST_CASE("localized dynamics with an empty boundary equals the plain run") {
    ModelParams params(0.25, DomainSpec::torus(1, 6.0));
    Region lam = Region::box1(0.0, 2.0);
    GibbsSpec nu(params, Region::whole(), BoundaryKind::torus_periodic);
    GibbsSpec plain_spec(params, lam, BoundaryKind::empty);
    PointConfiguration init(params, {{0.5, 0}, {1.5, 0}});
    EventStream s1(77, params.domain, params.R);
    SimOptions opt;
    opt.record_log = true;
    BoundarySamplerConfig bc;
    bc.mode = BoundarySamplerConfig::Mode::empty;
    Trajectory a = simulate_localized(init, lam, nu, 5.0, s1, bc, opt);
    Trajectory b = simulate(init, plain_spec, 5.0, s1, opt);
    CHECK(logs_equal(a.log, b.log));
    CHECK(a.n_boundary_draws == 0);
}

TEST_CASE("localized dynamics preserves the exact window marginal") {
    // start from the restriction of an exact torus sample; the N_Lambda
    // histogram at T = 10 must match the one at t = 0.
    ModelParams params(0.25, DomainSpec::torus(1, 6.0));
    Region lam = Region::box1(0.0, 1.0);
    GibbsSpec nu(params, Region::whole(), BoundaryKind::torus_periodic);
    BoundarySamplerConfig bc;
    bc.mode = BoundarySamplerConfig::Mode::exact;
    long reps = 10000;
    std::map<std::size_t, long> h0, h1;
    std::uint64_t total_draws = 0;
    for (long rep = 0; rep < reps; ++rep) {
        SampleReport s = sample_rejection(nu, 7000000 + static_cast<std::uint64_t>(rep));
        PointConfiguration init = s.configuration.restricted_to(lam);
        h0[init.size()]++;
        EventStream stream(rng::hash({static_cast<std::uint64_t>(rep), 0x10CAull}), params.domain,
                           params.R);
        Trajectory traj = simulate_localized(init, lam, nu, 10.0, stream, bc);
        total_draws += traj.n_boundary_draws;
        h1[traj.terminal.size()]++;
    }
    CHECK(total_draws > static_cast<std::uint64_t>(reps));  // boundary actually consulted
    double tv = 0.0;
    for (std::size_t k = 0; k < 15; ++k) {
        double p0 = h0.count(k) ? static_cast<double>(h0[k]) / reps : 0.0;
        double p1 = h1.count(k) ? static_cast<double>(h1[k]) / reps : 0.0;
        tv += std::abs(p0 - p1);
    }
    CHECK(tv / 2.0 <= 0.03);
}

TEST_CASE("localized rate bounds hold even with impossible conditioning") {
    ModelParams params(0.25, DomainSpec::torus(1, 6.0));
    Region lam = Region::box1(0.0, 1.0);
    GibbsSpec nu(params, Region::whole(), BoundaryKind::torus_periodic);
    BoundarySamplerConfig bc;
    bc.mode = BoundarySamplerConfig::Mode::mcmc;
    bc.burn_in = 5.0;
    PointConfiguration empty(params, {});
    EventStream stream(4242, params.domain, params.R);
    Trajectory traj = simulate_localized(empty, lam, nu, 5.0, stream, bc);
    CHECK(traj.n_boundary_draws > 0);
    // acceptance statistics stay within the global rate bounds
    CHECK(traj.n_accepts <= traj.n_proposals);
}

TEST_CASE("coupling: identical regions never disagree and ell = 0 is maximal") {
    ModelParams params(0.5, DomainSpec::torus(1, 24.0));
    Region window = Region::box1(0.0, 1.0);
    Rng rng(6);
    long reps = 400;
    long d_same = 0, d_zero = 0, d_two = 0;
    bool monotone_all = true;
    for (long rep = 0; rep < reps; ++rep) {
        Rng prng(rng::hash({static_cast<std::uint64_t>(rep), 0xC0FEull}));
        PointConfiguration init = sample_poisson(params, Region::whole(), 1.0, prng);
        EventStream stream(rng::hash({static_cast<std::uint64_t>(rep), 0xC0FFull}), params.domain,
                           params.R);
        std::vector<Region> regions = {window, Region::box1(-2.0, 3.0), Region::whole()};
        CouplingReport rep1 = couple(init, window, regions, 1.0, stream);
        if (rep1.regions[0].disagreed) ++d_zero;
        if (rep1.regions[1].disagreed) ++d_two;
        monotone_all = monotone_all && rep1.monotone_ok;

        // duplicated largest region: reference equals itself
        std::vector<Region> twice = {Region::whole(), Region::whole()};
        CouplingReport rep2 = couple(init, window, twice, 1.0, stream);
        if (rep2.regions[0].disagreed) ++d_same;
    }
    CHECK(d_same == 0);
    CHECK(d_zero > d_two);
    CHECK(monotone_all);
}

TEST_CASE("coupling rejects non-nested regions") {
    ModelParams params(0.5, DomainSpec::torus(1, 24.0));
    PointConfiguration init(params, {});
    EventStream stream(2, params.domain, params.R);
    std::vector<Region> bad = {Region::box1(0.0, 5.0), Region::box1(1.0, 4.0)};
    CHECK_THROWS_AS(couple(init, Region::box1(1.0, 2.0), bad, 1.0, stream),
                    std::invalid_argument);
}
