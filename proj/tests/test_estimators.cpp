#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "areabd/estimators.hpp"
#include "areabd/gibbs.hpp"
#include "areabd/micro.hpp"

using namespace areabd;
using Catch::Approx;

namespace {

std::vector<PointConfiguration> poisson_samples(const ModelParams& params, double intensity,
                                                long n, std::uint64_t seed) {
    Rng rng(rng::hash({seed, 0x9A3ull}));
    std::vector<PointConfiguration> out;
    out.reserve(n);
    for (long i = 0; i < n; ++i)
        out.push_back(sample_poisson(params, Region::whole(), intensity, rng));
    return out;
}

std::vector<PointConfiguration> gibbs_samples(const GibbsSpec& spec, long n, std::uint64_t seed) {
    std::vector<PointConfiguration> out;
    out.reserve(n);
    for (long i = 0; i < n; ++i)
        out.push_back(sample_rejection(spec, rng::hash({seed, static_cast<std::uint64_t>(i)}))
                          .configuration);
    return out;
}

}  // namespace

TEST_CASE("Mecke balance: unit Poisson with b = 1 and f = 1") {
    ModelParams params(0.25, DomainSpec::torus(1, 6.0), RateMode::unit);
    auto samples = poisson_samples(params, 1.0, 4000, 1);
    Region B = Region::box1(1.0, 5.0);
    TestFunction f{TestFunction::Kind::constant, 0.0};
    EstimateWithCI e = gnz_residual(samples, f, B, params, 5);
    CHECK(std::abs(e.estimate) < 3.0 * e.se);
    CHECK(e.se > 0.0);
}

TEST_CASE("GNZ residuals vanish for exact Gibbs samples across the family") {
    ModelParams params(0.25, DomainSpec::torus(1, 6.0));
    GibbsSpec spec(params, Region::whole(), BoundaryKind::torus_periodic);
    auto samples = gibbs_samples(spec, 4000, 99);
    Region B = Region::box1(0.5, 5.5);
    for (const TestFunction& f : default_test_family(params.R)) {
        EstimateWithCI e = gnz_residual(samples, f, B, params, 7);
        INFO(f.name());
        CHECK(std::abs(e.estimate) < 3.0 * e.se);
    }
}

TEST_CASE("GNZ rejects a misspecified Poisson(2) input") {
    ModelParams params(0.25, DomainSpec::torus(1, 6.0));
    auto samples = poisson_samples(params, 2.0, 4000, 31);
    Region B = Region::box1(0.5, 5.5);
    TestFunction f{TestFunction::Kind::count_in_ball, params.R};
    EstimateWithCI e = gnz_residual(samples, f, B, params, 8);
    double t = e.estimate / e.se;
    CHECK(std::abs(t) > 4.0);
    CHECK(e.estimate > 0.0);  // intensity 2 over-populates the inner sum
}

TEST_CASE("gnz precondition: margin and sample count") {
    ModelParams params(0.25, DomainSpec::box(0.0, 6.0));
    auto samples = poisson_samples(params, 1.0, 40, 2);
    TestFunction f{TestFunction::Kind::constant, 0.0};
    CHECK_THROWS_AS(gnz_residual(samples, f, Region::box1(0.1, 5.9), params),
                    std::invalid_argument);
    std::vector<PointConfiguration> few(samples.begin(), samples.begin() + 10);
    CHECK_THROWS_AS(gnz_residual(few, f, Region::box1(1.0, 5.0), params), std::invalid_argument);
    CHECK_NOTHROW(gnz_residual(samples, f, Region::box1(1.0, 5.0), params));
}

TEST_CASE("summary statistics on Poisson and full-cover inputs") {
    ModelParams params(0.5, DomainSpec::torus(1, 8.0));
    auto samples = poisson_samples(params, 1.0, 3000, 77);
    SummaryStats s = summary_stats(samples, params);
    CHECK(std::abs(s.intensity.estimate - 1.0) < 3.0 * s.intensity.se);
    for (std::size_t i = 0; i < s.pair_correlation.size(); ++i) {
        INFO("g(r) at radius " << s.pc_radii[i]);
        CHECK(std::abs(s.pair_correlation[i].estimate - 1.0) <
              4.0 * s.pair_correlation[i].se);
    }
    // covered fraction for Poisson(1): 1 - exp(-2R) exactly in expectation
    double cf = 1.0 - std::exp(-2.0 * params.R);
    CHECK(std::abs(s.covered_fraction.estimate - cf) < 4.0 * s.covered_fraction.se);

    // full cover: lattices shifted by exactly representable offsets
    std::vector<PointConfiguration> full;
    for (int i = 0; i < 40; ++i) {
        std::vector<Vec> pts;
        for (double x = 0.0; x < 8.0; x += 0.5) pts.push_back({x + i * 0.0078125, 0});
        full.push_back(PointConfiguration(params, pts));
    }
    SummaryStats sf = summary_stats(full, params);
    CHECK(sf.covered_fraction.estimate == 1.0);
    CHECK(sf.covered_fraction.se == 0.0);

    ModelParams narrow(0.5, DomainSpec::torus(1, 2.5));
    CHECK_THROWS_AS(summary_stats(poisson_samples(narrow, 1.0, 50, 3), narrow),
                    std::invalid_argument);
}

TEST_CASE("estimators are invariant under relabeling and torus translation") {
    ModelParams params(0.25, DomainSpec::torus(1, 6.0));
    auto samples = poisson_samples(params, 1.0, 300, 13);
    // relabel: reverse the point order of every sample
    std::vector<PointConfiguration> relabeled;
    for (const auto& c : samples) {
        std::vector<Vec> pts(c.points().rbegin(), c.points().rend());
        relabeled.push_back(PointConfiguration(params, pts));
    }
    // translate everything (samples and the test region) by v
    double v = 1.7;
    std::vector<PointConfiguration> shifted;
    for (const auto& c : samples) {
        std::vector<Vec> pts;
        for (Vec p : c.points()) pts.push_back(params.domain.wrap({p[0] + v, 0}));
        shifted.push_back(PointConfiguration(params, pts));
    }
    TestFunction f{TestFunction::Kind::count_in_ball, params.R};
    EstimateWithCI base = gnz_residual(samples, f, Region::box1(0.5, 5.5), params, 4);
    EstimateWithCI relab = gnz_residual(relabeled, f, Region::box1(0.5, 5.5), params, 4);
    EstimateWithCI trans = gnz_residual(shifted, f, Region::box1(0.5 + v, 5.5 + v), params, 4);
    CHECK(base.estimate == Approx(relab.estimate).margin(1e-9));
    CHECK(base.estimate == Approx(trans.estimate).margin(1e-9));

    SummaryStats s0 = summary_stats(samples, params);
    SummaryStats s1 = summary_stats(shifted, params);
    CHECK(s0.intensity.estimate == Approx(s1.intensity.estimate).margin(1e-9));
    CHECK(s0.covered_fraction.estimate == Approx(s1.covered_fraction.estimate).margin(1e-9));
}

TEST_CASE("DV bound: same source stays near zero, Poisson(2) vs Poisson(1) near 2log2 - 1") {
    ModelParams params(0.1, DomainSpec::box(0.0, 1.0));
    Region lam = Region::box1(0.0, 1.0);
    auto mu = poisson_samples(params, 2.0, 10000, 55);
    auto nu = poisson_samples(params, 1.0, 10000, 56);
    auto nu2 = poisson_samples(params, 1.0, 10000, 57);

    std::vector<DvFeature> count = {
        dv_feature_from({TestFunction::Kind::constant, 0.0}, lam, params)};

    DvResult same = dv_entropy_lower_bound(nu, nu2, count, 1);
    CHECK(same.bound.estimate <= 2.0 * same.bound.se);

    DvResult split = dv_entropy_lower_bound(mu, nu, count, 2);
    double exact = 2.0 * std::log(2.0) - 1.0;
    CHECK(exact == Approx(0.386294).margin(1e-6));
    CHECK(split.bound.estimate >= 0.30);
    CHECK(split.bound.estimate <= 0.40);
    // optimum near theta = log 2
    CHECK(std::abs(split.theta[0] - std::log(2.0)) < 0.15);
}

TEST_CASE("DV bound grows along nested feature families") {
    ModelParams params(0.1, DomainSpec::box(0.0, 1.0));
    Region lam = Region::box1(0.0, 1.0);
    auto mu = poisson_samples(params, 2.0, 2000, 71);
    auto nu = poisson_samples(params, 1.0, 2000, 72);
    std::vector<DvFeature> feats = {
        dv_feature_from({TestFunction::Kind::constant, 0.0}, lam, params),
        dv_feature_from({TestFunction::Kind::count_in_ball, 0.2}, lam, params),
        dv_feature_from({TestFunction::Kind::empty_indicator, 0.2}, lam, params),
    };
    double last = -1e300;
    std::vector<double> warm;
    for (std::size_t j = 1; j <= feats.size(); ++j) {
        std::vector<DvFeature> sub(feats.begin(), feats.begin() + j);
        DvResult r = dv_entropy_lower_bound(mu, nu, sub, 3, warm.empty() ? nullptr : &warm);
        CHECK(r.bound.estimate >= last - 1e-9);
        last = r.bound.estimate;
        warm = r.theta;
    }
}

TEST_CASE("fisher_mc: zero at equality, nonnegative, and matching the micro lab") {
    // unit mode with lambda = 1: integrand identically zero
    ModelParams unit(0.25, DomainSpec::torus(1, 6.0), RateMode::unit);
    auto usamples = poisson_samples(unit, 1.0, 500, 21);
    FisherIntegration how;
    how.window = Region::box1(0.5, 5.5);
    EstimateWithCI zero = fisher_mc(usamples, poisson_density_model(1.0, unit), how, unit);
    CHECK(zero.estimate == 0.0);

    // Poisson(2) against the area interaction: strictly positive
    ModelParams params(0.25, DomainSpec::torus(1, 6.0));
    auto psamples = poisson_samples(params, 2.0, 2000, 22);
    EstimateWithCI pos = fisher_mc(psamples, poisson_density_model(2.0, params), how, params);
    CHECK(pos.estimate > -3.0 * pos.se);
    CHECK(pos.estimate > 0.0);

    // micro cross-check: tilt the stationary law by the pair count
    MicroSystem sys(ModelParams(0.5, DomainSpec::torus(1, 10.0)), {{0, 0}, {0.7, 0}, {1.5, 0}});
    DistributionVector pi = stationary(sys);
    DistributionVector p(pi.size());
    double norm = 0.0;
    auto pairs = [&](std::size_t s) {
        int c = 0;
        for (int a = 0; a < sys.k(); ++a)
            for (int b = a + 1; b < sys.k(); ++b)
                if (MicroSystem::occupied(s, a) && MicroSystem::occupied(s, b) &&
                    sys.params().domain.distance(sys.sites()[a], sys.sites()[b]) <=
                        2.0 * sys.params().R)
                    ++c;
        return static_cast<double>(c);
    };
    for (std::size_t s = 0; s < p.size(); ++s) {
        p[s] = pi[s] * std::exp(0.8 * pairs(s));
        norm += p[s];
    }
    for (double& v : p) v /= norm;
    double exact_fisher = fisher(sys, p);

    // iid samples from p, embedded as point configurations
    Rng rng(808);
    long n = 20000;
    std::vector<PointConfiguration> msamples;
    std::vector<double> logf(p.size());
    for (std::size_t s = 0; s < p.size(); ++s) logf[s] = std::log(p[s] / pi[s]);
    for (long i = 0; i < n; ++i) {
        double u = rng.u01();
        std::size_t s = 0;
        double acc = 0.0;
        for (; s < p.size(); ++s) {
            acc += p[s];
            if (u < acc) break;
        }
        if (s == p.size()) s = p.size() - 1;
        std::vector<Vec> pts;
        for (int x = 0; x < sys.k(); ++x)
            if (MicroSystem::occupied(s, x)) pts.push_back(sys.sites()[x]);
        msamples.push_back(PointConfiguration(sys.params(), pts));
    }
    auto state_of = [&](const PointConfiguration& eta) {
        std::size_t s = 0;
        for (int x = 0; x < sys.k(); ++x)
            if (!eta.neighbors(sys.sites()[x], 1e-9).empty()) s |= MicroSystem::bit(x);
        return s;
    };
    DensityModel model = [&](const Vec& x, const PointConfiguration& eta) {
        std::size_t s = state_of(eta);
        int site = -1;
        for (int k = 0; k < sys.k(); ++k)
            if (sys.params().domain.distance(x, sys.sites()[k]) < 1e-9) site = k;
        return logf[s | MicroSystem::bit(site)] - logf[s];
    };
    FisherIntegration sites_mode;
    sites_mode.use_sites = true;
    sites_mode.sites = sys.sites();
    EstimateWithCI mc = fisher_mc(msamples, model, sites_mode, sys.params());
    CHECK(std::abs(mc.estimate - exact_fisher) < 3.0 * mc.se);
    CHECK(exact_fisher > 0.0);
}
