#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

#include "areabd/geometry.hpp"
#include "areabd/rng.hpp"

namespace areabd {

struct EstimateWithCI {
    double estimate = 0.0;
    double se = 0.0;
    long n = 0;
};

/// Bounded local statistics f(x, eta) used as GNZ test functions and as
/// building blocks for the variational entropy features.
struct TestFunction {
    enum class Kind { constant, count_in_ball, covered_volume_in_ball, nn_dist_capped, empty_indicator };
    Kind kind = Kind::constant;
    double radius = 0.0;  // ball radius for the ball-based kinds
    std::string name() const {
        switch (kind) {
            case Kind::constant: return "constant";
            case Kind::count_in_ball: return "count_in_ball(" + std::to_string(radius) + ")";
            case Kind::covered_volume_in_ball:
                return "covered_volume_in_ball(" + std::to_string(radius) + ")";
            case Kind::nn_dist_capped: return "nn_dist_capped";
            case Kind::empty_indicator: return "empty_indicator(" + std::to_string(radius) + ")";
        }
        return "?";
    }
};

/// The five-member family at canonical radii.
inline std::vector<TestFunction> default_test_family(double R) {
    return {
        {TestFunction::Kind::constant, 0.0},
        {TestFunction::Kind::count_in_ball, R},
        {TestFunction::Kind::covered_volume_in_ball, R},
        {TestFunction::Kind::nn_dist_capped, 0.0},
        {TestFunction::Kind::empty_indicator, R},
    };
}

/// Evaluate f(x, eta - delta_{exclude}); exclude < 0 keeps all points.
inline double eval_testfn(const TestFunction& f, const ModelParams& params, const Vec& x,
                          const PointConfiguration& eta, int exclude = -1) {
    const DomainSpec& dom = params.domain;
    switch (f.kind) {
        case TestFunction::Kind::constant:
            return 1.0;
        case TestFunction::Kind::count_in_ball:
            return static_cast<double>(eta.neighbors(x, f.radius, exclude).size());
        case TestFunction::Kind::covered_volume_in_ball: {
            std::vector<Vec> near;
            for (int id : eta.neighbors(x, f.radius + params.R, exclude))
                near.push_back(detail::chart(dom, x, eta[id]));
            double uncovered = detail::added_volume_planar(dom.d, x, f.radius, near, params.R);
            double ball = dom.d == 1 ? 2.0 * f.radius : std::numbers::pi * f.radius * f.radius;
            return ball - uncovered;
        }
        case TestFunction::Kind::nn_dist_capped: {
            double cap = 2.0 * params.R;
            double best = cap;
            for (int id : eta.neighbors(x, cap, exclude))
                best = std::min(best, dom.distance(x, eta[id]));
            return best;
        }
        case TestFunction::Kind::empty_indicator:
            return eta.neighbors(x, f.radius, exclude).empty() ? 1.0 : 0.0;
    }
    return 0.0;
}

namespace detail {

inline EstimateWithCI mean_and_se(const std::vector<double>& v) {
    EstimateWithCI e;
    e.n = static_cast<long>(v.size());
    if (v.empty()) return e;
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double s2 = 0.0;
    for (double x : v) s2 += (x - m) * (x - m);
    e.estimate = m;
    e.se = v.size() > 1 ? std::sqrt(s2 / (static_cast<double>(v.size()) - 1.0) /
                                    static_cast<double>(v.size()))
                        : 0.0;
    return e;
}

inline double bootstrap_se_of_mean(const std::vector<double>& v, std::uint64_t seed,
                                   int n_boot = 500) {
    if (v.size() < 2) return 0.0;
    Rng rng(rng::hash({seed, 0xB007ull}));
    std::vector<double> means;
    means.reserve(n_boot);
    for (int b = 0; b < n_boot; ++b) {
        double s = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) s += v[rng.below(v.size())];
        means.push_back(s / static_cast<double>(v.size()));
    }
    double m = 0.0;
    for (double x : means) m += x;
    m /= static_cast<double>(means.size());
    double s2 = 0.0;
    for (double x : means) s2 += (x - m) * (x - m);
    return std::sqrt(s2 / (static_cast<double>(means.size()) - 1.0));
}

/// Midpoint quadrature nodes over a box region, spacing at most `target`.
inline void quad_nodes(const Region& reg, int d, double target, std::vector<Vec>& nodes,
                       double& weight) {
    int m0 = std::max(1, static_cast<int>(std::ceil((reg.hi[0] - reg.lo[0]) / target)));
    double h0 = (reg.hi[0] - reg.lo[0]) / m0;
    nodes.clear();
    if (d == 1) {
        weight = h0;
        for (int i = 0; i < m0; ++i) nodes.push_back({reg.lo[0] + (i + 0.5) * h0, 0.0});
        return;
    }
    int m1 = std::max(1, static_cast<int>(std::ceil((reg.hi[1] - reg.lo[1]) / target)));
    double h1 = (reg.hi[1] - reg.lo[1]) / m1;
    weight = h0 * h1;
    for (int i = 0; i < m0; ++i)
        for (int j = 0; j < m1; ++j)
            nodes.push_back({reg.lo[0] + (i + 0.5) * h0, reg.lo[1] + (j + 0.5) * h1});
}

inline void require_margin(const Region& B, const ModelParams& params) {
    const DomainSpec& dom = params.domain;
    if (dom.kind == DomainKind::torus) {
        if (dom.L < 6.0 * params.R)
            throw std::invalid_argument("estimator: torus side below 6R");
        return;
    }
    if (B.kind != Region::Kind::box) throw std::invalid_argument("estimator: B must be a box");
    for (int c = 0; c < dom.d; ++c)
        if (B.lo[c] < dom.lo[c] + 2.0 * params.R - 1e-12 ||
            B.hi[c] > dom.hi[c] - 2.0 * params.R + 1e-12)
            throw std::invalid_argument("estimator: B violates the 2R margin");
}

}  // namespace detail

/// GNZ residual: mean over samples of
///   sum_{x in eta cap B} f(x, eta - x)  -  int_B b(x, eta) f(x, eta) dx,
/// the spatial integral by midpoint quadrature at spacing <= R/8.  Centered
/// at zero exactly when the samples come from a Gibbs measure for b.
inline EstimateWithCI gnz_residual(const std::vector<PointConfiguration>& samples,
                                   const TestFunction& f, const Region& B,
                                   const ModelParams& params, std::uint64_t seed = 1) {
    if (samples.size() < 30) throw std::invalid_argument("gnz_residual: need >= 30 samples");
    detail::require_margin(B, params);
    std::vector<Vec> nodes;
    double w = 0.0;
    detail::quad_nodes(B, params.domain.d, params.R / 8.0, nodes, w);
    std::vector<double> residuals;
    residuals.reserve(samples.size());
    for (const PointConfiguration& eta : samples) {
        double inner = 0.0;
        for (std::size_t i = 0; i < eta.size(); ++i)
            if (B.contains(params.domain, eta[i]))
                inner += eval_testfn(f, params, eta[i], eta, static_cast<int>(i));
        double integral = 0.0;
        for (const Vec& x : nodes)
            integral += birth_rate(x, eta, params) * eval_testfn(f, params, x, eta);
        residuals.push_back(inner - integral * w);
    }
    EstimateWithCI e = detail::mean_and_se(residuals);
    e.se = detail::bootstrap_se_of_mean(residuals, seed);
    return e;
}

struct SummaryStats {
    EstimateWithCI intensity;
    EstimateWithCI covered_fraction;
    std::vector<double> pc_radii;
    std::vector<EstimateWithCI> pair_correlation;
};

/// Intensity, covered volume fraction and pair correlation at {R/2, R, 2R}.
/// On a torus the whole window is used (no edges); on a box the window is
/// eroded by 2R.
inline SummaryStats summary_stats(const std::vector<PointConfiguration>& samples,
                                  const ModelParams& params) {
    if (samples.size() < 30) throw std::invalid_argument("summary_stats: need >= 30 samples");
    const DomainSpec& dom = params.domain;
    for (int c = 0; c < dom.d; ++c)
        if (dom.side(c) < 6.0 * params.R - 1e-12)
            throw std::invalid_argument("summary_stats: window below 6R per axis");
    const bool torus = dom.kind == DomainKind::torus;
    Region eroded = Region::whole();
    double obs_vol = dom.volume();
    if (!torus) {
        eroded = dom.d == 1 ? Region::box1(dom.lo[0] + 2 * params.R, dom.hi[0] - 2 * params.R)
                            : Region::box2(dom.lo[0] + 2 * params.R, dom.hi[0] - 2 * params.R,
                                           dom.lo[1] + 2 * params.R, dom.hi[1] - 2 * params.R);
        obs_vol = eroded.volume(dom);
    }

    SummaryStats out;
    std::vector<double> intens, covered;
    intens.reserve(samples.size());
    for (const PointConfiguration& eta : samples) {
        double n = torus ? static_cast<double>(eta.size())
                         : static_cast<double>(eta.count_in(eroded));
        intens.push_back(n / obs_vol);
        if (torus) {
            covered.push_back(union_volume(eta, params) / dom.volume());
        } else {
            // midpoint quadrature of the covered indicator on the eroded box
            std::vector<Vec> nodes;
            double w = 0.0;
            detail::quad_nodes(eroded, dom.d, params.R / 32.0, nodes, w);
            double hit = 0.0;
            for (const Vec& x : nodes)
                if (!eta.neighbors(x, params.R).empty()) hit += 1.0;
            covered.push_back(hit * w / obs_vol);
        }
    }
    out.intensity = detail::mean_and_se(intens);
    out.covered_fraction = detail::mean_and_se(covered);

    double lambda_hat = std::max(out.intensity.estimate, 1e-300);
    out.pc_radii = {params.R / 2.0, params.R, 2.0 * params.R};
    double delta = params.R / 16.0;
    for (double r : out.pc_radii) {
        std::vector<double> g;
        g.reserve(samples.size());
        double shell = dom.d == 1 ? 4.0 * delta : 4.0 * std::numbers::pi * r * delta;
        for (const PointConfiguration& eta : samples) {
            double cnt = 0.0;
            for (std::size_t i = 0; i < eta.size(); ++i) {
                if (!torus && !eroded.contains(dom, eta[i])) continue;
                for (int id : eta.neighbors(eta[i], r + delta, static_cast<int>(i))) {
                    double dist = dom.distance(eta[i], eta[id]);
                    if (dist > r - delta && dist <= r + delta) cnt += 1.0;
                }
            }
            g.push_back(cnt / (lambda_hat * lambda_hat * obs_vol * shell));
        }
        out.pair_correlation.push_back(detail::mean_and_se(g));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Donsker-Varadhan lower bound
// ---------------------------------------------------------------------------

struct DvFeature {
    std::string name;
    std::function<double(const PointConfiguration&)> value;
};

/// Lambda-local feature induced by a test function: sum_{x in eta cap L} f(x, eta - x).
inline DvFeature dv_feature_from(const TestFunction& f, const Region& lambda,
                                 const ModelParams& params) {
    return {f.name(), [f, lambda, params](const PointConfiguration& eta) {
                double s = 0.0;
                for (std::size_t i = 0; i < eta.size(); ++i)
                    if (lambda.contains(params.domain, eta[i]))
                        s += eval_testfn(f, params, eta[i], eta, static_cast<int>(i));
                return s;
            }};
}

struct DvResult {
    EstimateWithCI bound;
    std::vector<double> theta;
    std::vector<double> trace;   // best objective value per iteration
    bool converged = true;
};

namespace detail {

inline double logmeanexp(const std::vector<double>& v) {
    double m = v[0];
    for (double x : v) m = std::max(m, x);
    double s = 0.0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s / static_cast<double>(v.size()));
}

/// Nelder-Mead maximization with a box constraint |theta_j| <= bound.
inline std::vector<double> nelder_mead(const std::function<double(const std::vector<double>&)>& obj,
                                       std::vector<double> start, double bound, int max_iter,
                                       std::vector<double>* trace) {
    const std::size_t n = start.size();
    auto clamp = [&](std::vector<double>& v) {
        for (double& x : v) x = std::clamp(x, -bound, bound);
    };
    clamp(start);
    std::vector<std::vector<double>> simplex(n + 1, start);
    for (std::size_t i = 0; i < n; ++i) {
        simplex[i + 1][i] += simplex[i + 1][i] == 0.0 ? 0.25 : 0.1 * std::abs(simplex[i + 1][i]);
        clamp(simplex[i + 1]);
    }
    std::vector<double> fv(n + 1);
    for (std::size_t i = 0; i <= n; ++i) fv[i] = obj(simplex[i]);
    for (int it = 0; it < max_iter; ++it) {
        // order descending (maximization)
        for (std::size_t i = 0; i <= n; ++i)
            for (std::size_t j = i + 1; j <= n; ++j)
                if (fv[j] > fv[i]) {
                    std::swap(fv[i], fv[j]);
                    std::swap(simplex[i], simplex[j]);
                }
        if (trace) trace->push_back(fv[0]);
        if (std::abs(fv[0] - fv[n]) < 1e-12) break;
        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i][j] / static_cast<double>(n);
        auto blend = [&](double coef) {
            std::vector<double> v(n);
            for (std::size_t j = 0; j < n; ++j)
                v[j] = centroid[j] + coef * (centroid[j] - simplex[n][j]);
            clamp(v);
            return v;
        };
        std::vector<double> refl = blend(1.0);
        double frefl = obj(refl);
        if (frefl > fv[0]) {
            std::vector<double> expd = blend(2.0);
            double fexpd = obj(expd);
            if (fexpd > frefl) { simplex[n] = expd; fv[n] = fexpd; }
            else { simplex[n] = refl; fv[n] = frefl; }
        } else if (frefl > fv[n - 1]) {
            simplex[n] = refl;
            fv[n] = frefl;
        } else {
            std::vector<double> contr = blend(-0.5);
            double fcontr = obj(contr);
            if (fcontr > fv[n]) { simplex[n] = contr; fv[n] = fcontr; }
            else {
                for (std::size_t i = 1; i <= n; ++i) {
                    for (std::size_t j = 0; j < n; ++j)
                        simplex[i][j] = 0.5 * (simplex[i][j] + simplex[0][j]);
                    fv[i] = obj(simplex[i]);
                }
            }
        }
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i <= n; ++i)
        if (fv[i] > fv[best]) best = i;
    return simplex[best];
}

}  // namespace detail

/// Donsker-Varadhan lower bound on I_Lambda(mu | nu):
///   sup_theta  mu[F_theta] - log nu[exp(F_theta)],
/// with F_theta = sum_j theta_j phi_j over the given features and
/// |theta_j| <= 10, maximized by Nelder-Mead (500 iterations, 3 restarts;
/// `warm_start` seeds one restart so nested families give nested bounds).
inline DvResult dv_entropy_lower_bound(const std::vector<PointConfiguration>& samples_mu,
                                       const std::vector<PointConfiguration>& samples_nu,
                                       const std::vector<DvFeature>& features, std::uint64_t seed,
                                       const std::vector<double>* warm_start = nullptr,
                                       int bootstrap_rounds = 200) {
    if (samples_mu.size() < 500 || samples_nu.size() < 500)
        throw std::invalid_argument("dv_entropy: need >= 500 samples on both sides");
    const std::size_t J = features.size();
    if (J == 0 || J > 8) throw std::invalid_argument("dv_entropy: 1..8 features");
    std::vector<std::vector<double>> phi_mu(samples_mu.size(), std::vector<double>(J));
    std::vector<std::vector<double>> phi_nu(samples_nu.size(), std::vector<double>(J));
    for (std::size_t i = 0; i < samples_mu.size(); ++i)
        for (std::size_t j = 0; j < J; ++j) phi_mu[i][j] = features[j].value(samples_mu[i]);
    for (std::size_t i = 0; i < samples_nu.size(); ++i)
        for (std::size_t j = 0; j < J; ++j) phi_nu[i][j] = features[j].value(samples_nu[i]);

    auto objective = [&](const std::vector<double>& theta) {
        double mu_term = 0.0;
        std::vector<double> fnu(phi_nu.size());
        for (std::size_t i = 0; i < phi_mu.size(); ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < J; ++j) s += theta[j] * phi_mu[i][j];
            mu_term += s;
        }
        mu_term /= static_cast<double>(phi_mu.size());
        for (std::size_t i = 0; i < phi_nu.size(); ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < J; ++j) s += theta[j] * phi_nu[i][j];
            fnu[i] = s;
        }
        return mu_term - detail::logmeanexp(fnu);
    };

    DvResult out;
    Rng rng(rng::hash({seed, 0xD5ull}));
    std::vector<std::vector<double>> starts;
    starts.push_back(std::vector<double>(J, 0.0));
    if (warm_start && warm_start->size() <= J) {
        std::vector<double> w(J, 0.0);
        for (std::size_t j = 0; j < warm_start->size(); ++j) w[j] = (*warm_start)[j];
        starts.push_back(w);
    }
    std::vector<double> rnd(J);
    for (std::size_t j = 0; j < J; ++j) rnd[j] = rng.uniform(-1.0, 1.0);
    starts.push_back(rnd);

    double best_val = -std::numeric_limits<double>::infinity();
    std::vector<double> best_theta(J, 0.0);
    for (const auto& s0 : starts) {
        std::vector<double> trace;
        std::vector<double> th = detail::nelder_mead(objective, s0, 10.0, 500, &trace);
        double v = objective(th);
        out.trace.insert(out.trace.end(), trace.begin(), trace.end());
        if (v > best_val) {
            best_val = v;
            best_theta = th;
        }
    }
    if (!std::isfinite(best_val)) {
        out.converged = false;
        best_val = objective(std::vector<double>(J, 0.0));
        best_theta.assign(J, 0.0);
    }
    out.theta = best_theta;
    out.bound.estimate = best_val;
    out.bound.n = static_cast<long>(samples_mu.size());

    // bootstrap the bound at fixed theta*
    std::vector<double> boots;
    boots.reserve(bootstrap_rounds);
    std::vector<double> fm(phi_mu.size()), fn(phi_nu.size());
    for (std::size_t i = 0; i < phi_mu.size(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < J; ++j) s += best_theta[j] * phi_mu[i][j];
        fm[i] = s;
    }
    for (std::size_t i = 0; i < phi_nu.size(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < J; ++j) s += best_theta[j] * phi_nu[i][j];
        fn[i] = s;
    }
    for (int b = 0; b < bootstrap_rounds; ++b) {
        double m = 0.0;
        std::vector<double> re(fn.size());
        for (std::size_t i = 0; i < fm.size(); ++i) m += fm[rng.below(fm.size())];
        m /= static_cast<double>(fm.size());
        for (std::size_t i = 0; i < fn.size(); ++i) re[i] = fn[rng.below(fn.size())];
        boots.push_back(m - detail::logmeanexp(re));
    }
    EstimateWithCI bse = detail::mean_and_se(boots);
    out.bound.se = bse.se * std::sqrt(static_cast<double>(boots.size()));
    return out;
}

// ---------------------------------------------------------------------------
// Monte Carlo Fisher information
// ---------------------------------------------------------------------------

/// Closed-form add-one cost of log(d mu / d nu), supplied by the caller.
using DensityModel = std::function<double(const Vec&, const PointConfiguration&)>;

/// D_x log(d Poisson(lambda) / d nu) = log(lambda) + h(x, eta).
inline DensityModel poisson_density_model(double lambda, const ModelParams& params) {
    return [lambda, params](const Vec& x, const PointConfiguration& eta) {
        double h = params.rate_mode == RateMode::unit ? 0.0 : conditional_energy(x, eta, params);
        return std::log(lambda) + h;
    };
}

struct FisherIntegration {
    // quadrature over a window (per-volume result) or a fixed site list (raw sum)
    bool use_sites = false;
    Region window = Region::whole();
    double spacing = 0.0;       // <= R/8 when 0
    std::vector<Vec> sites;
};

/// J_Lambda(mu | nu) via the GNZ-transformed integrand
///   E_mu[ b(x, eta) (e^{g(x,eta)} - 1) g(x,eta) ],  g = D_x log(dmu/dnu),
/// which is nonnegative pointwise.  Window mode divides by |window|.
inline EstimateWithCI fisher_mc(const std::vector<PointConfiguration>& samples,
                                const DensityModel& g_fn, const FisherIntegration& how,
                                const ModelParams& params) {
    std::vector<Vec> nodes;
    double w = 1.0;
    double norm = 1.0;
    if (how.use_sites) {
        nodes = how.sites;
    } else {
        Region reg = how.window;
        if (reg.kind == Region::Kind::whole) {
            const DomainSpec& dom = params.domain;
            reg = dom.d == 1 ? Region::box1(dom.lo[0], dom.hi[0])
                             : Region::box2(dom.lo[0], dom.hi[0], dom.lo[1], dom.hi[1]);
        }
        double spacing = how.spacing > 0.0 ? how.spacing : params.R / 8.0;
        detail::quad_nodes(reg, params.domain.d, spacing, nodes, w);
        norm = reg.volume(params.domain);
    }
    std::vector<double> vals;
    vals.reserve(samples.size());
    for (const PointConfiguration& eta : samples) {
        double s = 0.0;
        for (const Vec& x : nodes) {
            if (how.use_sites && !eta.neighbors(x, geom::kEps).empty()) continue;  // occupied site
            double g = g_fn(x, eta);
            double b = birth_rate(x, eta, params);
            s += b * (std::exp(g) - 1.0) * g;
        }
        vals.push_back(s * w / norm);
    }
    return detail::mean_and_se(vals);
}

}  // namespace areabd
