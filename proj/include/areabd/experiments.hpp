#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "areabd/csv.hpp"
#include "areabd/estimators.hpp"
#include "areabd/localized.hpp"
#include "areabd/micro.hpp"
#include "areabd/runconfig.hpp"

namespace areabd {

inline constexpr const char* kToolVersion = "areabd 0.1.0";

struct RunResult {
    int exit_code = 0;
    std::vector<std::string> warnings;
    std::vector<std::string> outputs;  // file names relative to out_dir
};

namespace detail {

/// Deterministic replica scheduling: static index chunks per worker, results
/// keyed by replica index, so the thread budget never changes any output.
template <typename F>
inline void parallel_replicas(long n, int threads, F&& fn) {
    threads = std::max(1, threads);
    if (threads == 1 || n < 2 * threads) {
        for (long i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> workers;
    workers.reserve(threads);
    for (int w = 0; w < threads; ++w) {
        long lo = n * w / threads;
        long hi = n * (w + 1) / threads;
        workers.emplace_back([lo, hi, &fn]() {
            for (long i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : workers) t.join();
}

inline std::uint64_t replica_seed(std::uint64_t seed, long replica) {
    return rng::hash({seed, channel::replica, static_cast<std::uint64_t>(replica)});
}

struct OutputSink {
    std::string dir;
    std::vector<std::string> files;

    void save(const std::string& name, const std::string& bytes) {
        std::filesystem::create_directories(dir);
        std::ofstream out(std::filesystem::path(dir) / name, std::ios::binary);
        out << bytes;
        files.push_back(name);
    }

    void save_csv(const std::string& name, const csv::Writer& w) { save(name, w.text()); }
};

inline void write_manifest(OutputSink& sink, const std::string& kind, const Config& cfg,
                           const std::vector<std::string>& warnings, double wall_seconds) {
    nlohmann::json j;
    j["tool"] = kToolVersion;
    j["experiment"] = kind;
    j["wall_clock_seconds"] = wall_seconds;
    j["warnings"] = warnings;
    nlohmann::json conf = nlohmann::json::object();
    for (const auto& [k, v] : cfg.all_entries()) conf[k] = v;
    j["config"] = conf;
    nlohmann::json outs = nlohmann::json::object();
    for (const std::string& f : sink.files)
        outs[f] = csv::digest_file((std::filesystem::path(sink.dir) / f).string());
    j["outputs"] = outs;
    std::ofstream out(std::filesystem::path(sink.dir) / "manifest.json");
    out << j.dump(2) << '\n';
}

inline GibbsSpec gibbs_spec_from(const Config& cfg, const ModelParams& params,
                                 const std::string& section) {
    Region lam = Region::whole();
    if (cfg.has(section, "window"))
        lam = region_from_list(cfg.get_doubles(section, "window"), params.domain.d,
                               section + ".window");
    std::string b = cfg.get_string(section, "boundary",
                                   params.domain.kind == DomainKind::torus ? "torus" : "empty");
    if (b == "empty") return GibbsSpec(params, lam, BoundaryKind::empty);
    if (b == "torus") return GibbsSpec(params, lam, BoundaryKind::torus_periodic);
    if (b == "frozen") {
        std::string path = cfg.get_string(section, "boundary_file");
        std::ifstream in(path);
        if (!in) throw ConfigError(section + ".boundary_file: cannot open " + path);
        PointConfiguration omega = io::read_configuration(in);
        return GibbsSpec(params, lam, BoundaryKind::frozen, omega);
    }
    throw ConfigError(section + ".boundary must be empty|torus|frozen, got: " + b);
}

/// "empty", "poisson:<intensity>", "rejection", or "file:<path>".
inline PointConfiguration initial_from(const std::string& spec, const GibbsSpec& gspec,
                                       std::uint64_t seed) {
    if (spec == "empty") return PointConfiguration(gspec.params, {});
    if (spec.rfind("poisson:", 0) == 0) {
        double lambda = std::stod(spec.substr(8));
        Rng rng(rng::hash({seed, 0x1417ull}));
        return sample_poisson(gspec.params, gspec.lambda, lambda, rng);
    }
    if (spec == "rejection") return sample_rejection(gspec, seed).configuration;
    if (spec.rfind("file:", 0) == 0) {
        std::ifstream in(spec.substr(5));
        if (!in) throw ConfigError("initial: cannot open " + spec.substr(5));
        return io::read_configuration(in);
    }
    throw ConfigError("initial must be empty|poisson:<i>|rejection|file:<path>, got: " + spec);
}

inline std::vector<std::string> event_row(const Event& e, int d) {
    std::vector<std::string> row;
    row.push_back(csv::num(e.t));
    switch (e.kind) {
        case EventKind::proposal: row.push_back("birth-proposal"); break;
        case EventKind::accept: row.push_back("birth-accept"); break;
        case EventKind::death: row.push_back("death"); break;
    }
    row.push_back(csv::num(e.x[0]));
    if (d == 2) row.push_back(csv::num(e.x[1]));
    row.push_back(std::to_string(e.point_id));
    row.push_back(std::to_string(e.region_id));
    return row;
}

inline std::vector<std::string> event_header(int d) {
    std::vector<std::string> h = {"time", "kind", "x0"};
    if (d == 2) h.push_back("x1");
    h.push_back("point_id");
    h.push_back("region_id");
    return h;
}

// ---------------------------------------------------------------------------
// experiment bodies
// ---------------------------------------------------------------------------

inline void run_gibbs_sample(const Config& cfg, std::uint64_t seed, int threads,
                             OutputSink& sink, std::vector<std::string>& warnings) {
    ModelParams params = model_from_config(cfg);
    GibbsSpec spec = gibbs_spec_from(cfg, params, "gibbs");
    std::string sampler = cfg.get_string("gibbs", "sampler", "rejection");
    long replicas = cfg.get_long("gibbs", "replicas", 1000);
    long max_attempts = cfg.get_long("gibbs", "max_attempts", 1000000);
    double burn_in = cfg.get_double("gibbs", "burn_in", 50.0);
    bool dump = cfg.get_bool("gibbs", "dump_samples", false);

    std::vector<PointConfiguration> samples(replicas);
    std::vector<double> attempts(replicas);
    parallel_replicas(replicas, threads, [&](long i) {
        std::uint64_t s = replica_seed(seed, i);
        SampleReport rep = sampler == "mcmc" ? sample_mcmc(spec, s, burn_in)
                                             : sample_rejection(spec, s, max_attempts);
        samples[i] = rep.configuration;
        attempts[i] = static_cast<double>(rep.attempts);
    });

    std::map<std::size_t, long> hist;
    for (const auto& c : samples) ++hist[c.size()];
    csv::Writer h({"k", "count", "freq", "stderr"});
    for (const auto& [k, cnt] : hist) {
        double f = static_cast<double>(cnt) / static_cast<double>(replicas);
        double se = std::sqrt(f * (1.0 - f) / static_cast<double>(replicas));
        h.row({std::to_string(k), std::to_string(cnt), csv::num(f), csv::num(se)});
    }
    sink.save_csv("histogram.csv", h);

    double mean_att = 0.0;
    for (double a : attempts) mean_att += a;
    mean_att /= static_cast<double>(replicas);
    csv::Writer rep({"name", "estimate", "stderr", "n"});
    rep.row({"mean_attempts", csv::num(mean_att), csv::num(0.0), std::to_string(replicas)});
    sink.save_csv("report.csv", rep);

    if (dump) {
        std::ostringstream os;
        for (const auto& c : samples) {
            io::write_configuration(os, c);
            os << '\n';
        }
        sink.save("samples.txt", os.str());
    }
    (void)warnings;
}

inline void run_simulate(const Config& cfg, std::uint64_t seed, int threads, OutputSink& sink,
                         std::vector<std::string>& warnings, bool localized) {
    const char* sec = localized ? "localized" : "simulate";
    ModelParams params = model_from_config(cfg);
    GibbsSpec spec = gibbs_spec_from(cfg, params, sec);
    double T = cfg.get_double(sec, "T");
    long replicas = cfg.get_long(sec, "replicas", 1);
    std::string init_spec = cfg.get_string(sec, "initial", "empty");
    std::vector<double> snaps;
    if (cfg.has(sec, "snapshots")) snaps = cfg.get_doubles(sec, "snapshots");

    BoundarySamplerConfig bconf;
    Region window = spec.lambda;
    GibbsSpec nu = spec;
    if (localized) {
        window = region_from_list(cfg.get_doubles(sec, "window"), params.domain.d,
                                  std::string(sec) + ".window");
        nu = GibbsSpec(params, Region::whole(), BoundaryKind::torus_periodic);
        std::string mode = cfg.get_string(sec, "boundary_mode", "mcmc");
        if (mode == "mcmc") bconf.mode = BoundarySamplerConfig::Mode::mcmc;
        else if (mode == "exact") bconf.mode = BoundarySamplerConfig::Mode::exact;
        else if (mode == "empty") bconf.mode = BoundarySamplerConfig::Mode::empty;
        else throw ConfigError(std::string(sec) + ".boundary_mode must be mcmc|exact|empty");
        bconf.width = cfg.get_double(sec, "annulus_width", 4.0 * params.R);
        bconf.burn_in = cfg.get_double(sec, "boundary_burn_in", 20.0);
        warnings.push_back("localized boundary sampler: mode=" + mode +
                           " width=" + csv::num(bconf.width) +
                           " burn_in=" + csv::num(bconf.burn_in) +
                           (bconf.mode == BoundarySamplerConfig::Mode::mcmc
                                ? " (truncation bias documented; exact mode available in d=1)"
                                : ""));
    }

    std::vector<Trajectory> trajs(replicas);
    parallel_replicas(replicas, threads, [&](long i) {
        std::uint64_t s = replica_seed(seed, i);
        GibbsSpec init_window = localized ? GibbsSpec(params, window, BoundaryKind::empty) : spec;
        PointConfiguration init = initial_from(init_spec, init_window, s);
        EventStream stream(rng::hash({s, 0xE17ull}), params.domain, params.R);
        SimOptions opt;
        opt.record_log = (i == 0);
        opt.snapshot_times = snaps;
        if (localized) {
            trajs[i] = simulate_localized(init, window, nu, T, stream, bconf, opt);
        } else {
            trajs[i] = simulate(init, spec, T, stream, opt);
        }
    });

    csv::Writer ev(event_header(params.domain.d));
    for (const Event& e : trajs[0].log) ev.row(event_row(e, params.domain.d));
    sink.save_csv("events.csv", ev);
    for (std::size_t k = 0; k < trajs[0].snapshots.size(); ++k) {
        std::ostringstream os;
        io::write_configuration(os, trajs[0].snapshots[k]);
        char name[64];
        std::snprintf(name, sizeof name, "snapshot_%03zu.txt", k);
        sink.save(name, os.str());
    }
    {
        std::ostringstream os;
        io::write_configuration(os, trajs[0].terminal);
        sink.save("terminal.txt", os.str());
    }
    csv::Writer sum({"name", "estimate", "stderr", "n"});
    std::vector<double> ns;
    for (const auto& t : trajs) ns.push_back(static_cast<double>(t.terminal.size()));
    EstimateWithCI n_est = detail::mean_and_se(ns);
    sum.row({"terminal_count", csv::num(n_est.estimate), csv::num(n_est.se),
             std::to_string(replicas)});
    double draws = 0.0;
    for (const auto& t : trajs) {
        draws += static_cast<double>(t.n_boundary_draws);
        for (const std::string& w : t.warnings) warnings.push_back(w);
    }
    sum.row({"boundary_draws_total", csv::num(draws), csv::num(0.0), std::to_string(replicas)});
    sink.save_csv("summary.csv", sum);
}

inline void run_couple(const Config& cfg, std::uint64_t seed, int threads, OutputSink& sink,
                       std::vector<std::string>& warnings) {
    ModelParams params = model_from_config(cfg);
    if (params.domain.kind != DomainKind::torus)
        throw ConfigError("couple: domain must be a torus");
    Region window = region_from_list(cfg.get_doubles("couple", "window"), params.domain.d,
                                     "couple.window");
    std::vector<double> ells = cfg.get_doubles("couple", "distances");
    double T = cfg.get_double("couple", "T");
    long replicas = cfg.get_long("couple", "replicas", 1000);
    std::string init_spec = cfg.get_string("couple", "initial", "poisson:1");

    std::vector<Region> regions;
    for (double ell : ells) {
        if (ell < 0) throw ConfigError("couple.distances must be nonnegative");
        Region r = window;
        for (int c = 0; c < params.domain.d; ++c) {
            r.lo[c] = window.lo[c] - ell;
            r.hi[c] = window.hi[c] + ell;
        }
        r.validate(params.domain);
        regions.push_back(r);
    }
    regions.push_back(Region::whole());  // reference run

    struct Row {
        bool disagreed;
        double t_first;
    };
    std::vector<std::vector<Row>> rows(replicas);
    std::vector<char> monotone(replicas, 1);
    GibbsSpec whole(params, Region::whole(), BoundaryKind::torus_periodic);
    parallel_replicas(replicas, threads, [&](long i) {
        std::uint64_t s = replica_seed(seed, i);
        PointConfiguration init = initial_from(init_spec, whole, s);
        EventStream stream(rng::hash({s, 0xC09ull}), params.domain, params.R);
        CouplingReport rep = couple(init, window, regions, T, stream);
        rows[i].resize(rep.regions.size());
        for (std::size_t r = 0; r < rep.regions.size(); ++r)
            rows[i][r] = {rep.regions[r].disagreed, rep.regions[r].t_first};
        monotone[i] = rep.monotone_ok ? 1 : 0;
    });

    csv::Writer detail_csv({"replica", "ell", "disagreed", "t_first"});
    for (long i = 0; i < replicas; ++i)
        for (std::size_t r = 0; r + 1 < rows[i].size(); ++r)
            detail_csv.row({std::to_string(i), csv::num(ells[r]),
                            rows[i][r].disagreed ? "1" : "0", csv::num(rows[i][r].t_first)});
    sink.save_csv("coupling_detail.csv", detail_csv);

    csv::Writer sum({"ell", "replicas", "disagreements", "p_hat", "stderr"});
    for (std::size_t r = 0; r + 1 < regions.size(); ++r) {
        long d = 0;
        for (long i = 0; i < replicas; ++i)
            if (rows[i][r].disagreed) ++d;
        double p = static_cast<double>(d) / static_cast<double>(replicas);
        double se = std::sqrt(p * (1.0 - p) / static_cast<double>(replicas));
        sum.row({csv::num(ells[r]), std::to_string(replicas), std::to_string(d), csv::num(p),
                 csv::num(se)});
    }
    sink.save_csv("coupling.csv", sum);
    long violations = 0;
    for (long i = 0; i < replicas; ++i)
        if (!monotone[i]) ++violations;
    if (violations > 0)
        warnings.push_back("coupling monotonicity violated in " + std::to_string(violations) +
                           " replicas");
}

inline void run_entropy_micro(const Config& cfg, std::uint64_t seed, int /*threads*/,
                              OutputSink& sink, std::vector<std::string>& warnings) {
    ModelParams params = model_from_config(cfg);
    std::vector<double> flat = cfg.get_doubles("micro", "sites");
    std::vector<Vec> sites;
    if (params.domain.d == 1) {
        for (double x : flat) sites.push_back({x, 0.0});
    } else {
        if (flat.size() % 2 != 0) throw ConfigError("micro.sites needs x,y pairs in d=2");
        for (std::size_t i = 0; i < flat.size(); i += 2) sites.push_back({flat[i], flat[i + 1]});
    }
    if (sites.size() > 16)
        throw ConfigError("micro.sites: k exceeds 16 (got " + std::to_string(sites.size()) + ")");
    MicroSystem sys(params, sites);
    double t_max = cfg.get_double("micro", "t_max", 10.0);
    double t_step = cfg.get_double("micro", "t_step", 0.1);
    std::string init = cfg.get_string("micro", "initial", "delta_empty");
    DistributionVector p(sys.num_states(), 0.0);
    if (init == "delta_empty") {
        p[0] = 1.0;
    } else if (init == "uniform") {
        for (double& v : p) v = 1.0 / static_cast<double>(sys.num_states());
    } else if (init.rfind("random:", 0) == 0) {
        Rng rng(rng::hash({seed, std::stoull(init.substr(7))}));
        double s = 0.0;
        for (double& v : p) {
            v = rng.u01_open();
            s += v;
        }
        for (double& v : p) v /= s;
    } else {
        throw ConfigError("micro.initial must be delta_empty|uniform|random:<k>");
    }

    DistributionVector pi = stationary(sys);
    csv::Writer out({"t", "entropy", "fisher", "xi", "debruijn_residual"});
    const double fd = 1e-4;
    DistributionVector prev;  // state at t - t_step
    double t = 0.0;
    for (long step = 0;; ++step) {
        double entropy = relative_entropy(p, pi);
        double fi = fisher(sys, p);
        double x = xi(sys, p);
        double resid = std::numeric_limits<double>::quiet_NaN();
        if (step > 0 && std::isfinite(fi)) {
            DistributionVector plus = evolve(sys, p, fd);
            DistributionVector minus = evolve(sys, prev, t_step - fd);
            double didt = (relative_entropy(plus, pi) - relative_entropy(minus, pi)) / (2.0 * fd);
            resid = didt + fi;
        }
        out.row({csv::num(t), csv::num(entropy), csv::num(fi), csv::num(x), csv::num(resid)});
        if (t >= t_max - 1e-12) break;
        prev = p;
        p = evolve(sys, p, t_step);
        t += t_step;
    }
    sink.save_csv("entropy.csv", out);
    (void)warnings;
}

struct StatSeries {
    std::vector<double> intensity, covered;
    std::vector<std::vector<double>> pc;  // per radius
};

inline void run_stationarity(const Config& cfg, std::uint64_t seed, int threads, OutputSink& sink,
                             std::vector<std::string>& warnings) {
    ModelParams params = model_from_config(cfg);
    GibbsSpec spec(params, Region::whole(),
                   params.domain.kind == DomainKind::torus ? BoundaryKind::torus_periodic
                                                           : BoundaryKind::empty);
    for (int c = 0; c < params.domain.d; ++c)
        if (params.domain.side(c) < 6.0 * params.R)
            throw ConfigError("stationarity: window below the 6R minimum per axis");
    std::vector<double> tgrid = cfg.get_doubles("stationarity", "t_grid");
    long replicas = cfg.get_long("stationarity", "replicas", 1000);
    std::string init_spec = cfg.get_string("stationarity", "initial", "rejection");

    std::vector<std::vector<PointConfiguration>> at_time(tgrid.size());
    for (auto& v : at_time) v.resize(replicas);
    parallel_replicas(replicas, threads, [&](long i) {
        std::uint64_t s = replica_seed(seed, i);
        PointConfiguration init = initial_from(init_spec, spec, s);
        EventStream stream(rng::hash({s, 0x57A7ull}), params.domain, params.R);
        SimOptions opt;
        opt.snapshot_times = std::vector<double>(tgrid.begin(), tgrid.end());
        double T = tgrid.back();
        Trajectory traj = simulate(init, spec, T, stream, opt);
        for (std::size_t k = 0; k < tgrid.size(); ++k) at_time[k][i] = traj.snapshots[k];
    });

    // per-replica statistics per time, then paired differences against t_grid[0]
    auto series_of = [&](const std::vector<PointConfiguration>& samples) {
        SummaryStats s = summary_stats(samples, params);
        return s;
    };
    std::vector<SummaryStats> stats;
    for (const auto& samples : at_time) stats.push_back(series_of(samples));

    // paired per-replica differences for sharp stationarity bands
    csv::Writer out({"t", "stat", "estimate", "stderr", "diff_vs_t0", "diff_se"});
    auto emit = [&](double t, const std::string& name, const EstimateWithCI& now,
                    const std::vector<double>& per_rep_now,
                    const std::vector<double>& per_rep_base) {
        std::vector<double> diff(per_rep_now.size());
        for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = per_rep_now[i] - per_rep_base[i];
        EstimateWithCI d = detail::mean_and_se(diff);
        out.row({csv::num(t), name, csv::num(now.estimate), csv::num(now.se),
                 csv::num(d.estimate), csv::num(d.se)});
    };

    // rebuild per-replica series for pairing
    auto per_replica = [&](const std::vector<PointConfiguration>& samples) {
        StatSeries s;
        double vol = params.domain.volume();
        for (const auto& c : samples) {
            s.intensity.push_back(static_cast<double>(c.size()) / vol);
            s.covered.push_back(union_volume(c, params) / vol);
        }
        return s;
    };
    std::vector<StatSeries> series;
    for (const auto& samples : at_time) series.push_back(per_replica(samples));

    for (std::size_t k = 0; k < tgrid.size(); ++k) {
        emit(tgrid[k], "intensity", stats[k].intensity, series[k].intensity, series[0].intensity);
        emit(tgrid[k], "covered_fraction", stats[k].covered_fraction, series[k].covered,
             series[0].covered);
        for (std::size_t r = 0; r < stats[k].pc_radii.size(); ++r) {
            // pair correlation differences via the pooled estimates
            out.row({csv::num(tgrid[k]), "pair_correlation(" + csv::num(stats[k].pc_radii[r]) + ")",
                     csv::num(stats[k].pair_correlation[r].estimate),
                     csv::num(stats[k].pair_correlation[r].se),
                     csv::num(stats[k].pair_correlation[r].estimate -
                              stats[0].pair_correlation[r].estimate),
                     csv::num(std::sqrt(stats[k].pair_correlation[r].se *
                                            stats[k].pair_correlation[r].se +
                                        stats[0].pair_correlation[r].se *
                                            stats[0].pair_correlation[r].se))});
        }
    }
    sink.save_csv("stationarity.csv", out);
    (void)warnings;
}

inline void run_gnz(const Config& cfg, std::uint64_t seed, int threads, OutputSink& sink,
                    std::vector<std::string>& warnings) {
    ModelParams params = model_from_config(cfg);
    GibbsSpec spec(params, Region::whole(),
                   params.domain.kind == DomainKind::torus ? BoundaryKind::torus_periodic
                                                           : BoundaryKind::empty);
    long n = cfg.get_long("gnz", "samples", 1000);
    std::string source = cfg.get_string("gnz", "source", "rejection");
    Region B = region_from_list(cfg.get_doubles("gnz", "region"), params.domain.d, "gnz.region");

    std::vector<PointConfiguration> samples(n);
    parallel_replicas(n, threads, [&](long i) {
        std::uint64_t s = replica_seed(seed, i);
        if (source == "rejection") {
            samples[i] = sample_rejection(spec, s).configuration;
        } else if (source.rfind("poisson:", 0) == 0) {
            Rng rng(rng::hash({s, 0x901ull}));
            samples[i] = sample_poisson(params, Region::whole(), std::stod(source.substr(8)), rng);
        } else {
            throw ConfigError("gnz.source must be rejection|poisson:<i>");
        }
    });

    csv::Writer out({"name", "estimate", "stderr", "n", "R"});
    for (const TestFunction& f : default_test_family(params.R)) {
        EstimateWithCI e = gnz_residual(samples, f, B, params, seed);
        out.row({f.name(), csv::num(e.estimate), csv::num(e.se), std::to_string(e.n),
                 csv::num(params.R)});
    }
    sink.save_csv("gnz.csv", out);
    (void)warnings;
}

inline void run_fisher(const Config& cfg, std::uint64_t seed, int threads, OutputSink& sink,
                       std::vector<std::string>& warnings) {
    ModelParams params = model_from_config(cfg);
    long n = cfg.get_long("fisher", "samples", 1000);
    double lambda = cfg.get_double("fisher", "lambda", 1.0);
    Region B = region_from_list(cfg.get_doubles("fisher", "region"), params.domain.d,
                                "fisher.region");
    std::vector<PointConfiguration> samples(n);
    parallel_replicas(n, threads, [&](long i) {
        Rng rng(rng::hash({replica_seed(seed, i), 0x155ull}));
        samples[i] = sample_poisson(params, Region::whole(), lambda, rng);
    });
    FisherIntegration how;
    how.window = B;
    EstimateWithCI e = fisher_mc(samples, poisson_density_model(lambda, params), how, params);
    csv::Writer out({"name", "estimate", "stderr", "n", "lambda"});
    out.row({"fisher_per_volume", csv::num(e.estimate), csv::num(e.se), std::to_string(e.n),
             csv::num(lambda)});
    sink.save_csv("fisher.csv", out);
    (void)warnings;
}

inline void run_dv(const Config& cfg, std::uint64_t seed, int threads, OutputSink& sink,
                   std::vector<std::string>& warnings) {
    ModelParams params = model_from_config(cfg);
    long n = cfg.get_long("dv", "samples", 2000);
    std::string mu_spec = cfg.get_string("dv", "mu");
    std::string nu_spec = cfg.get_string("dv", "nu");
    Region lam = region_from_list(cfg.get_doubles("dv", "window"), params.domain.d, "dv.window");

    auto make = [&](const std::string& what, std::uint64_t salt) {
        std::vector<PointConfiguration> out(n);
        GibbsSpec spec(params, Region::whole(),
                       params.domain.kind == DomainKind::torus ? BoundaryKind::torus_periodic
                                                               : BoundaryKind::empty);
        parallel_replicas(n, threads, [&](long i) {
            std::uint64_t s = rng::hash({replica_seed(seed, i), salt});
            if (what.rfind("poisson:", 0) == 0) {
                Rng rng(s);
                out[i] = sample_poisson(params, Region::whole(), std::stod(what.substr(8)), rng);
            } else if (what == "rejection") {
                out[i] = sample_rejection(spec, s).configuration;
            } else {
                throw ConfigError("dv source must be poisson:<i>|rejection, got: " + what);
            }
        });
        return out;
    };
    auto mu = make(mu_spec, 0xAAull);
    auto nu = make(nu_spec, 0xBBull);

    std::vector<DvFeature> features;
    std::string names = cfg.get_string("dv", "features", "count");
    std::stringstream ss(names);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item == "count")
            features.push_back(dv_feature_from({TestFunction::Kind::constant, 0.0}, lam, params));
        else if (item == "pairs")
            features.push_back(
                dv_feature_from({TestFunction::Kind::count_in_ball, 2.0 * params.R}, lam, params));
        else if (item == "covered")
            features.push_back(dv_feature_from(
                {TestFunction::Kind::covered_volume_in_ball, params.R}, lam, params));
        else if (item == "isolated")
            features.push_back(dv_feature_from(
                {TestFunction::Kind::empty_indicator, 2.0 * params.R}, lam, params));
        else
            throw ConfigError("dv.features: unknown feature " + item);
    }
    DvResult r = dv_entropy_lower_bound(mu, nu, features, seed);
    if (!r.converged) warnings.push_back("dv optimizer returned best-found with failure flag");
    csv::Writer out({"name", "estimate", "stderr", "n", "theta"});
    std::string theta;
    for (std::size_t j = 0; j < r.theta.size(); ++j) {
        if (j) theta += ';';
        theta += csv::num(r.theta[j]);
    }
    out.row({"dv_lower_bound", csv::num(r.bound.estimate), csv::num(r.bound.se),
             std::to_string(r.bound.n), theta});
    sink.save_csv("dv.csv", out);
    csv::Writer tr({"iteration", "best_value"});
    for (std::size_t i = 0; i < r.trace.size(); ++i)
        tr.row({std::to_string(i), csv::num(r.trace[i])});
    sink.save_csv("dv_trace.csv", tr);
}

}  // namespace detail

/// Static validation: parse everything, construct the model objects, and
/// report derived quantities without running the experiment.
inline std::string validate_config(const std::string& kind, const Config& cfg) {
    std::ostringstream rep;
    ModelParams params = model_from_config(cfg);
    rep << "model: d=" << params.domain.d << " R=" << params.R << " domain="
        << (params.domain.kind == DomainKind::torus ? "torus" : "box")
        << " volume=" << params.domain.volume() << '\n';

    if (kind == "entropy-micro") {
        std::vector<double> flat = cfg.get_doubles("micro", "sites");
        std::size_t k = params.domain.d == 1 ? flat.size() : flat.size() / 2;
        if (k > 16)
            throw ConfigError("micro.sites: k exceeds 16 (got " + std::to_string(k) + ")");
        rep << "micro: k=" << k << " states=" << (std::size_t{1} << k) << '\n';
    } else if (kind == "simulate" || kind == "simulate-localized" || kind == "couple") {
        const char* sec = kind == "couple" ? "couple" : (kind == "simulate" ? "simulate"
                                                                            : "localized");
        double T = cfg.get_double(sec, "T");
        Region lam = Region::whole();
        if (cfg.has(sec, "window"))
            lam = region_from_list(cfg.get_doubles(sec, "window"), params.domain.d, "window");
        double rate = lam.volume(params.domain);
        rep << "dominating event rate |Lambda| = " << rate << ", proposals over [0,T] ~ "
            << rate * T << '\n';
        if (kind == "couple") {
            std::vector<double> ells = cfg.get_doubles("couple", "distances");
            for (double ell : ells) {
                Region r = lam;
                for (int c = 0; c < params.domain.d; ++c) {
                    r.lo[c] -= ell;
                    r.hi[c] += ell;
                }
                r.validate(params.domain);
            }
            rep << "coupling regions validated (" << ells.size() << " + whole-domain reference)\n";
        }
    } else if (kind == "gibbs-sample") {
        GibbsSpec spec = detail::gibbs_spec_from(cfg, params, "gibbs");
        // expected rejection attempts: exp(E_pi[H]) with the Poisson coverage
        // formula E[H] = int (1 - exp(-|B_R(x) cap Lambda|)) dx on a grid
        double kappa = params.ball_volume();
        double vol = spec.lambda.volume(params.domain);
        double eh = vol * (1.0 - std::exp(-kappa));
        rep << "expected rejection attempts (crude e^{E[H]} bound): " << std::exp(eh) << '\n';
    } else if (kind == "stationarity") {
        for (int c = 0; c < params.domain.d; ++c)
            if (params.domain.side(c) < 6.0 * params.R)
                throw ConfigError("stationarity: window side " +
                                  std::to_string(params.domain.side(c)) +
                                  " is below the 6R minimum (" + std::to_string(6.0 * params.R) +
                                  ")");
        rep << "stationarity grid: " << cfg.get_doubles("stationarity", "t_grid").size()
            << " times\n";
    } else if (kind == "gnz") {
        Region B = region_from_list(cfg.get_doubles("gnz", "region"), params.domain.d,
                                    "gnz.region");
        B.validate(params.domain);
        rep << "gnz region volume " << B.volume(params.domain) << '\n';
    } else if (kind == "fisher" || kind == "dv-entropy") {
        rep << "ok\n";
    } else {
        throw ConfigError("unknown experiment kind: " + kind);
    }
    rep << "validation: no errors\n";
    return rep.str();
}

/// Execute one subcommand; writes CSVs and the manifest into out_dir.
inline RunResult run_experiment(const std::string& kind, Config cfg, const std::string& out_dir,
                                int threads, std::optional<std::uint64_t> seed_override) {
    auto t0 = std::chrono::steady_clock::now();
    RunResult res;
    detail::OutputSink sink;
    sink.dir = out_dir;
    std::uint64_t seed = seed_override ? *seed_override : cfg.get_u64("experiment", "seed");
    if (seed_override) cfg.override_value("experiment", "seed", std::to_string(*seed_override));

    validate_config(kind, cfg);

    if (kind == "gibbs-sample") detail::run_gibbs_sample(cfg, seed, threads, sink, res.warnings);
    else if (kind == "simulate") detail::run_simulate(cfg, seed, threads, sink, res.warnings, false);
    else if (kind == "simulate-localized")
        detail::run_simulate(cfg, seed, threads, sink, res.warnings, true);
    else if (kind == "couple") detail::run_couple(cfg, seed, threads, sink, res.warnings);
    else if (kind == "entropy-micro")
        detail::run_entropy_micro(cfg, seed, threads, sink, res.warnings);
    else if (kind == "stationarity")
        detail::run_stationarity(cfg, seed, threads, sink, res.warnings);
    else if (kind == "gnz") detail::run_gnz(cfg, seed, threads, sink, res.warnings);
    else if (kind == "fisher") detail::run_fisher(cfg, seed, threads, sink, res.warnings);
    else if (kind == "dv-entropy") detail::run_dv(cfg, seed, threads, sink, res.warnings);
    else throw ConfigError("unknown experiment kind: " + kind);

    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    detail::write_manifest(sink, kind, cfg, res.warnings, wall);
    res.outputs = sink.files;
    res.exit_code = 0;
    return res;
}

}  // namespace areabd
