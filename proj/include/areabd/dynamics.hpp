#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <queue>
#include <string>
#include <vector>

#include "areabd/event_stream.hpp"
#include "areabd/measure.hpp"

namespace areabd {

enum class EventKind { proposal, accept, death };

struct Event {
    double t;
    EventKind kind;
    Vec x;
    std::int64_t point_id;
    int region_id;
};

struct Trajectory {
    std::vector<double> snapshot_times;
    std::vector<PointConfiguration> snapshots;
    std::vector<Event> log;
    PointConfiguration terminal;
    std::uint64_t n_proposals = 0;
    std::uint64_t n_accepts = 0;
    std::uint64_t n_deaths = 0;
    std::uint64_t n_boundary_draws = 0;
    std::vector<std::string> warnings;
};

struct SimOptions {
    bool record_log = false;
    std::vector<double> snapshot_times;        // strictly increasing, within [0, T]
    std::vector<std::int64_t> initial_ids;     // stable lifetime keys; default 0..n-1
    int region_id = 0;
};

/// Boundary handling for the localized dynamics.
struct BoundarySamplerConfig {
    enum class Mode {
        mcmc,          // birth-death run on a truncation annulus of width `width`
        exact,         // rejection sampling of the full conditional complement
        empty          // no boundary points at all (reduces to plain dynamics)
    };
    Mode mode = Mode::mcmc;
    double width = -1.0;          // annulus width; < 0 means 4R
    double burn_in = 20.0;        // mcmc burn-in time
    long max_attempts = 200000;   // exact-mode rejection budget
};

namespace detail {

struct QueueEntry {
    double t;
    int type;             // 0 proposal, 1 death
    std::int64_t a;       // proposal: cell key; death: point id
    std::uint64_t b;      // proposal: counter
    bool operator>(const QueueEntry& o) const {
        if (t != o.t) return t > o.t;
        if (type != o.type) return type > o.type;
        if (a != o.a) return a > o.a;
        return b > o.b;
    }
};

/// Mutable simulation state: positions with stable slots, a grid over the
/// alive points, and an optional frozen boundary.
class EngineState {
public:
    EngineState(const ModelParams& params, const PointConfiguration* frozen)
        : params_(params), grid_(params.domain, params.R), frozen_(frozen) {}

    int add_point(const Vec& x) {
        int id = static_cast<int>(pos_.size());
        pos_.push_back(x);
        alive_.push_back(1);
        grid_.insert(id, x);
        ++count_;
        return id;
    }

    void kill(int id) {
        if (!alive_[id]) return;
        alive_[id] = 0;
        grid_.erase(id, pos_[id]);
        --count_;
    }

    /// Neighbors of x within 2R among alive points and the frozen boundary,
    /// in chart coordinates around x.
    std::vector<Vec> neighbors_chart(const Vec& x) const {
        std::vector<Vec> out;
        const DomainSpec& dom = params_.domain;
        double reach2 = 4.0 * params_.R * params_.R;
        grid_.for_candidates(x, [&](int id) {
            if (dom.distance2(x, pos_[id]) <= reach2)
                out.push_back(areabd::detail::chart(dom, x, pos_[id]));
        });
        if (frozen_) {
            for (int id : frozen_->neighbors(x, 2.0 * params_.R))
                out.push_back(areabd::detail::chart(dom, x, (*frozen_)[id]));
        }
        return out;
    }

    double birth_rate(const Vec& x) const {
        if (params_.rate_mode == RateMode::unit) return 1.0;
        std::vector<Vec> near = neighbors_chart(x);
        double h = areabd::detail::added_volume_planar(params_.domain.d, x, params_.R, near,
                                                       params_.R);
        return std::exp(-h);
    }

    /// Rate given extra boundary points (chart coordinates around x).
    double birth_rate_with(const Vec& x, std::vector<Vec> extra) const {
        if (params_.rate_mode == RateMode::unit) return 1.0;
        std::vector<Vec> near = neighbors_chart(x);
        near.insert(near.end(), extra.begin(), extra.end());
        double h = areabd::detail::added_volume_planar(params_.domain.d, x, params_.R, near,
                                                       params_.R);
        return std::exp(-h);
    }

    std::vector<Vec> alive_points() const {
        std::vector<Vec> out;
        out.reserve(count_);
        for (std::size_t i = 0; i < pos_.size(); ++i)
            if (alive_[i]) out.push_back(pos_[i]);
        return out;
    }

    const Vec& position(int id) const { return pos_[id]; }
    std::size_t alive_count() const { return count_; }
    const ModelParams& params() const { return params_; }

private:
    ModelParams params_;
    std::vector<Vec> pos_;
    std::vector<char> alive_;
    SpatialGrid grid_;
    const PointConfiguration* frozen_;
    std::size_t count_ = 0;
};

/// Acceptance-probability strategy: by default the plain rate; the
/// localized dynamics swaps in a boundary-averaging version.
using RateFn = std::function<double(const Vec& x, std::int64_t cell, std::uint64_t counter,
                                    const EngineState& state)>;

inline Trajectory run_engine(const PointConfiguration& initial, const ModelParams& params,
                             const Region& region, const PointConfiguration* frozen, double T,
                             const EventStream& stream, const SimOptions& opt,
                             const RateFn& rate_fn, std::uint64_t* boundary_draws = nullptr) {
    if (T < 0.0) throw std::invalid_argument("simulate: T < 0");
    const DomainSpec& dom = params.domain;
    for (const Vec& p : initial.points())
        if (!region.contains(dom, p))
            throw std::invalid_argument("simulate: initial point outside region");

    Trajectory out;
    EngineState state(params, frozen);

    std::priority_queue<QueueEntry, std::vector<QueueEntry>, std::greater<QueueEntry>> pq;

    // initial points, lifetimes keyed by stable index
    const auto& init_pts = initial.points();
    for (std::size_t i = 0; i < init_pts.size(); ++i) {
        int id = state.add_point(init_pts[i]);
        std::uint64_t key = opt.initial_ids.empty() ? static_cast<std::uint64_t>(i)
                                                    : static_cast<std::uint64_t>(opt.initial_ids[i]);
        double life = stream.initial_lifetime(key);
        pq.push({life, 1, id, 0});
    }

    // first proposal of every cell meeting the region
    for (std::int64_t cell : stream.cells_for(region)) {
        EventStream::Mark m = stream.mark(cell, 0);
        pq.push({m.s, 0, cell, 0});
    }

    std::size_t next_snap = 0;
    auto emit_snapshots_until = [&](double t) {
        while (next_snap < opt.snapshot_times.size() && opt.snapshot_times[next_snap] <= t) {
            out.snapshot_times.push_back(opt.snapshot_times[next_snap]);
            out.snapshots.emplace_back(params, state.alive_points());
            ++next_snap;
        }
    };

    while (!pq.empty()) {
        QueueEntry e = pq.top();
        if (e.t > T) break;
        pq.pop();
        emit_snapshots_until(e.t);  // snapshot times are < e.t except exact ties
        if (e.type == 0) {
            std::int64_t cell = e.a;
            std::uint64_t k = e.b;
            EventStream::Mark m = stream.mark(cell, k);
            EventStream::Mark next = stream.mark(cell, k + 1);
            pq.push({e.t + next.s, 0, cell, k + 1});
            Vec x = dom.kind == DomainKind::torus ? dom.wrap(m.x) : m.x;
            if (!region.contains(dom, x) || !dom.contains(x)) continue;
            ++out.n_proposals;
            if (opt.record_log)
                out.log.push_back({e.t, EventKind::proposal, x, -1, opt.region_id});
            double b = rate_fn(x, cell, k, state);
            if (m.u <= b) {
                int id = state.add_point(x);
                ++out.n_accepts;
                if (opt.record_log)
                    out.log.push_back({e.t, EventKind::accept, x, id, opt.region_id});
                pq.push({e.t + m.r, 1, id, 0});
            }
        } else {
            int id = static_cast<int>(e.a);
            ++out.n_deaths;
            if (opt.record_log)
                out.log.push_back({e.t, EventKind::death, state.position(id), id, opt.region_id});
            state.kill(id);
        }
    }
    emit_snapshots_until(T);
    out.terminal = PointConfiguration(params, state.alive_points());
    if (boundary_draws) out.n_boundary_draws = *boundary_draws;
    return out;
}

}  // namespace detail

/// Exact realization of the birth-and-death dynamics on spec.lambda via
/// thinning of the stream's unit-intensity space-time proposals: a proposal
/// (x, u, r, s) is accepted iff u <= b(x, current state with boundary), and
/// every accepted point dies after its unit-exponential lifetime r.
/// Deterministic given (initial, stream).
inline Trajectory simulate(const PointConfiguration& initial, const GibbsSpec& spec, double T,
                           const EventStream& stream, const SimOptions& opt = {}) {
    const PointConfiguration* frozen =
        spec.boundary == BoundaryKind::frozen ? &*spec.frozen : nullptr;
    detail::RateFn plain = [](const Vec& x, std::int64_t, std::uint64_t,
                              const detail::EngineState& st) { return st.birth_rate(x); };
    return detail::run_engine(initial, spec.params, spec.lambda, frozen, T, stream, opt, plain);
}

}  // namespace areabd
