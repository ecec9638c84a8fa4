#ifndef CTBN_SUFFSTATS_HPP
#define CTBN_SUFFSTATS_HPP

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "ctbn/trajectory.hpp"

// Sufficient statistics for one (variable, parent set) family: dwell times
// T[x|u] and transition counts M[x,x'|u]. These summarize a dataset exactly
// for likelihood, estimation and scoring purposes.

namespace ctbn {

struct FamilyStats {
    int variable = -1;
    std::vector<int> parents;        // canonical (name-sorted) order
    int n_states = 0;
    std::int64_t n_contexts = 0;
    std::vector<double> dwell_time;        // T[x|u], [u * k + x]
    std::vector<std::int64_t> jump_counts; // M[x,x'|u], [(u * k + x) * k + x']

    FamilyStats() = default;
    FamilyStats(int var, std::vector<int> pars, std::int64_t contexts, int k)
        : variable(var),
          parents(std::move(pars)),
          n_states(k),
          n_contexts(contexts),
          dwell_time(static_cast<size_t>(contexts * k), 0.0),
          jump_counts(static_cast<size_t>(contexts * k * k), 0) {}

    double dwell(std::int64_t u, int x) const {
        return dwell_time[static_cast<size_t>(u * n_states + x)];
    }
    std::int64_t jumps(std::int64_t u, int x, int xp) const {
        return jump_counts[static_cast<size_t>((u * n_states + x) * n_states + xp)];
    }

    // M[x|u]: total transitions leaving X = x under context u.
    std::int64_t m_total(std::int64_t u, int x) const {
        std::int64_t m = 0;
        for (int xp = 0; xp < n_states; ++xp)
            if (xp != x) m += jumps(u, x, xp);
        return m;
    }

    double total_time() const {
        double s = 0.0;
        for (double t : dwell_time) s += t;
        return s;
    }

    std::int64_t total_jumps() const {
        std::int64_t m = 0;
        for (std::int64_t c : jump_counts) m += c;
        return m;
    }

    bool same_shape(const FamilyStats& o) const {
        return variable == o.variable && parents == o.parents &&
               n_states == o.n_states && n_contexts == o.n_contexts;
    }

    // Componentwise merge; families computed per trajectory may be combined
    // this way.
    FamilyStats& operator+=(const FamilyStats& o) {
        if (!same_shape(o)) throw std::invalid_argument("family statistics shape mismatch");
        for (size_t i = 0; i < dwell_time.size(); ++i) dwell_time[i] += o.dwell_time[i];
        for (size_t i = 0; i < jump_counts.size(); ++i) jump_counts[i] += o.jump_counts[i];
        return *this;
    }
};

inline FamilyStats operator+(FamilyStats a, const FamilyStats& b) { return a += b; }

namespace detail {

// Neumaier-compensated accumulation buffer; long trajectories add many small
// durations to the same cell.
struct CompensatedVec {
    std::vector<double> sum;
    std::vector<double> comp;

    explicit CompensatedVec(size_t n) : sum(n, 0.0), comp(n, 0.0) {}

    void add(size_t i, double v) {
        double s = sum[i];
        double t = s + v;
        if (std::abs(s) >= std::abs(v))
            comp[i] += (s - t) + v;
        else
            comp[i] += (v - t) + s;
        sum[i] = t;
    }

    double value(size_t i) const { return sum[i] + comp[i]; }
};

}  // namespace detail

// family_stats: one pass per trajectory. Durations partition at every event;
// the parent context of a transition is read at the left limit of the event
// time, so an event is counted before it is applied.
inline FamilyStats family_stats(const Dataset& data, int var, const std::vector<int>& parent_set) {
    const Universe& u = data.universe;
    if (var < 0 || var >= u.size()) throw std::invalid_argument("unknown variable index");
    std::vector<int> parents = canonical_parents(u, parent_set, var);

    int k = u.var(var).n_states();
    std::int64_t contexts = instantiation_count(u, parents);
    FamilyStats stats(var, parents, contexts, k);
    detail::CompensatedVec dwell(stats.dwell_time.size());

    for (const Trajectory& traj : data.trajectories) {
        if (static_cast<int>(traj.initial.size()) != u.size())
            throw std::invalid_argument("trajectory does not cover the variable universe");
        std::vector<int> state = traj.initial;
        double prev = 0.0;
        std::int64_t ctx = instantiation_index(u, parents, state);
        for (const Event& ev : traj.events) {
            int x = state[static_cast<size_t>(var)];
            dwell.add(static_cast<size_t>(ctx * k + x), ev.time - prev);
            if (ev.variable == var)
                ++stats.jump_counts[static_cast<size_t>((ctx * k + x) * k + ev.new_value)];
            state[static_cast<size_t>(ev.variable)] = ev.new_value;
            // Only an event of X or of a parent can change the cell; recompute
            // the context lazily on those.
            if (ev.variable == var) {
                // context unchanged
            } else {
                for (int p : parents) {
                    if (p == ev.variable) {
                        ctx = instantiation_index(u, parents, state);
                        break;
                    }
                }
            }
            prev = ev.time;
        }
        int x = state[static_cast<size_t>(var)];
        dwell.add(static_cast<size_t>(ctx * k + x), traj.end_time - prev);
    }

    for (size_t i = 0; i < stats.dwell_time.size(); ++i) stats.dwell_time[i] = dwell.value(i);
    return stats;
}

inline FamilyStats family_stats(const Universe& u, const Trajectory& traj, int var,
                                const std::vector<int>& parent_set) {
    Dataset d;
    d.universe = u;
    d.trajectories.push_back(traj);
    return family_stats(d, var, parent_set);
}

}  // namespace ctbn

#endif  // CTBN_SUFFSTATS_HPP
