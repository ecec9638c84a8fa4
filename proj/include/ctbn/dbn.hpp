#ifndef CTBN_DBN_HPP
#define CTBN_DBN_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include "ctbn/scoring.hpp"
#include "ctbn/trajectory.hpp"

// Time-sliced DBN baseline. Trajectories are discretized on a fixed grid; the
// transition model conditions each next-slice value on previous-slice parents
// only (which keeps the search decomposable per variable), and the continuous
// trajectory is scored by augmenting slice transitions with uniform
// within-slice event placement plus a per-variable probability of multiple
// transitions in one slice.

namespace ctbn {

struct DbnModel {
    Universe universe;
    double delta_t = 1.0;
    std::vector<std::vector<int>> parents;  // previous-slice parents, canonical order
    std::vector<std::vector<double>> cpt;   // per var: [inst * k + next_value]
    std::vector<double> p_multi;            // per var: P(>= 2 transitions in a slice)

    int n_vars() const { return universe.size(); }
};

struct SlicedTrajectory {
    // grid_states[j] is the full assignment at time j * delta_t; there is one
    // more grid point than slices.
    std::vector<std::vector<int>> grid_states;
    // event_counts[j][var] counts var's events inside slice j.
    std::vector<std::vector<int>> event_counts;

    std::int64_t n_slices() const { return static_cast<std::int64_t>(event_counts.size()); }
};

struct SlicedData {
    Universe universe;
    double delta_t = 1.0;
    std::vector<SlicedTrajectory> trajectories;
    int n_empty_trajectories = 0;  // shorter than one slice; contributed nothing

    std::int64_t n_slices() const {
        std::int64_t n = 0;
        for (const auto& t : trajectories) n += t.n_slices();
        return n;
    }
};

// ---------------------------------------------------------------------------
// discretize: states at grid points are right-continuous lookups; the final
// partial slice is dropped. A trajectory shorter than one slice contributes
// zero slices (recorded, not an error).

inline SlicedData discretize(const Dataset& data, double delta_t) {
    if (!(delta_t > 0.0)) throw std::invalid_argument("delta_t must be positive");
    SlicedData sliced;
    sliced.universe = data.universe;
    sliced.delta_t = delta_t;
    int n_vars = data.universe.size();

    for (const Trajectory& traj : data.trajectories) {
        auto n_slices = static_cast<std::int64_t>(traj.end_time / delta_t + 1e-9);
        if (n_slices == 0) {
            ++sliced.n_empty_trajectories;
            continue;
        }
        SlicedTrajectory st;
        st.grid_states.reserve(static_cast<size_t>(n_slices) + 1);
        st.event_counts.assign(static_cast<size_t>(n_slices),
                               std::vector<int>(static_cast<size_t>(n_vars), 0));

        std::vector<int> state = traj.initial;
        size_t next_event = 0;
        st.grid_states.push_back(state);
        for (std::int64_t j = 1; j <= n_slices; ++j) {
            double grid_time = static_cast<double>(j) * delta_t;
            while (next_event < traj.events.size() && traj.events[next_event].time <= grid_time) {
                const Event& ev = traj.events[next_event];
                state[static_cast<size_t>(ev.variable)] = ev.new_value;
                ++st.event_counts[static_cast<size_t>(j - 1)][static_cast<size_t>(ev.variable)];
                ++next_event;
            }
            st.grid_states.push_back(state);
        }
        sliced.trajectories.push_back(std::move(st));
    }
    return sliced;
}

// ---------------------------------------------------------------------------
// dbn_learn: per-variable greedy search over previous-slice parent sets
// (the variable itself is a candidate parent), maximizing the
// Dirichlet-multinomial marginal likelihood with a symmetric prior of the
// given strength. CPTs are posterior means; p_multi gets add-one smoothing.

namespace detail {

struct DbnFamilyCounts {
    std::int64_t n_inst = 0;
    int k = 0;
    std::vector<std::int64_t> counts;  // [inst * k + next_value]
};

inline DbnFamilyCounts dbn_family_counts(const SlicedData& sliced, int var,
                                         const std::vector<int>& parents) {
    const Universe& u = sliced.universe;
    DbnFamilyCounts fc;
    fc.k = u.var(var).n_states();
    fc.n_inst = instantiation_count(u, parents);
    fc.counts.assign(static_cast<size_t>(fc.n_inst * fc.k), 0);
    for (const SlicedTrajectory& st : sliced.trajectories)
        for (std::int64_t j = 0; j < st.n_slices(); ++j) {
            std::int64_t inst =
                instantiation_index(u, parents, st.grid_states[static_cast<size_t>(j)]);
            int next = st.grid_states[static_cast<size_t>(j + 1)][static_cast<size_t>(var)];
            ++fc.counts[static_cast<size_t>(inst * fc.k + next)];
        }
    return fc;
}

// Log Dirichlet-multinomial marginal with per-row symmetric prior
// (strength/k per cell).
inline double dbn_family_marginal(const DbnFamilyCounts& fc, double strength) {
    double cell = strength / fc.k;
    double lp = 0.0;
    for (std::int64_t inst = 0; inst < fc.n_inst; ++inst) {
        std::int64_t row_total = 0;
        for (int x = 0; x < fc.k; ++x) {
            std::int64_t n = fc.counts[static_cast<size_t>(inst * fc.k + x)];
            row_total += n;
            lp += std::lgamma(cell + static_cast<double>(n)) - std::lgamma(cell);
        }
        lp += std::lgamma(strength) - std::lgamma(strength + static_cast<double>(row_total));
    }
    return lp;
}

}  // namespace detail

inline DbnModel dbn_learn(const SlicedData& sliced, int max_parents, double prior_strength = 1.0) {
    if (sliced.n_slices() == 0)
        throw std::invalid_argument("dbn_learn requires at least one slice");
    if (!(prior_strength > 0.0))
        throw std::invalid_argument("prior_strength must be positive");
    const Universe& u = sliced.universe;

    DbnModel m;
    m.universe = u;
    m.delta_t = sliced.delta_t;
    m.parents.resize(static_cast<size_t>(u.size()));
    m.cpt.resize(static_cast<size_t>(u.size()));
    m.p_multi.resize(static_cast<size_t>(u.size()));

    // Candidates in name order (self included); greedy add/delete with strict
    // improvement, additions first, mirrors the CTBN search.
    std::vector<int> candidates(static_cast<size_t>(u.size()));
    for (int i = 0; i < u.size(); ++i) candidates[static_cast<size_t>(i)] = i;
    std::sort(candidates.begin(), candidates.end(),
              [&](int a, int b) { return u.var(a).name < u.var(b).name; });

    for (int var = 0; var < u.size(); ++var) {
        std::map<std::vector<int>, double> memo;
        auto score_of = [&](std::vector<int> parents) {
            std::sort(parents.begin(), parents.end(),
                      [&](int a, int b) { return u.var(a).name < u.var(b).name; });
            auto it = memo.find(parents);
            if (it != memo.end()) return it->second;
            double s =
                detail::dbn_family_marginal(detail::dbn_family_counts(sliced, var, parents),
                                            prior_strength);
            memo.emplace(std::move(parents), s);
            return s;
        };

        std::vector<int> parents;
        double current = score_of(parents);
        for (;;) {
            bool improved = false;
            std::vector<int> best_parents;
            double best = current;
            if (static_cast<int>(parents.size()) < max_parents)
                for (int c : candidates) {
                    if (std::find(parents.begin(), parents.end(), c) != parents.end()) continue;
                    std::vector<int> next = parents;
                    next.push_back(c);
                    double s = score_of(next);
                    if (s > best) {
                        best = s;
                        best_parents = next;
                        improved = true;
                    }
                }
            for (int c : candidates) {
                if (std::find(parents.begin(), parents.end(), c) == parents.end()) continue;
                std::vector<int> next = parents;
                next.erase(std::find(next.begin(), next.end(), c));
                double s = score_of(next);
                if (s > best) {
                    best = s;
                    best_parents = next;
                    improved = true;
                }
            }
            if (!improved) break;
            parents = std::move(best_parents);
            current = best;
        }

        std::sort(parents.begin(), parents.end(),
                  [&](int a, int b) { return u.var(a).name < u.var(b).name; });
        detail::DbnFamilyCounts fc = detail::dbn_family_counts(sliced, var, parents);
        double cell = prior_strength / fc.k;
        std::vector<double> cpt(static_cast<size_t>(fc.n_inst * fc.k));
        for (std::int64_t inst = 0; inst < fc.n_inst; ++inst) {
            std::int64_t row_total = 0;
            for (int x = 0; x < fc.k; ++x)
                row_total += fc.counts[static_cast<size_t>(inst * fc.k + x)];
            double denom = prior_strength + static_cast<double>(row_total);
            for (int x = 0; x < fc.k; ++x)
                cpt[static_cast<size_t>(inst * fc.k + x)] =
                    (cell + static_cast<double>(fc.counts[static_cast<size_t>(inst * fc.k + x)])) /
                    denom;
        }
        m.parents[static_cast<size_t>(var)] = std::move(parents);
        m.cpt[static_cast<size_t>(var)] = std::move(cpt);

        std::int64_t multi = 0, total = 0;
        for (const SlicedTrajectory& st : sliced.trajectories)
            for (std::int64_t j = 0; j < st.n_slices(); ++j) {
                ++total;
                if (st.event_counts[static_cast<size_t>(j)][static_cast<size_t>(var)] >= 2) ++multi;
            }
        m.p_multi[static_cast<size_t>(var)] =
            (static_cast<double>(multi) + 1.0) / (static_cast<double>(total) + 2.0);
    }
    return m;
}

// ---------------------------------------------------------------------------
// Parameter counting.

// Free parameters of a fully-connected DBN over binary variables. With
// intra-slice arcs, next-slice variable i (1-based) conditions on all n
// previous-slice variables and the i-1 earlier intra-slice ones.
inline std::int64_t count_dbn_parameters(int n_vars, bool intra_slice) {
    if (n_vars < 1 || n_vars > 31) throw std::invalid_argument("n_vars out of supported range");
    std::int64_t total = 0;
    for (int i = 1; i <= n_vars; ++i) {
        int exponent = intra_slice ? n_vars + i - 1 : n_vars;
        total += std::int64_t{1} << exponent;
    }
    return total;
}

// Free parameters of a learned (inter-slice) DBN: per variable, one
// (k-1)-dimensional row per parent instantiation.
inline std::int64_t dbn_free_parameters(const DbnModel& m) {
    std::int64_t total = 0;
    for (int i = 0; i < m.n_vars(); ++i) {
        std::int64_t k = m.universe.var(i).n_states();
        total += instantiation_count(m.universe, m.parents[static_cast<size_t>(i)]) * (k - 1);
    }
    return total;
}

// ---------------------------------------------------------------------------
// dbn_loglik: per slice and variable with j within-slice events,
//   ln CPT(next | parents at slice start)
//   + ln(1 - p_multi) if j <= 1, ln p_multi if j >= 2
//   + j * ln(1 / delta_t)                (uniform placement density)

inline double dbn_loglik(const DbnModel& model, const Dataset& data) {
    if (model.universe != data.universe)
        throw std::invalid_argument("model and dataset are over different variables");
    SlicedData sliced = discretize(data, model.delta_t);
    const Universe& u = model.universe;
    double log_dt = std::log(model.delta_t);

    double ll = 0.0;
    for (const SlicedTrajectory& st : sliced.trajectories)
        for (std::int64_t j = 0; j < st.n_slices(); ++j) {
            const std::vector<int>& from = st.grid_states[static_cast<size_t>(j)];
            const std::vector<int>& to = st.grid_states[static_cast<size_t>(j + 1)];
            for (int var = 0; var < u.size(); ++var) {
                int k = u.var(var).n_states();
                std::int64_t inst =
                    instantiation_index(u, model.parents[static_cast<size_t>(var)], from);
                double p = model.cpt[static_cast<size_t>(var)]
                                    [static_cast<size_t>(inst * k + to[static_cast<size_t>(var)])];
                if (p <= 0.0) return kNegInf;
                ll += std::log(p);

                int events = st.event_counts[static_cast<size_t>(j)][static_cast<size_t>(var)];
                double pm = model.p_multi[static_cast<size_t>(var)];
                if (events >= 2) {
                    if (pm <= 0.0) return kNegInf;
                    ll += std::log(pm);
                } else {
                    if (pm >= 1.0) return kNegInf;
                    ll += std::log1p(-pm);
                }
                ll -= static_cast<double>(events) * log_dt;
            }
        }
    return ll;
}

}  // namespace ctbn

#endif  // CTBN_DBN_HPP
