#ifndef CTBN_SEARCH_HPP
#define CTBN_SEARCH_HPP

#include <algorithm>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "ctbn/random.hpp"
#include "ctbn/scoring.hpp"

// Structure learning. Families have no acyclicity interactions, so both the
// exhaustive bounded-parent enumeration and the greedy hill-climber optimize
// each variable's parent set independently.

namespace ctbn {

enum class SearchMethod { exhaustive, greedy };

struct SearchConfig {
    int max_parents = 2;
    SearchMethod method = SearchMethod::greedy;
    ScoreConfig score;
    int restarts = 0;          // extra greedy runs from random parent sets
    std::uint64_t seed = 0;    // used only when restarts > 0
};

// One accepted hill-climbing move.
struct Move {
    bool added = false;  // false: deletion
    int variable = -1;
    double score_after = 0.0;
};

struct FamilyResult {
    std::vector<int> parents;  // canonical order
    FamilyScore score;
    std::vector<Move> trace;
};

struct SearchResult {
    Graph graph;
    std::vector<FamilyScore> family_scores;
    std::vector<std::vector<Move>> traces;  // empty for exhaustive search
    double total_score = 0.0;
};

namespace detail {

// Candidate parent lists ordered so that enumeration and tie-breaking are
// deterministic: variables sorted by name.
inline std::vector<int> candidates_by_name(const Universe& u, int exclude) {
    std::vector<int> c;
    for (int i = 0; i < u.size(); ++i)
        if (i != exclude) c.push_back(i);
    std::sort(c.begin(), c.end(), [&](int a, int b) { return u.var(a).name < u.var(b).name; });
    return c;
}

// Lexicographically-by-name smaller parent set; both inputs canonical.
inline bool lex_less(const Universe& u, const std::vector<int>& a, const std::vector<int>& b) {
    size_t n = std::min(a.size(), b.size());
    for (size_t i = 0; i < n; ++i) {
        const std::string& an = u.var(a[i]).name;
        const std::string& bn = u.var(b[i]).name;
        if (an != bn) return an < bn;
    }
    return a.size() < b.size();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Exhaustive k-bounded search: per variable, the exact argmax over all parent
// sets of size <= max_parents. Ties go to the lexicographically smallest set,
// which is also the first one enumerated.

inline FamilyResult exhaustive_family(int var, const Dataset& data, const SearchConfig& cfg,
                                      StatsCache* cache = nullptr) {
    const Universe& u = data.universe;
    std::vector<int> candidates = detail::candidates_by_name(u, var);

    FamilyResult best;
    bool have_best = false;
    std::vector<int> current;

    // Depth-first over name-sorted candidates yields subsets in lexicographic
    // order, so a strict comparison keeps the lexicographically smallest of
    // any tied maximum.
    auto visit = [&](auto&& self, size_t next) -> void {
        FamilyScore s = fam_score(var, current, data, cfg.score, cache);
        if (!have_best || s.total > best.score.total) {
            best.parents = canonical_parents(u, current, var);
            best.score = s;
            have_best = true;
        }
        if (static_cast<int>(current.size()) >= cfg.max_parents) return;
        for (size_t i = next; i < candidates.size(); ++i) {
            current.push_back(candidates[i]);
            self(self, i + 1);
            current.pop_back();
        }
    };
    visit(visit, 0);
    return best;
}

inline SearchResult exhaustive_klearn(const Dataset& data, const SearchConfig& cfg,
                                      StatsCache* cache = nullptr) {
    if (data.trajectories.empty())
        throw std::invalid_argument("structure search requires a non-empty dataset");
    if (cfg.max_parents < 0 || cfg.max_parents > data.universe.size() - 1)
        throw std::invalid_argument("max_parents must lie in [0, n-1]");
    StatsCache local(data);
    if (!cache) cache = &local;

    SearchResult r;
    r.graph.parents.resize(static_cast<size_t>(data.universe.size()));
    for (int i = 0; i < data.universe.size(); ++i) {
        FamilyResult fr = exhaustive_family(i, data, cfg, cache);
        r.graph.parents[static_cast<size_t>(i)] = fr.parents;
        r.family_scores.push_back(fr.score);
        r.total_score += fr.score.total;
    }
    r.traces.resize(static_cast<size_t>(data.universe.size()));
    return r;
}

// ---------------------------------------------------------------------------
// Greedy hill-climbing per family: from a starting parent set, repeatedly
// apply the best strictly improving single-parent addition or deletion.
// Additions are evaluated before deletions, candidates in name order, so the
// whole run is deterministic.

namespace detail {

inline FamilyResult greedy_from(int var, const std::vector<int>& start, const Dataset& data,
                                const SearchConfig& cfg, StatsCache* cache) {
    const Universe& u = data.universe;
    std::vector<int> candidates = candidates_by_name(u, var);

    FamilyResult r;
    r.parents = canonical_parents(u, start, var);
    r.score = fam_score(var, r.parents, data, cfg.score, cache);

    for (;;) {
        bool have_move = false;
        Move best_move;
        FamilyScore best_score;
        std::vector<int> best_parents;

        auto consider = [&](std::vector<int> parents, Move mv) {
            parents = canonical_parents(u, std::move(parents), var);
            FamilyScore s = fam_score(var, parents, data, cfg.score, cache);
            if (!have_move || s.total > best_score.total) {
                have_move = true;
                best_move = mv;
                best_move.score_after = s.total;
                best_score = s;
                best_parents = std::move(parents);
            }
        };

        if (static_cast<int>(r.parents.size()) < cfg.max_parents)
            for (int c : candidates) {
                if (std::find(r.parents.begin(), r.parents.end(), c) != r.parents.end()) continue;
                std::vector<int> next = r.parents;
                next.push_back(c);
                consider(std::move(next), Move{true, c, 0.0});
            }
        for (int c : candidates) {
            auto it = std::find(r.parents.begin(), r.parents.end(), c);
            if (it == r.parents.end()) continue;
            std::vector<int> next = r.parents;
            next.erase(std::find(next.begin(), next.end(), c));
            consider(std::move(next), Move{false, c, 0.0});
        }

        if (!have_move || !(best_score.total > r.score.total)) break;
        r.parents = std::move(best_parents);
        r.score = best_score;
        r.trace.push_back(best_move);
    }
    return r;
}

}  // namespace detail

inline FamilyResult greedy_family(int var, const Dataset& data, const SearchConfig& cfg,
                                  StatsCache* cache = nullptr) {
    if (data.trajectories.empty())
        throw std::invalid_argument("structure search requires a non-empty dataset");
    StatsCache local(data);
    if (!cache) cache = &local;

    FamilyResult best = detail::greedy_from(var, {}, data, cfg, cache);
    if (cfg.restarts > 0) {
        const Universe& u = data.universe;
        std::vector<int> candidates = detail::candidates_by_name(u, var);
        for (int rstart = 0; rstart < cfg.restarts; ++rstart) {
            // Random initial parent set of size <= max_parents; the stream is
            // derived from (seed, variable, restart) so runs are reproducible
            // and families independent.
            Rng rng(derive_stream_seed(cfg.seed,
                                       static_cast<std::uint64_t>(var) * 0x10001ULL +
                                           static_cast<std::uint64_t>(rstart)));
            std::vector<int> pool = candidates;
            int size = static_cast<int>(rng.uniform_int(cfg.max_parents + 1));
            std::vector<int> start;
            for (int j = 0; j < size; ++j) {
                auto pick = static_cast<size_t>(rng.uniform_int(static_cast<std::int64_t>(pool.size())));
                start.push_back(pool[pick]);
                pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
            }
            FamilyResult alt = detail::greedy_from(var, start, data, cfg, cache);
            if (alt.score.total > best.score.total ||
                (alt.score.total == best.score.total &&
                 detail::lex_less(u, alt.parents, best.parents)))
                best = std::move(alt);
        }
    }
    return best;
}

inline SearchResult greedy_search(const Dataset& data, const SearchConfig& cfg,
                                  StatsCache* cache = nullptr) {
    if (data.trajectories.empty())
        throw std::invalid_argument("structure search requires a non-empty dataset");
    if (cfg.max_parents < 0 || cfg.max_parents > data.universe.size() - 1)
        throw std::invalid_argument("max_parents must lie in [0, n-1]");
    StatsCache local(data);
    if (!cache) cache = &local;

    SearchResult r;
    r.graph.parents.resize(static_cast<size_t>(data.universe.size()));
    for (int i = 0; i < data.universe.size(); ++i) {
        FamilyResult fr = greedy_family(i, data, cfg, cache);
        r.graph.parents[static_cast<size_t>(i)] = fr.parents;
        r.family_scores.push_back(fr.score);
        r.traces.push_back(fr.trace);
        r.total_score += fr.score.total;
    }
    return r;
}

inline SearchResult run_search(const Dataset& data, const SearchConfig& cfg,
                               StatsCache* cache = nullptr) {
    return cfg.method == SearchMethod::exhaustive ? exhaustive_klearn(data, cfg, cache)
                                                  : greedy_search(data, cfg, cache);
}

// ---------------------------------------------------------------------------
// learn_structure: search, then Bayesian parameter fit under the same prior
// pattern; the initial distribution is fitted by add-one-smoothed frequencies
// of the trajectory initial states.

inline std::vector<std::vector<double>> fit_initial_distribution(const Dataset& data) {
    const Universe& u = data.universe;
    std::vector<std::vector<double>> initial(static_cast<size_t>(u.size()));
    for (int i = 0; i < u.size(); ++i) {
        int k = u.var(i).n_states();
        std::vector<double> counts(static_cast<size_t>(k), 1.0);
        for (const Trajectory& traj : data.trajectories)
            counts[static_cast<size_t>(traj.initial[static_cast<size_t>(i)])] += 1.0;
        double total = static_cast<double>(data.size()) + static_cast<double>(k);
        for (auto& c : counts) c /= total;
        initial[static_cast<size_t>(i)] = std::move(counts);
    }
    return initial;
}

// Parameter fit for a fixed structure.
inline CtbnModel fit_params(const Graph& g, const Dataset& data, const PriorPattern& prior) {
    CtbnModel m;
    m.universe = data.universe;
    m.graph = g;
    m.cims.reserve(static_cast<size_t>(g.n_vars()));
    for (int i = 0; i < g.n_vars(); ++i) {
        FamilyStats stats = family_stats(data, i, g.parents[static_cast<size_t>(i)]);
        m.cims.push_back(expected_params(prior, stats));
    }
    m.initial = fit_initial_distribution(data);
    return m;
}

inline CtbnModel learn_structure(const Dataset& data, const SearchConfig& cfg,
                                 SearchResult* result_out = nullptr) {
    if (data.trajectories.empty())
        throw std::invalid_argument("learn_structure requires a non-empty dataset");
    SearchResult r = run_search(data, cfg);
    CtbnModel m = fit_params(r.graph, data, cfg.score.prior);
    if (result_out) *result_out = std::move(r);
    return m;
}

// ---------------------------------------------------------------------------
// hamming: size of the symmetric difference of the directed edge sets.

inline int hamming(const Graph& a, const Graph& b) {
    if (a.n_vars() != b.n_vars())
        throw std::invalid_argument("hamming: graphs over different universes");
    int d = 0;
    for (int child = 0; child < a.n_vars(); ++child) {
        for (int p : a.parents[static_cast<size_t>(child)])
            if (!b.has_edge(p, child)) ++d;
        for (int p : b.parents[static_cast<size_t>(child)])
            if (!a.has_edge(p, child)) ++d;
    }
    return d;
}

}  // namespace ctbn

#endif  // CTBN_SEARCH_HPP
