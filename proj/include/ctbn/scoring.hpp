#ifndef CTBN_SCORING_HPP
#define CTBN_SCORING_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ctbn/estimation.hpp"
#include "ctbn/suffstats.hpp"

// Trajectory log-likelihood, closed-form log marginal likelihoods, the
// decomposable Bayesian structure score and its BIC approximation. All
// arithmetic is carried out in log space through lgamma; raw Gamma values
// overflow for counts in the thousands.

namespace ctbn {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Which |D| the BIC penalty refers to.
enum class DataSizeConvention { transitions, trajectories, total_time };

inline double data_size(const Dataset& data, DataSizeConvention convention) {
    switch (convention) {
        case DataSizeConvention::transitions:
            return static_cast<double>(data.total_events());
        case DataSizeConvention::trajectories:
            return static_cast<double>(data.size());
        case DataSizeConvention::total_time:
            return data.total_time();
    }
    throw std::logic_error("unreachable");
}

struct ScoreConfig {
    PriorPattern prior;
    double structure_penalty = 0.0;  // c >= 0: ln P(Pa(X) = U) = -c * |U|
    DataSizeConvention bic_convention = DataSizeConvention::transitions;
};

struct FamilyScore {
    double log_marg_q = 0.0;
    double log_marg_theta = 0.0;
    double log_structure_prior = 0.0;
    double total = 0.0;
};

// ---------------------------------------------------------------------------
// Log-likelihood. 0 * ln 0 := 0; a positive count against a zero rate or zero
// jump probability makes the data impossible and yields -infinity.

inline double family_loglik(const Cim& cim, const FamilyStats& stats) {
    if (cim.n_states != stats.n_states || cim.n_contexts != stats.n_contexts)
        throw std::invalid_argument("cim and statistics shapes do not match");
    int k = stats.n_states;
    double ll = 0.0;
    for (std::int64_t u = 0; u < stats.n_contexts; ++u)
        for (int x = 0; x < k; ++x) {
            double q = cim.exit_rate(u, x);
            std::int64_t m = stats.m_total(u, x);
            if (m > 0) {
                if (q <= 0.0) return kNegInf;
                ll += static_cast<double>(m) * std::log(q);
            }
            ll -= q * stats.dwell(u, x);
            for (int xp = 0; xp < k; ++xp) {
                if (xp == x) continue;
                std::int64_t mj = stats.jumps(u, x, xp);
                if (mj == 0) continue;
                double th = cim.jump_prob(u, x, xp);
                if (th <= 0.0) return kNegInf;
                ll += static_cast<double>(mj) * std::log(th);
            }
        }
    return ll;
}

inline double loglik(const CtbnModel& model, const Dataset& data, bool include_initial = false) {
    if (model.universe != data.universe)
        throw std::invalid_argument("model and dataset are over different variables");
    double ll = 0.0;
    for (int i = 0; i < model.n_vars(); ++i) {
        FamilyStats stats = family_stats(data, i, model.graph.parents[static_cast<size_t>(i)]);
        ll += family_loglik(model.cims[static_cast<size_t>(i)], stats);
    }
    if (include_initial) {
        for (const Trajectory& traj : data.trajectories)
            for (int i = 0; i < model.n_vars(); ++i) {
                double p = model.initial[static_cast<size_t>(i)]
                                        [static_cast<size_t>(traj.initial[static_cast<size_t>(i)])];
                if (p <= 0.0) return kNegInf;
                ll += std::log(p);
            }
    }
    return ll;
}

// ---------------------------------------------------------------------------
// Closed-form log marginal likelihoods.
//
// Rate part, per (u, x) with a = alpha_{x|u}, t = tau_{x|u}:
//   Gamma(a + M + 1) t^(a+1) / (Gamma(a + 1) (t + T)^(a+M+1))
// Jump part, per (u, x): the Dirichlet-multinomial marginal
//   Gamma(a_x)/Gamma(a_x + M[x]) * prod_{x'} Gamma(a_xx' + M[x,x'])/Gamma(a_xx')

inline double marg_l_q(const FamilyStats& stats, const FamilyPrior& prior) {
    if (!prior.same_shape(stats))
        throw std::invalid_argument("prior and statistics shapes do not match");
    int k = stats.n_states;
    double lp = 0.0;
    for (std::int64_t u = 0; u < stats.n_contexts; ++u)
        for (int x = 0; x < k; ++x) {
            double a = prior.alpha_exit(u, x);
            double t = prior.tau_at(u, x);
            double m = static_cast<double>(stats.m_total(u, x));
            double dwell = stats.dwell(u, x);
            lp += std::lgamma(a + m + 1.0) - std::lgamma(a + 1.0);
            lp += (a + 1.0) * std::log(t) - (a + m + 1.0) * std::log(t + dwell);
        }
    return lp;
}

inline double marg_l_theta(const FamilyStats& stats, const FamilyPrior& prior) {
    if (!prior.same_shape(stats))
        throw std::invalid_argument("prior and statistics shapes do not match");
    int k = stats.n_states;
    double lp = 0.0;
    for (std::int64_t u = 0; u < stats.n_contexts; ++u)
        for (int x = 0; x < k; ++x) {
            double a = prior.alpha_exit(u, x);
            double m = static_cast<double>(stats.m_total(u, x));
            lp += std::lgamma(a) - std::lgamma(a + m);
            for (int xp = 0; xp < k; ++xp) {
                if (xp == x) continue;
                double axx = prior.alpha_jump_at(u, x, xp);
                double mxx = static_cast<double>(stats.jumps(u, x, xp));
                lp += std::lgamma(axx + mxx) - std::lgamma(axx);
            }
        }
    // A probability of a discrete event sequence; rounding slack only.
    if (lp > 1e-9) throw std::logic_error("marg_l_theta exceeded 0");
    return lp;
}

// ---------------------------------------------------------------------------
// Pure memo cache of family statistics keyed by (variable, parent set).

class StatsCache {
public:
    explicit StatsCache(const Dataset& data) : data_(&data) {}

    std::shared_ptr<const FamilyStats> get(int var, const std::vector<int>& parent_set) {
        std::vector<int> key = canonical_parents(data_->universe, parent_set, var);
        {
            std::lock_guard<std::mutex> lock(mu_);
            auto it = cache_.find({var, key});
            if (it != cache_.end()) return it->second;
        }
        auto stats = std::make_shared<const FamilyStats>(family_stats(*data_, var, key));
        std::lock_guard<std::mutex> lock(mu_);
        return cache_.emplace(std::make_pair(var, std::move(key)), std::move(stats)).first->second;
    }

    const Dataset& data() const { return *data_; }

private:
    const Dataset* data_;
    std::map<std::pair<int, std::vector<int>>, std::shared_ptr<const FamilyStats>> cache_;
    std::mutex mu_;
};

// ---------------------------------------------------------------------------
// Family and structure scores.

inline FamilyScore fam_score_from_stats(const FamilyStats& stats, const ScoreConfig& cfg) {
    if (cfg.structure_penalty < 0.0)
        throw std::invalid_argument("structure_penalty must be nonnegative");
    FamilyPrior prior = make_family_prior(cfg.prior, stats);
    FamilyScore s;
    s.log_marg_q = marg_l_q(stats, prior);
    s.log_marg_theta = marg_l_theta(stats, prior);
    // + 0.0 turns the -0.0 of a zero penalty into a plain zero for output.
    s.log_structure_prior =
        -cfg.structure_penalty * static_cast<double>(stats.parents.size()) + 0.0;
    s.total = s.log_marg_q + s.log_marg_theta + s.log_structure_prior;
    return s;
}

inline FamilyScore fam_score(int var, const std::vector<int>& parent_set, const Dataset& data,
                             const ScoreConfig& cfg, StatsCache* cache = nullptr) {
    if (cache) return fam_score_from_stats(*cache->get(var, parent_set), cfg);
    return fam_score_from_stats(family_stats(data, var, parent_set), cfg);
}

inline double structure_score(const Graph& g, const Dataset& data, const ScoreConfig& cfg,
                              StatsCache* cache = nullptr) {
    if (g.n_vars() != data.universe.size())
        throw std::invalid_argument("graph does not match dataset universe");
    double total = 0.0;
    for (int i = 0; i < g.n_vars(); ++i)
        total += fam_score(i, g.parents[static_cast<size_t>(i)], data, cfg, cache).total;
    return total;
}

// ---------------------------------------------------------------------------
// BIC: log-likelihood at the MLE minus (ln|D| / 2) * Dim[G].

inline double bic_score(const Graph& g, const Dataset& data,
                        DataSizeConvention convention = DataSizeConvention::transitions) {
    if (g.n_vars() != data.universe.size())
        throw std::invalid_argument("graph does not match dataset universe");
    double n = data_size(data, convention);
    if (!(n >= 1.0))
        throw std::invalid_argument("bic_score requires |D| >= 1 under the chosen convention");
    double ll = 0.0;
    for (int i = 0; i < g.n_vars(); ++i) {
        FamilyStats stats = family_stats(data, i, g.parents[static_cast<size_t>(i)]);
        ll += family_loglik(mle(stats).cim, stats);
    }
    return ll - 0.5 * std::log(n) * static_cast<double>(dimension(g, data.universe));
}

}  // namespace ctbn

#endif  // CTBN_SCORING_HPP
