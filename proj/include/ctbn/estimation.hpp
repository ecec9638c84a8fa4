#ifndef CTBN_ESTIMATION_HPP
#define CTBN_ESTIMATION_HPP

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "ctbn/suffstats.hpp"

// Parameter estimation for one family from its sufficient statistics:
// maximum likelihood and conjugate Bayesian (Gamma rates, Dirichlet jump
// rows).
//
// The Gamma prior follows the convention with density proportional to
// q^alpha * exp(-q * tau), i.e. shape alpha + 1 and rate tau. Hyperparameter
// files and APIs carry that alpha.

namespace ctbn {

// Conjugate hyperparameters for one family. Only the per-transition Dirichlet
// weights and the Gamma tau are stored; the Gamma alpha of each (u, x) cell
// is the row sum of the Dirichlet weights, which keeps the expected-parameter
// jump rows normalized by construction.
struct FamilyPrior {
    int n_states = 0;
    std::int64_t n_contexts = 0;
    std::vector<double> tau;         // [u * k + x], > 0
    std::vector<double> alpha_jump;  // [(u * k + x) * k + x'], diagonal 0, > 0 off it

    FamilyPrior() = default;
    FamilyPrior(std::int64_t contexts, int k)
        : n_states(k),
          n_contexts(contexts),
          tau(static_cast<size_t>(contexts * k), 0.0),
          alpha_jump(static_cast<size_t>(contexts * k * k), 0.0) {}

    double tau_at(std::int64_t u, int x) const {
        return tau[static_cast<size_t>(u * n_states + x)];
    }
    double& tau_at(std::int64_t u, int x) {
        return tau[static_cast<size_t>(u * n_states + x)];
    }
    double alpha_jump_at(std::int64_t u, int x, int xp) const {
        return alpha_jump[static_cast<size_t>((u * n_states + x) * n_states + xp)];
    }
    double& alpha_jump_at(std::int64_t u, int x, int xp) {
        return alpha_jump[static_cast<size_t>((u * n_states + x) * n_states + xp)];
    }

    // alpha_{x|u}: the Gamma alpha, tied to the Dirichlet row sum.
    double alpha_exit(std::int64_t u, int x) const {
        double s = 0.0;
        for (int xp = 0; xp < n_states; ++xp)
            if (xp != x) s += alpha_jump_at(u, x, xp);
        return s;
    }

    bool same_shape(const FamilyStats& s) const {
        return n_states == s.n_states && n_contexts == s.n_contexts;
    }
    bool same_shape(const FamilyPrior& o) const {
        return n_states == o.n_states && n_contexts == o.n_contexts;
    }
};

// Posteriors live in the same family as priors.
using FamilyPosterior = FamilyPrior;

// Pattern applied uniformly to every family: alpha_{xx'|u} = alpha/(k-1) so
// that alpha_{x|u} = alpha, and tau_{x|u} = tau. The defaults mirror
// unit-parameter Gamma/Dirichlet generators.
struct PriorPattern {
    double alpha = 1.0;
    double tau = 1.0;
};

inline FamilyPrior make_family_prior(const PriorPattern& pattern, std::int64_t contexts, int k) {
    if (!(pattern.alpha > 0.0) || !(pattern.tau > 0.0))
        throw std::invalid_argument("prior pattern requires alpha > 0 and tau > 0");
    FamilyPrior prior(contexts, k);
    double a = pattern.alpha / (k - 1);
    for (std::int64_t u = 0; u < contexts; ++u)
        for (int x = 0; x < k; ++x) {
            prior.tau_at(u, x) = pattern.tau;
            for (int xp = 0; xp < k; ++xp)
                if (xp != x) prior.alpha_jump_at(u, x, xp) = a;
        }
    return prior;
}

inline FamilyPrior make_family_prior(const PriorPattern& pattern, const FamilyStats& stats) {
    return make_family_prior(pattern, stats.n_contexts, stats.n_states);
}

// ---------------------------------------------------------------------------
// MLE. Degenerate cells are resolved by a documented fallback and flagged:
// T[x|u] = 0 leaves the rate undefined (emitted as 0), M[x|u] = 0 leaves the
// jump row undefined (emitted uniform).

struct MleResult {
    Cim cim;
    std::vector<std::uint8_t> rate_undefined;  // per (u, x): T[x|u] == 0
    std::vector<std::uint8_t> jump_undefined;  // per (u, x): M[x|u] == 0

    bool any_degenerate() const {
        for (auto f : rate_undefined)
            if (f) return true;
        for (auto f : jump_undefined)
            if (f) return true;
        return false;
    }
};

inline MleResult mle(const FamilyStats& stats) {
    int k = stats.n_states;
    MleResult r;
    r.cim = Cim(stats.n_contexts, k);
    r.rate_undefined.assign(static_cast<size_t>(stats.n_contexts * k), 0);
    r.jump_undefined.assign(static_cast<size_t>(stats.n_contexts * k), 0);

    for (std::int64_t u = 0; u < stats.n_contexts; ++u)
        for (int x = 0; x < k; ++x) {
            double t = stats.dwell(u, x);
            std::int64_t m = stats.m_total(u, x);
            size_t cell = static_cast<size_t>(u * k + x);
            if (t > 0.0) {
                r.cim.exit_rate(u, x) = static_cast<double>(m) / t;
            } else {
                r.cim.exit_rate(u, x) = 0.0;
                r.rate_undefined[cell] = 1;
            }
            if (m > 0) {
                for (int xp = 0; xp < k; ++xp)
                    if (xp != x)
                        r.cim.jump_prob(u, x, xp) =
                            static_cast<double>(stats.jumps(u, x, xp)) / static_cast<double>(m);
            } else {
                fill_uniform_jump_row(r.cim, u, x);
                r.jump_undefined[cell] = 1;
            }
        }
    return r;
}

// ---------------------------------------------------------------------------
// Conjugate update: counts and durations add onto the hyperparameters.

inline FamilyPosterior posterior(const FamilyPrior& prior, const FamilyStats& stats) {
    if (!prior.same_shape(stats))
        throw std::invalid_argument("prior and statistics shapes do not match");
    FamilyPosterior post = prior;
    int k = stats.n_states;
    for (std::int64_t u = 0; u < stats.n_contexts; ++u)
        for (int x = 0; x < k; ++x) {
            post.tau_at(u, x) += stats.dwell(u, x);
            for (int xp = 0; xp < k; ++xp)
                if (xp != x)
                    post.alpha_jump_at(u, x, xp) += static_cast<double>(stats.jumps(u, x, xp));
        }
    return post;
}

// Expected parameters with imaginary counts:
//   q = (alpha_{x|u} + M[x|u]) / (tau_{x|u} + T[x|u])
//   theta_{xx'} = (alpha_{xx'|u} + M[x,x'|u]) / (alpha_{x|u} + M[x|u])
// Always well-defined since tau > 0 and alpha > 0.
inline Cim expected_params(const FamilyPrior& prior, const FamilyStats& stats) {
    if (!prior.same_shape(stats))
        throw std::invalid_argument("prior and statistics shapes do not match");
    int k = stats.n_states;
    Cim cim(stats.n_contexts, k);
    for (std::int64_t u = 0; u < stats.n_contexts; ++u)
        for (int x = 0; x < k; ++x) {
            double a = prior.alpha_exit(u, x) + static_cast<double>(stats.m_total(u, x));
            double t = prior.tau_at(u, x) + stats.dwell(u, x);
            cim.exit_rate(u, x) = a / t;
            for (int xp = 0; xp < k; ++xp)
                if (xp != x)
                    cim.jump_prob(u, x, xp) =
                        (prior.alpha_jump_at(u, x, xp) + static_cast<double>(stats.jumps(u, x, xp))) / a;
        }
    return cim;
}

inline Cim expected_params(const PriorPattern& pattern, const FamilyStats& stats) {
    return expected_params(make_family_prior(pattern, stats), stats);
}

}  // namespace ctbn

#endif  // CTBN_ESTIMATION_HPP
