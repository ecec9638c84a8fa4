#ifndef CTBN_AMALGAMATION_HPP
#define CTBN_AMALGAMATION_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ctbn/model.hpp"

// Amalgamation converts a model into the single intensity matrix of the joint
// process over all variables, plus executable identifiability predicates on
// such matrices: variable-based-ness, the S-map test for a candidate graph,
// and recovery of the unique minimal S-map. Dense matrices with an explicit
// state-space cap; this is diagnostic machinery for small systems, not a
// scalability path.

namespace ctbn {

inline constexpr std::int64_t kDefaultJointStateCap = std::int64_t{1} << 20;

struct JointIntensity {
    std::vector<VariableSpec> variables;  // first variable varies slowest
    std::int64_t n_states = 0;
    std::vector<double> q;  // row-major n_states x n_states

    double at(std::int64_t from, std::int64_t to) const {
        return q[static_cast<size_t>(from * n_states + to)];
    }
    double& at(std::int64_t from, std::int64_t to) {
        return q[static_cast<size_t>(from * n_states + to)];
    }

    int n_vars() const { return static_cast<int>(variables.size()); }

    // Position stride of each variable under the fixed indexing convention.
    std::vector<std::int64_t> strides() const {
        std::vector<std::int64_t> s(variables.size(), 1);
        for (int i = n_vars() - 2; i >= 0; --i)
            s[static_cast<size_t>(i)] =
                s[static_cast<size_t>(i + 1)] * variables[static_cast<size_t>(i + 1)].n_states();
        return s;
    }

    std::vector<int> decode(std::int64_t index) const {
        std::vector<int> assignment(variables.size());
        for (int i = n_vars() - 1; i >= 0; --i) {
            int k = variables[static_cast<size_t>(i)].n_states();
            assignment[static_cast<size_t>(i)] = static_cast<int>(index % k);
            index /= k;
        }
        return assignment;
    }

    std::int64_t encode(const std::vector<int>& assignment) const {
        std::int64_t index = 0;
        for (int i = 0; i < n_vars(); ++i)
            index = index * variables[static_cast<size_t>(i)].n_states() +
                    assignment[static_cast<size_t>(i)];
        return index;
    }
};

inline std::int64_t joint_state_count(const std::vector<VariableSpec>& vars, std::int64_t cap) {
    std::int64_t n = 1;
    for (const auto& v : vars) {
        n *= v.n_states();
        if (n > cap)
            throw std::invalid_argument("joint state space exceeds cap of " + std::to_string(cap));
    }
    return n;
}

// Label such as "X=x1|Y=y0" for CSV headers.
inline std::string joint_state_label(const JointIntensity& joint, std::int64_t index) {
    std::vector<int> a = joint.decode(index);
    std::string label;
    for (int i = 0; i < joint.n_vars(); ++i) {
        if (i > 0) label += '|';
        const VariableSpec& v = joint.variables[static_cast<size_t>(i)];
        label += v.name;
        label += '=';
        label += v.states[static_cast<size_t>(a[static_cast<size_t>(i)])];
    }
    return label;
}

// ---------------------------------------------------------------------------
// amalgamate. Joint states differing in exactly one variable X (x -> x') get
// intensity q_{x|u} * theta_{xx'|u} with u read off the source state; states
// differing in two or more variables keep an exact zero; the diagonal is the
// negative row sum.

inline JointIntensity amalgamate(const CtbnModel& model,
                                 std::int64_t state_cap = kDefaultJointStateCap) {
    const Universe& u = model.universe;
    JointIntensity joint;
    joint.variables = u.vars();
    joint.n_states = joint_state_count(joint.variables, state_cap);
    joint.q.assign(static_cast<size_t>(joint.n_states) * static_cast<size_t>(joint.n_states), 0.0);

    std::vector<std::int64_t> stride = joint.strides();
    for (std::int64_t s = 0; s < joint.n_states; ++s) {
        std::vector<int> assignment = joint.decode(s);
        double exit_total = 0.0;
        for (int i = 0; i < u.size(); ++i) {
            const Cim& cim = model.cims[static_cast<size_t>(i)];
            std::int64_t ctx =
                instantiation_index(u, model.graph.parents[static_cast<size_t>(i)], assignment);
            int x = assignment[static_cast<size_t>(i)];
            double rate = cim.exit_rate(ctx, x);
            if (rate == 0.0) continue;
            for (int xp = 0; xp < u.var(i).n_states(); ++xp) {
                if (xp == x) continue;
                double intensity = rate * cim.jump_prob(ctx, x, xp);
                std::int64_t target = s + stride[static_cast<size_t>(i)] * (xp - x);
                joint.at(s, target) = intensity;
                exit_total += intensity;
            }
        }
        joint.at(s, s) = -exit_total;
    }
    return joint;
}

// Product of the per-variable initial multinomials over joint states.
inline std::vector<double> initial_joint_distribution(const CtbnModel& model,
                                                      std::int64_t state_cap = kDefaultJointStateCap) {
    std::int64_t n = joint_state_count(model.universe.vars(), state_cap);
    JointIntensity shape;
    shape.variables = model.universe.vars();
    shape.n_states = n;
    std::vector<double> p(static_cast<size_t>(n), 1.0);
    for (std::int64_t s = 0; s < n; ++s) {
        std::vector<int> a = shape.decode(s);
        for (int i = 0; i < model.n_vars(); ++i)
            p[static_cast<size_t>(s)] *=
                model.initial[static_cast<size_t>(i)][static_cast<size_t>(a[static_cast<size_t>(i)])];
    }
    return p;
}

// ---------------------------------------------------------------------------
// Predicates.

namespace detail {

inline int count_differences(const std::vector<int>& a, const std::vector<int>& b) {
    int d = 0;
    for (size_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) ++d;
    return d;
}

}  // namespace detail

// True iff every entry between states differing in more than one variable is
// zero within tol. Amalgamation outputs satisfy this with tol = 0.
inline bool is_variable_based(const JointIntensity& joint, double tol = 0.0) {
    for (std::int64_t s = 0; s < joint.n_states; ++s) {
        std::vector<int> a = joint.decode(s);
        for (std::int64_t t = 0; t < joint.n_states; ++t) {
            if (t == s) continue;
            if (detail::count_differences(a, joint.decode(t)) >= 2 &&
                std::abs(joint.at(s, t)) > tol)
                return false;
        }
    }
    return true;
}

namespace detail {

inline void require_variable_based(const JointIntensity& joint, double tol) {
    if (!is_variable_based(joint, tol))
        throw std::invalid_argument("joint intensity matrix is not variable-based");
}

// Transition-intensity profile of variable `var` out of joint state s: the
// intensities toward each target value (the current value's slot stays 0).
inline std::vector<double> transition_profile(const JointIntensity& joint,
                                              const std::vector<std::int64_t>& stride,
                                              std::int64_t s, int var, int x, int k) {
    std::vector<double> profile(static_cast<size_t>(k), 0.0);
    for (int xp = 0; xp < k; ++xp) {
        if (xp == x) continue;
        profile[static_cast<size_t>(xp)] = joint.at(s, s + stride[static_cast<size_t>(var)] * (xp - x));
    }
    return profile;
}

inline bool profiles_differ(const std::vector<double>& a, const std::vector<double>& b, double tol) {
    for (size_t i = 0; i < a.size(); ++i)
        if (std::abs(a[i] - b[i]) > tol) return true;
    return false;
}

}  // namespace detail

// S-map test: G is an S-map iff, for every variable X, the X-transition
// profile out of a joint state depends only on the values of X and Pa_G(X).
inline bool is_smap(const JointIntensity& joint, const Graph& g, double tol = 1e-9) {
    detail::require_variable_based(joint, tol);
    if (g.n_vars() != joint.n_vars())
        throw std::invalid_argument("graph does not match joint factorization");

    std::vector<std::int64_t> stride = joint.strides();
    for (int var = 0; var < joint.n_vars(); ++var) {
        int k = joint.variables[static_cast<size_t>(var)].n_states();
        const std::vector<int>& parents = g.parents[static_cast<size_t>(var)];
        // Group joint states by (value of var, values of parents): all states
        // in a group must share one profile.
        std::map<std::vector<int>, std::vector<double>> reference;
        for (std::int64_t s = 0; s < joint.n_states; ++s) {
            std::vector<int> a = joint.decode(s);
            std::vector<int> key;
            key.push_back(a[static_cast<size_t>(var)]);
            for (int p : parents) key.push_back(a[static_cast<size_t>(p)]);
            std::vector<double> profile = detail::transition_profile(
                joint, stride, s, var, a[static_cast<size_t>(var)], k);
            auto it = reference.find(key);
            if (it == reference.end())
                reference.emplace(std::move(key), std::move(profile));
            else if (detail::profiles_differ(it->second, profile, tol))
                return false;
        }
    }
    return true;
}

// Minimal S-map: Z -> X is an edge iff some single flip of Z changes the
// X-transition profile. On a product space a profile is independent of a
// coordinate exactly when no single flip of it ever matters, so the
// per-coordinate test recovers the unique minimal structure.
inline Graph minimal_smap(const JointIntensity& joint, double tol = 1e-9) {
    detail::require_variable_based(joint, tol);
    std::vector<std::int64_t> stride = joint.strides();
    Universe u(joint.variables);

    std::vector<std::vector<int>> parent_lists(static_cast<size_t>(joint.n_vars()));
    for (int var = 0; var < joint.n_vars(); ++var) {
        int k = joint.variables[static_cast<size_t>(var)].n_states();
        for (int z = 0; z < joint.n_vars(); ++z) {
            if (z == var) continue;
            int kz = joint.variables[static_cast<size_t>(z)].n_states();
            bool sensitive = false;
            for (std::int64_t s = 0; s < joint.n_states && !sensitive; ++s) {
                std::vector<int> a = joint.decode(s);
                int x = a[static_cast<size_t>(var)];
                int zval = a[static_cast<size_t>(z)];
                std::vector<double> base =
                    detail::transition_profile(joint, stride, s, var, x, k);
                for (int zp = zval + 1; zp < kz; ++zp) {
                    std::int64_t flipped = s + stride[static_cast<size_t>(z)] * (zp - zval);
                    if (detail::profiles_differ(
                            base, detail::transition_profile(joint, stride, flipped, var, x, k),
                            tol)) {
                        sensitive = true;
                        break;
                    }
                }
            }
            if (sensitive) parent_lists[static_cast<size_t>(var)].push_back(z);
        }
    }
    return make_graph(u, std::move(parent_lists));
}

// ---------------------------------------------------------------------------
// Transient distribution p(t) = p(0) * exp(Q t) by uniformization: with
// lambda >= max exit rate and P = I + Q/lambda, p(t) is the Poisson(lambda t)
// mixture of p(0) P^m. The Poisson tail is truncated below 1e-14.

inline std::vector<double> transient_distribution(const JointIntensity& joint,
                                                  const std::vector<double>& p0, double t) {
    if (static_cast<std::int64_t>(p0.size()) != joint.n_states)
        throw std::invalid_argument("initial distribution does not match state count");
    if (!(t >= 0.0)) throw std::invalid_argument("time must be nonnegative");

    double lambda = 0.0;
    for (std::int64_t s = 0; s < joint.n_states; ++s)
        lambda = std::max(lambda, -joint.at(s, s));
    if (lambda == 0.0 || t == 0.0) return p0;
    lambda *= 1.0000001;  // keep P entries strictly inside [0, 1]

    auto step = [&](const std::vector<double>& v) {
        std::vector<double> out(v.size(), 0.0);
        for (std::int64_t i = 0; i < joint.n_states; ++i) {
            double vi = v[static_cast<size_t>(i)];
            if (vi == 0.0) continue;
            // row i of P = I + Q/lambda
            out[static_cast<size_t>(i)] += vi * (1.0 + joint.at(i, i) / lambda);
            for (std::int64_t j = 0; j < joint.n_states; ++j) {
                if (j == i) continue;
                double qij = joint.at(i, j);
                if (qij != 0.0) out[static_cast<size_t>(j)] += vi * qij / lambda;
            }
        }
        return out;
    };

    double mean = lambda * t;
    std::vector<double> result(p0.size(), 0.0);
    std::vector<double> v = p0;
    double log_weight = -mean;  // ln Poisson(0)
    double accumulated = 0.0;
    for (std::int64_t m = 0;; ++m) {
        double w = std::exp(log_weight);
        for (size_t i = 0; i < v.size(); ++i) result[i] += w * v[i];
        accumulated += w;
        if (1.0 - accumulated < 1e-14 && static_cast<double>(m) > mean) break;
        if (m > 100000)
            throw std::runtime_error("uniformization failed to converge");
        v = step(v);
        log_weight += std::log(mean) - std::log(static_cast<double>(m + 1));
    }
    return result;
}

}  // namespace ctbn

#endif  // CTBN_AMALGAMATION_HPP
