#ifndef CTBN_MODEL_HPP
#define CTBN_MODEL_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

// Core domain types for continuous-time Bayesian networks: variables,
// dependency graphs (cycles allowed), conditional intensity matrices and
// whole models, plus validation and parameter counting.

namespace ctbn {

// Simplex / row-sum tolerance used by validation checks.
inline constexpr double kSimplexTol = 1e-12;

struct VariableSpec {
    std::string name;
    std::vector<std::string> states;

    int n_states() const { return static_cast<int>(states.size()); }

    int state_index(const std::string& label) const {
        for (int i = 0; i < n_states(); ++i)
            if (states[i] == label) return i;
        return -1;
    }

    bool operator==(const VariableSpec& o) const {
        return name == o.name && states == o.states;
    }
};

// The set of variables a model or dataset is defined over. Index order is
// declaration order; lookups by name are exact.
class Universe {
public:
    Universe() = default;

    explicit Universe(std::vector<VariableSpec> vars) : vars_(std::move(vars)) {
        for (int i = 0; i < static_cast<int>(vars_.size()); ++i) {
            auto [it, inserted] = index_.emplace(vars_[i].name, i);
            if (!inserted)
                throw std::invalid_argument("duplicate variable name: " + vars_[i].name);
        }
    }

    int size() const { return static_cast<int>(vars_.size()); }
    const VariableSpec& var(int i) const { return vars_.at(static_cast<size_t>(i)); }
    const std::vector<VariableSpec>& vars() const { return vars_; }

    // -1 when absent.
    int find(const std::string& name) const {
        auto it = index_.find(name);
        return it == index_.end() ? -1 : it->second;
    }

    int index_of(const std::string& name) const {
        int i = find(name);
        if (i < 0) throw std::invalid_argument("unknown variable: " + name);
        return i;
    }

    bool operator==(const Universe& o) const { return vars_ == o.vars_; }
    bool operator!=(const Universe& o) const { return !(*this == o); }

private:
    std::vector<VariableSpec> vars_;
    std::map<std::string, int> index_;
};

// Returns the parent list sorted by variable name (the canonical order used
// for instantiation enumeration and serialized keys). Rejects self-parents
// and duplicates.
inline std::vector<int> canonical_parents(const Universe& u, std::vector<int> parents, int child) {
    for (int p : parents) {
        if (p < 0 || p >= u.size())
            throw std::invalid_argument("unknown variable index in parent set");
        if (p == child)
            throw std::invalid_argument("variable " + u.var(child).name + " listed as its own parent");
    }
    std::sort(parents.begin(), parents.end(),
              [&](int a, int b) { return u.var(a).name < u.var(b).name; });
    if (std::adjacent_find(parents.begin(), parents.end()) != parents.end())
        throw std::invalid_argument("duplicate parent in parent set");
    return parents;
}

// Directed dependency graph over a universe. Cycles are permitted; parent
// lists are kept in canonical (name-sorted) order.
struct Graph {
    std::vector<std::vector<int>> parents;

    int n_vars() const { return static_cast<int>(parents.size()); }

    bool has_edge(int from, int to) const {
        const auto& ps = parents.at(static_cast<size_t>(to));
        return std::find(ps.begin(), ps.end(), from) != ps.end();
    }

    bool operator==(const Graph& o) const { return parents == o.parents; }
    bool operator!=(const Graph& o) const { return !(*this == o); }
};

inline Graph make_graph(const Universe& u, std::vector<std::vector<int>> parent_lists) {
    if (static_cast<int>(parent_lists.size()) != u.size())
        throw std::invalid_argument("graph parent-list count does not match universe");
    Graph g;
    g.parents.resize(parent_lists.size());
    for (int i = 0; i < u.size(); ++i)
        g.parents[i] = canonical_parents(u, std::move(parent_lists[i]), i);
    return g;
}

inline Graph empty_graph(const Universe& u) {
    Graph g;
    g.parents.assign(static_cast<size_t>(u.size()), {});
    return g;
}

inline Graph full_graph(const Universe& u) {
    std::vector<std::vector<int>> lists(static_cast<size_t>(u.size()));
    for (int i = 0; i < u.size(); ++i)
        for (int j = 0; j < u.size(); ++j)
            if (j != i) lists[static_cast<size_t>(i)].push_back(j);
    return make_graph(u, std::move(lists));
}

// Number of parent instantiations for a canonical parent list.
inline std::int64_t instantiation_count(const Universe& u, const std::vector<int>& parents) {
    std::int64_t n = 1;
    for (int p : parents) n *= u.var(p).n_states();
    return n;
}

// Instantiation index of the parent values picked out of a full assignment.
// The first (name-smallest) parent varies slowest.
inline int instantiation_index(const Universe& u, const std::vector<int>& parents,
                               const std::vector<int>& full_state) {
    int idx = 0;
    for (int p : parents)
        idx = idx * u.var(p).n_states() + full_state[static_cast<size_t>(p)];
    return idx;
}

// All instantiations of a canonical parent list, in enumeration order. Each
// entry holds one state index per parent, aligned with the parent list.
inline std::vector<std::vector<int>> enumerate_instantiations(const Universe& u,
                                                              const std::vector<int>& parents) {
    std::int64_t total = instantiation_count(u, parents);
    std::vector<std::vector<int>> out;
    out.reserve(static_cast<size_t>(total));
    std::vector<int> cur(parents.size(), 0);
    for (std::int64_t n = 0; n < total; ++n) {
        out.push_back(cur);
        for (int j = static_cast<int>(parents.size()) - 1; j >= 0; --j) {
            if (++cur[static_cast<size_t>(j)] < u.var(parents[static_cast<size_t>(j)]).n_states()) break;
            cur[static_cast<size_t>(j)] = 0;
        }
    }
    return out;
}

// Serialized key for an instantiation: "p1=s1,p2=s2" in canonical parent
// order, "" for the empty parent set.
inline std::string instantiation_key(const Universe& u, const std::vector<int>& parents,
                                     const std::vector<int>& inst) {
    std::string key;
    for (size_t j = 0; j < parents.size(); ++j) {
        if (j > 0) key += ',';
        const VariableSpec& p = u.var(parents[j]);
        key += p.name;
        key += '=';
        key += p.states[static_cast<size_t>(inst[j])];
    }
    return key;
}

// Conditional intensity matrix for one variable: per parent instantiation u,
// an exit rate per state and a jump distribution over the other states.
// jump_probs is stored dense k x k with a structurally zero diagonal.
struct Cim {
    int n_states = 0;
    std::int64_t n_contexts = 0;
    std::vector<double> exit_rates;  // [u * k + x]
    std::vector<double> jump_probs;  // [(u * k + x) * k + x']

    Cim() = default;
    Cim(std::int64_t contexts, int k)
        : n_states(k),
          n_contexts(contexts),
          exit_rates(static_cast<size_t>(contexts * k), 0.0),
          jump_probs(static_cast<size_t>(contexts * k * k), 0.0) {}

    double exit_rate(std::int64_t u, int x) const {
        return exit_rates[static_cast<size_t>(u * n_states + x)];
    }
    double& exit_rate(std::int64_t u, int x) {
        return exit_rates[static_cast<size_t>(u * n_states + x)];
    }
    double jump_prob(std::int64_t u, int x, int xp) const {
        return jump_probs[static_cast<size_t>((u * n_states + x) * n_states + xp)];
    }
    double& jump_prob(std::int64_t u, int x, int xp) {
        return jump_probs[static_cast<size_t>((u * n_states + x) * n_states + xp)];
    }

    bool operator==(const Cim& o) const {
        return n_states == o.n_states && n_contexts == o.n_contexts &&
               exit_rates == o.exit_rates && jump_probs == o.jump_probs;
    }
};

// For a binary variable the jump target is forced, so rows can be filled
// mechanically. Away-diagonal uniform rows are the stated convention for
// states with zero exit rate.
inline void fill_uniform_jump_row(Cim& cim, std::int64_t u, int x) {
    int k = cim.n_states;
    double p = 1.0 / (k - 1);
    for (int xp = 0; xp < k; ++xp) cim.jump_prob(u, x, xp) = (xp == x) ? 0.0 : p;
}

struct CtbnModel {
    Universe universe;
    Graph graph;
    std::vector<Cim> cims;                       // one per variable
    std::vector<std::vector<double>> initial;    // one multinomial per variable

    int n_vars() const { return universe.size(); }
};

// ---------------------------------------------------------------------------
// validate_model: violations are data, not failures.

namespace detail {

inline void validate_specs(const Universe& u, std::vector<std::string>& report) {
    for (int i = 0; i < u.size(); ++i) {
        const VariableSpec& v = u.var(i);
        if (v.n_states() < 2)
            report.push_back("variable " + v.name + ": fewer than 2 states");
        std::vector<std::string> labels = v.states;
        std::sort(labels.begin(), labels.end());
        if (std::adjacent_find(labels.begin(), labels.end()) != labels.end())
            report.push_back("variable " + v.name + ": duplicate state label");
    }
}

}  // namespace detail

inline std::vector<std::string> validate_model(const CtbnModel& m) {
    std::vector<std::string> report;
    const Universe& u = m.universe;
    detail::validate_specs(u, report);

    if (m.graph.n_vars() != u.size())
        report.push_back("graph size does not match variable count");
    if (static_cast<int>(m.cims.size()) != u.size())
        report.push_back("cim count does not match variable count");
    if (static_cast<int>(m.initial.size()) != u.size())
        report.push_back("initial-distribution count does not match variable count");

    for (int i = 0; i < u.size() && i < m.graph.n_vars(); ++i) {
        const VariableSpec& v = u.var(i);
        for (int p : m.graph.parents[static_cast<size_t>(i)]) {
            if (p < 0 || p >= u.size())
                report.push_back("variable " + v.name + ": parent index out of range");
            else if (p == i)
                report.push_back("variable " + v.name + ": self-parent");
        }
        auto ps = m.graph.parents[static_cast<size_t>(i)];
        std::sort(ps.begin(), ps.end());
        if (std::adjacent_find(ps.begin(), ps.end()) != ps.end())
            report.push_back("variable " + v.name + ": duplicate parent");

        if (i >= static_cast<int>(m.cims.size())) continue;
        const Cim& cim = m.cims[static_cast<size_t>(i)];
        int k = v.n_states();
        std::int64_t want_contexts = instantiation_count(u, m.graph.parents[static_cast<size_t>(i)]);
        if (cim.n_states != k || cim.n_contexts != want_contexts) {
            report.push_back("variable " + v.name + ": cim shape mismatch");
            continue;
        }
        for (std::int64_t ctx = 0; ctx < cim.n_contexts; ++ctx) {
            auto where = [&](int x) {
                return "variable " + v.name + ", instantiation " + std::to_string(ctx) +
                       ", state " + v.states[static_cast<size_t>(x)];
            };
            for (int x = 0; x < k; ++x) {
                double q = cim.exit_rate(ctx, x);
                if (!(q >= 0.0) || !std::isfinite(q))
                    report.push_back(where(x) + ": negative or non-finite exit rate");
                double row = 0.0;
                for (int xp = 0; xp < k; ++xp) {
                    double th = cim.jump_prob(ctx, x, xp);
                    if (xp == x) {
                        if (th != 0.0)
                            report.push_back(where(x) + ": nonzero diagonal jump entry");
                        continue;
                    }
                    if (!(th >= 0.0) || !std::isfinite(th))
                        report.push_back(where(x) + ": negative or non-finite jump probability");
                    row += th;
                }
                if (q > 0.0 && std::abs(row - 1.0) > kSimplexTol)
                    report.push_back(where(x) + ": jump row sums to " + std::to_string(row));
            }
        }
    }

    for (int i = 0; i < u.size() && i < static_cast<int>(m.initial.size()); ++i) {
        const VariableSpec& v = u.var(i);
        const auto& p0 = m.initial[static_cast<size_t>(i)];
        if (static_cast<int>(p0.size()) != v.n_states()) {
            report.push_back("variable " + v.name + ": initial distribution size mismatch");
            continue;
        }
        double s = 0.0;
        for (double p : p0) {
            if (!(p >= 0.0) || !std::isfinite(p))
                report.push_back("variable " + v.name + ": negative initial probability");
            s += p;
        }
        if (std::abs(s - 1.0) > kSimplexTol)
            report.push_back("variable " + v.name + ": initial probabilities sum to " + std::to_string(s));
    }
    return report;
}

// ---------------------------------------------------------------------------
// dimension: independent parameter count of a structure. Per variable and
// parent instantiation there are k free rates plus k*(k-2) free jump entries,
// i.e. k*(k-1) parameters per instantiation.

inline std::int64_t family_dimension(const Universe& u, int var, const std::vector<int>& parents) {
    if (var < 0 || var >= u.size()) throw std::invalid_argument("unknown variable index");
    std::int64_t k = u.var(var).n_states();
    return instantiation_count(u, parents) * k * (k - 1);
}

inline std::int64_t dimension(const Graph& g, const Universe& u) {
    if (g.n_vars() != u.size())
        throw std::invalid_argument("graph does not match variable universe");
    std::int64_t total = 0;
    for (int i = 0; i < u.size(); ++i)
        total += family_dimension(u, i, g.parents[static_cast<size_t>(i)]);
    return total;
}

// ---------------------------------------------------------------------------
// intensity_matrix: the k x k generator selected by one parent instantiation.
// Off-diagonal [x][x'] = q_x * theta_{xx'}, diagonal -q_x; rows sum to zero.

inline std::vector<double> intensity_matrix(const Cim& cim, std::int64_t u) {
    if (u < 0 || u >= cim.n_contexts) throw std::invalid_argument("unknown parent instantiation");
    int k = cim.n_states;
    std::vector<double> q(static_cast<size_t>(k) * static_cast<size_t>(k), 0.0);
    for (int x = 0; x < k; ++x) {
        double rate = cim.exit_rate(u, x);
        double off = 0.0;
        for (int xp = 0; xp < k; ++xp) {
            if (xp == x) continue;
            double e = rate * cim.jump_prob(u, x, xp);
            q[static_cast<size_t>(x * k + xp)] = e;
            off += e;
        }
        q[static_cast<size_t>(x * k + x)] = -off;
    }
    return q;
}

}  // namespace ctbn

#endif  // CTBN_MODEL_HPP
