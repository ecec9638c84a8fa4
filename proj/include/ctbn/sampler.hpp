#ifndef CTBN_SAMPLER_HPP
#define CTBN_SAMPLER_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ctbn/random.hpp"
#include "ctbn/trajectory.hpp"

// Forward simulation and benchmark network generators. Sampling collapses the
// per-variable exponential races into a single total-rate clock: draw the
// next event time from exponential(sum of exit rates), pick the transitioning
// variable proportional to its rate, then its target value from the jump row.

namespace ctbn {

inline Trajectory sample_trajectory(const CtbnModel& model, double end_time, std::uint64_t seed) {
    if (!(end_time > 0.0)) throw std::invalid_argument("end_time must be positive");
    const Universe& u = model.universe;
    Rng rng(seed);

    Trajectory traj;
    traj.end_time = end_time;
    traj.initial.resize(static_cast<size_t>(u.size()));
    for (int i = 0; i < u.size(); ++i)
        traj.initial[static_cast<size_t>(i)] =
            rng.categorical(model.initial[static_cast<size_t>(i)], 1.0);

    // Children lists: variables whose context changes when i moves.
    std::vector<std::vector<int>> children(static_cast<size_t>(u.size()));
    for (int i = 0; i < u.size(); ++i)
        for (int p : model.graph.parents[static_cast<size_t>(i)])
            children[static_cast<size_t>(p)].push_back(i);

    std::vector<int> state = traj.initial;
    std::vector<std::int64_t> ctx(static_cast<size_t>(u.size()));
    std::vector<double> rate(static_cast<size_t>(u.size()));
    auto refresh = [&](int i) {
        ctx[static_cast<size_t>(i)] =
            instantiation_index(u, model.graph.parents[static_cast<size_t>(i)], state);
        rate[static_cast<size_t>(i)] = model.cims[static_cast<size_t>(i)].exit_rate(
            ctx[static_cast<size_t>(i)], state[static_cast<size_t>(i)]);
    };
    for (int i = 0; i < u.size(); ++i) refresh(i);

    double t = 0.0;
    for (;;) {
        double total = 0.0;
        for (double r : rate) total += r;
        if (total == 0.0) break;  // absorbing joint state
        double next = t + rng.exponential(total);
        if (next > end_time) break;
        if (next == t) next = std::nextafter(t, end_time);  // enforce strict ordering

        int var = rng.categorical(rate, total);
        const Cim& cim = model.cims[static_cast<size_t>(var)];
        int x = state[static_cast<size_t>(var)];
        int k = u.var(var).n_states();
        std::vector<double> row(static_cast<size_t>(k));
        for (int xp = 0; xp < k; ++xp)
            row[static_cast<size_t>(xp)] =
                (xp == x) ? 0.0 : cim.jump_prob(ctx[static_cast<size_t>(var)], x, xp);
        int xp = rng.categorical(row, 1.0);

        t = next;
        traj.events.push_back(Event{t, var, xp});
        state[static_cast<size_t>(var)] = xp;
        refresh(var);
        for (int child : children[static_cast<size_t>(var)]) refresh(child);
    }
    return traj;
}

// n independent trajectories; trajectory i runs on the stream seed
// mix64(master XOR i).
inline Dataset sample_dataset(const CtbnModel& model, int n_trajectories, double end_time,
                              std::uint64_t master_seed) {
    if (n_trajectories < 0) throw std::invalid_argument("n_trajectories must be nonnegative");
    Dataset d;
    d.universe = model.universe;
    d.trajectories.reserve(static_cast<size_t>(n_trajectories));
    for (int i = 0; i < n_trajectories; ++i)
        d.trajectories.push_back(sample_trajectory(
            model, end_time, derive_stream_seed(master_seed, static_cast<std::uint64_t>(i))));
    return d;
}

// ---------------------------------------------------------------------------
// Benchmark generators.

namespace detail {

inline std::string padded_name(int i, int n) {
    std::string num = std::to_string(i);
    std::string width = std::to_string(n);
    while (num.size() < width.size()) num.insert(num.begin(), '0');
    return "X" + num;
}

}  // namespace detail

// Chain of binary variables. The head flips between its states at `rate` in
// both directions; every other variable moves toward its predecessor's
// current value at `rate` and away from it at rate/10.
inline CtbnModel chain_network(int n_nodes, double rate = 1.0) {
    if (n_nodes < 1) throw std::invalid_argument("chain_network requires n >= 1");
    if (!(rate > 0.0)) throw std::invalid_argument("chain_network requires rate > 0");

    std::vector<VariableSpec> specs;
    for (int i = 1; i <= n_nodes; ++i)
        specs.push_back(VariableSpec{detail::padded_name(i, n_nodes), {"x0", "x1"}});
    Universe u(std::move(specs));

    std::vector<std::vector<int>> parent_lists(static_cast<size_t>(n_nodes));
    for (int i = 1; i < n_nodes; ++i) parent_lists[static_cast<size_t>(i)] = {i - 1};

    CtbnModel m;
    m.universe = u;
    m.graph = make_graph(u, std::move(parent_lists));
    for (int i = 0; i < n_nodes; ++i) {
        std::int64_t contexts = instantiation_count(u, m.graph.parents[static_cast<size_t>(i)]);
        Cim cim(contexts, 2);
        for (std::int64_t ctx = 0; ctx < contexts; ++ctx)
            for (int x = 0; x < 2; ++x) {
                double toward = (i == 0) ? rate
                                         : (x == static_cast<int>(ctx) ? rate / 10.0 : rate);
                cim.exit_rate(ctx, x) = toward;
                fill_uniform_jump_row(cim, ctx, x);  // binary: forced target
            }
        m.cims.push_back(std::move(cim));
        m.initial.push_back({0.5, 0.5});
    }
    return m;
}

// Random binary network: parent sets drawn uniformly among all sets of size
// <= max_parents, exit rates from Gamma(1, 1) (unit exponentials), jump rows
// from Dirichlet(1, ..., 1).
inline CtbnModel random_network(int n_nodes, int max_parents, std::uint64_t seed) {
    if (n_nodes < 1) throw std::invalid_argument("random_network requires n >= 1");
    if (max_parents < 0 || max_parents > n_nodes - 1)
        throw std::invalid_argument("max_parents must lie in [0, n-1]");
    Rng rng(seed);

    std::vector<VariableSpec> specs;
    for (int i = 1; i <= n_nodes; ++i)
        specs.push_back(VariableSpec{detail::padded_name(i, n_nodes), {"x0", "x1"}});
    Universe u(std::move(specs));

    // Sets of size <= cap, uniformly: weight each size by its subset count.
    std::vector<double> size_weights(static_cast<size_t>(max_parents) + 1, 1.0);
    for (int j = 1; j <= max_parents; ++j)
        size_weights[static_cast<size_t>(j)] =
            size_weights[static_cast<size_t>(j - 1)] *
            static_cast<double>(n_nodes - j) / static_cast<double>(j);

    std::vector<std::vector<int>> parent_lists(static_cast<size_t>(n_nodes));
    for (int i = 0; i < n_nodes; ++i) {
        int size = rng.categorical(size_weights);
        std::vector<int> pool;
        for (int j = 0; j < n_nodes; ++j)
            if (j != i) pool.push_back(j);
        for (int j = 0; j < size; ++j) {
            auto pick = static_cast<size_t>(rng.uniform_int(static_cast<std::int64_t>(pool.size())));
            parent_lists[static_cast<size_t>(i)].push_back(pool[pick]);
            pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
        }
    }

    CtbnModel m;
    m.universe = u;
    m.graph = make_graph(u, std::move(parent_lists));
    for (int i = 0; i < n_nodes; ++i) {
        std::int64_t contexts = instantiation_count(u, m.graph.parents[static_cast<size_t>(i)]);
        Cim cim(contexts, 2);
        for (std::int64_t ctx = 0; ctx < contexts; ++ctx)
            for (int x = 0; x < 2; ++x) {
                cim.exit_rate(ctx, x) = rng.exponential(1.0);
                std::vector<double> row = rng.dirichlet_uniform(1);  // binary: single target
                cim.jump_prob(ctx, x, 1 - x) = row[0];
            }
        m.cims.push_back(std::move(cim));
        m.initial.push_back({0.5, 0.5});
    }
    return m;
}

// ---------------------------------------------------------------------------
// Eight-variable drug effect benchmark. The graph contains the
// Hungry -> Eating -> FullStomach -> Hungry cycle; pain depends on falling
// pressure and on the drug concentration, which rises with uptake and is
// damped by a full stomach. The rate constants are fixed, hand-picked values
// scaled so a 6-time-unit trajectory sees roughly 18 transitions.

inline CtbnModel drug_network() {
    std::vector<VariableSpec> specs = {
        {"Eating", {"no", "yes"}},
        {"FullStomach", {"empty", "half", "full"}},
        {"Hungry", {"no", "yes"}},
        {"Uptake", {"no", "yes"}},
        {"Concentration", {"low", "medium", "high"}},
        {"Barometer", {"falling", "steady", "rising"}},
        {"JointPain", {"no", "yes"}},
        {"Drowsy", {"no", "yes"}},
    };
    Universe u(specs);
    int eating = u.index_of("Eating"), stomach = u.index_of("FullStomach"),
        hungry = u.index_of("Hungry"), uptake = u.index_of("Uptake"),
        conc = u.index_of("Concentration"), baro = u.index_of("Barometer"),
        pain = u.index_of("JointPain"), drowsy = u.index_of("Drowsy");

    std::vector<std::vector<int>> parent_lists(specs.size());
    parent_lists[static_cast<size_t>(eating)] = {hungry};
    parent_lists[static_cast<size_t>(stomach)] = {eating};
    parent_lists[static_cast<size_t>(hungry)] = {stomach};
    parent_lists[static_cast<size_t>(conc)] = {stomach, uptake};
    parent_lists[static_cast<size_t>(pain)] = {baro, conc};
    parent_lists[static_cast<size_t>(drowsy)] = {conc};

    CtbnModel m;
    m.universe = u;
    m.graph = make_graph(u, std::move(parent_lists));
    m.cims.resize(specs.size());
    m.initial.resize(specs.size());

    auto binary_cim = [&](std::int64_t contexts) {
        Cim cim(contexts, 2);
        for (std::int64_t ctx = 0; ctx < contexts; ++ctx)
            for (int x = 0; x < 2; ++x) fill_uniform_jump_row(cim, ctx, x);
        return cim;
    };

    // Eating | Hungry: rarely starts when not hungry, stops soon after.
    {
        Cim cim = binary_cim(2);
        cim.exit_rate(0, 0) = 0.05;  // hungry=no, eating=no
        cim.exit_rate(0, 1) = 2.0;
        cim.exit_rate(1, 0) = 1.5;   // hungry=yes
        cim.exit_rate(1, 1) = 1.0;
        m.cims[static_cast<size_t>(eating)] = std::move(cim);
        m.initial[static_cast<size_t>(eating)] = {0.8, 0.2};
    }
    // FullStomach | Eating: fills while eating, empties slowly otherwise.
    {
        Cim cim(2, 3);
        auto set_row = [&](std::int64_t ctx, int x, double q, double p0, double p1, double p2) {
            cim.exit_rate(ctx, x) = q;
            double p[3] = {p0, p1, p2};
            for (int xp = 0; xp < 3; ++xp)
                if (xp != x) cim.jump_prob(ctx, x, xp) = p[xp];
        };
        set_row(0, 0, 0.02, 0.0, 0.95, 0.05);  // eating=no, empty
        set_row(0, 1, 0.30, 0.95, 0.0, 0.05);
        set_row(0, 2, 0.30, 0.05, 0.95, 0.0);
        set_row(1, 0, 1.50, 0.0, 0.95, 0.05);  // eating=yes
        set_row(1, 1, 1.50, 0.05, 0.0, 0.95);
        set_row(1, 2, 0.20, 0.05, 0.95, 0.0);
        m.cims[static_cast<size_t>(stomach)] = std::move(cim);
        m.initial[static_cast<size_t>(stomach)] = {0.5, 0.3, 0.2};
    }
    // Hungry | FullStomach.
    {
        Cim cim = binary_cim(3);
        double onset[3] = {1.0, 0.3, 0.02};   // empty, half, full
        double offset[3] = {0.05, 0.3, 1.2};
        for (int ctx = 0; ctx < 3; ++ctx) {
            cim.exit_rate(ctx, 0) = onset[ctx];
            cim.exit_rate(ctx, 1) = offset[ctx];
        }
        m.cims[static_cast<size_t>(hungry)] = std::move(cim);
        m.initial[static_cast<size_t>(hungry)] = {0.5, 0.5};
    }
    // Uptake: doses arrive and wear off on their own clock.
    {
        Cim cim = binary_cim(1);
        cim.exit_rate(0, 0) = 0.25;
        cim.exit_rate(0, 1) = 0.5;
        m.cims[static_cast<size_t>(uptake)] = std::move(cim);
        m.initial[static_cast<size_t>(uptake)] = {0.9, 0.1};
    }
    // Concentration | FullStomach, Uptake (contexts: stomach slowest).
    {
        Cim cim(6, 3);
        auto set_row = [&](int stomach_val, int uptake_val, int x, double q, double p0, double p1,
                           double p2) {
            std::int64_t ctx = stomach_val * 2 + uptake_val;
            cim.exit_rate(ctx, x) = q;
            double p[3] = {p0, p1, p2};
            for (int xp = 0; xp < 3; ++xp)
                if (xp != x) cim.jump_prob(ctx, x, xp) = p[xp];
        };
        double decay[3] = {0.6, 0.5, 0.4};  // faster decay on an empty stomach
        double rise[3] = {1.2, 0.8, 0.5};   // absorption damped by food
        for (int sv = 0; sv < 3; ++sv) {
            set_row(sv, 0, 0, 0.02, 0.0, 0.9, 0.1);           // uptake=no: drifts up rarely
            set_row(sv, 0, 1, decay[sv], 0.95, 0.0, 0.05);
            set_row(sv, 0, 2, decay[sv], 0.05, 0.95, 0.0);
            set_row(sv, 1, 0, rise[sv], 0.0, 0.9, 0.1);       // uptake=yes: climbs
            set_row(sv, 1, 1, rise[sv], 0.1, 0.0, 0.9);
            set_row(sv, 1, 2, 0.3, 0.05, 0.95, 0.0);
        }
        m.cims[static_cast<size_t>(conc)] = std::move(cim);
        m.initial[static_cast<size_t>(conc)] = {0.8, 0.15, 0.05};
    }
    // Barometer: free-running weather.
    {
        Cim cim(1, 3);
        auto set_row = [&](int x, double q, double p0, double p1, double p2) {
            cim.exit_rate(0, x) = q;
            double p[3] = {p0, p1, p2};
            for (int xp = 0; xp < 3; ++xp)
                if (xp != x) cim.jump_prob(0, x, xp) = p[xp];
        };
        set_row(0, 0.4, 0.0, 0.7, 0.3);
        set_row(1, 0.4, 0.5, 0.0, 0.5);
        set_row(2, 0.4, 0.3, 0.7, 0.0);
        m.cims[static_cast<size_t>(baro)] = std::move(cim);
        m.initial[static_cast<size_t>(baro)] = {0.4, 0.3, 0.3};
    }
    // JointPain | Barometer, Concentration (contexts: barometer slowest).
    {
        Cim cim = binary_cim(9);
        double onset[3][3] = {{1.2, 0.6, 0.1},    // falling pressure
                              {0.6, 0.3, 0.05},   // steady
                              {0.3, 0.15, 0.03}}; // rising
        double relief[3] = {0.1, 0.6, 1.5};       // driven by concentration
        for (int b = 0; b < 3; ++b)
            for (int c = 0; c < 3; ++c) {
                std::int64_t ctx = b * 3 + c;
                cim.exit_rate(ctx, 0) = onset[b][c];
                cim.exit_rate(ctx, 1) = relief[c];
            }
        m.cims[static_cast<size_t>(pain)] = std::move(cim);
        m.initial[static_cast<size_t>(pain)] = {0.8, 0.2};
    }
    // Drowsy | Concentration.
    {
        Cim cim = binary_cim(3);
        double onset[3] = {0.05, 0.3, 1.0};
        double wake[3] = {1.0, 0.4, 0.1};
        for (int ctx = 0; ctx < 3; ++ctx) {
            cim.exit_rate(ctx, 0) = onset[ctx];
            cim.exit_rate(ctx, 1) = wake[ctx];
        }
        m.cims[static_cast<size_t>(drowsy)] = std::move(cim);
        m.initial[static_cast<size_t>(drowsy)] = {0.9, 0.1};
    }
    return m;
}

}  // namespace ctbn

#endif  // CTBN_SAMPLER_HPP
