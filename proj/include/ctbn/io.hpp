#ifndef CTBN_IO_HPP
#define CTBN_IO_HPP

#include <charconv>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ctbn/dbn.hpp"
#include "ctbn/estimation.hpp"
#include "ctbn/model.hpp"
#include "ctbn/trajectory.hpp"

// File formats. Models, priors and DBN models are single JSON documents;
// datasets are JSON Lines, one trajectory per line. Doubles are serialized
// with the shortest representation that parses back to the identical value,
// so write/read round-trips are exact.

namespace ctbn {

using json = nlohmann::json;

// Shortest exact decimal form; used for CSV output.
inline std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
    return std::string(buf, ptr);
}

// Quote a CSV field only when it needs it.
inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

namespace detail {

inline json parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open file");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

inline void write_file(const std::string& path, const std::string& body) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path + ": cannot open file for writing");
    out << body;
    if (!out) throw std::runtime_error(path + ": write failed");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Variables and graphs.

inline json universe_to_json(const Universe& u) {
    json vars = json::array();
    for (const auto& v : u.vars()) vars.push_back({{"name", v.name}, {"states", v.states}});
    return vars;
}

inline Universe universe_from_json(const json& j) {
    std::vector<VariableSpec> specs;
    for (const auto& v : j) {
        VariableSpec spec;
        spec.name = v.at("name").get<std::string>();
        spec.states = v.at("states").get<std::vector<std::string>>();
        specs.push_back(std::move(spec));
    }
    return Universe(std::move(specs));
}

inline json graph_to_json(const Universe& u, const Graph& g) {
    json parents = json::object();
    for (int i = 0; i < u.size(); ++i) {
        json list = json::array();
        for (int p : g.parents[static_cast<size_t>(i)]) list.push_back(u.var(p).name);
        parents[u.var(i).name] = std::move(list);
    }
    return parents;
}

inline Graph graph_from_json(const Universe& u, const json& j) {
    std::vector<std::vector<int>> lists(static_cast<size_t>(u.size()));
    for (const auto& [name, parent_names] : j.items()) {
        int i = u.index_of(name);
        for (const auto& p : parent_names)
            lists[static_cast<size_t>(i)].push_back(u.index_of(p.get<std::string>()));
    }
    return make_graph(u, std::move(lists));
}

// ---------------------------------------------------------------------------
// Models. Instantiation keys follow the canonical "p1=s1,p2=s2" convention;
// jump matrices are stored dense with a zero diagonal.

inline json model_to_json(const CtbnModel& m) {
    const Universe& u = m.universe;
    json doc;
    doc["variables"] = universe_to_json(u);
    doc["graph"] = graph_to_json(u, m.graph);

    json cims = json::object();
    for (int i = 0; i < u.size(); ++i) {
        const Cim& cim = m.cims[static_cast<size_t>(i)];
        const auto& parents = m.graph.parents[static_cast<size_t>(i)];
        json per_inst = json::object();
        auto insts = enumerate_instantiations(u, parents);
        if (static_cast<std::int64_t>(insts.size()) != cim.n_contexts)
            throw std::invalid_argument("model: variable " + u.var(i).name +
                                        " cim does not match its parent set");
        for (std::int64_t ctx = 0; ctx < cim.n_contexts; ++ctx) {
            int k = cim.n_states;
            json q = json::array(), theta = json::array();
            for (int x = 0; x < k; ++x) {
                q.push_back(cim.exit_rate(ctx, x));
                json row = json::array();
                for (int xp = 0; xp < k; ++xp) row.push_back(cim.jump_prob(ctx, x, xp));
                theta.push_back(std::move(row));
            }
            per_inst[instantiation_key(u, parents, insts[static_cast<size_t>(ctx)])] = {
                {"q", std::move(q)}, {"theta", std::move(theta)}};
        }
        cims[u.var(i).name] = std::move(per_inst);
    }
    doc["cims"] = std::move(cims);

    json initial = json::object();
    for (int i = 0; i < u.size(); ++i) initial[u.var(i).name] = m.initial[static_cast<size_t>(i)];
    doc["initial"] = std::move(initial);
    return doc;
}

inline CtbnModel model_from_json(const json& doc, bool require_params = true) {
    CtbnModel m;
    m.universe = universe_from_json(doc.at("variables"));
    m.graph = graph_from_json(m.universe, doc.at("graph"));
    const Universe& u = m.universe;

    if (!require_params && !doc.contains("cims")) {
        // Structure-only document: zero-rate cims and uniform initials.
        for (int i = 0; i < u.size(); ++i) {
            int k = u.var(i).n_states();
            Cim cim(instantiation_count(u, m.graph.parents[static_cast<size_t>(i)]), k);
            for (std::int64_t ctx = 0; ctx < cim.n_contexts; ++ctx)
                for (int x = 0; x < k; ++x) fill_uniform_jump_row(cim, ctx, x);
            m.cims.push_back(std::move(cim));
            m.initial.push_back(std::vector<double>(static_cast<size_t>(k), 1.0 / k));
        }
        return m;
    }

    const json& cims = doc.at("cims");
    for (int i = 0; i < u.size(); ++i) {
        const auto& parents = m.graph.parents[static_cast<size_t>(i)];
        int k = u.var(i).n_states();
        Cim cim(instantiation_count(u, parents), k);
        const json& per_inst = cims.at(u.var(i).name);
        auto insts = enumerate_instantiations(u, parents);
        for (std::int64_t ctx = 0; ctx < cim.n_contexts; ++ctx) {
            std::string key = instantiation_key(u, parents, insts[static_cast<size_t>(ctx)]);
            if (!per_inst.contains(key))
                throw std::runtime_error("model: variable " + u.var(i).name +
                                         " missing instantiation \"" + key + "\"");
            const json& entry = per_inst.at(key);
            const json& q = entry.at("q");
            const json& theta = entry.at("theta");
            if (static_cast<int>(q.size()) != k || static_cast<int>(theta.size()) != k)
                throw std::runtime_error("model: variable " + u.var(i).name +
                                         ": q/theta size mismatch");
            for (int x = 0; x < k; ++x) {
                cim.exit_rate(ctx, x) = q.at(static_cast<size_t>(x)).get<double>();
                const json& row = theta.at(static_cast<size_t>(x));
                if (static_cast<int>(row.size()) != k)
                    throw std::runtime_error("model: variable " + u.var(i).name +
                                             ": theta row size mismatch");
                for (int xp = 0; xp < k; ++xp)
                    cim.jump_prob(ctx, x, xp) = row.at(static_cast<size_t>(xp)).get<double>();
            }
        }
        m.cims.push_back(std::move(cim));
    }

    const json& initial = doc.at("initial");
    for (int i = 0; i < u.size(); ++i)
        m.initial.push_back(initial.at(u.var(i).name).get<std::vector<double>>());
    return m;
}

inline void write_model(const CtbnModel& m, const std::string& path) {
    detail::write_file(path, model_to_json(m).dump(2) + "\n");
}

inline CtbnModel read_model(const std::string& path, bool require_params = true) {
    return model_from_json(detail::parse_file(path), require_params);
}

// ---------------------------------------------------------------------------
// Datasets: JSON Lines, events sorted ascending, UTF-8.
//   {"initial": {"X": "x0", ...}, "end_time": 6.0, "events": [[0.73, "X", "x1"], ...]}

inline json trajectory_to_json(const Universe& u, const Trajectory& traj) {
    json initial = json::object();
    for (int i = 0; i < u.size(); ++i)
        initial[u.var(i).name] =
            u.var(i).states[static_cast<size_t>(traj.initial[static_cast<size_t>(i)])];
    json events = json::array();
    for (const Event& ev : traj.events)
        events.push_back(json::array(
            {ev.time, u.var(ev.variable).name,
             u.var(ev.variable).states[static_cast<size_t>(ev.new_value)]}));
    return {{"initial", std::move(initial)}, {"end_time", traj.end_time},
            {"events", std::move(events)}};
}

inline void write_dataset(const Dataset& d, const std::string& path) {
    std::ostringstream out;
    for (const Trajectory& traj : d.trajectories)
        out << trajectory_to_json(d.universe, traj).dump() << "\n";
    detail::write_file(path, out.str());
}

namespace detail {

inline Trajectory trajectory_from_json(const Universe& u, const json& doc) {
    Trajectory traj;
    traj.initial.assign(static_cast<size_t>(u.size()), -1);
    for (const auto& [name, label] : doc.at("initial").items()) {
        int i = u.index_of(name);
        int s = u.var(i).state_index(label.get<std::string>());
        if (s < 0)
            throw std::runtime_error("unknown state label \"" + label.get<std::string>() +
                                     "\" for variable " + name);
        traj.initial[static_cast<size_t>(i)] = s;
    }
    for (int i = 0; i < u.size(); ++i)
        if (traj.initial[static_cast<size_t>(i)] < 0)
            throw std::runtime_error("initial assignment missing variable " + u.var(i).name);
    traj.end_time = doc.at("end_time").get<double>();
    for (const auto& ev : doc.at("events")) {
        if (!ev.is_array() || ev.size() != 3)
            throw std::runtime_error("event must be [time, variable, state]");
        Event e;
        e.time = ev.at(0).get<double>();
        e.variable = u.index_of(ev.at(1).get<std::string>());
        std::string label = ev.at(2).get<std::string>();
        e.new_value = u.var(e.variable).state_index(label);
        if (e.new_value < 0)
            throw std::runtime_error("unknown state label \"" + label + "\" for variable " +
                                     u.var(e.variable).name);
        traj.events.push_back(e);
    }
    return traj;
}

}  // namespace detail

inline Dataset read_dataset(const std::string& path, const Universe& universe) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open file");
    Dataset d;
    d.universe = universe;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto fail = [&](const std::string& msg) {
            throw std::runtime_error(path + ":line " + std::to_string(line_no) + ": " + msg);
        };
        json doc;
        try {
            doc = json::parse(line);
        } catch (const json::parse_error& e) {
            fail(e.what());
        }
        Trajectory traj;
        try {
            traj = detail::trajectory_from_json(universe, doc);
        } catch (const std::exception& e) {
            fail(e.what());
        }
        auto violations = validate_trajectory(traj, universe);
        if (!violations.empty()) fail(violations.front());
        d.trajectories.push_back(std::move(traj));
    }
    return d;
}

// Universe inference for files with no companion model: variables are the
// keys of the initial assignments, states the union of observed labels, both
// sorted lexicographically.
inline Universe infer_universe(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open file");
    std::map<std::string, std::set<std::string>> seen;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json doc;
        try {
            doc = json::parse(line);
        } catch (const json::parse_error& e) {
            throw std::runtime_error(path + ":line " + std::to_string(line_no) + ": " + e.what());
        }
        for (const auto& [name, label] : doc.at("initial").items())
            seen[name].insert(label.get<std::string>());
        for (const auto& ev : doc.at("events"))
            seen[ev.at(1).get<std::string>()].insert(ev.at(2).get<std::string>());
    }
    std::vector<VariableSpec> specs;
    for (auto& [name, labels] : seen) {
        if (labels.size() < 2)
            throw std::runtime_error(path + ": variable " + name +
                                     " has fewer than 2 observed states; provide a model file");
        specs.push_back(VariableSpec{name, {labels.begin(), labels.end()}});
    }
    return Universe(std::move(specs));
}

inline Dataset read_dataset(const std::string& path) {
    return read_dataset(path, infer_universe(path));
}

// ---------------------------------------------------------------------------
// Priors. The scalar shorthand {"alpha": a, "tau": t} expands to the default
// pattern scaled by a and t; the detailed form fixes every family of a known
// structure:
//   {"families": {"X": {"<inst-key>": {"tau": [...], "alpha_theta": [[...]]}}}}

inline PriorPattern prior_pattern_from_json(const json& doc) {
    PriorPattern p;
    if (doc.contains("alpha")) p.alpha = doc.at("alpha").get<double>();
    if (doc.contains("tau")) p.tau = doc.at("tau").get<double>();
    if (!(p.alpha > 0.0) || !(p.tau > 0.0))
        throw std::runtime_error("prior: alpha and tau must be positive");
    return p;
}

inline PriorPattern read_prior_pattern(const std::string& path) {
    return prior_pattern_from_json(detail::parse_file(path));
}

// Family priors for a fixed structure; falls back to the pattern where the
// document has no "families" section.
inline std::vector<FamilyPrior> family_priors_from_json(const json& doc, const Universe& u,
                                                        const Graph& g) {
    std::vector<FamilyPrior> priors;
    if (!doc.contains("families")) {
        PriorPattern p = prior_pattern_from_json(doc);
        for (int i = 0; i < u.size(); ++i)
            priors.push_back(make_family_prior(
                p, instantiation_count(u, g.parents[static_cast<size_t>(i)]),
                u.var(i).n_states()));
        return priors;
    }
    const json& families = doc.at("families");
    for (int i = 0; i < u.size(); ++i) {
        const auto& parents = g.parents[static_cast<size_t>(i)];
        int k = u.var(i).n_states();
        FamilyPrior prior(instantiation_count(u, parents), k);
        const json& per_inst = families.at(u.var(i).name);
        auto insts = enumerate_instantiations(u, parents);
        for (std::int64_t ctx = 0; ctx < prior.n_contexts; ++ctx) {
            std::string key = instantiation_key(u, parents, insts[static_cast<size_t>(ctx)]);
            const json& entry = per_inst.at(key);
            for (int x = 0; x < k; ++x) {
                double tau = entry.at("tau").at(static_cast<size_t>(x)).get<double>();
                if (!(tau > 0.0))
                    throw std::runtime_error("prior: tau must be positive for " + u.var(i).name);
                prior.tau_at(ctx, x) = tau;
                const json& row = entry.at("alpha_theta").at(static_cast<size_t>(x));
                for (int xp = 0; xp < k; ++xp) {
                    if (xp == x) continue;
                    double a = row.at(static_cast<size_t>(xp)).get<double>();
                    if (!(a > 0.0))
                        throw std::runtime_error("prior: alpha_theta entries must be positive for " +
                                                 u.var(i).name);
                    prior.alpha_jump_at(ctx, x, xp) = a;
                }
            }
        }
        priors.push_back(std::move(prior));
    }
    return priors;
}

// ---------------------------------------------------------------------------
// DBN models.

inline json dbn_to_json(const DbnModel& m) {
    const Universe& u = m.universe;
    json doc;
    doc["variables"] = universe_to_json(u);
    doc["delta_t"] = m.delta_t;
    json parents = json::object(), cpts = json::object(), p_multi = json::object();
    for (int i = 0; i < u.size(); ++i) {
        json list = json::array();
        for (int p : m.parents[static_cast<size_t>(i)]) list.push_back(u.var(p).name);
        parents[u.var(i).name] = std::move(list);

        const auto& ps = m.parents[static_cast<size_t>(i)];
        auto insts = enumerate_instantiations(u, ps);
        int k = u.var(i).n_states();
        json rows = json::object();
        for (size_t ctx = 0; ctx < insts.size(); ++ctx) {
            json row = json::array();
            for (int x = 0; x < k; ++x)
                row.push_back(m.cpt[static_cast<size_t>(i)]
                                   [ctx * static_cast<size_t>(k) + static_cast<size_t>(x)]);
            rows[instantiation_key(u, ps, insts[ctx])] = std::move(row);
        }
        cpts[u.var(i).name] = std::move(rows);
        p_multi[u.var(i).name] = m.p_multi[static_cast<size_t>(i)];
    }
    doc["parents"] = std::move(parents);
    doc["cpts"] = std::move(cpts);
    doc["p_multi"] = std::move(p_multi);
    return doc;
}

inline DbnModel dbn_from_json(const json& doc) {
    DbnModel m;
    m.universe = universe_from_json(doc.at("variables"));
    const Universe& u = m.universe;
    m.delta_t = doc.at("delta_t").get<double>();
    if (!(m.delta_t > 0.0)) throw std::runtime_error("dbn: delta_t must be positive");

    m.parents.resize(static_cast<size_t>(u.size()));
    const json& parents = doc.at("parents");
    for (int i = 0; i < u.size(); ++i) {
        std::vector<int> list;
        for (const auto& p : parents.at(u.var(i).name))
            list.push_back(u.index_of(p.get<std::string>()));
        // A DBN variable may condition on its own previous-slice value, so
        // only sort and deduplicate.
        std::sort(list.begin(), list.end(),
                  [&](int a, int b) { return u.var(a).name < u.var(b).name; });
        if (std::adjacent_find(list.begin(), list.end()) != list.end())
            throw std::runtime_error("dbn: duplicate parent for " + u.var(i).name);
        m.parents[static_cast<size_t>(i)] = std::move(list);
    }

    const json& cpts = doc.at("cpts");
    const json& p_multi = doc.at("p_multi");
    for (int i = 0; i < u.size(); ++i) {
        const auto& ps = m.parents[static_cast<size_t>(i)];
        int k = u.var(i).n_states();
        auto insts = enumerate_instantiations(u, ps);
        std::vector<double> cpt(insts.size() * static_cast<size_t>(k));
        const json& rows = cpts.at(u.var(i).name);
        for (size_t ctx = 0; ctx < insts.size(); ++ctx) {
            const json& row = rows.at(instantiation_key(u, ps, insts[ctx]));
            double sum = 0.0;
            for (int x = 0; x < k; ++x) {
                double p = row.at(static_cast<size_t>(x)).get<double>();
                if (!(p >= 0.0))
                    throw std::runtime_error("dbn: negative CPT entry for " + u.var(i).name);
                sum += p;
                cpt[ctx * static_cast<size_t>(k) + static_cast<size_t>(x)] = p;
            }
            if (std::abs(sum - 1.0) > kSimplexTol)
                throw std::runtime_error("dbn: CPT row of " + u.var(i).name +
                                         " sums to " + format_double(sum));
        }
        m.cpt.push_back(std::move(cpt));
        double pm = p_multi.at(u.var(i).name).get<double>();
        if (!(pm >= 0.0) || !(pm <= 1.0))
            throw std::runtime_error("dbn: p_multi of " + u.var(i).name + " outside [0, 1]");
        m.p_multi.push_back(pm);
    }
    return m;
}

inline void write_dbn(const DbnModel& m, const std::string& path) {
    detail::write_file(path, dbn_to_json(m).dump(2) + "\n");
}

inline DbnModel read_dbn(const std::string& path) {
    return dbn_from_json(detail::parse_file(path));
}

}  // namespace ctbn

#endif  // CTBN_IO_HPP
