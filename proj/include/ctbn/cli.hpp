#ifndef CTBN_CLI_HPP
#define CTBN_CLI_HPP

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ctbn/amalgamation.hpp"
#include "ctbn/experiments.hpp"
#include "ctbn/io.hpp"

// Command-line front end. Exit codes: 0 success, 1 usage error, 2 data or
// validation error. Diagnostics go to stderr; the CTBN_LOG environment
// variable (error|warn|info|debug) selects the verbosity.

namespace ctbn {
namespace cli {

enum class LogLevel { error = 0, warn = 1, info = 2, debug = 3 };

inline LogLevel log_threshold() {
    const char* env = std::getenv("CTBN_LOG");
    if (!env) return LogLevel::warn;
    std::string v(env);
    if (v == "error") return LogLevel::error;
    if (v == "warn") return LogLevel::warn;
    if (v == "info") return LogLevel::info;
    if (v == "debug") return LogLevel::debug;
    return LogLevel::warn;
}

inline void log(LogLevel level, const std::string& msg) {
    static const char* names[] = {"error", "warn", "info", "debug"};
    if (static_cast<int>(level) <= static_cast<int>(log_threshold()))
        std::cerr << "[" << names[static_cast<int>(level)] << "] " << msg << "\n";
}

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

// "1..10" or "1,4,9".
inline std::vector<std::uint64_t> parse_seed_list(const std::string& s) {
    std::vector<std::uint64_t> seeds;
    auto dots = s.find("..");
    if (dots != std::string::npos) {
        std::uint64_t lo = std::stoull(s.substr(0, dots));
        std::uint64_t hi = std::stoull(s.substr(dots + 2));
        if (hi < lo) throw std::invalid_argument("seed range is empty: " + s);
        for (std::uint64_t v = lo; v <= hi; ++v) seeds.push_back(v);
        return seeds;
    }
    for (const auto& part : split(s, ','))
        if (!part.empty()) seeds.push_back(std::stoull(part));
    return seeds;
}

inline std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    for (const auto& part : split(s, ','))
        if (!part.empty()) out.push_back(std::stod(part));
    return out;
}

inline Dataset load_dataset(const std::string& data_path, const std::string& model_path) {
    if (!model_path.empty()) {
        CtbnModel m = read_model(model_path, /*require_params=*/false);
        return read_dataset(data_path, m.universe);
    }
    log(LogLevel::info, "no --model given; inferring the variable universe from " + data_path);
    return read_dataset(data_path);
}

inline std::vector<int> parse_parent_names(const Universe& u, const std::string& csv, int child) {
    std::vector<int> parents;
    if (!csv.empty())
        for (const auto& name : split(csv, ','))
            if (!name.empty()) parents.push_back(u.index_of(name));
    return canonical_parents(u, std::move(parents), child);
}

inline std::string family_stats_csv(const Universe& u, const FamilyStats& stats) {
    const VariableSpec& v = u.var(stats.variable);
    std::string body = "variable,instantiation,state,T";
    for (const auto& s : v.states) body += ",m_to_" + s;
    body += "\n";
    auto insts = enumerate_instantiations(u, stats.parents);
    for (std::int64_t ctx = 0; ctx < stats.n_contexts; ++ctx) {
        std::string key = instantiation_key(u, stats.parents, insts[static_cast<size_t>(ctx)]);
        for (int x = 0; x < stats.n_states; ++x) {
            body += csv_field(v.name) + "," + csv_field(key) + "," +
                    csv_field(v.states[static_cast<size_t>(x)]) + "," +
                    format_double(stats.dwell(ctx, x));
            for (int xp = 0; xp < stats.n_states; ++xp)
                body += "," + std::to_string(xp == x ? 0 : stats.jumps(ctx, x, xp));
            body += "\n";
        }
    }
    return body;
}

inline std::string score_csv(const Universe& u, const Graph& g,
                             const std::vector<FamilyScore>& scores) {
    std::string body = "variable,parents,log_marg_q,log_marg_theta,log_prior,total\n";
    for (int i = 0; i < u.size(); ++i) {
        std::string parents;
        for (size_t j = 0; j < g.parents[static_cast<size_t>(i)].size(); ++j) {
            if (j > 0) parents += '|';
            parents += u.var(g.parents[static_cast<size_t>(i)][j]).name;
        }
        const FamilyScore& s = scores[static_cast<size_t>(i)];
        body += csv_field(u.var(i).name) + "," + csv_field(parents) + "," +
                format_double(s.log_marg_q) + "," + format_double(s.log_marg_theta) + "," +
                format_double(s.log_structure_prior) + "," + format_double(s.total) + "\n";
    }
    return body;
}

inline std::string joint_intensity_csv(const JointIntensity& joint) {
    std::string body = "state";
    for (std::int64_t s = 0; s < joint.n_states; ++s)
        body += "," + csv_field(joint_state_label(joint, s));
    body += "\n";
    for (std::int64_t s = 0; s < joint.n_states; ++s) {
        body += csv_field(joint_state_label(joint, s));
        for (std::int64_t t = 0; t < joint.n_states; ++t)
            body += "," + format_double(joint.at(s, t));
        body += "\n";
    }
    return body;
}

inline void require_valid(const CtbnModel& m, const std::string& origin) {
    auto report = validate_model(m);
    if (report.empty()) return;
    for (const auto& line : report) log(LogLevel::error, origin + ": " + line);
    throw std::runtime_error(origin + ": model failed validation (" +
                             std::to_string(report.size()) + " violation(s))");
}

}  // namespace detail

// ---------------------------------------------------------------------------

inline int run_cli(std::vector<std::string> args) {
    CLI::App app{"continuous-time Bayesian network learning toolkit"};
    app.require_subcommand(1);

    // --- sample ---
    auto* sample = app.add_subcommand("sample", "simulate trajectories from a model");
    std::string sample_model, sample_builtin, sample_out, sample_write_model;
    int sample_n = 1, sample_nodes = 4, sample_gen_max_parents = 2;
    double sample_end = 1.0, sample_rate = 1.0;
    std::uint64_t sample_seed = 0, sample_gen_seed = 0;
    sample->add_option("--model", sample_model, "model JSON file");
    sample->add_option("--builtin", sample_builtin, "built-in generator: chain, drug or random");
    sample->add_option("--nodes", sample_nodes, "node count for built-in generators");
    sample->add_option("--rate", sample_rate, "rate scale for the chain generator");
    sample->add_option("--gen-max-parents", sample_gen_max_parents,
                       "parent cap for the random generator");
    sample->add_option("--gen-seed", sample_gen_seed, "seed of the random generator's structure");
    sample->add_option("--n", sample_n, "number of trajectories")->required();
    sample->add_option("--end-time", sample_end, "trajectory end time")->required()->check(CLI::PositiveNumber);
    sample->add_option("--seed", sample_seed, "sampling seed")->required();
    sample->add_option("--out", sample_out, "output dataset (JSON Lines)")->required();
    sample->add_option("--write-model", sample_write_model,
                       "also write the generating model to this path");

    // --- stats ---
    auto* stats = app.add_subcommand("stats", "print family sufficient statistics as CSV");
    std::string stats_data, stats_model, stats_variable, stats_parents;
    stats->add_option("--data", stats_data, "dataset (JSON Lines)")->required();
    stats->add_option("--model", stats_model, "model file supplying the variable universe");
    stats->add_option("--variable", stats_variable, "variable name")->required();
    stats->add_option("--parents", stats_parents, "comma-separated parent names");

    // --- fit-params ---
    auto* fit = app.add_subcommand("fit-params", "fit parameters for a fixed structure");
    std::string fit_data, fit_model, fit_prior, fit_out;
    double fit_alpha = 1.0, fit_tau = 1.0;
    bool fit_mle = false;
    fit->add_option("--data", fit_data, "dataset (JSON Lines)")->required();
    fit->add_option("--model", fit_model, "model or structure file with the graph")->required();
    fit->add_option("--prior", fit_prior, "prior JSON file (shorthand or per-family)");
    fit->add_option("--alpha", fit_alpha, "prior pattern alpha")->check(CLI::PositiveNumber);
    fit->add_option("--tau", fit_tau, "prior pattern tau")->check(CLI::PositiveNumber);
    fit->add_flag("--mle", fit_mle, "maximum-likelihood fit instead of Bayesian");
    fit->add_option("--out", fit_out, "output model file")->required();

    // --- learn ---
    auto* learn = app.add_subcommand("learn", "learn structure and parameters");
    std::string learn_data, learn_model, learn_method = "greedy", learn_out;
    int learn_max_parents = 2, learn_restarts = 0;
    double learn_alpha = 1.0, learn_tau = 1.0, learn_penalty = 0.0;
    std::uint64_t learn_seed = 0;
    learn->add_option("--data", learn_data, "dataset (JSON Lines)")->required();
    learn->add_option("--model", learn_model, "model file supplying the variable universe");
    learn->add_option("--max-parents", learn_max_parents, "parent-set size cap")->required();
    learn->add_option("--method", learn_method, "greedy or exhaustive")
        ->check(CLI::IsMember({"greedy", "exhaustive"}));
    auto* learn_seed_opt = learn->add_option("--seed", learn_seed, "seed for random restarts");
    learn->add_option("--restarts", learn_restarts, "extra greedy restarts from random sets");
    learn->add_option("--alpha", learn_alpha, "prior pattern alpha")->check(CLI::PositiveNumber);
    learn->add_option("--tau", learn_tau, "prior pattern tau")->check(CLI::PositiveNumber);
    learn->add_option("--penalty", learn_penalty, "per-parent log structure penalty")->check(CLI::NonNegativeNumber);
    learn->add_option("--out", learn_out, "output model file")->required();

    // --- score ---
    auto* score = app.add_subcommand("score", "per-family score breakdown as CSV");
    std::string score_data, score_model;
    double score_alpha = 1.0, score_tau = 1.0, score_penalty = 0.0;
    score->add_option("--data", score_data, "dataset (JSON Lines)")->required();
    score->add_option("--model", score_model, "model or structure file with the graph")
        ->required();
    score->add_option("--alpha", score_alpha, "prior pattern alpha")->check(CLI::PositiveNumber);
    score->add_option("--tau", score_tau, "prior pattern tau")->check(CLI::PositiveNumber);
    score->add_option("--penalty", score_penalty, "per-parent log structure penalty")->check(CLI::NonNegativeNumber);

    // --- loglik ---
    auto* ll = app.add_subcommand("loglik", "trajectory log-likelihood under a model");
    std::string ll_data, ll_model;
    bool ll_initial = false;
    ll->add_option("--model", ll_model, "model JSON file")->required();
    ll->add_option("--data", ll_data, "dataset (JSON Lines)")->required();
    ll->add_flag("--include-initial", ll_initial, "add the initial-state log-probability");

    // --- amalgamate ---
    auto* amalg = app.add_subcommand("amalgamate", "joint intensity matrix as CSV");
    std::string amalg_model, amalg_out;
    std::int64_t amalg_cap = kDefaultJointStateCap;
    amalg->add_option("--model", amalg_model, "model JSON file")->required();
    amalg->add_option("--out", amalg_out, "output CSV (stdout when omitted)");
    amalg->add_option("--cap", amalg_cap, "joint state-space cap");

    // --- minimal-smap ---
    auto* smap = app.add_subcommand("minimal-smap",
                                    "recover the minimal structure of a model's joint process");
    std::string smap_model;
    double smap_tol = 1e-9;
    smap->add_option("--model", smap_model, "model JSON file")->required();
    smap->add_option("--tol", smap_tol, "intensity equality tolerance");

    // --- dbn-learn ---
    auto* dlearn = app.add_subcommand("dbn-learn", "learn a time-sliced DBN baseline");
    std::string dlearn_data, dlearn_model, dlearn_out;
    double dlearn_delta = 1.0, dlearn_strength = 1.0;
    int dlearn_max_parents = 3;
    dlearn->add_option("--data", dlearn_data, "dataset (JSON Lines)")->required();
    dlearn->add_option("--model", dlearn_model, "model file supplying the variable universe");
    dlearn->add_option("--delta-t", dlearn_delta, "slice width")->required()->check(CLI::PositiveNumber);
    dlearn->add_option("--max-parents", dlearn_max_parents, "previous-slice parent cap")
        ->required();
    dlearn->add_option("--prior-strength", dlearn_strength, "symmetric Dirichlet strength")->check(CLI::PositiveNumber);
    dlearn->add_option("--out", dlearn_out, "output DBN file")->required();

    // --- dbn-loglik ---
    auto* dll = app.add_subcommand("dbn-loglik", "augmented DBN log-likelihood of a dataset");
    std::string dll_data, dll_model;
    dll->add_option("--model", dll_model, "DBN JSON file")->required();
    dll->add_option("--data", dll_data, "dataset (JSON Lines)")->required();

    // --- experiment ---
    auto* exp = app.add_subcommand("experiment", "run a reproducible experiment grid");
    std::string exp_name, exp_config, exp_seeds, exp_sizes, exp_out, exp_method, exp_deltas;
    int exp_max_parents = -1, exp_jobs = 0;
    double exp_alpha = -1.0, exp_tau = -1.0, exp_penalty = -1.0;
    exp->add_option("name", exp_name, "chain, random, drug or dbn-compare")->required();
    exp->add_option("--config", exp_config, "experiment config JSON file");
    exp->add_option("--seeds", exp_seeds, "seed list: 1..10 or 1,4,9");
    exp->add_option("--sizes", exp_sizes, "comma-separated data sizes");
    exp->add_option("--max-parents", exp_max_parents, "parent-set size cap");
    exp->add_option("--method", exp_method, "greedy or exhaustive")
        ->check(CLI::IsMember({"", "greedy", "exhaustive"}));
    exp->add_option("--dbn-deltas", exp_deltas, "comma-separated DBN slice widths");
    exp->add_option("--alpha", exp_alpha, "prior pattern alpha")->check(CLI::PositiveNumber);
    exp->add_option("--tau", exp_tau, "prior pattern tau")->check(CLI::PositiveNumber);
    exp->add_option("--penalty", exp_penalty, "per-parent log structure penalty")->check(CLI::NonNegativeNumber);
    exp->add_option("--jobs", exp_jobs, "parallel grid workers");
    exp->add_option("--out", exp_out, "output directory")->required();

    std::vector<const char*> argv;
    argv.push_back("ctbn");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*sample) {
            CtbnModel model;
            if (!sample_model.empty()) {
                model = read_model(sample_model);
            } else if (sample_builtin == "chain") {
                model = chain_network(sample_nodes, sample_rate);
            } else if (sample_builtin == "drug") {
                model = drug_network();
            } else if (sample_builtin == "random") {
                model = random_network(sample_nodes, sample_gen_max_parents, sample_gen_seed);
            } else {
                std::cerr << "sample: pass --model FILE or --builtin chain|drug|random\n";
                return 1;
            }
            detail::require_valid(model, "sample");
            Dataset d = sample_dataset(model, sample_n, sample_end, sample_seed);
            write_dataset(d, sample_out);
            log(LogLevel::info, "wrote " + std::to_string(d.size()) + " trajectories (" +
                                    std::to_string(d.total_events()) + " events) to " + sample_out);
            if (!sample_write_model.empty()) write_model(model, sample_write_model);
            return 0;
        }

        if (*stats) {
            Dataset d = detail::load_dataset(stats_data, stats_model);
            int var = d.universe.index_of(stats_variable);
            auto parents = detail::parse_parent_names(d.universe, stats_parents, var);
            std::cout << detail::family_stats_csv(d.universe, family_stats(d, var, parents));
            return 0;
        }

        if (*fit) {
            CtbnModel structure = read_model(fit_model, /*require_params=*/false);
            Dataset d = read_dataset(fit_data, structure.universe);
            CtbnModel out;
            if (fit_mle) {
                out.universe = structure.universe;
                out.graph = structure.graph;
                int degenerate = 0;
                for (int i = 0; i < out.universe.size(); ++i) {
                    MleResult r =
                        mle(family_stats(d, i, structure.graph.parents[static_cast<size_t>(i)]));
                    if (r.any_degenerate()) ++degenerate;
                    out.cims.push_back(std::move(r.cim));
                }
                out.initial = fit_initial_distribution(d);
                if (degenerate > 0)
                    log(LogLevel::warn, std::to_string(degenerate) +
                                            " families had unobserved cells; zero rates and "
                                            "uniform jump rows were substituted");
            } else if (!fit_prior.empty()) {
                json doc = ctbn::detail::parse_file(fit_prior);
                auto priors =
                    family_priors_from_json(doc, structure.universe, structure.graph);
                out.universe = structure.universe;
                out.graph = structure.graph;
                for (int i = 0; i < out.universe.size(); ++i)
                    out.cims.push_back(expected_params(
                        priors[static_cast<size_t>(i)],
                        family_stats(d, i, structure.graph.parents[static_cast<size_t>(i)])));
                out.initial = fit_initial_distribution(d);
            } else {
                out = fit_params(structure.graph, d, PriorPattern{fit_alpha, fit_tau});
            }
            write_model(out, fit_out);
            return 0;
        }

        if (*learn) {
            if (learn_restarts > 0 && learn_seed_opt->count() == 0) {
                std::cerr << "learn: --restarts requires --seed\n";
                return 1;
            }
            Dataset d = detail::load_dataset(learn_data, learn_model);
            SearchConfig cfg;
            cfg.max_parents = learn_max_parents;
            cfg.method =
                learn_method == "exhaustive" ? SearchMethod::exhaustive : SearchMethod::greedy;
            cfg.score.prior = PriorPattern{learn_alpha, learn_tau};
            cfg.score.structure_penalty = learn_penalty;
            cfg.restarts = learn_restarts;
            cfg.seed = learn_seed;
            SearchResult result;
            CtbnModel model = learn_structure(d, cfg, &result);
            write_model(model, learn_out);
            log(LogLevel::info, "total score " + format_double(result.total_score) + ", dim " +
                                    std::to_string(dimension(result.graph, d.universe)));
            for (int i = 0; i < d.universe.size(); ++i) {
                std::string parents;
                for (int p : result.graph.parents[static_cast<size_t>(i)])
                    parents += (parents.empty() ? "" : ",") + d.universe.var(p).name;
                log(LogLevel::debug,
                    "Pa(" + d.universe.var(i).name + ") = {" + parents + "}");
            }
            return 0;
        }

        if (*score) {
            CtbnModel structure = read_model(score_model, /*require_params=*/false);
            Dataset d = read_dataset(score_data, structure.universe);
            ScoreConfig cfg;
            cfg.prior = PriorPattern{score_alpha, score_tau};
            cfg.structure_penalty = score_penalty;
            std::vector<FamilyScore> scores;
            double total = 0.0;
            for (int i = 0; i < d.universe.size(); ++i) {
                scores.push_back(
                    fam_score(i, structure.graph.parents[static_cast<size_t>(i)], d, cfg));
                total += scores.back().total;
            }
            std::cout << detail::score_csv(d.universe, structure.graph, scores);
            log(LogLevel::info, "structure score " + format_double(total));
            return 0;
        }

        if (*ll) {
            CtbnModel model = read_model(ll_model);
            detail::require_valid(model, ll_model);
            Dataset d = read_dataset(ll_data, model.universe);
            std::cout << format_double(loglik(model, d, ll_initial)) << "\n";
            return 0;
        }

        if (*amalg) {
            CtbnModel model = read_model(amalg_model);
            detail::require_valid(model, amalg_model);
            std::string csv = detail::joint_intensity_csv(amalgamate(model, amalg_cap));
            if (amalg_out.empty())
                std::cout << csv;
            else
                ctbn::detail::write_file(amalg_out, csv);
            return 0;
        }

        if (*smap) {
            CtbnModel model = read_model(smap_model);
            detail::require_valid(model, smap_model);
            Graph g = minimal_smap(amalgamate(model), smap_tol);
            json out;
            out["parents"] = graph_to_json(model.universe, g);
            std::cout << out.dump(2) << "\n";
            return 0;
        }

        if (*dlearn) {
            Dataset d = detail::load_dataset(dlearn_data, dlearn_model);
            SlicedData sliced = discretize(d, dlearn_delta);
            if (sliced.n_empty_trajectories > 0)
                log(LogLevel::warn,
                    std::to_string(sliced.n_empty_trajectories) +
                        " trajectories were shorter than one slice and contributed nothing");
            DbnModel m = dbn_learn(sliced, dlearn_max_parents, dlearn_strength);
            write_dbn(m, dlearn_out);
            return 0;
        }

        if (*dll) {
            DbnModel m = read_dbn(dll_model);
            Dataset d = read_dataset(dll_data, m.universe);
            std::cout << format_double(dbn_loglik(m, d)) << "\n";
            return 0;
        }

        if (*exp) {
            ExperimentConfig cfg = default_experiment_config(exp_name);
            if (!exp_config.empty()) {
                apply_experiment_config_json(cfg, ctbn::detail::parse_file(exp_config));
                cfg.name = exp_name;
            }
            if (!exp_seeds.empty()) cfg.seeds = detail::parse_seed_list(exp_seeds);
            if (!exp_sizes.empty()) cfg.sizes = detail::parse_double_list(exp_sizes);
            if (!exp_deltas.empty()) cfg.dbn_deltas = detail::parse_double_list(exp_deltas);
            if (exp_max_parents >= 0) cfg.max_parents = exp_max_parents;
            if (!exp_method.empty())
                cfg.method = exp_method == "exhaustive" ? SearchMethod::exhaustive
                                                        : SearchMethod::greedy;
            if (exp_alpha > 0) cfg.score.prior.alpha = exp_alpha;
            if (exp_tau > 0) cfg.score.prior.tau = exp_tau;
            if (exp_penalty >= 0) cfg.score.structure_penalty = exp_penalty;
            if (exp_jobs > 0) cfg.jobs = exp_jobs;
            for (const auto& path : run_experiment(cfg, exp_out))
                log(LogLevel::info, "wrote " + path);
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

inline int run_cli(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_cli(std::move(args));
}

}  // namespace cli
}  // namespace ctbn

#endif  // CTBN_CLI_HPP
