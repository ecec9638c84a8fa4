#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "ctbn/io.hpp"
#include "ctbn/sampler.hpp"

using namespace ctbn;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("ctbn_io_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

}  // namespace

TEST_SUITE("io") {

TEST_CASE("model files round-trip exactly") {
    TempDir dir;
    CtbnModel m = drug_network();
    write_model(m, dir.file("drug.json"));
    CtbnModel back = read_model(dir.file("drug.json"));
    CHECK(back.universe == m.universe);
    CHECK(back.graph == m.graph);
    CHECK(back.initial == m.initial);
    REQUIRE(back.cims.size() == m.cims.size());
    for (size_t i = 0; i < m.cims.size(); ++i) CHECK(back.cims[i] == m.cims[i]);
    CHECK(validate_model(back).empty());
}

TEST_CASE("datasets round-trip exactly, including every event time") {
    TempDir dir;
    CtbnModel m = chain_network(3, 1.3);
    Dataset d = sample_dataset(m, 2, 7.5, 90210);
    write_dataset(d, dir.file("data.jsonl"));
    Dataset back = read_dataset(dir.file("data.jsonl"), m.universe);
    CHECK(back == d);
}

TEST_CASE("an empty dataset file reads back empty") {
    TempDir dir;
    Dataset d{chain_network(2, 1.0).universe, {}};
    write_dataset(d, dir.file("empty.jsonl"));
    Dataset back = read_dataset(dir.file("empty.jsonl"), d.universe);
    CHECK(back.trajectories.empty());
}

TEST_CASE("a malformed line is reported with its line number") {
    TempDir dir;
    CtbnModel m = chain_network(2, 1.0);
    Dataset d = sample_dataset(m, 1, 2.0, 4);
    write_dataset(d, dir.file("bad.jsonl"));
    std::ofstream append(dir.file("bad.jsonl"), std::ios::app);
    append << "{not json\n";
    append.close();
    try {
        read_dataset(dir.file("bad.jsonl"), m.universe);
        FAIL("expected a parse error");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}

TEST_CASE("an unknown state label is rejected with its line") {
    TempDir dir;
    std::ofstream out(dir.file("label.jsonl"));
    out << R"({"initial": {"X1": "nope", "X2": "x0"}, "end_time": 1.0, "events": []})" << "\n";
    out.close();
    CtbnModel m = chain_network(2, 1.0);
    try {
        read_dataset(dir.file("label.jsonl"), m.universe);
        FAIL("expected a label error");
    } catch (const std::runtime_error& e) {
        std::string msg = e.what();
        CHECK(msg.find("line 1") != std::string::npos);
        CHECK(msg.find("nope") != std::string::npos);
    }
}

TEST_CASE("trajectory invariant violations are rejected on read") {
    TempDir dir;
    std::ofstream out(dir.file("tie.jsonl"));
    out << R"({"initial": {"X1": "x0", "X2": "x0"}, "end_time": 2.0,)"
        << R"( "events": [[1.0, "X1", "x1"], [1.0, "X2", "x1"]]})" << "\n";
    out.close();
    CtbnModel m = chain_network(2, 1.0);
    CHECK_THROWS_AS(read_dataset(dir.file("tie.jsonl"), m.universe), std::runtime_error);
}

TEST_CASE("universe inference sorts names and states") {
    TempDir dir;
    std::ofstream out(dir.file("infer.jsonl"));
    out << R"({"initial": {"B": "hi", "A": "on"}, "end_time": 2.0,)"
        << R"( "events": [[0.5, "B", "lo"], [1.0, "A", "off"]]})" << "\n";
    out.close();
    Universe u = infer_universe(dir.file("infer.jsonl"));
    REQUIRE(u.size() == 2);
    CHECK(u.var(0).name == "A");
    CHECK(u.var(0).states == std::vector<std::string>{"off", "on"});
    CHECK(u.var(1).states == std::vector<std::string>{"hi", "lo"});
    Dataset d = read_dataset(dir.file("infer.jsonl"));
    CHECK(d.trajectories.size() == 1);
}

TEST_CASE("prior shorthand expands to the scaled default pattern") {
    json doc = {{"alpha", 2.0}, {"tau", 0.5}};
    Universe u({{"X", {"a", "b", "c"}}, {"Y", {"p", "q"}}});
    Graph g = make_graph(u, {{1}, {}});
    auto priors = family_priors_from_json(doc, u, g);
    REQUIRE(priors.size() == 2);
    CHECK(priors[0].n_contexts == 2);
    CHECK(priors[0].alpha_exit(0, 0) == doctest::Approx(2.0));
    CHECK(priors[0].alpha_jump_at(0, 0, 1) == doctest::Approx(1.0));
    CHECK(priors[0].tau_at(1, 2) == doctest::Approx(0.5));
}

TEST_CASE("per-family prior files are honored") {
    Universe u({{"X", {"a", "b"}}});
    Graph g = empty_graph(u);
    json doc;
    doc["families"]["X"][""] = {{"tau", {2.0, 3.0}},
                                {"alpha_theta", {{0.0, 1.5}, {0.25, 0.0}}}};
    auto priors = family_priors_from_json(doc, u, g);
    REQUIRE(priors.size() == 1);
    CHECK(priors[0].tau_at(0, 1) == doctest::Approx(3.0));
    CHECK(priors[0].alpha_exit(0, 0) == doctest::Approx(1.5));
    CHECK(priors[0].alpha_exit(0, 1) == doctest::Approx(0.25));
}

TEST_CASE("prior files with nonpositive hyperparameters are rejected") {
    Universe u({{"X", {"a", "b"}}});
    Graph g = empty_graph(u);
    json doc;
    doc["families"]["X"][""] = {{"tau", {0.0, 1.0}},
                                {"alpha_theta", {{0.0, 1.0}, {1.0, 0.0}}}};
    CHECK_THROWS_AS(family_priors_from_json(doc, u, g), std::runtime_error);
    doc["families"]["X"][""] = {{"tau", {1.0, 1.0}},
                                {"alpha_theta", {{0.0, -2.0}, {1.0, 0.0}}}};
    CHECK_THROWS_AS(family_priors_from_json(doc, u, g), std::runtime_error);
}

TEST_CASE("dbn files with broken rows or p_multi are rejected") {
    TempDir dir;
    CtbnModel gen = chain_network(2, 1.0);
    Dataset d = sample_dataset(gen, 1, 30.0, 61);
    DbnModel m = dbn_learn(discretize(d, 1.0), 2, 1.0);
    json doc = dbn_to_json(m);

    json broken_row = doc;
    broken_row["cpts"]["X1"].begin().value()[0] = 5.0;
    CHECK_THROWS_AS(dbn_from_json(broken_row), std::runtime_error);

    json broken_pm = doc;
    broken_pm["p_multi"]["X1"] = 1.5;
    CHECK_THROWS_AS(dbn_from_json(broken_pm), std::runtime_error);
}

TEST_CASE("dbn models round-trip") {
    TempDir dir;
    CtbnModel gen = chain_network(3, 1.0);
    Dataset d = sample_dataset(gen, 2, 40.0, 6);
    DbnModel m = dbn_learn(discretize(d, 1.0), 2, 1.0);
    write_dbn(m, dir.file("dbn.json"));
    DbnModel back = read_dbn(dir.file("dbn.json"));
    CHECK(back.universe == m.universe);
    CHECK(back.delta_t == m.delta_t);
    CHECK(back.parents == m.parents);
    CHECK(back.cpt == m.cpt);
    CHECK(back.p_multi == m.p_multi);
}

TEST_CASE("format_double survives round trips through text") {
    for (double v : {0.1, 1.0 / 3.0, 6.0, 1e-17, 123456.789, -0.73}) {
        CHECK(std::stod(format_double(v)) == v);
    }
}

}  // TEST_SUITE
