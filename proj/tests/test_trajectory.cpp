#include <doctest.h>

#include "ctbn/trajectory.hpp"

using namespace ctbn;

namespace {

Universe two_binary() {
    return Universe({{"X", {"x0", "x1"}}, {"Y", {"y0", "y1"}}});
}

}  // namespace

TEST_SUITE("trajectory") {

TEST_CASE("validate_trajectory flags simultaneous events") {
    Universe u = two_binary();
    Trajectory t;
    t.initial = {0, 0};
    t.end_time = 5.0;
    t.events = {{1.0, 0, 1}, {1.0, 1, 1}};
    auto report = validate_trajectory(t, u);
    REQUIRE(report.size() == 1);
    CHECK(report[0].find("simultaneous") != std::string::npos);
}

TEST_CASE("validate_trajectory flags an event that does not change the value") {
    Universe u = two_binary();
    Trajectory t;
    t.initial = {0, 0};
    t.end_time = 5.0;
    t.events = {{1.0, 0, 0}};
    auto report = validate_trajectory(t, u);
    REQUIRE(report.size() == 1);
    CHECK(report[0].find("does not change") != std::string::npos);
}

TEST_CASE("an empty event list is valid") {
    Universe u = two_binary();
    Trajectory t;
    t.initial = {1, 0};
    t.end_time = 5.0;
    CHECK(validate_trajectory(t, u).empty());
}

TEST_CASE("validate_trajectory flags out-of-window times") {
    Universe u = two_binary();
    Trajectory t;
    t.initial = {0, 0};
    t.end_time = 2.0;
    t.events = {{2.5, 0, 1}};
    auto report = validate_trajectory(t, u);
    REQUIRE(report.size() == 1);
    CHECK(report[0].find("outside") != std::string::npos);

    t.events = {{2.0, 0, 1}};  // exactly at end_time is allowed
    CHECK(validate_trajectory(t, u).empty());
}

TEST_CASE("state_at is right-continuous") {
    Universe u = two_binary();
    Trajectory t;
    t.initial = {0, 1};
    t.end_time = 4.0;
    t.events = {{1.0, 0, 1}, {3.0, 0, 0}};

    CHECK(state_at(t, 0.0) == std::vector<int>{0, 1});
    CHECK(state_at(t, 0.999) == std::vector<int>{0, 1});
    CHECK(state_at(t, 1.0) == std::vector<int>{1, 1});
    CHECK(state_at(t, 2.5) == std::vector<int>{1, 1});
    CHECK(state_at(t, 3.0) == std::vector<int>{0, 1});
    CHECK(state_at(t, 4.0) == std::vector<int>{0, 1});
    CHECK_THROWS_AS(state_at(t, 4.5), std::out_of_range);
    CHECK_THROWS_AS(state_at(t, -0.1), std::out_of_range);
}

TEST_CASE("state_at is constant between events and per-variable durations cover end_time") {
    Universe u = two_binary();
    Trajectory t;
    t.initial = {0, 0};
    t.end_time = 6.0;
    t.events = {{0.5, 1, 1}, {2.25, 0, 1}, {4.0, 1, 0}, {5.5, 0, 0}};

    // constant between consecutive event times
    std::vector<double> cuts = {0.0, 0.5, 2.25, 4.0, 5.5, 6.0};
    for (size_t j = 0; j + 1 < cuts.size(); ++j) {
        auto a = state_at(t, cuts[j]);
        auto mid = state_at(t, 0.5 * (cuts[j] + cuts[j + 1]));
        CHECK(a == mid);
    }

    // durations of each variable's occupancy partition [0, end_time]
    for (int var = 0; var < 2; ++var) {
        double covered = 0.0;
        double prev = 0.0;
        for (const auto& ev : t.events) {
            covered += ev.time - prev;
            prev = ev.time;
        }
        covered += t.end_time - prev;
        CHECK(covered == doctest::Approx(t.end_time));
    }
}

}  // TEST_SUITE
