#ifndef CTBN_TRAJECTORY_HPP
#define CTBN_TRAJECTORY_HPP

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

#include "ctbn/model.hpp"

// Trajectory data model: a full initial assignment followed by strictly
// ordered single-variable change events, observed up to a censoring time.

namespace ctbn {

struct Event {
    double time = 0.0;
    int variable = -1;
    int new_value = -1;

    bool operator==(const Event& o) const {
        return time == o.time && variable == o.variable && new_value == o.new_value;
    }
};

struct Trajectory {
    std::vector<int> initial;   // state index per variable
    double end_time = 0.0;
    std::vector<Event> events;  // strictly increasing times in (0, end_time]

    bool operator==(const Trajectory& o) const {
        return initial == o.initial && end_time == o.end_time && events == o.events;
    }
};

struct Dataset {
    Universe universe;
    std::vector<Trajectory> trajectories;

    size_t size() const { return trajectories.size(); }

    std::int64_t total_events() const {
        std::int64_t n = 0;
        for (const auto& t : trajectories) n += static_cast<std::int64_t>(t.events.size());
        return n;
    }

    double total_time() const {
        double s = 0.0;
        for (const auto& t : trajectories) s += t.end_time;
        return s;
    }

    bool operator==(const Dataset& o) const {
        return universe == o.universe && trajectories == o.trajectories;
    }
};

// ---------------------------------------------------------------------------
// validate_trajectory: empty report iff all invariants hold. Ties in event
// time are violations even across different variables; simultaneous
// transitions have probability zero under the model.

inline std::vector<std::string> validate_trajectory(const Trajectory& traj, const Universe& u) {
    std::vector<std::string> report;
    if (static_cast<int>(traj.initial.size()) != u.size()) {
        report.push_back("initial assignment does not cover all variables");
        return report;
    }
    for (int i = 0; i < u.size(); ++i) {
        int s = traj.initial[static_cast<size_t>(i)];
        if (s < 0 || s >= u.var(i).n_states())
            report.push_back("initial state of " + u.var(i).name + " out of range");
    }
    if (!(traj.end_time > 0.0))
        report.push_back("end_time must be positive");

    std::vector<int> state = traj.initial;
    double prev_time = 0.0;
    for (size_t e = 0; e < traj.events.size(); ++e) {
        const Event& ev = traj.events[e];
        std::string at = "event " + std::to_string(e) + " (t=" + std::to_string(ev.time) + ")";
        if (ev.variable < 0 || ev.variable >= u.size()) {
            report.push_back(at + ": unknown variable");
            continue;
        }
        const VariableSpec& v = u.var(ev.variable);
        if (ev.new_value < 0 || ev.new_value >= v.n_states()) {
            report.push_back(at + ": state out of range for " + v.name);
            continue;
        }
        if (e > 0 && ev.time == prev_time)
            report.push_back(at + ": simultaneous with previous event");
        else if (e > 0 && ev.time < prev_time)
            report.push_back(at + ": times not increasing");
        if (!(ev.time > 0.0) || ev.time > traj.end_time)
            report.push_back(at + ": time outside (0, end_time]");
        if (state[static_cast<size_t>(ev.variable)] == ev.new_value)
            report.push_back(at + ": " + v.name + " does not change value");
        state[static_cast<size_t>(ev.variable)] = ev.new_value;
        prev_time = ev.time;
    }
    return report;
}

inline std::vector<std::string> validate_dataset(const Dataset& d) {
    std::vector<std::string> report;
    for (size_t i = 0; i < d.trajectories.size(); ++i)
        for (const auto& v : validate_trajectory(d.trajectories[i], d.universe))
            report.push_back("trajectory " + std::to_string(i) + ": " + v);
    return report;
}

// ---------------------------------------------------------------------------
// state_at: piecewise-constant, right-continuous lookup. The assignment at t
// reflects every event with time <= t.

inline std::vector<int> state_at(const Trajectory& traj, double t) {
    if (!(t >= 0.0) || t > traj.end_time)
        throw std::out_of_range("state_at: time outside [0, end_time]");
    std::vector<int> state = traj.initial;
    for (const Event& ev : traj.events) {
        if (ev.time > t) break;
        state[static_cast<size_t>(ev.variable)] = ev.new_value;
    }
    return state;
}

}  // namespace ctbn

#endif  // CTBN_TRAJECTORY_HPP
