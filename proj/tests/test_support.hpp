#pragma once

#include "gplan/domains.hpp"
#include "gplan/task.hpp"

#include <fstream>
#include <random>
#include <sstream>
#include <string>

namespace gplan::testing {

inline std::string fixture_text(const std::string &name) {
    std::ifstream in(std::string(GPLAN_TEST_DATA_DIR) + "/fixtures/" + name);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string domain_text(const std::string &name) {
    std::ifstream in(std::string(GPLAN_TEST_DATA_DIR) + "/domains/" + name + ".pddl");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline GroundedTask fixture_task(const std::string &domain, const std::string &problem) {
    return load_task(domain_text(domain), fixture_text(problem));
}

inline ActionId action_named(const GroundedTask &task, const std::string &name) {
    auto id = task.find_action(name);
    if (!id)
        throw std::runtime_error("no action " + name);
    return *id;
}

inline SymbolicState state_of(const GroundedTask &task, const std::vector<std::string> &atoms) {
    AtomSet ids;
    for (const auto &a : atoms) {
        auto id = task.find_atom(a);
        if (!id)
            throw std::runtime_error("no atom " + a);
        ids.push_back(*id);
    }
    return SymbolicState(std::move(ids));
}

/// Random walk of up to `steps` actions from s0; returns every visited state.
inline std::vector<SymbolicState> random_walk(const GroundedTask &task, int steps,
                                              std::mt19937_64 &rng) {
    std::vector<SymbolicState> out{task.initial()};
    for (int i = 0; i < steps; ++i) {
        auto succ = successors(out.back(), task);
        if (succ.empty())
            break;
        std::uniform_int_distribution<std::size_t> pick(0, succ.size() - 1);
        out.push_back(succ[pick(rng)].state);
    }
    return out;
}

}  // namespace gplan::testing
