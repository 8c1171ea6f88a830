#include "gplan/search.hpp"

#include "gplan/error.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <queue>
#include <sstream>
#include <unordered_map>

namespace gplan {

std::string_view to_string(SearchStrategy strategy) {
    switch (strategy) {
    case SearchStrategy::AstarHmax:
        return "astar_hmax";
    case SearchStrategy::GbfsGoalcount:
        return "gbfs_goalcount";
    case SearchStrategy::GbfsHadd:
        return "gbfs_hadd";
    }
    return "?";
}

SearchStrategy parse_search_strategy(std::string_view name) {
    for (auto s : {SearchStrategy::AstarHmax, SearchStrategy::GbfsGoalcount, SearchStrategy::GbfsHadd})
        if (to_string(s) == name)
            return s;
    throw Error("unknown search strategy '" + std::string(name) + "'");
}

std::string_view to_string(SearchStatus status) {
    switch (status) {
    case SearchStatus::Solved:
        return "solved";
    case SearchStatus::Timeout:
        return "timeout";
    case SearchStatus::Exhausted:
        return "exhausted";
    }
    return "?";
}

std::vector<SearchConfig> default_search_tiers() {
    return {{SearchStrategy::AstarHmax, 60.0, 5'000'000}, {SearchStrategy::GbfsHadd, 300.0, 5'000'000}};
}

double heuristic_goalcount(const SymbolicState &state, std::span<const AtomId> goal) {
    double missing = 0;
    for (AtomId g : goal)
        missing += !state.contains(g);
    return missing;
}

RelaxationHeuristic::RelaxationHeuristic(const GroundedTask &task, Kind kind)
    : task_(task), kind_(kind), precondition_of_(task.atoms().size()),
      atom_cost_(task.atoms().size()), action_aggregate_(task.actions().size()),
      unsatisfied_(task.actions().size()) {
    for (std::size_t a = 0; a < task.actions().size(); ++a)
        for (AtomId p : task.actions()[a].pre)
            precondition_of_[p].push_back(static_cast<ActionId>(a));
}

double RelaxationHeuristic::evaluate(const SymbolicState &state, std::span<const AtomId> goal) {
    using Entry = std::pair<double, AtomId>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
    std::fill(atom_cost_.begin(), atom_cost_.end(), kInfinity);
    std::fill(action_aggregate_.begin(), action_aggregate_.end(), 0.0);
    const auto &actions = task_.actions();

    auto relax = [&](ActionId a) {
        double cost = 1.0 + action_aggregate_[a];
        for (AtomId q : actions[a].add) {
            if (cost < atom_cost_[q]) {
                atom_cost_[q] = cost;
                queue.emplace(cost, q);
            }
        }
    };

    for (AtomId p : state.atoms()) {
        atom_cost_[p] = 0.0;
        queue.emplace(0.0, p);
    }
    for (std::size_t a = 0; a < actions.size(); ++a) {
        unsatisfied_[a] = static_cast<int>(actions[a].pre.size());
        if (unsatisfied_[a] == 0)
            relax(static_cast<ActionId>(a));
    }
    std::size_t goals_left = goal.size();
    std::vector<char> is_goal;
    if (!goal.empty()) {
        is_goal.assign(atom_cost_.size(), 0);
        for (AtomId g : goal)
            is_goal[g] = 1;
    }
    while (!queue.empty() && goals_left > 0) {
        auto [cost, p] = queue.top();
        queue.pop();
        if (cost > atom_cost_[p])
            continue;
        if (is_goal[p]) {
            is_goal[p] = 0;
            --goals_left;
        }
        for (ActionId a : precondition_of_[p]) {
            if (kind_ == Kind::Add)
                action_aggregate_[a] += cost;
            else
                action_aggregate_[a] = std::max(action_aggregate_[a], cost);
            if (--unsatisfied_[a] == 0)
                relax(a);
        }
    }
    double h = 0.0;
    for (AtomId g : goal) {
        if (atom_cost_[g] == kInfinity)
            return kInfinity;
        h = kind_ == Kind::Add ? h + atom_cost_[g] : std::max(h, atom_cost_[g]);
    }
    return h;
}

double heuristic_hadd(const SymbolicState &state, std::span<const AtomId> goal,
                      const GroundedTask &task) {
    return RelaxationHeuristic(task, RelaxationHeuristic::Kind::Add).evaluate(state, goal);
}

double heuristic_hmax(const SymbolicState &state, std::span<const AtomId> goal,
                      const GroundedTask &task) {
    return RelaxationHeuristic(task, RelaxationHeuristic::Kind::Max).evaluate(state, goal);
}

namespace {

using Clock = std::chrono::steady_clock;

struct Node {
    SymbolicState state;
    std::size_t parent;
    ActionId action;
    int g;
};

struct OpenEntry {
    double key;
    std::uint64_t order;
    std::size_t node;
    int g;

    bool operator>(const OpenEntry &other) const {
        if (key != other.key)
            return key > other.key;
        return order > other.order;
    }
};

std::vector<ActionId> extract_plan(const std::vector<Node> &nodes, std::size_t goal_node) {
    std::vector<ActionId> plan;
    for (std::size_t n = goal_node; n != 0; n = nodes[n].parent)
        plan.push_back(nodes[n].action);
    std::reverse(plan.begin(), plan.end());
    return plan;
}

void verify_plan(const GroundedTask &task, const SymbolicState &start, const std::vector<ActionId> &plan) {
    SymbolicState s = start;
    for (ActionId a : plan)
        s = apply(s, task.actions()[a]);
    if (!goal_satisfied(s, task.goal()))
        throw Error("internal error: search returned a plan that does not reach the goal");
}

}  // namespace

SearchResult solve(const GroundedTask &task, const SearchConfig &config, const SymbolicState *from) {
    const SymbolicState &initial = from ? *from : task.initial();
    if (config.timeout_seconds <= 0 || config.max_expansions == 0)
        throw Error("search timeout and expansion budget must be positive");
    const auto start = Clock::now();
    const bool astar = config.strategy == SearchStrategy::AstarHmax;

    std::optional<RelaxationHeuristic> relaxation;
    if (config.strategy == SearchStrategy::AstarHmax)
        relaxation.emplace(task, RelaxationHeuristic::Kind::Max);
    else if (config.strategy == SearchStrategy::GbfsHadd)
        relaxation.emplace(task, RelaxationHeuristic::Kind::Add);
    auto heuristic = [&](const SymbolicState &s) {
        return relaxation ? relaxation->evaluate(s, task.goal()) : heuristic_goalcount(s, task.goal());
    };

    SearchResult result;
    result.plan.strategy = std::string(to_string(config.strategy));
    auto finish = [&](SearchStatus status) {
        result.status = status;
        result.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
        result.plan.expansions = result.expansions;
        result.plan.wall_seconds = result.wall_seconds;
        return result;
    };

    std::vector<Node> nodes;
    std::unordered_map<SymbolicState, std::size_t, StateHash> index;
    std::priority_queue<OpenEntry, std::vector<OpenEntry>, std::greater<>> open;
    std::uint64_t order = 0;

    double h0 = heuristic(initial);
    if (h0 == kInfinity)
        return finish(SearchStatus::Exhausted);
    nodes.push_back({initial, 0, 0, 0});
    index.emplace(initial, 0);
    open.push({h0, order++, 0, 0});

    while (!open.empty()) {
        OpenEntry top = open.top();
        open.pop();
        if (astar && top.g > nodes[top.node].g)
            continue;
        const SymbolicState current = nodes[top.node].state;
        if (goal_satisfied(current, task.goal())) {
            result.plan.actions = extract_plan(nodes, top.node);
            verify_plan(task, initial, result.plan.actions);
            return finish(SearchStatus::Solved);
        }
        if (result.expansions >= config.max_expansions)
            return finish(SearchStatus::Timeout);
        if ((result.expansions & 255) == 0 &&
            std::chrono::duration<double>(Clock::now() - start).count() > config.timeout_seconds)
            return finish(SearchStatus::Timeout);
        ++result.expansions;

        const int g = nodes[top.node].g;
        for (auto &succ : successors(current, task)) {
            auto it = index.find(succ.state);
            if (it != index.end()) {
                if (!astar || nodes[it->second].g <= g + 1)
                    continue;
                // Cheaper path to a known state: reopen.
                Node &node = nodes[it->second];
                node.parent = top.node;
                node.action = succ.action;
                node.g = g + 1;
                double h = heuristic(node.state);
                open.push({node.g + h, order++, it->second, node.g});
                continue;
            }
            double h = heuristic(succ.state);
            if (h == kInfinity)
                continue;
            std::size_t id = nodes.size();
            index.emplace(succ.state, id);
            nodes.push_back({std::move(succ.state), top.node, succ.action, g + 1});
            open.push({astar ? g + 1 + h : h, order++, id, g + 1});
        }
    }
    return finish(SearchStatus::Exhausted);
}

SearchResult solve_tiered(const GroundedTask &task, std::span<const SearchConfig> tiers, const SymbolicState *from) {
    if (tiers.empty())
        throw Error("no search tiers configured");
    SearchResult result;
    std::size_t total_expansions = 0;
    double total_seconds = 0.0;
    for (const auto &tier : tiers) {
        result = solve(task, tier, from);
        total_expansions += result.expansions;
        total_seconds += result.wall_seconds;
        if (result.status != SearchStatus::Timeout)
            break;
    }
    result.expansions = total_expansions;
    result.wall_seconds = total_seconds;
    result.plan.expansions = total_expansions;
    result.plan.wall_seconds = total_seconds;
    return result;
}

std::string format_plan(const GroundedTask &task, std::span<const ActionId> actions) {
    std::string out;
    for (ActionId a : actions) {
        out += task.actions()[a].name;
        out += '\n';
    }
    return out;
}

std::vector<std::string> parse_plan_lines(std::string_view text) {
    std::vector<std::string> out;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        std::string normalized;
        bool space = false;
        for (char c : line) {
            if (c == ';')
                break;
            if (std::isspace(static_cast<unsigned char>(c))) {
                space = !normalized.empty();
                continue;
            }
            if (space && c != ')' && normalized.back() != '(')
                normalized += ' ';
            space = false;
            normalized += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        }
        if (!normalized.empty())
            out.push_back(std::move(normalized));
    }
    return out;
}

}  // namespace gplan
