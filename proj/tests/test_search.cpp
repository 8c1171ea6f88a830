#include "doctest.h"
#include "test_support.hpp"

#include "gplan/error.hpp"
#include "gplan/search.hpp"

#include <deque>
#include <map>
#include <set>

using namespace gplan;
using namespace gplan::testing;

namespace {

// Plain Bellman iteration over all actions until atom costs stop changing.
double hadd_fixpoint(const GroundedTask &task, const SymbolicState &s, const AtomSet &goal) {
    std::vector<double> cost(task.atoms().size(), kInfinity);
    for (AtomId p : s.atoms())
        cost[p] = 0;
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto &a : task.actions()) {
            double c = 1;
            for (AtomId p : a.pre)
                c += cost[p];
            for (AtomId q : a.add)
                if (c < cost[q]) {
                    cost[q] = c;
                    changed = true;
                }
        }
    }
    double h = 0;
    for (AtomId g : goal)
        h += cost[g];
    return h;
}

int bfs_length(const GroundedTask &task) {
    std::map<SymbolicState, int> dist{{task.initial(), 0}};
    std::deque<SymbolicState> queue{task.initial()};
    while (!queue.empty()) {
        auto s = queue.front();
        queue.pop_front();
        if (goal_satisfied(s, task.goal()))
            return dist[s];
        for (auto &succ : successors(s, task))
            if (dist.emplace(succ.state, dist[s] + 1).second)
                queue.push_back(succ.state);
    }
    return -1;
}

std::vector<std::vector<int>> random_towers(int n, std::mt19937_64 &rng) {
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i)
        order[i] = i + 1;
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::vector<int>> towers;
    for (int b : order) {
        std::uniform_int_distribution<std::size_t> pick(0, towers.size());
        std::size_t t = pick(rng);
        if (t == towers.size())
            towers.push_back({b});
        else
            towers[t].push_back(b);
    }
    return towers;
}

std::string random_blocks_problem(int n, std::mt19937_64 &rng) {
    std::string text = "(define (problem rb) (:domain blocksworld) (:objects";
    for (int i = 1; i <= n; ++i)
        text += " b" + std::to_string(i);
    text += " - block) (:init (handempty)";
    for (auto &tower : random_towers(n, rng)) {
        text += " (ontable b" + std::to_string(tower[0]) + ")";
        for (std::size_t i = 1; i < tower.size(); ++i)
            text += " (on b" + std::to_string(tower[i]) + " b" + std::to_string(tower[i - 1]) + ")";
        text += " (clear b" + std::to_string(tower.back()) + ")";
    }
    text += ") (:goal (and";
    for (auto &tower : random_towers(n, rng))
        for (std::size_t i = 1; i < tower.size(); ++i)
            text += " (on b" + std::to_string(tower[i]) + " b" + std::to_string(tower[i - 1]) + ")";
    text += ")))";
    return text;
}

void check_plan(const GroundedTask &task, const Plan &plan) {
    SymbolicState s = task.initial();
    for (ActionId a : plan.actions) {
        REQUIRE(applicable(s, task.actions()[a]));
        s = apply(s, task.actions()[a]);
    }
    CHECK(goal_satisfied(s, task.goal()));
}

}  // namespace

TEST_CASE("goal count") {
    auto task = fixture_task("blocksworld", "blocksworld-3.pddl");
    CHECK(heuristic_goalcount(task.initial(), task.goal()) == 2);
    auto g = task.goal();
    CHECK(heuristic_goalcount(SymbolicState(g), g) == 0);
    AtomSet one{g[0]};
    CHECK(heuristic_goalcount(SymbolicState(one), g) == 1);
}

TEST_CASE("h_add agrees with the Bellman fixpoint") {
    auto task = fixture_task("blocksworld", "blocksworld-2.pddl");
    CHECK(heuristic_hadd(task.initial(), task.goal(), task) == doctest::Approx(2.0));
    CHECK(heuristic_hadd(task.initial(), task.goal(), task) ==
          hadd_fixpoint(task, task.initial(), task.goal()));
    CHECK(heuristic_hmax(task.initial(), task.goal(), task) == 2.0);

    std::mt19937_64 rng(7);
    for (const char *problem : {"blocksworld-3.pddl", "blocksworld-4.pddl"}) {
        auto t = fixture_task("blocksworld", problem);
        RelaxationHeuristic h(t, RelaxationHeuristic::Kind::Add);
        for (auto &s : random_walk(t, 30, rng))
            CHECK(h.evaluate(s, t.goal()) == hadd_fixpoint(t, s, t.goal()));
    }
    for (const auto &[domain, problem] :
         std::vector<std::pair<std::string, std::string>>{{"gripper", "gripper-2.pddl"},
                                                          {"logistics", "logistics-1.pddl"},
                                                          {"visitall", "visitall-2x2.pddl"}}) {
        auto t = fixture_task(domain, problem);
        RelaxationHeuristic h(t, RelaxationHeuristic::Kind::Add);
        for (auto &s : random_walk(t, 20, rng))
            CHECK(h.evaluate(s, t.goal()) == hadd_fixpoint(t, s, t.goal()));
    }
}

TEST_CASE("goal already satisfied gives zero heuristic and empty plan") {
    auto task = fixture_task("blocksworld", "blocksworld-4.pddl");
    CHECK(goal_satisfied(task.initial(), task.goal()));
    CHECK(heuristic_hadd(task.initial(), task.goal(), task) == 0);
    for (auto strategy : {SearchStrategy::AstarHmax, SearchStrategy::GbfsHadd, SearchStrategy::GbfsGoalcount}) {
        auto r = solve(task, {strategy, 5.0, 1000});
        REQUIRE(r.solved());
        CHECK(r.plan.actions.empty());
    }
}

TEST_CASE("unreachable goal is exhausted") {
    const char *problem = R"((define (problem stuck) (:domain blocksworld)
        (:objects b1 b2 - block)
        (:init (ontable b1) (ontable b2) (clear b1) (clear b2))
        (:goal (and (on b1 b2)))))";
    auto task = load_task(domain_text("blocksworld"), problem);
    CHECK(heuristic_hadd(task.initial(), task.goal(), task) == kInfinity);
    CHECK(heuristic_hmax(task.initial(), task.goal(), task) == kInfinity);
    for (auto strategy : {SearchStrategy::AstarHmax, SearchStrategy::GbfsHadd, SearchStrategy::GbfsGoalcount})
        CHECK(solve(task, {strategy, 5.0, 1000}).status == SearchStatus::Exhausted);
    auto tiers = default_search_tiers();
    CHECK(solve_tiered(task, tiers).status == SearchStatus::Exhausted);
}

TEST_CASE("two-ball gripper plan") {
    auto task = fixture_task("gripper", "gripper-2.pddl");
    auto r = solve(task, {});
    REQUIRE(r.solved());
    CHECK(r.plan.size() == 5);
    check_plan(task, r.plan);
    CHECK(r.plan.strategy == "astar_hmax");
    std::string text = format_plan(task, r.plan.actions);
    auto lines = parse_plan_lines(text);
    REQUIRE(lines.size() == 5);
    for (std::size_t i = 0; i < lines.size(); ++i)
        CHECK(task.find_action(lines[i]) == r.plan.actions[i]);
}

TEST_CASE("A* with h_max is optimal on small blocksworld") {
    std::mt19937_64 rng(11);
    for (int n = 2; n <= 5; ++n) {
        for (int rep = 0; rep < 6; ++rep) {
            auto task = load_task(domain_text("blocksworld"), random_blocks_problem(n, rng));
            auto r = solve(task, {SearchStrategy::AstarHmax, 30.0, 1'000'000});
            REQUIRE(r.solved());
            check_plan(task, r.plan);
            CHECK(static_cast<int>(r.plan.size()) == bfs_length(task));
            auto greedy = solve(task, {SearchStrategy::GbfsHadd, 30.0, 1'000'000});
            REQUIRE(greedy.solved());
            check_plan(task, greedy.plan);
            CHECK(greedy.plan.size() >= r.plan.size());
        }
    }
}

TEST_CASE("search is deterministic") {
    std::mt19937_64 rng(3);
    auto text = random_blocks_problem(6, rng);
    auto task = load_task(domain_text("blocksworld"), text);
    for (auto strategy : {SearchStrategy::AstarHmax, SearchStrategy::GbfsHadd}) {
        auto a = solve(task, {strategy, 30.0, 1'000'000});
        auto b = solve(task, {strategy, 30.0, 1'000'000});
        REQUIRE(a.solved());
        CHECK(a.plan.actions == b.plan.actions);
        CHECK(a.expansions == b.expansions);
    }
}

TEST_CASE("expansion cap reports timeout and tiers fall through") {
    std::mt19937_64 rng(5);
    auto task = load_task(domain_text("blocksworld"), random_blocks_problem(7, rng));
    auto capped = solve(task, {SearchStrategy::AstarHmax, 30.0, 2});
    if (!goal_satisfied(task.initial(), task.goal()))
        CHECK(capped.status == SearchStatus::Timeout);
    std::vector<SearchConfig> tiers{{SearchStrategy::AstarHmax, 30.0, 2},
                                    {SearchStrategy::GbfsHadd, 30.0, 1'000'000}};
    auto r = solve_tiered(task, tiers);
    REQUIRE(r.solved());
    CHECK(r.plan.strategy == "gbfs_hadd");
    check_plan(task, r.plan);
    CHECK_THROWS_AS(solve(task, {SearchStrategy::AstarHmax, 0.0, 10}), Error);
}

TEST_CASE("four-block instance solves within the first tier") {
    std::mt19937_64 rng(19);
    for (int rep = 0; rep < 3; ++rep) {
        auto task = load_task(domain_text("blocksworld"), random_blocks_problem(4, rng));
        auto r = solve(task, default_search_tiers()[0]);
        REQUIRE(r.solved());
        CHECK(r.wall_seconds < 60.0);
        check_plan(task, r.plan);
    }
}

TEST_CASE("strategy names and plan lines") {
    for (auto s : {SearchStrategy::AstarHmax, SearchStrategy::GbfsGoalcount, SearchStrategy::GbfsHadd})
        CHECK(parse_search_strategy(to_string(s)) == s);
    CHECK_THROWS_AS(parse_search_strategy("lmcut"), Error);
    auto lines = parse_plan_lines("; comment\n( PICK-UP  b1 )\n\n(stack b1 b2) ; trailing\n");
    REQUIRE(lines.size() == 2);
    CHECK(lines[0] == "(pick-up b1)");
    CHECK(lines[1] == "(stack b1 b2)");
}
