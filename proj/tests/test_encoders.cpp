#include "doctest.h"
#include "test_support.hpp"

#include "gplan/encoders.hpp"
#include "gplan/error.hpp"
#include "gplan/search.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <set>

using namespace gplan;
using namespace gplan::testing;

namespace {

const std::vector<std::pair<std::string, std::string>> kFixtures{{"blocksworld", "blocksworld-3.pddl"},
                                                                 {"gripper", "gripper-2.pddl"},
                                                                 {"logistics", "logistics-1.pddl"},
                                                                 {"visitall", "visitall-2x2.pddl"}};

std::string grid_problem(int rows, int cols) {
    auto cell = [](int r, int c) { return "c-" + std::to_string(r) + "-" + std::to_string(c); };
    std::string objects, init = "(at-robot c-0-0) (visited c-0-0)", goal;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            objects += " " + cell(r, c);
            goal += " (visited " + cell(r, c) + ")";
            if (r + 1 < rows)
                init += " (connected " + cell(r, c) + " " + cell(r + 1, c) + ") (connected " + cell(r + 1, c) +
                        " " + cell(r, c) + ")";
            if (c + 1 < cols)
                init += " (connected " + cell(r, c) + " " + cell(r, c + 1) + ") (connected " + cell(r, c + 1) +
                        " " + cell(r, c) + ")";
        }
    return "(define (problem grid) (:domain grid-visit-all) (:objects" + objects + " - place) (:init " + init +
           ") (:goal (and" + goal + ")))";
}

std::string tower_problem(int n) {
    std::string objects, init = "(handempty) (ontable b1)";
    for (int i = 1; i <= n; ++i) {
        objects += " b" + std::to_string(i);
        if (i > 1)
            init += " (on b" + std::to_string(i) + " b" + std::to_string(i - 1) + ")";
    }
    init += " (clear b" + std::to_string(n) + ")";
    return "(define (problem tower) (:domain blocksworld) (:objects" + objects + " - block) (:init " + init +
           ") (:goal (and (ontable b" + std::to_string(n) + "))))";
}

std::map<std::string, int> multiset(WlVocabulary &vocab, const std::vector<int> &ids) {
    std::map<std::string, int> out;
    for (int id : ids)
        ++out[id == WlVocabulary::kOov ? std::string("<oov>") : vocab.colors()[id]];
    return out;
}

Trajectory planned(const GroundedTask &task) {
    auto r = solve(task, {});
    REQUIRE(r.solved());
    return reconstruct(task, r.plan.actions);
}

}  // namespace

TEST_CASE("ILG of the two-block example") {
    auto task = fixture_task("blocksworld", "blocksworld-2.pddl");
    auto g = build_ilg(task.initial(), task.goal(), task);
    CHECK(g.size() == 8);
    CHECK(g.num_objects == 2);
    CHECK(g.features[0] == "object");
    std::map<std::string, int> features;
    for (auto &f : g.features)
        ++features[f];
    CHECK(features["ontable:apn"] == 2);
    CHECK(features["clear:apn"] == 2);
    CHECK(features["handempty:apn"] == 1);
    CHECK(features["on:upg"] == 1);
    for (std::size_t v = g.num_objects; v < g.size(); ++v) {
        const auto &atom = task.atoms()[g.node_atom[v - g.num_objects]];
        REQUIRE(g.adjacency[v].size() == atom.args.size());
        std::vector<int> labels;
        for (auto e : g.adjacency[v])
            labels.push_back(e.label);
        std::sort(labels.begin(), labels.end());
        for (std::size_t i = 0; i < labels.size(); ++i)
            CHECK(labels[i] == static_cast<int>(i) + 1);
    }

    // Achieved goal atom shares its node.
    auto s = state_of(task, {"(on b1 b2)", "(clear b1)", "(ontable b2)", "(handempty)"});
    auto g2 = build_ilg(s, task.goal(), task);
    CHECK(g2.size() == 6);
    CHECK(std::count(g2.features.begin(), g2.features.end(), "on:apg") == 1);

    auto empty = build_ilg(task.initial(), AtomSet{}, task);
    for (std::size_t v = empty.num_objects; v < empty.size(); ++v)
        CHECK(empty.features[v].ends_with(":apn"));
}

TEST_CASE("WL refinement basics") {
    auto task = fixture_task("blocksworld", "blocksworld-2.pddl");
    auto graph = build_ilg(task.initial(), task.goal(), task);
    WlVocabulary zero(0);
    auto ids = zero.refine(graph, true);
    CHECK(ids.size() == graph.size());
    auto ms = multiset(zero, ids);
    CHECK(ms.size() == 5);
    CHECK(ms["object"] == 2);

    WlVocabulary vocab(2);
    ids = vocab.refine(graph, true);
    CHECK(ids.size() == 3 * graph.size());
    vocab.freeze();
    CHECK_THROWS_AS(vocab.refine(graph, true), Error);
    auto again = vocab.refine(graph, false);
    CHECK(std::find(again.begin(), again.end(), WlVocabulary::kOov) == again.end());
    CHECK(vocab.index_of("handempty:apn[]") >= 0);
    CHECK(vocab.index_of("clear:apn[object@1]") >= 0);
    CHECK(std::is_sorted(vocab.colors().begin(), vocab.colors().end()));
}

TEST_CASE("path and star graphs differ after one round") {
    auto make = [](std::vector<std::pair<int, int>> edges) {
        InstanceGraph g;
        for (int i = 0; i < 4; ++i)
            g.add_node("x");
        for (auto [u, v] : edges)
            g.add_edge(u, v, 1);
        return g;
    };
    auto path = make({{0, 1}, {1, 2}, {2, 3}});
    auto star = make({{0, 1}, {0, 2}, {0, 3}});
    WlVocabulary vocab(1);
    auto p = multiset(vocab, vocab.refine(path, true));
    auto s = multiset(vocab, vocab.refine(star, true));
    CHECK(p != s);
    CHECK(p["x[x@1]"] == 2);
    CHECK(p["x[x@1,x@1]"] == 2);
    CHECK(s["x[x@1,x@1,x@1]"] == 1);
    CHECK(s["x[x@1]"] == 3);
    WlVocabulary flat(0);
    CHECK(multiset(flat, flat.refine(path, true)) == multiset(flat, flat.refine(star, true)));
}

TEST_CASE("vocabulary save and load") {
    auto task = fixture_task("gripper", "gripper-2.pddl");
    auto traj = planned(task);
    std::vector<LabeledTrajectory> data{{&task, &traj}};
    auto vocab = collect_vocabulary(data, 2);
    auto text = vocab.save();
    CHECK(text.starts_with("WLVOCAB1 k=2\n"));
    auto loaded = WlVocabulary::load(text);
    CHECK(loaded.k() == 2);
    CHECK(loaded.colors() == vocab.colors());
    CHECK(loaded.save() == text);
    for (auto &s : traj.states)
        CHECK(embed_wl(s, traj.goal, task, loaded) == embed_wl(s, traj.goal, task, vocab));

    auto twice = collect_vocabulary(data, 2);
    CHECK(twice.colors() == vocab.colors());

    std::set<std::string> unique(vocab.colors().begin(), vocab.colors().end());
    CHECK(unique.size() == vocab.size());
    for (std::size_t i = 0; i < vocab.size(); ++i)
        CHECK(vocab.index_of(vocab.colors()[i]) == static_cast<int>(i));

    CHECK_THROWS_AS(WlVocabulary::load("WLVOCAB2 k=2\n"), FormatError);
    CHECK_THROWS_AS(WlVocabulary::load("WLVOCAB1 k=1\nb\na\n"), FormatError);
    CHECK_THROWS_AS(WlVocabulary::load("WLVOCAB1 k=1\na[zz@1]\n"), FormatError);
}

TEST_CASE("embed_wl counts, OOV and empty vocabulary") {
    auto task = fixture_task("blocksworld", "blocksworld-3.pddl");
    auto traj = planned(task);
    std::vector<LabeledTrajectory> data{{&task, &traj}};
    auto vocab = collect_vocabulary(data, 2);
    const auto d = static_cast<Eigen::Index>(vocab.size());
    for (auto &s : traj.states) {
        auto v = embed_wl(s, traj.goal, task, vocab);
        CHECK(v.size() == d + 1);
        CHECK(v[d] == 0);
        auto graph = build_ilg(s, traj.goal, task);
        CHECK(v.sum() == doctest::Approx(3.0 * graph.size()));
        CHECK((v.array() >= 0).all());
        CHECK(v == embed_wl(s, traj.goal, task, vocab));
        auto n = embed_wl(s, traj.goal, task, vocab, {true});
        CHECK(n.sum() == doctest::Approx(1.0));
    }

    auto big = load_task(domain_text("blocksworld"), tower_problem(10));
    auto v = embed_wl(big.initial(), big.goal(), big, vocab);
    CHECK(v.size() == d + 1);
    CHECK(v[d] > 0);
    CHECK(v.sum() == doctest::Approx(3.0 * build_ilg(big.initial(), big.goal(), big).size()));

    auto none = collect_vocabulary({}, 2);
    CHECK(none.size() == 0);
    CHECK_THROWS_AS(embed_wl(task.initial(), task.goal(), task, none), Error);
    WlVocabulary open(2);
    CHECK_THROWS_AS(embed_wl(task.initial(), task.goal(), task, open), Error);
}

TEST_CASE("WL embeddings are invariant to object renaming") {
    std::mt19937_64 rng(2024);
    for (const auto &[domain, problem] : kFixtures) {
        auto task = fixture_task(domain, problem);
        auto traj = planned(task);
        std::vector<LabeledTrajectory> data{{&task, &traj}};
        auto vocab = collect_vocabulary(data, 2);
        auto states = random_walk(task, 6, rng);
        for (int trial = 0; trial < 10; ++trial) {
            std::vector<std::string> names;
            for (auto &o : task.objects())
                names.push_back(o.name);
            auto shuffled = names;
            std::shuffle(shuffled.begin(), shuffled.end(), rng);
            std::unordered_map<std::string, std::string> renaming;
            for (std::size_t i = 0; i < names.size(); ++i)
                renaming[names[i]] = "o" + std::to_string(i) + shuffled[i];
            auto renamed = rename_objects(task, renaming);
            auto goal = translate_atoms(task, renamed, task.goal(), renaming);
            for (auto &s : states) {
                SymbolicState rs(translate_atoms(task, renamed, s.atoms(), renaming));
                CHECK(embed_wl(rs, goal, renamed, vocab) == embed_wl(s, task.goal(), task, vocab));
            }
        }
    }
}

TEST_CASE("FSF worked example and slot semantics") {
    auto task = fixture_task("blocksworld", "blocksworld-4.pddl");
    FsfLayout layout{FsfDomain::Blocksworld, 6};
    auto s = state_of(task, {"(ontable b1)", "(on b2 b1)", "(holding b3)", "(ontable b4)", "(clear b2)",
                             "(clear b4)"});
    auto [sv, gv] = embed_fsf(s, task.goal(), task, layout);
    Vector expected(7);
    expected << 0, 0, 1, -1, 0, -99, -99;
    CHECK(sv == expected);
    Vector goal(7);
    goal << 0, -10, 1, -10, -10, -99, -99;
    CHECK(gv == goal);

    auto grid = fixture_task("visitall", "visitall-2x2.pddl");
    FsfLayout grid_layout{FsfDomain::VisitAll, 4};
    auto gs = state_of(grid, {"(at-robot c-0-1)", "(visited c-0-0)", "(visited c-0-1)", "(connected c-0-0 c-0-1)"});
    auto [gsv, ggv] = embed_fsf(gs, grid.goal(), grid, grid_layout);
    Vector grid_expected(5);
    grid_expected << 2, 1, 1, 0, 0;
    CHECK(gsv == grid_expected);
    Vector grid_goal(5);
    grid_goal << -10, 1, 1, 1, 1;
    CHECK(ggv == grid_goal);

    auto grip = fixture_task("gripper", "gripper-2.pddl");
    std::vector<const GroundedTask *> tasks{&grip};
    auto grip_layout = make_fsf_layout(tasks);
    CHECK(grip_layout.N == 4);
    auto carrying = apply(grip.initial(), grip.actions()[action_named(grip, "(pick robot1 ball2 rooma right)")]);
    auto [cv, cg] = embed_fsf(carrying, grip.goal(), grip, grip_layout);
    // slots: ball1 ball2 left right
    Vector grip_expected(5);
    grip_expected << 1, 1, -2, 0, 2;
    CHECK(cv == grip_expected);
    Vector grip_goal(5);
    grip_goal << -10, 2, 2, -10, -10;
    CHECK(cg == grip_goal);

    auto log = fixture_task("logistics", "logistics-1.pddl");
    std::vector<const GroundedTask *> log_tasks{&log};
    auto log_layout = make_fsf_layout(log_tasks);
    CHECK(log_layout.N == 4);  // slots: pkg1 plane1 truck1 truck2
    auto [lv, lg] = embed_fsf(log.initial(), log.goal(), log, log_layout);
    // places: apt1 apt2 pos1 pos2
    Vector log_expected(5);
    log_expected << 0, 3, 1, 3, 2;
    CHECK(lv == log_expected);
    Vector log_goal(5);
    log_goal << 0, 4, -10, -10, -10;
    CHECK(lg == log_goal);
}

TEST_CASE("FSF capacity and non-invariance") {
    auto task = fixture_task("blocksworld", "blocksworld-4.pddl");
    FsfLayout layout{FsfDomain::Blocksworld, 3};
    try {
        embed_fsf(task.initial(), task.goal(), task, layout);
        FAIL("expected CapacityExceeded");
    } catch (const CapacityExceeded &e) {
        CHECK(e.slots() == 4);
        CHECK(e.capacity() == 3);
    }

    auto two = fixture_task("blocksworld", "blocksworld-2.pddl");
    FsfLayout small{FsfDomain::Blocksworld, 2};
    auto s = state_of(two, {"(on b1 b2)", "(ontable b2)", "(clear b1)", "(handempty)"});
    std::unordered_map<std::string, std::string> swap{{"b1", "b2"}, {"b2", "b1"}};
    auto swapped = rename_objects(two, swap);
    SymbolicState ss(translate_atoms(two, swapped, s.atoms(), swap));
    auto a = embed_fsf(s, two.goal(), two, small).first;
    auto b = embed_fsf(ss, translate_atoms(two, swapped, two.goal(), swap), swapped, small).first;
    CHECK(a != b);
}

TEST_CASE("EMB1 round trip") {
    Matrix m(2, 3);
    m << 0.1, -99, 1e-300, 3, 0.30000000000000004, -0.0;
    auto text = write_matrix(m);
    CHECK(text.starts_with("EMB1 2 3\n0.1 -99 1e-300\n"));
    Matrix back = read_matrix(text);
    CHECK(back == m);
    CHECK(write_matrix(back) == text);
    CHECK_THROWS_AS(read_matrix("EMB1 2 2\n1 2 3\n"), FormatError);
    CHECK_THROWS_AS(read_matrix("EMB 1 1\n1\n"), FormatError);
    CHECK_THROWS_AS(read_matrix("EMB1 1 1\nx\n"), FormatError);
}

TEST_CASE("WL embedding cost grows about linearly") {
    auto small = load_task(domain_text("visitall"), grid_problem(8, 8));
    auto large = load_task(domain_text("visitall"), grid_problem(8, 16));
    Trajectory t{"", "", {small.initial()}, {}, small.goal()};
    std::vector<LabeledTrajectory> data{{&small, &t}};
    auto vocab = collect_vocabulary(data, 2);
    auto time = [&](const GroundedTask &task) {
        double best = 1e9;
        for (int rep = 0; rep < 7; ++rep) {
            auto start = std::chrono::steady_clock::now();
            for (int i = 0; i < 20; ++i)
                embed_wl(task.initial(), task.goal(), task, vocab);
            best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
        }
        return best;
    };
    double ratio = time(large) / time(small);
    MESSAGE("embed time ratio for doubled grid: " << ratio);
    CHECK(ratio < 2.5);
}
