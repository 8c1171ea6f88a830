// Acceptance run: one PASS/FAIL line per criterion.
//
// A completed run exits 0 whatever the verdicts; a crash exits 3. With
// --strict, any FAIL exits 1. Coverage criteria (9-12) print a calibration
// report when one of them misses.

#include "gplan/domains.hpp"
#include "gplan/generators.hpp"
#include "gplan/harness.hpp"
#include "gplan/log.hpp"
#include "gplan/pddl.hpp"

#include "test_support.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <cstring>
#include <map>
#include <cstdio>
#include <deque>
#include <iostream>
#include <set>
#include <sstream>

using namespace gplan;
using namespace gplan::testing;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
    int id;
    std::string name;
    bool pass;
    std::string detail;
};

std::vector<Verdict> g_verdicts;

void record(int id, std::string name, bool pass, std::string detail) {
    std::printf("criterion %2d: %s  %s  (%s)\n", id, pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    std::fflush(stdout);
    g_verdicts.push_back({id, std::move(name), pass, std::move(detail)});
}

std::string fmt(const char *f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

// ---- 1 ----

// Reachable states from raw add/delete lists, grounded here by brute force
// over every typed binding.
std::set<std::set<std::string>> brute_force_reachable(const DomainDescription &domain,
                                                      const ProblemDescription &problem) {
    std::vector<std::string> names;
    for (const auto &o : problem.objects)
        names.push_back(o.name);
    auto render = [&](const LiftedAtom &atom, const std::vector<int> &binding) {
        std::string s = "(" + domain.predicates[atom.predicate].name;
        for (const Term &t : atom.args)
            s += " " + names[binding[t.index]];
        return s + ")";
    };
    struct Op {
        std::set<std::string> pre, add, del;
    };
    std::vector<Op> ops;
    for (const auto &schema : domain.actions) {
        std::size_t k = schema.parameters.size();
        std::vector<int> binding(k, 0);
        std::size_t total = 1;
        for (std::size_t i = 0; i < k; ++i)
            total *= names.size();
        for (std::size_t code = 0; code < total; ++code) {
            std::size_t c = code;
            bool typed = true;
            for (std::size_t i = 0; i < k; ++i) {
                binding[i] = static_cast<int>(c % names.size());
                c /= names.size();
                typed = typed &&
                        domain.types.is_subtype(problem.objects[binding[i]].type, schema.parameters[i].type);
            }
            if (!typed)
                continue;
            Op op;
            for (const auto &a : schema.preconditions)
                op.pre.insert(render(a, binding));
            for (const auto &a : schema.add_effects)
                op.add.insert(render(a, binding));
            for (const auto &a : schema.delete_effects)
                op.del.insert(render(a, binding));
            ops.push_back(std::move(op));
        }
    }
    std::set<std::string> init;
    for (const auto &lit : problem.init) {
        std::string s = "(" + domain.predicates[lit.predicate].name;
        for (int a : lit.args)
            s += " " + names[a];
        init.insert(s + ")");
    }
    std::set<std::set<std::string>> seen{init};
    std::deque<std::set<std::string>> queue{init};
    while (!queue.empty()) {
        auto s = queue.front();
        queue.pop_front();
        for (const auto &op : ops) {
            if (!std::includes(s.begin(), s.end(), op.pre.begin(), op.pre.end()))
                continue;
            auto next = s;
            for (const auto &d : op.del)
                next.erase(d);
            next.insert(op.add.begin(), op.add.end());
            if (seen.insert(next).second)
                queue.push_back(next);
        }
    }
    return seen;
}

std::set<std::set<std::string>> bfs_over_successors(const GroundedTask &task) {
    auto names = [&](const SymbolicState &s) {
        std::set<std::string> out;
        for (auto a : s.atoms())
            out.insert(task.atom_name(a));
        return out;
    };
    std::set<std::set<std::string>> seen{names(task.initial())};
    std::deque<SymbolicState> queue{task.initial()};
    while (!queue.empty()) {
        auto s = queue.front();
        queue.pop_front();
        for (const auto &succ : successors(s, task))
            if (seen.insert(names(succ.state)).second)
                queue.push_back(succ.state);
    }
    return seen;
}

void criterion_1() {
    auto t0 = Clock::now();
    bool ok = true;
    std::string detail;
    for (const char *fixture : {"blocksworld-2.pddl", "blocksworld-3.pddl"}) {
        auto domain = parse_domain(domain_text("blocksworld"));
        auto problem = parse_problem(fixture_text(fixture), domain);
        auto oracle = brute_force_reachable(domain, problem);
        auto bfs = bfs_over_successors(load_task(domain_text("blocksworld"), fixture_text(fixture)));
        ok = ok && oracle == bfs && !oracle.empty();
        detail += std::string(fixture) + ": " + std::to_string(bfs.size()) + "/" + std::to_string(oracle.size()) +
                  " states; ";
    }
    double secs = seconds_since(t0);
    record(1, "STRIPS reachable sets match brute force", ok && secs < 1.0, detail + fmt("%.3fs", secs));
}

// ---- 2 ----

void criterion_2() {
    auto t0 = Clock::now();
    const std::vector<std::pair<std::string, int>> cases{
        {"blocksworld", 5}, {"gripper", 3}, {"logistics", 3}, {"visitall", 9}};
    std::mt19937_64 rng(2024);
    std::size_t compared = 0, mismatched = 0;
    for (const auto &[domain, size] : cases) {
        auto task = load_task(builtin_domain_text(domain), generate_problem(domain, size, 7, "perm"));
        std::vector<Trajectory> walks;
        for (int w = 0; w < 3; ++w) {
            Trajectory t;
            t.states = random_walk(task, 12, rng);
            walks.push_back(std::move(t));
        }
        std::vector<LabeledTrajectory> data;
        for (const auto &w : walks)
            data.push_back({&task, &w});
        auto vocab = collect_vocabulary(data, 2);
        auto walk = random_walk(task, 20, rng);
        std::vector<SymbolicState> states;
        for (int i = 0; i < 5; ++i)
            states.push_back(walk[(i * (walk.size() - 1)) / 4]);
        std::vector<Vector> reference;
        for (const auto &s : states)
            reference.push_back(embed_wl(s, task.goal(), task, vocab));

        std::vector<std::string> objects;
        for (const auto &o : task.objects())
            objects.push_back(o.name);
        for (int trial = 0; trial < 100; ++trial) {
            auto shuffled = objects;
            std::shuffle(shuffled.begin(), shuffled.end(), rng);
            std::unordered_map<std::string, std::string> renaming;
            for (std::size_t i = 0; i < objects.size(); ++i)
                renaming[objects[i]] = "r" + std::to_string(trial) + "-" + shuffled[i];
            auto renamed = rename_objects(task, renaming);
            auto goal = translate_atoms(task, renamed, task.goal(), renaming);
            for (std::size_t i = 0; i < states.size(); ++i) {
                SymbolicState rs(translate_atoms(task, renamed, states[i].atoms(), renaming));
                Vector v = embed_wl(rs, goal, renamed, vocab);
                ++compared;
                // Bitwise: exact equality of every double.
                if (v.size() != reference[i].size() ||
                    std::memcmp(v.data(), reference[i].data(), sizeof(double) * v.size()) != 0)
                    ++mismatched;
            }
        }
    }
    double secs = seconds_since(t0);
    record(2, "WL embeddings invariant under object renaming", mismatched == 0 && compared == 2000 && secs < 10.0,
           std::to_string(compared - mismatched) + "/" + std::to_string(compared) + " bitwise equal, " +
               fmt("%.2fs", secs));
}

// ---- 3 ----

void criterion_3(const fs::path &data_dir, const std::vector<SearchConfig> &tiers) {
    bool ok = true;
    std::string detail;
    for (const auto &[domain, size] : std::vector<std::pair<std::string, int>>{{"blocksworld", 17}, {"visitall", 121}}) {
        Workspace ws(data_dir, domain);
        ws.ensure_dataset(GenOptions{});
        auto &vocab = ws.vocabulary(2, tiers);
        auto frozen = vocab.size();
        auto task = load_task(ws.domain_text(), generate_problem(domain, size, 3, "big"));
        Vector s0 = embed_wl(task.initial(), task.goal(), task, vocab);
        Vector g = embed_wl_goal(task, vocab);
        bool fits = s0.size() == static_cast<Eigen::Index>(frozen + 1) && g.size() == s0.size() &&
                    vocab.size() == frozen && instance_size(domain, task) == size;
        ok = ok && fits;
        detail += domain + " size " + std::to_string(size) + ": width " + std::to_string(s0.size()) +
                  " = vocabulary " + std::to_string(frozen) + " + OOV, OOV mass " + fmt("%.0f", s0[s0.size() - 1]) +
                  "; ";
    }
    record(3, "WL width fixed by the training vocabulary", ok, detail);
}

// ---- 4 ----

void criterion_4() {
    std::vector<GroundedTask> tasks;
    for (int seed = 0; seed < 3; ++seed)
        tasks.push_back(load_task(builtin_domain_text("blocksworld"), generate_problem("blocksworld", 5, seed, "f")));
    std::vector<const GroundedTask *> ptrs;
    for (const auto &t : tasks)
        ptrs.push_back(&t);
    auto layout = make_fsf_layout(ptrs);

    auto bigger = load_task(builtin_domain_text("blocksworld"), generate_problem("blocksworld", layout.N + 1, 0, "g"));
    bool overflow = false;
    std::string overflow_msg;
    try {
        embed_fsf(bigger.initial(), bigger.goal(), bigger, layout);
    } catch (const CapacityExceeded &e) {
        overflow = e.capacity() == layout.N && e.slots() == static_cast<std::size_t>(layout.N + 1);
        overflow_msg = e.what();
    }

    // Swap two blocks that sit in different positions.
    const auto &task = tasks.front();
    std::unordered_map<std::string, std::string> swap;
    for (const auto &o : task.objects())
        swap[o.name] = o.name;
    swap["b1"] = "b2";
    swap["b2"] = "b1";
    auto renamed = rename_objects(task, swap);
    bool changed = false;
    std::mt19937_64 rng(4);
    for (const auto &s : random_walk(task, 10, rng)) {
        SymbolicState rs(translate_atoms(task, renamed, s.atoms(), swap));
        auto a = embed_fsf(s, task.goal(), task, layout).first;
        auto b = embed_fsf(rs, translate_atoms(task, renamed, task.goal(), swap), renamed, layout).first;
        changed = changed || a != b;
    }
    record(4, "FSF capacity failure and swap sensitivity", overflow && changed,
           "N=" + std::to_string(layout.N) + ", " + (overflow ? overflow_msg : std::string("no capacity error")) +
               ", swap " + (changed ? "changes" : "does not change") + " the vector");
}

// ---- 5 ----

void criterion_5(const fs::path &data_dir, const std::vector<SearchConfig> &tiers) {
    double decode_secs = 0.0;
    std::size_t total = 0, exact = 0;
    std::string detail, misses;
    for (const auto &domain : harness_domains()) {
        Workspace ws(data_dir, domain);
        ws.ensure_dataset(GenOptions{});
        ExperimentConfig cfg;
        cfg.domain = domain;
        cfg.expert_tiers = tiers;
        std::size_t d_total = 0, d_exact = 0;
        for (const auto &entry : ws.entries(SplitName::Train)) {
            ++d_total;
            auto plan = ws.expert_plan(entry, tiers);
            auto emb = ws.embedded(cfg, entry);
            if (!plan || !emb)
                continue;
            const auto &task = ws.task(entry);
            auto encoder = ws.encoder(cfg, entry);
            OracleDeltaModel oracle(*emb);
            auto t0 = Clock::now();
            auto r = beam_decode(task, oracle, *encoder, DecodeConfig{});
            decode_secs += seconds_since(t0);
            if (r.success() && r.plan == *plan) {
                ++d_exact;
                continue;
            }
            std::size_t t = 0;
            while (t < r.plan.size() && t < plan->size() && r.plan[t] == (*plan)[t])
                ++t;
            std::string tie = t < r.steps.size() && r.steps[t].distance == 0.0 ? ", tied at distance 0" : "";
            misses += fs::path(entry.problem_path).stem().string() + " " + std::string(to_string(r.outcome)) +
                      ", leaves the expert plan at step " + std::to_string(t + 1) + tie + "; ";
        }
        total += d_total;
        exact += d_exact;
        detail += domain + " " + std::to_string(d_exact) + "/" + std::to_string(d_total) + "; ";
    }
    record(5, "oracle decoder reproduces expert plans", exact == total && total > 0 && decode_secs < 60.0,
           detail + misses + fmt("decode %.2fs", decode_secs));
}

// ---- 6, 7 ----

EmbeddedTrajectory random_trajectory(Eigen::Index dim, Eigen::Index length, std::mt19937_64 &rng) {
    std::uniform_int_distribution<int> count(0, 3);
    EmbeddedTrajectory t{Matrix(length + 1, dim), Vector(dim)};
    for (Eigen::Index r = 0; r <= length; ++r)
        for (Eigen::Index c = 0; c < dim; ++c)
            t.states(r, c) = count(rng);
    for (Eigen::Index c = 0; c < dim; ++c)
        t.goal[c] = count(rng);
    return t;
}

void criterion_6() {
    auto t0 = Clock::now();
    std::mt19937_64 rng(6);
    std::vector<EmbeddedTrajectory> data{random_trajectory(8, 4, rng), random_trajectory(8, 2, rng),
                                         random_trajectory(8, 3, rng)};
    std::vector<const EmbeddedTrajectory *> batch{&data[0], &data[1], &data[2]};
    RecurrentConfig cfg;
    cfg.seed = 6;
    RecurrentModel model(8, TargetMode::Delta, cfg);

    std::vector<Eigen::Index> picks;
    auto [head, head_size] = model.head_weight_range();
    for (std::size_t i = head; i < head + head_size; i += std::max<std::size_t>(1, head_size / 200))
        picks.push_back(static_cast<Eigen::Index>(i));
    std::uniform_int_distribution<std::size_t> any(0, model.num_parameters() - 1);
    for (int i = 0; i < 300; ++i)
        picks.push_back(static_cast<Eigen::Index>(any(rng)));

    Vector grad;
    model.loss_and_gradient(batch, &grad);
    double worst = 0.0;
    const double h = 1e-6;
    for (auto i : picks) {
        double saved = model.parameters()[i];
        model.parameters()[i] = saved + h;
        double up = model.loss_and_gradient(batch, nullptr);
        model.parameters()[i] = saved - h;
        double down = model.loss_and_gradient(batch, nullptr);
        model.parameters()[i] = saved;
        double numeric = (up - down) / (2 * h);
        double scale = std::max({std::abs(numeric), std::abs(grad[i]), 1e-4});
        worst = std::max(worst, std::abs(numeric - grad[i]) / scale);
    }
    double secs = seconds_since(t0);
    record(6, "recurrent gradients match central differences", worst <= 1e-4 && secs < 10.0,
           std::to_string(picks.size()) + " parameters of " + std::to_string(model.num_parameters()) +
               fmt(", max relative error %.2e", worst) + fmt(", %.2fs", secs));
}

void criterion_7() {
    std::mt19937_64 rng(7);
    const Eigen::Index dim = 6;
    std::vector<EmbeddedTrajectory> data{random_trajectory(dim, 7, rng), random_trajectory(dim, 3, rng),
                                         random_trajectory(dim, 5, rng)};
    std::vector<const EmbeddedTrajectory *> batch{&data[0], &data[1], &data[2]};
    RecurrentConfig cfg;
    cfg.seed = 7;
    RecurrentModel model(dim, TargetMode::Delta, cfg);
    double loss = model.loss_and_gradient(batch, nullptr);
    double steps = 0.0, direct = 0.0;
    for (const auto &t : data) {
        steps += static_cast<double>(t.length());
        auto mem = model.initial_memory();
        for (Eigen::Index i = 0; i < t.length(); ++i)
            direct += (model.predict(t.states.row(i).transpose(), t.goal, mem) - t.states.row(i + 1).transpose())
                          .squaredNorm();
    }
    double implemented = loss * static_cast<double>(dim) * steps;
    double rel = std::abs(implemented - direct) / std::max(std::abs(direct), 1e-300);
    record(7, "delta loss equals recomputed squared error", rel <= 1e-6,
           fmt("implemented %.10g", implemented) + fmt(", direct %.10g", direct) + fmt(", relative %.1e", rel));
}

// ---- 8 ----

struct Expected {
    bool valid;
    std::size_t step;
    InvalidReason reason;
};

// Straight simulation on atom-name sets.
Expected simulate(const GroundedTask &task, const std::vector<std::string> &lines) {
    std::map<std::string, const GroundAction *> by_name;
    for (const auto &a : task.actions())
        by_name[a.name] = &a;
    std::set<AtomId> state(task.initial().atoms().begin(), task.initial().atoms().end());
    for (std::size_t t = 0; t < lines.size(); ++t) {
        auto it = by_name.find(lines[t]);
        if (it == by_name.end())
            return {false, t + 1, InvalidReason::UnknownAction};
        const auto &a = *it->second;
        for (auto p : a.pre)
            if (!state.count(p))
                return {false, t + 1, InvalidReason::Inapplicable};
        for (auto d : a.del)
            state.erase(d);
        state.insert(a.add.begin(), a.add.end());
    }
    for (auto g : task.goal())
        if (!state.count(g))
            return {false, lines.size(), InvalidReason::GoalUnsatisfied};
    return {true, 0, InvalidReason::None};
}

void criterion_8(const fs::path &data_dir, const std::vector<SearchConfig> &tiers) {
    struct Case {
        const GroundedTask *task;
        std::vector<std::string> lines;
    };
    std::vector<std::unique_ptr<Workspace>> spaces;
    std::vector<std::vector<Case>> pools;
    for (const auto &domain : harness_domains()) {
        spaces.push_back(std::make_unique<Workspace>(data_dir, domain));
        auto &ws = *spaces.back();
        ws.ensure_dataset(GenOptions{});
        auto &pool = pools.emplace_back();
        for (auto split : {SplitName::Train, SplitName::Validation, SplitName::Interpolation})
            for (const auto &entry : ws.entries(split)) {
                if (pool.size() == 50)
                    break;
                auto plan = ws.expert_plan(entry, tiers);
                if (!plan || plan->size() < 2)
                    continue;
                Case c{&ws.task(entry), {}};
                for (auto a : *plan)
                    c.lines.push_back(c.task->actions()[a].name);
                pool.push_back(std::move(c));
            }
    }
    // Round-robin over domains.
    std::vector<Case> valid;
    for (std::size_t i = 0; valid.size() < 50; ++i) {
        bool any = false;
        for (auto &pool : pools)
            if (i < pool.size() && valid.size() < 50) {
                valid.push_back(pool[i]);
                any = true;
            }
        if (!any)
            break;
    }

    std::size_t accepted = 0;
    for (const auto &c : valid)
        if (validate_lines(*c.task, c.lines).valid && simulate(*c.task, c.lines).valid)
            ++accepted;

    std::mt19937_64 rng(8);
    std::size_t rejected = 0, attributed = 0, mutants = 0;
    for (std::size_t i = 0; i < valid.size(); ++i) {
        const auto &c = valid[i];
        auto lines = c.lines;
        std::uniform_int_distribution<std::size_t> pos(0, lines.size() - 1);
        switch (i % 3) {
        case 0: {
            // Substitute a ground action that the simulation rejects.
            std::uniform_int_distribution<std::size_t> act(0, c.task->actions().size() - 1);
            for (int tries = 0; tries < 1000; ++tries) {
                auto trial = c.lines;
                trial[pos(rng)] = c.task->actions()[act(rng)].name;
                if (!simulate(*c.task, trial).valid) {
                    lines = trial;
                    break;
                }
            }
            break;
        }
        case 1:
            lines.resize(pos(rng));
            break;
        default:
            lines[pos(rng)] = "(teleport " + c.task->objects().front().name + ")";
            break;
        }
        auto expected = simulate(*c.task, lines);
        if (expected.valid)
            continue;
        ++mutants;
        auto r = validate_lines(*c.task, lines);
        if (!r.valid) {
            ++rejected;
            if (r.step == expected.step && r.reason == expected.reason)
                ++attributed;
        }
    }
    bool ok = valid.size() == 50 && accepted == 50 && mutants == 50 && rejected == 50 && attributed == 50;
    record(8, "validator accepts expert plans and rejects mutants", ok,
           std::to_string(accepted) + "/" + std::to_string(valid.size()) + " valid accepted, " +
               std::to_string(rejected) + "/" + std::to_string(mutants) + " mutants rejected, " +
               std::to_string(attributed) + " with matching step and reason");
}

// ---- 9-13 ----

struct Runner {
    fs::path data_dir;
    int jobs = 0;
    std::map<std::string, CoverageReport> done;

    ExperimentConfig config(const std::string &domain, EncoderKind enc, ModelKind model, TargetMode mode,
                            bool normalize = false) const {
        ExperimentConfig c;
        c.domain = domain;
        c.encoder = enc;
        c.model = model;
        c.mode = mode;
        c.normalize = normalize;
        c.data_dir = data_dir;
        c.jobs = jobs;
        return c;
    }

    const CoverageReport &run(const ExperimentConfig &c) {
        std::string key = c.domain + "/" + c.label() + (c.normalize ? "/normalized" : "");
        auto it = done.find(key);
        if (it != done.end())
            return it->second;
        auto t0 = Clock::now();
        auto r = run_pipeline(c);
        std::printf("  ran %s %s%s in %.1fs:", c.domain.c_str(), c.label().c_str(),
                    c.normalize ? " (normalized)" : "", seconds_since(t0));
        for (const auto &s : r.splits)
            std::printf(" %s %s", std::string(to_string(s.split)).c_str(), s.formatted().c_str());
        std::printf("\n");
        std::fflush(stdout);
        return done.emplace(key, std::move(r)).first->second;
    }
};

double mean_of(const CoverageReport &r, SplitName s) {
    const auto *c = r.find(s);
    return c ? c->mean : 0.0;
}

std::string cov(const CoverageReport &r, SplitName s) {
    const auto *c = r.find(s);
    return c ? c->formatted() : "missing";
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"gplan acceptance run"};
    std::string data_dir = "acceptance-data";
    int jobs = 0;
    bool strict = false, skip_coverage = false;
    app.add_option("--data-dir", data_dir, "dataset and cache root")->capture_default_str();
    app.add_option("--jobs", jobs, "worker threads (0: all cores)");
    app.add_flag("--strict", strict, "exit 1 when any criterion fails");
    app.add_flag("--properties-only", skip_coverage, "skip criteria 9-13");
    CLI11_PARSE(app, argc, argv);
    set_log_level(LogLevel::Warn);

    const auto tiers = default_search_tiers();
    const fs::path root = data_dir;
    auto t_all = Clock::now();
    try {
        criterion_1();
        criterion_2();
        criterion_3(root, tiers);
        criterion_4();
        criterion_5(root, tiers);
        criterion_6();
        criterion_7();
        criterion_8(root, tiers);

        if (!skip_coverage) {
            Runner run{root, jobs, {}};
            using S = SplitName;
            const auto wl = EncoderKind::Wl, fsf = EncoderKind::Fsf;
            const auto tree = ModelKind::Tree, rnn = ModelKind::Recurrent;
            const auto delta = TargetMode::Delta, state = TargetMode::State;

            const auto &bw_delta = run.run(run.config("blocksworld", wl, tree, delta));
            double interp = mean_of(bw_delta, S::Interpolation), extrap = mean_of(bw_delta, S::Extrapolation);
            record(9, "Blocksworld WL tree delta coverage", interp >= 0.67 && extrap >= 0.25,
                   "interpolation " + cov(bw_delta, S::Interpolation) + " (>= 0.67), extrapolation " +
                       cov(bw_delta, S::Extrapolation) + " (>= 0.25)");

            const auto &va_delta = run.run(run.config("visitall", wl, tree, delta));
            std::size_t va_train = 0, va_extrap = 0;
            int va_max = 0;
            {
                Workspace ws(root, "visitall");
                va_train = ws.entries(S::Train).size();
                for (const auto &e : ws.entries(S::Extrapolation)) {
                    ++va_extrap;
                    va_max = std::max(va_max, e.size);
                }
            }
            record(10, "VisitAll WL tree delta extrapolation", mean_of(va_delta, S::Extrapolation) >= 0.50,
                   "extrapolation " + cov(va_delta, S::Extrapolation) + " (>= 0.50) on " + std::to_string(va_extrap) +
                       " instances up to " + std::to_string(va_max) + " cells, " + std::to_string(va_train) +
                       " training instances");

            const auto &bw_state = run.run(run.config("blocksworld", wl, tree, state));
            const auto &va_state = run.run(run.config("visitall", wl, tree, state));
            bool order_bw = mean_of(bw_delta, S::Extrapolation) >= mean_of(bw_state, S::Extrapolation);
            bool order_va = mean_of(va_delta, S::Extrapolation) >= mean_of(va_state, S::Extrapolation);
            record(11, "tree delta >= tree state on extrapolation", order_bw && order_va,
                   "blocksworld " + cov(bw_delta, S::Extrapolation) + " vs " + cov(bw_state, S::Extrapolation) +
                       ", visitall " + cov(va_delta, S::Extrapolation) + " vs " + cov(va_state, S::Extrapolation));

            const auto &bw_fsf = run.run(run.config("blocksworld", fsf, tree, delta));
            const auto &gr_fsf = run.run(run.config("gripper", fsf, tree, delta));
            record(12, "FSF tree extrapolation collapses",
                   mean_of(bw_fsf, S::Extrapolation) <= 0.10 && mean_of(gr_fsf, S::Extrapolation) <= 0.10,
                   "blocksworld " + cov(bw_fsf, S::Extrapolation) + ", gripper " + cov(gr_fsf, S::Extrapolation) +
                       " (<= 0.10)");

            bool zero = true, clean = true;
            std::string rows;
            for (auto enc : {wl, fsf})
                for (auto model : {tree, rnn})
                    for (auto mode : {state, delta}) {
                        const auto &r = run.run(run.config("logistics", enc, model, mode));
                        const auto *c = r.find(S::Extrapolation);
                        zero = zero && c && !c->empty() && c->mean == 0.0 && c->stddev == 0.0;
                        clean = clean && r.failures.empty();
                        for (const auto &o : r.outcomes)
                            clean = clean && o.status != "error";
                        rows += r.label + " " + cov(r, S::Extrapolation) + "; ";
                    }
            record(13, "Logistics extrapolation is zero without failures", zero && clean,
                   rows + (clean ? "no pipeline failures" : "pipeline failures recorded"));

            bool any_miss = false;
            for (const auto &v : g_verdicts)
                any_miss = any_miss || (v.id >= 9 && v.id <= 12 && !v.pass);
            if (any_miss) {
                std::printf("\ncalibration report\n");
                struct Item {
                    const CoverageReport *report;
                    ExperimentConfig config;
                };
                std::vector<Item> items{{&bw_delta, run.config("blocksworld", wl, tree, delta)},
                                        {&bw_state, run.config("blocksworld", wl, tree, state)},
                                        {&va_delta, run.config("visitall", wl, tree, delta)},
                                        {&va_state, run.config("visitall", wl, tree, state)},
                                        {&bw_fsf, run.config("blocksworld", fsf, tree, delta)},
                                        {&gr_fsf, run.config("gripper", fsf, tree, delta)}};
                for (auto &item : items) {
                    Workspace ws(root, item.config.domain);
                    std::printf("== %s %s\n%s", item.config.domain.c_str(), item.config.label().c_str(),
                                calibration_report(ws, item.config, *item.report).c_str());
                }
                std::printf("\nsupplementary: normalized WL histograms (not the default)\n");
                for (const auto &[domain, mode] : std::vector<std::pair<std::string, TargetMode>>{
                         {"blocksworld", delta}, {"blocksworld", state}, {"visitall", delta}, {"visitall", state}})
                    run.run(run.config(domain, wl, tree, mode, true));
                std::printf("\n");
            }
        }

        {
            Workspace ws(root, "blocksworld");
            ws.ensure_dataset(GenOptions{});
            auto d = static_cast<long>(ws.vocabulary(2, tiers).size() + 1);
            RecurrentConfig gru;
            double count = static_cast<double>(RecurrentModel::parameter_count(d, gru));
            double target = 927602.0 + 321.0 * static_cast<double>(d - 587);
            double rel = std::abs(count - target) / target;
            double at587 = static_cast<double>(RecurrentModel::parameter_count(587, gru));
            record(14, "recurrent parameter count", rel <= 0.05,
                   "D=" + std::to_string(d) + fmt(": %.0f", count) + fmt(" vs %.0f", target) +
                       fmt(" (%.1f%% off)", 100 * rel) + fmt("; at D=587: %.0f", at587) +
                       fmt(" vs 927602 (%.1f%% off)", 100 * std::abs(at587 - 927602.0) / 927602.0));
        }
    } catch (const std::exception &e) {
        std::printf("acceptance run crashed: %s\n", e.what());
        return 3;
    }

    int property_failures = 0, coverage_failures = 0;
    for (const auto &v : g_verdicts) {
        bool coverage = v.id >= 9 && v.id <= 13;
        if (!v.pass)
            ++(coverage ? coverage_failures : property_failures);
    }
    std::printf("summary: %zu criteria, %d property failures, %d coverage failures, %.1fs\n", g_verdicts.size(),
                property_failures, coverage_failures, seconds_since(t_all));
    if (g_verdicts.size() != (skip_coverage ? 9u : 14u)) {
        std::printf("incomplete run\n");
        return 3;
    }
    return strict && property_failures + coverage_failures > 0 ? 1 : 0;
}
