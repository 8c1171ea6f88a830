#include "gplan/domains.hpp"
#include "gplan/generators.hpp"
#include "gplan/harness.hpp"
#include "gplan/log.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace gplan;

namespace {

std::vector<std::string> atom_names(const GroundedTask &task, std::span<const AtomId> atoms) {
    std::vector<std::string> out;
    for (auto a : atoms)
        out.push_back(task.atom_name(a));
    return out;
}

SymbolicState state_from(const GroundedTask &task, const std::vector<std::string> &atoms) {
    AtomSet ids;
    for (const auto &a : atoms) {
        auto id = task.find_atom(a);
        if (!id)
            throw Error("unknown atom " + a);
        ids.push_back(*id);
    }
    return SymbolicState(std::move(ids));
}

std::vector<ActionId> resolve_plan(const GroundedTask &task, const std::vector<std::string> &plan) {
    std::vector<ActionId> out;
    for (const auto &line : plan) {
        auto id = task.find_action(line);
        if (!id)
            throw Error("unknown action " + line);
        out.push_back(*id);
    }
    return out;
}

struct PyVocabulary {
    WlVocabulary vocab;
};

}  // namespace

PYBIND11_MODULE(_gplan, m) {
    m.doc() = "Learned transition models for generalized planning";
    m.attr("__version__") = "0.1.0";

    py::register_exception<Error>(m, "GplanError", PyExc_RuntimeError);

    m.def("set_log_level", [](const std::string &level) {
        if (level == "debug") set_log_level(LogLevel::Debug);
        else if (level == "info") set_log_level(LogLevel::Info);
        else if (level == "warn") set_log_level(LogLevel::Warn);
        else if (level == "off") set_log_level(LogLevel::Off);
        else throw Error("log level must be debug, info, warn or off");
    });

    m.def("domains", &harness_domains, "Domains with bundled PDDL and generators.");
    m.def("builtin_domain", [](const std::string &d) { return std::string(builtin_domain_text(d)); }, py::arg("domain"));
    m.def("generate_problem", &generate_problem, py::arg("domain"), py::arg("size"), py::arg("seed"),
          py::arg("name") = "problem");
    m.def("instance_seed", &instance_seed, py::arg("base"), py::arg("domain"), py::arg("size"), py::arg("index"));

    py::class_<GroundedTask>(m, "Task")
        .def_property_readonly("problem_name", &GroundedTask::problem_name)
        .def_property_readonly("objects",
                               [](const GroundedTask &t) {
                                   std::vector<std::string> out;
                                   for (const auto &o : t.objects())
                                       out.push_back(o.name);
                                   return out;
                               })
        .def_property_readonly("num_atoms", [](const GroundedTask &t) { return t.atoms().size(); })
        .def_property_readonly("actions",
                               [](const GroundedTask &t) {
                                   std::vector<std::string> out;
                                   for (const auto &a : t.actions())
                                       out.push_back(a.name);
                                   return out;
                               })
        .def_property_readonly("initial", [](const GroundedTask &t) { return atom_names(t, t.initial().atoms()); })
        .def_property_readonly("goal", [](const GroundedTask &t) { return atom_names(t, t.goal()); })
        .def("successors",
             [](const GroundedTask &t, const std::vector<std::string> &state) {
                 std::vector<std::pair<std::string, std::vector<std::string>>> out;
                 for (const auto &s : successors(state_from(t, state), t))
                     out.emplace_back(t.actions()[s.action].name, atom_names(t, s.state.atoms()));
                 return out;
             },
             py::arg("state"), "(action, next state) pairs in canonical action order.")
        .def("is_goal",
             [](const GroundedTask &t, const std::vector<std::string> &state) {
                 return goal_satisfied(state_from(t, state), t.goal());
             },
             py::arg("state"));

    m.def("load_task", &load_task, py::arg("domain_text"), py::arg("problem_text"));

    m.def(
        "solve",
        [](const GroundedTask &task, const std::string &strategy, double timeout) {
            SearchConfig c;
            c.strategy = parse_search_strategy(strategy);
            c.timeout_seconds = timeout;
            SearchResult r;
            {
                py::gil_scoped_release release;
                r = solve(task, c);
            }
            py::dict out;
            out["status"] = std::string(to_string(r.status));
            std::vector<std::string> plan;
            for (auto a : r.plan.actions)
                plan.push_back(task.actions()[a].name);
            out["plan"] = plan;
            out["expansions"] = r.expansions;
            return out;
        },
        py::arg("task"), py::arg("strategy") = "astar_hmax", py::arg("timeout") = 60.0);

    m.def(
        "validate",
        [](const GroundedTask &task, const std::vector<std::string> &plan) {
            auto r = validate_lines(task, plan);
            py::dict out;
            out["valid"] = r.valid;
            out["step"] = r.step;
            out["reason"] = std::string(to_string(r.reason));
            out["detail"] = r.detail;
            return out;
        },
        py::arg("task"), py::arg("plan"));

    m.def(
        "trajectory",
        [](const GroundedTask &task, const std::vector<std::string> &plan) {
            return write_trajectory(task, reconstruct(task, resolve_plan(task, plan)));
        },
        py::arg("task"), py::arg("plan"), "TRAJ1 text of the states visited by a valid plan.");

    py::class_<PyVocabulary>(m, "Vocabulary")
        .def_property_readonly("k", [](const PyVocabulary &v) { return v.vocab.k(); })
        .def_property_readonly("size", [](const PyVocabulary &v) { return v.vocab.size(); })
        .def("save", [](const PyVocabulary &v) { return v.vocab.save(); })
        .def_static("load", [](const std::string &text) { return PyVocabulary{WlVocabulary::load(text)}; })
        .def(
            "embed",
            [](PyVocabulary &v, const GroundedTask &task, const std::vector<std::string> &state, bool normalize) {
                return embed_wl(state_from(task, state), task.goal(), task, v.vocab, WlOptions{normalize});
            },
            py::arg("task"), py::arg("state"), py::arg("normalize") = false,
            "Colour histogram of length size + 1 (last entry: OOV count).")
        .def(
            "embed_goal",
            [](PyVocabulary &v, const GroundedTask &task, bool normalize) {
                return embed_wl_goal(task, v.vocab, WlOptions{normalize});
            },
            py::arg("task"), py::arg("normalize") = false);

    m.def(
        "collect_vocabulary",
        [](const std::vector<const GroundedTask *> &tasks, const std::vector<std::vector<std::string>> &plans, int k) {
            if (tasks.size() != plans.size())
                throw Error("tasks and plans differ in length");
            std::vector<Trajectory> trajs;
            for (std::size_t i = 0; i < tasks.size(); ++i)
                trajs.push_back(reconstruct(*tasks[i], resolve_plan(*tasks[i], plans[i])));
            std::vector<LabeledTrajectory> data;
            for (std::size_t i = 0; i < tasks.size(); ++i)
                data.push_back({tasks[i], &trajs[i]});
            return PyVocabulary{collect_vocabulary(data, k)};
        },
        py::arg("tasks"), py::arg("plans"), py::arg("k") = 2);

    m.def(
        "coverage",
        [](const std::vector<std::vector<bool>> &per_seed) {
            std::vector<InstanceOutcome> outcomes;
            std::vector<std::uint64_t> seeds;
            for (std::size_t s = 0; s < per_seed.size(); ++s) {
                seeds.push_back(s);
                for (std::size_t i = 0; i < per_seed[s].size(); ++i) {
                    InstanceOutcome o;
                    o.split = SplitName::Extrapolation;
                    o.seed = s;
                    o.problem = std::to_string(i);
                    o.status = per_seed[s][i] ? "success" : "horizon-exceeded";
                    outcomes.push_back(o);
                }
            }
            std::vector<SplitName> splits{SplitName::Extrapolation};
            auto r = compute_coverage("", "", outcomes, seeds, splits);
            const auto &c = r.splits.front();
            py::dict out;
            out["mean"] = c.mean;
            out["std"] = c.stddev;
            out["per_seed"] = c.per_seed;
            out["formatted"] = c.formatted();
            return out;
        },
        py::arg("per_seed"), "Mean and population std of per-seed success rates.");

    m.def(
        "parse_config",
        [](const std::string &text) { return Config::parse(text).values(); }, py::arg("text"));

    m.def(
        "recurrent_parameter_count",
        [](long dim, const std::string &cell) {
            RecurrentConfig c;
            c.cell = parse_cell_type(cell);
            return RecurrentModel::parameter_count(dim, c);
        },
        py::arg("dim"), py::arg("cell") = "gru");

    m.def(
        "run_pipeline",
        [](const std::string &domain, const std::filesystem::path &data_dir, const std::string &encoder,
           const std::string &model, const std::string &mode, const std::vector<std::uint64_t> &seeds,
           const std::string &config, int jobs, const std::vector<std::string> &splits) {
            ExperimentConfig c;
            c.domain = domain;
            c.data_dir = data_dir;
            c.encoder = parse_encoder_kind(encoder);
            c.model = parse_model_kind(model);
            c.mode = parse_target_mode(mode);
            if (!config.empty())
                apply_config(Config::parse(config), c);
            if (!seeds.empty())
                c.seeds = seeds;
            c.jobs = jobs;
            if (!splits.empty()) {
                c.eval_splits.clear();
                for (const auto &s : splits)
                    c.eval_splits.push_back(parse_split_name(s));
            }
            CoverageReport r;
            {
                py::gil_scoped_release release;
                r = run_pipeline(c);
            }
            py::dict out;
            out["label"] = r.label;
            py::dict per_split;
            for (const auto &s : r.splits) {
                py::dict d;
                d["instances"] = s.instances;
                d["mean"] = s.mean;
                d["std"] = s.stddev;
                d["formatted"] = s.formatted();
                per_split[py::str(std::string(to_string(s.split)))] = d;
            }
            out["splits"] = per_split;
            out["failures"] = r.failures;
            return out;
        },
        py::arg("domain"), py::arg("data_dir"), py::arg("encoder") = "wl", py::arg("model") = "tree",
        py::arg("mode") = "delta", py::arg("seeds") = std::vector<std::uint64_t>{}, py::arg("config") = "",
        py::arg("jobs") = 0, py::arg("splits") = std::vector<std::string>{}, "Runs the cached pipeline and returns per-split coverage.");
}
