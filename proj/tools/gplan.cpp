// gplan: command-line front end for the planning pipeline.

#include "gplan/domains.hpp"
#include "gplan/harness.hpp"
#include "gplan/log.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <iostream>
#include <optional>

using namespace gplan;

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kStageFailure = 2;

class UsageError : public Error {
public:
    using Error::Error;
};

struct Globals {
    std::string domain;
    std::string encoder = "wl";
    std::string model = "tree";
    std::string mode = "delta";
    std::optional<std::uint64_t> seed;
    std::string config;
    int jobs = 0;
    std::string data_dir = "gplan-data";
    bool force = false;
    bool verbose = false;
    bool quiet = false;
};

std::vector<SplitName> parse_splits(const std::vector<std::string> &names) {
    std::vector<SplitName> out;
    for (const auto &n : names)
        out.push_back(parse_split_name(n));
    return out;
}

ExperimentConfig build_config(const Globals &g, bool need_domain = true) {
    ExperimentConfig c;
    if (need_domain) {
        if (g.domain.empty())
            throw UsageError("--domain is required");
        c.domain = g.domain;
    }
    try {
        c.encoder = parse_encoder_kind(g.encoder);
        c.model = parse_model_kind(g.model);
        c.mode = parse_target_mode(g.mode);
    } catch (const Error &e) {
        throw UsageError(e.what());
    }
    if (!g.config.empty())
        apply_config(Config::load(g.config), c);
    if (g.seed)
        c.seeds = {*g.seed};
    c.data_dir = g.data_dir;
    c.jobs = g.jobs;
    c.gen.jobs = g.jobs;
    c.force = g.force;
    return c;
}

ManifestEntry external_entry(const std::string &domain, const std::string &problem) {
    if (!fs::exists(problem))
        throw UsageError("no such problem file: " + problem);
    return {SplitName::Extrapolation, domain, fs::absolute(problem).string(), 0};
}

void print_report(const CoverageReport &r) {
    std::vector<CoverageReport> one{r};
    std::cout << format_report_table(one);
    for (const auto &f : r.failures)
        std::cout << "failure: " << f << "\n";
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"gplan: learned transition models for generalized planning"};
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--domain", g.domain, "blocksworld, gripper, logistics or visitall");
    app.add_option("--encoder", g.encoder, "wl or fsf")->capture_default_str();
    app.add_option("--model", g.model, "tree, recurrent, oracle or planner-ref")->capture_default_str();
    app.add_option("--mode", g.mode, "state or delta")->capture_default_str();
    app.add_option("--seed", g.seed, "single seed (default: the configured seed list)");
    app.add_option("--config", g.config, "key = value file with train./decode./gen. keys");
    app.add_option("--jobs", g.jobs, "worker threads (0: all cores)")->capture_default_str();
    app.add_option("--data-dir", g.data_dir, "data and cache root")->capture_default_str();
    app.add_flag("--force", g.force, "ignore cached stage outputs");
    app.add_flag("-v,--verbose", g.verbose, "debug logging");
    app.add_flag("-q,--quiet", g.quiet, "warnings and errors only");

    auto *gen = app.add_subcommand("gen", "generate (or import) problem instances and the split manifest");
    std::string profile = "ci", import_dir;
    bool no_verify = false;
    gen->add_option("--profile", profile, "ci or full")->capture_default_str();
    gen->add_option("--import", import_dir, "ingest <dir>/<split>/*.pddl instead of generating");
    gen->add_flag("--no-verify", no_verify, "skip planner verification of train/validation instances");

    auto *plan = app.add_subcommand("plan", "expert plans for a split, or for one problem file");
    std::vector<std::string> splits{"train", "validation"};
    std::string problem;
    plan->add_option("--split", splits, "splits to process")->capture_default_str();
    plan->add_option("--problem", problem, "plan a single problem file and print the plan");

    auto *traj = app.add_subcommand("traj", "reconstruct expert trajectories (TRAJ1)");
    traj->add_option("--split", splits, "splits to process")->capture_default_str();
    traj->add_option("--problem", problem, "print the trajectory of one problem file");

    auto *vocab = app.add_subcommand("vocab", "collect and freeze the WL colour vocabulary");

    auto *embed = app.add_subcommand("embed", "embed train/validation trajectories (EMB1)");

    auto *train = app.add_subcommand("train", "train the transition model for each seed");

    auto *solve = app.add_subcommand("solve", "decode one problem with a trained model");
    solve->add_option("--problem", problem, "problem file")->required();
    bool show_log = false;
    solve->add_flag("--log", show_log, "print the per-step decoding log");

    auto *eval = app.add_subcommand("eval", "run the full pipeline and report coverage");
    std::vector<std::string> eval_splits{"validation", "interpolation", "extrapolation"};
    eval->add_option("--split", eval_splits, "splits to evaluate")->capture_default_str();

    auto *report = app.add_subcommand("report", "tabulate results/*.tsv across configurations");
    std::string plot_dir;
    bool calibration = false;
    report->add_option("--plot", plot_dir, "write one SVG bar chart per split into this directory");
    report->add_flag("--calibration", calibration, "print calibration diagnostics per result");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return kUsage;
    }

    set_log_level(g.verbose ? LogLevel::Debug : g.quiet ? LogLevel::Warn : LogLevel::Info);

    try {
        const bool need_domain = !report->parsed();
        ExperimentConfig cfg = build_config(g, need_domain);
        const auto known = harness_domains();
        if (need_domain && import_dir.empty() && std::find(known.begin(), known.end(), cfg.domain) == known.end())
            throw UsageError("unknown domain '" + cfg.domain + "'");
        Workspace ws(cfg.data_dir, cfg.domain, cfg.force, cfg.jobs);

        if (gen->parsed()) {
            if (profile != "ci" && profile != "full")
                throw UsageError("--profile must be ci or full");
            cfg.gen.profile = profile;
            cfg.gen.verify = !no_verify && cfg.gen.verify;
            if (g.seed)
                cfg.gen.seed = *g.seed;
            auto entries = import_dir.empty() ? generate_dataset(ws.dir(), cfg.domain, cfg.gen)
                                              : import_dataset(ws.dir(), cfg.domain, import_dir);
            for (const auto &s : group_splits(entries))
                std::cout << to_string(s.name) << "\t" << s.instances.size() << "\n";
            std::cout << "manifest\t" << (ws.dir() / "manifest.tsv").string() << "\n";
            return kOk;
        }

        if ((plan->parsed() || traj->parsed()) && !problem.empty()) {
            auto entry = external_entry(cfg.domain, problem);
            if (!ws.has_manifest())
                write_file_atomic(ws.dir() / "domain.pddl", builtin_domain_text(cfg.domain));
            auto p = ws.expert_plan(entry, cfg.expert_tiers);
            if (!p) {
                std::cerr << "expert planner found no plan\n";
                return kStageFailure;
            }
            const auto &t = ws.task(entry);
            if (plan->parsed())
                std::cout << format_plan(t, *p);
            else
                std::cout << write_trajectory(t, reconstruct(t, *p));
            return kOk;
        }

        if (!report->parsed())
            ws.ensure_dataset(cfg.gen);

        if (plan->parsed() || traj->parsed()) {
            auto sp = parse_splits(splits);
            auto failures = ws.plan_all(sp, cfg.expert_tiers);
            std::size_t n = 0;
            for (auto s : sp)
                for (const auto &e : ws.entries(s)) {
                    ++n;
                    if (traj->parsed())
                        ws.trajectory(e, cfg.expert_tiers);
                }
            std::cout << (traj->parsed() ? "trajectories" : "plans") << "\t" << n - failures.size() << "/" << n
                      << "\t" << (ws.dir() / (traj->parsed() ? "traj" : "plans")).string() << "\n";
            for (const auto &f : failures)
                std::cerr << f << "\n";
            return failures.empty() ? kOk : kStageFailure;
        }

        if (vocab->parsed()) {
            auto &v = ws.vocabulary(cfg.wl_iterations, cfg.expert_tiers);
            std::cout << "colours\t" << v.size() << "\nwidth\t" << v.size() + 1 << "\nfile\t"
                      << (ws.dir() / ("vocab-k" + std::to_string(cfg.wl_iterations) + ".wl")).string() << "\n";
            return kOk;
        }

        if (embed->parsed()) {
            std::size_t n = 0, missing = 0;
            Eigen::Index dim = 0;
            for (auto s : {SplitName::Train, SplitName::Validation})
                for (const auto &e : ws.entries(s)) {
                    if (auto emb = ws.embedded(cfg, e)) {
                        ++n;
                        dim = emb->dim();
                    } else {
                        ++missing;
                    }
                }
            std::cout << "embedded\t" << n << "\nwidth\t" << dim << "\n";
            return missing ? kStageFailure : kOk;
        }

        if (train->parsed()) {
            if (cfg.model == ModelKind::Oracle || cfg.model == ModelKind::PlannerRef)
                throw UsageError("--model " + std::string(to_string(cfg.model)) + " has nothing to train");
            for (auto seed : cfg.seeds) {
                auto m = ws.train(cfg, seed);
                const auto &c = m.curve;
                std::cout << cfg.label() << "\tseed " << seed << "\titerations " << c.train_loss.size()
                          << "\tbest " << c.best_iteration;
                if (c.best_iteration >= 0 && static_cast<std::size_t>(c.best_iteration) < c.validation_loss.size())
                    std::cout << "\tvalidation_loss " << format_double(c.validation_loss[c.best_iteration]);
                std::cout << "\n";
            }
            return kOk;
        }

        if (solve->parsed()) {
            auto entry = external_entry(cfg.domain, problem);
            if (cfg.model == ModelKind::PlannerRef)
                throw UsageError("solve needs a learned or oracle model");
            const std::uint64_t seed = cfg.seeds.front();
            auto model = ws.train(cfg, seed);
            const auto &t = ws.task(entry);
            auto enc = ws.encoder(cfg, entry);
            std::unique_ptr<TransitionModel> oracle;
            const TransitionModel *m = model.model.get();
            if (cfg.model == ModelKind::Oracle) {
                auto emb = ws.embedded(cfg, entry);
                if (!emb)
                    throw Error("oracle: expert planner found no plan");
                oracle = std::make_unique<OracleDeltaModel>(std::move(*emb));
                m = oracle.get();
            }
            auto r = beam_decode(t, *m, *enc, cfg.decode);
            if (show_log)
                std::cerr << format_rollout_log(t, r);
            std::cerr << "outcome " << to_string(r.outcome) << " steps " << r.plan.size() << "\n";
            if (!r.success())
                return kStageFailure;
            std::cout << format_plan(t, r.plan);
            return kOk;
        }

        if (eval->parsed()) {
            cfg.eval_splits = parse_splits(eval_splits);
            auto r = run_pipeline(ws, cfg);
            print_report(r);
            std::cout << "results\t" << (ws.dir() / "results" / (cfg.label() + ".tsv")).string() << "\n";
            bool errors = !r.failures.empty() ||
                          std::any_of(r.outcomes.begin(), r.outcomes.end(),
                                      [](const InstanceOutcome &o) { return o.status == "error"; });
            return errors ? kStageFailure : kOk;
        }

        if (report->parsed()) {
            std::vector<CoverageReport> reports;
            std::vector<std::string> domains =
                g.domain.empty() ? harness_domains() : std::vector<std::string>{g.domain};
            for (const auto &d : domains) {
                fs::path dir = fs::path(cfg.data_dir) / d / "results";
                if (!fs::is_directory(dir))
                    continue;
                std::vector<fs::path> files;
                for (const auto &e : fs::directory_iterator(dir))
                    if (e.path().extension() == ".tsv")
                        files.push_back(e.path());
                std::sort(files.begin(), files.end());
                for (const auto &f : files)
                    reports.push_back(read_outcomes(read_file(f)));
            }
            if (reports.empty()) {
                std::cerr << "no results under " << cfg.data_dir << "; run eval first\n";
                return kStageFailure;
            }
            std::cout << format_report_table(reports);
            write_file_atomic(fs::path(cfg.data_dir) / "report.tsv", format_report_tsv(reports));
            std::cout << "tsv\t" << (fs::path(cfg.data_dir) / "report.tsv").string() << "\n";
            if (!plot_dir.empty())
                for (auto s : {SplitName::Validation, SplitName::Interpolation, SplitName::Extrapolation}) {
                    fs::path out = fs::path(plot_dir) / ("coverage-" + std::string(to_string(s)) + ".svg");
                    write_file_atomic(out, render_split_svg(reports, s));
                    std::cout << "plot\t" << out.string() << "\n";
                }
            if (calibration)
                for (const auto &r : reports) {
                    ExperimentConfig rc = cfg;
                    rc.domain = r.domain;
                    Workspace rw(cfg.data_dir, r.domain, false, cfg.jobs);
                    std::cout << "\n" << calibration_report(rw, rc, r);
                }
            return kOk;
        }
    } catch (const UsageError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const ConfigError &e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kStageFailure;
    }
    return kOk;
}
