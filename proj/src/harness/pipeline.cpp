#include "gplan/harness.hpp"
#include "gplan/log.hpp"
#include "gplan/parallel.hpp"

#include <chrono>
#include <cstdio>
#include <sstream>

namespace gplan {

std::string_view to_string(EncoderKind kind) { return kind == EncoderKind::Wl ? "wl" : "fsf"; }

EncoderKind parse_encoder_kind(std::string_view name) {
    if (name == "wl")
        return EncoderKind::Wl;
    if (name == "fsf")
        return EncoderKind::Fsf;
    throw Error("unknown encoder '" + std::string(name) + "' (expected wl or fsf)");
}

std::string_view to_string(ModelKind kind) {
    switch (kind) {
    case ModelKind::Tree: return "tree";
    case ModelKind::Recurrent: return "recurrent";
    case ModelKind::Oracle: return "oracle";
    case ModelKind::PlannerRef: return "planner-ref";
    }
    return "?";
}

ModelKind parse_model_kind(std::string_view name) {
    if (name == "tree" || name == "xgb")
        return ModelKind::Tree;
    if (name == "recurrent" || name == "rnn" || name == "lstm" || name == "gru")
        return ModelKind::Recurrent;
    if (name == "oracle")
        return ModelKind::Oracle;
    if (name == "planner-ref")
        return ModelKind::PlannerRef;
    throw Error("unknown model '" + std::string(name) + "' (expected tree, recurrent, oracle or planner-ref)");
}

std::string ExperimentConfig::label() const {
    if (model == ModelKind::PlannerRef)
        return "planner-ref";
    return std::string(to_string(encoder)) + "-" + std::string(to_string(model)) + "-" + std::string(to_string(mode));
}

RecurrentConfig ExperimentConfig::recurrent_for(std::uint64_t seed) const {
    RecurrentConfig c = recurrent;
    c.seed = seed;
    if (!loss_overridden)
        c.loss = default_loss(mode);
    return c;
}

namespace {

std::vector<std::string> split_list(const std::string &text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text + ",") {
        if (c == ',' || c == ' ') {
            if (!cur.empty())
                out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    return out;
}

LossKind parse_loss(const std::string &name) {
    if (name == "mse")
        return LossKind::Mse;
    if (name == "cosine")
        return LossKind::Cosine;
    throw ConfigError("train.loss: expected mse or cosine, got '" + name + "'");
}

}  // namespace

void apply_config(const Config &config, ExperimentConfig &e) {
    auto &t = e.tree;
    auto &r = e.recurrent;
    auto &d = e.decode;
    for (const auto &[key, value] : config.values()) {
        const auto i = [&](int fallback) { return config.get_int(key, fallback); };
        const auto f = [&](double fallback) { return config.get_double(key, fallback); };
        try {
            if (key == "train.k") e.wl_iterations = i(e.wl_iterations);
            else if (key == "train.normalize") e.normalize = config.get_bool(key, e.normalize);
            else if (key == "train.seeds") {
                e.seeds.clear();
                for (const auto &s : split_list(value))
                    e.seeds.push_back(std::stoull(s));
                if (e.seeds.empty())
                    throw ConfigError("train.seeds: empty list");
            }
            else if (key == "train.loss") { r.loss = parse_loss(value); e.loss_overridden = true; }
            else if (key == "train.tree.learning_rate") t.learning_rate = f(t.learning_rate);
            else if (key == "train.tree.max_depth") t.max_depth = i(t.max_depth);
            else if (key == "train.tree.rounds") t.max_rounds = i(t.max_rounds);
            else if (key == "train.tree.patience") t.patience = i(t.patience);
            else if (key == "train.tree.lambda") t.lambda = f(t.lambda);
            else if (key == "train.tree.gamma") t.gamma = f(t.gamma);
            else if (key == "train.tree.min_child_weight") t.min_child_weight = f(t.min_child_weight);
            else if (key == "train.tree.max_bins") t.max_bins = i(t.max_bins);
            else if (key == "train.tree.threads") t.threads = i(t.threads);
            else if (key == "train.rnn.cell") r.cell = parse_cell_type(value);
            else if (key == "train.rnn.hidden") r.hidden = i(r.hidden);
            else if (key == "train.rnn.embed") r.embed = i(r.embed);
            else if (key == "train.rnn.layers") r.layers = i(r.layers);
            else if (key == "train.rnn.learning_rate") r.learning_rate = f(r.learning_rate);
            else if (key == "train.rnn.batch_size") r.batch_size = i(r.batch_size);
            else if (key == "train.rnn.epochs") r.epochs = i(r.epochs);
            else if (key == "train.rnn.patience") r.patience = i(r.patience);
            else if (key == "train.rnn.clip_norm") r.clip_norm = f(r.clip_norm);
            else if (key == "decode.beam_width") d.beam_width = i(d.beam_width);
            else if (key == "decode.max_steps") d.max_steps = i(d.max_steps);
            else if (key == "decode.distance") {
                if (value == "default") d.distance.reset();
                else d.distance = parse_distance(value);
            }
            else if (key == "decode.revisit") d.revisit = parse_revisit_policy(value);
            else if (key == "gen.seed") e.gen.seed = std::stoull(value);
            else if (key == "gen.profile") {
                if (value != "ci" && value != "full")
                    throw ConfigError("gen.profile: expected ci or full");
                e.gen.profile = value;
            }
            else if (key == "gen.verify") e.gen.verify = config.get_bool(key, e.gen.verify);
            else if (key == "gen.planner_timeout") e.expert_tiers.at(0).timeout_seconds = f(60.0);
            else if (key == "gen.fallback_timeout") e.expert_tiers.at(1).timeout_seconds = f(300.0);
            else throw ConfigError("unknown config key '" + key + "'");
        } catch (const ConfigError &) {
            throw;
        } catch (const std::exception &ex) {
            throw ConfigError("config key " + key + ": " + ex.what());
        }
    }
    if (d.beam_width < 1 || d.max_steps < 1)
        throw ConfigError("decode.beam_width and decode.max_steps must be >= 1");
    e.gen.tiers = e.expert_tiers;
}

// ---- cached stages ----

namespace {

Digest &add_tiers(Digest &d, std::span<const SearchConfig> tiers) {
    for (const auto &t : tiers)
        d.add(to_string(t.strategy)).add(t.timeout_seconds).add(static_cast<long long>(t.max_expansions));
    return d;
}

std::string stem_of(const ManifestEntry &entry) { return fs::path(entry.problem_path).stem().string(); }

std::string curve_text(const TrainingCurve &c) {
    std::string out = "train";
    for (double v : c.train_loss)
        out += " " + format_double(v);
    out += "\nvalidation";
    for (double v : c.validation_loss)
        out += " " + format_double(v);
    out += "\nbest " + std::to_string(c.best_iteration) + "\n";
    return out;
}

TrainingCurve parse_curve(const std::string &text) {
    TrainingCurve c;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string tag, v;
        ls >> tag;
        if (tag == "best") {
            ls >> c.best_iteration;
            continue;
        }
        auto &dst = tag == "train" ? c.train_loss : c.validation_loss;
        while (ls >> v)
            dst.push_back(parse_double(v));
    }
    return c;
}

std::string decode_config_text(const DecodeConfig &d) {
    return "beam_width=" + std::to_string(d.beam_width) + " max_steps=" + std::to_string(d.max_steps) +
           " distance=" + (d.distance ? std::string(to_string(*d.distance)) : std::string("default")) +
           " revisit=" + std::string(to_string(d.revisit));
}

std::string tree_config_text(const TreeConfig &t) {
    return "learning_rate=" + format_double(t.learning_rate) + " max_depth=" + std::to_string(t.max_depth) +
           " rounds=" + std::to_string(t.max_rounds) + " patience=" + std::to_string(t.patience) +
           " lambda=" + format_double(t.lambda) + " min_child_weight=" + format_double(t.min_child_weight) +
           " gamma=" + format_double(t.gamma) + " max_bins=" + std::to_string(t.max_bins);
}

std::string recurrent_config_text(const RecurrentConfig &r) {
    return "cell=" + std::string(to_string(r.cell)) + " embed=" + std::to_string(r.embed) +
           " hidden=" + std::to_string(r.hidden) + " layers=" + std::to_string(r.layers) +
           " learning_rate=" + format_double(r.learning_rate) + " batch_size=" + std::to_string(r.batch_size) +
           " epochs=" + std::to_string(r.epochs) + " patience=" + std::to_string(r.patience) +
           " clip_norm=" + format_double(r.clip_norm) + " seed=" + std::to_string(r.seed) +
           " loss=" + std::string(to_string(r.loss));
}

// Per-instance decode record as cached.
std::string outcome_record(const InstanceOutcome &o) {
    return o.status + "\t" + std::to_string(o.plan_length) + "\t" + format_double(o.seconds) + "\t" +
           format_double(o.mean_distance) + "\t" + format_double(o.oov_fraction) + "\n";
}

bool parse_outcome_record(const std::string &text, InstanceOutcome &o) {
    std::istringstream in(text);
    std::string len, secs, dist, oov;
    if (!std::getline(in, o.status, '\t') || !std::getline(in, len, '\t') || !std::getline(in, secs, '\t') ||
        !std::getline(in, dist, '\t') || !std::getline(in, oov))
        return false;
    o.plan_length = std::stoull(len);
    o.seconds = parse_double(secs);
    o.mean_distance = parse_double(dist);
    o.oov_fraction = parse_double(oov);
    return true;
}

}  // namespace

std::optional<std::vector<ActionId>> cached_expert_plan(StageCache &cache, std::string_view domain_text,
                                                        std::string_view problem_text, const GroundedTask &task,
                                                        std::span<const SearchConfig> tiers) {
    Digest d;
    d.add("plan-v1").add(domain_text).add(problem_text);
    const std::string key = add_tiers(d, tiers).hex();
    auto resolve_lines = [&](const std::string &text) -> std::optional<std::vector<ActionId>> {
        if (text.rfind("; unsolved", 0) == 0)
            return std::nullopt;
        std::vector<ActionId> plan;
        for (const auto &line : parse_plan_lines(text)) {
            auto id = task.find_action(line);
            if (!id)
                throw Error("cached plan names unknown action " + line);
            plan.push_back(*id);
        }
        return plan;
    };
    if (auto hit = cache.load("plan", key))
        return resolve_lines(*hit);
    auto result = solve_tiered(task, tiers);
    if (!result.solved()) {
        cache.store("plan", key, "; unsolved " + std::string(to_string(result.status)) + "\n");
        return std::nullopt;
    }
    cache.store("plan", key, format_plan(task, result.plan.actions));
    return result.plan.actions;
}

Workspace::Workspace(fs::path data_dir, std::string domain, bool force, int jobs)
    : data_dir_(std::move(data_dir)), domain_(std::move(domain)), cache_(data_dir_ / "cache", force), jobs_(jobs) {}

bool Workspace::has_manifest() const { return fs::is_regular_file(dir() / "manifest.tsv"); }

const std::vector<ManifestEntry> &Workspace::manifest() {
    std::lock_guard lock(mutex_);
    if (!manifest_) {
        if (!has_manifest())
            throw Error("no manifest at " + (dir() / "manifest.tsv").string() + "; run gen first");
        manifest_ = read_manifest(read_file(dir() / "manifest.tsv"));
    }
    return *manifest_;
}

std::vector<ManifestEntry> Workspace::entries(SplitName split) {
    std::vector<ManifestEntry> out;
    for (const auto &e : manifest())
        if (e.split == split)
            out.push_back(e);
    return out;
}

void Workspace::ensure_dataset(const GenOptions &options) {
    if (has_manifest())
        return;
    log_info("generating " + domain_ + " instances under " + dir().string());
    auto entries = generate_dataset(dir(), domain_, options);
    std::lock_guard lock(mutex_);
    manifest_ = std::move(entries);
}

const std::string &Workspace::domain_text() {
    std::lock_guard lock(mutex_);
    if (!domain_text_)
        domain_text_ = read_file(dir() / "domain.pddl");
    return *domain_text_;
}

fs::path Workspace::resolve(const ManifestEntry &entry) const {
    fs::path p(entry.problem_path);
    return p.is_absolute() ? p : dir() / p;
}

std::string Workspace::problem_text(const ManifestEntry &entry) { return read_file(resolve(entry)); }

const GroundedTask &Workspace::task(const ManifestEntry &entry) {
    std::lock_guard lock(mutex_);
    auto &slot = tasks_[entry.problem_path];
    if (!slot)
        slot = std::make_unique<GroundedTask>(load_task(domain_text(), problem_text(entry)));
    return *slot;
}

std::optional<std::vector<ActionId>> Workspace::expert_plan(const ManifestEntry &entry,
                                                           std::span<const SearchConfig> tiers) {
    const std::string key = entry.problem_path + "|" + add_tiers(Digest().add("tiers"), tiers).hex();
    {
        std::lock_guard lock(mutex_);
        auto it = plans_.find(key);
        if (it != plans_.end())
            return it->second;
    }
    const auto &t = task(entry);
    auto plan = cached_expert_plan(cache_, domain_text(), problem_text(entry), t, tiers);
    if (plan)
        write_file_atomic(dir() / "plans" / (stem_of(entry) + ".plan"), format_plan(t, *plan));
    std::lock_guard lock(mutex_);
    plans_[key] = plan;
    return plan;
}

std::optional<Trajectory> Workspace::trajectory(const ManifestEntry &entry, std::span<const SearchConfig> tiers) {
    auto plan = expert_plan(entry, tiers);
    if (!plan)
        return std::nullopt;
    const auto &t = task(entry);
    Trajectory traj = reconstruct(t, *plan);
    traj.domain_id = domain_;
    traj.problem_id = stem_of(entry);
    const fs::path out = dir() / "traj" / (stem_of(entry) + ".traj");
    if (!fs::exists(out) || cache_.force())
        write_file_atomic(out, write_trajectory(t, traj));
    return traj;
}

std::vector<std::string> Workspace::plan_all(std::span<const SplitName> splits, std::span<const SearchConfig> tiers) {
    std::vector<ManifestEntry> todo;
    for (auto s : splits)
        for (auto &e : entries(s))
            todo.push_back(e);
    std::vector<std::string> failures(todo.size());
    parallel_for(todo.size(), jobs_, [&](std::size_t i, std::size_t) {
        try {
            if (!expert_plan(todo[i], tiers))
                failures[i] = stem_of(todo[i]) + ": expert planner found no plan";
        } catch (const std::exception &ex) {
            failures[i] = stem_of(todo[i]) + ": " + ex.what();
        }
    });
    std::erase_if(failures, [](const std::string &s) { return s.empty(); });
    return failures;
}

WlVocabulary &Workspace::vocabulary(int k, std::span<const SearchConfig> tiers) {
    std::lock_guard lock(mutex_);
    auto &slot = vocabularies_[k];
    if (slot)
        return *slot;
    std::vector<ManifestEntry> train = entries(SplitName::Train);
    std::vector<Trajectory> trajs;
    std::vector<const GroundedTask *> tasks;
    Digest d;
    d.add("vocab-v1").add(static_cast<long long>(k));
    for (const auto &e : train) {
        auto traj = trajectory(e, tiers);
        if (!traj) {
            log_warn("vocabulary: skipping " + stem_of(e) + " (no expert plan)");
            continue;
        }
        d.add(domain_text()).add(problem_text(e)).add(write_trajectory(task(e), *traj));
        trajs.push_back(std::move(*traj));
        tasks.push_back(&task(e));
    }
    if (trajs.empty())
        throw Error("vocabulary: no training trajectories for " + domain_);
    const std::string key = d.hex();
    if (auto hit = cache_.load("vocab", key)) {
        slot = std::make_unique<WlVocabulary>(WlVocabulary::load(*hit));
    } else {
        std::vector<LabeledTrajectory> data;
        for (std::size_t i = 0; i < trajs.size(); ++i)
            data.push_back({tasks[i], &trajs[i]});
        slot = std::make_unique<WlVocabulary>(collect_vocabulary(data, k));
        cache_.store("vocab", key, slot->save());
    }
    write_file_atomic(dir() / ("vocab-k" + std::to_string(k) + ".wl"), slot->save());
    return *slot;
}

FsfLayout Workspace::fsf_layout() {
    std::lock_guard lock(mutex_);
    if (!fsf_layout_) {
        std::vector<const GroundedTask *> tasks;
        for (auto s : {SplitName::Train, SplitName::Validation})
            for (const auto &e : entries(s))
                tasks.push_back(&task(e));
        if (tasks.empty())
            throw Error("fsf layout: no training instances for " + domain_);
        fsf_layout_ = make_fsf_layout(tasks);
    }
    return *fsf_layout_;
}

std::unique_ptr<StateEncoder> Workspace::encoder(const ExperimentConfig &config, const ManifestEntry &entry) {
    if (config.encoder == EncoderKind::Fsf)
        return std::make_unique<FsfStateEncoder>(task(entry), fsf_layout());
    return std::make_unique<WlStateEncoder>(task(entry), vocabulary(config.wl_iterations, config.expert_tiers),
                                            WlOptions{config.normalize});
}

std::string Workspace::encoder_digest(const ExperimentConfig &config) {
    Digest d;
    if (config.encoder == EncoderKind::Fsf) {
        auto layout = fsf_layout();
        d.add("fsf").add(static_cast<long long>(layout.domain)).add(static_cast<long long>(layout.N));
    } else {
        d.add("wl").add(vocabulary(config.wl_iterations, config.expert_tiers).save()).add(
            static_cast<long long>(config.normalize));
    }
    return d.hex();
}

std::optional<EmbeddedTrajectory> Workspace::embedded(const ExperimentConfig &config, const ManifestEntry &entry) {
    auto traj = trajectory(entry, config.expert_tiers);
    if (!traj)
        return std::nullopt;
    const auto &t = task(entry);
    const std::string key =
        Digest().add("embed-v1").add(encoder_digest(config)).add(problem_text(entry)).add(write_trajectory(t, *traj)).hex();
    EmbeddedTrajectory emb;
    auto states = cache_.load("embed", key);
    auto goal = cache_.load("embed-goal", key);
    if (states && goal) {
        emb.states = read_matrix(*states);
        Matrix g = read_matrix(*goal);
        emb.goal = g.row(0).transpose();
    } else {
        emb = embed_trajectory(*traj, *encoder(config, entry));
        states = write_matrix(emb.states);
        goal = write_matrix(emb.goal.transpose());
        cache_.store("embed", key, *states);
        cache_.store("embed-goal", key, *goal);
    }
    const fs::path base = dir() / "emb" / (std::string(to_string(config.encoder)) + "-k" +
                                           std::to_string(config.wl_iterations));
    write_file_atomic(base / (stem_of(entry) + ".emb"), *states);
    write_file_atomic(base / (stem_of(entry) + ".goal.emb"), *goal);
    return emb;
}

Workspace::TrainedModel Workspace::train(const ExperimentConfig &config, std::uint64_t seed) {
    TrainedModel out;
    if (config.model == ModelKind::Oracle || config.model == ModelKind::PlannerRef) {
        out.digest = std::string(to_string(config.model));
        return out;
    }
    auto collect = [&](SplitName split) {
        std::vector<EmbeddedTrajectory> v;
        for (const auto &e : entries(split))
            if (auto emb = embedded(config, e))
                v.push_back(std::move(*emb));
        return v;
    };
    std::vector<EmbeddedTrajectory> train = collect(SplitName::Train);
    std::vector<EmbeddedTrajectory> validation = collect(SplitName::Validation);
    if (train.empty())
        throw Error("no training trajectories for " + domain_);

    Digest d;
    d.add("train-v1").add(config.label()).add(encoder_digest(config)).add(to_string(config.mode));
    if (config.model == ModelKind::Tree)
        d.add(tree_config_text(config.tree));  // deterministic: the seed is not an input
    else
        d.add(recurrent_config_text(config.recurrent_for(seed)));
    for (const auto *set : {&train, &validation}) {
        d.add(static_cast<long long>(set->size()));
        for (const auto &e : *set)
            d.add(write_matrix(e.states)).add(write_matrix(e.goal.transpose()));
    }
    const std::string key = d.hex();

    std::string text;
    auto hit = cache_.load("train", key);
    auto curve_hit = cache_.load("curve", key);
    if (hit && curve_hit) {
        text = *hit;
        out.model = load_model(text);
        out.curve = parse_curve(*curve_hit);
    } else {
        if (config.model == ModelKind::Tree) {
            PairDataset tr = build_pairs(train, config.mode);
            PairDataset va = validation.empty() ? tr : build_pairs(validation, config.mode);
            auto model = train_tree_ensemble(tr, va, config.mode, config.tree, &out.curve);
            out.model = std::make_unique<TreeEnsembleModel>(std::move(model));
        } else {
            auto model = train_recurrent(train, validation, config.mode, config.recurrent_for(seed), &out.curve);
            out.model = std::make_unique<RecurrentModel>(std::move(model));
        }
        text = out.model->save();
        cache_.store("train", key, text);
        cache_.store("curve", key, curve_text(out.curve));
    }
    out.digest = sha256_hex(text);
    const std::string name = config.label() + "-s" + std::to_string(seed);
    write_file_atomic(dir() / "models" / (name + ".model"), text);
    write_file_atomic(dir() / "models" / (name + ".curve"), curve_text(out.curve));
    return out;
}

InstanceOutcome Workspace::evaluate(const ExperimentConfig &config, const TrainedModel &trained,
                                    const ManifestEntry &entry, std::uint64_t seed) {
    InstanceOutcome o;
    o.split = entry.split;
    o.problem = stem_of(entry);
    o.size = entry.size;
    o.seed = seed;
    const auto start = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    };
    try {
        const auto &t = task(entry);
        if (config.model == ModelKind::PlannerRef) {
            std::vector<SearchConfig> first{config.expert_tiers.front()};
            const std::string key = Digest()
                                        .add("planner-ref-v1")
                                        .add(domain_text())
                                        .add(problem_text(entry))
                                        .add(to_string(first[0].strategy))
                                        .add(first[0].timeout_seconds)
                                        .hex();
            if (auto hit = cache_.load("decode", key); hit && parse_outcome_record(*hit, o))
                return o;
            auto result = solve_tiered(t, first);
            o.status = result.solved() ? "success" : "unsolved";
            o.plan_length = result.solved() ? result.plan.size() : 0;
            o.seconds = elapsed();
            cache_.store("decode", key, outcome_record(o));
            return o;
        }

        std::unique_ptr<StateEncoder> enc;
        try {
            enc = encoder(config, entry);
        } catch (const CapacityExceeded &ex) {
            o.status = "capacity-exceeded";
            o.seconds = elapsed();
            log_debug(o.problem + ": " + ex.what());
            return o;
        }

        std::unique_ptr<TransitionModel> oracle;
        std::string model_digest = trained.digest;
        const TransitionModel *model = trained.model.get();
        if (config.model == ModelKind::Oracle) {
            auto emb = embedded(config, entry);
            if (!emb) {
                o.status = "no-expert-plan";
                o.seconds = elapsed();
                return o;
            }
            model_digest = Digest().add("oracle").add(write_matrix(emb->states)).hex();
            oracle = std::make_unique<OracleDeltaModel>(std::move(*emb));
            model = oracle.get();
        }
        if (!model)
            throw Error("no model to decode with");

        const std::string key = Digest()
                                    .add("decode-v1")
                                    .add(model_digest)
                                    .add(encoder_digest(config))
                                    .add(problem_text(entry))
                                    .add(decode_config_text(config.decode))
                                    .add(static_cast<long long>(seed))
                                    .hex();
        if (auto hit = cache_.load("decode", key); hit && parse_outcome_record(*hit, o))
            return o;

        const Vector s0 = enc->embed(t.initial());
        if (config.encoder == EncoderKind::Wl && s0.size() > 0 && s0.sum() > 0)
            o.oov_fraction = s0(s0.size() - 1) / s0.sum();

        RolloutResult r = beam_decode(t, *model, *enc, config.decode);
        o.status = std::string(to_string(r.outcome));
        if (r.success() && !validate(t, r.plan)) {
            o.status = "error";
            log_warn(o.problem + ": decoded plan failed validation");
        }
        o.plan_length = r.plan.size();
        if (!r.steps.empty()) {
            double sum = 0.0;
            for (const auto &s : r.steps)
                sum += s.distance;
            o.mean_distance = sum / static_cast<double>(r.steps.size());
        }
        o.seconds = elapsed();
        cache_.store("decode", key, outcome_record(o));
        write_file_atomic(dir() / "logs" / (config.label() + "-s" + std::to_string(seed)) / (o.problem + ".log"),
                          format_rollout_log(t, r) + "outcome " + o.status + "\n");
        if (r.success())
            write_file_atomic(dir() / "solutions" / (config.label() + "-s" + std::to_string(seed)) /
                                  (o.problem + ".plan"),
                              format_plan(t, r.plan));
    } catch (const std::exception &ex) {
        o.status = "error";
        o.seconds = elapsed();
        log_warn(o.problem + ": " + ex.what());
    }
    return o;
}

CoverageReport run_pipeline(const ExperimentConfig &config) {
    Workspace ws(config.data_dir, config.domain, config.force, config.jobs);
    return run_pipeline(ws, config);
}

CoverageReport run_pipeline(Workspace &ws, const ExperimentConfig &config) {
    ws.ensure_dataset(config.gen);
    std::vector<std::string> failures;

    std::vector<SplitName> plan_splits{SplitName::Train, SplitName::Validation};
    if (config.model == ModelKind::Oracle)
        for (auto s : config.eval_splits)
            if (std::find(plan_splits.begin(), plan_splits.end(), s) == plan_splits.end())
                plan_splits.push_back(s);
    if (config.model != ModelKind::PlannerRef)
        for (auto &f : ws.plan_all(plan_splits, config.expert_tiers))
            failures.push_back("plan " + f);

    std::vector<ManifestEntry> test;
    for (auto s : config.eval_splits)
        for (auto &e : ws.entries(s))
            test.push_back(e);

    std::vector<InstanceOutcome> outcomes;
    for (auto seed : config.seeds) {
        Workspace::TrainedModel model;
        bool trained = true;
        try {
            model = ws.train(config, seed);
        } catch (const std::exception &ex) {
            trained = false;
            failures.push_back("train seed " + std::to_string(seed) + ": " + ex.what());
            log_warn(failures.back());
        }
        std::vector<InstanceOutcome> row(test.size());
        parallel_for(test.size(), ws.jobs(), [&](std::size_t i, std::size_t) {
            if (trained) {
                row[i] = ws.evaluate(config, model, test[i], seed);
            } else {
                row[i].split = test[i].split;
                row[i].problem = fs::path(test[i].problem_path).stem().string();
                row[i].size = test[i].size;
                row[i].seed = seed;
                row[i].status = "error";
            }
        });
        outcomes.insert(outcomes.end(), row.begin(), row.end());
    }

    CoverageReport report = compute_coverage(config.domain, config.label(), outcomes, config.seeds, config.eval_splits);
    report.failures = std::move(failures);
    write_file_atomic(ws.dir() / "results" / (config.label() + ".tsv"), write_outcomes(report));
    return report;
}

}  // namespace gplan
