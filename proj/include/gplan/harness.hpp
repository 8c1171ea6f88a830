#pragma once

// Dataset splits, the cached experiment pipeline, coverage metrics and
// reports.

#include "gplan/cache.hpp"
#include "gplan/config.hpp"
#include "gplan/decoder.hpp"
#include "gplan/models.hpp"
#include "gplan/search.hpp"
#include "gplan/trajectory.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace gplan {

namespace fs = std::filesystem;

// ---- splits ----

/// Domains with generators and default splits.
std::vector<std::string> harness_domains();

struct SplitSpec {
    SplitName split;
    std::vector<int> sizes;  // one entry per instance
};

/// Default split sizes. `profile` "ci" shrinks VisitAll to >= 60 training and
/// >= 40 extrapolation instances of at most 60 cells; "full" keeps the
/// complete lists. Counts are spread evenly over each size range.
std::vector<SplitSpec> default_split_specs(std::string_view domain, std::string_view profile = "ci");

/// Size parameter of an instance: blocks, balls, goal atoms or cells.
int instance_size(std::string_view domain, const GroundedTask &task);

struct GenOptions {
    std::uint64_t seed = 0;
    std::string profile = "ci";
    /// Train/validation instances must be solvable by the expert planner.
    bool verify = true;
    std::vector<SearchConfig> tiers = default_search_tiers();
    int jobs = 0;
};

/// Writes problems/<split>/<name>.pddl, domain.pddl and manifest.tsv under
/// `domain_dir`. Deterministic given the options.
std::vector<ManifestEntry> generate_dataset(const fs::path &domain_dir, std::string_view domain,
                                            const GenOptions &options);

/// Copies <source>/<split>/*.pddl (split directories named train,
/// validation, interpolation, extrapolation) and <source>/domain.pddl if
/// present.
std::vector<ManifestEntry> import_dataset(const fs::path &domain_dir, std::string_view domain,
                                          const fs::path &source);

/// Expert plan for `task` through the "plan" stage of `cache`, keyed by the
/// domain text, problem text and planner tiers.
std::optional<std::vector<ActionId>> cached_expert_plan(StageCache &cache, std::string_view domain_text,
                                                        std::string_view problem_text, const GroundedTask &task,
                                                        std::span<const SearchConfig> tiers);

// ---- experiments ----

enum class EncoderKind { Wl, Fsf };
/// PlannerRef runs the expert planner's first tier on each test instance.
enum class ModelKind { Tree, Recurrent, Oracle, PlannerRef };

std::string_view to_string(EncoderKind kind);
EncoderKind parse_encoder_kind(std::string_view name);
std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);

struct ExperimentConfig {
    std::string domain;
    EncoderKind encoder = EncoderKind::Wl;
    ModelKind model = ModelKind::Tree;
    TargetMode mode = TargetMode::Delta;
    std::vector<std::uint64_t> seeds{0, 1, 2};

    int wl_iterations = 2;
    bool normalize = false;
    TreeConfig tree;
    RecurrentConfig recurrent;
    bool loss_overridden = false;  // otherwise the loss follows the mode
    DecodeConfig decode;
    std::vector<SearchConfig> expert_tiers = default_search_tiers();
    GenOptions gen;

    std::vector<SplitName> eval_splits{SplitName::Validation, SplitName::Interpolation, SplitName::Extrapolation};
    fs::path data_dir = "gplan-data";
    int jobs = 0;
    bool force = false;

    /// "<encoder>-<model>-<mode>", e.g. "wl-tree-delta"; "planner-ref" for the planner row.
    std::string label() const;
    RecurrentConfig recurrent_for(std::uint64_t seed) const;
};

/// Applies train.*, decode.* and gen.* keys. Unknown keys raise ConfigError.
void apply_config(const Config &config, ExperimentConfig &experiment);

struct InstanceOutcome {
    SplitName split = SplitName::Validation;
    std::string problem;
    int size = 0;
    std::uint64_t seed = 0;
    std::string status;  // success, horizon-exceeded, dead-end, capacity-exceeded, no-expert-plan, unsolved, error
    std::size_t plan_length = 0;
    double seconds = 0.0;
    double mean_distance = 0.0;  // mean selected-candidate distance
    double oov_fraction = 0.0;   // OOV share of φ(s0), WL only

    bool success() const { return status == "success"; }
};

inline constexpr std::string_view kZeroDenominator = "n/a";

struct SplitCoverage {
    SplitName split = SplitName::Validation;
    std::size_t instances = 0;  // per seed
    std::vector<double> per_seed;
    double mean = 0.0;
    double stddev = 0.0;  // population

    bool empty() const { return instances == 0; }
    /// "0.50 ± 0.41", or the zero-denominator marker.
    std::string formatted() const;
};

struct CoverageReport {
    std::string domain;
    std::string label;
    std::vector<std::uint64_t> seeds;
    std::vector<SplitCoverage> splits;
    std::vector<InstanceOutcome> outcomes;
    std::vector<std::string> failures;  // stage failures, recorded not thrown

    const SplitCoverage *find(SplitName split) const;
};

/// Mean and population std of per-seed success rates for each split in
/// `splits`. Every seed must have the same number of outcomes per split.
CoverageReport compute_coverage(const std::string &domain, const std::string &label,
                                std::span<const InstanceOutcome> outcomes, std::span<const std::uint64_t> seeds,
                                std::span<const SplitName> splits);

/// One domain directory plus the shared stage cache. Stage methods are
/// memoised on disk by input digest.
class Workspace {
public:
    Workspace(fs::path data_dir, std::string domain, bool force = false, int jobs = 0);

    const std::string &domain() const { return domain_; }
    fs::path dir() const { return data_dir_ / domain_; }
    StageCache &cache() { return cache_; }
    int jobs() const { return jobs_; }

    bool has_manifest() const;
    const std::vector<ManifestEntry> &manifest();
    std::vector<ManifestEntry> entries(SplitName split);
    /// Generates the default dataset when no manifest exists yet.
    void ensure_dataset(const GenOptions &options);

    const std::string &domain_text();
    std::string problem_text(const ManifestEntry &entry);
    const GroundedTask &task(const ManifestEntry &entry);

    /// Expert plan (nullopt when the planner fails). Writes plans/<name>.plan.
    std::optional<std::vector<ActionId>> expert_plan(const ManifestEntry &entry,
                                                     std::span<const SearchConfig> tiers);
    /// Expert trajectory; writes traj/<name>.traj.
    std::optional<Trajectory> trajectory(const ManifestEntry &entry, std::span<const SearchConfig> tiers);
    /// Plans every entry of the splits in parallel; returns the failures.
    std::vector<std::string> plan_all(std::span<const SplitName> splits, std::span<const SearchConfig> tiers);

    /// Vocabulary over the training trajectories; writes vocab-k<k>.wl.
    WlVocabulary &vocabulary(int k, std::span<const SearchConfig> tiers);
    /// FSF layout over training and validation instances.
    FsfLayout fsf_layout();

    std::unique_ptr<StateEncoder> encoder(const ExperimentConfig &config, const ManifestEntry &entry);
    /// Digest identifying the encoder (vocabulary or layout plus options).
    std::string encoder_digest(const ExperimentConfig &config);

    /// Embedded expert trajectory; writes emb/<label>/<name>.emb.
    std::optional<EmbeddedTrajectory> embedded(const ExperimentConfig &config, const ManifestEntry &entry);

    struct TrainedModel {
        std::unique_ptr<TransitionModel> model;
        std::string digest;
        TrainingCurve curve;
    };
    /// Trains (or loads) the model for one seed; writes models/<label>-s<seed>.model.
    TrainedModel train(const ExperimentConfig &config, std::uint64_t seed);

    /// Decodes one instance; never throws for per-instance failures.
    InstanceOutcome evaluate(const ExperimentConfig &config, const TrainedModel &model, const ManifestEntry &entry,
                             std::uint64_t seed);

    fs::path resolve(const ManifestEntry &entry) const;

private:
    fs::path data_dir_;
    std::string domain_;
    StageCache cache_;
    int jobs_;
    std::optional<std::vector<ManifestEntry>> manifest_;
    std::optional<std::string> domain_text_;
    std::recursive_mutex mutex_;
    std::map<std::string, std::unique_ptr<GroundedTask>> tasks_;
    std::map<std::string, std::optional<std::vector<ActionId>>> plans_;
    std::map<int, std::unique_ptr<WlVocabulary>> vocabularies_;
    std::optional<FsfLayout> fsf_layout_;
};

/// plan -> trajectories -> vocabulary/layout -> embed -> train -> decode ->
/// coverage, for every configured seed. Per-instance and per-seed failures
/// are recorded in the report. Writes results/<label>.tsv.
CoverageReport run_pipeline(const ExperimentConfig &config);
CoverageReport run_pipeline(Workspace &workspace, const ExperimentConfig &config);

// ---- reports ----

/// Outcomes file: a "#gplan-outcomes" header carrying domain, label, seeds
/// and splits, then one tab-separated row per instance and seed.
std::string write_outcomes(const CoverageReport &report);
CoverageReport read_outcomes(std::string_view text);

/// Text table: one row per (domain, split), one column per configuration.
std::string format_report_table(std::span<const CoverageReport> reports);
/// domain, config, split, instances, mean, std, per-seed rates.
std::string format_report_tsv(std::span<const CoverageReport> reports);
/// Bar chart of mean coverage (with std whiskers) per configuration for one split.
std::string render_split_svg(std::span<const CoverageReport> reports, SplitName split);

/// Plan-length distribution, OOV mass and per-step distance summary.
std::string calibration_report(Workspace &workspace, const ExperimentConfig &config, const CoverageReport &report);

}  // namespace gplan
