#pragma once

// Transition models f(φ(s_t), φ(g)) predicting the next embedding (state
// mode) or the residual φ(s_{t+1}) - φ(s_t) (delta mode).

#include "gplan/encoders.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gplan {

enum class TargetMode { State, Delta };

std::string_view to_string(TargetMode mode);
TargetMode parse_target_mode(std::string_view name);

/// Embedded trajectory: row t of `states` is φ(s_t), t = 0..T.
struct EmbeddedTrajectory {
    Matrix states;
    Vector goal;

    Eigen::Index length() const { return states.rows() > 0 ? states.rows() - 1 : 0; }
    Eigen::Index dim() const { return states.cols(); }
};

/// One row per consecutive pair: inputs [φ(s_t) ∥ φ(g)], targets φ(s_{t+1})
/// or Δ_t, and φ(s_t) kept for residual reconstruction.
struct PairDataset {
    Matrix inputs;
    Matrix targets;
    Matrix current;

    Eigen::Index size() const { return inputs.rows(); }
    Eigen::Index dim() const { return targets.cols(); }
};

PairDataset build_pairs(std::span<const EmbeddedTrajectory> trajectories, TargetMode mode);

/// Per-rollout model memory (recurrent hidden state, oracle step counter).
/// Copyable so beams can fork it.
using ModelMemory = std::vector<double>;

class TransitionModel {
public:
    virtual ~TransitionModel() = default;

    virtual std::string_view kind() const = 0;
    virtual TargetMode mode() const = 0;
    /// Embedding width the model consumes and produces.
    virtual Eigen::Index dim() const = 0;

    virtual ModelMemory initial_memory() const { return {}; }
    /// Raw model output: next embedding (state mode) or Δ (delta mode).
    /// Advances `memory`.
    virtual Vector forward(const Vector &state, const Vector &goal, ModelMemory &memory) const = 0;

    /// Target vector v_t: the raw output in state mode, φ(s_t) + Δ in delta mode.
    Vector predict(const Vector &state, const Vector &goal, ModelMemory &memory) const;

    /// Self-describing text container; round-trips bit-identically.
    virtual std::string save() const = 0;
};

std::unique_ptr<TransitionModel> load_model(std::string_view text);

/// Replays the true residuals of one expert trajectory, step by step.
class OracleDeltaModel : public TransitionModel {
public:
    explicit OracleDeltaModel(EmbeddedTrajectory trajectory);

    std::string_view kind() const override { return "oracle"; }
    TargetMode mode() const override { return TargetMode::Delta; }
    Eigen::Index dim() const override { return trajectory_.dim(); }
    ModelMemory initial_memory() const override { return {0.0}; }
    Vector forward(const Vector &state, const Vector &goal, ModelMemory &memory) const override;
    std::string save() const override;

private:
    EmbeddedTrajectory trajectory_;
};

// ---- gradient-boosted trees ----

struct TreeConfig {
    double learning_rate = 0.1;
    int max_depth = 8;
    int max_rounds = 1000;
    int patience = 10;
    double lambda = 1.0;
    double min_child_weight = 1.0;
    double gamma = 0.0;
    int max_bins = 256;
    int threads = 0;  // 0: hardware concurrency
};

struct RegressionTree {
    struct Node {
        int feature = -1;  // -1 for leaves
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        double value = 0.0;  // leaf output, already scaled by the learning rate
    };

    std::vector<Node> nodes;

    double predict(const double *x) const;
    std::size_t leaves() const;
};

struct TrainingCurve {
    std::vector<double> train_loss;
    std::vector<double> validation_loss;
    int best_iteration = -1;
};

class TreeEnsembleModel : public TransitionModel {
public:
    struct Output {
        bool constant = false;
        double base = 0.0;
        std::vector<RegressionTree> trees;
    };

    TreeEnsembleModel() = default;
    TreeEnsembleModel(TargetMode mode, TreeConfig config, std::vector<Output> outputs);

    std::string_view kind() const override { return "tree"; }
    TargetMode mode() const override { return mode_; }
    Eigen::Index dim() const override { return static_cast<Eigen::Index>(outputs_.size()); }
    Vector forward(const Vector &state, const Vector &goal, ModelMemory &memory) const override;
    std::string save() const override;

    Vector predict_row(const double *input) const;
    Matrix predict_rows(const Matrix &inputs) const;

    const std::vector<Output> &outputs() const { return outputs_; }
    const TreeConfig &config() const { return config_; }
    std::size_t total_nodes() const;
    /// Human-readable dump of every tree.
    std::string export_text() const;

    static TreeEnsembleModel load(std::string_view text);

private:
    TargetMode mode_ = TargetMode::Delta;
    TreeConfig config_;
    std::vector<Output> outputs_;
};

/// Squared-error boosting, one ensemble per output dimension, global early
/// stopping on aggregate validation MSE. Dimensions with constant training
/// targets are stored as constants.
TreeEnsembleModel train_tree_ensemble(const PairDataset &train, const PairDataset &validation, TargetMode mode,
                                      const TreeConfig &config, TrainingCurve *curve = nullptr);

// ---- recurrent model ----

enum class CellType { Gru, Lstm };

std::string_view to_string(CellType cell);
CellType parse_cell_type(std::string_view name);

enum class LossKind { Cosine, Mse };

std::string_view to_string(LossKind loss);
LossKind default_loss(TargetMode mode);

struct RecurrentConfig {
    CellType cell = CellType::Gru;
    int embed = 32;
    int hidden = 256;
    int layers = 2;
    double learning_rate = 1e-2;
    int batch_size = 32;
    int epochs = 250;
    int patience = 25;
    double clip_norm = 5.0;
    std::uint64_t seed = 0;
    LossKind loss = LossKind::Mse;
};

/// State and goal projections (D -> embed each), a stack of gated recurrent
/// layers, and a two-layer head (hidden -> hidden -> D).
class RecurrentModel : public TransitionModel {
public:
    RecurrentModel(Eigen::Index dim, TargetMode mode, RecurrentConfig config);

    std::string_view kind() const override { return "recurrent"; }
    TargetMode mode() const override { return mode_; }
    Eigen::Index dim() const override { return dim_; }
    ModelMemory initial_memory() const override;
    Vector forward(const Vector &state, const Vector &goal, ModelMemory &memory) const override;
    std::string save() const override;

    static RecurrentModel load(std::string_view text);
    static std::size_t parameter_count(Eigen::Index dim, const RecurrentConfig &config);

    const RecurrentConfig &config() const { return config_; }
    std::size_t num_parameters() const { return static_cast<std::size_t>(params_.size()); }
    Vector &parameters() { return params_; }
    const Vector &parameters() const { return params_; }
    /// Offset and size of the output-head weights inside parameters().
    std::pair<std::size_t, std::size_t> head_weight_range() const;

    /// Training loss over a batch (mean over valid timesteps) and its gradient.
    double loss_and_gradient(std::span<const EmbeddedTrajectory *const> batch, Vector *gradient) const;
    /// Σ_t ||φ(s_t) + Δ̂_t - φ(s_{t+1})||² over the sequence, from the batched
    /// forward pass used in training.
    double delta_squared_error_sum(const EmbeddedTrajectory &trajectory) const;

    void initialize(std::uint64_t seed);

    struct Layout;

private:
    Eigen::Index dim_;
    TargetMode mode_;
    RecurrentConfig config_;
    Vector params_;
};

RecurrentModel train_recurrent(std::span<const EmbeddedTrajectory> train,
                               std::span<const EmbeddedTrajectory> validation, TargetMode mode,
                               const RecurrentConfig &config, TrainingCurve *curve = nullptr);

}  // namespace gplan
