#include "gplan/error.hpp"
#include "gplan/models.hpp"

#include <sstream>

namespace gplan {

std::string_view to_string(TargetMode mode) { return mode == TargetMode::State ? "state" : "delta"; }

TargetMode parse_target_mode(std::string_view name) {
    if (name == "state")
        return TargetMode::State;
    if (name == "delta")
        return TargetMode::Delta;
    throw Error("unknown target mode '" + std::string(name) + "'");
}

PairDataset build_pairs(std::span<const EmbeddedTrajectory> trajectories, TargetMode mode) {
    Eigen::Index rows = 0, dim = -1;
    for (const auto &t : trajectories) {
        if (t.states.rows() == 0)
            continue;
        if (dim < 0)
            dim = t.dim();
        if (t.dim() != dim || t.goal.size() != dim)
            throw Error("embedding dimension mismatch while building transition pairs");
        rows += t.length();
    }
    PairDataset out;
    if (dim < 0)
        return out;
    out.inputs.resize(rows, 2 * dim);
    out.targets.resize(rows, dim);
    out.current.resize(rows, dim);
    Eigen::Index r = 0;
    for (const auto &t : trajectories) {
        for (Eigen::Index i = 0; i < t.length(); ++i, ++r) {
            out.inputs.row(r).head(dim) = t.states.row(i);
            out.inputs.row(r).tail(dim) = t.goal.transpose();
            out.current.row(r) = t.states.row(i);
            if (mode == TargetMode::Delta)
                out.targets.row(r) = t.states.row(i + 1) - t.states.row(i);
            else
                out.targets.row(r) = t.states.row(i + 1);
        }
    }
    return out;
}

Vector TransitionModel::predict(const Vector &state, const Vector &goal, ModelMemory &memory) const {
    if (state.size() != dim() || goal.size() != dim())
        throw Error("model expects embeddings of width " + std::to_string(dim()) + ", got " +
                    std::to_string(state.size()));
    Vector out = forward(state, goal, memory);
    if (mode() == TargetMode::Delta)
        out += state;
    return out;
}

OracleDeltaModel::OracleDeltaModel(EmbeddedTrajectory trajectory) : trajectory_(std::move(trajectory)) {}

Vector OracleDeltaModel::forward(const Vector &, const Vector &, ModelMemory &memory) const {
    auto t = static_cast<Eigen::Index>(memory.at(0));
    memory[0] += 1.0;
    if (t >= trajectory_.length())
        return Vector::Zero(dim());
    return (trajectory_.states.row(t + 1) - trajectory_.states.row(t)).transpose();
}

std::string OracleDeltaModel::save() const {
    Matrix all(trajectory_.states.rows() + 1, dim());
    all.topRows(trajectory_.states.rows()) = trajectory_.states;
    all.row(trajectory_.states.rows()) = trajectory_.goal.transpose();
    return "GPLANMODEL1 oracle\n" + write_matrix(all);
}

std::unique_ptr<TransitionModel> load_model(std::string_view text) {
    auto newline = text.find('\n');
    std::string_view header = text.substr(0, newline);
    if (header == "GPLANMODEL1 tree")
        return std::make_unique<TreeEnsembleModel>(TreeEnsembleModel::load(text));
    if (header == "GPLANMODEL1 recurrent")
        return std::make_unique<RecurrentModel>(RecurrentModel::load(text));
    if (header == "GPLANMODEL1 oracle") {
        Matrix all = read_matrix(text.substr(newline + 1));
        if (all.rows() < 2)
            throw FormatError("oracle model needs at least one state and a goal");
        EmbeddedTrajectory t{all.topRows(all.rows() - 1), all.row(all.rows() - 1).transpose()};
        return std::make_unique<OracleDeltaModel>(std::move(t));
    }
    throw FormatError("unknown model container '" + std::string(header) + "'");
}

}  // namespace gplan
