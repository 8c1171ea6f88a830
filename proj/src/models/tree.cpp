#include "gplan/error.hpp"
#include "gplan/log.hpp"
#include "gplan/models.hpp"
#include "gplan/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace gplan {

double RegressionTree::predict(const double *x) const {
    int i = 0;
    while (nodes[i].feature >= 0)
        i = x[nodes[i].feature] < nodes[i].threshold ? nodes[i].left : nodes[i].right;
    return nodes[i].value;
}

std::size_t RegressionTree::leaves() const {
    return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](auto &n) { return n.feature < 0; }));
}

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr double kMinGain = 1e-6;

struct FeatureBins {
    std::vector<double> thresholds;  // bin(x) = #thresholds <= x
    int offset = 0;
    int default_bin = 0;

    int count() const { return static_cast<int>(thresholds.size()) + 1; }
    int bin(double x) const {
        return static_cast<int>(std::upper_bound(thresholds.begin(), thresholds.end(), x) - thresholds.begin());
    }
};

// Training inputs quantised per feature. Only entries outside a feature's
// most common bin are stored (row-wise), which keeps sparse count vectors cheap.
struct BinnedData {
    int rows = 0;
    std::vector<FeatureBins> features;
    std::vector<int> active;  // features with at least two bins
    int total_bins = 0;
    std::vector<int> row_ptr;
    std::vector<int> col;
    std::vector<int> bin;

    int lookup(int r, int f) const {
        auto begin = col.begin() + row_ptr[r], end = col.begin() + row_ptr[r + 1];
        auto it = std::lower_bound(begin, end, f);
        if (it != end && *it == f)
            return bin[it - col.begin()];
        return features[f].default_bin;
    }
};

BinnedData bin_inputs(const Matrix &x, int max_bins) {
    BinnedData data;
    data.rows = static_cast<int>(x.rows());
    const int n = data.rows, F = static_cast<int>(x.cols());
    data.features.resize(F);
    std::vector<double> column(n);
    for (int f = 0; f < F; ++f) {
        auto &fb = data.features[f];
        for (int r = 0; r < n; ++r)
            column[r] = x(r, f);
        std::sort(column.begin(), column.end());
        std::vector<double> cuts;
        std::vector<double> unique(column.begin(), std::unique(column.begin(), column.end()));
        if (static_cast<int>(unique.size()) <= max_bins) {
            cuts = unique;
        } else {
            for (int q = 0; q < max_bins; ++q)
                cuts.push_back(column[static_cast<std::size_t>(static_cast<long>(q) * (n - 1) / (max_bins - 1))]);
            cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
        }
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
            fb.thresholds.push_back(cuts[i] + (cuts[i + 1] - cuts[i]) / 2.0);
        fb.offset = data.total_bins;
        data.total_bins += fb.count();
        if (fb.count() >= 2)
            data.active.push_back(f);
        std::vector<int> freq(fb.count(), 0);
        for (int r = 0; r < n; ++r)
            ++freq[fb.bin(x(r, f))];
        fb.default_bin = static_cast<int>(std::max_element(freq.begin(), freq.end()) - freq.begin());
    }
    data.row_ptr.assign(1, 0);
    for (int r = 0; r < n; ++r) {
        for (int f : data.active) {
            int b = data.features[f].bin(x(r, f));
            if (b != data.features[f].default_bin) {
                data.col.push_back(f);
                data.bin.push_back(b);
            }
        }
        data.row_ptr.push_back(static_cast<int>(data.col.size()));
    }
    return data;
}

class TreeBuilder {
public:
    TreeBuilder(const BinnedData &data, const TreeConfig &config) : data_(data), config_(config) {}

    // Fits one tree to gradients g (hessian 1); writes each training row's
    // leaf output into `update`.
    RegressionTree grow(const std::vector<double> &g, std::vector<double> &update) {
        RegressionTree tree;
        rows_.resize(data_.rows);
        for (int r = 0; r < data_.rows; ++r)
            rows_[r] = r;
        Work root;
        root.begin = 0;
        root.end = data_.rows;
        root.H = data_.rows;
        root.G = 0;
        for (double v : g)
            root.G += v;
        root.hist = build_hist(g, 0, data_.rows, root.G, root.H);
        root.node = 0;
        tree.nodes.emplace_back();
        std::vector<Work> stack;
        stack.push_back(std::move(root));
        while (!stack.empty()) {
            Work w = std::move(stack.back());
            stack.pop_back();
            Split split;
            if (w.depth < config_.max_depth && w.H >= 2 * config_.min_child_weight)
                split = best_split(w);
            if (split.feature < 0) {
                double value = -w.G / (w.H + config_.lambda) * config_.learning_rate;
                tree.nodes[w.node].value = value;
                for (int i = w.begin; i < w.end; ++i)
                    update[rows_[i]] = value;
                continue;
            }
            const auto &fb = data_.features[split.feature];
            auto mid = std::stable_partition(rows_.begin() + w.begin, rows_.begin() + w.end,
                                             [&](int r) { return data_.lookup(r, split.feature) <= split.bin; });
            int cut = static_cast<int>(mid - rows_.begin());
            Work left, right;
            left.begin = w.begin;
            left.end = cut;
            right.begin = cut;
            right.end = w.end;
            left.G = split.GL;
            left.H = split.HL;
            right.G = w.G - split.GL;
            right.H = w.H - split.HL;
            left.depth = right.depth = w.depth + 1;
            Work &small = (left.end - left.begin) <= (right.end - right.begin) ? left : right;
            Work &large = &small == &left ? right : left;
            small.hist = build_hist(g, small.begin, small.end, small.G, small.H);
            large.hist = std::move(w.hist);
            for (std::size_t i = 0; i < large.hist.size(); ++i)
                large.hist[i] -= small.hist[i];

            auto &node = tree.nodes[w.node];
            node.feature = split.feature;
            node.threshold = fb.thresholds[split.bin];
            node.left = static_cast<int>(tree.nodes.size());
            node.right = node.left + 1;
            left.node = node.left;
            right.node = node.right;
            tree.nodes.emplace_back();
            tree.nodes.emplace_back();
            stack.push_back(std::move(right));
            stack.push_back(std::move(left));
        }
        return tree;
    }

private:
    struct Work {
        int begin = 0, end = 0, depth = 0, node = 0;
        double G = 0, H = 0;
        std::vector<double> hist;  // (G, H) per bin
    };
    struct Split {
        int feature = -1;
        int bin = 0;
        double gain = kMinGain;
        double GL = 0, HL = 0;
    };

    std::vector<double> build_hist(const std::vector<double> &g, int begin, int end, double G, double H) {
        std::vector<double> hist(2 * static_cast<std::size_t>(data_.total_bins), 0.0);
        for (int i = begin; i < end; ++i) {
            int r = rows_[i];
            for (int k = data_.row_ptr[r]; k < data_.row_ptr[r + 1]; ++k) {
                std::size_t slot = 2 * static_cast<std::size_t>(data_.features[data_.col[k]].offset + data_.bin[k]);
                hist[slot] += g[r];
                hist[slot + 1] += 1.0;
            }
        }
        for (int f : data_.active) {
            const auto &fb = data_.features[f];
            double gs = 0, hs = 0;
            for (int b = 0; b < fb.count(); ++b) {
                gs += hist[2 * (fb.offset + b)];
                hs += hist[2 * (fb.offset + b) + 1];
            }
            hist[2 * (fb.offset + fb.default_bin)] += G - gs;
            hist[2 * (fb.offset + fb.default_bin) + 1] += H - hs;
        }
        return hist;
    }

    Split best_split(const Work &w) const {
        Split best;
        const double lambda = config_.lambda, mcw = config_.min_child_weight;
        const double parent = w.G * w.G / (w.H + lambda);
        for (int f : data_.active) {
            const auto &fb = data_.features[f];
            double GL = 0, HL = 0;
            for (int b = 0; b + 1 < fb.count(); ++b) {
                GL += w.hist[2 * (fb.offset + b)];
                HL += w.hist[2 * (fb.offset + b) + 1];
                if (HL < mcw)
                    continue;
                double HR = w.H - HL;
                if (HR < mcw)
                    break;
                double GR = w.G - GL;
                double gain = 0.5 * (GL * GL / (HL + lambda) + GR * GR / (HR + lambda) - parent) - config_.gamma;
                if (gain > best.gain) {
                    best.gain = gain;
                    best.feature = f;
                    best.bin = b;
                    best.GL = GL;
                    best.HL = std::round(HL);
                }
            }
        }
        return best;
    }

    const BinnedData &data_;
    const TreeConfig &config_;
    std::vector<int> rows_;
};

double mean_squared(const Matrix &pred, const Matrix &target) {
    if (pred.size() == 0)
        return 0.0;
    return (pred - target).squaredNorm() / static_cast<double>(pred.size());
}

}  // namespace

TreeEnsembleModel::TreeEnsembleModel(TargetMode mode, TreeConfig config, std::vector<Output> outputs)
    : mode_(mode), config_(config), outputs_(std::move(outputs)) {}

Vector TreeEnsembleModel::predict_row(const double *input) const {
    Vector out(dim());
    for (std::size_t d = 0; d < outputs_.size(); ++d) {
        const auto &o = outputs_[d];
        double v = o.base;
        for (const auto &t : o.trees)
            v += t.predict(input);
        out[static_cast<Eigen::Index>(d)] = v;
    }
    return out;
}

Matrix TreeEnsembleModel::predict_rows(const Matrix &inputs) const {
    RowMatrix rows = inputs;
    Matrix out(inputs.rows(), dim());
    for (Eigen::Index r = 0; r < rows.rows(); ++r)
        out.row(r) = predict_row(rows.row(r).data()).transpose();
    return out;
}

Vector TreeEnsembleModel::forward(const Vector &state, const Vector &goal, ModelMemory &) const {
    Vector input(state.size() + goal.size());
    input << state, goal;
    return predict_row(input.data());
}

std::size_t TreeEnsembleModel::total_nodes() const {
    std::size_t n = 0;
    for (const auto &o : outputs_)
        for (const auto &t : o.trees)
            n += t.nodes.size();
    return n;
}

TreeEnsembleModel train_tree_ensemble(const PairDataset &train, const PairDataset &validation, TargetMode mode,
                                      const TreeConfig &config, TrainingCurve *curve) {
    if (train.size() == 0 || validation.size() == 0)
        throw Error("tree training needs non-empty training and validation sets");
    if (train.inputs.cols() != validation.inputs.cols() || train.dim() != validation.dim())
        throw Error("training and validation widths differ");
    if (config.max_depth < 1 || config.max_rounds < 0 || config.learning_rate <= 0 || config.max_bins < 2)
        throw Error("invalid tree configuration");
    const Eigen::Index n = train.size(), W = train.dim();

    std::vector<TreeEnsembleModel::Output> outputs(W);
    std::vector<int> fitted;
    for (Eigen::Index d = 0; d < W; ++d) {
        auto col = train.targets.col(d);
        outputs[d].base = col.mean();
        if (col.maxCoeff() == col.minCoeff()) {
            outputs[d].constant = true;
            outputs[d].base = col(0);
        } else {
            fitted.push_back(static_cast<int>(d));
        }
    }

    BinnedData data = bin_inputs(train.inputs, config.max_bins);
    RowMatrix val_inputs = validation.inputs;
    Matrix pred_train(n, W), pred_val(validation.size(), W);
    for (Eigen::Index d = 0; d < W; ++d) {
        pred_train.col(d).setConstant(outputs[d].base);
        pred_val.col(d).setConstant(outputs[d].base);
    }
    TrainingCurve local;
    TrainingCurve &log_curve = curve ? *curve : local;
    log_curve = {};
    double best = mean_squared(pred_val, validation.targets);
    int best_round = -1;
    const int threads = resolve_threads(config.threads);
    std::vector<TreeBuilder> builders;
    for (int t = 0; t < threads; ++t)
        builders.emplace_back(data, config);
    std::vector<std::vector<double>> grads(threads, std::vector<double>(n)), updates(threads, std::vector<double>(n));

    for (int round = 0; round < config.max_rounds && !fitted.empty(); ++round) {
        parallel_for(fitted.size(), threads, [&](std::size_t i, std::size_t w) {
            const int d = fitted[i];
            auto &g = grads[w];
            auto &u = updates[w];
            for (Eigen::Index r = 0; r < n; ++r)
                g[r] = pred_train(r, d) - train.targets(r, d);
            RegressionTree tree = builders[w].grow(g, u);
            for (Eigen::Index r = 0; r < n; ++r)
                pred_train(r, d) += u[r];
            for (Eigen::Index r = 0; r < val_inputs.rows(); ++r)
                pred_val(r, d) += tree.predict(val_inputs.row(r).data());
            outputs[d].trees.push_back(std::move(tree));
        });
        double train_loss = mean_squared(pred_train, train.targets);
        double val_loss = mean_squared(pred_val, validation.targets);
        if (!std::isfinite(train_loss) || !std::isfinite(val_loss))
            throw Error("non-finite loss in tree boosting at round " + std::to_string(round));
        log_curve.train_loss.push_back(train_loss);
        log_curve.validation_loss.push_back(val_loss);
        if (val_loss < best) {
            best = val_loss;
            best_round = round;
        } else if (round - best_round >= config.patience) {
            break;
        }
    }
    for (int d : fitted)
        outputs[d].trees.resize(static_cast<std::size_t>(best_round + 1));
    log_curve.best_iteration = best_round;
    log_debug("tree boosting: " + std::to_string(fitted.size()) + " fitted outputs, best round " +
              std::to_string(best_round));
    return TreeEnsembleModel(mode, config, std::move(outputs));
}

// ---- persistence ----

std::string TreeEnsembleModel::save() const {
    std::ostringstream out;
    out << "GPLANMODEL1 tree\n";
    out << "mode " << to_string(mode_) << "\n";
    out << "dim " << outputs_.size() << "\n";
    out << "config learning_rate=" << format_double(config_.learning_rate) << " max_depth=" << config_.max_depth
        << " max_rounds=" << config_.max_rounds << " patience=" << config_.patience
        << " lambda=" << format_double(config_.lambda)
        << " min_child_weight=" << format_double(config_.min_child_weight)
        << " gamma=" << format_double(config_.gamma) << " max_bins=" << config_.max_bins << "\n";
    for (std::size_t d = 0; d < outputs_.size(); ++d) {
        const auto &o = outputs_[d];
        if (o.constant) {
            out << "output " << d << " constant " << format_double(o.base) << "\n";
            continue;
        }
        out << "output " << d << " base " << format_double(o.base) << " trees " << o.trees.size() << "\n";
        for (const auto &t : o.trees) {
            out << "tree " << t.nodes.size() << "\n";
            for (const auto &node : t.nodes)
                out << node.feature << ' ' << format_double(node.threshold) << ' ' << node.left << ' ' << node.right
                    << ' ' << format_double(node.value) << "\n";
        }
    }
    out << "end\n";
    return out.str();
}

namespace {

template <class T>
T expect(std::istream &in, const char *what) {
    T value;
    if (!(in >> value))
        throw FormatError(std::string("tree model: expected ") + what);
    return value;
}

void expect_word(std::istream &in, const std::string &word) {
    std::string got;
    if (!(in >> got) || got != word)
        throw FormatError("tree model: expected '" + word + "', got '" + got + "'");
}

double read_double(std::istream &in, const char *what) { return parse_double(expect<std::string>(in, what)); }

}  // namespace

TreeEnsembleModel TreeEnsembleModel::load(std::string_view text) {
    std::istringstream in{std::string(text)};
    expect_word(in, "GPLANMODEL1");
    expect_word(in, "tree");
    expect_word(in, "mode");
    TargetMode mode = parse_target_mode(expect<std::string>(in, "mode"));
    expect_word(in, "dim");
    auto dim = expect<std::size_t>(in, "dim");
    expect_word(in, "config");
    TreeConfig config;
    std::string line;
    std::getline(in, line);
    std::istringstream fields(line);
    std::string field;
    while (fields >> field) {
        auto eq = field.find('=');
        if (eq == std::string::npos)
            throw FormatError("tree model: bad config field '" + field + "'");
        auto key = field.substr(0, eq);
        auto value = field.substr(eq + 1);
        if (key == "learning_rate")
            config.learning_rate = parse_double(value);
        else if (key == "max_depth")
            config.max_depth = std::stoi(value);
        else if (key == "max_rounds")
            config.max_rounds = std::stoi(value);
        else if (key == "patience")
            config.patience = std::stoi(value);
        else if (key == "lambda")
            config.lambda = parse_double(value);
        else if (key == "min_child_weight")
            config.min_child_weight = parse_double(value);
        else if (key == "gamma")
            config.gamma = parse_double(value);
        else if (key == "max_bins")
            config.max_bins = std::stoi(value);
    }
    std::vector<Output> outputs(dim);
    for (std::size_t d = 0; d < dim; ++d) {
        expect_word(in, "output");
        if (expect<std::size_t>(in, "output index") != d)
            throw FormatError("tree model: outputs out of order");
        auto kind = expect<std::string>(in, "output kind");
        if (kind == "constant") {
            outputs[d].constant = true;
            outputs[d].base = read_double(in, "constant");
            continue;
        }
        if (kind != "base")
            throw FormatError("tree model: bad output kind '" + kind + "'");
        outputs[d].base = read_double(in, "base");
        expect_word(in, "trees");
        auto count = expect<std::size_t>(in, "tree count");
        for (std::size_t t = 0; t < count; ++t) {
            expect_word(in, "tree");
            auto nodes = expect<std::size_t>(in, "node count");
            RegressionTree tree;
            tree.nodes.resize(nodes);
            for (auto &node : tree.nodes) {
                node.feature = expect<int>(in, "feature");
                node.threshold = read_double(in, "threshold");
                node.left = expect<int>(in, "left");
                node.right = expect<int>(in, "right");
                node.value = read_double(in, "value");
                if (node.feature >= 0 && (node.left <= 0 || node.right <= 0 ||
                                          static_cast<std::size_t>(std::max(node.left, node.right)) >= nodes))
                    throw FormatError("tree model: child index out of range");
            }
            outputs[d].trees.push_back(std::move(tree));
        }
    }
    expect_word(in, "end");
    return TreeEnsembleModel(mode, config, std::move(outputs));
}

std::string TreeEnsembleModel::export_text() const {
    std::ostringstream out;
    out << "tree ensemble, mode " << to_string(mode_) << ", " << outputs_.size() << " outputs, " << total_nodes()
        << " nodes\n";
    for (std::size_t d = 0; d < outputs_.size(); ++d) {
        const auto &o = outputs_[d];
        if (o.constant) {
            out << "output " << d << ": constant " << format_double(o.base) << "\n";
            continue;
        }
        out << "output " << d << ": base " << format_double(o.base) << ", " << o.trees.size() << " trees\n";
        for (std::size_t t = 0; t < o.trees.size(); ++t) {
            out << "  tree " << t << "\n";
            const auto &nodes = o.trees[t].nodes;
            // Depth-first with indentation.
            std::vector<std::pair<int, int>> stack{{0, 0}};
            while (!stack.empty()) {
                auto [i, depth] = stack.back();
                stack.pop_back();
                out << std::string(4 + 2 * depth, ' ') << i << ": ";
                if (nodes[i].feature < 0) {
                    out << "leaf=" << format_double(nodes[i].value) << "\n";
                } else {
                    out << "[x" << nodes[i].feature << " < " << format_double(nodes[i].threshold)
                        << "] yes=" << nodes[i].left << " no=" << nodes[i].right << "\n";
                    stack.push_back({nodes[i].right, depth + 1});
                    stack.push_back({nodes[i].left, depth + 1});
                }
            }
        }
    }
    return out.str();
}

}  // namespace gplan
