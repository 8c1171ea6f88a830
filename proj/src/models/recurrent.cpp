#include "gplan/error.hpp"
#include "gplan/log.hpp"
#include "gplan/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace gplan {

std::string_view to_string(CellType cell) { return cell == CellType::Gru ? "gru" : "lstm"; }

CellType parse_cell_type(std::string_view name) {
    if (name == "gru")
        return CellType::Gru;
    if (name == "lstm")
        return CellType::Lstm;
    throw Error("unknown recurrent cell '" + std::string(name) + "'");
}

std::string_view to_string(LossKind loss) { return loss == LossKind::Cosine ? "cosine" : "mse"; }

LossKind default_loss(TargetMode mode) { return mode == TargetMode::State ? LossKind::Cosine : LossKind::Mse; }

using MatMap = Eigen::Map<Matrix>;
using VecMap = Eigen::Map<Vector>;

struct RecurrentModel::Layout {
    Eigen::Index D, E, H, L, G;
    Eigen::Index ws, bs, wg, bg;
    std::vector<Eigen::Index> w_ih, w_hh, b_ih, b_hh, in_size;
    Eigen::Index w1, b1, w2, b2, total;

    static Layout make(Eigen::Index dim, const RecurrentConfig &c) {
        Layout l;
        l.D = dim;
        l.E = c.embed;
        l.H = c.hidden;
        l.L = c.layers;
        l.G = c.cell == CellType::Gru ? 3 : 4;
        Eigen::Index off = 0;
        auto take = [&](Eigen::Index n) {
            Eigen::Index at = off;
            off += n;
            return at;
        };
        l.ws = take(l.E * l.D);
        l.bs = take(l.E);
        l.wg = take(l.E * l.D);
        l.bg = take(l.E);
        for (Eigen::Index i = 0; i < l.L; ++i) {
            Eigen::Index in = i == 0 ? 2 * l.E : l.H;
            l.in_size.push_back(in);
            l.w_ih.push_back(take(l.G * l.H * in));
            l.w_hh.push_back(take(l.G * l.H * l.H));
            l.b_ih.push_back(take(l.G * l.H));
            l.b_hh.push_back(take(l.G * l.H));
        }
        l.w1 = take(l.H * l.H);
        l.b1 = take(l.H);
        l.w2 = take(l.D * l.H);
        l.b2 = take(l.D);
        l.total = off;
        return l;
    }
};

namespace {

using Layout = RecurrentModel::Layout;

// Parameter (or gradient) views over one flat buffer.
struct Views {
    double *base;
    const Layout &l;

    MatMap m(Eigen::Index off, Eigen::Index rows, Eigen::Index cols) const { return MatMap(base + off, rows, cols); }
    VecMap v(Eigen::Index off, Eigen::Index n) const { return VecMap(base + off, n); }

    MatMap ws() const { return m(l.ws, l.E, l.D); }
    VecMap bs() const { return v(l.bs, l.E); }
    MatMap wg() const { return m(l.wg, l.E, l.D); }
    VecMap bg() const { return v(l.bg, l.E); }
    MatMap w_ih(int i) const { return m(l.w_ih[i], l.G * l.H, l.in_size[i]); }
    MatMap w_hh(int i) const { return m(l.w_hh[i], l.G * l.H, l.H); }
    VecMap b_ih(int i) const { return v(l.b_ih[i], l.G * l.H); }
    VecMap b_hh(int i) const { return v(l.b_hh[i], l.G * l.H); }
    MatMap w1() const { return m(l.w1, l.H, l.H); }
    VecMap b1() const { return v(l.b1, l.H); }
    MatMap w2() const { return m(l.w2, l.D, l.H); }
    VecMap b2() const { return v(l.b2, l.D); }
};

Matrix sigmoid(const Matrix &x) { return (1.0 / (1.0 + (-x.array()).exp())).matrix(); }

struct LayerCache {
    Matrix x, h_prev, c_prev, gates, hn, c, h;
};

struct StepCache {
    Matrix xs, xg, e, a1, y;
    std::vector<LayerCache> layers;
};

struct Network {
    Views p;
    CellType cell;

    // One time step for a batch (columns). h/c hold per-layer state and are updated.
    Matrix step(const Matrix &xs, const Matrix &xg, std::vector<Matrix> &h, std::vector<Matrix> &c,
                StepCache *cache) const {
        const auto &l = p.l;
        const Eigen::Index B = xs.cols(), H = l.H;
        Matrix e(2 * l.E, B);
        e.topRows(l.E) = (p.ws() * xs).colwise() + p.bs();
        e.bottomRows(l.E) = (p.wg() * xg).colwise() + p.bg();
        if (cache) {
            cache->xs = xs;
            cache->xg = xg;
            cache->e = e;
            cache->layers.resize(l.L);
        }
        Matrix x = e;
        for (int i = 0; i < l.L; ++i) {
            Matrix gi = (p.w_ih(i) * x).colwise() + p.b_ih(i);
            Matrix gh = (p.w_hh(i) * h[i]).colwise() + p.b_hh(i);
            Matrix gates(l.G * H, B), hn, c_new, h_new;
            if (cell == CellType::Gru) {
                gates.topRows(2 * H) = sigmoid(gi.topRows(2 * H) + gh.topRows(2 * H));
                hn = gh.bottomRows(H);
                gates.bottomRows(H) =
                    (gi.bottomRows(H).array() + gates.topRows(H).array() * hn.array()).tanh().matrix();
                auto z = gates.middleRows(H, H).array();
                h_new = ((1.0 - z) * gates.bottomRows(H).array() + z * h[i].array()).matrix();
            } else {
                Matrix a = gi + gh;
                gates.topRows(2 * H) = sigmoid(a.topRows(2 * H));
                gates.middleRows(2 * H, H) = a.middleRows(2 * H, H).array().tanh().matrix();
                gates.bottomRows(H) = sigmoid(a.bottomRows(H));
                c_new = (gates.middleRows(H, H).array() * c[i].array() +
                         gates.topRows(H).array() * gates.middleRows(2 * H, H).array())
                            .matrix();
                h_new = (gates.bottomRows(H).array() * c_new.array().tanh()).matrix();
            }
            if (cache) {
                auto &lc = cache->layers[i];
                lc.x = x;
                lc.h_prev = h[i];
                if (cell == CellType::Lstm)
                    lc.c_prev = c[i];
                lc.gates = gates;
                lc.hn = hn;
                lc.c = c_new;
                lc.h = h_new;
            }
            h[i] = h_new;
            if (cell == CellType::Lstm)
                c[i] = c_new;
            x = h_new;
        }
        Matrix a1 = (p.w1() * x).colwise() + p.b1();
        Matrix y = (p.w2() * a1.cwiseMax(0.0)).colwise() + p.b2();
        if (cache) {
            cache->a1 = a1;
            cache->y = y;
        }
        return y;
    }

    // Backward through one step. dh/dc carry gradients w.r.t. the layer
    // states produced by this step and are replaced by those w.r.t. the
    // previous step's states.
    void backward(const StepCache &cache, const Matrix &dy, std::vector<Matrix> &dh, std::vector<Matrix> &dc,
                  const Views &g) const {
        const auto &l = p.l;
        const Eigen::Index H = l.H;
        Matrix relu = cache.a1.cwiseMax(0.0);
        g.w2().noalias() += dy * relu.transpose();
        g.b2() += dy.rowwise().sum();
        Matrix da1 = (p.w2().transpose() * dy).array() * (cache.a1.array() > 0.0).cast<double>();
        const Matrix &top = cache.layers.back().h;
        g.w1().noalias() += da1 * top.transpose();
        g.b1() += da1.rowwise().sum();
        Matrix dx = p.w1().transpose() * da1;
        for (int i = static_cast<int>(l.L) - 1; i >= 0; --i) {
            const auto &lc = cache.layers[i];
            Matrix dht = dh[i] + dx;
            Matrix dgi, dgh;
            if (cell == CellType::Gru) {
                auto r = lc.gates.topRows(H).array();
                auto z = lc.gates.middleRows(H, H).array();
                auto n = lc.gates.bottomRows(H).array();
                Eigen::ArrayXXd dn = dht.array() * (1.0 - z);
                Eigen::ArrayXXd dz = dht.array() * (lc.h_prev.array() - n);
                Eigen::ArrayXXd dan = dn * (1.0 - n * n);
                Eigen::ArrayXXd dr = dan * lc.hn.array();
                dgi.resize(3 * H, dht.cols());
                dgi.topRows(H) = (dr * r * (1.0 - r)).matrix();
                dgi.middleRows(H, H) = (dz * z * (1.0 - z)).matrix();
                dgi.bottomRows(H) = dan.matrix();
                dgh = dgi;
                dgh.bottomRows(H) = (dan * r).matrix();
                dh[i] = (dht.array() * z).matrix();
            } else {
                auto ig = lc.gates.topRows(H).array();
                auto fg = lc.gates.middleRows(H, H).array();
                auto gg = lc.gates.middleRows(2 * H, H).array();
                auto og = lc.gates.bottomRows(H).array();
                Eigen::ArrayXXd tc = lc.c.array().tanh();
                Eigen::ArrayXXd dct = dc[i].array() + dht.array() * og * (1.0 - tc * tc);
                dgi.resize(4 * H, dht.cols());
                dgi.topRows(H) = (dct * gg * ig * (1.0 - ig)).matrix();
                dgi.middleRows(H, H) = (dct * lc.c_prev.array() * fg * (1.0 - fg)).matrix();
                dgi.middleRows(2 * H, H) = (dct * ig * (1.0 - gg * gg)).matrix();
                dgi.bottomRows(H) = (dht.array() * tc * og * (1.0 - og)).matrix();
                dgh = dgi;
                dc[i] = (dct * fg).matrix();
                dh[i].setZero();
            }
            g.w_ih(i).noalias() += dgi * lc.x.transpose();
            g.b_ih(i) += dgi.rowwise().sum();
            g.w_hh(i).noalias() += dgh * lc.h_prev.transpose();
            g.b_hh(i) += dgh.rowwise().sum();
            dh[i].noalias() += p.w_hh(i).transpose() * dgh;
            dx = p.w_ih(i).transpose() * dgi;
        }
        g.ws().noalias() += dx.topRows(l.E) * cache.xs.transpose();
        g.bs() += dx.topRows(l.E).rowwise().sum();
        g.wg().noalias() += dx.bottomRows(l.E) * cache.xg.transpose();
        g.bg() += dx.bottomRows(l.E).rowwise().sum();
    }
};

// Column b of the step-t inputs/targets, zero past the sequence end.
struct BatchView {
    std::span<const EmbeddedTrajectory *const> seqs;
    Eigen::Index D;
    Eigen::Index steps = 0;
    Eigen::Index valid = 0;

    BatchView(std::span<const EmbeddedTrajectory *const> s, Eigen::Index dim) : seqs(s), D(dim) {
        for (auto *t : seqs) {
            steps = std::max(steps, t->length());
            valid += t->length();
        }
    }
    Matrix states(Eigen::Index t) const {
        Matrix m = Matrix::Zero(D, static_cast<Eigen::Index>(seqs.size()));
        for (std::size_t b = 0; b < seqs.size(); ++b)
            if (t < seqs[b]->length())
                m.col(b) = seqs[b]->states.row(t).transpose();
        return m;
    }
    Matrix goals() const {
        Matrix m(D, static_cast<Eigen::Index>(seqs.size()));
        for (std::size_t b = 0; b < seqs.size(); ++b)
            m.col(b) = seqs[b]->goal;
        return m;
    }
    bool active(Eigen::Index t, std::size_t b) const { return t < seqs[b]->length(); }
};

}  // namespace

RecurrentModel::RecurrentModel(Eigen::Index dim, TargetMode mode, RecurrentConfig config)
    : dim_(dim), mode_(mode), config_(config) {
    if (dim < 1 || config.embed < 1 || config.hidden < 1 || config.layers < 1)
        throw Error("invalid recurrent model shape");
    params_ = Vector::Zero(Layout::make(dim, config).total);
    initialize(config.seed);
}

std::size_t RecurrentModel::parameter_count(Eigen::Index dim, const RecurrentConfig &config) {
    return static_cast<std::size_t>(Layout::make(dim, config).total);
}

std::pair<std::size_t, std::size_t> RecurrentModel::head_weight_range() const {
    auto l = Layout::make(dim_, config_);
    return {static_cast<std::size_t>(l.w1), static_cast<std::size_t>(l.b2 + l.D - l.w1)};
}

void RecurrentModel::initialize(std::uint64_t seed) {
    auto l = Layout::make(dim_, config_);
    std::mt19937_64 rng(seed);
    auto fill = [&](Eigen::Index off, Eigen::Index n, double bound) {
        std::uniform_real_distribution<double> u(-bound, bound);
        for (Eigen::Index i = 0; i < n; ++i)
            params_[off + i] = u(rng);
    };
    const double enc = 1.0 / std::sqrt(static_cast<double>(l.D));
    fill(l.ws, l.E * l.D, enc);
    fill(l.bs, l.E, enc);
    fill(l.wg, l.E * l.D, enc);
    fill(l.bg, l.E, enc);
    const double rec = 1.0 / std::sqrt(static_cast<double>(l.H));
    for (Eigen::Index i = 0; i < l.L; ++i) {
        fill(l.w_ih[i], l.G * l.H * l.in_size[i], rec);
        fill(l.w_hh[i], l.G * l.H * l.H, rec);
        fill(l.b_ih[i], l.G * l.H, rec);
        fill(l.b_hh[i], l.G * l.H, rec);
    }
    fill(l.w1, l.H * l.H, rec);
    fill(l.b1, l.H, rec);
    fill(l.w2, l.D * l.H, rec);
    fill(l.b2, l.D, rec);
}

ModelMemory RecurrentModel::initial_memory() const {
    const auto states = config_.cell == CellType::Lstm ? 2 : 1;
    return ModelMemory(static_cast<std::size_t>(states * config_.layers * config_.hidden), 0.0);
}

Vector RecurrentModel::forward(const Vector &state, const Vector &goal, ModelMemory &memory) const {
    auto l = Layout::make(dim_, config_);
    if (memory.size() != initial_memory().size())
        throw Error("recurrent model memory has the wrong size");
    Network net{Views{const_cast<double *>(params_.data()), l}, config_.cell};
    std::vector<Matrix> h(l.L), c(l.L);
    std::size_t off = 0;
    for (Eigen::Index i = 0; i < l.L; ++i) {
        h[i] = Eigen::Map<Matrix>(memory.data() + off, l.H, 1);
        off += l.H;
        if (config_.cell == CellType::Lstm) {
            c[i] = Eigen::Map<Matrix>(memory.data() + off, l.H, 1);
            off += l.H;
        }
    }
    Matrix y = net.step(state, goal, h, c, nullptr);
    off = 0;
    for (Eigen::Index i = 0; i < l.L; ++i) {
        std::copy(h[i].data(), h[i].data() + l.H, memory.data() + off);
        off += l.H;
        if (config_.cell == CellType::Lstm) {
            std::copy(c[i].data(), c[i].data() + l.H, memory.data() + off);
            off += l.H;
        }
    }
    return y.col(0);
}

double RecurrentModel::loss_and_gradient(std::span<const EmbeddedTrajectory *const> batch, Vector *gradient) const {
    auto l = Layout::make(dim_, config_);
    for (auto *t : batch)
        if (t->dim() != dim_ || t->goal.size() != dim_)
            throw Error("trajectory width does not match the recurrent model");
    BatchView view(batch, dim_);
    if (gradient)
        gradient->setZero(params_.size());
    if (view.valid == 0)
        return 0.0;
    Network net{Views{const_cast<double *>(params_.data()), l}, config_.cell};
    const auto B = static_cast<Eigen::Index>(batch.size());
    std::vector<Matrix> h(l.L, Matrix::Zero(l.H, B)), c(l.L, Matrix::Zero(l.H, B));
    std::vector<StepCache> caches(gradient ? view.steps : 0);
    std::vector<Matrix> dys(view.steps);
    Matrix goals = view.goals();
    double loss = 0.0;
    const double norm = static_cast<double>(view.valid);
    bool zero_target = false;
    for (Eigen::Index t = 0; t < view.steps; ++t) {
        Matrix xs = view.states(t);
        Matrix y = net.step(xs, goals, h, c, gradient ? &caches[t] : nullptr);
        Matrix dy = Matrix::Zero(dim_, B);
        for (Eigen::Index b = 0; b < B; ++b) {
            if (!view.active(t, static_cast<std::size_t>(b)))
                continue;
            Vector target = batch[b]->states.row(t + 1).transpose();
            if (mode_ == TargetMode::Delta)
                target -= xs.col(b);
            if (config_.loss == LossKind::Mse) {
                Vector diff = y.col(b) - target;
                loss += diff.squaredNorm() / static_cast<double>(dim_) / norm;
                dy.col(b) = 2.0 * diff / static_cast<double>(dim_) / norm;
            } else {
                double tn = target.norm();
                if (tn == 0.0) {
                    zero_target = true;
                    continue;
                }
                double yn = std::max(y.col(b).norm(), 1e-12);
                double cosine = y.col(b).dot(target) / (yn * tn);
                loss += (1.0 - cosine) / norm;
                dy.col(b) = -(target / (yn * tn) - cosine * y.col(b) / (yn * yn)) / norm;
            }
        }
        dys[t] = std::move(dy);
    }
    if (zero_target)
        log_warn("cosine loss: zero target vector contributes no loss");
    if (gradient) {
        Views g{gradient->data(), l};
        std::vector<Matrix> dh(l.L, Matrix::Zero(l.H, B)), dc(l.L, Matrix::Zero(l.H, B));
        for (Eigen::Index t = view.steps; t-- > 0;)
            net.backward(caches[t], dys[t], dh, dc, g);
    }
    return loss;
}

double RecurrentModel::delta_squared_error_sum(const EmbeddedTrajectory &trajectory) const {
    auto l = Layout::make(dim_, config_);
    const EmbeddedTrajectory *one[] = {&trajectory};
    BatchView view(one, dim_);
    Network net{Views{const_cast<double *>(params_.data()), l}, config_.cell};
    std::vector<Matrix> h(l.L, Matrix::Zero(l.H, 1)), c(l.L, Matrix::Zero(l.H, 1));
    Matrix goal = view.goals();
    double sum = 0.0;
    for (Eigen::Index t = 0; t < view.steps; ++t) {
        Matrix xs = view.states(t);
        Matrix y = net.step(xs, goal, h, c, nullptr);
        Vector next = mode_ == TargetMode::Delta ? Vector(xs.col(0) + y.col(0)) : Vector(y.col(0));
        sum += (next - trajectory.states.row(t + 1).transpose()).squaredNorm();
    }
    return sum;
}

namespace {

struct Adam {
    Vector m, v;
    double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    long t = 0;

    explicit Adam(Eigen::Index n) : m(Vector::Zero(n)), v(Vector::Zero(n)) {}

    void step(Vector &params, const Vector &grad, double lr) {
        ++t;
        m = b1 * m + (1 - b1) * grad;
        v = b2 * v + (1 - b2) * grad.cwiseProduct(grad);
        const double c1 = 1 - std::pow(b1, static_cast<double>(t));
        const double c2 = 1 - std::pow(b2, static_cast<double>(t));
        params.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
    }
};

double dataset_loss(const RecurrentModel &model, std::span<const EmbeddedTrajectory *const> data, int batch_size) {
    double total = 0.0;
    Eigen::Index steps = 0;
    for (std::size_t i = 0; i < data.size(); i += static_cast<std::size_t>(batch_size)) {
        auto batch = data.subspan(i, std::min<std::size_t>(static_cast<std::size_t>(batch_size), data.size() - i));
        Eigen::Index valid = 0;
        for (auto *t : batch)
            valid += t->length();
        total += model.loss_and_gradient(batch, nullptr) * static_cast<double>(valid);
        steps += valid;
    }
    return steps ? total / static_cast<double>(steps) : 0.0;
}

}  // namespace

RecurrentModel train_recurrent(std::span<const EmbeddedTrajectory> train,
                               std::span<const EmbeddedTrajectory> validation, TargetMode mode,
                               const RecurrentConfig &config, TrainingCurve *curve) {
    std::vector<const EmbeddedTrajectory *> train_set, val_set;
    Eigen::Index dim = -1;
    for (const auto &t : train) {
        if (t.length() == 0) {
            log_warn("skipping zero-length training trajectory");
            continue;
        }
        if (dim < 0)
            dim = t.dim();
        train_set.push_back(&t);
    }
    if (train_set.empty())
        throw Error("recurrent training needs at least one non-empty trajectory");
    for (const auto &t : validation)
        if (t.length() > 0)
            val_set.push_back(&t);
    if (config.batch_size < 1 || config.epochs < 0 || config.learning_rate <= 0)
        throw Error("invalid recurrent training configuration");

    RecurrentModel model(dim, mode, config);
    Adam adam(static_cast<Eigen::Index>(model.num_parameters()));
    std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ull);
    TrainingCurve local;
    TrainingCurve &log_curve = curve ? *curve : local;
    log_curve = {};
    Vector best_params = model.parameters();
    double best = std::numeric_limits<double>::infinity();
    int since_best = 0;
    Vector grad;
    std::vector<const EmbeddedTrajectory *> order = train_set;
    const auto &monitor = val_set.empty() ? train_set : val_set;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_loss = 0.0;
        Eigen::Index epoch_steps = 0;
        for (std::size_t i = 0; i < order.size(); i += static_cast<std::size_t>(config.batch_size)) {
            std::span<const EmbeddedTrajectory *const> batch(
                order.data() + i, std::min<std::size_t>(static_cast<std::size_t>(config.batch_size), order.size() - i));
            double loss = model.loss_and_gradient(batch, &grad);
            if (!std::isfinite(loss) || !grad.allFinite())
                throw Error("non-finite recurrent training loss at epoch " + std::to_string(epoch) + " (loss " +
                            std::to_string(loss) + ", gradient norm " + std::to_string(grad.norm()) + ")");
            double gnorm = grad.norm();
            if (config.clip_norm > 0 && gnorm > config.clip_norm)
                grad *= config.clip_norm / gnorm;
            adam.step(model.parameters(), grad, config.learning_rate);
            Eigen::Index valid = 0;
            for (auto *t : batch)
                valid += t->length();
            epoch_loss += loss * static_cast<double>(valid);
            epoch_steps += valid;
        }
        log_curve.train_loss.push_back(epoch_loss / static_cast<double>(epoch_steps));
        double val = dataset_loss(model, monitor, config.batch_size);
        log_curve.validation_loss.push_back(val);
        if (!std::isfinite(val))
            throw Error("non-finite validation loss at epoch " + std::to_string(epoch));
        if (val < best) {
            best = val;
            best_params = model.parameters();
            log_curve.best_iteration = epoch;
            since_best = 0;
        } else if (++since_best >= config.patience) {
            break;
        }
    }
    if (log_curve.best_iteration >= 0)
        model.parameters() = best_params;
    return model;
}

std::string RecurrentModel::save() const {
    std::ostringstream out;
    out << "GPLANMODEL1 recurrent\n";
    out << "mode " << to_string(mode_) << "\n";
    out << "dim " << dim_ << "\n";
    out << "config cell=" << to_string(config_.cell) << " embed=" << config_.embed << " hidden=" << config_.hidden
        << " layers=" << config_.layers << " learning_rate=" << format_double(config_.learning_rate)
        << " batch_size=" << config_.batch_size << " epochs=" << config_.epochs << " patience=" << config_.patience
        << " clip_norm=" << format_double(config_.clip_norm) << " seed=" << config_.seed
        << " loss=" << to_string(config_.loss) << "\n";
    out << "params " << params_.size() << "\n";
    for (Eigen::Index i = 0; i < params_.size(); ++i)
        out << format_double(params_[i]) << ((i % 8 == 7 || i + 1 == params_.size()) ? '\n' : ' ');
    out << "end\n";
    return out.str();
}

RecurrentModel RecurrentModel::load(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string word, line;
    auto expect = [&](const std::string &w) {
        if (!(in >> word) || word != w)
            throw FormatError("recurrent model: expected '" + w + "'");
    };
    expect("GPLANMODEL1");
    expect("recurrent");
    expect("mode");
    in >> word;
    TargetMode mode = parse_target_mode(word);
    expect("dim");
    Eigen::Index dim = 0;
    if (!(in >> dim))
        throw FormatError("recurrent model: bad dim");
    expect("config");
    std::getline(in, line);
    RecurrentConfig config;
    std::istringstream fields(line);
    while (fields >> word) {
        auto eq = word.find('=');
        if (eq == std::string::npos)
            throw FormatError("recurrent model: bad config field '" + word + "'");
        auto key = word.substr(0, eq), value = word.substr(eq + 1);
        if (key == "cell")
            config.cell = parse_cell_type(value);
        else if (key == "embed")
            config.embed = std::stoi(value);
        else if (key == "hidden")
            config.hidden = std::stoi(value);
        else if (key == "layers")
            config.layers = std::stoi(value);
        else if (key == "learning_rate")
            config.learning_rate = parse_double(value);
        else if (key == "batch_size")
            config.batch_size = std::stoi(value);
        else if (key == "epochs")
            config.epochs = std::stoi(value);
        else if (key == "patience")
            config.patience = std::stoi(value);
        else if (key == "clip_norm")
            config.clip_norm = parse_double(value);
        else if (key == "seed")
            config.seed = std::stoull(value);
        else if (key == "loss")
            config.loss = value == "cosine" ? LossKind::Cosine : LossKind::Mse;
    }
    RecurrentModel model(dim, mode, config);
    expect("params");
    Eigen::Index n = 0;
    if (!(in >> n) || n != model.params_.size())
        throw FormatError("recurrent model: parameter count does not match the architecture");
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(in >> word))
            throw FormatError("recurrent model: truncated parameters");
        model.params_[i] = parse_double(word);
    }
    expect("end");
    return model;
}

}  // namespace gplan
