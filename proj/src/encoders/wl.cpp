#include "gplan/encoders.hpp"

#include "gplan/error.hpp"

#include <algorithm>
#include <sstream>

namespace gplan {

int InstanceGraph::add_node(std::string feature) {
    features.push_back(std::move(feature));
    adjacency.emplace_back();
    return static_cast<int>(features.size()) - 1;
}

void InstanceGraph::add_edge(int u, int v, int label) {
    adjacency[u].push_back({v, label});
    adjacency[v].push_back({u, label});
}

InstanceGraph build_ilg(const SymbolicState &state, std::span<const AtomId> goal, const GroundedTask &task) {
    InstanceGraph graph;
    const auto &domain = task.domain();
    for (const auto &object : task.objects())
        graph.add_node(domain.find_constant(object.name) ? object.name : std::string("object"));
    graph.num_objects = task.objects().size();

    // Merge s and g, both sorted.
    const auto &atoms = state.atoms();
    std::size_t i = 0, j = 0;
    while (i < atoms.size() || j < goal.size()) {
        AtomId atom;
        const char *status;
        if (j == goal.size() || (i < atoms.size() && atoms[i] < goal[j])) {
            atom = atoms[i++];
            status = ":apn";
        } else if (i == atoms.size() || goal[j] < atoms[i]) {
            atom = goal[j++];
            status = ":upg";
        } else {
            atom = atoms[i++];
            ++j;
            status = ":apg";
        }
        const auto &ground = task.atoms()[atom];
        int node = graph.add_node(domain.predicates[ground.predicate].name + status);
        graph.node_atom.push_back(atom);
        for (std::size_t pos = 0; pos < ground.args.size(); ++pos)
            graph.add_edge(node, ground.args[pos], static_cast<int>(pos) + 1);
    }
    return graph;
}

std::size_t WlVocabulary::KeyHash::operator()(const std::vector<int> &key) const noexcept {
    std::uint64_t h = 1469598103934665603ull;
    for (int v : key) {
        h ^= static_cast<std::uint32_t>(v);
        h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
}

WlVocabulary::WlVocabulary(int k) : k_(k) {
    if (k < 0)
        throw Error("WL iteration count must be non-negative");
}

int WlVocabulary::index_of(std::string_view color) const {
    auto it = string_ids_.find(std::string(color));
    return it == string_ids_.end() ? kOov : it->second;
}

int WlVocabulary::intern_symbol(const std::string &symbol, bool collect) {
    auto it = symbol_ids_.find(symbol);
    if (it != symbol_ids_.end())
        return it->second;
    if (!collect)
        return kOov;
    if (symbol.find_first_of("[],@\n") != std::string::npos)
        throw Error("WL feature symbol '" + symbol + "' contains a reserved character");
    int id = static_cast<int>(strings_.size());
    strings_.push_back(symbol);
    symbol_ids_.emplace(symbol, id);
    string_ids_.emplace(symbol, id);
    return id;
}

int WlVocabulary::intern_key(std::vector<int> key, bool collect) {
    auto it = key_ids_.find(key);
    if (it != key_ids_.end())
        return it->second;
    if (!collect)
        return kOov;
    std::vector<std::string> children;
    for (std::size_t i = 1; i < key.size(); i += 2)
        children.push_back(strings_[key[i]] + "@" + std::to_string(key[i + 1]));
    std::sort(children.begin(), children.end());
    std::string color = strings_[key[0]] + "[";
    for (std::size_t i = 0; i < children.size(); ++i) {
        if (i)
            color += ',';
        color += children[i];
    }
    color += ']';
    int id = static_cast<int>(strings_.size());
    strings_.push_back(color);
    string_ids_.emplace(std::move(color), id);
    key_ids_.emplace(std::move(key), id);
    return id;
}

std::vector<int> WlVocabulary::refine(const InstanceGraph &graph, bool collect) {
    return refine(graph, k_, collect);
}

std::vector<int> WlVocabulary::refine(const InstanceGraph &graph, int k, bool collect) {
    if (collect && frozen_)
        throw Error("cannot collect colours into a frozen WL vocabulary");
    const std::size_t n = graph.size();
    std::vector<int> out;
    out.reserve(n * (k + 1));
    std::vector<int> current(n);
    for (std::size_t v = 0; v < n; ++v)
        current[v] = intern_symbol(graph.features[v], collect);
    out.insert(out.end(), current.begin(), current.end());

    std::vector<int> next(n);
    std::vector<std::pair<int, int>> neighbours;
    std::vector<int> key;
    for (int level = 1; level <= k; ++level) {
        for (std::size_t v = 0; v < n; ++v) {
            if (current[v] == kOov) {
                next[v] = kOov;
                continue;
            }
            neighbours.clear();
            bool oov = false;
            for (const auto &e : graph.adjacency[v]) {
                if (current[e.node] == kOov) {
                    oov = true;
                    break;
                }
                neighbours.emplace_back(current[e.node], e.label);
            }
            if (oov) {
                next[v] = kOov;
                continue;
            }
            std::sort(neighbours.begin(), neighbours.end());
            key.assign(1, current[v]);
            for (auto [c, l] : neighbours) {
                key.push_back(c);
                key.push_back(l);
            }
            next[v] = intern_key(key, collect);
        }
        std::swap(current, next);
        out.insert(out.end(), current.begin(), current.end());
    }
    return out;
}

namespace {

// Splits "own[child@l,...]" into own and children. Returns false for level-0 symbols.
bool split_color(const std::string &color, std::string &own,
                 std::vector<std::pair<std::string, int>> &children) {
    if (color.empty() || color.back() != ']')
        return false;
    int depth = 0;
    std::size_t open = std::string::npos;
    for (std::size_t i = color.size(); i-- > 0;) {
        if (color[i] == ']')
            ++depth;
        else if (color[i] == '[' && --depth == 0) {
            open = i;
            break;
        }
    }
    if (open == std::string::npos)
        throw FormatError("unbalanced WL colour '" + color + "'");
    own = color.substr(0, open);
    children.clear();
    std::string_view inner(color.data() + open + 1, color.size() - open - 2);
    std::size_t start = 0;
    depth = 0;
    for (std::size_t i = 0; i <= inner.size(); ++i) {
        if (i < inner.size() && inner[i] == '[')
            ++depth;
        else if (i < inner.size() && inner[i] == ']')
            --depth;
        else if (i == inner.size() || (inner[i] == ',' && depth == 0)) {
            if (i == start) {
                if (i == inner.size() && children.empty())
                    break;
                throw FormatError("empty child in WL colour '" + color + "'");
            }
            std::string_view child = inner.substr(start, i - start);
            auto at = child.rfind('@');
            if (at == std::string_view::npos)
                throw FormatError("missing edge label in WL colour '" + color + "'");
            int label = 0;
            try {
                label = std::stoi(std::string(child.substr(at + 1)));
            } catch (const std::exception &) {
                throw FormatError("bad edge label in WL colour '" + color + "'");
            }
            children.emplace_back(std::string(child.substr(0, at)), label);
            start = i + 1;
        }
    }
    return true;
}

}  // namespace

void WlVocabulary::rebuild_keys() {
    symbol_ids_.clear();
    key_ids_.clear();
    string_ids_.clear();
    for (std::size_t i = 0; i < strings_.size(); ++i)
        if (!string_ids_.emplace(strings_[i], static_cast<int>(i)).second)
            throw FormatError("duplicate WL colour '" + strings_[i] + "'");
    std::string own;
    std::vector<std::pair<std::string, int>> children;
    std::vector<std::pair<int, int>> pairs;
    for (std::size_t i = 0; i < strings_.size(); ++i) {
        if (!split_color(strings_[i], own, children)) {
            symbol_ids_.emplace(strings_[i], static_cast<int>(i));
            continue;
        }
        auto lookup = [&](const std::string &c) {
            auto it = string_ids_.find(c);
            if (it == string_ids_.end())
                throw FormatError("WL colour '" + strings_[i] + "' refers to unknown colour '" + c + "'");
            return it->second;
        };
        pairs.clear();
        for (auto &[c, l] : children)
            pairs.emplace_back(lookup(c), l);
        std::sort(pairs.begin(), pairs.end());
        std::vector<int> key{lookup(own)};
        for (auto [c, l] : pairs) {
            key.push_back(c);
            key.push_back(l);
        }
        key_ids_.emplace(std::move(key), static_cast<int>(i));
    }
}

void WlVocabulary::freeze() {
    if (frozen_)
        return;
    std::sort(strings_.begin(), strings_.end());
    rebuild_keys();
    frozen_ = true;
}

std::string WlVocabulary::save() const {
    if (!frozen_)
        throw Error("only a frozen WL vocabulary can be saved");
    std::string out = "WLVOCAB1 k=" + std::to_string(k_) + "\n";
    for (const auto &c : strings_) {
        out += c;
        out += '\n';
    }
    return out;
}

WlVocabulary WlVocabulary::load(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line) || !line.starts_with("WLVOCAB1 k="))
        throw FormatError("expected WLVOCAB1 header");
    int k = 0;
    try {
        k = std::stoi(line.substr(11));
    } catch (const std::exception &) {
        throw FormatError("bad WL iteration count in vocabulary header");
    }
    WlVocabulary vocab(k);
    while (std::getline(in, line))
        if (!line.empty())
            vocab.strings_.push_back(line);
    if (!std::is_sorted(vocab.strings_.begin(), vocab.strings_.end()))
        throw FormatError("WL vocabulary colours are not in lexicographic order");
    vocab.rebuild_keys();
    vocab.frozen_ = true;
    return vocab;
}

Vector embed_wl(const SymbolicState &state, std::span<const AtomId> goal, const GroundedTask &task,
                WlVocabulary &vocab, const WlOptions &options) {
    if (!vocab.frozen())
        throw Error("embed_wl needs a frozen vocabulary");
    if (vocab.size() == 0)
        throw Error("embed_wl needs a non-empty vocabulary");
    const auto d = static_cast<Eigen::Index>(vocab.size());
    Vector out = Vector::Zero(d + 1);
    for (int c : vocab.refine(build_ilg(state, goal, task), false))
        out[c == WlVocabulary::kOov ? d : c] += 1.0;
    if (options.normalize) {
        double total = out.sum();
        if (total > 0)
            out /= total;
    }
    return out;
}

SymbolicState goal_state(std::span<const AtomId> goal) { return SymbolicState(AtomSet(goal.begin(), goal.end())); }

Vector embed_wl_goal(const GroundedTask &task, WlVocabulary &vocab, const WlOptions &options) {
    return embed_wl(goal_state(task.goal()), task.goal(), task, vocab, options);
}

WlVocabulary collect_vocabulary(std::span<const LabeledTrajectory> data, int k) {
    WlVocabulary vocab(k);
    for (const auto &item : data)
        for (const auto &s : item.trajectory->states)
            vocab.refine(build_ilg(s, item.trajectory->goal, *item.task), true);
    for (const auto &item : data)
        vocab.refine(build_ilg(goal_state(item.trajectory->goal), item.trajectory->goal, *item.task), true);
    vocab.freeze();
    return vocab;
}

}  // namespace gplan
