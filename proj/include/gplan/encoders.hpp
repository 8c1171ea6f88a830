#pragma once

// State/goal encoders: WL colour histograms over instance learning graphs,
// and the fixed-size factored (FSF) slot encoding.

#include "gplan/task.hpp"
#include "gplan/trajectory.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace gplan {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct InstanceGraph {
    struct Edge {
        int node;
        int label;  // 1-based argument position
    };

    std::vector<std::string> features;          // level-0 symbol per node
    std::vector<std::vector<Edge>> adjacency;   // undirected
    std::size_t num_objects = 0;                // nodes [0, num_objects) are objects
    std::vector<AtomId> node_atom;              // atom of node num_objects + i

    std::size_t size() const { return features.size(); }
    int add_node(std::string feature);
    void add_edge(int u, int v, int label);
};

/// Nodes: objects (canonical order), then the atoms of s ∪ g in canonical
/// order. An atom in both s and g is one node.
InstanceGraph build_ilg(const SymbolicState &state, std::span<const AtomId> goal, const GroundedTask &task);

/// Colour vocabulary for WL refinement with injective relabelling. While
/// collecting, unseen colours get fresh ids; freeze() reindexes colours by
/// lexicographic order of their canonical strings. Frozen lookups of unseen
/// colours yield kOov, and any colour built from an OOV colour is OOV.
class WlVocabulary {
public:
    static constexpr int kOov = -1;

    explicit WlVocabulary(int k = 2);

    int k() const { return k_; }
    bool frozen() const { return frozen_; }
    std::size_t size() const { return strings_.size(); }
    const std::vector<std::string> &colors() const { return strings_; }
    int index_of(std::string_view color) const;

    /// Colour ids of every node at every level 0..k, level-major.
    /// collect=true requires an unfrozen vocabulary.
    std::vector<int> refine(const InstanceGraph &graph, bool collect);
    std::vector<int> refine(const InstanceGraph &graph, int k, bool collect);

    void freeze();

    /// "WLVOCAB1 k=<k>" then one colour per line in index order.
    std::string save() const;
    static WlVocabulary load(std::string_view text);

private:
    struct KeyHash {
        std::size_t operator()(const std::vector<int> &key) const noexcept;
    };

    int intern_symbol(const std::string &symbol, bool collect);
    int intern_key(std::vector<int> key, bool collect);
    void rebuild_keys();

    int k_;
    bool frozen_ = false;
    std::vector<std::string> strings_;
    std::unordered_map<std::string, int> symbol_ids_;
    std::unordered_map<std::vector<int>, int, KeyHash> key_ids_;
    std::unordered_map<std::string, int> string_ids_;
};

struct WlOptions {
    bool normalize = false;  // divide by total colour count
};

/// Length D+1: counts of colours 0..D-1, then the OOV count.
Vector embed_wl(const SymbolicState &state, std::span<const AtomId> goal, const GroundedTask &task,
                WlVocabulary &vocab, const WlOptions &options = {});

/// The goal viewed as a state (all goal atoms achieved).
SymbolicState goal_state(std::span<const AtomId> goal);
/// φ(g): the WL embedding of goal_state(g) under g.
Vector embed_wl_goal(const GroundedTask &task, WlVocabulary &vocab, const WlOptions &options = {});

struct LabeledTrajectory {
    const GroundedTask *task;
    const Trajectory *trajectory;
};

/// Every colour of every (s_t, g) pair and of each goal graph, frozen.
WlVocabulary collect_vocabulary(std::span<const LabeledTrajectory> data, int k = 2);

// ---- FSF ----

enum class FsfDomain { Blocksworld, Gripper, Logistics, VisitAll };

FsfDomain fsf_domain_of(const GroundedTask &task);

struct FsfLayout {
    FsfDomain domain = FsfDomain::Blocksworld;
    int N = 0;

    std::size_t width() const { return static_cast<std::size_t>(N) + 1; }
};

inline constexpr double kFsfPadding = -99.0;
inline constexpr double kFsfDontCare = -10.0;

class CapacityExceeded : public Error {
public:
    CapacityExceeded(std::size_t slots, int capacity)
        : Error("capacity exceeded: instance needs " + std::to_string(slots) + " slots, layout has " +
                std::to_string(capacity)),
          slots_(slots), capacity_(capacity) {}

    std::size_t slots() const { return slots_; }
    int capacity() const { return capacity_; }

private:
    std::size_t slots_;
    int capacity_;
};

/// Objects that own a slot, in slot order: blocks; balls and grippers;
/// packages and vehicles; cells.
std::vector<int> fsf_slot_objects(const GroundedTask &task);

/// N = the largest slot count among the given tasks.
FsfLayout make_fsf_layout(std::span<const GroundedTask *const> tasks);

/// (state vector, goal vector), each of length N+1.
std::pair<Vector, Vector> embed_fsf(const SymbolicState &state, std::span<const AtomId> goal,
                                    const GroundedTask &task, const FsfLayout &layout);

// ---- EMB1 ----

/// "EMB1 <rows> <cols>" then one row per line, shortest round-trip decimals.
std::string write_matrix(const Matrix &m);
Matrix read_matrix(std::string_view text);

/// Shortest decimal that parses back to the same double.
std::string format_double(double value);
double parse_double(std::string_view text);

}  // namespace gplan
