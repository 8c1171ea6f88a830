#pragma once

// Grounded STRIPS tasks and the transition function over them.

#include "gplan/pddl.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace gplan {

using AtomId = std::uint32_t;
using ActionId = std::uint32_t;

/// Sorted, duplicate-free list of atom ids. Since atom ids follow the
/// canonical atom order, iteration order is the canonical order.
using AtomSet = std::vector<AtomId>;

struct Object {
    std::string name;
    int type = TypeHierarchy::kObject;
};

struct GroundAtom {
    int predicate = 0;
    std::vector<int> args;  // object indices
};

/// A set of ground atoms. Immutable value type.
class SymbolicState {
public:
    SymbolicState() = default;
    /// Sorts and deduplicates.
    explicit SymbolicState(AtomSet atoms);

    const AtomSet &atoms() const { return atoms_; }
    std::size_t size() const { return atoms_.size(); }
    bool contains(AtomId atom) const;
    bool contains_all(std::span<const AtomId> sorted_atoms) const;

    friend bool operator==(const SymbolicState &, const SymbolicState &) = default;
    friend auto operator<=>(const SymbolicState &, const SymbolicState &) = default;

private:
    AtomSet atoms_;
};

struct StateHash {
    std::size_t operator()(const SymbolicState &state) const noexcept;
};

struct GroundAction {
    int schema = 0;
    std::vector<int> binding;  // object index per schema parameter
    std::string name;          // "(name obj1 ... objk)"
    AtomSet pre;
    AtomSet add;
    AtomSet del;
};

/// Ground task <objects, atoms, actions, s0, g>. Immutable after grounding.
class GroundedTask {
public:
    GroundedTask(std::shared_ptr<const DomainDescription> domain, std::string problem_name,
                 std::vector<Object> objects, std::vector<GroundAtom> atoms,
                 std::vector<GroundAction> actions, SymbolicState initial, AtomSet goal);

    const DomainDescription &domain() const { return *domain_; }
    const std::shared_ptr<const DomainDescription> &domain_ptr() const { return domain_; }
    const std::string &problem_name() const { return problem_name_; }

    const std::vector<Object> &objects() const { return objects_; }
    const std::vector<GroundAtom> &atoms() const { return atoms_; }
    const std::vector<GroundAction> &actions() const { return actions_; }
    const SymbolicState &initial() const { return initial_; }
    const AtomSet &goal() const { return goal_; }

    const std::string &atom_name(AtomId atom) const { return atom_names_[atom]; }
    std::optional<AtomId> find_atom(std::string_view rendered) const;
    std::optional<ActionId> find_action(std::string_view rendered) const;
    std::optional<int> find_object(std::string_view name) const;

    /// Objects of the given type (including subtypes), in canonical order.
    std::vector<int> objects_of_type(std::string_view type) const;

private:
    std::shared_ptr<const DomainDescription> domain_;
    std::string problem_name_;
    std::vector<Object> objects_;
    std::vector<GroundAtom> atoms_;
    std::vector<std::string> atom_names_;
    std::vector<GroundAction> actions_;
    SymbolicState initial_;
    AtomSet goal_;
    std::unordered_map<std::string, AtomId> atom_index_;
    std::unordered_map<std::string, ActionId> action_index_;
    std::unordered_map<std::string, int> object_index_;
};

/// Instantiates every type-consistent action. Actions whose preconditions
/// mention a static atom false in s0, and actions with conflicting effects
/// (add and delete sharing an atom), are excluded. Atoms of static
/// predicates are restricted to those true in s0; all other predicates are
/// grounded over every type-consistent binding. Objects, atoms and actions
/// are in canonical (lexicographic) order.
GroundedTask ground(const DomainDescription &domain, const ProblemDescription &problem);

/// Convenience: parse both texts and ground.
GroundedTask load_task(std::string_view domain_text, std::string_view problem_text);
GroundedTask load_task_files(const std::string &domain_path, const std::string &problem_path);

bool applicable(const SymbolicState &state, const GroundAction &action);

/// (s \ del) u add. Throws InapplicableAction if the preconditions fail.
SymbolicState apply(const SymbolicState &state, const GroundAction &action);

struct Successor {
    ActionId action;
    SymbolicState state;
};

/// Applicable actions in task order paired with their results.
std::vector<Successor> successors(const SymbolicState &state, const GroundedTask &task);

bool goal_satisfied(const SymbolicState &state, std::span<const AtomId> goal);

/// "(pred arg1 ... argk)"
std::string render_atom(const GroundedTask &task, const GroundAtom &atom);
/// Space-separated canonical rendering of a set of atoms.
std::string render_atoms(const GroundedTask &task, std::span<const AtomId> atoms);

/// Diagnostic dump: atoms one per line, then actions with pre/add/del.
std::string dump_task(const GroundedTask &task);

/// Returns a copy of the task whose objects are renamed by `renaming`
/// (old name -> new name); used to test permutation invariance.
GroundedTask rename_objects(const GroundedTask &task,
                            const std::unordered_map<std::string, std::string> &renaming);

/// Maps a state/goal of `from` onto `to` by atom rendering after applying
/// `renaming` to object names.
AtomSet translate_atoms(const GroundedTask &from, const GroundedTask &to,
                        std::span<const AtomId> atoms,
                        const std::unordered_map<std::string, std::string> &renaming);

}  // namespace gplan
