#pragma once

// Lifted PDDL descriptions for the :strips + :typing subset.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gplan {

/// Single-inheritance type tree rooted at the implicit type `object`.
class TypeHierarchy {
public:
    TypeHierarchy();

    /// Declares `name` with the given parent; redeclaring with the same parent
    /// is a no-op. Returns the type index.
    int declare(const std::string &name, const std::string &parent);

    std::optional<int> find(std::string_view name) const;
    const std::string &name(int type) const { return names_[type]; }
    int parent(int type) const { return parents_[type]; }
    std::size_t size() const { return names_.size(); }

    /// True if `type` equals `ancestor` or derives from it.
    bool is_subtype(int type, int ancestor) const;

    static constexpr int kObject = 0;

private:
    std::vector<std::string> names_;
    std::vector<int> parents_;
};

struct TypedName {
    std::string name;
    int type = TypeHierarchy::kObject;
};

struct PredicateSchema {
    std::string name;
    std::vector<int> parameter_types;

    std::size_t arity() const { return parameter_types.size(); }
};

/// Argument of a lifted atom: an action parameter or a domain constant.
struct Term {
    enum class Kind { Parameter, Constant };
    Kind kind = Kind::Parameter;
    int index = 0;  // parameter position, or constant position in the domain
};

struct LiftedAtom {
    int predicate = 0;
    std::vector<Term> args;
};

struct ActionSchema {
    std::string name;
    std::vector<TypedName> parameters;
    std::vector<LiftedAtom> preconditions;
    std::vector<LiftedAtom> add_effects;
    std::vector<LiftedAtom> delete_effects;
};

struct DomainDescription {
    std::string name;
    std::vector<std::string> requirements;
    TypeHierarchy types;
    std::vector<TypedName> constants;
    std::vector<PredicateSchema> predicates;
    std::vector<ActionSchema> actions;

    std::optional<int> find_predicate(std::string_view name) const;
    std::optional<int> find_constant(std::string_view name) const;

    /// True if no action schema adds or deletes atoms of this predicate.
    bool is_static(int predicate) const;
};

/// Ground atom as written in a problem file, resolved to predicate and
/// object indices of its ProblemDescription.
struct AtomLiteral {
    int predicate = 0;
    std::vector<int> args;
};

struct ProblemDescription {
    std::string name;
    std::string domain_name;
    /// Domain constants first (in declaration order), then problem objects.
    std::vector<TypedName> objects;
    std::vector<AtomLiteral> init;
    std::vector<AtomLiteral> goal;

    std::optional<int> find_object(std::string_view name) const;
};

DomainDescription parse_domain(std::string_view text);
ProblemDescription parse_problem(std::string_view text, const DomainDescription &domain);

DomainDescription parse_domain_file(const std::string &path);
ProblemDescription parse_problem_file(const std::string &path, const DomainDescription &domain);

}  // namespace gplan
