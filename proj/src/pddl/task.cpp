#include "gplan/task.hpp"

#include "gplan/error.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace gplan {

SymbolicState::SymbolicState(AtomSet atoms) : atoms_(std::move(atoms)) {
    std::sort(atoms_.begin(), atoms_.end());
    atoms_.erase(std::unique(atoms_.begin(), atoms_.end()), atoms_.end());
}

bool SymbolicState::contains(AtomId atom) const {
    return std::binary_search(atoms_.begin(), atoms_.end(), atom);
}

bool SymbolicState::contains_all(std::span<const AtomId> sorted_atoms) const {
    return std::includes(atoms_.begin(), atoms_.end(), sorted_atoms.begin(), sorted_atoms.end());
}

std::size_t StateHash::operator()(const SymbolicState &state) const noexcept {
    // FNV-1a over the atom ids.
    std::uint64_t h = 1469598103934665603ull;
    for (AtomId a : state.atoms()) {
        h ^= a;
        h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
}

GroundedTask::GroundedTask(std::shared_ptr<const DomainDescription> domain,
                           std::string problem_name, std::vector<Object> objects,
                           std::vector<GroundAtom> atoms, std::vector<GroundAction> actions,
                           SymbolicState initial, AtomSet goal)
    : domain_(std::move(domain)), problem_name_(std::move(problem_name)),
      objects_(std::move(objects)), atoms_(std::move(atoms)), actions_(std::move(actions)),
      initial_(std::move(initial)), goal_(std::move(goal)) {
    atom_names_.reserve(atoms_.size());
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
        atom_names_.push_back(render_atom(*this, atoms_[i]));
        atom_index_.emplace(atom_names_.back(), static_cast<AtomId>(i));
    }
    for (std::size_t i = 0; i < actions_.size(); ++i)
        action_index_.emplace(actions_[i].name, static_cast<ActionId>(i));
    for (std::size_t i = 0; i < objects_.size(); ++i)
        object_index_.emplace(objects_[i].name, static_cast<int>(i));
}

std::optional<AtomId> GroundedTask::find_atom(std::string_view rendered) const {
    auto it = atom_index_.find(std::string(rendered));
    if (it == atom_index_.end())
        return std::nullopt;
    return it->second;
}

std::optional<ActionId> GroundedTask::find_action(std::string_view rendered) const {
    auto it = action_index_.find(std::string(rendered));
    if (it == action_index_.end())
        return std::nullopt;
    return it->second;
}

std::optional<int> GroundedTask::find_object(std::string_view name) const {
    auto it = object_index_.find(std::string(name));
    if (it == object_index_.end())
        return std::nullopt;
    return it->second;
}

std::vector<int> GroundedTask::objects_of_type(std::string_view type) const {
    std::vector<int> out;
    auto t = domain_->types.find(type);
    if (!t)
        return out;
    for (std::size_t i = 0; i < objects_.size(); ++i)
        if (domain_->types.is_subtype(objects_[i].type, *t))
            out.push_back(static_cast<int>(i));
    return out;
}

namespace {

std::string render(const std::string &head, const std::vector<int> &args,
                   const std::vector<Object> &objects) {
    std::string s = "(" + head;
    for (int a : args) {
        s += ' ';
        s += objects[a].name;
    }
    s += ')';
    return s;
}

class Grounder {
public:
    Grounder(const DomainDescription &domain, const ProblemDescription &problem)
        : domain_(domain), problem_(problem) {}

    GroundedTask run() {
        order_objects();
        collect_atoms();
        ground_actions();
        AtomSet initial;
        for (const auto &lit : problem_.init)
            initial.push_back(atom_id(lit.predicate, remap(lit.args)));
        AtomSet goal;
        for (const auto &lit : problem_.goal)
            goal.push_back(atom_id(lit.predicate, remap(lit.args)));
        std::sort(goal.begin(), goal.end());
        goal.erase(std::unique(goal.begin(), goal.end()), goal.end());
        return GroundedTask(std::make_shared<DomainDescription>(domain_), problem_.name,
                            std::move(objects_), std::move(atoms_), std::move(actions_),
                            SymbolicState(std::move(initial)), std::move(goal));
    }

private:
    void order_objects() {
        std::vector<int> order(problem_.objects.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            return problem_.objects[a].name < problem_.objects[b].name;
        });
        object_map_.assign(order.size(), 0);
        for (std::size_t i = 0; i < order.size(); ++i) {
            object_map_[order[i]] = static_cast<int>(i);
            objects_.push_back({problem_.objects[order[i]].name, problem_.objects[order[i]].type});
        }
        for (std::size_t t = 0; t < domain_.types.size(); ++t) {
            std::vector<int> members;
            for (std::size_t o = 0; o < objects_.size(); ++o)
                if (domain_.types.is_subtype(objects_[o].type, static_cast<int>(t)))
                    members.push_back(static_cast<int>(o));
            objects_by_type_.push_back(std::move(members));
        }
    }

    std::vector<int> remap(const std::vector<int> &problem_args) const {
        std::vector<int> out;
        out.reserve(problem_args.size());
        for (int a : problem_args)
            out.push_back(object_map_[a]);
        return out;
    }

    void collect_atoms() {
        // Rendered atom -> GroundAtom, ordered canonically by the map.
        std::map<std::string, GroundAtom> atoms;
        auto add = [&](int predicate, std::vector<int> args) {
            std::string key = render(domain_.predicates[predicate].name, args, objects_);
            atoms.emplace(std::move(key), GroundAtom{predicate, std::move(args)});
        };
        for (std::size_t p = 0; p < domain_.predicates.size(); ++p) {
            bool is_static = domain_.is_static(static_cast<int>(p));
            static_.push_back(is_static);
            if (is_static)
                continue;
            const auto &types = domain_.predicates[p].parameter_types;
            std::vector<int> args(types.size());
            enumerate(types, 0, args, [&](const std::vector<int> &a) { add(static_cast<int>(p), a); });
        }
        for (const auto &lit : problem_.init)
            add(lit.predicate, remap(lit.args));
        for (const auto &lit : problem_.goal)
            add(lit.predicate, remap(lit.args));
        for (auto &[name, atom] : atoms) {
            index_.emplace(name, static_cast<AtomId>(atoms_.size()));
            atoms_.push_back(std::move(atom));
        }
        for (const auto &lit : problem_.init)
            if (static_[lit.predicate])
                static_true_.insert(atom_id(lit.predicate, remap(lit.args)));
    }

    template <typename F>
    void enumerate(const std::vector<int> &types, std::size_t i, std::vector<int> &args, F &&f) {
        if (i == types.size()) {
            f(args);
            return;
        }
        for (int o : objects_by_type_[types[i]]) {
            args[i] = o;
            enumerate(types, i + 1, args, f);
        }
    }

    std::optional<AtomId> find_atom(int predicate, const std::vector<int> &args) const {
        auto it = index_.find(render(domain_.predicates[predicate].name, args, objects_));
        if (it == index_.end())
            return std::nullopt;
        return it->second;
    }

    AtomId atom_id(int predicate, const std::vector<int> &args) const {
        auto id = find_atom(predicate, args);
        if (!id)
            throw SemanticError("atom " + render(domain_.predicates[predicate].name, args, objects_) +
                                " is not in the grounded atom set");
        return *id;
    }

    std::vector<int> substitute(const LiftedAtom &atom, const std::vector<int> &binding) const {
        std::vector<int> args;
        args.reserve(atom.args.size());
        for (const Term &t : atom.args) {
            if (t.kind == Term::Kind::Parameter) {
                args.push_back(binding[t.index]);
            } else {
                auto o = problem_.find_object(domain_.constants[t.index].name);
                args.push_back(object_map_[*o]);
            }
        }
        return args;
    }

    /// Returns false when an atom is outside the grounded atom set or has
    /// argument types that do not fit the predicate.
    bool materialize(const std::vector<LiftedAtom> &lifted, const std::vector<int> &binding,
                     AtomSet &out) const {
        for (const LiftedAtom &atom : lifted) {
            auto args = substitute(atom, binding);
            auto id = find_atom(atom.predicate, args);
            if (!id)
                return false;
            out.push_back(*id);
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return true;
    }

    void ground_actions() {
        std::vector<GroundAction> actions;
        for (std::size_t s = 0; s < domain_.actions.size(); ++s) {
            const ActionSchema &schema = domain_.actions[s];
            std::vector<int> types;
            for (const auto &p : schema.parameters)
                types.push_back(p.type);
            std::vector<int> binding(types.size());
            enumerate(types, 0, binding, [&](const std::vector<int> &b) {
                GroundAction action;
                action.schema = static_cast<int>(s);
                action.binding = b;
                if (!materialize(schema.preconditions, b, action.pre))
                    return;
                for (AtomId a : action.pre)
                    if (static_[atoms_[a].predicate] && !static_true_.count(a))
                        return;
                if (!materialize(schema.add_effects, b, action.add) ||
                    !materialize(schema.delete_effects, b, action.del))
                    return;
                AtomSet common;
                std::set_intersection(action.add.begin(), action.add.end(), action.del.begin(),
                                      action.del.end(), std::back_inserter(common));
                if (!common.empty())
                    return;
                action.name = render(schema.name, b, objects_);
                actions.push_back(std::move(action));
            });
        }
        std::sort(actions.begin(), actions.end(),
                  [](const GroundAction &a, const GroundAction &b) { return a.name < b.name; });
        actions_ = std::move(actions);
    }

    const DomainDescription &domain_;
    const ProblemDescription &problem_;
    std::vector<int> object_map_;
    std::vector<Object> objects_;
    std::vector<std::vector<int>> objects_by_type_;
    std::vector<GroundAtom> atoms_;
    std::map<std::string, AtomId> index_;
    std::vector<bool> static_;
    std::set<AtomId> static_true_;
    std::vector<GroundAction> actions_;
};

std::string read_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

GroundedTask ground(const DomainDescription &domain, const ProblemDescription &problem) {
    return Grounder(domain, problem).run();
}

GroundedTask load_task(std::string_view domain_text, std::string_view problem_text) {
    DomainDescription domain = parse_domain(domain_text);
    ProblemDescription problem = parse_problem(problem_text, domain);
    return ground(domain, problem);
}

GroundedTask load_task_files(const std::string &domain_path, const std::string &problem_path) {
    return load_task(read_file(domain_path), read_file(problem_path));
}

bool applicable(const SymbolicState &state, const GroundAction &action) {
    return state.contains_all(action.pre);
}

SymbolicState apply(const SymbolicState &state, const GroundAction &action) {
    if (!applicable(state, action))
        throw InapplicableAction("action " + action.name + " is not applicable");
    AtomSet kept;
    kept.reserve(state.size());
    std::set_difference(state.atoms().begin(), state.atoms().end(), action.del.begin(),
                        action.del.end(), std::back_inserter(kept));
    AtomSet result;
    result.reserve(kept.size() + action.add.size());
    std::set_union(kept.begin(), kept.end(), action.add.begin(), action.add.end(),
                   std::back_inserter(result));
    return SymbolicState(std::move(result));
}

std::vector<Successor> successors(const SymbolicState &state, const GroundedTask &task) {
    std::vector<Successor> out;
    const auto &actions = task.actions();
    for (std::size_t i = 0; i < actions.size(); ++i)
        if (applicable(state, actions[i]))
            out.push_back({static_cast<ActionId>(i), apply(state, actions[i])});
    return out;
}

bool goal_satisfied(const SymbolicState &state, std::span<const AtomId> goal) {
    return state.contains_all(goal);
}

std::string render_atom(const GroundedTask &task, const GroundAtom &atom) {
    return render(task.domain().predicates[atom.predicate].name, atom.args, task.objects());
}

std::string render_atoms(const GroundedTask &task, std::span<const AtomId> atoms) {
    std::string out;
    for (AtomId a : atoms) {
        if (!out.empty())
            out += ' ';
        out += task.atom_name(a);
    }
    return out;
}

std::string dump_task(const GroundedTask &task) {
    std::ostringstream out;
    out << "; task " << task.problem_name() << " of domain " << task.domain().name << "\n";
    out << "atoms " << task.atoms().size() << "\n";
    for (std::size_t i = 0; i < task.atoms().size(); ++i)
        out << task.atom_name(static_cast<AtomId>(i)) << "\n";
    out << "actions " << task.actions().size() << "\n";
    for (const auto &a : task.actions()) {
        out << a.name << " pre: " << render_atoms(task, a.pre) << " add: " << render_atoms(task, a.add)
            << " del: " << render_atoms(task, a.del) << "\n";
    }
    out << "init: " << render_atoms(task, task.initial().atoms()) << "\n";
    out << "goal: " << render_atoms(task, task.goal()) << "\n";
    return out.str();
}

GroundedTask rename_objects(const GroundedTask &task,
                            const std::unordered_map<std::string, std::string> &renaming) {
    auto new_name = [&](const std::string &n) {
        auto it = renaming.find(n);
        return it == renaming.end() ? n : it->second;
    };
    ProblemDescription problem;
    problem.name = task.problem_name();
    problem.domain_name = task.domain().name;
    for (const auto &o : task.objects())
        problem.objects.push_back({new_name(o.name), o.type});
    for (AtomId a : task.initial().atoms())
        problem.init.push_back({task.atoms()[a].predicate, task.atoms()[a].args});
    for (AtomId a : task.goal())
        problem.goal.push_back({task.atoms()[a].predicate, task.atoms()[a].args});
    return ground(task.domain(), problem);
}

AtomSet translate_atoms(const GroundedTask &from, const GroundedTask &to,
                        std::span<const AtomId> atoms,
                        const std::unordered_map<std::string, std::string> &renaming) {
    AtomSet out;
    for (AtomId a : atoms) {
        const GroundAtom &atom = from.atoms()[a];
        std::string s = "(" + from.domain().predicates[atom.predicate].name;
        for (int o : atom.args) {
            const std::string &n = from.objects()[o].name;
            auto it = renaming.find(n);
            s += ' ';
            s += it == renaming.end() ? n : it->second;
        }
        s += ')';
        auto id = to.find_atom(s);
        if (!id)
            throw SemanticError("atom " + s + " does not exist in the target task");
        out.push_back(*id);
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace gplan
