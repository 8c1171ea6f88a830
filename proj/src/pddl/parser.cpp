#include "gplan/pddl.hpp"

#include "gplan/error.hpp"
#include "sexpr.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>

namespace gplan {

using detail::SExpr;

TypeHierarchy::TypeHierarchy() {
    names_.push_back("object");
    parents_.push_back(kObject);
}

int TypeHierarchy::declare(const std::string &name, const std::string &parent) {
    int parent_index = kObject;
    if (auto p = find(parent)) {
        parent_index = *p;
    } else {
        parent_index = declare(parent, "object");
    }
    if (auto existing = find(name)) {
        if (*existing != kObject && parents_[*existing] == kObject)
            parents_[*existing] = parent_index;
        return *existing;
    }
    names_.push_back(name);
    parents_.push_back(parent_index);
    return static_cast<int>(names_.size()) - 1;
}

std::optional<int> TypeHierarchy::find(std::string_view name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end())
        return std::nullopt;
    return static_cast<int>(it - names_.begin());
}

bool TypeHierarchy::is_subtype(int type, int ancestor) const {
    for (std::size_t guard = 0; guard <= names_.size(); ++guard) {
        if (type == ancestor)
            return true;
        if (type == kObject)
            return false;
        type = parents_[type];
    }
    return false;  // cyclic declaration
}

std::optional<int> DomainDescription::find_predicate(std::string_view name) const {
    for (std::size_t i = 0; i < predicates.size(); ++i)
        if (predicates[i].name == name)
            return static_cast<int>(i);
    return std::nullopt;
}

std::optional<int> DomainDescription::find_constant(std::string_view name) const {
    for (std::size_t i = 0; i < constants.size(); ++i)
        if (constants[i].name == name)
            return static_cast<int>(i);
    return std::nullopt;
}

bool DomainDescription::is_static(int predicate) const {
    for (const auto &action : actions) {
        for (const auto &atom : action.add_effects)
            if (atom.predicate == predicate)
                return false;
        for (const auto &atom : action.delete_effects)
            if (atom.predicate == predicate)
                return false;
    }
    return true;
}

std::optional<int> ProblemDescription::find_object(std::string_view name) const {
    for (std::size_t i = 0; i < objects.size(); ++i)
        if (objects[i].name == name)
            return static_cast<int>(i);
    return std::nullopt;
}

namespace {

constexpr std::array kSupportedRequirements = {":strips", ":typing"};
constexpr std::array kUnsupportedConnectives = {"not", "or", "imply", "forall", "exists",
                                                "when", "=", "increase", "decrease",
                                                "assign", "scale-up", "scale-down"};

[[noreturn]] void fail(const SExpr &at, const std::string &message) {
    throw ParseError(message, at.line, at.column);
}

const SExpr &expect_list(const SExpr &e, const char *what) {
    if (!e.is_list)
        fail(e, std::string("expected ") + what);
    return e;
}

const std::string &expect_symbol(const SExpr &e, const char *what) {
    if (e.is_list)
        fail(e, std::string("expected ") + what);
    return e.symbol;
}

bool is_unsupported_connective(const std::string &s) {
    return std::find(kUnsupportedConnectives.begin(), kUnsupportedConnectives.end(), s) !=
           kUnsupportedConnectives.end();
}

void check_requirements(const SExpr &section, std::vector<std::string> &out) {
    for (std::size_t i = 1; i < section.items.size(); ++i) {
        const std::string &req = expect_symbol(section.items[i], "requirement keyword");
        if (std::find(kSupportedRequirements.begin(), kSupportedRequirements.end(), req) ==
            kSupportedRequirements.end())
            throw UnsupportedRequirement(req, section.items[i].line, section.items[i].column);
        out.push_back(req);
    }
}

/// "a b - t c" -> [(a,t),(b,t),(c,object)]. Type names are returned unresolved.
std::vector<std::pair<std::string, std::string>> typed_list(const SExpr &list,
                                                            std::size_t first) {
    std::vector<std::pair<std::string, std::string>> out;
    std::vector<std::string> pending;
    for (std::size_t i = first; i < list.items.size(); ++i) {
        const SExpr &item = list.items[i];
        if (item.is_list)
            fail(item, "unexpected list in typed list");
        if (item.symbol == "-") {
            if (i + 1 >= list.items.size())
                fail(item, "missing type after '-'");
            const SExpr &type = list.items[++i];
            if (type.is_list) {
                if (type.is_form("either"))
                    throw UnsupportedRequirement("either", type.line, type.column);
                fail(type, "expected type name");
            }
            if (pending.empty())
                fail(item, "type annotation without names");
            for (auto &name : pending)
                out.emplace_back(std::move(name), type.symbol);
            pending.clear();
        } else {
            pending.push_back(item.symbol);
        }
    }
    for (auto &name : pending)
        out.emplace_back(std::move(name), "object");
    return out;
}

int resolve_type(const TypeHierarchy &types, const std::string &name, const SExpr &at) {
    auto t = types.find(name);
    if (!t)
        throw SemanticError("undeclared type '" + name + "' at line " + std::to_string(at.line));
    return *t;
}

class DomainParser {
public:
    explicit DomainParser(DomainDescription &domain) : d_(domain) {}

    void parse(const SExpr &root) {
        if (!root.is_form("define"))
            fail(root, "expected (define ...)");
        if (root.items.size() < 2 || !root.items[1].is_form("domain") ||
            root.items[1].items.size() != 2)
            fail(root, "expected (domain <name>)");
        d_.name = expect_symbol(root.items[1].items[1], "domain name");

        // Types must be known before constants/predicates regardless of order.
        for (std::size_t i = 2; i < root.items.size(); ++i) {
            const SExpr &section = expect_list(root.items[i], "domain section");
            if (section.items.empty())
                fail(section, "empty section");
            const std::string &key = expect_symbol(section.items[0], "section keyword");
            if (key == ":requirements")
                check_requirements(section, d_.requirements);
            else if (key == ":types")
                for (auto &[name, parent] : typed_list(section, 1))
                    d_.types.declare(name, parent);
        }
        for (std::size_t i = 2; i < root.items.size(); ++i) {
            const SExpr &section = root.items[i];
            const std::string &key = section.items[0].symbol;
            if (key == ":requirements" || key == ":types")
                continue;
            if (key == ":constants") {
                for (auto &[name, type] : typed_list(section, 1))
                    d_.constants.push_back({name, resolve_type(d_.types, type, section)});
            } else if (key == ":predicates") {
                parse_predicates(section);
            } else if (key == ":action") {
                actions_.push_back(&section);
            } else {
                throw UnsupportedRequirement(key, section.line, section.column);
            }
        }
        for (const SExpr *action : actions_)
            parse_action(*action);
    }

private:
    void parse_predicates(const SExpr &section) {
        for (std::size_t i = 1; i < section.items.size(); ++i) {
            const SExpr &decl = expect_list(section.items[i], "predicate declaration");
            if (decl.items.empty())
                fail(decl, "empty predicate declaration");
            PredicateSchema schema;
            schema.name = expect_symbol(decl.items[0], "predicate name");
            if (d_.find_predicate(schema.name))
                fail(decl, "duplicate predicate '" + schema.name + "'");
            for (auto &[var, type] : typed_list(decl, 1)) {
                if (var.empty() || var[0] != '?')
                    fail(decl, "predicate parameter must be a variable");
                schema.parameter_types.push_back(resolve_type(d_.types, type, decl));
            }
            d_.predicates.push_back(std::move(schema));
        }
    }

    void parse_action(const SExpr &section) {
        if (section.items.size() < 2)
            fail(section, "missing action name");
        ActionSchema action;
        action.name = expect_symbol(section.items[1], "action name");
        for (const auto &other : d_.actions)
            if (other.name == action.name)
                fail(section, "duplicate action '" + action.name + "'");
        const SExpr *pre = nullptr;
        const SExpr *eff = nullptr;
        for (std::size_t i = 2; i < section.items.size(); i += 2) {
            const std::string &key = expect_symbol(section.items[i], "action keyword");
            if (i + 1 >= section.items.size())
                fail(section.items[i], "missing value for " + key);
            const SExpr &value = section.items[i + 1];
            if (key == ":parameters") {
                expect_list(value, "parameter list");
                for (auto &[var, type] : typed_list(value, 0)) {
                    if (var.empty() || var[0] != '?')
                        fail(value, "action parameter must be a variable");
                    action.parameters.push_back({var, resolve_type(d_.types, type, value)});
                }
            } else if (key == ":precondition") {
                pre = &value;
            } else if (key == ":effect") {
                eff = &value;
            } else {
                throw UnsupportedRequirement(key, section.items[i].line, section.items[i].column);
            }
        }
        if (pre)
            parse_condition(*pre, action, action.preconditions);
        if (eff)
            parse_effect(*eff, action);
        d_.actions.push_back(std::move(action));
    }

    LiftedAtom parse_atom(const SExpr &e, const ActionSchema &action) {
        expect_list(e, "atom");
        if (e.items.empty())
            fail(e, "empty atom");
        const std::string &pred = expect_symbol(e.items[0], "predicate name");
        if (is_unsupported_connective(pred))
            throw UnsupportedRequirement(pred, e.line, e.column);
        auto p = d_.find_predicate(pred);
        if (!p)
            throw SemanticError("undeclared predicate '" + pred + "' at line " +
                                std::to_string(e.line));
        const PredicateSchema &schema = d_.predicates[*p];
        if (e.items.size() - 1 != schema.arity())
            throw SemanticError("arity mismatch for '" + pred + "' at line " +
                                std::to_string(e.line));
        LiftedAtom atom;
        atom.predicate = *p;
        for (std::size_t i = 1; i < e.items.size(); ++i) {
            const std::string &arg = expect_symbol(e.items[i], "term");
            Term term;
            int arg_type = TypeHierarchy::kObject;
            if (!arg.empty() && arg[0] == '?') {
                auto it = std::find_if(action.parameters.begin(), action.parameters.end(),
                                       [&](const TypedName &t) { return t.name == arg; });
                if (it == action.parameters.end())
                    throw SemanticError("unbound variable '" + arg + "' in action '" +
                                        action.name + "'");
                term = {Term::Kind::Parameter, static_cast<int>(it - action.parameters.begin())};
                arg_type = it->type;
            } else {
                auto c = d_.find_constant(arg);
                if (!c)
                    throw SemanticError("undeclared constant '" + arg + "' in action '" +
                                        action.name + "'");
                term = {Term::Kind::Constant, *c};
                arg_type = d_.constants[*c].type;
            }
            int expected = schema.parameter_types[i - 1];
            if (!d_.types.is_subtype(arg_type, expected) && !d_.types.is_subtype(expected, arg_type))
                throw SemanticError("type mismatch for argument " + std::to_string(i) + " of '" +
                                    pred + "' in action '" + action.name + "'");
            atom.args.push_back(term);
        }
        return atom;
    }

    void parse_condition(const SExpr &e, const ActionSchema &action, std::vector<LiftedAtom> &out) {
        expect_list(e, "condition");
        if (e.items.empty())
            return;
        if (e.is_form("and")) {
            for (std::size_t i = 1; i < e.items.size(); ++i) {
                const SExpr &c = e.items[i];
                if (c.is_form("and"))
                    parse_condition(c, action, out);
                else
                    out.push_back(parse_atom(c, action));
            }
            return;
        }
        out.push_back(parse_atom(e, action));
    }

    void parse_effect(const SExpr &e, ActionSchema &action) {
        expect_list(e, "effect");
        if (e.items.empty())
            return;
        if (e.is_form("and")) {
            for (std::size_t i = 1; i < e.items.size(); ++i)
                parse_effect(e.items[i], action);
            return;
        }
        if (e.is_form("not")) {
            if (e.items.size() != 2)
                fail(e, "malformed negative effect");
            action.delete_effects.push_back(parse_atom(e.items[1], action));
            return;
        }
        action.add_effects.push_back(parse_atom(e, action));
    }

    DomainDescription &d_;
    std::vector<const SExpr *> actions_;
};

std::vector<AtomLiteral> ground_literals(const SExpr &e, const DomainDescription &domain,
                                         const ProblemDescription &problem, bool allow_and) {
    std::vector<AtomLiteral> out;
    expect_list(e, "atom");
    if (e.items.empty())
        return out;
    if (allow_and && e.is_form("and")) {
        for (std::size_t i = 1; i < e.items.size(); ++i) {
            auto inner = ground_literals(e.items[i], domain, problem, true);
            out.insert(out.end(), inner.begin(), inner.end());
        }
        return out;
    }
    const std::string &pred = expect_symbol(e.items[0], "predicate name");
    if (is_unsupported_connective(pred))
        throw UnsupportedRequirement(pred, e.line, e.column);
    auto p = domain.find_predicate(pred);
    if (!p)
        throw SemanticError("undeclared predicate '" + pred + "' at line " +
                            std::to_string(e.line));
    const PredicateSchema &schema = domain.predicates[*p];
    if (e.items.size() - 1 != schema.arity())
        throw SemanticError("arity mismatch for '" + pred + "' at line " + std::to_string(e.line));
    AtomLiteral atom;
    atom.predicate = *p;
    for (std::size_t i = 1; i < e.items.size(); ++i) {
        const std::string &name = expect_symbol(e.items[i], "object name");
        auto o = problem.find_object(name);
        if (!o)
            throw SemanticError("undeclared object '" + name + "' at line " +
                                std::to_string(e.items[i].line));
        if (!domain.types.is_subtype(problem.objects[*o].type, schema.parameter_types[i - 1]))
            throw SemanticError("object '" + name + "' has wrong type for argument " +
                                std::to_string(i) + " of '" + pred + "'");
        atom.args.push_back(*o);
    }
    out.push_back(std::move(atom));
    return out;
}

std::string read_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

DomainDescription parse_domain(std::string_view text) {
    SExpr root = detail::parse_sexpr(text);
    DomainDescription domain;
    DomainParser(domain).parse(root);
    return domain;
}

ProblemDescription parse_problem(std::string_view text, const DomainDescription &domain) {
    SExpr root = detail::parse_sexpr(text);
    if (!root.is_form("define"))
        fail(root, "expected (define ...)");
    if (root.items.size() < 2 || !root.items[1].is_form("problem") ||
        root.items[1].items.size() != 2)
        fail(root, "expected (problem <name>)");

    ProblemDescription problem;
    problem.name = expect_symbol(root.items[1].items[1], "problem name");
    problem.objects = domain.constants;

    const SExpr *init = nullptr;
    const SExpr *goal = nullptr;
    for (std::size_t i = 2; i < root.items.size(); ++i) {
        const SExpr &section = expect_list(root.items[i], "problem section");
        if (section.items.empty())
            fail(section, "empty section");
        const std::string &key = expect_symbol(section.items[0], "section keyword");
        if (key == ":domain") {
            if (section.items.size() != 2)
                fail(section, "expected (:domain <name>)");
            problem.domain_name = expect_symbol(section.items[1], "domain name");
            if (problem.domain_name != domain.name)
                throw SemanticError("problem '" + problem.name + "' is for domain '" +
                                    problem.domain_name + "', not '" + domain.name + "'");
        } else if (key == ":requirements") {
            std::vector<std::string> ignored;
            check_requirements(section, ignored);
        } else if (key == ":objects") {
            for (auto &[name, type] : typed_list(section, 1)) {
                if (problem.find_object(name))
                    fail(section, "duplicate object '" + name + "'");
                problem.objects.push_back({name, resolve_type(domain.types, type, section)});
            }
        } else if (key == ":init") {
            init = &section;
        } else if (key == ":goal") {
            if (section.items.size() != 2)
                fail(section, "expected (:goal <condition>)");
            goal = &section.items[1];
        } else {
            throw UnsupportedRequirement(key, section.line, section.column);
        }
    }
    if (init) {
        for (std::size_t i = 1; i < init->items.size(); ++i) {
            auto atoms = ground_literals(init->items[i], domain, problem, false);
            problem.init.insert(problem.init.end(), atoms.begin(), atoms.end());
        }
    }
    if (goal)
        problem.goal = ground_literals(*goal, domain, problem, true);
    return problem;
}

DomainDescription parse_domain_file(const std::string &path) {
    return parse_domain(read_file(path));
}

ProblemDescription parse_problem_file(const std::string &path, const DomainDescription &domain) {
    return parse_problem(read_file(path), domain);
}

}  // namespace gplan
