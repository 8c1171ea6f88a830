#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace gplan::detail {

/// Parenthesised PDDL expression. Symbols are lower-cased.
struct SExpr {
    bool is_list = false;
    std::string symbol;
    std::vector<SExpr> items;
    int line = 1;
    int column = 1;

    bool is_symbol(std::string_view s) const { return !is_list && symbol == s; }
    /// True for a list whose first item is the given symbol.
    bool is_form(std::string_view head) const {
        return is_list && !items.empty() && items.front().is_symbol(head);
    }
};

/// Parses exactly one top-level expression; trailing non-comment text is an error.
SExpr parse_sexpr(std::string_view text);

}  // namespace gplan::detail
