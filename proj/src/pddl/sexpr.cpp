#include "sexpr.hpp"

#include "gplan/error.hpp"

#include <cctype>

namespace gplan::detail {
namespace {

class Reader {
public:
    explicit Reader(std::string_view text) : text_(text) {}

    SExpr read_top() {
        skip_space();
        if (at_end())
            throw ParseError("unexpected end of input", line_, column_);
        SExpr expr = read();
        skip_space();
        if (!at_end())
            throw ParseError("trailing text after top-level expression", line_, column_);
        return expr;
    }

private:
    bool at_end() const { return pos_ >= text_.size(); }

    char advance() {
        char c = text_[pos_++];
        if (c == '\n') {
            ++line_;
            column_ = 1;
        } else {
            ++column_;
        }
        return c;
    }

    void skip_space() {
        while (!at_end()) {
            char c = text_[pos_];
            if (c == ';') {
                while (!at_end() && text_[pos_] != '\n')
                    advance();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                break;
            }
        }
    }

    SExpr read() {
        SExpr expr;
        expr.line = line_;
        expr.column = column_;
        char c = text_[pos_];
        if (c == ')')
            throw ParseError("unexpected ')'", line_, column_);
        if (c == '(') {
            advance();
            expr.is_list = true;
            for (;;) {
                skip_space();
                if (at_end())
                    throw ParseError("unterminated list opened", expr.line, expr.column);
                if (text_[pos_] == ')') {
                    advance();
                    break;
                }
                expr.items.push_back(read());
            }
            return expr;
        }
        while (!at_end()) {
            c = text_[pos_];
            if (c == '(' || c == ')' || c == ';' || std::isspace(static_cast<unsigned char>(c)))
                break;
            expr.symbol.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
            advance();
        }
        return expr;
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int column_ = 1;
};

}  // namespace

SExpr parse_sexpr(std::string_view text) { return Reader(text).read_top(); }

}  // namespace gplan::detail
