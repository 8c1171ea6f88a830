#pragma once

#include <stdexcept>
#include <string>

namespace gplan {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed PDDL text. Carries the 1-based position of the offending token.
class ParseError : public Error {
public:
    ParseError(const std::string &message, int line, int column)
        : Error(message + " at line " + std::to_string(line) + ", column " +
                std::to_string(column)),
          line_(line), column_(column) {}

    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

/// A requirement flag or language construct outside the STRIPS + typing subset.
class UnsupportedRequirement : public ParseError {
public:
    UnsupportedRequirement(const std::string &keyword, int line, int column)
        : ParseError("unsupported requirement or construct '" + keyword + "'", line, column),
          keyword_(keyword) {}

    const std::string &keyword() const { return keyword_; }

private:
    std::string keyword_;
};

/// Well-formed PDDL that is inconsistent with its domain (undeclared names,
/// arity or type mismatch).
class SemanticError : public Error {
public:
    using Error::Error;
};

class InapplicableAction : public Error {
public:
    using Error::Error;
};

/// Malformed or inconsistent on-disk artifact (trajectory, vocabulary,
/// embedding, model, manifest or config file).
class FormatError : public Error {
public:
    using Error::Error;
};

}  // namespace gplan
