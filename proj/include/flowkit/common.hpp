#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace flowkit {

// Thrown when a document cannot be turned into a model: malformed syntax,
// duplicate identifiers, dangling references, broken structural invariants.
// `where` carries whatever position information is available (line/column for
// syntax errors, the offending identifier otherwise).
struct ParseError : std::runtime_error {
    std::string where;
    ParseError(std::string where_, const std::string& what_)
        : std::runtime_error(where_.empty() ? what_ : where_ + ": " + what_),
          where(std::move(where_)) {}
};

// Thrown for defects detected while evaluating expressions or measures:
// unbound references, type mismatches, unit mismatches, cyclic definitions.
struct EvalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Internal consistency failure (a precondition the caller was supposed to
// establish, e.g. running an unvalidated model). Distinct from ParseError so
// callers can tell user mistakes from toolkit bugs.
struct LogicError : std::logic_error {
    using std::logic_error::logic_error;
};

inline std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

}  // namespace flowkit
