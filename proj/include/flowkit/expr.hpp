#pragma once

// The expression language used by edge guards and action assignments.
//
//   guard  := "else" | expr
//   expr   := or-term  ("or" or-term)*
//   or-term:= and-term ("and" and-term)*
//   and-term := "not" and-term | comparison
//   comparison := sum (("="|"!="|"<"|"<="|">"|">=") sum)?
//   sum    := product (("+"|"-") product)*
//   product:= atom ("*" atom)*
//   atom   := int | string | "true" | "false" | reference | "(" expr ")" | "-" int
//   reference := ident ("." ident)*
//
// References are pure reads. A reference's first segment resolves, in order,
// to: the keyword `payload` (the current token's payload record), an activity
// variable, an input-pin id (inside action assignments), or — as a fallback —
// a field of the current payload. Remaining segments descend into record
// fields. Guards carry no side effects and no function calls, so evaluation
// order is unobservable; `and`/`or` still short-circuit left to right.
//
// `else` is only legal as the entire guard of a decision branch; the path
// compiler rewrites it to the negated disjunction of its sibling guards.

#include <cctype>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "flowkit/common.hpp"
#include "flowkit/value.hpp"

namespace flowkit {

enum class BinOp { Eq, Ne, Lt, Le, Gt, Ge, And, Or, Add, Sub, Mul };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
    enum class Kind { Int, Str, Bool, Ref, Else, Not, Bin };
    Kind kind;

    int64_t intVal = 0;
    std::string strVal;
    bool boolVal = false;
    std::vector<std::string> path;  // Ref
    BinOp op = BinOp::Eq;           // Bin
    ExprPtr lhs, rhs;               // Bin; Not uses lhs only

    static ExprPtr make_int(int64_t v) {
        auto e = std::make_shared<Expr>();
        e->kind = Kind::Int;
        e->intVal = v;
        return e;
    }
    static ExprPtr make_str(std::string v) {
        auto e = std::make_shared<Expr>();
        e->kind = Kind::Str;
        e->strVal = std::move(v);
        return e;
    }
    static ExprPtr make_bool(bool v) {
        auto e = std::make_shared<Expr>();
        e->kind = Kind::Bool;
        e->boolVal = v;
        return e;
    }
    static ExprPtr make_ref(std::vector<std::string> p) {
        auto e = std::make_shared<Expr>();
        e->kind = Kind::Ref;
        e->path = std::move(p);
        return e;
    }
    static ExprPtr make_else() {
        auto e = std::make_shared<Expr>();
        e->kind = Kind::Else;
        return e;
    }
    static ExprPtr make_not(ExprPtr a) {
        auto e = std::make_shared<Expr>();
        e->kind = Kind::Not;
        e->lhs = std::move(a);
        return e;
    }
    static ExprPtr make_bin(BinOp op, ExprPtr a, ExprPtr b) {
        auto e = std::make_shared<Expr>();
        e->kind = Kind::Bin;
        e->op = op;
        e->lhs = std::move(a);
        e->rhs = std::move(b);
        return e;
    }
};

namespace detail {

struct ExprParser {
    const std::string& s;
    size_t pos = 0;
    bool allowElse;

    ExprParser(const std::string& text, bool allowElse_) : s(text), allowElse(allowElse_) {}

    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError("expression \"" + s + "\" offset " + std::to_string(pos), msg);
    }

    void skip_ws() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    char peek() {
        skip_ws();
        return pos < s.size() ? s[pos] : '\0';
    }
    bool at_end() { return peek() == '\0'; }

    bool ident_start(char c) const {
        return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
    }
    bool ident_char(char c) const {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
    }

    // Consumes `word` only when it appears as a whole identifier.
    bool take_word(const char* word) {
        skip_ws();
        size_t n = std::char_traits<char>::length(word);
        if (s.compare(pos, n, word) != 0) return false;
        if (pos + n < s.size() && ident_char(s[pos + n])) return false;
        pos += n;
        return true;
    }
    bool take_sym(const char* sym) {
        skip_ws();
        size_t n = std::char_traits<char>::length(sym);
        if (s.compare(pos, n, sym) != 0) return false;
        pos += n;
        return true;
    }

    std::string ident() {
        skip_ws();
        if (pos >= s.size() || !ident_start(s[pos])) fail("expected identifier");
        size_t start = pos;
        while (pos < s.size() && ident_char(s[pos])) ++pos;
        return s.substr(start, pos - start);
    }

    ExprPtr parse_guard_top() {
        if (allowElse && take_word("else")) {
            if (!at_end()) fail("'else' must be the whole guard");
            return Expr::make_else();
        }
        ExprPtr e = parse_or();
        if (!at_end()) fail("trailing characters");
        return e;
    }

    ExprPtr parse_or() {
        ExprPtr e = parse_and();
        while (take_word("or")) e = Expr::make_bin(BinOp::Or, e, parse_and());
        return e;
    }
    ExprPtr parse_and() {
        ExprPtr e = parse_not();
        while (take_word("and")) e = Expr::make_bin(BinOp::And, e, parse_not());
        return e;
    }
    ExprPtr parse_not() {
        if (take_word("not")) return Expr::make_not(parse_not());
        return parse_cmp();
    }
    ExprPtr parse_cmp() {
        ExprPtr e = parse_sum();
        BinOp op;
        if (take_sym("!=")) op = BinOp::Ne;
        else if (take_sym("<=")) op = BinOp::Le;
        else if (take_sym(">=")) op = BinOp::Ge;
        else if (take_sym("=")) op = BinOp::Eq;
        else if (take_sym("<")) op = BinOp::Lt;
        else if (take_sym(">")) op = BinOp::Gt;
        else return e;
        return Expr::make_bin(op, e, parse_sum());
    }
    ExprPtr parse_sum() {
        ExprPtr e = parse_product();
        for (;;) {
            if (take_sym("+")) e = Expr::make_bin(BinOp::Add, e, parse_product());
            else if (take_sym("-")) e = Expr::make_bin(BinOp::Sub, e, parse_product());
            else return e;
        }
    }
    ExprPtr parse_product() {
        ExprPtr e = parse_atom();
        while (take_sym("*")) e = Expr::make_bin(BinOp::Mul, e, parse_atom());
        return e;
    }

    ExprPtr parse_atom() {
        char c = peek();
        if (c == '(') {
            ++pos;
            ExprPtr e = parse_or();
            if (!take_sym(")")) fail("expected ')'");
            return e;
        }
        if (c == '"') {
            Value v = value_from_text_at(s, pos);
            return Expr::make_str(v.as_string());
        }
        if (c == '-' || std::isdigit(static_cast<unsigned char>(c))) {
            skip_ws();
            size_t start = pos;
            if (s[pos] == '-') ++pos;
            if (pos >= s.size() || !std::isdigit(static_cast<unsigned char>(s[pos])))
                fail("expected number");
            while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
            return Expr::make_int(std::stoll(s.substr(start, pos - start)));
        }
        if (take_word("true")) return Expr::make_bool(true);
        if (take_word("false")) return Expr::make_bool(false);
        if (take_word("else")) fail("'else' must be the whole guard");
        if (take_word("and") || take_word("or") || take_word("not")) fail("misplaced keyword");
        if (ident_start(c)) {
            std::vector<std::string> path;
            path.push_back(ident());
            while (take_sym(".")) path.push_back(ident());
            return Expr::make_ref(std::move(path));
        }
        fail("expected expression");
    }
};

inline int expr_prec(const Expr& e) {
    switch (e.kind) {
        case Expr::Kind::Bin:
            switch (e.op) {
                case BinOp::Or: return 1;
                case BinOp::And: return 2;
                case BinOp::Eq: case BinOp::Ne: case BinOp::Lt:
                case BinOp::Le: case BinOp::Gt: case BinOp::Ge: return 4;
                case BinOp::Add: case BinOp::Sub: return 5;
                case BinOp::Mul: return 6;
            }
            return 7;
        case Expr::Kind::Not: return 3;
        default: return 7;
    }
}

inline void print_expr(const Expr& e, std::string& out, int minPrec) {
    int prec = expr_prec(e);
    bool parens = prec < minPrec;
    if (parens) out += '(';
    switch (e.kind) {
        case Expr::Kind::Int: out += std::to_string(e.intVal); break;
        case Expr::Kind::Str: out += to_text(Value(e.strVal)); break;
        case Expr::Kind::Bool: out += e.boolVal ? "true" : "false"; break;
        case Expr::Kind::Ref: out += join(e.path, "."); break;
        case Expr::Kind::Else: out += "else"; break;
        case Expr::Kind::Not:
            out += "not ";
            print_expr(*e.lhs, out, 4);  // operand of not must bind at least as tight
            break;
        case Expr::Kind::Bin: {
            const char* opText = nullptr;
            switch (e.op) {
                case BinOp::Eq: opText = " = "; break;
                case BinOp::Ne: opText = " != "; break;
                case BinOp::Lt: opText = " < "; break;
                case BinOp::Le: opText = " <= "; break;
                case BinOp::Gt: opText = " > "; break;
                case BinOp::Ge: opText = " >= "; break;
                case BinOp::And: opText = " and "; break;
                case BinOp::Or: opText = " or "; break;
                case BinOp::Add: opText = " + "; break;
                case BinOp::Sub: opText = " - "; break;
                case BinOp::Mul: opText = " * "; break;
            }
            print_expr(*e.lhs, out, prec);
            out += opText;
            print_expr(*e.rhs, out, prec + 1);
            break;
        }
    }
    if (parens) out += ')';
}

}  // namespace detail

// Parses a decision/accept guard; `else` is accepted as the entire text.
inline ExprPtr parse_guard(const std::string& text) {
    detail::ExprParser p(text, /*allowElse=*/true);
    return p.parse_guard_top();
}

// Parses the right-hand side of an assignment (`else` not allowed).
inline ExprPtr parse_expr(const std::string& text) {
    detail::ExprParser p(text, /*allowElse=*/false);
    return p.parse_guard_top();
}

// Parses a dotted reference path such as an assignment target.
inline std::vector<std::string> parse_ref_path(const std::string& text) {
    detail::ExprParser p(text, /*allowElse=*/false);
    std::vector<std::string> path;
    path.push_back(p.ident());
    while (p.take_sym(".")) path.push_back(p.ident());
    if (!p.at_end()) p.fail("trailing characters in reference");
    return path;
}

inline std::string to_text(const Expr& e) {
    std::string out;
    detail::print_expr(e, out, 0);
    return out;
}

inline bool expr_equal(const ExprPtr& a, const ExprPtr& b) {
    if (!a || !b) return !a && !b;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
        case Expr::Kind::Int: return a->intVal == b->intVal;
        case Expr::Kind::Str: return a->strVal == b->strVal;
        case Expr::Kind::Bool: return a->boolVal == b->boolVal;
        case Expr::Kind::Ref: return a->path == b->path;
        case Expr::Kind::Else: return true;
        case Expr::Kind::Not: return expr_equal(a->lhs, b->lhs);
        case Expr::Kind::Bin:
            return a->op == b->op && expr_equal(a->lhs, b->lhs) && expr_equal(a->rhs, b->rhs);
    }
    return false;
}

// Name resolution context for evaluation. Pointers may be null when a source
// is not available (e.g. no payload on a control token).
struct Bindings {
    const Record* vars = nullptr;     // activity variables
    const Value* payload = nullptr;   // current token's payload
    const std::map<std::string, Value>* pinPayloads = nullptr;  // by input-pin id

    std::optional<Value> resolve(const std::vector<std::string>& path) const {
        if (path.empty()) return std::nullopt;
        if (path[0] == "payload") {
            if (!payload) return std::nullopt;
            return lookup_path(*payload, path, 1);
        }
        if (vars) {
            auto it = vars->find(path[0]);
            if (it != vars->end()) return lookup_path(it->second, path, 1);
        }
        if (pinPayloads) {
            auto it = pinPayloads->find(path[0]);
            if (it != pinPayloads->end()) return lookup_path(it->second, path, 1);
        }
        if (payload) {
            return lookup_path(*payload, path, 0);
        }
        return std::nullopt;
    }
};

inline Value eval_expr(const Expr& e, const Bindings& b) {
    switch (e.kind) {
        case Expr::Kind::Int: return Value(e.intVal);
        case Expr::Kind::Str: return Value(e.strVal);
        case Expr::Kind::Bool: return Value(e.boolVal);
        case Expr::Kind::Else:
            throw EvalError("'else' guard evaluated without rewrite");
        case Expr::Kind::Ref: {
            auto v = b.resolve(e.path);
            if (!v) throw EvalError("unbound reference: " + join(e.path, "."));
            return *v;
        }
        case Expr::Kind::Not: {
            Value v = eval_expr(*e.lhs, b);
            if (!v.is_bool()) throw EvalError("'not' needs a bool operand");
            return Value(!v.as_bool());
        }
        case Expr::Kind::Bin: {
            if (e.op == BinOp::And || e.op == BinOp::Or) {
                Value l = eval_expr(*e.lhs, b);
                if (!l.is_bool()) throw EvalError("logical operand must be bool");
                if (e.op == BinOp::And && !l.as_bool()) return Value(false);
                if (e.op == BinOp::Or && l.as_bool()) return Value(true);
                Value r = eval_expr(*e.rhs, b);
                if (!r.is_bool()) throw EvalError("logical operand must be bool");
                return r;
            }
            Value l = eval_expr(*e.lhs, b);
            Value r = eval_expr(*e.rhs, b);
            switch (e.op) {
                case BinOp::Eq:
                case BinOp::Ne: {
                    if (l.data.index() != r.data.index())
                        throw EvalError(std::string("cannot compare ") + l.kind_name() +
                                        " with " + r.kind_name());
                    bool eq = l == r;
                    return Value(e.op == BinOp::Eq ? eq : !eq);
                }
                case BinOp::Lt:
                case BinOp::Le:
                case BinOp::Gt:
                case BinOp::Ge: {
                    int c;
                    if (l.is_int() && r.is_int())
                        c = l.as_int() < r.as_int() ? -1 : (l.as_int() == r.as_int() ? 0 : 1);
                    else if (l.is_string() && r.is_string())
                        c = l.as_string().compare(r.as_string()) < 0
                                ? -1
                                : (l.as_string() == r.as_string() ? 0 : 1);
                    else
                        throw EvalError(std::string("cannot order ") + l.kind_name() + " with " +
                                        r.kind_name());
                    switch (e.op) {
                        case BinOp::Lt: return Value(c < 0);
                        case BinOp::Le: return Value(c <= 0);
                        case BinOp::Gt: return Value(c > 0);
                        default: return Value(c >= 0);
                    }
                }
                case BinOp::Add:
                case BinOp::Sub:
                case BinOp::Mul: {
                    if (!l.is_int() || !r.is_int())
                        throw EvalError("arithmetic needs int operands");
                    int64_t a = l.as_int(), c = r.as_int();
                    switch (e.op) {
                        case BinOp::Add: return Value(a + c);
                        case BinOp::Sub: return Value(a - c);
                        default: return Value(a * c);
                    }
                }
                default: break;
            }
            throw LogicError("unhandled operator");
        }
    }
    throw LogicError("unhandled expression kind");
}

inline bool eval_condition(const Expr& e, const Bindings& b) {
    Value v = eval_expr(e, b);
    if (!v.is_bool()) throw EvalError("condition did not evaluate to bool: " + to_text(e));
    return v.as_bool();
}

// All reference paths appearing in an expression, left to right.
inline void collect_refs(const ExprPtr& e, std::vector<std::vector<std::string>>& out) {
    if (!e) return;
    if (e->kind == Expr::Kind::Ref) out.push_back(e->path);
    collect_refs(e->lhs, out);
    collect_refs(e->rhs, out);
}

inline std::vector<std::vector<std::string>> collect_refs(const ExprPtr& e) {
    std::vector<std::vector<std::string>> out;
    collect_refs(e, out);
    return out;
}

}  // namespace flowkit
