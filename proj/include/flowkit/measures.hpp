#pragma once

// Process measures: declaration grammar, implicit defaults, and evaluation
// over execution event logs.
//
// Declaration text:   Name[=expr], Unit        e.g.  Cost=2*hour, EUR
//
//   expr    := factor ("*" factor)*            infix * is normalized to Mult
//   factor  := rational | name | call
//   call    := Minus(expr, expr) | Mult(expr, expr)
//            | Sum(name) | Avg(name) | Min(name) | Max(name)
//   rational:= 12 | 3/4 | 2.5
//
// A declaration without "=expr" publishes the built-in probe of that name
// under the declared unit. Probes: Start, Finish, ProcessingTime,
// ExecutionCount. Every activity and action also gets implicit declarations
// Start, Finish and TotalTime=Minus(Finish, Start) unless the user supplies
// their own, and Cost=Mult(ProcessingTime, DeclaredCostRate) when a
// DeclaredCostRate is declared but no Cost.
//
// Values are exact rationals. A missing input (e.g. Finish of an execution
// that never completed) makes the result absent, not zero; Sum skips absent
// children and is 0 over an empty set, while Avg/Min/Max over an empty set
// are an error. Minus requires matching units; Mult applies the rate rule
// (X times Y/X gives Y). The declared unit, when present, wins over the
// computed one.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "flowkit/common.hpp"
#include "flowkit/model.hpp"
#include "flowkit/trace.hpp"

namespace flowkit::measures {

struct Rational {
    int64_t num = 0;
    int64_t den = 1;

    Rational() = default;
    Rational(int64_t n, int64_t d = 1) : num(n), den(d) { normalize(); }

    void normalize() {
        if (den == 0) throw EvalError("rational with zero denominator");
        if (den < 0) {
            num = -num;
            den = -den;
        }
        int64_t g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) {
            num /= g;
            den /= g;
        }
    }

    Rational operator+(const Rational& o) const {
        return Rational(num * o.den + o.num * den, den * o.den);
    }
    Rational operator-(const Rational& o) const {
        return Rational(num * o.den - o.num * den, den * o.den);
    }
    Rational operator*(const Rational& o) const { return Rational(num * o.num, den * o.den); }
    Rational operator/(const Rational& o) const {
        if (o.num == 0) throw EvalError("division by zero");
        return Rational(num * o.den, den * o.num);
    }
    bool operator==(const Rational& o) const { return num == o.num && den == o.den; }
    bool operator!=(const Rational& o) const { return !(*this == o); }
    bool operator<(const Rational& o) const { return num * o.den < o.num * den; }
    bool operator<=(const Rational& o) const { return num * o.den <= o.num * den; }
};

inline std::string to_text(const Rational& r) {
    if (r.den == 1) return std::to_string(r.num);
    return std::to_string(r.num) + "/" + std::to_string(r.den);
}

enum class AggFn { Sum, Avg, Min, Max };

struct MExpr;
using MExprPtr = std::shared_ptr<const MExpr>;

struct MExpr {
    enum class Kind { Lit, Ref, Minus, Mult, Agg };
    Kind kind;
    Rational lit;
    std::string ref;  // Ref: measure name; Agg: selected child measure name
    AggFn agg = AggFn::Sum;
    MExprPtr lhs, rhs;

    static MExprPtr make_lit(Rational r) {
        auto e = std::make_shared<MExpr>();
        e->kind = Kind::Lit;
        e->lit = r;
        return e;
    }
    static MExprPtr make_ref(std::string n) {
        auto e = std::make_shared<MExpr>();
        e->kind = Kind::Ref;
        e->ref = std::move(n);
        return e;
    }
    static MExprPtr make_binary(Kind k, MExprPtr a, MExprPtr b) {
        auto e = std::make_shared<MExpr>();
        e->kind = k;
        e->lhs = std::move(a);
        e->rhs = std::move(b);
        return e;
    }
    static MExprPtr make_agg(AggFn fn, std::string sel) {
        auto e = std::make_shared<MExpr>();
        e->kind = Kind::Agg;
        e->agg = fn;
        e->ref = std::move(sel);
        return e;
    }
};

inline std::string to_text(const MExpr& e) {
    switch (e.kind) {
        case MExpr::Kind::Lit: return to_text(e.lit);
        case MExpr::Kind::Ref: return e.ref;
        case MExpr::Kind::Minus: return "Minus(" + to_text(*e.lhs) + ", " + to_text(*e.rhs) + ")";
        case MExpr::Kind::Mult: return "Mult(" + to_text(*e.lhs) + ", " + to_text(*e.rhs) + ")";
        case MExpr::Kind::Agg: {
            const char* fn = e.agg == AggFn::Sum   ? "Sum"
                             : e.agg == AggFn::Avg ? "Avg"
                             : e.agg == AggFn::Min ? "Min"
                                                   : "Max";
            return std::string(fn) + "(" + e.ref + ")";
        }
    }
    return "?";
}

enum class OwnerKind { ActivityOwner, ActionOwner, PerformerOwner };

struct MeasureDecl {
    std::string name;
    std::string unit;
    MExprPtr expr;     // null: the declaration names a probe
    std::string raw;   // original declaration text ("" for implicit ones)
    bool implicit = false;

    // Filled when declarations are attached to their owning element.
    std::string owner;
    OwnerKind ownerKind = OwnerKind::ActivityOwner;
};

namespace detail {

struct MeasureParser {
    const std::string& s;
    size_t pos = 0;

    explicit MeasureParser(const std::string& text) : s(text) {}

    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError("measure \"" + s + "\" offset " + std::to_string(pos), msg);
    }
    void skip_ws() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    char peek() {
        skip_ws();
        return pos < s.size() ? s[pos] : '\0';
    }
    std::string ident() {
        skip_ws();
        if (pos >= s.size() ||
            !(std::isalpha(static_cast<unsigned char>(s[pos])) || s[pos] == '_'))
            fail("expected name");
        size_t start = pos;
        while (pos < s.size() &&
               (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_'))
            ++pos;
        return s.substr(start, pos - start);
    }

    Rational number() {
        skip_ws();
        size_t start = pos;
        if (pos < s.size() && s[pos] == '-') ++pos;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
        if (pos == start || (s[start] == '-' && pos == start + 1)) fail("expected number");
        int64_t whole = std::stoll(s.substr(start, pos - start));
        if (pos < s.size() && s[pos] == '.') {
            ++pos;
            size_t fs = pos;
            while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
            if (pos == fs) fail("expected digits after '.'");
            int64_t frac = std::stoll(s.substr(fs, pos - fs));
            int64_t scale = 1;
            for (size_t i = fs; i < pos; ++i) scale *= 10;
            int64_t n = whole * scale + (whole < 0 ? -frac : frac);
            return Rational(n, scale);
        }
        if (pos < s.size() && s[pos] == '/') {
            ++pos;
            size_t ds = pos;
            while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
            if (pos == ds) fail("expected denominator");
            return Rational(whole, std::stoll(s.substr(ds, pos - ds)));
        }
        return Rational(whole);
    }

    MExprPtr expr() {
        MExprPtr e = factor();
        while (peek() == '*') {
            ++pos;
            e = MExpr::make_binary(MExpr::Kind::Mult, e, factor());
        }
        return e;
    }

    MExprPtr factor() {
        char c = peek();
        if (c == '-' || std::isdigit(static_cast<unsigned char>(c))) return MExpr::make_lit(number());
        if (c == '(') fail("parenthesised subexpressions are not part of the measure grammar");
        std::string name = ident();
        if (peek() != '(') return MExpr::make_ref(name);
        ++pos;  // '('
        if (name == "Minus" || name == "Mult") {
            MExprPtr a = expr();
            if (peek() != ',') fail("expected ','");
            ++pos;
            MExprPtr b = expr();
            if (peek() != ')') fail("expected ')'");
            ++pos;
            return MExpr::make_binary(
                name == "Minus" ? MExpr::Kind::Minus : MExpr::Kind::Mult, a, b);
        }
        AggFn fn;
        if (name == "Sum") fn = AggFn::Sum;
        else if (name == "Avg") fn = AggFn::Avg;
        else if (name == "Min") fn = AggFn::Min;
        else if (name == "Max") fn = AggFn::Max;
        else fail("unknown function '" + name + "'");
        std::string sel = ident();
        if (peek() != ')') fail("expected ')'");
        ++pos;
        return MExpr::make_agg(fn, sel);
    }
};

}  // namespace detail

inline MeasureDecl parse_measure(const std::string& text) {
    detail::MeasureParser p(text);
    MeasureDecl d;
    d.raw = text;
    d.name = p.ident();
    if (p.peek() == '=') {
        ++p.pos;
        d.expr = p.expr();
    }
    if (p.peek() != ',') p.fail("expected ',' before the unit");
    ++p.pos;
    p.skip_ws();
    size_t end = text.size();
    while (end > p.pos && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
    d.unit = text.substr(p.pos, end - p.pos);
    if (d.unit.empty()) p.fail("missing unit");
    return d;
}

inline bool is_probe_name(const std::string& n) {
    return n == "Start" || n == "Finish" || n == "ProcessingTime" || n == "ExecutionCount";
}

inline bool is_measured_node(const Node& n) {
    return n.kind == NodeKind::Action || n.kind == NodeKind::Send ||
           n.kind == NodeKind::Accept || n.kind == NodeKind::ForEach;
}

namespace detail {

inline MeasureDecl implicit_decl(const std::string& owner, OwnerKind k, const std::string& name,
                                 MExprPtr expr, const std::string& unit) {
    MeasureDecl d;
    d.name = name;
    d.unit = unit;
    d.expr = std::move(expr);
    d.implicit = true;
    d.owner = owner;
    d.ownerKind = k;
    return d;
}

inline void derive_for_element(const std::string& owner, OwnerKind kind,
                               const std::set<std::string>& declared,
                               std::vector<MeasureDecl>& out) {
    if (!declared.count("Start"))
        out.push_back(implicit_decl(owner, kind, "Start", nullptr, "tick"));
    if (!declared.count("Finish"))
        out.push_back(implicit_decl(owner, kind, "Finish", nullptr, "tick"));
    if (!declared.count("TotalTime"))
        out.push_back(implicit_decl(
            owner, kind, "TotalTime",
            MExpr::make_binary(MExpr::Kind::Minus, MExpr::make_ref("Finish"),
                               MExpr::make_ref("Start")),
            "tick"));
    if (declared.count("DeclaredCostRate") && !declared.count("Cost"))
        out.push_back(implicit_decl(
            owner, kind, "Cost",
            MExpr::make_binary(MExpr::Kind::Mult, MExpr::make_ref("ProcessingTime"),
                               MExpr::make_ref("DeclaredCostRate")),
            ""));
}

}  // namespace detail

// Only the synthesized declarations (no user ones).
inline std::vector<MeasureDecl> derive_implicit(const ProcessModel& model) {
    std::vector<MeasureDecl> out;
    auto declared_names = [](const std::vector<std::string>& raws) {
        std::set<std::string> names;
        for (const auto& r : raws) names.insert(parse_measure(r).name);
        return names;
    };
    for (const Activity& a : model.activities) {
        detail::derive_for_element(a.id, OwnerKind::ActivityOwner, declared_names(a.measures),
                                   out);
        for (const Node& n : a.nodes) {
            if (!is_measured_node(n)) continue;
            detail::derive_for_element(n.id, OwnerKind::ActionOwner, declared_names(n.measures),
                                       out);
        }
    }
    return out;
}

// User declarations (with owners attached) followed by the implicit ones.
// Duplicate names on one element are rejected.
inline std::vector<MeasureDecl> collect_measures(const ProcessModel& model) {
    std::vector<MeasureDecl> out;
    auto add_raws = [&out](const std::vector<std::string>& raws, const std::string& owner,
                           OwnerKind kind) {
        std::set<std::string> seen;
        for (const auto& r : raws) {
            MeasureDecl d = parse_measure(r);
            d.owner = owner;
            d.ownerKind = kind;
            if (!seen.insert(d.name).second)
                throw ParseError(owner, "duplicate measure '" + d.name + "'");
            out.push_back(std::move(d));
        }
    };
    for (const Activity& a : model.activities) {
        add_raws(a.measures, a.id, OwnerKind::ActivityOwner);
        for (const Node& n : a.nodes)
            if (is_measured_node(n)) add_raws(n.measures, n.id, OwnerKind::ActionOwner);
    }
    for (const Performer& p : model.performers)
        add_raws(p.measures, p.id, OwnerKind::PerformerOwner);
    std::vector<MeasureDecl> implicit = derive_implicit(model);
    out.insert(out.end(), implicit.begin(), implicit.end());
    return out;
}

// Standalone aggregation over already-collected values. Empty input: Sum is
// 0, the others are "no value" (the caller reports an error).
inline std::optional<Rational> fold_aggregate(AggFn fn, const std::vector<Rational>& vals) {
    if (vals.empty()) {
        if (fn == AggFn::Sum) return Rational(0);
        return std::nullopt;
    }
    switch (fn) {
        case AggFn::Sum:
        case AggFn::Avg: {
            Rational s(0);
            for (const Rational& v : vals) s = s + v;
            if (fn == AggFn::Sum) return s;
            return s / Rational(static_cast<int64_t>(vals.size()));
        }
        case AggFn::Min: {
            Rational m = vals[0];
            for (const Rational& v : vals)
                if (v < m) m = v;
            return m;
        }
        case AggFn::Max: {
            Rational m = vals[0];
            for (const Rational& v : vals)
                if (m < v) m = v;
            return m;
        }
    }
    return std::nullopt;
}

// One evaluated cell of the measure table.
struct MeasureRow {
    std::string element;
    std::string measure;
    std::string scope;  // "run/instance", "run/instance#exec", or "ALL"
    std::optional<Rational> value;
    std::string unit;
    std::string error;  // non-empty when evaluation failed
};

namespace detail {

struct Exec {
    int64_t start = 0;
    std::optional<int64_t> end;
};

struct InstData {
    std::string key;  // run-qualified instance id
    std::string activity;
    std::string parentKey;
    int64_t start = 0;
    std::optional<int64_t> end;
    std::map<std::string, std::vector<Exec>> execs;  // by node id
};

struct RunData {
    std::map<std::string, InstData> instances;
    std::vector<std::string> order;  // appearance order of instance keys

    std::vector<const InstData*> of_activity(const std::string& activityId) const {
        std::vector<const InstData*> out;
        for (const auto& k : order) {
            const InstData& i = instances.at(k);
            if (i.activity == activityId) out.push_back(&i);
        }
        return out;
    }
    std::vector<const InstData*> children_of(const std::string& key) const {
        std::vector<const InstData*> out;
        for (const auto& k : order) {
            const InstData& i = instances.at(k);
            if (i.parentKey == key) out.push_back(&i);
        }
        return out;
    }
};

inline RunData build_run_data(const std::vector<std::pair<std::string, EventLog>>& runs) {
    RunData data;
    for (const auto& [label, log] : runs) {
        auto qualify = [&label](const std::string& id) {
            return label.empty() ? id : label + "/" + id;
        };
        for (const Event& e : log) {
            switch (e.kind) {
                case EventKind::InstanceStart: {
                    InstData inst;
                    inst.key = qualify(e.subject);
                    inst.activity = e.get("activity");
                    if (const std::string* p = e.find("parent")) inst.parentKey = qualify(*p);
                    inst.start = e.tick;
                    data.order.push_back(inst.key);
                    data.instances[inst.key] = std::move(inst);
                    break;
                }
                case EventKind::InstanceEnd: {
                    auto it = data.instances.find(qualify(e.subject));
                    if (it != data.instances.end() && e.get("status") == "completed")
                        it->second.end = e.tick;
                    break;
                }
                case EventKind::ActionStart: {
                    auto it = data.instances.find(qualify(e.get("inst")));
                    if (it != data.instances.end())
                        it->second.execs[e.subject].push_back({e.tick, std::nullopt});
                    break;
                }
                case EventKind::ActionEnd: {
                    auto it = data.instances.find(qualify(e.get("inst")));
                    if (it == data.instances.end()) break;
                    auto& list = it->second.execs[e.subject];
                    for (auto& ex : list) {
                        if (!ex.end) {
                            ex.end = e.tick;
                            break;
                        }
                    }
                    break;
                }
                default: break;
            }
        }
    }
    return data;
}

struct Ctx {
    enum class Kind { Instance, Exec, All } kind = Kind::All;
    const InstData* inst = nullptr;
    std::string node;  // Exec only
    int execIdx = 0;   // Exec only

    std::string key() const {
        switch (kind) {
            case Kind::Instance: return inst->key;
            case Kind::Exec: return inst->key + "#" + node + "#" + std::to_string(execIdx);
            case Kind::All: return "ALL";
        }
        return "?";
    }
    std::string scope_text() const {
        switch (kind) {
            case Kind::Instance: return inst->key;
            case Kind::Exec: return inst->key + "#" + std::to_string(execIdx);
            case Kind::All: return "ALL";
        }
        return "?";
    }
};

struct EvalResult {
    std::optional<Rational> value;
    std::string unit;
    std::string error;

    static EvalResult absent() { return {}; }
    static EvalResult err(std::string msg) {
        EvalResult r;
        r.error = std::move(msg);
        return r;
    }
    static EvalResult of(Rational v, std::string unit_) {
        EvalResult r;
        r.value = v;
        r.unit = std::move(unit_);
        return r;
    }
};

class Evaluator {
  public:
    Evaluator(const ProcessModel& model, const ModelIndex& idx,
              std::vector<MeasureDecl> decls,
              const std::vector<std::pair<std::string, EventLog>>& runs)
        : model_(model), idx_(idx), decls_(std::move(decls)), data_(build_run_data(runs)) {
        for (const MeasureDecl& d : decls_) byOwner_[d.owner][d.name] = &d;
    }

    std::vector<MeasureRow> rows() {
        std::vector<MeasureRow> out;
        for (const MeasureDecl& d : decls_) {
            for (const Ctx& c : contexts_of(d)) emit(d, c, out);
            Ctx all;
            all.kind = Ctx::Kind::All;
            emit(d, all, out);
        }
        return out;
    }

    EvalResult eval_named(const std::string& owner, const std::string& name, const Ctx& ctx) {
        return resolve(owner, name, ctx);
    }

    const RunData& data() const { return data_; }

    std::vector<Ctx> contexts_of(const MeasureDecl& d) {
        std::vector<Ctx> out;
        switch (d.ownerKind) {
            case OwnerKind::ActivityOwner:
                for (const InstData* i : data_.of_activity(d.owner)) {
                    Ctx c;
                    c.kind = Ctx::Kind::Instance;
                    c.inst = i;
                    out.push_back(c);
                }
                break;
            case OwnerKind::ActionOwner: {
                const Activity* act = idx_.nodeOwner.count(d.owner)
                                          ? idx_.nodeOwner.at(d.owner)
                                          : nullptr;
                if (!act) break;
                for (const InstData* i : data_.of_activity(act->id)) {
                    auto it = i->execs.find(d.owner);
                    if (it == i->execs.end()) continue;
                    for (size_t k = 0; k < it->second.size(); ++k) {
                        Ctx c;
                        c.kind = Ctx::Kind::Exec;
                        c.inst = i;
                        c.node = d.owner;
                        c.execIdx = static_cast<int>(k);
                        out.push_back(c);
                    }
                }
                break;
            }
            case OwnerKind::PerformerOwner:
                for (const Activity& a : model_.activities) {
                    for (const Node& n : a.nodes) {
                        if (n.performer != d.owner) continue;
                        for (const InstData* i : data_.of_activity(a.id)) {
                            auto it = i->execs.find(n.id);
                            if (it == i->execs.end()) continue;
                            for (size_t k = 0; k < it->second.size(); ++k) {
                                Ctx c;
                                c.kind = Ctx::Kind::Exec;
                                c.inst = i;
                                c.node = n.id;
                                c.execIdx = static_cast<int>(k);
                                out.push_back(c);
                            }
                        }
                    }
                }
                break;
        }
        return out;
    }

  private:
    void emit(const MeasureDecl& d, const Ctx& c, std::vector<MeasureRow>& out) {
        EvalResult r = eval_decl(d, c);
        if (!r.value && r.error.empty()) return;  // absent: no row
        MeasureRow row;
        row.element = d.owner;
        row.measure = d.name;
        row.scope = c.scope_text();
        row.value = r.value;
        row.unit = r.unit;
        row.error = r.error;
        out.push_back(std::move(row));
    }

    const MeasureDecl* find_decl(const std::string& owner, const std::string& name) const {
        auto it = byOwner_.find(owner);
        if (it == byOwner_.end()) return nullptr;
        auto jt = it->second.find(name);
        return jt == it->second.end() ? nullptr : jt->second;
    }

    EvalResult eval_decl(const MeasureDecl& d, const Ctx& ctx) {
        std::string key = d.owner + "\x01" + d.name + "\x01" + ctx.key();
        auto memoIt = memo_.find(key);
        if (memoIt != memo_.end()) return memoIt->second;
        if (!stack_.insert(key).second)
            return EvalResult::err("cyclic measure definition involving '" + d.name + "'");
        EvalResult r;
        if (!d.expr) {
            r = probe(d.owner, d.ownerKind, d.name, ctx);
            if (r.error.empty() && !r.value && !is_probe_name(d.name))
                r = EvalResult::err("'" + d.name + "' has no expression and is not a probe");
        } else {
            r = eval_expr(*d.expr, d, ctx);
        }
        if (!d.unit.empty() && r.value) r.unit = d.unit;  // declared unit wins
        stack_.erase(key);
        memo_[key] = r;
        return r;
    }

    EvalResult eval_expr(const MExpr& e, const MeasureDecl& home, const Ctx& ctx) {
        switch (e.kind) {
            case MExpr::Kind::Lit: return EvalResult::of(e.lit, "");
            case MExpr::Kind::Ref: return resolve(home.owner, e.ref, ctx);
            case MExpr::Kind::Minus: {
                EvalResult a = eval_expr(*e.lhs, home, ctx);
                if (!a.error.empty()) return a;
                EvalResult b = eval_expr(*e.rhs, home, ctx);
                if (!b.error.empty()) return b;
                if (!a.value || !b.value) return EvalResult::absent();
                if (!a.unit.empty() && !b.unit.empty() && a.unit != b.unit)
                    return EvalResult::err("unit mismatch: Minus over '" + a.unit + "' and '" +
                                           b.unit + "'");
                return EvalResult::of(*a.value - *b.value,
                                      a.unit.empty() ? b.unit : a.unit);
            }
            case MExpr::Kind::Mult: {
                EvalResult a = eval_expr(*e.lhs, home, ctx);
                if (!a.error.empty()) return a;
                EvalResult b = eval_expr(*e.rhs, home, ctx);
                if (!b.error.empty()) return b;
                if (!a.value || !b.value) return EvalResult::absent();
                return EvalResult::of(*a.value * *b.value, mult_unit(a.unit, b.unit));
            }
            case MExpr::Kind::Agg: {
                std::vector<EvalResult> kids = children(home, e.ref, ctx);
                std::vector<Rational> vals;
                std::string unit;
                for (const EvalResult& k : kids) {
                    if (!k.error.empty()) return k;
                    if (!k.value) continue;  // absent children are skipped
                    if (!k.unit.empty()) {
                        if (!unit.empty() && unit != k.unit)
                            return EvalResult::err("unit mismatch inside aggregation: '" + unit +
                                                   "' vs '" + k.unit + "'");
                        unit = k.unit;
                    }
                    vals.push_back(*k.value);
                }
                std::optional<Rational> v = fold_aggregate(e.agg, vals);
                if (!v) return EvalResult::err("aggregation over an empty set");
                return EvalResult::of(*v, unit);
            }
        }
        return EvalResult::err("bad measure expression");
    }

    // Rate rule: value X times rate Y/X gives Y. Otherwise a unitless factor
    // adopts the other unit, and mixed plain units concatenate (the declared
    // unit of the enclosing measure normally overrides this anyway).
    static std::string mult_unit(const std::string& a, const std::string& b) {
        if (!b.empty() && b.size() > a.size() && b.compare(b.size() - a.size(), a.size(), a) == 0 &&
            b[b.size() - a.size() - 1] == '/' && !a.empty())
            return b.substr(0, b.size() - a.size() - 1);
        if (!a.empty() && a.size() > b.size() && a.compare(a.size() - b.size(), b.size(), b) == 0 &&
            a[a.size() - b.size() - 1] == '/' && !b.empty())
            return a.substr(0, a.size() - b.size() - 1);
        if (a.empty()) return b;
        if (b.empty()) return a;
        return a + "*" + b;
    }

    // Resolution order for a name referenced from `owner`: a declaration on
    // the owner itself, then a probe, then (for actions) a declaration on the
    // owning activity evaluated in the enclosing instance context.
    EvalResult resolve(const std::string& owner, const std::string& name, const Ctx& ctx) {
        if (const MeasureDecl* d = find_decl(owner, name)) return eval_decl(*d, ctx);
        OwnerKind kind = owner_kind(owner);
        EvalResult p = probe(owner, kind, name, ctx);
        if (p.value || !p.error.empty()) return p;
        if (kind == OwnerKind::ActionOwner && idx_.nodeOwner.count(owner)) {
            const Activity* act = idx_.nodeOwner.at(owner);
            if (const MeasureDecl* d = find_decl(act->id, name)) {
                Ctx lifted;
                if (ctx.kind == Ctx::Kind::Exec) {
                    lifted.kind = Ctx::Kind::Instance;
                    lifted.inst = ctx.inst;
                } else {
                    lifted.kind = Ctx::Kind::All;
                }
                return eval_decl(*d, lifted);
            }
        }
        if (is_probe_name(name)) return EvalResult::absent();
        return EvalResult::err("unresolved measure reference '" + name + "'");
    }

    OwnerKind owner_kind(const std::string& owner) const {
        if (idx_.activity.count(owner)) return OwnerKind::ActivityOwner;
        if (idx_.performer.count(owner)) return OwnerKind::PerformerOwner;
        return OwnerKind::ActionOwner;
    }

    EvalResult probe(const std::string& owner, OwnerKind kind, const std::string& name,
                     const Ctx& ctx) {
        if (!is_probe_name(name)) return EvalResult::absent();
        if (kind == OwnerKind::ActivityOwner) {
            if (ctx.kind == Ctx::Kind::Instance) {
                const InstData& i = *ctx.inst;
                if (name == "Start") return EvalResult::of(Rational(i.start), "tick");
                if (name == "Finish")
                    return i.end ? EvalResult::of(Rational(*i.end), "tick")
                                 : EvalResult::absent();
                if (name == "ProcessingTime")
                    return i.end ? EvalResult::of(Rational(*i.end - i.start), "tick")
                                 : EvalResult::absent();
                if (name == "ExecutionCount") return EvalResult::of(Rational(1), "");
            } else if (ctx.kind == Ctx::Kind::All && name == "ExecutionCount") {
                return EvalResult::of(
                    Rational(static_cast<int64_t>(data_.of_activity(owner).size())), "");
            }
            return EvalResult::absent();
        }
        // Actions and performer-scoped actions share execution probes.
        if (ctx.kind == Ctx::Kind::Exec) {
            const Exec& ex = ctx.inst->execs.at(ctx.node)[ctx.execIdx];
            if (name == "Start") return EvalResult::of(Rational(ex.start), "tick");
            if (name == "Finish")
                return ex.end ? EvalResult::of(Rational(*ex.end), "tick") : EvalResult::absent();
            if (name == "ProcessingTime")
                return ex.end ? EvalResult::of(Rational(*ex.end - ex.start), "tick")
                              : EvalResult::absent();
            if (name == "ExecutionCount") return EvalResult::of(Rational(1), "");
        } else if (ctx.kind == Ctx::Kind::All && name == "ExecutionCount") {
            int64_t total = 0;
            if (kind == OwnerKind::PerformerOwner) {
                for (const Activity& a : model_.activities)
                    for (const Node& n : a.nodes) {
                        if (n.performer != owner) continue;
                        for (const InstData* i : data_.of_activity(a.id)) {
                            auto it = i->execs.find(n.id);
                            if (it != i->execs.end())
                                total += static_cast<int64_t>(it->second.size());
                        }
                    }
            } else if (idx_.nodeOwner.count(owner)) {
                const Activity* act = idx_.nodeOwner.at(owner);
                for (const InstData* i : data_.of_activity(act->id)) {
                    auto it = i->execs.find(owner);
                    if (it != i->execs.end()) total += static_cast<int64_t>(it->second.size());
                }
            }
            return EvalResult::of(Rational(total), "");
        }
        return EvalResult::absent();
    }

    // Child values feeding an aggregation of measure `m`.
    std::vector<EvalResult> children(const MeasureDecl& home, const std::string& m,
                                     const Ctx& ctx) {
        std::vector<EvalResult> out;
        if (ctx.kind == Ctx::Kind::Instance) {
            // Tasks of this instance, then sub-process instances it started.
            const Activity* act = idx_.activity.count(home.owner)
                                      ? idx_.activity.at(home.owner)
                                      : nullptr;
            if (!act) return out;
            for (const Node& n : act->nodes) {
                if (!is_measured_node(n)) continue;
                if (!resolvable_on(n.id, OwnerKind::ActionOwner, m)) continue;
                auto it = ctx.inst->execs.find(n.id);
                if (it == ctx.inst->execs.end()) continue;
                for (size_t k = 0; k < it->second.size(); ++k) {
                    Ctx c;
                    c.kind = Ctx::Kind::Exec;
                    c.inst = ctx.inst;
                    c.node = n.id;
                    c.execIdx = static_cast<int>(k);
                    out.push_back(resolve(n.id, m, c));
                }
            }
            for (const InstData* child : data_.children_of(ctx.inst->key)) {
                if (!resolvable_on(child->activity, OwnerKind::ActivityOwner, m)) continue;
                Ctx c;
                c.kind = Ctx::Kind::Instance;
                c.inst = child;
                out.push_back(resolve(child->activity, m, c));
            }
            return out;
        }
        if (ctx.kind == Ctx::Kind::All) {
            if (resolvable_on(home.owner, home.ownerKind, m)) {
                for (const Ctx& c : contexts_of_owner(home)) out.push_back(resolve(home.owner, m, c));
            } else {
                for (const Ctx& c : contexts_of_owner(home)) {
                    std::vector<EvalResult> sub = children(home, m, c);
                    out.insert(out.end(), sub.begin(), sub.end());
                }
            }
            return out;
        }
        return out;  // execution context: nothing below it
    }

    std::vector<Ctx> contexts_of_owner(const MeasureDecl& d) { return contexts_of(d); }

    bool resolvable_on(const std::string& owner, OwnerKind, const std::string& m) const {
        return find_decl(owner, m) != nullptr || is_probe_name(m);
    }

    const ProcessModel& model_;
    const ModelIndex& idx_;
    std::vector<MeasureDecl> decls_;
    RunData data_;
    std::map<std::string, std::map<std::string, const MeasureDecl*>> byOwner_;
    std::map<std::string, EvalResult> memo_;
    std::set<std::string> stack_;
};

}  // namespace detail

// Evaluates every declared and implicit measure over the given runs. The run
// label prefixes instance ids in scope strings; pass one run with an empty
// label for single-run evaluation.
inline std::vector<MeasureRow> evaluate_measures(
    const ProcessModel& model, const std::vector<std::pair<std::string, EventLog>>& runs) {
    ModelIndex idx(model);
    detail::Evaluator ev(model, idx, collect_measures(model), runs);
    return ev.rows();
}

}  // namespace flowkit::measures
