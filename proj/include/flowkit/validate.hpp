#pragma once

// Static validation of parsed models. parse_model() guarantees syntactic and
// referential integrity; validate() checks the semantic restrictions that
// make a model executable by the token engines and transformable:
//
//   R1  at most one edge leaves any pin
//   R2  no cycle through control nodes only (every loop must pass through an
//       action or event, otherwise paths between stable places are unbounded)
//   R3  no stable-to-stable run of control nodes contains both a fork and a
//       join (such a segment could neither be pushed nor pulled atomically)
//   R4  decision discipline: every outgoing edge guarded, at most one else,
//       and at least two branches; fork/merge/join must have enough edges to
//       mean anything. Guards that are equality tests on one discriminator
//       are proven mutually exclusive here; anything else is only checkable
//       at run time and reported as a warning.
//   R5  assignment targets/expressions and measure references resolve
//   R6  guards touch only fields present on every token type that can reach
//       them (plus activity variables), with literal comparisons type-checked
//
// Findings carry the rule id, severity, the elements involved, and a message.
// A model is executable iff there are no error-severity findings.

#include <map>
#include <set>
#include <string>
#include <vector>

#include "flowkit/common.hpp"
#include "flowkit/expr.hpp"
#include "flowkit/measures.hpp"
#include "flowkit/model.hpp"

namespace flowkit {

struct Finding {
    std::string rule;  // "R1".."R6"
    enum class Severity { Error, Warning } severity = Severity::Error;
    std::vector<std::string> elements;
    std::string message;
};

struct ValidationReport {
    std::vector<Finding> findings;

    bool has_errors() const {
        for (const Finding& f : findings)
            if (f.severity == Finding::Severity::Error) return true;
        return false;
    }
    std::vector<const Finding*> of_rule(const std::string& rule) const {
        std::vector<const Finding*> out;
        for (const Finding& f : findings)
            if (f.rule == rule) out.push_back(&f);
        return out;
    }
};

inline std::string to_text(const Finding& f) {
    std::string out = f.rule;
    out += f.severity == Finding::Severity::Error ? " error" : " warning";
    out += " [" + join(f.elements, ", ") + "] " + f.message;
    return out;
}

namespace detail {

class Validator {
  public:
    Validator(const ProcessModel& m) : m_(m), idx_(m) {}

    ValidationReport run() {
        for (const Activity& a : m_.activities) {
            check_r1(a);
            check_r2(a);
            check_r3(a);
            check_r4(a);
            check_r5(a);
            check_r6(a);
        }
        check_measure_refs();
        return std::move(report_);
    }

  private:
    void add(const std::string& rule, Finding::Severity sev, std::vector<std::string> elements,
             std::string message) {
        report_.findings.push_back({rule, sev, std::move(elements), std::move(message)});
    }

    void check_r1(const Activity& a) {
        for (const Node& n : a.nodes) {
            for (const Pin& p : n.pins) {
                const auto& outs = idx_.out_edges(p.id);
                if (outs.size() > 1) {
                    std::vector<std::string> els{p.id};
                    for (const Edge* e : outs) els.push_back(e->id);
                    add("R1", Finding::Severity::Error, std::move(els),
                        "pin has " + std::to_string(outs.size()) +
                            " outgoing edges (at most one allowed)");
                }
            }
        }
    }

    // Tarjan over the control-node subgraph; any SCC with a cycle is fatal.
    void check_r2(const Activity& a) {
        std::vector<const Node*> ctrl;
        for (const Node& n : a.nodes)
            if (is_control(n.kind)) ctrl.push_back(&n);
        std::map<std::string, int> indexOf;
        std::map<std::string, int> low;
        std::vector<std::string> stack;
        std::set<std::string> onStack;
        int counter = 0;
        std::vector<std::vector<std::string>> cycles;

        // Iterative strongconnect to stay safe on deep graphs.
        struct Frame {
            const Node* n;
            size_t edge = 0;
        };
        for (const Node* root : ctrl) {
            if (indexOf.count(root->id)) continue;
            std::vector<Frame> frames{{root}};
            indexOf[root->id] = low[root->id] = counter++;
            stack.push_back(root->id);
            onStack.insert(root->id);
            while (!frames.empty()) {
                Frame& f = frames.back();
                const auto& outs = idx_.out_edges(f.n->id);
                bool descended = false;
                while (f.edge < outs.size()) {
                    const Edge* e = outs[f.edge++];
                    if (!idx_.node.count(e->target)) continue;
                    const Node* t = idx_.node.at(e->target);
                    if (!is_control(t->kind)) continue;
                    if (!indexOf.count(t->id)) {
                        indexOf[t->id] = low[t->id] = counter++;
                        stack.push_back(t->id);
                        onStack.insert(t->id);
                        frames.push_back({t});
                        descended = true;
                        break;
                    }
                    if (onStack.count(t->id))
                        low[f.n->id] = std::min(low[f.n->id], indexOf[t->id]);
                }
                if (descended) continue;
                if (low[f.n->id] == indexOf[f.n->id]) {
                    std::vector<std::string> scc;
                    for (;;) {
                        std::string v = stack.back();
                        stack.pop_back();
                        onStack.erase(v);
                        scc.push_back(v);
                        if (v == f.n->id) break;
                    }
                    bool selfLoop = false;
                    for (const Edge* e : idx_.out_edges(f.n->id))
                        if (e->target == f.n->id) selfLoop = true;
                    if (scc.size() > 1 || selfLoop) {
                        std::sort(scc.begin(), scc.end());
                        cycles.push_back(std::move(scc));
                    }
                }
                const Node* done = f.n;
                frames.pop_back();
                if (!frames.empty())
                    low[frames.back().n->id] =
                        std::min(low[frames.back().n->id], low[done->id]);
            }
        }
        std::sort(cycles.begin(), cycles.end());
        for (auto& c : cycles)
            add("R2", Finding::Severity::Error, c,
                "cycle through control nodes only (no action or event on the loop)");
    }

    // DFS from each out-pin through control nodes carrying fork/join flags.
    void check_r3(const Activity& a) {
        std::set<std::pair<std::string, std::string>> reported;
        for (const Node& n : a.nodes) {
            for (const Pin& p : n.pins) {
                if (p.dir != PinDir::Out) continue;
                std::vector<std::string> path;
                std::set<std::string> onPath;
                walk_r3(a, p.id, p.id, false, false, path, onPath, reported);
            }
        }
    }

    void walk_r3(const Activity& a, const std::string& sourcePin, const std::string& at,
                 bool sawFork, bool sawJoin, std::vector<std::string>& path,
                 std::set<std::string>& onPath,
                 std::set<std::pair<std::string, std::string>>& reported) {
        for (const Edge* e : idx_.out_edges(at)) {
            if (idx_.pin.count(e->target)) {
                if (sawFork && sawJoin && !reported.count({sourcePin, e->target})) {
                    reported.insert({sourcePin, e->target});
                    std::vector<std::string> els{sourcePin};
                    els.insert(els.end(), path.begin(), path.end());
                    els.push_back(e->target);
                    add("R3", Finding::Severity::Error, std::move(els),
                        "path between stable places passes through both a fork and a join");
                }
                continue;
            }
            const Node* t = idx_.node.at(e->target);
            if (!is_control(t->kind)) continue;  // accept/action reached directly: impossible
            if (onPath.count(t->id)) continue;   // R2's problem, avoid looping
            bool f = sawFork || t->kind == NodeKind::Fork;
            bool j = sawJoin || t->kind == NodeKind::Join;
            path.push_back(t->id);
            onPath.insert(t->id);
            walk_r3(a, sourcePin, t->id, f, j, path, onPath, reported);
            onPath.erase(t->id);
            path.pop_back();
        }
    }

    void check_r4(const Activity& a) {
        for (const Node& n : a.nodes) {
            const auto& outs = idx_.out_edges(n.id);
            const auto& ins = idx_.in_edges(n.id);
            switch (n.kind) {
                case NodeKind::Decision: {
                    if (outs.size() < 2)
                        add("R4", Finding::Severity::Error, {n.id},
                            "decision needs at least two outgoing edges");
                    std::vector<std::string> unguarded;
                    std::vector<const Edge*> elses, guarded;
                    for (const Edge* e : outs) {
                        if (!e->guard) unguarded.push_back(e->id);
                        else if (e->guard->kind == Expr::Kind::Else) elses.push_back(e);
                        else guarded.push_back(e);
                    }
                    if (!unguarded.empty()) {
                        std::vector<std::string> els{n.id};
                        els.insert(els.end(), unguarded.begin(), unguarded.end());
                        add("R4", Finding::Severity::Error, std::move(els),
                            "every edge out of a decision must carry a guard");
                    }
                    if (elses.size() > 1) {
                        std::vector<std::string> els{n.id};
                        for (const Edge* e : elses) els.push_back(e->id);
                        add("R4", Finding::Severity::Error, std::move(els),
                            "at most one else branch per decision");
                    }
                    check_exclusion(n, guarded);
                    break;
                }
                case NodeKind::Fork:
                    if (outs.size() < 2)
                        add("R4", Finding::Severity::Error, {n.id},
                            "fork needs at least two outgoing edges");
                    break;
                case NodeKind::Merge:
                    if (ins.size() < 2)
                        add("R4", Finding::Severity::Error, {n.id},
                            "merge needs at least two incoming edges");
                    break;
                case NodeKind::Join:
                    if (ins.size() < 2)
                        add("R4", Finding::Severity::Error, {n.id},
                            "join needs at least two incoming edges");
                    break;
                default: break;
            }
        }
    }

    // Static mutual exclusion: provable when all (non-else) guards are
    // equality tests of one discriminator against distinct literals.
    void check_exclusion(const Node& decision, const std::vector<const Edge*>& guarded) {
        if (guarded.size() < 2) return;  // single guard (+ optional else): trivially exclusive
        std::string discriminator;
        std::vector<std::string> literals;
        bool uniform = true;
        for (const Edge* e : guarded) {
            const Expr& g = *e->guard;
            const Expr* ref = nullptr;
            const Expr* lit = nullptr;
            if (g.kind == Expr::Kind::Bin && g.op == BinOp::Eq) {
                if (g.lhs->kind == Expr::Kind::Ref) ref = g.lhs.get();
                else lit = g.lhs.get();
                if (g.rhs->kind == Expr::Kind::Ref) ref = ref ? nullptr : g.rhs.get();
                else lit = lit ? nullptr : g.rhs.get();
            }
            if (!ref || !lit ||
                (lit->kind != Expr::Kind::Int && lit->kind != Expr::Kind::Str &&
                 lit->kind != Expr::Kind::Bool)) {
                uniform = false;
                break;
            }
            std::string d = join(ref->path, ".");
            if (discriminator.empty()) discriminator = d;
            else if (discriminator != d) {
                uniform = false;
                break;
            }
            literals.push_back(to_text(*lit));
        }
        if (!uniform) {
            std::vector<std::string> els{decision.id};
            for (const Edge* e : guarded) els.push_back(e->id);
            add("R4", Finding::Severity::Warning, std::move(els),
                "guards are not equality tests on a single discriminator; mutual exclusion "
                "will be enforced at run time");
            return;
        }
        std::set<std::string> seen;
        for (size_t i = 0; i < literals.size(); ++i) {
            if (!seen.insert(literals[i]).second) {
                add("R4", Finding::Severity::Error, {decision.id, guarded[i]->id},
                    "two branches test the same value " + literals[i] +
                        " of '" + discriminator + "'");
            }
        }
    }

    // Field lookup through a class type; returns nullptr when the path does
    // not resolve, and sets `leafType` to the final field's type otherwise.
    bool class_has_path(const std::string& type, const std::vector<std::string>& path,
                        size_t from, std::string* leafType) const {
        std::string cur = type;
        for (size_t i = from; i < path.size(); ++i) {
            if (!idx_.dataClass.count(cur)) return false;  // builtin or list: no fields
            const DataClass* c = idx_.dataClass.at(cur);
            const DataField* found = nullptr;
            for (const DataField& f : c->fields)
                if (f.name == path[i]) found = &f;
            if (!found) return false;
            cur = found->type;
        }
        if (leafType) *leafType = cur;
        return true;
    }

    void check_r5(const Activity& a) {
        for (const Node& n : a.nodes) {
            if (n.kind == NodeKind::Action) check_assignments(a, n);
            if (n.kind == NodeKind::Action && !n.calls.empty()) check_call_arity(a, n);
            if (n.kind == NodeKind::ForEach) check_foreach(a, n);
        }
    }

    void check_assignments(const Activity& a, const Node& n) {
        std::map<std::string, const Pin*> inPins, outPins;
        for (const Pin& p : n.pins) (p.dir == PinDir::In ? inPins : outPins)[p.id] = &p;
        const Pin* firstTypedIn = nullptr;
        for (const Pin& p : n.pins)
            if (p.dir == PinDir::In && !p.type.empty() && !firstTypedIn) firstTypedIn = &p;

        for (const Assignment& asg : n.assignments) {
            const std::string& root = asg.target[0];
            if (const VariableDecl* v = idx_.find_variable(a, root)) {
                if (asg.target.size() > 1 &&
                    !class_has_path(v->type, asg.target, 1, nullptr))
                    add("R5", Finding::Severity::Error, {n.id, asg.targetText},
                        "assignment target field does not exist on type '" + v->type + "'");
            } else if (outPins.count(root)) {
                const Pin* p = outPins.at(root);
                if (asg.target.size() < 2) {
                    add("R5", Finding::Severity::Error, {n.id, asg.targetText},
                        "assign to a field of the output pin, not the pin itself");
                } else if (p->type.empty()) {
                    add("R5", Finding::Severity::Error, {n.id, asg.targetText},
                        "output pin '" + root + "' carries no data (untyped)");
                } else if (!class_has_path(p->type, asg.target, 1, nullptr)) {
                    add("R5", Finding::Severity::Error, {n.id, asg.targetText},
                        "assignment target field does not exist on type '" + p->type + "'");
                }
            } else {
                add("R5", Finding::Severity::Error, {n.id, asg.targetText},
                    "assignment target must be a variable or an output pin field");
            }
            for (const auto& path : collect_refs(asg.expr)) {
                check_read_ref(a, n, path, firstTypedIn, inPins, "R5");
            }
        }
    }

    void check_read_ref(const Activity& a, const Node& n, const std::vector<std::string>& path,
                        const Pin* firstTypedIn, const std::map<std::string, const Pin*>& inPins,
                        const std::string& rule) {
        const std::string& root = path[0];
        if (root == "payload") {
            if (!firstTypedIn) {
                add(rule, Finding::Severity::Error, {n.id, join(path, ".")},
                    "no typed input pin supplies a payload here");
            } else if (path.size() > 1 &&
                       !class_has_path(firstTypedIn->type, path, 1, nullptr)) {
                add(rule, Finding::Severity::Error, {n.id, join(path, ".")},
                    "payload type '" + firstTypedIn->type + "' has no such field");
            }
            return;
        }
        if (const VariableDecl* v = idx_.find_variable(a, root)) {
            if (path.size() > 1 && !class_has_path(v->type, path, 1, nullptr))
                add(rule, Finding::Severity::Error, {n.id, join(path, ".")},
                    "variable type '" + v->type + "' has no such field");
            return;
        }
        if (inPins.count(root)) {
            const Pin* p = inPins.at(root);
            if (p->type.empty())
                add(rule, Finding::Severity::Error, {n.id, join(path, ".")},
                    "input pin '" + root + "' carries no data (untyped)");
            else if (path.size() > 1 && !class_has_path(p->type, path, 1, nullptr))
                add(rule, Finding::Severity::Error, {n.id, join(path, ".")},
                    "pin type '" + p->type + "' has no such field");
            return;
        }
        // Fallback: a field of the primary payload.
        if (!firstTypedIn) {
            add(rule, Finding::Severity::Error, {n.id, join(path, ".")},
                "'" + root + "' is neither a variable, an input pin, nor a payload field");
        } else if (!class_has_path(firstTypedIn->type, path, 0, nullptr)) {
            add(rule, Finding::Severity::Error, {n.id, join(path, ".")},
                "payload type '" + firstTypedIn->type + "' has no field '" + root + "'");
        }
    }

    void check_call_arity(const Activity& a, const Node& n) {
        const Activity* callee = idx_.activity.at(n.calls);
        std::vector<const Node*> inParams, outParams;
        for (const Node& cn : callee->nodes) {
            if (cn.kind != NodeKind::Param) continue;
            (cn.paramDir == PinDir::In ? inParams : outParams).push_back(&cn);
        }
        size_t ins = 0, outs = 0;
        for (const Pin& p : n.pins) (p.dir == PinDir::In ? ins : outs)++;
        if (ins != inParams.size())
            add("R5", Finding::Severity::Error, {n.id, callee->id},
                "call has " + std::to_string(ins) + " input pins but the activity takes " +
                    std::to_string(inParams.size()) + " input parameters");
        if (outs != outParams.size())
            add("R5", Finding::Severity::Error, {n.id, callee->id},
                "call has " + std::to_string(outs) + " output pins but the activity yields " +
                    std::to_string(outParams.size()) + " output parameters");
    }

    void check_foreach(const Activity& a, const Node& n) {
        const VariableDecl* v = idx_.find_variable(a, n.collection);
        const Activity* body = idx_.activity.at(n.body);
        std::vector<const Node*> inParams;
        for (const Node& bn : body->nodes)
            if (bn.kind == NodeKind::Param && bn.paramDir == PinDir::In) inParams.push_back(&bn);
        if (inParams.size() > 1) {
            add("R5", Finding::Severity::Error, {n.id, body->id},
                "loop body takes more than one input parameter");
            return;
        }
        if (inParams.size() == 1 && v) {
            // list<T> element type vs the body's parameter type
            std::string elem = v->type.substr(5, v->type.size() - 6);
            const std::string& pt = inParams[0]->paramType;
            if (!pt.empty() && pt != elem)
                add("R5", Finding::Severity::Error, {n.id, body->id},
                    "list elements are '" + elem + "' but the body expects '" + pt + "'");
        }
    }

    // Token types that can arrive at a control node: walk backwards to pins.
    std::set<std::string> feeder_types(const std::string& nodeId) const {
        std::set<std::string> types;
        std::set<std::string> visited;
        std::vector<std::string> work{nodeId};
        while (!work.empty()) {
            std::string cur = work.back();
            work.pop_back();
            if (!visited.insert(cur).second) continue;
            for (const Edge* e : idx_.in_edges(cur)) {
                if (idx_.pin.count(e->source)) {
                    types.insert(idx_.pin.at(e->source)->type);  // "" = control token
                } else {
                    work.push_back(e->source);
                }
            }
        }
        return types;
    }

    void check_r6(const Activity& a) {
        std::map<std::string, const Pin*> noPins;
        for (const Edge& e : a.edges) {
            if (!e.guard || e.guard->kind == Expr::Kind::Else) continue;
            bool fromDecision =
                idx_.node.count(e.source) && idx_.node.at(e.source)->kind == NodeKind::Decision;
            if (fromDecision) {
                std::set<std::string> types = feeder_types(e.source);
                for (const auto& path : collect_refs(e.guard))
                    check_guard_ref(a, e, path, types);
                check_guard_literal_types(a, e, types);
            } else {
                // Accept output pin: the payload is the signal's field record.
                const Node* accept = idx_.pinOwner.at(e.source);
                const SignalType* sig = idx_.signal.at(accept->signal);
                for (const auto& path : collect_refs(e.guard)) {
                    const std::string& root = path[0];
                    bool isPayload = root == "payload";
                    const std::string& field = isPayload
                                                   ? (path.size() > 1 ? path[1] : std::string())
                                                   : root;
                    if (!isPayload && idx_.find_variable(a, root)) {
                        if (path.size() > 1 &&
                            !class_has_path(idx_.find_variable(a, root)->type, path, 1, nullptr))
                            add("R6", Finding::Severity::Error, {e.id, join(path, ".")},
                                "variable has no such field");
                        continue;
                    }
                    bool known = false;
                    for (const std::string& f : sig->fields)
                        if (f == field) known = true;
                    if (!known)
                        add("R6", Finding::Severity::Error, {e.id, join(path, ".")},
                            "signal '" + sig->name + "' has no field '" + field + "'");
                }
            }
        }
    }

    void check_guard_ref(const Activity& a, const Edge& e, const std::vector<std::string>& path,
                         const std::set<std::string>& feederTypes) {
        const std::string& root = path[0];
        if (root != "payload" && idx_.find_variable(a, root)) {
            const VariableDecl* v = idx_.find_variable(a, root);
            if (path.size() > 1 && !class_has_path(v->type, path, 1, nullptr))
                add("R6", Finding::Severity::Error, {e.id, join(path, ".")},
                    "variable type '" + v->type + "' has no such field");
            return;
        }
        // Payload-rooted (explicitly or by fallback): the field must exist on
        // every token type that can reach the decision.
        size_t from = root == "payload" ? 1 : 0;
        if (from == 1 && path.size() == 1) return;  // bare `payload`: whole record
        for (const std::string& t : feederTypes) {
            if (t.empty()) {
                add("R6", Finding::Severity::Error, {e.id, join(path, ".")},
                    "a control token (no payload) can reach this guard");
                return;
            }
            if (!class_has_path(t, path, from, nullptr)) {
                add("R6", Finding::Severity::Error, {e.id, join(path, ".")},
                    "token type '" + t + "' has no field '" + join(path, ".") + "'");
                return;
            }
        }
    }

    // Literal comparisons against fields with known builtin types.
    void check_guard_literal_types(const Activity& a, const Edge& e,
                                   const std::set<std::string>& feederTypes) {
        walk_literal_types(a, e, *e.guard, feederTypes);
    }
    void walk_literal_types(const Activity& a, const Edge& e, const Expr& g,
                            const std::set<std::string>& feederTypes) {
        if (g.kind == Expr::Kind::Not) {
            walk_literal_types(a, e, *g.lhs, feederTypes);
            return;
        }
        if (g.kind != Expr::Kind::Bin) return;
        bool cmp = g.op == BinOp::Eq || g.op == BinOp::Ne || g.op == BinOp::Lt ||
                   g.op == BinOp::Le || g.op == BinOp::Gt || g.op == BinOp::Ge;
        if (!cmp) {
            walk_literal_types(a, e, *g.lhs, feederTypes);
            walk_literal_types(a, e, *g.rhs, feederTypes);
            return;
        }
        const Expr* ref = nullptr;
        const Expr* lit = nullptr;
        for (const Expr* side : {g.lhs.get(), g.rhs.get()}) {
            if (side->kind == Expr::Kind::Ref) ref = side;
            if (side->kind == Expr::Kind::Int || side->kind == Expr::Kind::Str ||
                side->kind == Expr::Kind::Bool)
                lit = side;
        }
        if (!ref || !lit) return;
        std::string refType = ref_builtin_type(a, ref->path, feederTypes);
        if (refType.empty()) return;  // not statically known
        std::string litType = lit->kind == Expr::Kind::Int    ? "int"
                              : lit->kind == Expr::Kind::Str  ? "string"
                                                              : "bool";
        if (refType != litType)
            add("R6", Finding::Severity::Error, {e.id, to_text(g)},
                "comparison of " + refType + " field with " + litType + " literal");
    }

    std::string ref_builtin_type(const Activity& a, const std::vector<std::string>& path,
                                 const std::set<std::string>& feederTypes) const {
        const std::string& root = path[0];
        std::string leaf;
        if (root != "payload" && idx_.find_variable(a, root)) {
            const VariableDecl* v = idx_.find_variable(a, root);
            if (path.size() == 1) leaf = v->type;
            else if (!class_has_path(v->type, path, 1, &leaf)) return "";
        } else {
            size_t from = root == "payload" ? 1 : 0;
            if (feederTypes.size() != 1) return "";
            const std::string& t = *feederTypes.begin();
            if (t.empty() || !class_has_path(t, path, from, &leaf)) return "";
        }
        if (leaf == "int" || leaf == "bool" || leaf == "string") return leaf;
        return "";
    }

    void check_measure_refs() {
        std::vector<measures::MeasureDecl> decls;
        try {
            decls = measures::collect_measures(m_);
        } catch (const ParseError&) {
            return;  // grammar/duplicates already rejected at parse time
        }
        std::set<std::string> allNames;
        for (const auto& d : decls) allNames.insert(d.name);
        for (const auto& d : decls) {
            if (!d.expr) continue;
            std::vector<std::string> refs;
            collect_measure_refs(*d.expr, refs);
            for (const std::string& r : refs) {
                if (measures::is_probe_name(r)) continue;
                if (allNames.count(r)) continue;
                add("R5", Finding::Severity::Error, {d.owner, d.name},
                    "measure references '" + r + "', which is neither a declared measure "
                    "nor a probe");
            }
        }
    }

    void collect_measure_refs(const measures::MExpr& e, std::vector<std::string>& out) {
        if (e.kind == measures::MExpr::Kind::Ref || e.kind == measures::MExpr::Kind::Agg)
            out.push_back(e.ref);
        if (e.lhs) collect_measure_refs(*e.lhs, out);
        if (e.rhs) collect_measure_refs(*e.rhs, out);
    }

    const ProcessModel& m_;
    ModelIndex idx_;
    ValidationReport report_;
};

}  // namespace detail

inline ValidationReport validate(const ProcessModel& m) {
    detail::Validator v(m);
    return v.run();
}

}  // namespace flowkit
