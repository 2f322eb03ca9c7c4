#pragma once

// In-memory representation of a workflow process model: data classes, signal
// types, performers, and activities built from actions, events, control nodes,
// pins and edges. The structure mirrors the document format one-to-one (see
// model_io.hpp); parse/serialize round-trip without loss.
//
// Identifier discipline: performer ids, activity ids, node ids, pin ids and
// edge ids all share one namespace and are unique across the model. Class and
// signal names are unique among themselves. Variable names are unique within
// their activity.

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "flowkit/common.hpp"
#include "flowkit/expr.hpp"
#include "flowkit/value.hpp"

namespace flowkit {

struct DataField {
    std::string name;
    std::string type;  // "int" | "bool" | "string" | class name | "list"
};

struct DataClass {
    std::string name;
    std::vector<DataField> fields;
};

struct SignalType {
    std::string name;
    std::vector<std::string> fields;
};

enum class PerformerKind { Position, OrgUnit, Resource };

struct Performer {
    std::string id;
    std::string name;
    PerformerKind kind = PerformerKind::Position;
    std::vector<std::string> measures;  // raw declaration strings
};

struct VariableDecl {
    std::string name;
    std::string type;
    std::optional<Value> init;
};

enum class PinDir { In, Out };

struct Pin {
    std::string id;
    PinDir dir = PinDir::In;
    std::string type;  // empty = control pin (no data)
};

// `target := expr`, executed when the owning action completes. Targets are
// either a variable path (`order.total`) or an output-pin field (`out1.total`).
struct Assignment {
    std::string targetText;
    std::string exprText;
    std::vector<std::string> target;
    ExprPtr expr;
};

enum class NodeKind {
    Action,    // atomic step, sub-activity call, or service/user/manual task
    Send,      // sends a signal to another process; consumes its input token
    Accept,    // waits for a signal; arms when its input pin holds a token
    ForEach,   // runs a body activity once per element of a list variable
    Initial,
    Final,
    Param,     // activity parameter node
    Decision,
    Merge,
    Fork,
    Join,
};

enum class ActionKind { Plain, Service, User, Manual };

struct Node {
    std::string id;
    NodeKind kind = NodeKind::Action;
    std::string name;  // display name; empty for control nodes

    // Action
    ActionKind actionKind = ActionKind::Plain;
    std::string performer;           // performer id, optional
    int64_t duration = 1;            // ticks from start to completion
    std::string calls;               // invoked activity id, empty for atomic
    std::vector<Assignment> assignments;
    std::vector<std::string> measures;  // raw declaration strings

    // Send / Accept
    std::string signal;
    std::string targetActivity;  // send: receiving process's activity id
    bool endAction = false;      // send: terminate own instance after sending
    bool interrupting = false;   // accept: aborts the action it interrupts
    std::string interrupts;      // accept: id of the call action it interrupts

    // Param
    PinDir paramDir = PinDir::In;
    std::string paramType;

    // ForEach
    std::string collection;  // list-typed variable name
    std::string body;        // activity id run per element

    std::vector<Pin> pins;
};

struct Edge {
    std::string id;
    std::string source;  // out-pin id or control-node id
    std::string target;  // in-pin id or control-node id
    std::string guardText;  // only on edges from decisions / accept output pins
    ExprPtr guard;
    bool objectFlow = false;
};

struct Activity {
    std::string id;
    std::string name;
    bool main = false;  // top-level process, instantiated by the coordinator
    std::vector<VariableDecl> variables;
    std::vector<Node> nodes;
    std::vector<Edge> edges;
    std::vector<std::string> measures;  // raw declaration strings
};

struct ProcessModel {
    std::string id;
    std::vector<DataClass> classes;
    std::vector<SignalType> signals;
    std::vector<Performer> performers;
    std::vector<Activity> activities;
};

inline bool is_control(NodeKind k) {
    return k == NodeKind::Decision || k == NodeKind::Merge || k == NodeKind::Fork ||
           k == NodeKind::Join;
}

// Fast id lookups over an immutable model. Build once after parsing; the
// referenced model must outlive the index.
struct ModelIndex {
    const ProcessModel* model = nullptr;
    std::map<std::string, const Activity*> activity;
    std::map<std::string, const DataClass*> dataClass;
    std::map<std::string, const SignalType*> signal;
    std::map<std::string, const Performer*> performer;
    std::map<std::string, const Node*> node;             // node id -> node
    std::map<std::string, const Activity*> nodeOwner;    // node id -> activity
    std::map<std::string, const Pin*> pin;               // pin id -> pin
    std::map<std::string, const Node*> pinOwner;         // pin id -> node
    std::map<std::string, const Edge*> edge;
    std::map<std::string, const Activity*> edgeOwner;
    std::map<std::string, std::vector<const Edge*>> edgesFrom;  // by source id
    std::map<std::string, std::vector<const Edge*>> edgesInto;  // by target id

    ModelIndex() = default;
    explicit ModelIndex(const ProcessModel& m) : model(&m) {
        for (const auto& c : m.classes) dataClass[c.name] = &c;
        for (const auto& s : m.signals) signal[s.name] = &s;
        for (const auto& p : m.performers) performer[p.id] = &p;
        for (const auto& a : m.activities) {
            activity[a.id] = &a;
            for (const auto& n : a.nodes) {
                node[n.id] = &n;
                nodeOwner[n.id] = &a;
                for (const auto& p : n.pins) {
                    pin[p.id] = &p;
                    pinOwner[p.id] = &n;
                }
            }
            for (const auto& e : a.edges) {
                edge[e.id] = &e;
                edgeOwner[e.id] = &a;
                edgesFrom[e.source].push_back(&e);
                edgesInto[e.target].push_back(&e);
            }
        }
        // Deterministic order for traversals that iterate per-endpoint edges.
        for (auto& [k, v] : edgesFrom)
            std::sort(v.begin(), v.end(),
                      [](const Edge* a, const Edge* b) { return a->id < b->id; });
        for (auto& [k, v] : edgesInto)
            std::sort(v.begin(), v.end(),
                      [](const Edge* a, const Edge* b) { return a->id < b->id; });
    }

    const VariableDecl* find_variable(const Activity& a, const std::string& name) const {
        for (const auto& v : a.variables)
            if (v.name == name) return &v;
        return nullptr;
    }
    const Pin* find_pin(const Node& n, PinDir dir, size_t idx = 0) const {
        size_t seen = 0;
        for (const auto& p : n.pins)
            if (p.dir == dir && seen++ == idx) return &p;
        return nullptr;
    }
    std::vector<const Pin*> pins_of(const Node& n, PinDir dir) const {
        std::vector<const Pin*> out;
        for (const auto& p : n.pins)
            if (p.dir == dir) out.push_back(&p);
        return out;
    }
    const std::vector<const Edge*>& out_edges(const std::string& id) const {
        static const std::vector<const Edge*> none;
        auto it = edgesFrom.find(id);
        return it == edgesFrom.end() ? none : it->second;
    }
    const std::vector<const Edge*>& in_edges(const std::string& id) const {
        static const std::vector<const Edge*> none;
        auto it = edgesInto.find(id);
        return it == edgesInto.end() ? none : it->second;
    }
};

namespace detail {

inline bool assignments_equal(const std::vector<Assignment>& a, const std::vector<Assignment>& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i)
        if (a[i].target != b[i].target || !expr_equal(a[i].expr, b[i].expr)) return false;
    return true;
}

inline bool nodes_equal(const Node& a, const Node& b) {
    if (a.id != b.id || a.kind != b.kind || a.name != b.name) return false;
    if (a.actionKind != b.actionKind || a.performer != b.performer ||
        a.duration != b.duration || a.calls != b.calls)
        return false;
    if (!assignments_equal(a.assignments, b.assignments) || a.measures != b.measures)
        return false;
    if (a.signal != b.signal || a.targetActivity != b.targetActivity ||
        a.endAction != b.endAction || a.interrupting != b.interrupting ||
        a.interrupts != b.interrupts)
        return false;
    if (a.paramDir != b.paramDir || a.paramType != b.paramType) return false;
    if (a.collection != b.collection || a.body != b.body) return false;
    if (a.pins.size() != b.pins.size()) return false;
    // Pin order carries no meaning (call-site binding sorts by id), so
    // compare the sorted sequences.
    std::vector<const Pin*> pa, pb;
    for (const Pin& p : a.pins) pa.push_back(&p);
    for (const Pin& p : b.pins) pb.push_back(&p);
    auto byId = [](const Pin* x, const Pin* y) { return x->id < y->id; };
    std::sort(pa.begin(), pa.end(), byId);
    std::sort(pb.begin(), pb.end(), byId);
    for (size_t i = 0; i < pa.size(); ++i) {
        if (pa[i]->id != pb[i]->id || pa[i]->dir != pb[i]->dir || pa[i]->type != pb[i]->type)
            return false;
    }
    return true;
}

}  // namespace detail

namespace detail {

template <typename T, typename Key>
std::vector<const T*> sorted_ptrs(const std::vector<T>& v, Key key) {
    std::vector<const T*> out;
    out.reserve(v.size());
    for (const T& e : v) out.push_back(&e);
    std::sort(out.begin(), out.end(),
              [&key](const T* x, const T* y) { return key(*x) < key(*y); });
    return out;
}

}  // namespace detail

// Structural equality: identical ids, wiring, expressions (as trees) and
// values. Element order and raw expression text are ignored, so reformatted
// or re-serialized documents compare equal after parsing. Assignment order
// is significant (assignments execute in sequence).
inline bool structural_equal(const ProcessModel& a, const ProcessModel& b) {
    if (a.id != b.id) return false;
    if (a.classes.size() != b.classes.size() || a.signals.size() != b.signals.size() ||
        a.performers.size() != b.performers.size() ||
        a.activities.size() != b.activities.size())
        return false;
    auto byName = [](const auto& x) { return x.name; };
    auto byId = [](const auto& x) { return x.id; };
    auto ca = detail::sorted_ptrs(a.classes, byName);
    auto cb = detail::sorted_ptrs(b.classes, byName);
    for (size_t i = 0; i < ca.size(); ++i) {
        if (ca[i]->name != cb[i]->name) return false;
        const auto& fa = ca[i]->fields;
        const auto& fb = cb[i]->fields;
        if (fa.size() != fb.size()) return false;
        for (size_t j = 0; j < fa.size(); ++j)
            if (fa[j].name != fb[j].name || fa[j].type != fb[j].type) return false;
    }
    auto sa = detail::sorted_ptrs(a.signals, byName);
    auto sb = detail::sorted_ptrs(b.signals, byName);
    for (size_t i = 0; i < sa.size(); ++i)
        if (sa[i]->name != sb[i]->name || sa[i]->fields != sb[i]->fields) return false;
    auto pa = detail::sorted_ptrs(a.performers, byId);
    auto pb = detail::sorted_ptrs(b.performers, byId);
    for (size_t i = 0; i < pa.size(); ++i) {
        if (pa[i]->id != pb[i]->id || pa[i]->name != pb[i]->name ||
            pa[i]->kind != pb[i]->kind || pa[i]->measures != pb[i]->measures)
            return false;
    }
    auto aas = detail::sorted_ptrs(a.activities, byId);
    auto abs = detail::sorted_ptrs(b.activities, byId);
    for (size_t i = 0; i < aas.size(); ++i) {
        const Activity& aa = *aas[i];
        const Activity& ab = *abs[i];
        if (aa.id != ab.id || aa.name != ab.name || aa.main != ab.main ||
            aa.measures != ab.measures)
            return false;
        if (aa.variables.size() != ab.variables.size() || aa.nodes.size() != ab.nodes.size() ||
            aa.edges.size() != ab.edges.size())
            return false;
        auto va = detail::sorted_ptrs(aa.variables, byName);
        auto vb = detail::sorted_ptrs(ab.variables, byName);
        for (size_t j = 0; j < va.size(); ++j) {
            if (va[j]->name != vb[j]->name || va[j]->type != vb[j]->type ||
                va[j]->init != vb[j]->init)
                return false;
        }
        auto na = detail::sorted_ptrs(aa.nodes, byId);
        auto nb = detail::sorted_ptrs(ab.nodes, byId);
        for (size_t j = 0; j < na.size(); ++j)
            if (!detail::nodes_equal(*na[j], *nb[j])) return false;
        auto ea = detail::sorted_ptrs(aa.edges, byId);
        auto eb = detail::sorted_ptrs(ab.edges, byId);
        for (size_t j = 0; j < ea.size(); ++j) {
            if (ea[j]->id != eb[j]->id || ea[j]->source != eb[j]->source ||
                ea[j]->target != eb[j]->target || !expr_equal(ea[j]->guard, eb[j]->guard) ||
                ea[j]->objectFlow != eb[j]->objectFlow)
                return false;
        }
    }
    return true;
}

// The zero value of a declared type: 0, false, "", a record with all fields
// defaulted, or an empty list. Used for unbound parameters and for staging
// output payloads before assignments fill them in.
inline Value default_value_for_type(const ModelIndex& idx, const std::string& type) {
    if (type == "int" || type.empty()) return Value{int64_t{0}};
    if (type == "bool") return Value{false};
    if (type == "string") return Value{std::string{}};
    if (type.rfind("list<", 0) == 0) return Value{List{}};
    auto it = idx.dataClass.find(type);
    if (it == idx.dataClass.end()) return Value{Record{}};
    Record r;
    for (const DataField& f : it->second->fields)
        r[f.name] = default_value_for_type(idx, f.type);
    return Value{std::move(r)};
}

}  // namespace flowkit
