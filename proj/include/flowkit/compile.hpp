#pragma once

// Compilation of a validated model into its run-time template: stable places,
// truncated paths, pull groups, and the definition-to-runtime mapping.
//
// Tokens only ever rest at stable places — pins, the initial node's output,
// the final node's input, and parameter nodes. Control nodes are "unstable":
// the compiler dissolves them into *paths* between stable places. A path
// whose interior contains only decisions, merges and forks (or nothing) is a
// *push* path, serviced at its source the moment a token satisfies it; a path
// containing a join is a *pull* path, serviced at its destination once every
// member of the join's group can be satisfied simultaneously. Both engines
// evaluate the same path condition: the conjunction of the guards along the
// path's edges, with `else` rewritten to the negated disjunction of its
// sibling guards.
//
// Models reaching compile() must be parseable and free of validation errors;
// compile re-checks and refuses otherwise, since the path enumeration relies
// on R1-R4 (single out-edge per pin, acyclic control runs, no fork+join mix,
// guarded decisions).

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "flowkit/common.hpp"
#include "flowkit/expr.hpp"
#include "flowkit/model.hpp"
#include "flowkit/validate.hpp"

namespace flowkit {

enum class PlaceKind { InputPin, OutputPin, InitialOut, FinalIn, ParameterNode };

struct StablePlace {
    std::string id;    // equals the pin id it stands for
    PlaceKind kind;
    std::string node;  // owning node
};

struct CompiledPath {
    std::string id;                  // "p0001"... unique across the model
    std::string source, dest;        // place ids
    std::vector<std::string> via;    // interior control nodes, in order
    std::vector<std::string> edges;  // edge ids, in order
    ExprPtr condition;               // null = unconditional
    std::string conditionText;       // "true" when unconditional
    bool pull = false;
};

struct PullGroupSpec {
    std::string id;      // "g_" + destination place
    std::string dest;    // destination place (an input pin)
    std::vector<size_t> paths;  // indices into CompiledActivity::paths
};

struct CompiledActivity {
    std::string activity;
    std::vector<StablePlace> places;  // sorted by id
    std::vector<CompiledPath> paths;  // in enumeration (= id) order
    std::map<std::string, size_t> placeIndex;
    std::map<std::string, size_t> pathIndex;
    std::map<std::string, std::vector<size_t>> pushFrom;   // source place -> push paths
    std::map<std::string, PullGroupSpec> pullGroups;       // dest place -> group

    const StablePlace* place(const std::string& id) const {
        auto it = placeIndex.find(id);
        return it == placeIndex.end() ? nullptr : &places[it->second];
    }
};

struct MappingLink {
    std::string def;      // definition element id (pin, edge, node)
    std::string kind;     // "place", "path", "actionSpec"
    std::string runtime;  // runtime element id
};

struct CompiledModel {
    const ProcessModel* source = nullptr;  // must outlive the compiled model
    ModelIndex idx;
    std::map<std::string, CompiledActivity> activities;
    std::vector<MappingLink> links;
    std::vector<std::string> warnings;
};

// The condition of a path given as its ordered edge ids: the conjunction of
// all guards along it. `else` guards become the negated disjunction of the
// sibling branches' guards. Exposed separately so tests can cross-check any
// edge sequence against the compiler's output.
inline std::pair<ExprPtr, std::string> path_condition(const ModelIndex& idx,
                                                      const std::vector<std::string>& edgeIds) {
    ExprPtr acc;
    for (size_t i = 0; i < edgeIds.size(); ++i) {
        const Edge* e = idx.edge.count(edgeIds[i]) ? idx.edge.at(edgeIds[i]) : nullptr;
        if (!e) throw LogicError("unknown edge in path: " + edgeIds[i]);
        if (i > 0) {
            const Edge* prev = idx.edge.at(edgeIds[i - 1]);
            if (prev->target != e->source)
                throw LogicError("path edges are not contiguous: " + prev->id + " -> " + e->id);
        }
        ExprPtr g = e->guard;
        if (g && g->kind == Expr::Kind::Else) {
            // Negated disjunction of the sibling guards.
            ExprPtr dis;
            for (const Edge* sib : idx.out_edges(e->source)) {
                if (sib == e || !sib->guard || sib->guard->kind == Expr::Kind::Else) continue;
                dis = dis ? Expr::make_bin(BinOp::Or, dis, sib->guard) : sib->guard;
            }
            g = dis ? Expr::make_not(dis) : Expr::make_bool(true);
        }
        if (g) acc = acc ? Expr::make_bin(BinOp::And, acc, g) : g;
    }
    return {acc, acc ? to_text(*acc) : "true"};
}

namespace detail {

inline std::string path_id(size_t n) {
    std::string num = std::to_string(n);
    while (num.size() < 4) num.insert(num.begin(), '0');
    return "p" + num;
}

struct Compiler {
    const ProcessModel& m;
    ModelIndex idx;
    CompiledModel out;
    size_t pathCounter = 0;

    explicit Compiler(const ProcessModel& model) : m(model), idx(model) {}

    CompiledModel run() {
        ValidationReport report = validate(m);
        if (report.has_errors()) {
            std::string msg = "model has validation errors:";
            for (const Finding& f : report.findings)
                if (f.severity == Finding::Severity::Error) msg += "\n  " + to_text(f);
            throw ParseError(m.id, msg);
        }
        out.source = &m;
        out.idx = ModelIndex(m);
        for (const Activity* a : sorted_ptrs(m.activities, [](const Activity& x) { return x.id; }))
            compile_activity(*a);
        return std::move(out);
    }

    static PlaceKind place_kind(const Node& owner, const Pin& p) {
        switch (owner.kind) {
            case NodeKind::Initial: return PlaceKind::InitialOut;
            case NodeKind::Final: return PlaceKind::FinalIn;
            case NodeKind::Param: return PlaceKind::ParameterNode;
            default: return p.dir == PinDir::In ? PlaceKind::InputPin : PlaceKind::OutputPin;
        }
    }

    void compile_activity(const Activity& a) {
        CompiledActivity ca;
        ca.activity = a.id;
        for (const Node& n : a.nodes)
            for (const Pin& p : n.pins) ca.places.push_back({p.id, place_kind(n, p), n.id});
        std::sort(ca.places.begin(), ca.places.end(),
                  [](const StablePlace& x, const StablePlace& y) { return x.id < y.id; });
        for (size_t i = 0; i < ca.places.size(); ++i) ca.placeIndex[ca.places[i].id] = i;

        for (const StablePlace& sp : ca.places) {
            const Pin* pin = idx.pin.at(sp.id);
            if (pin->dir != PinDir::Out) continue;
            const auto& outs = idx.out_edges(sp.id);
            if (outs.empty()) continue;
            std::vector<std::string> via, edges;
            walk(ca, sp.id, *outs[0], via, edges);
        }

        for (size_t i = 0; i < ca.paths.size(); ++i) {
            const CompiledPath& p = ca.paths[i];
            ca.pathIndex[p.id] = i;
            if (p.pull) {
                PullGroupSpec& g = ca.pullGroups[p.dest];
                if (g.id.empty()) {
                    g.id = "g_" + p.dest;
                    g.dest = p.dest;
                }
                g.paths.push_back(i);
            } else {
                ca.pushFrom[p.source].push_back(i);
            }
        }

        // Definition-to-runtime mapping.
        for (const StablePlace& sp : ca.places)
            out.links.push_back({sp.id, "place", sp.id});
        for (const CompiledPath& p : ca.paths) {
            for (const std::string& e : p.edges) out.links.push_back({e, "path", p.id});
            for (const std::string& n : p.via) out.links.push_back({n, "path", p.id});
        }
        for (const Node& n : a.nodes) {
            switch (n.kind) {
                case NodeKind::Action:
                case NodeKind::Send:
                case NodeKind::Accept:
                case NodeKind::ForEach:
                case NodeKind::Initial:
                case NodeKind::Final:
                case NodeKind::Param:
                    out.links.push_back({n.id, "actionSpec", n.id});
                    break;
                default: break;  // control nodes live on in the paths above
            }
        }
        out.activities.emplace(a.id, std::move(ca));
    }

    void walk(CompiledActivity& ca, const std::string& source, const Edge& e,
              std::vector<std::string>& via, std::vector<std::string>& edges) {
        edges.push_back(e.id);
        if (idx.pin.count(e.target)) {
            emit(ca, source, e.target, via, edges);
        } else {
            const Node* c = idx.node.at(e.target);
            via.push_back(c->id);
            for (const Edge* next : idx.out_edges(c->id)) walk(ca, source, *next, via, edges);
            via.pop_back();
        }
        edges.pop_back();
    }

    void emit(CompiledActivity& ca, const std::string& source, const std::string& dest,
              const std::vector<std::string>& via, const std::vector<std::string>& edges) {
        CompiledPath p;
        p.id = path_id(++pathCounter);
        p.source = source;
        p.dest = dest;
        p.via = via;
        p.edges = edges;
        auto [cond, text] = path_condition(idx, edges);
        p.condition = cond;
        p.conditionText = text;
        size_t joins = 0;
        for (const std::string& n : via)
            if (idx.node.at(n)->kind == NodeKind::Join) ++joins;
        p.pull = joins > 0;
        if (joins > 1)
            out.warnings.push_back("path " + p.id + " (" + source + " -> " + dest +
                                   ") chains " + std::to_string(joins) +
                                   " joins; the whole chain is serviced as one pull group");
        ca.paths.push_back(std::move(p));
    }
};

}  // namespace detail

inline CompiledModel compile(const ProcessModel& m) {
    detail::Compiler c(m);
    return c.run();
}

// One line per path, activities in id order:
//   PUSH <source> -> <dest> via [n1,n2] when <condition>
inline std::string dump_paths(const CompiledModel& cm) {
    std::string out;
    for (const auto& [actId, ca] : cm.activities) {
        for (const CompiledPath& p : ca.paths) {
            out += p.pull ? "PULL " : "PUSH ";
            out += p.source + " -> " + p.dest + " via [" + join(p.via, ",") + "] when " +
                   p.conditionText + "\n";
        }
    }
    return out;
}

}  // namespace flowkit
