#pragma once

// Random well-formed process models for property testing. Generation starts
// from a minimal initial -> action -> final skeleton and applies a number of
// rewrites, each of which replaces one edge by a larger construct that keeps
// every structural restriction intact by construction:
//
//   * action insertion         s -> A -> t
//   * parallel section         s -> fork -> (A | B | ...) -> join -> t
//   * guarded alternative      s -> decision -> (A | B | skip) -> merge -> t
//                              guards are equality tests on a fresh int
//                              variable, so exclusivity is provable and the
//                              branch taken is fixed by the variable's seed
//   * sub-process call         s -> call C -> t, with a fresh linear callee
//   * element loop             s -> loop over a fresh list variable -> t
//
// Because branches always carry an action between a fork and a join, no
// stable-to-stable control run ever mixes the two; edges are only ever
// spliced, so no cycles appear; and every construct is total, so a generated
// model runs to completion under any seed. The RNG is a seeded mt19937_64
// used via explicit modulo, making output reproducible across platforms.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "flowkit/expr.hpp"
#include "flowkit/model.hpp"

namespace flowkit {

struct GenOptions {
    uint64_t seed = 1;
    int rewrites = 6;
};

class ModelGenerator {
  public:
    explicit ModelGenerator(const GenOptions& opts) : opts_(opts), rng_(opts.seed) {}

    ProcessModel generate() {
        model_ = ProcessModel{};
        model_.id = "generated-" + std::to_string(opts_.seed);
        model_.performers.push_back({"gp1", "worker", PerformerKind::Position, {}});

        Activity main;
        main.id = "GenMain";
        main.main = true;
        main.nodes.push_back(initial_node("n0"));
        main.nodes.push_back(action_node(next_action(), pick(4)));
        main.nodes.back().performer = "gp1";
        main.nodes.push_back(final_node("nf"));
        main.edges.push_back(edge(next_edge(), "n0_out", main.nodes[1].pins[0].id));
        main.edges.push_back(edge(next_edge(), main.nodes[1].pins[1].id, "nf_in"));
        model_.activities.push_back(std::move(main));

        for (int i = 0; i < opts_.rewrites; ++i) rewrite_once();
        return std::move(model_);
    }

  private:
    GenOptions opts_;
    std::mt19937_64 rng_;
    ProcessModel model_;
    int actionN_ = 0, edgeN_ = 0, ctrlN_ = 0, varN_ = 0, subN_ = 0;

    uint64_t pick(uint64_t n) { return rng_() % n; }

    std::string next_action() { return "ga" + std::to_string(++actionN_); }
    std::string next_edge() { return "ge" + std::to_string(++edgeN_); }
    std::string next_ctrl(const char* stem) { return stem + std::to_string(++ctrlN_); }
    std::string next_var() { return "gv" + std::to_string(++varN_); }

    Activity& main() { return model_.activities[0]; }

    static Node initial_node(const std::string& id) {
        Node n;
        n.id = id;
        n.kind = NodeKind::Initial;
        n.pins.push_back({id + "_out", PinDir::Out, ""});
        return n;
    }

    static Node final_node(const std::string& id) {
        Node n;
        n.id = id;
        n.kind = NodeKind::Final;
        n.pins.push_back({id + "_in", PinDir::In, ""});
        return n;
    }

    static Node action_node(const std::string& id, int64_t duration) {
        Node n;
        n.id = id;
        n.kind = NodeKind::Action;
        n.duration = duration;
        n.pins.push_back({id + "_in", PinDir::In, ""});
        n.pins.push_back({id + "_out", PinDir::Out, ""});
        return n;
    }

    static Node control_node(const std::string& id, NodeKind kind) {
        Node n;
        n.id = id;
        n.kind = kind;
        return n;
    }

    static Edge edge(const std::string& id, const std::string& source,
                     const std::string& target, const std::string& guardText = "") {
        Edge e;
        e.id = id;
        e.source = source;
        e.target = target;
        if (!guardText.empty()) {
            e.guardText = guardText;
            e.guard = parse_guard(guardText);
        }
        return e;
    }

    // Redirect one existing edge into a new construct ending at `exit`; the
    // original edge keeps its id, guard and source.
    Edge& cut(size_t edgeIdx, const std::string& entry) {
        Edge& e = main().edges[edgeIdx];
        e.target = entry;
        return e;
    }

    void rewrite_once() {
        size_t edgeIdx = pick(main().edges.size());
        switch (pick(9)) {
            case 0:
            case 1:
            case 2:
                insert_action(edgeIdx);
                break;
            case 3:
            case 4:
                insert_parallel(edgeIdx);
                break;
            case 5:
            case 6:
                insert_alternative(edgeIdx);
                break;
            case 7:
                insert_call(edgeIdx);
                break;
            default:
                insert_loop(edgeIdx);
                break;
        }
    }

    void insert_action(size_t edgeIdx) {
        Node a = action_node(next_action(), pick(4));
        if (pick(3) == 0) a.performer = "gp1";
        std::string target = main().edges[edgeIdx].target;
        cut(edgeIdx, a.pins[0].id);
        main().edges.push_back(edge(next_edge(), a.pins[1].id, target));
        main().nodes.push_back(std::move(a));
    }

    const Node* control_at(const std::string& id) const {
        for (const Node& n : model_.activities[0].nodes)
            if (n.id == id) return is_control(n.kind) ? &n : nullptr;
        return nullptr;  // a pin: the run ends here
    }

    bool join_upstream(const std::string& id) const {
        const Node* n = control_at(id);
        if (!n) return false;
        if (n->kind == NodeKind::Join) return true;
        for (const Edge& e : model_.activities[0].edges)
            if (e.target == id && join_upstream(e.source)) return true;
        return false;
    }

    bool fork_downstream(const std::string& id) const {
        const Node* n = control_at(id);
        if (!n) return false;
        if (n->kind == NodeKind::Fork) return true;
        for (const Edge& e : model_.activities[0].edges)
            if (e.source == id && fork_downstream(e.target)) return true;
        return false;
    }

    void insert_parallel(size_t edgeIdx) {
        // A fork may not share a control run with a join. The new fork joins
        // the run upstream of the cut, the new join the run downstream; if
        // either already has the other kind, put a plain action there instead.
        if (join_upstream(main().edges[edgeIdx].source) ||
            fork_downstream(main().edges[edgeIdx].target)) {
            insert_action(edgeIdx);
            return;
        }
        std::string forkId = next_ctrl("gf");
        std::string joinId = next_ctrl("gj");
        std::string target = main().edges[edgeIdx].target;
        cut(edgeIdx, forkId);

        size_t branches = 2 + pick(2);
        for (size_t b = 0; b < branches; ++b) {
            Node a = action_node(next_action(), pick(4));
            main().edges.push_back(edge(next_edge(), forkId, a.pins[0].id));
            main().edges.push_back(edge(next_edge(), a.pins[1].id, joinId));
            main().nodes.push_back(std::move(a));
        }
        main().edges.push_back(edge(next_edge(), joinId, target));
        main().nodes.push_back(control_node(forkId, NodeKind::Fork));
        main().nodes.push_back(control_node(joinId, NodeKind::Join));
    }

    void insert_alternative(size_t edgeIdx) {
        std::string decisionId = next_ctrl("gd");
        std::string mergeId = next_ctrl("gm");
        std::string var = next_var();
        main().variables.push_back({var, "int", Value{static_cast<int64_t>(pick(3))}});

        std::string target = main().edges[edgeIdx].target;
        cut(edgeIdx, decisionId);

        for (int b = 0; b < 2; ++b) {
            Node a = action_node(next_action(), pick(4));
            main().edges.push_back(edge(next_edge(), decisionId, a.pins[0].id,
                                        var + " = " + std::to_string(b)));
            main().edges.push_back(edge(next_edge(), a.pins[1].id, mergeId));
            main().nodes.push_back(std::move(a));
        }
        main().edges.push_back(edge(next_edge(), decisionId, mergeId, "else"));
        main().edges.push_back(edge(next_edge(), mergeId, target));
        main().nodes.push_back(control_node(decisionId, NodeKind::Decision));
        main().nodes.push_back(control_node(mergeId, NodeKind::Merge));
    }

    // Callee with one untyped input and one untyped output parameter, so a
    // plain one-in/one-out call action lines up with its arity.
    std::string linear_sub_activity() {
        std::string id = "GenSub" + std::to_string(++subN_);
        std::string p = "s" + std::to_string(subN_) + "_";
        Activity sub;
        sub.id = id;
        Node pin;
        pin.id = p + "in";
        pin.kind = NodeKind::Param;
        pin.paramDir = PinDir::In;
        pin.pins.push_back({p + "in_out", PinDir::Out, ""});
        sub.nodes.push_back(std::move(pin));
        Node a = action_node(p + "a", pick(3));
        sub.nodes.push_back(a);
        Node pout;
        pout.id = p + "out";
        pout.kind = NodeKind::Param;
        pout.paramDir = PinDir::Out;
        pout.pins.push_back({p + "out_in", PinDir::In, ""});
        sub.nodes.push_back(std::move(pout));
        sub.edges.push_back(edge(p + "e1", p + "in_out", a.pins[0].id));
        sub.edges.push_back(edge(p + "e2", a.pins[1].id, p + "out_in"));
        model_.activities.push_back(std::move(sub));
        return id;
    }

    std::string element_sub_activity() {
        std::string id = "GenSub" + std::to_string(++subN_);
        std::string p = "s" + std::to_string(subN_) + "_";
        Activity sub;
        sub.id = id;
        Node param;
        param.id = p + "in";
        param.kind = NodeKind::Param;
        param.paramDir = PinDir::In;
        param.paramType = "int";
        param.pins.push_back({p + "in_out", PinDir::Out, "int"});
        sub.nodes.push_back(std::move(param));
        Node a = action_node(p + "a", pick(3));
        a.pins[0].type = "int";
        sub.nodes.push_back(a);
        sub.nodes.push_back(final_node(p + "f"));
        sub.edges.push_back(edge(p + "e1", p + "in_out", a.pins[0].id));
        sub.edges.push_back(edge(p + "e2", a.pins[1].id, p + "f_in"));
        model_.activities.push_back(std::move(sub));
        return id;
    }

    void insert_call(size_t edgeIdx) {
        Node c = action_node(next_action(), 1);
        c.calls = linear_sub_activity();
        std::string target = main().edges[edgeIdx].target;
        cut(edgeIdx, c.pins[0].id);
        main().edges.push_back(edge(next_edge(), c.pins[1].id, target));
        main().nodes.push_back(std::move(c));
    }

    void insert_loop(size_t edgeIdx) {
        std::string var = next_var();
        List elems;
        size_t count = 1 + pick(2);
        for (size_t i = 0; i < count; ++i)
            elems.push_back(Value{static_cast<int64_t>(i + 1)});
        main().variables.push_back({var, "list<int>", Value{elems}});

        Node lp;
        lp.id = "gl" + std::to_string(++ctrlN_);
        lp.kind = NodeKind::ForEach;
        lp.collection = var;
        lp.body = element_sub_activity();
        lp.pins.push_back({lp.id + "_in", PinDir::In, ""});
        lp.pins.push_back({lp.id + "_out", PinDir::Out, ""});

        std::string target = main().edges[edgeIdx].target;
        cut(edgeIdx, lp.pins[0].id);
        main().edges.push_back(edge(next_edge(), lp.pins[1].id, target));
        main().nodes.push_back(std::move(lp));
    }
};

inline ProcessModel generate_model(const GenOptions& opts) {
    return ModelGenerator(opts).generate();
}

inline ProcessModel generate_model(uint64_t seed, int rewrites = 6) {
    return generate_model(GenOptions{seed, rewrites});
}

}  // namespace flowkit
