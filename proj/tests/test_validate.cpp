#include <catch2/catch_amalgamated.hpp>

#include "flowkit/model_io.hpp"
#include "flowkit/validate.hpp"

using namespace flowkit;

namespace {

// Small builder for assembling models in-memory (bypasses the document
// parser so tests construct exactly the shape they need).
struct Builder {
    ProcessModel m;
    Activity* act = nullptr;

    Builder(const std::string& modelId, const std::string& activityId) {
        m.id = modelId;
        Activity a;
        a.id = activityId;
        a.main = true;
        m.activities.push_back(a);
        act = &m.activities.back();
    }
    Node& node(const std::string& id, NodeKind kind) {
        Node n;
        n.id = id;
        n.kind = kind;
        act->nodes.push_back(n);
        return act->nodes.back();
    }
    Node& initial(const std::string& id) {
        Node& n = node(id, NodeKind::Initial);
        n.pins.push_back({id + "_out", PinDir::Out, ""});
        return n;
    }
    Node& final_node(const std::string& id) {
        Node& n = node(id, NodeKind::Final);
        n.pins.push_back({id + "_in", PinDir::In, ""});
        return n;
    }
    Node& action(const std::string& id, const std::string& type = "") {
        Node& n = node(id, NodeKind::Action);
        n.pins.push_back({id + "_in", PinDir::In, type});
        n.pins.push_back({id + "_out", PinDir::Out, type});
        return n;
    }
    void edge(const std::string& id, const std::string& src, const std::string& dst,
              const std::string& guard = "") {
        Edge e;
        e.id = id;
        e.source = src;
        e.target = dst;
        if (!guard.empty()) {
            e.guardText = guard;
            e.guard = parse_guard(guard);
        }
        act->edges.push_back(e);
    }
    void variable(const std::string& name, const std::string& type, Value init) {
        act->variables.push_back({name, type, init});
    }
};

std::vector<std::string> rules_of(const ValidationReport& r) {
    std::vector<std::string> out;
    for (const Finding& f : r.findings) out.push_back(f.rule);
    return out;
}

}  // namespace

TEST_CASE("clean linear model yields an empty report") {
    Builder b("ok", "Main");
    b.initial("n_init");
    b.action("a1");
    b.final_node("n_end");
    b.edge("e1", "n_init_out", "a1_in");
    b.edge("e2", "a1_out", "n_end_in");
    ValidationReport r = validate(b.m);
    CHECK(r.findings.empty());
    CHECK_FALSE(r.has_errors());
}

TEST_CASE("R1: a pin with two outgoing edges") {
    Builder b("r1", "Main");
    b.initial("n_init");
    b.action("a1");
    b.action("a2");
    b.final_node("n_end");
    b.edge("e1", "n_init_out", "a1_in");
    b.edge("e2", "n_init_out", "a2_in");
    b.edge("e3", "a1_out", "n_end_in");
    b.edge("e4", "a2_out", "n_end_in");
    ValidationReport r = validate(b.m);
    REQUIRE(rules_of(r) == std::vector<std::string>{"R1"});
    CHECK(r.findings[0].severity == Finding::Severity::Error);
    CHECK(r.findings[0].elements[0] == "n_init_out");
}

TEST_CASE("R2: control-node self loop") {
    Builder b("r2", "Main");
    b.initial("n_init");
    b.node("m1", NodeKind::Merge);
    b.final_node("n_end");
    b.edge("e1", "n_init_out", "m1");
    b.edge("e2", "m1", "m1");
    ValidationReport r = validate(b.m);
    REQUIRE(rules_of(r) == std::vector<std::string>{"R2"});
    CHECK(r.findings[0].elements == std::vector<std::string>{"m1"});
}

TEST_CASE("R2: two-node control cycle") {
    // decision <-> merge loop with an exit branch; every edge is guarded so
    // the only problem is the cycle itself.
    Builder b("r2b", "Main");
    b.variable("x", "int", Value(0));
    b.initial("n_init");
    b.node("m1", NodeKind::Merge);
    b.node("d1", NodeKind::Decision);
    b.action("a1");
    b.final_node("n_end");
    b.edge("e1", "n_init_out", "m1");
    b.edge("e2", "m1", "d1");
    b.edge("e3", "d1", "m1", "x = 1");
    b.edge("e4", "d1", "a1_in", "else");
    b.edge("e5", "a1_out", "n_end_in");
    ValidationReport r = validate(b.m);
    REQUIRE(rules_of(r) == std::vector<std::string>{"R2"});
    CHECK(r.findings[0].elements == std::vector<std::string>{"d1", "m1"});
}

TEST_CASE("R3: fork and join on one stable-to-stable run") {
    Builder b("r3", "Main");
    b.initial("n_init");
    b.node("f1", NodeKind::Fork);
    b.node("j1", NodeKind::Join);
    b.final_node("n_end");
    b.edge("e1", "n_init_out", "f1");
    b.edge("e2", "f1", "j1");
    b.edge("e3", "f1", "j1");
    b.edge("e4", "j1", "n_end_in");
    ValidationReport r = validate(b.m);
    REQUIRE(rules_of(r) == std::vector<std::string>{"R3"});
    CHECK(r.findings[0].elements.front() == "n_init_out");
    CHECK(r.findings[0].elements.back() == "n_end_in");
}

TEST_CASE("R3 clean: fork and join separated by actions") {
    Builder b("r3ok", "Main");
    b.initial("n_init");
    b.node("f1", NodeKind::Fork);
    b.action("a1");
    b.action("a2");
    b.node("j1", NodeKind::Join);
    b.action("a3");
    b.final_node("n_end");
    b.edge("e1", "n_init_out", "f1");
    b.edge("e2", "f1", "a1_in");
    b.edge("e3", "f1", "a2_in");
    b.edge("e4", "a1_out", "j1");
    b.edge("e5", "a2_out", "j1");
    b.edge("e6", "j1", "a3_in");
    b.edge("e7", "a3_out", "n_end_in");
    CHECK(validate(b.m).findings.empty());
}

namespace {

// Independent oracle for R3: enumerate every simple control path between
// stable pins and look for one containing both node kinds.
bool brute_force_fork_join_path(const ProcessModel& m) {
    ModelIndex idx(m);
    bool found = false;
    // DFS collecting kinds along the way
    std::function<void(const std::string&, bool, bool, std::set<std::string>&)> go =
        [&](const std::string& at, bool fork, bool join, std::set<std::string>& seen) {
            for (const Edge* e : idx.out_edges(at)) {
                if (idx.pin.count(e->target)) {
                    if (fork && join) found = true;
                    continue;
                }
                const Node* t = idx.node.at(e->target);
                if (!is_control(t->kind) || seen.count(t->id)) continue;
                seen.insert(t->id);
                go(t->id, fork || t->kind == NodeKind::Fork, join || t->kind == NodeKind::Join,
                   seen);
                seen.erase(t->id);
            }
        };
    for (const Activity& a : m.activities)
        for (const Node& n : a.nodes)
            for (const Pin& p : n.pins)
                if (p.dir == PinDir::Out) {
                    std::set<std::string> seen;
                    go(p.id, false, false, seen);
                }
    return found;
}

}  // namespace

TEST_CASE("R3 agrees with brute-force path enumeration") {
    // join-then-fork in sequence is legal; fork..join nested is not.
    Builder legal("seq", "Main");
    legal.initial("n_init");
    legal.action("a0");
    legal.node("j1", NodeKind::Join);
    legal.action("a1");
    legal.node("f1", NodeKind::Fork);
    legal.action("a2");
    legal.action("a3");
    legal.final_node("n_end");
    legal.edge("e0", "n_init_out", "a0_in");
    legal.edge("e1", "a0_out", "j1");
    legal.edge("e2", "a1_out", "j1");
    legal.edge("e3", "j1", "f1");
    legal.edge("e4", "f1", "a2_in");
    legal.edge("e5", "f1", "a3_in");
    legal.edge("e6", "a2_out", "a1_in");
    legal.edge("e7", "a3_out", "n_end_in");
    // Note: join -> fork directly IS a stable-to-stable segment with both.
    CHECK(brute_force_fork_join_path(legal.m));
    CHECK(validate(legal.m).of_rule("R3").size() > 0);

    Builder clean("clean", "Main");
    clean.initial("n_init");
    clean.node("f1", NodeKind::Fork);
    clean.action("a1");
    clean.action("a2");
    clean.node("j1", NodeKind::Join);
    clean.final_node("n_end");
    clean.edge("e1", "n_init_out", "f1");
    clean.edge("e2", "f1", "a1_in");
    clean.edge("e3", "f1", "a2_in");
    clean.edge("e4", "a1_out", "j1");
    clean.edge("e5", "a2_out", "j1");
    clean.edge("e6", "j1", "n_end_in");
    CHECK_FALSE(brute_force_fork_join_path(clean.m));
    CHECK(validate(clean.m).of_rule("R3").empty());
}

TEST_CASE("R4: unguarded decision edge") {
    Builder b("r4a", "Main");
    b.variable("x", "int", Value(0));
    b.initial("n_init");
    b.node("d1", NodeKind::Decision);
    b.action("a1");
    b.action("a2");
    b.final_node("n_end");
    b.edge("e1", "n_init_out", "d1");
    b.edge("e2", "d1", "a1_in", "x = 1");
    b.edge("e3", "d1", "a2_in");  // missing guard
    b.edge("e4", "a1_out", "n_end_in");
    b.edge("e5", "a2_out", "n_end_in");
    ValidationReport r = validate(b.m);
    REQUIRE(rules_of(r) == std::vector<std::string>{"R4"});
    CHECK(r.findings[0].message.find("guard") != std::string::npos);
}

TEST_CASE("R4: duplicate else") {
    Builder b("r4b", "Main");
    b.variable("x", "int", Value(0));
    b.initial("n_init");
    b.node("d1", NodeKind::Decision);
    b.action("a1");
    b.action("a2");
    b.action("a3");
    b.final_node("n_end");
    b.edge("e1", "n_init_out", "d1");
    b.edge("e2", "d1", "a1_in", "x = 1");
    b.edge("e3", "d1", "a2_in", "else");
    b.edge("e4", "d1", "a3_in", "else");
    b.edge("e5", "a1_out", "n_end_in");
    b.edge("e6", "a2_out", "n_end_in");
    b.edge("e7", "a3_out", "n_end_in");
    ValidationReport r = validate(b.m);
    REQUIRE(rules_of(r) == std::vector<std::string>{"R4"});
    CHECK(r.findings[0].message.find("else") != std::string::npos);
}

TEST_CASE("R4: equality guards on one discriminator are proven exclusive") {
    Builder b("r4c", "Main");
    b.variable("x", "int", Value(0));
    b.initial("n_init");
    b.node("d1", NodeKind::Decision);
    b.action("a1");
    b.action("a2");
    b.final_node("n_end");
    b.edge("e1", "n_init_out", "d1");
    b.edge("e2", "d1", "a1_in", "x = 1");
    b.edge("e3", "d1", "a2_in", "x = 2");
    b.edge("e4", "a1_out", "n_end_in");
    b.edge("e5", "a2_out", "n_end_in");
    CHECK(validate(b.m).findings.empty());
}

TEST_CASE("R4: overlapping equality guards are an error") {
    Builder b("r4d", "Main");
    b.variable("x", "int", Value(0));
    b.initial("n_init");
    b.node("d1", NodeKind::Decision);
    b.action("a1");
    b.action("a2");
    b.final_node("n_end");
    b.edge("e1", "n_init_out", "d1");
    b.edge("e2", "d1", "a1_in", "x = 1");
    b.edge("e3", "d1", "a2_in", "1 = x");  // same test, reversed operands
    b.edge("e4", "a1_out", "n_end_in");
    b.edge("e5", "a2_out", "n_end_in");
    ValidationReport r = validate(b.m);
    REQUIRE_FALSE(r.findings.empty());
    CHECK(r.findings[0].rule == "R4");
    CHECK(r.findings[0].severity == Finding::Severity::Error);
}

TEST_CASE("R4: range guards defer exclusion to run time (warning)") {
    Builder b("r4e", "Main");
    b.variable("x", "int", Value(0));
    b.initial("n_init");
    b.node("d1", NodeKind::Decision);
    b.action("a1");
    b.action("a2");
    b.final_node("n_end");
    b.edge("e1", "n_init_out", "d1");
    b.edge("e2", "d1", "a1_in", "x > 1");
    b.edge("e3", "d1", "a2_in", "x < 0");
    b.edge("e4", "a1_out", "n_end_in");
    b.edge("e5", "a2_out", "n_end_in");
    ValidationReport r = validate(b.m);
    REQUIRE(r.findings.size() == 1);
    CHECK(r.findings[0].rule == "R4");
    CHECK(r.findings[0].severity == Finding::Severity::Warning);
    CHECK_FALSE(r.has_errors());
}

TEST_CASE("R4: degenerate control-node arity") {
    Builder b("r4f", "Main");
    b.variable("x", "int", Value(0));
    b.initial("n_init");
    b.node("d1", NodeKind::Decision);
    b.action("a1");
    b.final_node("n_end");
    b.edge("e1", "n_init_out", "d1");
    b.edge("e2", "d1", "a1_in", "x = 1");
    b.edge("e3", "a1_out", "n_end_in");
    ValidationReport r = validate(b.m);
    REQUIRE_FALSE(r.findings.empty());
    CHECK(r.findings[0].rule == "R4");
    CHECK(r.findings[0].message.find("two outgoing") != std::string::npos);
}

TEST_CASE("R5: assignment to an unknown target") {
    Builder b("r5", "Main");
    b.initial("n_init");
    Node& a1 = b.action("a1");
    Assignment asg;
    asg.targetText = "ghost";
    asg.exprText = "1";
    asg.target = parse_ref_path(asg.targetText);
    asg.expr = parse_expr(asg.exprText);
    a1.assignments.push_back(asg);
    b.final_node("n_end");
    b.edge("e1", "n_init_out", "a1_in");
    b.edge("e2", "a1_out", "n_end_in");
    ValidationReport r = validate(b.m);
    REQUIRE(rules_of(r) == std::vector<std::string>{"R5"});
}

TEST_CASE("R5: call-site pin arity must match the callee's parameters") {
    Builder b("r5b", "Main");
    b.initial("n_init");
    Node& call = b.action("a_call");
    call.calls = "Sub";
    b.final_node("n_end");
    b.edge("e1", "n_init_out", "a_call_in");
    b.edge("e2", "a_call_out", "n_end_in");

    Activity sub;
    sub.id = "Sub";
    Node p1;
    p1.id = "p_in1";
    p1.kind = NodeKind::Param;
    p1.paramDir = PinDir::In;
    p1.pins.push_back({"p_in1_pin", PinDir::Out, ""});
    Node p2;
    p2.id = "p_in2";
    p2.kind = NodeKind::Param;
    p2.paramDir = PinDir::In;
    p2.pins.push_back({"p_in2_pin", PinDir::Out, ""});
    Node fin;
    fin.id = "s_end";
    fin.kind = NodeKind::Final;
    fin.pins.push_back({"s_end_in", PinDir::In, ""});
    sub.nodes = {p1, p2, fin};
    Edge se1{"se1", "p_in1_pin", "s_end_in", "", nullptr, false};
    sub.edges.push_back(se1);
    b.m.activities.push_back(sub);

    ValidationReport r = validate(b.m);
    REQUIRE_FALSE(r.findings.empty());
    CHECK(r.findings[0].rule == "R5");
    CHECK(r.findings[0].message.find("input pins") != std::string::npos);
}

TEST_CASE("R6: guard field must exist on every feeding token type") {
    Builder b("r6", "Main");
    b.initial("n_init");
    b.node("d1", NodeKind::Decision);
    b.action("a1");
    b.action("a2");
    b.final_node("n_end");
    b.edge("e1", "n_init_out", "d1");
    b.edge("e2", "d1", "a1_in", "payload.qty = 1");
    b.edge("e3", "d1", "a2_in", "else");
    b.edge("e4", "a1_out", "n_end_in");
    b.edge("e5", "a2_out", "n_end_in");
    // The only feeder is the initial node's control token: no payload at all.
    ValidationReport r = validate(b.m);
    REQUIRE_FALSE(r.findings.empty());
    CHECK(r.findings[0].rule == "R6");
    CHECK(r.findings[0].message.find("control token") != std::string::npos);
}

TEST_CASE("R6: typed feeders allow matching fields and reject wrong literals") {
    Builder b("r6b", "Main");
    b.m.classes.push_back({"Order", {{"qty", "int"}}});
    b.initial("n_init");
    Node& a0 = b.action("a0", "Order");
    (void)a0;
    b.node("d1", NodeKind::Decision);
    b.action("a1");
    b.action("a2");
    b.final_node("n_end");
    b.edge("e1", "n_init_out", "a0_in");
    b.edge("e2", "a0_out", "d1");
    b.edge("e3", "d1", "a1_in", "payload.qty = 1");
    b.edge("e4", "d1", "a2_in", "else");
    b.edge("e5", "a1_out", "n_end_in");
    b.edge("e6", "a2_out", "n_end_in");
    CHECK(validate(b.m).findings.empty());

    // unknown field
    b.act->edges[2].guardText = "payload.bogus = 1";
    b.act->edges[2].guard = parse_guard("payload.bogus = 1");
    ValidationReport r1 = validate(b.m);
    REQUIRE_FALSE(r1.findings.empty());
    CHECK(r1.findings[0].rule == "R6");

    // int field compared with a string literal
    b.act->edges[2].guardText = "payload.qty = \"big\"";
    b.act->edges[2].guard = parse_guard("payload.qty = \"big\"");
    ValidationReport r2 = validate(b.m);
    REQUIRE_FALSE(r2.findings.empty());
    CHECK(r2.findings[0].rule == "R6");
    CHECK(r2.findings[0].message.find("string literal") != std::string::npos);
}

TEST_CASE("R5: measure reference to a nonexistent measure") {
    Builder b("r5m", "Main");
    b.initial("n_init");
    b.action("a1");
    b.final_node("n_end");
    b.edge("e1", "n_init_out", "a1_in");
    b.edge("e2", "a1_out", "n_end_in");
    b.act->measures.push_back("Weird=Sum(NoSuchMeasure), EUR");
    ValidationReport r = validate(b.m);
    REQUIRE(rules_of(r) == std::vector<std::string>{"R5"});
    CHECK(r.findings[0].message.find("NoSuchMeasure") != std::string::npos);
}
