#include <catch2/catch_amalgamated.hpp>

#include <algorithm>

#include "flowkit/compile.hpp"
#include "flowkit/model_io.hpp"
#include "flowkit/runtime.hpp"

#include "sample_models.hpp"

using namespace flowkit;
using namespace samples;

namespace {

struct Loaded {
    ProcessModel model;
    CompiledModel compiled;
};

Loaded load(const std::string& doc) {
    Loaded l;
    l.model = parse_model(doc);
    l.compiled = compile(l.model);
    return l;
}

const Event* find_event(const EventLog& log, EventKind k, const std::string& subject) {
    for (const Event& e : log)
        if (e.kind == k && e.subject == subject) return &e;
    return nullptr;
}

std::vector<const Event*> events_of(const EventLog& log, EventKind k) {
    std::vector<const Event*> out;
    for (const Event& e : log)
        if (e.kind == k) out.push_back(&e);
    return out;
}

}  // namespace

TEST_CASE("a linear run produces the exact frozen event log") {
    Loaded l = load(kLinear);
    RunOutcome out = run_single(l.compiled, "Main");
    CHECK(out.status == "completed");
    CHECK(out.finalClock == 2);
    CHECK(to_text(out.log) ==
          "0 0 instanceStart i1 activity=Main\n"
          "0 1 tokenMove t1 inst=i1 from=new to=n_init_out\n"
          "0 2 tokenMove t1 inst=i1 from=n_init_out to=a1_in\n"
          "0 3 actionStart a1 inst=i1 seized=[t1]\n"
          "2 4 actionEnd a1 inst=i1 outputs=[t2]\n"
          "2 5 tokenMove t2 inst=i1 from=new to=a1_out\n"
          "2 6 tokenMove t2 inst=i1 from=a1_out to=n_end_in\n"
          "2 7 tokenMove t2 inst=i1 from=n_end_in to=discarded\n"
          "2 8 instanceEnd i1 status=completed\n");
}

TEST_CASE("repeated runs are byte-identical") {
    Loaded l = load(kLinear);
    std::string first = to_text(run_single(l.compiled, "Main").log);
    for (int i = 0; i < 5; ++i) {
        CHECK(to_text(run_single(l.compiled, "Main").log) == first);
    }
}

TEST_CASE("fork/join diamond: the join group moves when its last feeder is ready") {
    Loaded l = load(kDiamond);
    RunOutcome out = run_single(l.compiled, "Main");
    REQUIRE(out.status == "completed");

    // Independent schedule: both branches start when the fork fires (tick 0),
    // the downstream action starts at the max of the branch completion times.
    int64_t a1End = 0 + 2, a2End = 0 + 3;
    int64_t a3Start = std::max(a1End, a2End);

    auto proj = project_action_events(out.log);
    auto find = [&](const std::string& node, bool start) -> int64_t {
        for (const ProjectedEvent& p : proj)
            if (p.node == node && p.start == start) return p.tick;
        return -1;
    };
    CHECK(find("a1", true) == 0);
    CHECK(find("a2", true) == 0);
    CHECK(find("a1", false) == a1End);
    CHECK(find("a2", false) == a2End);
    CHECK(find("a3", true) == a3Start);
    CHECK(find("a3", false) == a3Start + 1);

    // The early branch's token waits at its source until the group is
    // complete: both grouped moves into a3_in happen at tick 3 and share one
    // group id.
    std::vector<const Event*> groupMoves;
    for (const Event& e : out.log)
        if (e.kind == EventKind::TokenMove && e.get("to") == "a3_in") groupMoves.push_back(&e);
    REQUIRE(groupMoves.size() == 2);
    CHECK(groupMoves[0]->tick == 3);
    CHECK(groupMoves[1]->tick == 3);
    CHECK(groupMoves[0]->get("group") == groupMoves[1]->get("group"));
    CHECK(groupMoves[0]->get("from") == "a1_out");
    CHECK(groupMoves[1]->get("from") == "a2_out");

    // and the action seizes both tokens of the group at once
    const Event* start = find_event(out.log, EventKind::ActionStart, "a3");
    REQUIRE(start);
    std::string seized = start->get("seized");
    CHECK(seized.find(',') != std::string::npos);  // two ids in the bracket
}

TEST_CASE("decisions route tokens by payload") {
    Loaded l = load(kDecision);

    Record big;
    big["qty"] = Value{int64_t{7}};
    RunOutcome r1 = run_single(l.compiled, "Main", {{"p_in", Value{big}}});
    CHECK(r1.status == "completed");
    CHECK(find_event(r1.log, EventKind::ActionStart, "a_big"));
    CHECK_FALSE(find_event(r1.log, EventKind::ActionStart, "a_small"));

    Record small;
    small["qty"] = Value{int64_t{2}};
    RunOutcome r2 = run_single(l.compiled, "Main", {{"p_in", Value{small}}});
    CHECK(r2.status == "completed");
    CHECK(find_event(r2.log, EventKind::ActionStart, "a_small"));
    CHECK_FALSE(find_event(r2.log, EventKind::ActionStart, "a_big"));
}

TEST_CASE("two true decision guards fail the instance as a guard conflict") {
    Loaded l = load(kConflictWait);
    Record r;
    r["x"] = Value{int64_t{2}};  // satisfies both guards
    RunOutcome out = run_single(l.compiled, "Main", {{"p_in", Value{r}}});
    CHECK(out.status == "failed");
    REQUIRE(out.instances.size() == 1);
    CHECK(out.instances[0].status == "failed");
    REQUIRE_FALSE(out.diagnostics.empty());
    CHECK(out.diagnostics[0].find("guard conflict") != std::string::npos);
    const Event* end = find_event(out.log, EventKind::InstanceEnd, "i1");
    REQUIRE(end);
    CHECK(end->get("status") == "failed");
}

TEST_CASE("a decision with no true guard parks the token and deadlocks") {
    Loaded l = load(kConflictWait);
    Record r;
    r["x"] = Value{int64_t{-1}};  // matches neither guard, no else branch
    RunOutcome out = run_single(l.compiled, "Main", {{"p_in", Value{r}}});
    CHECK(out.status == "deadlocked");
    CHECK(out.instances[0].status == "deadlocked");
    // deadlocked instances get no instanceEnd
    CHECK(find_event(out.log, EventKind::InstanceEnd, "i1") == nullptr);
}

TEST_CASE("assignments update variables, build output payloads, and see earlier writes") {
    Loaded l = load(kAssign);
    Record order;
    order["id"] = Value{int64_t{9}};
    order["qty"] = Value{int64_t{5}};
    RunOutcome out = run_single(l.compiled, "Main", {{"p_in", Value{order}}});
    REQUIRE(out.status == "completed");

    auto assigns = events_of(out.log, EventKind::Assignment);
    REQUIRE(assigns.size() == 3);
    CHECK(assigns[0]->get("target") == "total");
    CHECK(assigns[0]->get("value") == "15");
    CHECK(assigns[1]->get("target") == "o_out.id");
    CHECK(assigns[1]->get("value") == "9");
    CHECK(assigns[2]->get("target") == "o_out.qty");
    CHECK(assigns[2]->get("value") == "15");  // sees the first assignment

    // the freshly built payload routed the decision towards a_yes
    CHECK(find_event(out.log, EventKind::ActionStart, "a_yes"));
    CHECK_FALSE(find_event(out.log, EventKind::ActionStart, "a_no"));
}

TEST_CASE("call actions spawn a child instance and finish when it completes") {
    Loaded l = load(kCall);
    Record pair;
    pair["v"] = Value{int64_t{41}};
    RunOutcome out = run_single(l.compiled, "Parent", {{"p_n", Value{pair}}});
    REQUIRE(out.status == "completed");
    REQUIRE(out.instances.size() == 2);
    CHECK(out.instances[0].activity == "Parent");
    CHECK(out.instances[1].activity == "Child");
    CHECK(out.instances[1].status == "completed");

    const Event* childStart = find_event(out.log, EventKind::InstanceStart, "i2");
    REQUIRE(childStart);
    CHECK(childStart->get("activity") == "Child");
    CHECK(childStart->get("parent") == "i1");
    CHECK(childStart->get("call") == "a_call");

    // the child saw the caller's payload and incremented it
    auto assigns = events_of(out.log, EventKind::Assignment);
    REQUIRE(assigns.size() == 1);
    CHECK(assigns[0]->get("target") == "x_out.v");
    CHECK(assigns[0]->get("value") == "42");

    // call action ends the same tick the child completes
    const Event* childEnd = find_event(out.log, EventKind::InstanceEnd, "i2");
    const Event* callEnd = find_event(out.log, EventKind::ActionEnd, "a_call");
    REQUIRE(childEnd);
    REQUIRE(callEnd);
    CHECK(childEnd->tick == 1);
    CHECK(callEnd->tick == 1);
    CHECK(childEnd->seq < callEnd->seq);
}

TEST_CASE("loop nodes run the body once per element, sequentially") {
    Loaded l = load(kLoop);
    RunOutcome out = run_single(l.compiled, "Main");
    REQUIRE(out.status == "completed");
    REQUIRE(out.instances.size() == 4);  // main + three body runs

    auto starts = events_of(out.log, EventKind::InstanceStart);
    REQUIRE(starts.size() == 4);
    for (size_t i = 1; i < starts.size(); ++i) {
        CHECK(starts[i]->get("activity") == "Body");
        CHECK(starts[i]->get("parent") == "i1");
        CHECK(starts[i]->get("call") == "lp");
        CHECK(starts[i]->tick == static_cast<int64_t>(i - 1));  // back to back
    }
    const Event* loopEnd = find_event(out.log, EventKind::ActionEnd, "lp");
    REQUIRE(loopEnd);
    CHECK(loopEnd->tick == 3);
    CHECK(out.finalClock == 3);
}

TEST_CASE("two processes exchange signals within one tick") {
    Loaded l = load(kMessaging);
    RunSpec spec;
    spec.instances.push_back({"Requester", {}});
    spec.instances.push_back({"Responder", {}});
    RunOutcome out = run_process(l.compiled, spec);
    REQUIRE(out.status == "completed");

    const Event* send = find_event(out.log, EventKind::SignalSend, "s_req");
    REQUIRE(send);
    CHECK(send->get("inst") == "i1");
    CHECK(send->get("signal") == "Ping");
    CHECK(send->get("to") == "Responder");
    CHECK(send->get("payload") == "{}");

    const Event* recv = find_event(out.log, EventKind::SignalReceive, "r_ping");
    REQUIRE(recv);
    CHECK(recv->get("inst") == "i2");
    CHECK(recv->tick == send->tick);
    CHECK(send->seq < recv->seq);

    const Event* pong = find_event(out.log, EventKind::SignalReceive, "r_pong");
    REQUIRE(pong);
    CHECK(pong->get("inst") == "i1");

    // the responder's arming token is consumed by the acceptance
    bool discardedArming = false;
    for (const Event& e : out.log)
        if (e.kind == EventKind::TokenMove && e.find("from") && e.get("from") == "r_ping_in" &&
            e.get("to") == "discarded")
            discardedArming = true;
    CHECK(discardedArming);

    // whole exchange at tick 0; only a_done spans into tick 1
    CHECK(find_event(out.log, EventKind::ActionStart, "a_done")->tick == 0);
    CHECK(out.finalClock == 1);

    // determinism across repeated runs
    CHECK(to_text(run_process(l.compiled, spec).log) == to_text(out.log));
}

TEST_CASE("an interrupting accept aborts the action it watches") {
    Loaded l = load(kInterrupt);
    RunSpec spec;
    spec.instances.push_back({"Worker", {}});
    spec.externals.push_back({4, "Stop", "Worker", Value{Record{}}});
    RunOutcome out = run_process(l.compiled, spec);
    REQUIRE(out.status == "completed");
    CHECK(out.finalClock == 4);

    CHECK(find_event(out.log, EventKind::ActionStart, "a_slow"));
    CHECK_FALSE(find_event(out.log, EventKind::ActionEnd, "a_slow"));  // cut short
    const Event* recv = find_event(out.log, EventKind::SignalReceive, "r_stop");
    REQUIRE(recv);
    CHECK(recv->tick == 4);
    const Event* end = find_event(out.log, EventKind::InstanceEnd, "i1");
    REQUIRE(end);
    CHECK(end->tick == 4);
    CHECK(end->get("status") == "completed");
}

TEST_CASE("deadlock reports the starved pull group") {
    Loaded l = load(kStarved);
    RunOutcome out = run_single(l.compiled, "Main");
    CHECK(out.status == "deadlocked");
    CHECK(out.instances[0].status == "deadlocked");
    bool mentioned = false;
    for (const std::string& d : out.diagnostics)
        if (d.find("starved") != std::string::npos && d.find("g_a2_in") != std::string::npos)
            mentioned = true;
    CHECK(mentioned);
    CHECK(events_of(out.log, EventKind::InstanceEnd).empty());
}

TEST_CASE("the tick budget stops runaway models") {
    Loaded l = load(kLinear);
    RunSpec spec;
    spec.instances.push_back({"Main", {}});
    spec.maxTicks = 1;
    RunOutcome out = run_process(l.compiled, spec);
    CHECK(out.status == "budget");
    REQUIRE_FALSE(out.diagnostics.empty());
    CHECK(out.diagnostics[0].find("tick budget") != std::string::npos);
}

TEST_CASE("main activity discovery prefers the flag and falls back to roots") {
    Loaded l = load(kCall);  // Parent flagged main, Child called
    auto mains = main_activities(l.model);
    REQUIRE(mains.size() == 1);
    CHECK(mains[0]->id == "Parent");

    Loaded lin = load(kLinear);  // nothing flagged: the unreferenced root wins
    auto m2 = main_activities(lin.model);
    REQUIRE(m2.size() == 1);
    CHECK(m2[0]->id == "Main");
}
