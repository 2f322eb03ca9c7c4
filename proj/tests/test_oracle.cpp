#include <catch2/catch_amalgamated.hpp>

#include "flowkit/compile.hpp"
#include "flowkit/model_io.hpp"
#include "flowkit/oracle.hpp"
#include "flowkit/runtime.hpp"

#include "sample_models.hpp"

using namespace flowkit;
using namespace samples;

namespace {

// Run the same request through the push/pull machine and through the
// offer/accept reference interpreter and insist they describe the same
// behaviour: identical action-event projection, outcome status, final clock
// and per-instance verdicts.
void check_agreement(const char* doc, const RunSpec& spec) {
    ProcessModel model = parse_model(doc);
    CompiledModel compiled = compile(model);

    RunOutcome vm = run_process(compiled, spec);
    RunOutcome oracle = run_oracle(model, spec);

    INFO("vm diagnostics: " << join(vm.diagnostics, " | "));
    INFO("oracle diagnostics: " << join(oracle.diagnostics, " | "));
    CHECK(diff_projections(project_action_events(vm.log),
                           project_action_events(oracle.log)) == "");
    CHECK(vm.status == oracle.status);
    CHECK(vm.finalClock == oracle.finalClock);

    REQUIRE(vm.instances.size() == oracle.instances.size());
    for (size_t i = 0; i < vm.instances.size(); ++i) {
        CHECK(vm.instances[i].id == oracle.instances[i].id);
        CHECK(vm.instances[i].activity == oracle.instances[i].activity);
        CHECK(vm.instances[i].status == oracle.instances[i].status);
    }
}

RunSpec single(const std::string& activity, std::map<std::string, Value> bindings = {}) {
    RunSpec spec;
    spec.instances.push_back({activity, std::move(bindings)});
    return spec;
}

Value record_with(const std::string& field, int64_t v) {
    Record r;
    r[field] = Value{v};
    return Value{r};
}

}  // namespace

TEST_CASE("interpreters agree on sequencing and fork/join timing") {
    check_agreement(kLinear, single("Main"));
    check_agreement(kDiamond, single("Main"));
}

TEST_CASE("interpreters agree on decision routing") {
    check_agreement(kDecision, single("Main", {{"p_in", record_with("qty", 7)}}));
    check_agreement(kDecision, single("Main", {{"p_in", record_with("qty", 2)}}));
}

TEST_CASE("interpreters agree on guard conflicts and parked tokens") {
    // both guards true: both fail the instance
    check_agreement(kConflictWait, single("Main", {{"p_in", record_with("x", 2)}}));
    // no guard true and no else: both park the token and deadlock
    check_agreement(kConflictWait, single("Main", {{"p_in", record_with("x", -1)}}));
}

TEST_CASE("interpreters agree on assignments, calls and loops") {
    Record order;
    order["id"] = Value{int64_t{9}};
    order["qty"] = Value{int64_t{5}};
    check_agreement(kAssign, single("Main", {{"p_in", Value{order}}}));
    check_agreement(kCall, single("Parent", {{"p_n", record_with("v", 41)}}));
    check_agreement(kLoop, single("Main"));
}

TEST_CASE("interpreters agree on multi-process messaging") {
    RunSpec spec;
    spec.instances.push_back({"Requester", {}});
    spec.instances.push_back({"Responder", {}});
    check_agreement(kMessaging, spec);
}

TEST_CASE("interpreters agree on interrupting accepts") {
    RunSpec spec;
    spec.instances.push_back({"Worker", {}});
    spec.externals.push_back({4, "Stop", "Worker", Value{Record{}}});
    check_agreement(kInterrupt, spec);
}

TEST_CASE("interpreters agree on a starving join") {
    check_agreement(kStarved, single("Main"));
}

TEST_CASE("the reference interpreter produces its own frozen log for a linear run") {
    ProcessModel model = parse_model(kLinear);
    RunOutcome out = run_oracle_single(model, "Main");
    REQUIRE(out.status == "completed");
    // Tokens rest at the initial node's pin and at output pins only; the
    // action and the final node consume offers directly, so there are no
    // transport moves between places.
    CHECK(to_text(out.log) ==
          "0 0 instanceStart i1 activity=Main\n"
          "0 1 tokenMove t1 inst=i1 from=new to=n_init_out\n"
          "0 2 actionStart a1 inst=i1 seized=[t1]\n"
          "2 3 actionEnd a1 inst=i1 outputs=[t2]\n"
          "2 4 tokenMove t2 inst=i1 from=new to=a1_out\n"
          "2 5 tokenMove t2 inst=i1 from=n_end_in to=discarded\n"
          "2 6 instanceEnd i1 status=completed\n");
}

TEST_CASE("the reference interpreter is deterministic") {
    ProcessModel model = parse_model(kMessaging);
    RunSpec spec;
    spec.instances.push_back({"Requester", {}});
    spec.instances.push_back({"Responder", {}});
    std::string first = to_text(run_oracle(model, spec).log);
    for (int i = 0; i < 5; ++i) CHECK(to_text(run_oracle(model, spec).log) == first);
}

TEST_CASE("fork residues let later branches fire after an earlier acceptance") {
    // In offer/accept semantics the first action to accept through the fork
    // consumes the resting token; the second branch must be fed from the
    // residue. Both branch actions have to start at tick 0.
    ProcessModel model = parse_model(kDiamond);
    RunOutcome out = run_oracle_single(model, "Main");
    REQUIRE(out.status == "completed");
    auto proj = project_action_events(out.log);
    int startsAtZero = 0;
    for (const ProjectedEvent& p : proj)
        if (p.start && p.tick == 0) ++startsAtZero;
    CHECK(startsAtZero == 2);
}

TEST_CASE("a deadlocked oracle instance gets no instanceEnd") {
    ProcessModel model = parse_model(kStarved);
    RunOutcome out = run_oracle_single(model, "Main");
    CHECK(out.status == "deadlocked");
    for (const Event& e : out.log) CHECK(e.kind != EventKind::InstanceEnd);
}
