// Acceptance suite. Each criterion prints exactly one PASS/FAIL line; the
// process exits nonzero if any criterion fails.
//
//   C1  both interpreters agree on a 1000-model generated corpus, under 60 s
//   C2  pull-group formation ticks equal the reference interpreter's arrivals
//   C3  repeated runs produce byte-identical output files
//   C4  rule fixtures R1-R4 are rejected precisely; the corpus validates clean
//   C5  measure algebra holds on a 50-run batch, checked against a raw fold
//   C6  transformation laws: clean output, total trace, count laws, skeleton
//   C7  a 60+ element model transforms in under one second
//   C8  parse/serialize round trips and re-readability of CLI output files
//   C9  cross-process messaging pairs up; correlation picks the right instance

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <sys/wait.h>

#include "flowkit/bpmn.hpp"
#include "flowkit/compile.hpp"
#include "flowkit/generator.hpp"
#include "flowkit/measures.hpp"
#include "flowkit/model_io.hpp"
#include "flowkit/oracle.hpp"
#include "flowkit/runtime.hpp"
#include "flowkit/trace.hpp"
#include "flowkit/transform.hpp"
#include "flowkit/validate.hpp"

namespace fs = std::filesystem;
using namespace flowkit;
using Clock = std::chrono::steady_clock;

namespace {

struct Line {
    std::string id;
    bool ok = false;
    std::string detail;
};

std::string fixture(const std::string& name) {
    return (fs::path(FIXTURE_DIR) / name).string();
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int sh(const std::string& cmd) {
    int raw = std::system((cmd + " >/dev/null 2>/dev/null").c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

fs::path scratch() {
    static fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "flowkit_acceptance";
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

RunSpec mains_spec(const ProcessModel& m) {
    RunSpec spec;
    for (const Activity* a : main_activities(m)) spec.instances.push_back({a->id, {}});
    return spec;
}

RunSpec spec_from_inputs(const std::string& path) {
    json j = json::parse(slurp(path));
    RunSpec spec;
    for (const json& inst : j["instances"]) {
        RunSpec::Seed seed;
        seed.activity = inst["activity"].get<std::string>();
        if (inst.contains("bindings"))
            for (auto it = inst["bindings"].begin(); it != inst["bindings"].end(); ++it)
                seed.bindings[it.key()] = detail::value_from_json(it.value(), path);
        spec.instances.push_back(std::move(seed));
    }
    return spec;
}

bool has_join(const ProcessModel& m) {
    for (const Activity& a : m.activities)
        for (const Node& n : a.nodes)
            if (n.kind == NodeKind::Join) return true;
    return false;
}

size_t element_count(const ProcessModel& m) {
    size_t n = 0;
    for (const Activity& a : m.activities) n += a.nodes.size() + a.edges.size();
    return n;
}

// ---- raw-log folds -------------------------------------------------------

struct Execution {
    int64_t start = -1, end = -1;
};

// (instance, node) -> completed executions in start order
using ExecMap = std::map<std::pair<std::string, std::string>, std::vector<Execution>>;

ExecMap fold_executions(const EventLog& log) {
    ExecMap out;
    std::map<std::pair<std::string, std::string>, std::vector<size_t>> open;
    for (const Event& e : log) {
        if (e.kind != EventKind::ActionStart && e.kind != EventKind::ActionEnd) continue;
        std::pair<std::string, std::string> key{e.get("inst"), e.subject};
        if (e.kind == EventKind::ActionStart) {
            open[key].push_back(out[key].size());
            out[key].push_back({e.tick, -1});
        } else {
            auto& q = open[key];
            if (!q.empty()) {
                out[key][q.front()].end = e.tick;
                q.erase(q.begin());
            }
        }
    }
    return out;
}

struct InstInfo {
    std::string activity;
    int64_t start = 0, end = -1;
    std::string status;
};

std::map<std::string, InstInfo> instances_of(const EventLog& log) {
    std::map<std::string, InstInfo> out;
    for (const Event& e : log) {
        if (e.kind == EventKind::InstanceStart) {
            out[e.subject].activity = e.get("activity");
            out[e.subject].start = e.tick;
        } else if (e.kind == EventKind::InstanceEnd) {
            out[e.subject].end = e.tick;
            out[e.subject].status = e.get("status");
        }
    }
    return out;
}

// ---- C2: pull-group formation ticks --------------------------------------

// In the virtual machine, tokens that traverse a join are deposited at the
// pull destination as one tagged group, on the tick the last member became
// claimable. The reference interpreter keeps tokens at their producing place
// until consumption, so its "arrival" at the join output is the production
// tick. The law: each group's formation tick equals the latest production
// tick of the corresponding member tokens in the reference log, where a
// member corresponds to the token produced at the same place, in the same
// position of that place's production sequence.
bool group_law_holds(const EventLog& vmLog, const EventLog& orLog, std::string* why) {
    // (instance|place) -> production sequence of (token id, tick)
    auto productions = [](const EventLog& log) {
        std::map<std::string, std::vector<std::pair<std::string, int64_t>>> out;
        for (const Event& e : log) {
            if (e.kind != EventKind::TokenMove) continue;
            const std::string& to = e.get("to");
            if (to == "discarded") continue;
            out[e.get("inst") + "|" + to].push_back({e.subject, e.tick});
        }
        return out;
    };
    auto vmProd = productions(vmLog);
    auto orProd = productions(orLog);

    struct Group {
        int64_t tick = -1;
        std::vector<std::pair<std::string, std::string>> members;  // (inst|place, token)
    };
    std::map<std::string, Group> groups;
    for (const Event& e : vmLog) {
        if (e.kind != EventKind::TokenMove) continue;
        const std::string* g = e.find("group");
        if (!g || g->empty()) continue;
        Group& rec = groups[*g];
        if (rec.tick >= 0 && rec.tick != e.tick) {
            *why = "group " + *g + " deposited across ticks";
            return false;
        }
        rec.tick = e.tick;
        rec.members.push_back({e.get("inst") + "|" + e.get("from"), e.subject});
    }

    for (const auto& [gid, rec] : groups) {
        int64_t lastArrival = -1;
        for (const auto& [key, token] : rec.members) {
            const auto& vseq = vmProd[key];
            size_t ord = vseq.size();
            for (size_t i = 0; i < vseq.size(); ++i)
                if (vseq[i].first == token) {
                    ord = i;
                    break;
                }
            const auto& oseq = orProd[key];
            if (ord >= oseq.size()) {
                *why = "no reference counterpart for token " + token + " at " + key;
                return false;
            }
            lastArrival = std::max(lastArrival, oseq[ord].second);
        }
        if (lastArrival != rec.tick) {
            *why = "group " + gid + " formed at tick " + std::to_string(rec.tick) +
                   " but the reference's last member arrived at tick " +
                   std::to_string(lastArrival);
            return false;
        }
    }
    return true;
}

// ---- corpus pass ----------------------------------------------------------

struct CorpusStats {
    int models = 0;
    int validationErrs = 0;
    int eqFails = 0;
    int joinModels = 0;
    int groupFails = 0;
    int xformFails = 0;
    int rtFails = 0;
    std::string firstEq, firstGroup, firstXform, firstRt, firstValidation;
    double seconds = 0;
};

CorpusStats corpus_pass(int seeds) {
    CorpusStats st;
    auto t0 = Clock::now();
    for (int seed = 1; seed <= seeds; ++seed) {
        ProcessModel m = generate_model(static_cast<uint64_t>(seed), 6);
        ++st.models;
        std::string tag = "seed " + std::to_string(seed);

        ProcessModel rt = parse_model(serialize_model(m));
        if (!structural_equal(m, rt)) {
            ++st.rtFails;
            if (st.firstRt.empty()) st.firstRt = tag + " (model format)";
        }

        ValidationReport vr = validate(m);
        if (vr.has_errors()) {
            ++st.validationErrs;
            if (st.firstValidation.empty()) st.firstValidation = tag;
            continue;
        }

        CompiledModel cm = compile(m);
        RunSpec spec = mains_spec(m);
        RunOutcome vm = run_process(cm, spec);
        RunOutcome orc = run_oracle(m, spec);
        std::string diff;
        if (vm.status != orc.status)
            diff = "status " + vm.status + " vs " + orc.status;
        else
            diff = diff_projections(project_action_events(vm.log), project_action_events(orc.log));
        if (!diff.empty()) {
            ++st.eqFails;
            if (st.firstEq.empty()) st.firstEq = tag + ": " + diff;
        }

        if (has_join(m)) {
            ++st.joinModels;
            std::string why;
            if (!group_law_holds(vm.log, orc.log, &why)) {
                ++st.groupFails;
                if (st.firstGroup.empty()) st.firstGroup = tag + ": " + why;
            }
        }

        // transformation laws + output-format round trip
        bpmn::TransformResult res = bpmn::transform(m);
        std::string xwhy;
        ValidationReport bv = bpmn::validate_bpmn(res.model);
        if (bv.has_errors()) xwhy = "validate_bpmn errors";
        if (xwhy.empty()) {
            ValidationReport tot = bpmn::check_trace_totality(m, res.model, res.trace);
            if (!tot.findings.empty()) xwhy = "trace not total";
        }
        if (xwhy.empty()) {
            size_t excl = 0, par = 0, pools = res.model.pools.size();
            for (const auto& p : res.model.processes)
                for (const auto& g : p.gateways)
                    (g.kind == bpmn::GatewayKind::Exclusive ? excl : par)++;
            size_t dm = 0, fj = 0;
            for (const Activity& a : m.activities)
                for (const Node& n : a.nodes) {
                    if (n.kind == NodeKind::Decision || n.kind == NodeKind::Merge) ++dm;
                    if (n.kind == NodeKind::Fork || n.kind == NodeKind::Join) ++fj;
                }
            if (excl != dm) xwhy = "exclusive gateway count";
            if (par != fj) xwhy = "parallel gateway count";
            if (pools != main_activities(m).size()) xwhy = "pool count";
        }
        if (xwhy.empty()) {
            bpmn::SkeletonVerdict v = bpmn::structural_skeleton_equivalence(m, res.model, res.trace);
            if (!v.ok) xwhy = "skeleton: " + v.witness;
        }
        if (!xwhy.empty()) {
            ++st.xformFails;
            if (st.firstXform.empty()) st.firstXform = tag + ": " + xwhy;
        }

        bpmn::BpmnModel brt = bpmn::parse_bpmn(bpmn::serialize_bpmn(res.model));
        if (!bpmn::structural_equal(res.model, brt)) {
            ++st.rtFails;
            if (st.firstRt.empty()) st.firstRt = tag + " (bpmn format)";
        }
        if (to_text(bpmn::parse_trace(to_text(res.trace))) != to_text(res.trace)) {
            ++st.rtFails;
            if (st.firstRt.empty()) st.firstRt = tag + " (trace format)";
        }
    }
    st.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    return st;
}

// ---- C3 -------------------------------------------------------------------

Line check_determinism() {
    Line line{"C3", true, ""};
    const std::string bin = FLOWKIT_BIN;
    fs::path d = scratch();
    struct Job {
        std::string name;
        std::string cmd;  // with {1} and {2} placeholders for output files
        int files;
    };
    std::string modelArgs =
        " --model " + fixture("supplier.flow") + " --inputs " + fixture("supplier.inputs.json");
    std::vector<Job> jobs = {
        {"vm run", bin + " run" + modelArgs + " --trace {1}", 1},
        {"oracle run", bin + " oracle run" + modelArgs + " --trace {1}", 1},
        {"transform",
         bin + " transform --model " + fixture("supplier.flow") + " --out {1} --trace {2}", 2},
    };
    for (const Job& job : jobs) {
        std::vector<std::string> first(job.files);
        for (int rep = 0; rep < 10; ++rep) {
            fs::path f1 = d / "det1.out";
            fs::path f2 = d / "det2.out";
            std::string cmd = job.cmd;
            cmd.replace(cmd.find("{1}"), 3, f1.string());
            if (job.files > 1) cmd.replace(cmd.find("{2}"), 3, f2.string());
            if (sh(cmd) != 0) {
                line.ok = false;
                line.detail = job.name + " exited nonzero";
                break;
            }
            std::string b1 = slurp(f1), b2 = job.files > 1 ? slurp(f2) : "";
            if (rep == 0) {
                first[0] = b1;
                if (job.files > 1) first[1] = b2;
            } else if (b1 != first[0] || (job.files > 1 && b2 != first[1])) {
                line.ok = false;
                line.detail = job.name + " differed on repeat " + std::to_string(rep + 1);
                break;
            }
        }
        if (!line.ok) break;
    }
    if (line.ok) line.detail = "10 repeats of vm run, oracle run, transform are byte-identical";
    return line;
}

// ---- C4 -------------------------------------------------------------------

Line check_validator(const CorpusStats& st) {
    Line line{"C4", true, ""};
    const std::pair<const char*, const char*> cases[] = {
        {"violations/r1.flow", "R1"},
        {"violations/r2.flow", "R2"},
        {"violations/r3.flow", "R3"},
        {"violations/r4.flow", "R4"},
    };
    for (const auto& [file, rule] : cases) {
        ProcessModel m = load_model(fixture(file));
        ValidationReport r = validate(m);
        int errs = 0;
        bool wrongRule = false;
        for (const Finding& f : r.findings)
            if (f.severity == Finding::Severity::Error) {
                ++errs;
                if (f.rule != rule) wrongRule = true;
            }
        if (errs != 1 || wrongRule) {
            line.ok = false;
            line.detail = std::string(file) + ": want exactly one " + rule + " error, got " +
                          std::to_string(errs);
            return line;
        }
    }
    if (st.validationErrs != 0) {
        line.ok = false;
        line.detail = std::to_string(st.validationErrs) + " generated models failed validation (" +
                      st.firstValidation + ")";
        return line;
    }
    line.detail = "R1-R4 each rejected with exactly one matching error; " +
                  std::to_string(st.models) + " generated models validate clean";
    return line;
}

// ---- C5 -------------------------------------------------------------------

Line check_measures() {
    Line line{"C5", true, ""};
    ProcessModel m = load_model(fixture("supplier.flow"));
    CompiledModel cm = compile(m);

    std::vector<std::pair<std::string, EventLog>> runs;
    for (int i = 1; i <= 50; ++i) {
        RunSpec spec;
        RunSpec::Seed customer{"CustomerProcess", {}};
        json binding = {{"id", i}, {"qty", (i % 5) + 1}, {"rush", i % 2}};
        customer.bindings["p_ord"] = detail::value_from_json(binding, "batch");
        spec.instances.push_back(customer);
        spec.instances.push_back({"SupplierProcess", {}});
        RunOutcome out = run_process(cm, spec);
        if (out.status != "completed") {
            line.ok = false;
            line.detail = "batch run " + std::to_string(i) + " ended " + out.status;
            return line;
        }
        char label[8];
        std::snprintf(label, sizeof label, "r%02d", i);
        runs.emplace_back(label, std::move(out.log));
    }

    std::vector<measures::MeasureRow> rows = measures::evaluate_measures(m, runs);
    std::map<std::string, measures::Rational> val;
    for (const auto& r : rows) {
        if (!r.error.empty()) {
            line.ok = false;
            line.detail = r.element + " " + r.measure + " " + r.scope + ": " + r.error;
            return line;
        }
        if (r.value) val[r.element + " " + r.measure + " " + r.scope] = *r.value;
    }
    auto lookup = [&](const std::string& key) -> const measures::Rational* {
        auto it = val.find(key);
        return it == val.end() ? nullptr : &it->second;
    };

    // (a) TotalTime = Finish - Start wherever all three probes resolved.
    int aChecked = 0;
    for (const auto& r : rows) {
        if (r.measure != "TotalTime" || !r.value) continue;
        const auto* s = lookup(r.element + " Start " + r.scope);
        const auto* f = lookup(r.element + " Finish " + r.scope);
        if (!s || !f) {
            line.ok = false;
            line.detail = "missing Start/Finish for " + r.element + " at " + r.scope;
            return line;
        }
        if (!(*f - *s == *r.value)) {
            line.ok = false;
            line.detail = "TotalTime mismatch for " + r.element + " at " + r.scope;
            return line;
        }
        ++aChecked;
    }

    // (b) and (c) against an independent fold over each raw event log.
    const std::map<std::string, int64_t> declaredRate = {{"a_bulk", 2}, {"a_std", 4}};
    const std::map<std::string, int64_t> declaredCost = {{"a_pick", 5}};
    int bChecked = 0, cChecked = 0;
    measures::Rational sumAllExpected(0);
    int instancesAll = 0;
    for (const auto& [label, log] : runs) {
        ExecMap execs = fold_executions(log);
        auto insts = instances_of(log);
        std::string supplier;
        for (const auto& [id, info] : insts)
            if (info.activity == "SupplierProcess") supplier = id;
        if (supplier.empty()) {
            line.ok = false;
            line.detail = label + ": no supplier instance";
            return line;
        }

        measures::Rational totalCost(0);
        int supplierExecs = 0;
        for (const auto& [key, list] : execs) {
            if (key.first != supplier) continue;
            for (size_t k = 0; k < list.size(); ++k) {
                if (list[k].end < 0) continue;
                ++supplierExecs;
                int64_t pt = list[k].end - list[k].start;
                std::string scope = label + "/" + supplier + "#" + std::to_string(k);
                auto rate = declaredRate.find(key.second);
                if (rate != declaredRate.end()) {
                    const auto* cost = lookup(key.second + " Cost " + scope);
                    measures::Rational want(pt * rate->second);
                    if (!cost || !(*cost == want)) {
                        line.ok = false;
                        line.detail = label + ": " + key.second + " cost != processing time x rate";
                        return line;
                    }
                    totalCost = totalCost + want;
                    ++bChecked;
                }
                auto flat = declaredCost.find(key.second);
                if (flat != declaredCost.end()) totalCost = totalCost + measures::Rational(flat->second);
            }
        }
        // duration-3 branch at rate 2 must price at exactly 6
        const auto* bulk = lookup("a_bulk Cost " + label + "/" + supplier + "#0");
        if (bulk && !(*bulk == measures::Rational(6))) {
            line.ok = false;
            line.detail = label + ": a_bulk cost is not 6";
            return line;
        }
        const auto* total = lookup("SupplierProcess TotalCost " + label + "/" + supplier);
        if (!total || !(*total == totalCost)) {
            line.ok = false;
            line.detail = label + ": TotalCost disagrees with the raw fold";
            return line;
        }

        // (c) Avg x count = Sum, instance scope; count taken from the fold
        std::string iscope = label + "/" + supplier;
        const auto* avg = lookup("SupplierProcess AvgWork " + iscope);
        const auto* sum = lookup("SupplierProcess SumWork " + iscope);
        if (!avg || !sum || !(*avg * measures::Rational(supplierExecs) == *sum)) {
            line.ok = false;
            line.detail = label + ": AvgWork x " + std::to_string(supplierExecs) + " != SumWork";
            return line;
        }
        ++cChecked;
        sumAllExpected = sumAllExpected + measures::Rational(insts[supplier].end - insts[supplier].start);
        ++instancesAll;
    }

    // (c) at the ALL scope the probes resolve per instance
    const auto* avgAll = lookup("SupplierProcess AvgWork ALL");
    const auto* sumAll = lookup("SupplierProcess SumWork ALL");
    if (!avgAll || !sumAll || !(*avgAll * measures::Rational(instancesAll) == *sumAll) ||
        !(*sumAll == sumAllExpected)) {
        line.ok = false;
        line.detail = "ALL-scope AvgWork/SumWork disagree with the raw fold";
        return line;
    }

    std::ostringstream d;
    d << "50-run batch: " << aChecked << " TotalTime identities, " << bChecked
      << " rate-priced costs, " << cChecked + 1 << " Avg x count = Sum checks, all exact";
    line.detail = d.str();
    return line;
}

// ---- C6 -------------------------------------------------------------------

Line check_transform_laws(const CorpusStats& st) {
    Line line{"C6", true, ""};
    ProcessModel m = load_model(fixture("supplier.flow"));
    bpmn::TransformResult res = bpmn::transform(m);
    if (bpmn::validate_bpmn(res.model).has_errors() ||
        !bpmn::check_trace_totality(m, res.model, res.trace).findings.empty() ||
        !bpmn::structural_skeleton_equivalence(m, res.model, res.trace).ok) {
        line.ok = false;
        line.detail = "supplier fixture fails a transformation law";
        return line;
    }
    if (res.model.pools.size() != 2) {
        line.ok = false;
        line.detail = "supplier fixture should yield two pools";
        return line;
    }
    if (st.xformFails != 0) {
        line.ok = false;
        line.detail = std::to_string(st.xformFails) + " corpus models fail (" + st.firstXform + ")";
        return line;
    }
    line.detail = "fixture and " + std::to_string(st.models) +
                  " generated models: clean output, total trace, count laws, skeleton equivalence";
    return line;
}

// ---- C7 -------------------------------------------------------------------

Line check_performance() {
    Line line{"C7", true, ""};
    ProcessModel big;
    size_t elements = 0;
    for (int rewrites = 10; rewrites <= 80; rewrites += 5) {
        big = generate_model(7, rewrites);
        elements = element_count(big);
        if (elements >= 60) break;
    }
    if (elements < 60) {
        line.ok = false;
        line.detail = "could not generate a 60-element model";
        return line;
    }
    double worst = 0;
    for (int rep = 0; rep < 3; ++rep) {
        auto t0 = Clock::now();
        bpmn::TransformResult res = bpmn::transform(big);
        double s = std::chrono::duration<double>(Clock::now() - t0).count();
        worst = std::max(worst, s);
        if (res.model.processes.empty()) {
            line.ok = false;
            line.detail = "transform produced no processes";
            return line;
        }
    }
    std::ostringstream d;
    d << elements << "-element model transformed in " << std::fixed << std::setprecision(4)
      << worst << " s (limit 1 s)";
    line.detail = d.str();
    line.ok = worst < 1.0;
    return line;
}

// ---- C8 -------------------------------------------------------------------

Line check_round_trips(const CorpusStats& st) {
    Line line{"C8", true, ""};
    if (st.rtFails != 0) {
        line.ok = false;
        line.detail = std::to_string(st.rtFails) + " corpus round trips failed (" + st.firstRt + ")";
        return line;
    }
    const char* files[] = {"supplier.flow", "starved.flow", "violations/r1.flow",
                           "violations/r2.flow", "violations/r3.flow", "violations/r4.flow"};
    for (const char* f : files) {
        ProcessModel m = load_model(fixture(f));
        if (!structural_equal(m, parse_model(serialize_model(m)))) {
            line.ok = false;
            line.detail = std::string(f) + " does not round-trip";
            return line;
        }
    }

    // CLI closure: every file the binary writes must be re-readable.
    const std::string bin = FLOWKIT_BIN;
    fs::path log = scratch() / "closure.log";
    fs::path bp = scratch() / "closure.bpmnflow";
    fs::path tr = scratch() / "closure.trace";
    std::string modelArgs =
        " --model " + fixture("supplier.flow") + " --inputs " + fixture("supplier.inputs.json");
    if (sh(bin + " run" + modelArgs + " --trace " + log.string()) != 0 ||
        sh(bin + " transform --model " + fixture("supplier.flow") + " --out " + bp.string() +
           " --trace " + tr.string()) != 0) {
        line.ok = false;
        line.detail = "CLI invocation failed";
        return line;
    }
    try {
        EventLog parsed = parse_log(slurp(log));
        if (to_text(parsed) != slurp(log)) throw ParseError("closure", "log text drifted");
        bpmn::parse_bpmn(slurp(bp));
        bpmn::parse_trace(slurp(tr));
    } catch (const std::exception& e) {
        line.ok = false;
        line.detail = std::string("CLI output not re-readable: ") + e.what();
        return line;
    }
    if (sh(bin + " trace-check --model " + fixture("supplier.flow") + " --bpmn " + bp.string() +
           " --trace " + tr.string()) != 0) {
        line.ok = false;
        line.detail = "trace-check rejected the CLI's own transform output";
        return line;
    }
    line.detail = "both formats round-trip over corpus and fixtures; CLI files re-readable";
    return line;
}

// ---- C9 -------------------------------------------------------------------

Line check_messaging() {
    Line line{"C9", true, ""};
    ProcessModel m = load_model(fixture("supplier.flow"));
    CompiledModel cm = compile(m);

    // One customer, one supplier: sends and receives must pair up exactly.
    RunSpec single = spec_from_inputs(fixture("supplier.inputs.json"));
    for (bool oracle : {false, true}) {
        RunOutcome out = oracle ? run_oracle(m, single) : run_process(cm, single);
        if (out.status != "completed") {
            line.ok = false;
            line.detail = std::string(oracle ? "oracle" : "vm") + " run ended " + out.status;
            return line;
        }
        std::multiset<std::string> sends, recvs;
        for (const Event& e : out.log) {
            if (e.kind == EventKind::SignalSend) sends.insert(e.get("signal") + e.get("payload"));
            if (e.kind == EventKind::SignalReceive) recvs.insert(e.get("signal") + e.get("payload"));
        }
        if (sends.size() != 2 || sends != recvs) {
            line.ok = false;
            line.detail = "sends and receives do not pair up";
            return line;
        }
    }

    // Two customers, two suppliers. Hand-enumerated expectation: the memo
    // variable pins invoice delivery to the matching customer even though the
    // standard (rush=0) order finishes first:
    //   customer i1 (order 7, qty 4, rush) <- invoice orderId=7, amount=12
    //   customer i2 (order 9, qty 2, std)  <- invoice orderId=9, amount=6
    // and i2's invoice arrives at an earlier tick than i1's.
    RunSpec pair = spec_from_inputs(fixture("supplier_pair.inputs.json"));
    for (bool oracle : {false, true}) {
        const char* side = oracle ? "oracle" : "vm";
        RunOutcome out = oracle ? run_oracle(m, pair) : run_process(cm, pair);
        if (out.status != "completed") {
            line.ok = false;
            line.detail = std::string(side) + " pair run ended " + out.status;
            return line;
        }
        std::map<std::string, std::pair<int64_t, std::string>> invoices;  // inst -> (tick, payload)
        for (const Event& e : out.log)
            if (e.kind == EventKind::SignalReceive && e.subject == "r_inv")
                invoices[e.get("inst")] = {e.tick, e.get("payload")};
        auto contains = [](const std::string& hay, const std::string& needle) {
            return hay.find(needle) != std::string::npos;
        };
        if (invoices.size() != 2 || !invoices.count("i1") || !invoices.count("i2") ||
            !contains(invoices["i1"].second, "orderId=7") ||
            !contains(invoices["i1"].second, "amount=12") ||
            !contains(invoices["i2"].second, "orderId=9") ||
            !contains(invoices["i2"].second, "amount=6")) {
            line.ok = false;
            line.detail = std::string(side) + ": invoice went to the wrong customer";
            return line;
        }
        if (!(invoices["i2"].first < invoices["i1"].first)) {
            line.ok = false;
            line.detail = std::string(side) +
                          ": expected the standard order's invoice to arrive first";
            return line;
        }
        auto insts = instances_of(out.log);
        int completed = 0;
        for (const auto& [id, info] : insts)
            if (info.status == "completed") ++completed;
        if (completed != 6) {
            line.ok = false;
            line.detail = std::string(side) + ": expected 6 completed instances, saw " +
                          std::to_string(completed);
            return line;
        }
    }
    line.detail =
        "sends pair with receives; correlation delivers orderId=9/amount=6 to i2 first, "
        "orderId=7/amount=12 to i1, on both interpreters";
    return line;
}

}  // namespace

int main() {
    std::vector<Line> lines;

    CorpusStats st = corpus_pass(1000);
    {
        Line c1{"C1", st.eqFails == 0 && st.seconds < 60.0, ""};
        std::ostringstream d;
        if (st.eqFails)
            d << st.eqFails << " models diverge (" << st.firstEq << ")";
        else
            d << st.models << " generated models projection-equivalent in " << std::fixed
              << std::setprecision(1) << st.seconds << " s (limit 60 s)";
        c1.detail = d.str();
        lines.push_back(c1);

        Line c2{"C2", st.groupFails == 0 && st.joinModels > 0, ""};
        if (st.groupFails)
            c2.detail = st.firstGroup;
        else if (st.joinModels == 0)
            c2.detail = "corpus contained no join";
        else
            c2.detail = "formation ticks match on all " + std::to_string(st.joinModels) +
                        " join-bearing models";
        lines.push_back(c2);
    }
    lines.push_back(check_determinism());
    lines.push_back(check_validator(st));
    lines.push_back(check_measures());
    lines.push_back(check_transform_laws(st));
    lines.push_back(check_performance());
    lines.push_back(check_round_trips(st));
    lines.push_back(check_messaging());

    bool all = true;
    for (const Line& l : lines) {
        std::cout << l.id << (l.ok ? " PASS  " : " FAIL  ") << l.detail << "\n";
        all = all && l.ok;
    }
    return all ? 0 : 1;
}
