#pragma once

// Activity-model -> BPMN transformation with traceability.
//
// Rule table (applied in id order, so output and trace are deterministic):
//   activity          -> Process; main activities additionally get a Pool,
//                        and every non-main process joins the pool of the
//                        first main whose call chain references it
//   action            -> Task (action kind carried over); an action with
//                        `calls` -> call Subprocess
//   foreach           -> loop call Subprocess over its body activity
//   send              -> send Task; an end-send becomes a message EndEvent;
//                        either acquires one MessageFlow per matching accept
//   accept            -> receive Task; an interrupting accept becomes a
//                        BoundaryIntermediateEvent on the interrupted task
//   initial / final   -> StartEvent / EndEvent
//   param             -> Property; the first in-param doubles as StartEvent
//                        when there is no initial node, the first out-param
//                        as EndEvent when nothing else ends the process
//   decision / merge  -> exclusive split / merge Gateway; guards travel
//                        verbatim onto the outgoing flows
//   fork / join       -> parallel split / merge Gateway
//   variable          -> Property;  assignment -> assignment entry
//   performer         -> Lane (members) plus a per-task performer attribute
//   edge              -> SequenceFlow, 1:1; edges at param pins re-anchor to
//                        the process's start/end events
//
// Guard text is dropped from flows that would leave a boundary event (the
// target subset allows conditions only after exclusive gateways and receive
// tasks).
//
// Each produced BPMN element carries exactly one trace link and every source
// element at least one; links are (source id, canonical concept, target id)
// with the concept drawn from a closed vocabulary. Non-node sources are
// referenced as `activity.variable` and `node/assignK`. The text form is one
// `source concept target` line, sorted.

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "flowkit/bpmn.hpp"
#include "flowkit/model.hpp"
#include "flowkit/runtime.hpp"

namespace flowkit::bpmn {

enum class CanonicalConcept {
    Task,
    Performer,
    SimpleTransition,
    IncomingTransition,
    OutgoingTransition,
    Decision,
    Fork,
    Merge,
    Join,
    Start,
    End,
    ProcessContainer,
    Variable,
    AssignmentConcept,
    MessageSend,
    MessageReceive,
    Loop,
};

inline const char* to_text(CanonicalConcept c) {
    switch (c) {
        case CanonicalConcept::Task: return "Task";
        case CanonicalConcept::Performer: return "Performer";
        case CanonicalConcept::SimpleTransition: return "SimpleTransition";
        case CanonicalConcept::IncomingTransition: return "IncomingTransition";
        case CanonicalConcept::OutgoingTransition: return "OutgoingTransition";
        case CanonicalConcept::Decision: return "Decision";
        case CanonicalConcept::Fork: return "Fork";
        case CanonicalConcept::Merge: return "Merge";
        case CanonicalConcept::Join: return "Join";
        case CanonicalConcept::Start: return "Start";
        case CanonicalConcept::End: return "End";
        case CanonicalConcept::ProcessContainer: return "ProcessContainer";
        case CanonicalConcept::Variable: return "Variable";
        case CanonicalConcept::AssignmentConcept: return "AssignmentConcept";
        case CanonicalConcept::MessageSend: return "MessageSend";
        case CanonicalConcept::MessageReceive: return "MessageReceive";
        case CanonicalConcept::Loop: return "Loop";
    }
    return "?";
}

inline CanonicalConcept concept_from_text(const std::string& s) {
    static const std::map<std::string, CanonicalConcept> table = {
        {"Task", CanonicalConcept::Task},
        {"Performer", CanonicalConcept::Performer},
        {"SimpleTransition", CanonicalConcept::SimpleTransition},
        {"IncomingTransition", CanonicalConcept::IncomingTransition},
        {"OutgoingTransition", CanonicalConcept::OutgoingTransition},
        {"Decision", CanonicalConcept::Decision},
        {"Fork", CanonicalConcept::Fork},
        {"Merge", CanonicalConcept::Merge},
        {"Join", CanonicalConcept::Join},
        {"Start", CanonicalConcept::Start},
        {"End", CanonicalConcept::End},
        {"ProcessContainer", CanonicalConcept::ProcessContainer},
        {"Variable", CanonicalConcept::Variable},
        {"AssignmentConcept", CanonicalConcept::AssignmentConcept},
        {"MessageSend", CanonicalConcept::MessageSend},
        {"MessageReceive", CanonicalConcept::MessageReceive},
        {"Loop", CanonicalConcept::Loop},
    };
    auto it = table.find(s);
    if (it == table.end()) throw ParseError(s, "unknown canonical concept");
    return it->second;
}

struct TraceLink {
    std::string source;  // AD element reference
    CanonicalConcept canonical = CanonicalConcept::Task;
    std::string target;  // BPMN element id
};

struct TraceMap {
    std::vector<TraceLink> links;

    std::vector<const TraceLink*> of_source(const std::string& id) const {
        std::vector<const TraceLink*> out;
        for (const TraceLink& l : links)
            if (l.source == id) out.push_back(&l);
        return out;
    }
    const TraceLink* of_target(const std::string& id) const {
        for (const TraceLink& l : links)
            if (l.target == id) return &l;
        return nullptr;
    }
};

inline std::string to_text(const TraceMap& t) {
    std::vector<std::string> lines;
    for (const TraceLink& l : t.links)
        lines.push_back(l.source + " " + to_text(l.canonical) + " " + l.target);
    std::sort(lines.begin(), lines.end());
    std::string out;
    for (const std::string& s : lines) {
        out += s;
        out += '\n';
    }
    return out;
}

inline TraceMap parse_trace(const std::string& text) {
    TraceMap t;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string src, concept_name, tgt, extra;
        if (!(ls >> src >> concept_name >> tgt) || (ls >> extra))
            throw ParseError(line, "trace lines are `source concept target`");
        t.links.push_back({src, concept_from_text(concept_name), tgt});
    }
    return t;
}

struct TransformResult {
    BpmnModel model;
    TraceMap trace;
};

namespace detail {

// Interrupting accepts with a concrete target become boundary events;
// without one there is nothing to attach to, so they degrade to receive
// tasks (the validator then reports them as unreachable — a model defect).
inline bool is_boundary_accept(const Node& n) {
    return n.kind == NodeKind::Accept && n.interrupting && !n.interrupts.empty();
}

template <typename T>
std::vector<const T*> sorted_ptrs(const std::vector<T>& v) {
    std::vector<const T*> out;
    for (const T& e : v) out.push_back(&e);
    std::sort(out.begin(), out.end(), [](const T* a, const T* b) { return a->id < b->id; });
    return out;
}

class Transformer {
  public:
    explicit Transformer(const ProcessModel& m) : m_(m), idx_(m) {}

    TransformResult run() {
        assign_pools();
        for (const Activity* a : sorted_ptrs(m_.activities)) build_process(*a);
        build_message_flows();
        return {std::move(out_), std::move(trace_)};
    }

  private:
    void link(const std::string& src, CanonicalConcept c, const std::string& tgt) {
        trace_.links.push_back({src, c, tgt});
    }

    std::string performer_name(const std::string& id) const {
        auto it = idx_.performer.find(id);
        if (it == idx_.performer.end() || it->second->name.empty()) return id;
        return it->second->name;
    }

    // Pools: one per main activity; the call graph (calls + loop bodies)
    // claims the remaining activities for the first main that reaches them.
    void assign_pools() {
        std::vector<const Activity*> mains = main_activities(m_);
        std::sort(mains.begin(), mains.end(),
                  [](const Activity* a, const Activity* b) { return a->id < b->id; });
        for (const Activity* main : mains) {
            Pool pool;
            pool.id = main->id + "_pool";
            pool.name = main->name;
            std::vector<std::string> work{main->id};
            while (!work.empty()) {
                std::string id = work.back();
                work.pop_back();
                if (poolOf_.count(id) || !idx_.activity.count(id)) continue;
                poolOf_[id] = pool.id;
                pool.processes.push_back(id);
                for (const Node* n : sorted_ptrs(idx_.activity.at(id)->nodes)) {
                    if (!n->calls.empty()) work.push_back(n->calls);
                    if (n->kind == NodeKind::ForEach) work.push_back(n->body);
                }
            }
            link(main->id, CanonicalConcept::ProcessContainer, pool.id);
            out_.pools.push_back(std::move(pool));
        }
        // Activities no main reaches still need a home.
        if (!out_.pools.empty()) {
            for (const Activity* a : sorted_ptrs(m_.activities))
                if (!poolOf_.count(a->id)) {
                    poolOf_[a->id] = out_.pools.front().id;
                    out_.pools.front().processes.push_back(a->id);
                }
        }
    }

    void build_process(const Activity& a) {
        Process p;
        p.id = a.id;
        p.name = a.name;
        link(a.id, CanonicalConcept::ProcessContainer, p.id);

        std::vector<const Node*> nodes = sorted_ptrs(a.nodes);
        const Node* initial = nullptr;
        std::vector<const Node*> inParams, outParams;
        bool hasFinal = false, hasEndSend = false;
        for (const Node* n : nodes) {
            if (n->kind == NodeKind::Initial && !initial) initial = n;
            if (n->kind == NodeKind::Final) hasFinal = true;
            if (n->kind == NodeKind::Send && n->endAction) hasEndSend = true;
            if (n->kind == NodeKind::Param)
                (n->paramDir == PinDir::In ? inParams : outParams).push_back(n);
        }
        const Node* startParam =
            (!initial && !inParams.empty()) ? inParams.front() : nullptr;
        const Node* endParam =
            (!hasFinal && !hasEndSend && !outParams.empty()) ? outParams.front() : nullptr;
        std::string startAnchor = initial  ? initial->id
                                  : startParam ? startParam->id + "_start"
                                               : "";
        std::string endAnchor;  // first finishing node by id, else the param event
        for (const Node* n : nodes) {
            if (n->kind == NodeKind::Final || (n->kind == NodeKind::Send && n->endAction)) {
                endAnchor = n->id;
                break;
            }
        }
        if (endAnchor.empty() && endParam) endAnchor = endParam->id + "_end";

        std::map<std::string, std::string> elem;  // node id -> flow element id
        for (const Node* np : nodes) {
            const Node& n = *np;
            switch (n.kind) {
                case NodeKind::Action: {
                    if (n.calls.empty()) {
                        TaskKind k = TaskKind::Plain;
                        if (n.actionKind == ActionKind::Service) k = TaskKind::Service;
                        if (n.actionKind == ActionKind::User) k = TaskKind::User;
                        if (n.actionKind == ActionKind::Manual) k = TaskKind::Manual;
                        p.tasks.push_back(
                            {n.id, n.name, k, n.performer.empty() ? "" : performer_name(n.performer), ""});
                    } else {
                        p.subprocesses.push_back({n.id, n.name, true, n.calls, false});
                    }
                    elem[n.id] = n.id;
                    link(n.id, CanonicalConcept::Task, n.id);
                    break;
                }
                case NodeKind::ForEach:
                    p.subprocesses.push_back({n.id, n.name, true, n.body, true});
                    elem[n.id] = n.id;
                    link(n.id, CanonicalConcept::Loop, n.id);
                    break;
                case NodeKind::Send:
                    if (n.endAction) p.endEvents.push_back({n.id, true, n.signal});
                    else p.tasks.push_back({n.id, n.name, TaskKind::Send, "", n.signal});
                    elem[n.id] = n.id;
                    link(n.id, CanonicalConcept::MessageSend, n.id);
                    break;
                case NodeKind::Accept:
                    if (is_boundary_accept(n)) p.boundaryEvents.push_back({n.id, n.interrupts, n.signal});
                    else p.tasks.push_back({n.id, n.name, TaskKind::Receive, "", n.signal});
                    elem[n.id] = n.id;
                    link(n.id, CanonicalConcept::MessageReceive, n.id);
                    break;
                case NodeKind::Initial:
                    p.startEvents.push_back({n.id});
                    elem[n.id] = n.id;
                    link(n.id, CanonicalConcept::Start, n.id);
                    break;
                case NodeKind::Final:
                    p.endEvents.push_back({n.id, false, ""});
                    elem[n.id] = n.id;
                    link(n.id, CanonicalConcept::End, n.id);
                    break;
                case NodeKind::Param: {
                    std::string propId = n.id + "_prop";
                    p.properties.push_back({propId, n.id, n.paramType});
                    link(n.id, CanonicalConcept::Variable, propId);
                    if (np == startParam) {
                        p.startEvents.push_back({startAnchor});
                        elem[n.id] = startAnchor;
                        link(n.id, CanonicalConcept::Start, startAnchor);
                    } else if (np == endParam) {
                        p.endEvents.push_back({endAnchor, false, ""});
                        elem[n.id] = endAnchor;
                        link(n.id, CanonicalConcept::End, endAnchor);
                    } else {
                        // Extra params carry data only; their edges re-anchor.
                        elem[n.id] = n.paramDir == PinDir::In ? startAnchor : endAnchor;
                    }
                    break;
                }
                case NodeKind::Decision:
                    p.gateways.push_back({n.id, GatewayKind::Exclusive, GatewayRole::Split});
                    elem[n.id] = n.id;
                    link(n.id, CanonicalConcept::Decision, n.id);
                    break;
                case NodeKind::Merge:
                    p.gateways.push_back({n.id, GatewayKind::Exclusive, GatewayRole::Merge});
                    elem[n.id] = n.id;
                    link(n.id, CanonicalConcept::Merge, n.id);
                    break;
                case NodeKind::Fork:
                    p.gateways.push_back({n.id, GatewayKind::Parallel, GatewayRole::Split});
                    elem[n.id] = n.id;
                    link(n.id, CanonicalConcept::Fork, n.id);
                    break;
                case NodeKind::Join:
                    p.gateways.push_back({n.id, GatewayKind::Parallel, GatewayRole::Merge});
                    elem[n.id] = n.id;
                    link(n.id, CanonicalConcept::Join, n.id);
                    break;
            }
        }

        for (const Edge* ep : sorted_ptrs(a.edges)) {
            const Edge& e = *ep;
            bool srcPin = idx_.pin.count(e.source) > 0;
            bool tgtPin = idx_.pin.count(e.target) > 0;
            const Node* srcNode = srcPin ? idx_.pinOwner.at(e.source) : idx_.node.at(e.source);
            const Node* tgtNode = tgtPin ? idx_.pinOwner.at(e.target) : idx_.node.at(e.target);
            std::string cond;
            if (!e.guardText.empty()) {
                bool fromDecision = !srcPin && srcNode->kind == NodeKind::Decision;
                bool fromReceive = srcPin && srcNode->kind == NodeKind::Accept &&
                                   !is_boundary_accept(*srcNode);
                if (fromDecision || fromReceive) cond = e.guardText;
            }
            p.flows.push_back({e.id, elem[srcNode->id], elem[tgtNode->id], cond});
            CanonicalConcept c = CanonicalConcept::SimpleTransition;
            if (srcPin && !tgtPin) c = CanonicalConcept::OutgoingTransition;
            if (!srcPin && tgtPin) c = CanonicalConcept::IncomingTransition;
            link(e.id, c, e.id);
        }

        {
            std::vector<const VariableDecl*> vars;
            for (const VariableDecl& v : a.variables) vars.push_back(&v);
            std::sort(vars.begin(), vars.end(),
                      [](const VariableDecl* x, const VariableDecl* y) { return x->name < y->name; });
            for (const VariableDecl* v : vars) {
                std::string propId = a.id + "_prop_" + v->name;
                p.properties.push_back({propId, v->name, v->type});
                link(a.id + "." + v->name, CanonicalConcept::Variable, propId);
            }
        }

        for (const Node* n : nodes)
            for (size_t k = 0; k < n->assignments.size(); ++k) {
                const auto& as = n->assignments[k];
                std::string id = n->id + "_assign" + std::to_string(k);
                p.assignments.push_back({id, elem[n->id], as.targetText, as.exprText});
                link(n->id + "/assign" + std::to_string(k), CanonicalConcept::AssignmentConcept, id);
            }

        {
            std::map<std::string, std::vector<std::string>> members;  // performer id -> elements
            for (const Node* n : nodes)
                if (!n->performer.empty() && elem.count(n->id))
                    members[n->performer].push_back(elem[n->id]);
            for (const auto& [perf, mem] : members) {
                std::string laneId = p.id + "_lane_" + perf;
                p.lanes.push_back({laneId, performer_name(perf), mem});
                link(perf, CanonicalConcept::Performer, laneId);
            }
        }

        out_.processes.push_back(std::move(p));
    }

    // One message flow per (send, matching accept) pair; matching means the
    // same signal, constrained to the send's target activity when named.
    void build_message_flows() {
        for (const Activity* a : sorted_ptrs(m_.activities)) {
            for (const Node* s : sorted_ptrs(a->nodes)) {
                if (s->kind != NodeKind::Send) continue;
                int k = 0;
                for (const Activity* a2 : sorted_ptrs(m_.activities)) {
                    if (!s->targetActivity.empty() && a2->id != s->targetActivity) continue;
                    for (const Node* r : sorted_ptrs(a2->nodes)) {
                        if (r->kind != NodeKind::Accept || r->signal != s->signal) continue;
                        std::string id = s->id + "_msg" + std::to_string(k++);
                        out_.messageFlows.push_back({id, s->id, r->id, s->signal});
                        link(s->id, CanonicalConcept::MessageSend, id);
                    }
                }
            }
        }
    }

    const ProcessModel& m_;
    ModelIndex idx_;
    BpmnModel out_;
    TraceMap trace_;
    std::map<std::string, std::string> poolOf_;
};

}  // namespace detail

inline TransformResult transform(const ProcessModel& m) {
    return detail::Transformer(m).run();
}

// ---------------------------------------------------------------------------
// Trace checking

// Every in-scope source element (activities, nodes, edges, variables,
// assignments, referenced performers) must carry at least one link; every
// BPMN element exactly one. Rule T1 covers the source side, T2 the targets.
inline ValidationReport check_trace_totality(const ProcessModel& ad, const BpmnModel& bpmn,
                                             const TraceMap& trace) {
    ValidationReport report;
    auto add = [&report](const std::string& rule, std::vector<std::string> els,
                         const std::string& msg) {
        report.findings.push_back({rule, Finding::Severity::Error, std::move(els), msg});
    };

    std::set<std::string> adRefs;
    for (const Activity& a : ad.activities) {
        adRefs.insert(a.id);
        for (const VariableDecl& v : a.variables) adRefs.insert(a.id + "." + v.name);
        for (const Node& n : a.nodes) {
            adRefs.insert(n.id);
            if (!n.performer.empty()) adRefs.insert(n.performer);
            for (size_t k = 0; k < n.assignments.size(); ++k)
                adRefs.insert(n.id + "/assign" + std::to_string(k));
        }
        for (const Edge& e : a.edges) adRefs.insert(e.id);
    }

    std::set<std::string> bpmnIds;
    for (const Pool& p : bpmn.pools) bpmnIds.insert(p.id);
    for (const MessageFlow& f : bpmn.messageFlows) bpmnIds.insert(f.id);
    for (const Process& p : bpmn.processes) {
        bpmnIds.insert(p.id);
        for (const auto& [id, kind] : detail::flow_elements(p)) bpmnIds.insert(id);
        for (const SequenceFlow& f : p.flows) bpmnIds.insert(f.id);
        for (const Property& pr : p.properties) bpmnIds.insert(pr.id);
        for (const Assignment& as : p.assignments) bpmnIds.insert(as.id);
        for (const Lane& l : p.lanes) bpmnIds.insert(l.id);
    }

    std::set<std::string> linkedSources;
    std::map<std::string, int> targetCount;
    for (const TraceLink& l : trace.links) {
        linkedSources.insert(l.source);
        ++targetCount[l.target];
        if (!adRefs.count(l.source))
            add("T1", {l.source}, "link source '" + l.source + "' is not a model element");
        if (!bpmnIds.count(l.target))
            add("T2", {l.target}, "link target '" + l.target + "' is not a produced element");
    }
    for (const std::string& ref : adRefs)
        if (!linkedSources.count(ref)) add("T1", {ref}, "element '" + ref + "' left untraced");
    for (const std::string& id : bpmnIds) {
        int c = targetCount.count(id) ? targetCount.at(id) : 0;
        if (c != 1)
            add("T2", {id},
                "element '" + id + "' has " + std::to_string(c) + " trace links (want 1)");
    }
    return report;
}

// ---------------------------------------------------------------------------
// Structural skeleton equivalence

struct SkeletonVerdict {
    bool ok = true;
    std::string witness;  // first mismatch, empty when ok
};

// Collapses both sides to labeled control-flow graphs and verifies that the
// trace is a label- and edge-preserving correspondence: every node maps to a
// flow element of the right concept, every edge to a flow joining the mapped
// endpoints (param-anchored edges may land on any start/end event), guard
// text survives exactly where the subset allows it, and the per-kind element
// counts agree. The first violated law is reported as the witness.
inline SkeletonVerdict structural_skeleton_equivalence(const ProcessModel& ad,
                                                       const BpmnModel& bpmn,
                                                       const TraceMap& trace) {
    SkeletonVerdict v;
    auto miss = [&v](const std::string& w) {
        if (v.ok) {
            v.ok = false;
            v.witness = w;
        }
    };
    ModelIndex idx(ad);

    std::map<std::string, const Process*> processes;
    for (const Process& p : bpmn.processes) processes[p.id] = &p;

    std::multimap<std::string, const TraceLink*> bySource;
    for (const TraceLink& l : trace.links) bySource.emplace(l.source, &l);

    for (const Activity& a : ad.activities) {
        if (!v.ok) break;
        auto pit = processes.find(a.id);
        if (pit == processes.end()) {
            miss("activity " + a.id + " has no process");
            break;
        }
        const Process& p = *pit->second;
        std::map<std::string, std::string> elems = detail::flow_elements(p);
        std::set<std::string> startIds, endIds;
        for (const StartEvent& s : p.startEvents) startIds.insert(s.id);
        for (const EndEvent& e : p.endEvents) endIds.insert(e.id);

        // Node -> flow element, with the concept label checked on the way.
        std::map<std::string, std::string> nodeElem;
        for (const Node& n : a.nodes) {
            std::vector<const TraceLink*> flowLinks;
            auto range = bySource.equal_range(n.id);
            for (auto it = range.first; it != range.second; ++it)
                if (elems.count(it->second->target)) flowLinks.push_back(it->second);
            if (n.kind == NodeKind::Param) {
                if (flowLinks.size() > 1) {
                    miss("param " + n.id + " maps to several flow elements");
                    break;
                }
                if (!flowLinks.empty()) {
                    CanonicalConcept want = n.paramDir == PinDir::In ? CanonicalConcept::Start
                                                                     : CanonicalConcept::End;
                    if (flowLinks[0]->canonical != want) {
                        miss("param " + n.id + " traced as " +
                             to_text(flowLinks[0]->canonical));
                        break;
                    }
                    nodeElem[n.id] = flowLinks[0]->target;
                }
                continue;
            }
            if (flowLinks.size() != 1) {
                miss("node " + n.id + " maps to " + std::to_string(flowLinks.size()) +
                     " flow elements (want 1)");
                break;
            }
            CanonicalConcept want;
            switch (n.kind) {
                case NodeKind::Action: want = CanonicalConcept::Task; break;
                case NodeKind::ForEach: want = CanonicalConcept::Loop; break;
                case NodeKind::Send: want = CanonicalConcept::MessageSend; break;
                case NodeKind::Accept: want = CanonicalConcept::MessageReceive; break;
                case NodeKind::Initial: want = CanonicalConcept::Start; break;
                case NodeKind::Final: want = CanonicalConcept::End; break;
                case NodeKind::Decision: want = CanonicalConcept::Decision; break;
                case NodeKind::Merge: want = CanonicalConcept::Merge; break;
                case NodeKind::Fork: want = CanonicalConcept::Fork; break;
                case NodeKind::Join: want = CanonicalConcept::Join; break;
                default: want = CanonicalConcept::Task; break;
            }
            if (flowLinks[0]->canonical != want) {
                miss("node " + n.id + " traced as " + to_text(flowLinks[0]->canonical) +
                     ", expected " + to_text(want));
                break;
            }
            nodeElem[n.id] = flowLinks[0]->target;
            if (detail::is_boundary_accept(n)) {
                // The attachment must follow the interrupted node's image.
                for (const BoundaryEvent& b : p.boundaryEvents)
                    if (b.id == flowLinks[0]->target) {
                        auto host = bySource.equal_range(n.interrupts);
                        bool okAttach = false;
                        for (auto it = host.first; it != host.second; ++it)
                            if (it->second->target == b.attachedTo) okAttach = true;
                        if (!okAttach)
                            miss("boundary event " + b.id + " attached to " + b.attachedTo +
                                 ", not the image of " + n.interrupts);
                    }
            }
        }
        if (!v.ok) break;

        // Element counts per kind.
        size_t adTasks = 0, adSubs = 0, adExcl = 0, adPar = 0, adBoundary = 0;
        size_t finals = 0, endSends = 0, inParams = 0, outParams = 0, initials = 0;
        for (const Node& n : a.nodes) {
            switch (n.kind) {
                case NodeKind::Action: (n.calls.empty() ? adTasks : adSubs)++; break;
                case NodeKind::ForEach: ++adSubs; break;
                case NodeKind::Send:
                    n.endAction ? void(++endSends) : void(++adTasks);
                    break;
                case NodeKind::Accept:
                    detail::is_boundary_accept(n) ? void(++adBoundary) : void(++adTasks);
                    break;
                case NodeKind::Decision:
                case NodeKind::Merge: ++adExcl; break;
                case NodeKind::Fork:
                case NodeKind::Join: ++adPar; break;
                case NodeKind::Initial: ++initials; break;
                case NodeKind::Final: ++finals; break;
                case NodeKind::Param:
                    (n.paramDir == PinDir::In ? inParams : outParams)++;
                    break;
            }
        }
        size_t wantStarts = initials ? initials : (inParams ? 1 : 0);
        size_t wantEnds = finals + endSends +
                          ((finals + endSends == 0 && outParams > 0) ? 1 : 0);
        size_t gwExcl = 0, gwPar = 0;
        for (const Gateway& g : p.gateways)
            (g.kind == GatewayKind::Exclusive ? gwExcl : gwPar)++;
        auto law = [&miss, &a](const std::string& what, size_t got, size_t want) {
            if (got != want)
                miss(a.id + ": " + what + " count " + std::to_string(got) + ", expected " +
                     std::to_string(want));
        };
        law("task", p.tasks.size(), adTasks);
        law("subprocess", p.subprocesses.size(), adSubs);
        law("exclusive gateway", gwExcl, adExcl);
        law("parallel gateway", gwPar, adPar);
        law("boundary event", p.boundaryEvents.size(), adBoundary);
        law("start event", p.startEvents.size(), wantStarts);
        law("end event", p.endEvents.size(), wantEnds);
        law("flow", p.flows.size(), a.edges.size());
        if (!v.ok) break;

        std::map<std::string, const SequenceFlow*> flowById;
        for (const SequenceFlow& f : p.flows) flowById[f.id] = &f;
        for (const Edge& e : a.edges) {
            auto range = bySource.equal_range(e.id);
            if (range.first == range.second) {
                miss("edge " + e.id + " left untraced");
                break;
            }
            const TraceLink& l = *range.first->second;
            bool srcPin = idx.pin.count(e.source) > 0;
            bool tgtPin = idx.pin.count(e.target) > 0;
            CanonicalConcept want = CanonicalConcept::SimpleTransition;
            if (srcPin && !tgtPin) want = CanonicalConcept::OutgoingTransition;
            if (!srcPin && tgtPin) want = CanonicalConcept::IncomingTransition;
            if (l.canonical != want) {
                miss("edge " + e.id + " traced as " + to_text(l.canonical));
                break;
            }
            auto fit = flowById.find(l.target);
            if (fit == flowById.end()) {
                miss("edge " + e.id + " maps to missing flow " + l.target);
                break;
            }
            const SequenceFlow& f = *fit->second;
            const Node* srcNode = srcPin ? idx.pinOwner.at(e.source) : idx.node.at(e.source);
            const Node* tgtNode = tgtPin ? idx.pinOwner.at(e.target) : idx.node.at(e.target);
            auto endpoint_ok = [&](const Node& n, const std::string& got,
                                   const std::set<std::string>& anchors) {
                auto it = nodeElem.find(n.id);
                if (it != nodeElem.end()) return got == it->second;
                return n.kind == NodeKind::Param && anchors.count(got) > 0;
            };
            if (!endpoint_ok(*srcNode, f.source, startIds)) {
                miss("flow " + f.id + " starts at " + f.source + ", expected the image of " +
                     srcNode->id);
                break;
            }
            if (!endpoint_ok(*tgtNode, f.target, endIds)) {
                miss("flow " + f.id + " ends at " + f.target + ", expected the image of " +
                     tgtNode->id);
                break;
            }
            bool fromDecision = !srcPin && srcNode->kind == NodeKind::Decision;
            bool fromReceive = srcPin && srcNode->kind == NodeKind::Accept &&
                               !detail::is_boundary_accept(*srcNode);
            std::string wantCond = (fromDecision || fromReceive) ? e.guardText : "";
            if (f.condition != wantCond) {
                miss("flow " + f.id + " condition '" + f.condition + "', expected '" +
                     wantCond + "'");
                break;
            }
        }
    }
    return v;
}

}  // namespace flowkit::bpmn
