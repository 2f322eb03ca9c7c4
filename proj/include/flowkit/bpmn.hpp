#pragma once

// The BPMN-subset target model, its validator and the .bpmnflow document
// format (JSON, canonical: object keys sorted, element arrays sorted by id,
// defaults omitted — the same conventions as the .flow format).
//
// Top level:
//   {
//     "pools":        [{"id","name"?,"processes":[process ids]}],
//     "processes":    [ ... ],
//     "messageFlows": [{"id","source","target","signal"?}]
//   }
//
// Process:
//   {"id", "name"?,
//    "start":        [{"id"}],
//    "end":          [{"id","message"?,"signal"?}],
//    "boundary":     [{"id","attachedTo","signal"?}],
//    "tasks":        [{"id","name"?,"kind"?,"performer"?,"signal"?}],
//    "subprocesses": [{"id","name"?,"call"?,"calledProcess"?,"loop"?}],
//    "gateways":     [{"id","kind","role"}],
//    "flows":        [{"id","source","target","condition"?}],
//    "properties":   [{"id","name","type"?}],
//    "assignments":  [{"id","owner","target","expr"}],   (author order kept)
//    "lanes":        [{"id","performer","members":[...]}]}
//
// Task kinds: plain (default) | service | user | manual | send | receive.
// Gateways: kind exclusive|parallel, role split|merge.
//
// Validation rules:
//   B1  every flow element reachable from a start event (boundary events
//       count as reached once the element they attach to is)
//   B2  no dangling references: flow endpoints, boundary attachments, lane
//       members, assignment owners, called processes, message-flow endpoints
//       and pool membership (each process sits in exactly one pool)
//   B3  gateway arity: a split has >= 2 outgoing flows, a merge >= 2 incoming
//   B4  conditions appear only on flows leaving exclusive gateways or
//       receive tasks
//   B5  boundary events attach only to tasks or subprocesses

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "flowkit/common.hpp"
#include "flowkit/validate.hpp"

namespace flowkit::bpmn {

enum class TaskKind { Plain, Service, User, Manual, Send, Receive };
enum class GatewayKind { Exclusive, Parallel };
enum class GatewayRole { Split, Merge };

struct Task {
    std::string id;
    std::string name;
    TaskKind kind = TaskKind::Plain;
    std::string performer;  // performer name; lanes carry the same grouping
    std::string signal;     // send/receive tasks only
};

struct Subprocess {
    std::string id;
    std::string name;
    bool isCall = false;
    std::string calledProcess;  // process id, for call subprocesses
    bool loop = false;
};

struct Gateway {
    std::string id;
    GatewayKind kind = GatewayKind::Exclusive;
    GatewayRole role = GatewayRole::Split;
};

struct StartEvent {
    std::string id;
};

struct EndEvent {
    std::string id;
    bool message = false;
    std::string signal;  // message end events only
};

struct BoundaryEvent {
    std::string id;
    std::string attachedTo;  // a task or subprocess id
    std::string signal;
};

struct SequenceFlow {
    std::string id;
    std::string source;
    std::string target;
    std::string condition;  // verbatim guard text; "" = unconditional
};

struct Property {
    std::string id;
    std::string name;
    std::string type;
};

struct Assignment {
    std::string id;
    std::string owner;  // the task/subprocess the assignment belongs to
    std::string target;
    std::string expr;
};

struct Lane {
    std::string id;
    std::string performer;             // display name
    std::vector<std::string> members;  // task/subprocess ids
};

struct Process {
    std::string id;
    std::string name;
    std::vector<Task> tasks;
    std::vector<Subprocess> subprocesses;
    std::vector<Gateway> gateways;
    std::vector<StartEvent> startEvents;
    std::vector<EndEvent> endEvents;
    std::vector<BoundaryEvent> boundaryEvents;
    std::vector<SequenceFlow> flows;
    std::vector<Property> properties;
    std::vector<Assignment> assignments;
    std::vector<Lane> lanes;
};

struct Pool {
    std::string id;
    std::string name;
    std::vector<std::string> processes;  // process ids
};

struct MessageFlow {
    std::string id;
    std::string source;  // send task or message end event
    std::string target;  // receive task or boundary event
    std::string signal;
};

struct BpmnModel {
    std::vector<Pool> pools;
    std::vector<Process> processes;
    std::vector<MessageFlow> messageFlows;
};

// Findings reuse the process-model report shape (rule id, severity,
// elements, message) so tooling can treat both uniformly.
using BpmnValidationReport = ValidationReport;

namespace detail {

// kind tags: task, subprocess, gateway, start, end, boundary
inline std::map<std::string, std::string> flow_elements(const Process& p) {
    std::map<std::string, std::string> out;
    for (const auto& e : p.tasks) out[e.id] = "task";
    for (const auto& e : p.subprocesses) out[e.id] = "subprocess";
    for (const auto& e : p.gateways) out[e.id] = "gateway";
    for (const auto& e : p.startEvents) out[e.id] = "start";
    for (const auto& e : p.endEvents) out[e.id] = "end";
    for (const auto& e : p.boundaryEvents) out[e.id] = "boundary";
    return out;
}

}  // namespace detail

inline BpmnValidationReport validate_bpmn(const BpmnModel& m) {
    BpmnValidationReport report;
    auto add = [&report](const std::string& rule, std::vector<std::string> els,
                         const std::string& msg) {
        report.findings.push_back({rule, Finding::Severity::Error, std::move(els), msg});
    };

    // Pool membership: every process in exactly one pool, no dangling refs.
    std::map<std::string, int> membership;
    std::set<std::string> processIds;
    for (const Process& p : m.processes) {
        membership[p.id] = 0;
        processIds.insert(p.id);
    }
    for (const Pool& pool : m.pools) {
        for (const std::string& pid : pool.processes) {
            if (!processIds.count(pid))
                add("B2", {pool.id, pid}, "pool references unknown process '" + pid + "'");
            else
                ++membership[pid];
        }
    }
    for (const Process& p : m.processes) {
        if (membership[p.id] != 1)
            add("B2", {p.id},
                "process belongs to " + std::to_string(membership[p.id]) +
                    " pools (want exactly 1)");
    }

    std::map<std::string, std::string> allElements;  // across processes
    for (const Process& p : m.processes)
        for (const auto& [id, kind] : detail::flow_elements(p)) allElements[id] = kind;

    for (const Process& p : m.processes) {
        std::map<std::string, std::string> elems = detail::flow_elements(p);

        std::map<std::string, std::vector<std::string>> nexts;
        std::map<std::string, int> inDeg, outDeg;
        for (const SequenceFlow& f : p.flows) {
            if (!elems.count(f.source))
                add("B2", {f.id, f.source}, "flow leaves unknown element '" + f.source + "'");
            if (!elems.count(f.target))
                add("B2", {f.id, f.target}, "flow enters unknown element '" + f.target + "'");
            if (elems.count(f.source) && elems.count(f.target)) {
                nexts[f.source].push_back(f.target);
                ++outDeg[f.source];
                ++inDeg[f.target];
            }
            if (!f.condition.empty()) {
                bool exclusiveGw = false, receiveTask = false;
                for (const Gateway& g : p.gateways)
                    if (g.id == f.source) exclusiveGw = g.kind == GatewayKind::Exclusive;
                for (const Task& t : p.tasks)
                    if (t.id == f.source) receiveTask = t.kind == TaskKind::Receive;
                if (!exclusiveGw && !receiveTask)
                    add("B4", {f.id},
                        "condition on a flow that leaves neither an exclusive gateway nor a "
                        "receive task");
            }
        }

        for (const Gateway& g : p.gateways) {
            if (g.role == GatewayRole::Split && outDeg[g.id] < 2)
                add("B3", {g.id},
                    "split gateway has " + std::to_string(outDeg[g.id]) +
                        " outgoing flows (want >= 2)");
            if (g.role == GatewayRole::Merge && inDeg[g.id] < 2)
                add("B3", {g.id},
                    "merge gateway has " + std::to_string(inDeg[g.id]) +
                        " incoming flows (want >= 2)");
        }

        for (const BoundaryEvent& b : p.boundaryEvents) {
            auto it = elems.find(b.attachedTo);
            if (it == elems.end())
                add("B2", {b.id}, "boundary event attached to unknown element '" +
                                      b.attachedTo + "'");
            else if (it->second != "task" && it->second != "subprocess")
                add("B5", {b.id, b.attachedTo},
                    "boundary event attached to a " + it->second +
                        " (only tasks and subprocesses carry boundary events)");
        }

        for (const Subprocess& s : p.subprocesses)
            if (s.isCall && !processIds.count(s.calledProcess))
                add("B2", {s.id}, "call subprocess invokes unknown process '" +
                                      s.calledProcess + "'");
        for (const Lane& l : p.lanes)
            for (const std::string& mem : l.members)
                if (!elems.count(mem))
                    add("B2", {l.id, mem}, "lane lists unknown member '" + mem + "'");
        for (const Assignment& a : p.assignments)
            if (!elems.count(a.owner))
                add("B2", {a.id}, "assignment owned by unknown element '" + a.owner + "'");

        // Reachability from the start events; a boundary event becomes
        // reachable with its host, then its own outgoing flows continue.
        std::set<std::string> seen;
        std::vector<std::string> work;
        for (const StartEvent& s : p.startEvents)
            if (seen.insert(s.id).second) work.push_back(s.id);
        while (!work.empty()) {
            std::string cur = work.back();
            work.pop_back();
            for (const std::string& nxt : nexts[cur])
                if (seen.insert(nxt).second) work.push_back(nxt);
            for (const BoundaryEvent& b : p.boundaryEvents)
                if (b.attachedTo == cur && seen.insert(b.id).second) work.push_back(b.id);
        }
        std::vector<std::string> unreachable;
        for (const auto& [id, kind] : elems)
            if (!seen.count(id)) unreachable.push_back(id);
        if (!unreachable.empty())
            add("B1", unreachable,
                std::to_string(unreachable.size()) + " element(s) unreachable from the start");
    }

    for (const MessageFlow& f : m.messageFlows) {
        if (!allElements.count(f.source))
            add("B2", {f.id, f.source},
                "message flow from unknown element '" + f.source + "'");
        if (!allElements.count(f.target))
            add("B2", {f.id, f.target}, "message flow into unknown element '" + f.target + "'");
    }
    return report;
}

// ---------------------------------------------------------------------------
// Serialization

namespace detail {

using nlohmann::json;

template <typename T, typename Key>
std::vector<const T*> by_key(const std::vector<T>& v, Key key) {
    std::vector<const T*> out;
    for (const T& e : v) out.push_back(&e);
    std::sort(out.begin(), out.end(),
              [&key](const T* a, const T* b) { return key(*a) < key(*b); });
    return out;
}

inline const char* task_kind_name(TaskKind k) {
    switch (k) {
        case TaskKind::Plain: return "plain";
        case TaskKind::Service: return "service";
        case TaskKind::User: return "user";
        case TaskKind::Manual: return "manual";
        case TaskKind::Send: return "send";
        case TaskKind::Receive: return "receive";
    }
    return "?";
}

inline json process_to_json(const Process& p) {
    json j;
    j["id"] = p.id;
    if (!p.name.empty()) j["name"] = p.name;
    if (!p.startEvents.empty()) {
        json arr = json::array();
        for (const StartEvent* e : by_key(p.startEvents, [](const StartEvent& x) { return x.id; })) {
            json ej;
            ej["id"] = e->id;
            arr.push_back(ej);
        }
        j["start"] = arr;
    }
    if (!p.endEvents.empty()) {
        json arr = json::array();
        for (const EndEvent* e : by_key(p.endEvents, [](const EndEvent& x) { return x.id; })) {
            json ej;
            ej["id"] = e->id;
            if (e->message) ej["message"] = true;
            if (!e->signal.empty()) ej["signal"] = e->signal;
            arr.push_back(ej);
        }
        j["end"] = arr;
    }
    if (!p.boundaryEvents.empty()) {
        json arr = json::array();
        for (const BoundaryEvent* e :
             by_key(p.boundaryEvents, [](const BoundaryEvent& x) { return x.id; })) {
            json ej;
            ej["id"] = e->id;
            ej["attachedTo"] = e->attachedTo;
            if (!e->signal.empty()) ej["signal"] = e->signal;
            arr.push_back(ej);
        }
        j["boundary"] = arr;
    }
    if (!p.tasks.empty()) {
        json arr = json::array();
        for (const Task* t : by_key(p.tasks, [](const Task& x) { return x.id; })) {
            json tj;
            tj["id"] = t->id;
            if (!t->name.empty()) tj["name"] = t->name;
            if (t->kind != TaskKind::Plain) tj["kind"] = task_kind_name(t->kind);
            if (!t->performer.empty()) tj["performer"] = t->performer;
            if (!t->signal.empty()) tj["signal"] = t->signal;
            arr.push_back(tj);
        }
        j["tasks"] = arr;
    }
    if (!p.subprocesses.empty()) {
        json arr = json::array();
        for (const Subprocess* s :
             by_key(p.subprocesses, [](const Subprocess& x) { return x.id; })) {
            json sj;
            sj["id"] = s->id;
            if (!s->name.empty()) sj["name"] = s->name;
            if (s->isCall) sj["call"] = true;
            if (!s->calledProcess.empty()) sj["calledProcess"] = s->calledProcess;
            if (s->loop) sj["loop"] = true;
            arr.push_back(sj);
        }
        j["subprocesses"] = arr;
    }
    if (!p.gateways.empty()) {
        json arr = json::array();
        for (const Gateway* g : by_key(p.gateways, [](const Gateway& x) { return x.id; })) {
            json gj;
            gj["id"] = g->id;
            gj["kind"] = g->kind == GatewayKind::Exclusive ? "exclusive" : "parallel";
            gj["role"] = g->role == GatewayRole::Split ? "split" : "merge";
            arr.push_back(gj);
        }
        j["gateways"] = arr;
    }
    if (!p.flows.empty()) {
        json arr = json::array();
        for (const SequenceFlow* f : by_key(p.flows, [](const SequenceFlow& x) { return x.id; })) {
            json fj;
            fj["id"] = f->id;
            fj["source"] = f->source;
            fj["target"] = f->target;
            if (!f->condition.empty()) fj["condition"] = f->condition;
            arr.push_back(fj);
        }
        j["flows"] = arr;
    }
    if (!p.properties.empty()) {
        json arr = json::array();
        for (const Property* pr : by_key(p.properties, [](const Property& x) { return x.id; })) {
            json pj;
            pj["id"] = pr->id;
            pj["name"] = pr->name;
            if (!pr->type.empty()) pj["type"] = pr->type;
            arr.push_back(pj);
        }
        j["properties"] = arr;
    }
    if (!p.assignments.empty()) {  // author order is significant, no sort
        json arr = json::array();
        for (const Assignment& a : p.assignments) {
            json aj;
            aj["id"] = a.id;
            aj["owner"] = a.owner;
            aj["target"] = a.target;
            aj["expr"] = a.expr;
            arr.push_back(aj);
        }
        j["assignments"] = arr;
    }
    if (!p.lanes.empty()) {
        json arr = json::array();
        for (const Lane* l : by_key(p.lanes, [](const Lane& x) { return x.id; })) {
            json lj;
            lj["id"] = l->id;
            lj["performer"] = l->performer;
            std::vector<std::string> mem = l->members;
            std::sort(mem.begin(), mem.end());
            lj["members"] = mem;
            arr.push_back(lj);
        }
        j["lanes"] = arr;
    }
    return j;
}

}  // namespace detail

inline std::string serialize_bpmn(const BpmnModel& m) {
    using nlohmann::json;
    json root = json::object();
    if (!m.pools.empty()) {
        json arr = json::array();
        for (const Pool* p : detail::by_key(m.pools, [](const Pool& x) { return x.id; })) {
            json pj;
            pj["id"] = p->id;
            if (!p->name.empty()) pj["name"] = p->name;
            std::vector<std::string> procs = p->processes;
            std::sort(procs.begin(), procs.end());
            pj["processes"] = procs;
            arr.push_back(pj);
        }
        root["pools"] = arr;
    }
    if (!m.processes.empty()) {
        json arr = json::array();
        for (const Process* p :
             detail::by_key(m.processes, [](const Process& x) { return x.id; }))
            arr.push_back(detail::process_to_json(*p));
        root["processes"] = arr;
    }
    if (!m.messageFlows.empty()) {
        json arr = json::array();
        for (const MessageFlow* f :
             detail::by_key(m.messageFlows, [](const MessageFlow& x) { return x.id; })) {
            json fj;
            fj["id"] = f->id;
            fj["source"] = f->source;
            fj["target"] = f->target;
            if (!f->signal.empty()) fj["signal"] = f->signal;
            arr.push_back(fj);
        }
        root["messageFlows"] = arr;
    }
    return root.dump(2) + "\n";
}

// Two models are structurally equal when their canonical documents coincide.
// (The canonical form already abstracts from element order; assignment order
// is significant and therefore preserved.)
inline bool structural_equal(const BpmnModel& a, const BpmnModel& b) {
    return serialize_bpmn(a) == serialize_bpmn(b);
}

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

struct BpmnReader {
    const json& root;
    BpmnModel m;

    explicit BpmnReader(const json& j) : root(j) {}

    [[noreturn]] static void fail(const std::string& where, const std::string& msg) {
        throw ParseError(where, msg);
    }

    static void check_keys(const json& j, const std::string& where,
                           std::initializer_list<const char*> allowed) {
        for (auto it = j.begin(); it != j.end(); ++it) {
            bool ok = false;
            for (const char* k : allowed)
                if (it.key() == k) ok = true;
            if (!ok) fail(where, "unknown key '" + it.key() + "'");
        }
    }

    static std::string str(const json& j, const char* key, const std::string& where,
                           bool required = true) {
        if (!j.contains(key)) {
            if (required) fail(where, std::string("missing '") + key + "'");
            return "";
        }
        if (!j.at(key).is_string()) fail(where, std::string("'") + key + "' must be a string");
        return j.at(key).get<std::string>();
    }

    static bool flag(const json& j, const char* key, const std::string& where) {
        if (!j.contains(key)) return false;
        if (!j.at(key).is_boolean()) fail(where, std::string("'") + key + "' must be a boolean");
        return j.at(key).get<bool>();
    }

    static const json* array(const json& j, const char* key, const std::string& where) {
        if (!j.contains(key)) return nullptr;
        if (!j.at(key).is_array()) fail(where, std::string("'") + key + "' must be an array");
        return &j.at(key);
    }

    BpmnModel read() {
        if (!root.is_object()) fail("document", "top level must be an object");
        check_keys(root, "document", {"pools", "processes", "messageFlows"});
        if (const json* a = array(root, "pools", "document"))
            for (const json& j : *a) read_pool(j);
        if (const json* a = array(root, "processes", "document"))
            for (const json& j : *a) read_process(j);
        if (const json* a = array(root, "messageFlows", "document"))
            for (const json& j : *a) {
                check_keys(j, "messageFlow", {"id", "source", "target", "signal"});
                MessageFlow f;
                f.id = str(j, "id", "messageFlow");
                f.source = str(j, "source", f.id);
                f.target = str(j, "target", f.id);
                f.signal = str(j, "signal", f.id, false);
                m.messageFlows.push_back(std::move(f));
            }
        return std::move(m);
    }

    void read_pool(const json& j) {
        check_keys(j, "pool", {"id", "name", "processes"});
        Pool p;
        p.id = str(j, "id", "pool");
        p.name = str(j, "name", p.id, false);
        if (const json* a = array(j, "processes", p.id))
            for (const json& e : *a) {
                if (!e.is_string()) fail(p.id, "pool process refs must be strings");
                p.processes.push_back(e.get<std::string>());
            }
        m.pools.push_back(std::move(p));
    }

    void read_process(const json& j) {
        check_keys(j, "process",
                   {"id", "name", "start", "end", "boundary", "tasks", "subprocesses",
                    "gateways", "flows", "properties", "assignments", "lanes"});
        Process p;
        p.id = str(j, "id", "process");
        p.name = str(j, "name", p.id, false);
        if (const json* a = array(j, "start", p.id))
            for (const json& e : *a) {
                check_keys(e, "start event", {"id"});
                p.startEvents.push_back({str(e, "id", "start event")});
            }
        if (const json* a = array(j, "end", p.id))
            for (const json& e : *a) {
                check_keys(e, "end event", {"id", "message", "signal"});
                EndEvent ev;
                ev.id = str(e, "id", "end event");
                ev.message = flag(e, "message", ev.id);
                ev.signal = str(e, "signal", ev.id, false);
                p.endEvents.push_back(std::move(ev));
            }
        if (const json* a = array(j, "boundary", p.id))
            for (const json& e : *a) {
                check_keys(e, "boundary event", {"id", "attachedTo", "signal"});
                BoundaryEvent ev;
                ev.id = str(e, "id", "boundary event");
                ev.attachedTo = str(e, "attachedTo", ev.id);
                ev.signal = str(e, "signal", ev.id, false);
                p.boundaryEvents.push_back(std::move(ev));
            }
        if (const json* a = array(j, "tasks", p.id))
            for (const json& e : *a) {
                check_keys(e, "task", {"id", "name", "kind", "performer", "signal"});
                Task t;
                t.id = str(e, "id", "task");
                t.name = str(e, "name", t.id, false);
                std::string kind = str(e, "kind", t.id, false);
                if (kind.empty() || kind == "plain") t.kind = TaskKind::Plain;
                else if (kind == "service") t.kind = TaskKind::Service;
                else if (kind == "user") t.kind = TaskKind::User;
                else if (kind == "manual") t.kind = TaskKind::Manual;
                else if (kind == "send") t.kind = TaskKind::Send;
                else if (kind == "receive") t.kind = TaskKind::Receive;
                else fail(t.id, "unknown task kind '" + kind + "'");
                t.performer = str(e, "performer", t.id, false);
                t.signal = str(e, "signal", t.id, false);
                p.tasks.push_back(std::move(t));
            }
        if (const json* a = array(j, "subprocesses", p.id))
            for (const json& e : *a) {
                check_keys(e, "subprocess", {"id", "name", "call", "calledProcess", "loop"});
                Subprocess s;
                s.id = str(e, "id", "subprocess");
                s.name = str(e, "name", s.id, false);
                s.isCall = flag(e, "call", s.id);
                s.calledProcess = str(e, "calledProcess", s.id, false);
                s.loop = flag(e, "loop", s.id);
                p.subprocesses.push_back(std::move(s));
            }
        if (const json* a = array(j, "gateways", p.id))
            for (const json& e : *a) {
                check_keys(e, "gateway", {"id", "kind", "role"});
                Gateway g;
                g.id = str(e, "id", "gateway");
                std::string kind = str(e, "kind", g.id);
                if (kind == "exclusive") g.kind = GatewayKind::Exclusive;
                else if (kind == "parallel") g.kind = GatewayKind::Parallel;
                else fail(g.id, "unknown gateway kind '" + kind + "'");
                std::string role = str(e, "role", g.id);
                if (role == "split") g.role = GatewayRole::Split;
                else if (role == "merge") g.role = GatewayRole::Merge;
                else fail(g.id, "unknown gateway role '" + role + "'");
                p.gateways.push_back(std::move(g));
            }
        if (const json* a = array(j, "flows", p.id))
            for (const json& e : *a) {
                check_keys(e, "flow", {"id", "source", "target", "condition"});
                SequenceFlow f;
                f.id = str(e, "id", "flow");
                f.source = str(e, "source", f.id);
                f.target = str(e, "target", f.id);
                f.condition = str(e, "condition", f.id, false);
                p.flows.push_back(std::move(f));
            }
        if (const json* a = array(j, "properties", p.id))
            for (const json& e : *a) {
                check_keys(e, "property", {"id", "name", "type"});
                Property pr;
                pr.id = str(e, "id", "property");
                pr.name = str(e, "name", pr.id);
                pr.type = str(e, "type", pr.id, false);
                p.properties.push_back(std::move(pr));
            }
        if (const json* a = array(j, "assignments", p.id))
            for (const json& e : *a) {
                check_keys(e, "assignment", {"id", "owner", "target", "expr"});
                Assignment as;
                as.id = str(e, "id", "assignment");
                as.owner = str(e, "owner", as.id);
                as.target = str(e, "target", as.id);
                as.expr = str(e, "expr", as.id);
                p.assignments.push_back(std::move(as));
            }
        if (const json* a = array(j, "lanes", p.id))
            for (const json& e : *a) {
                check_keys(e, "lane", {"id", "performer", "members"});
                Lane l;
                l.id = str(e, "id", "lane");
                l.performer = str(e, "performer", l.id);
                if (const json* mem = array(e, "members", l.id))
                    for (const json& me : *mem) {
                        if (!me.is_string()) fail(l.id, "lane members must be strings");
                        l.members.push_back(me.get<std::string>());
                    }
                p.lanes.push_back(std::move(l));
            }
        m.processes.push_back(std::move(p));
    }
};

}  // namespace detail

inline BpmnModel parse_bpmn(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("document", e.what());
    }
    detail::BpmnReader reader(j);
    return reader.read();
}

}  // namespace flowkit::bpmn
