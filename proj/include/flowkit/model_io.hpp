#pragma once

// Reading and writing the .flow model document format (JSON).
//
// Top level:
//   {
//     "model": "demo",
//     "classes":    [{"name":"Order","fields":[{"name":"qty","type":"int"}]}],
//     "signals":    [{"name":"OrderPlaced","fields":["id","qty"]}],
//     "performers": [{"id":"perf1","name":"Clerk","kind":"position"}],
//     "activities": [ ... ]
//   }
//
// Activity:
//   {"id":"Proc", "name":"Process", "main":true,
//    "variables":[{"name":"order","type":"Order","init":{...}}],
//    "measures":["TotalCost=Sum(Cost), EUR"],
//    "nodes":[...], "edges":[...]}
//
// Nodes ("kind" selects the shape; pins are {"id","dir","type"?}):
//   initial   one out pin (control)
//   final     one in pin
//   param     "dir" + "type"; one pin facing into (in-param) or out of
//             (out-param) the activity body
//   action    "name", "actionKind", "performer", "duration", "calls",
//             "assignments":[{"target":"order.id","expr":"in1.id"}],
//             "measures", any pins
//   send      "signal", "to" (target activity), "end"; one in pin
//   accept    "signal"; non-interrupting: one in pin (arming) + one out pin;
//             interrupting: "interrupts" (an action id) + one out pin
//   foreach   "collection" (list variable), "body" (activity); 1 in + 1 out
//   decision / merge / fork / join   no pins
//
// Edges: {"id","source","target","guard"?,"object"?}. Sources are out-pins or
// control nodes, targets in-pins or control nodes. Guards may only appear on
// edges leaving decisions (where "else" is also legal) or accept output pins.
//
// All ids (performers, activities, nodes, pins, edges) share one namespace
// and must be unique. Serialization is canonical: object keys sorted, element
// arrays sorted by id/name, defaults omitted; assignment and measure lists
// keep their author order because assignment order is significant.

#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "flowkit/common.hpp"
#include "flowkit/measures.hpp"
#include "flowkit/model.hpp"

namespace flowkit {

using nlohmann::json;

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path, "cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError(path, "cannot open file for writing");
    out << content;
}

namespace detail {

inline Value value_from_json(const json& j, const std::string& where) {
    if (j.is_number_integer()) return Value(j.get<int64_t>());
    if (j.is_boolean()) return Value(j.get<bool>());
    if (j.is_string()) return Value(j.get<std::string>());
    if (j.is_object()) {
        Record r;
        for (auto it = j.begin(); it != j.end(); ++it)
            r[it.key()] = value_from_json(it.value(), where);
        return Value(std::move(r));
    }
    if (j.is_array()) {
        List l;
        for (const auto& el : j) l.push_back(value_from_json(el, where));
        return Value(std::move(l));
    }
    throw ParseError(where, "unsupported value (only integers, booleans, strings, objects, arrays)");
}

inline json value_to_json(const Value& v) {
    if (v.is_int()) return json(v.as_int());
    if (v.is_bool()) return json(v.as_bool());
    if (v.is_string()) return json(v.as_string());
    if (v.is_record()) {
        json j = json::object();
        for (const auto& [k, val] : v.as_record()) j[k] = value_to_json(val);
        return j;
    }
    json j = json::array();
    for (const auto& el : v.as_list()) j.push_back(value_to_json(el));
    return j;
}

struct ModelReader {
    const json& root;
    ProcessModel m;
    std::set<std::string> ids;  // shared identifier namespace

    explicit ModelReader(const json& j) : root(j) {}

    [[noreturn]] void fail(const std::string& where, const std::string& msg) const {
        throw ParseError(where, msg);
    }

    void claim_id(const std::string& id, const std::string& what) {
        if (id.empty()) fail(what, "empty identifier");
        if (!ids.insert(id).second) fail(id, "duplicate identifier");
    }

    void check_keys(const json& j, const std::string& where,
                    std::initializer_list<const char*> allowed) {
        if (!j.is_object()) fail(where, "expected an object");
        for (auto it = j.begin(); it != j.end(); ++it) {
            bool ok = false;
            for (const char* k : allowed)
                if (it.key() == k) ok = true;
            if (!ok) fail(where, "unknown key '" + it.key() + "'");
        }
    }

    std::string str(const json& j, const char* key, const std::string& where,
                    bool required = true) {
        auto it = j.find(key);
        if (it == j.end()) {
            if (required) fail(where, std::string("missing '") + key + "'");
            return "";
        }
        if (!it->is_string()) fail(where, std::string("'") + key + "' must be a string");
        return it->get<std::string>();
    }
    bool flag(const json& j, const char* key, const std::string& where) {
        auto it = j.find(key);
        if (it == j.end()) return false;
        if (!it->is_boolean()) fail(where, std::string("'") + key + "' must be a boolean");
        return it->get<bool>();
    }
    int64_t integer(const json& j, const char* key, const std::string& where, int64_t dflt) {
        auto it = j.find(key);
        if (it == j.end()) return dflt;
        if (!it->is_number_integer()) fail(where, std::string("'") + key + "' must be an integer");
        return it->get<int64_t>();
    }
    const json* array(const json& j, const char* key, const std::string& where) {
        auto it = j.find(key);
        if (it == j.end()) return nullptr;
        if (!it->is_array()) fail(where, std::string("'") + key + "' must be an array");
        return &*it;
    }

    ProcessModel read() {
        check_keys(root, "document",
                   {"model", "classes", "signals", "performers", "activities"});
        m.id = str(root, "model", "document");
        if (const json* a = array(root, "classes", "document"))
            for (const json& c : *a) read_class(c);
        if (const json* a = array(root, "signals", "document"))
            for (const json& s : *a) read_signal(s);
        if (const json* a = array(root, "performers", "document"))
            for (const json& p : *a) read_performer(p);
        if (const json* a = array(root, "activities", "document"))
            for (const json& act : *a) read_activity(act);
        if (m.activities.empty()) fail("document", "model has no activities");
        resolve_and_check();
        return std::move(m);
    }

    void read_class(const json& j) {
        check_keys(j, "class", {"name", "fields"});
        DataClass c;
        c.name = str(j, "name", "class");
        for (const auto& existing : m.classes)
            if (existing.name == c.name) fail(c.name, "duplicate class");
        if (const json* a = array(j, "fields", c.name)) {
            std::set<std::string> seen;
            for (const json& f : *a) {
                check_keys(f, c.name + " field", {"name", "type"});
                DataField df;
                df.name = str(f, "name", c.name + " field");
                df.type = str(f, "type", c.name + " field");
                if (!seen.insert(df.name).second)
                    fail(c.name, "duplicate field '" + df.name + "'");
                c.fields.push_back(std::move(df));
            }
        }
        m.classes.push_back(std::move(c));
    }

    void read_signal(const json& j) {
        check_keys(j, "signal", {"name", "fields"});
        SignalType s;
        s.name = str(j, "name", "signal");
        for (const auto& existing : m.signals)
            if (existing.name == s.name) fail(s.name, "duplicate signal");
        if (const json* a = array(j, "fields", s.name)) {
            std::set<std::string> seen;
            for (const json& f : *a) {
                if (!f.is_string()) fail(s.name, "signal fields must be strings");
                std::string name = f.get<std::string>();
                if (!seen.insert(name).second)
                    fail(s.name, "duplicate signal field '" + name + "'");
                s.fields.push_back(name);
            }
        }
        m.signals.push_back(std::move(s));
    }

    void read_performer(const json& j) {
        check_keys(j, "performer", {"id", "name", "kind", "measures"});
        Performer p;
        p.id = str(j, "id", "performer");
        claim_id(p.id, "performer");
        p.name = str(j, "name", p.id, false);
        std::string kind = str(j, "kind", p.id, false);
        if (kind.empty() || kind == "position") p.kind = PerformerKind::Position;
        else if (kind == "orgUnit") p.kind = PerformerKind::OrgUnit;
        else if (kind == "resource") p.kind = PerformerKind::Resource;
        else fail(p.id, "unknown performer kind '" + kind + "'");
        read_measures(j, p.id, p.measures);
        m.performers.push_back(std::move(p));
    }

    void read_measures(const json& j, const std::string& where, std::vector<std::string>& out) {
        if (const json* a = array(j, "measures", where)) {
            std::set<std::string> names;
            for (const json& s : *a) {
                if (!s.is_string()) fail(where, "measures must be strings");
                std::string raw = s.get<std::string>();
                measures::MeasureDecl d = measures::parse_measure(raw);  // grammar check
                if (!names.insert(d.name).second)
                    fail(where, "duplicate measure '" + d.name + "'");
                out.push_back(raw);
            }
        }
    }

    void read_activity(const json& j) {
        check_keys(j, "activity",
                   {"id", "name", "main", "variables", "measures", "nodes", "edges"});
        Activity a;
        a.id = str(j, "id", "activity");
        claim_id(a.id, "activity");
        a.name = str(j, "name", a.id, false);
        a.main = flag(j, "main", a.id);
        if (const json* arr = array(j, "variables", a.id)) {
            std::set<std::string> seen;
            for (const json& v : *arr) {
                check_keys(v, a.id + " variable", {"name", "type", "init"});
                VariableDecl vd;
                vd.name = str(v, "name", a.id + " variable");
                vd.type = str(v, "type", a.id + " variable");
                if (!seen.insert(vd.name).second)
                    fail(a.id, "duplicate variable '" + vd.name + "'");
                auto it = v.find("init");
                if (it != v.end()) vd.init = value_from_json(*it, a.id + "." + vd.name);
                a.variables.push_back(std::move(vd));
            }
        }
        read_measures(j, a.id, a.measures);
        if (const json* arr = array(j, "nodes", a.id))
            for (const json& n : *arr) a.nodes.push_back(read_node(n, a));
        if (const json* arr = array(j, "edges", a.id))
            for (const json& e : *arr) a.edges.push_back(read_edge(e));
        m.activities.push_back(std::move(a));
    }

    NodeKind node_kind(const std::string& k, const std::string& where) {
        if (k == "action") return NodeKind::Action;
        if (k == "send") return NodeKind::Send;
        if (k == "accept") return NodeKind::Accept;
        if (k == "foreach") return NodeKind::ForEach;
        if (k == "initial") return NodeKind::Initial;
        if (k == "final") return NodeKind::Final;
        if (k == "param") return NodeKind::Param;
        if (k == "decision") return NodeKind::Decision;
        if (k == "merge") return NodeKind::Merge;
        if (k == "fork") return NodeKind::Fork;
        if (k == "join") return NodeKind::Join;
        fail(where, "unknown node kind '" + k + "'");
    }

    Node read_node(const json& j, const Activity& owner) {
        std::string id = str(j, "id", owner.id + " node");
        Node n;
        n.id = id;
        claim_id(n.id, "node");
        n.kind = node_kind(str(j, "kind", id), id);
        switch (n.kind) {
            case NodeKind::Action:
                check_keys(j, id,
                           {"id", "kind", "name", "actionKind", "performer", "duration", "calls",
                            "assignments", "measures", "pins"});
                break;
            case NodeKind::Send:
                check_keys(j, id, {"id", "kind", "name", "signal", "to", "end", "pins"});
                break;
            case NodeKind::Accept:
                check_keys(j, id,
                           {"id", "kind", "name", "signal", "interrupting", "interrupts", "pins"});
                break;
            case NodeKind::ForEach:
                check_keys(j, id, {"id", "kind", "name", "collection", "body", "pins"});
                break;
            case NodeKind::Param:
                check_keys(j, id, {"id", "kind", "dir", "type", "pins"});
                break;
            case NodeKind::Initial:
            case NodeKind::Final:
                check_keys(j, id, {"id", "kind", "pins"});
                break;
            default:
                check_keys(j, id, {"id", "kind"});
        }
        n.name = str(j, "name", id, false);
        if (n.kind == NodeKind::Action) {
            std::string ak = str(j, "actionKind", id, false);
            if (ak.empty() || ak == "plain") n.actionKind = ActionKind::Plain;
            else if (ak == "service") n.actionKind = ActionKind::Service;
            else if (ak == "user") n.actionKind = ActionKind::User;
            else if (ak == "manual") n.actionKind = ActionKind::Manual;
            else fail(id, "unknown actionKind '" + ak + "'");
            n.performer = str(j, "performer", id, false);
            n.duration = integer(j, "duration", id, 1);
            if (n.duration < 0) fail(id, "duration must be >= 0");
            n.calls = str(j, "calls", id, false);
            if (const json* arr = array(j, "assignments", id)) {
                for (const json& asg : *arr) {
                    check_keys(asg, id + " assignment", {"target", "expr"});
                    Assignment as;
                    as.targetText = str(asg, "target", id + " assignment");
                    as.exprText = str(asg, "expr", id + " assignment");
                    as.target = parse_ref_path(as.targetText);
                    as.expr = parse_expr(as.exprText);
                    n.assignments.push_back(std::move(as));
                }
            }
            read_measures(j, id, n.measures);
        } else if (n.kind == NodeKind::Send) {
            n.signal = str(j, "signal", id);
            n.targetActivity = str(j, "to", id);
            n.endAction = flag(j, "end", id);
        } else if (n.kind == NodeKind::Accept) {
            n.signal = str(j, "signal", id);
            n.interrupting = flag(j, "interrupting", id);
            n.interrupts = str(j, "interrupts", id, false);
            if (n.interrupting && n.interrupts.empty())
                fail(id, "interrupting accept needs 'interrupts'");
            if (!n.interrupting && !n.interrupts.empty())
                fail(id, "'interrupts' requires interrupting=true");
        } else if (n.kind == NodeKind::ForEach) {
            n.collection = str(j, "collection", id);
            n.body = str(j, "body", id);
        } else if (n.kind == NodeKind::Param) {
            std::string dir = str(j, "dir", id);
            if (dir == "in") n.paramDir = PinDir::In;
            else if (dir == "out") n.paramDir = PinDir::Out;
            else fail(id, "param dir must be 'in' or 'out'");
            n.paramType = str(j, "type", id, false);
        }
        if (const json* arr = array(j, "pins", id)) {
            std::set<std::string> seen;
            for (const json& p : *arr) {
                check_keys(p, id + " pin", {"id", "dir", "type"});
                Pin pin;
                pin.id = str(p, "id", id + " pin");
                claim_id(pin.id, "pin");
                std::string dir = str(p, "dir", pin.id);
                if (dir == "in") pin.dir = PinDir::In;
                else if (dir == "out") pin.dir = PinDir::Out;
                else fail(pin.id, "pin dir must be 'in' or 'out'");
                pin.type = str(p, "type", pin.id, false);
                n.pins.push_back(std::move(pin));
            }
        }
        check_pin_shape(n);
        return n;
    }

    void check_pin_shape(const Node& n) {
        size_t ins = 0, outs = 0;
        for (const Pin& p : n.pins) (p.dir == PinDir::In ? ins : outs)++;
        auto need = [&](size_t i, size_t o) {
            if (ins != i || outs != o)
                fail(n.id, "wrong pin shape (needs " + std::to_string(i) + " in, " +
                               std::to_string(o) + " out)");
        };
        switch (n.kind) {
            case NodeKind::Initial:
                need(0, 1);
                if (!n.pins[0].type.empty()) fail(n.id, "initial pin carries no data");
                break;
            case NodeKind::Final: need(1, 0); break;
            case NodeKind::Param:
                // An in-parameter's pin faces into the body (out direction).
                if (n.paramDir == PinDir::In) need(0, 1);
                else need(1, 0);
                break;
            case NodeKind::Send: need(1, 0); break;
            case NodeKind::Accept:
                if (n.interrupting) need(0, 1);
                else need(1, 1);
                break;
            case NodeKind::ForEach: need(1, 1); break;
            case NodeKind::Decision:
            case NodeKind::Merge:
            case NodeKind::Fork:
            case NodeKind::Join:
                need(0, 0);
                break;
            case NodeKind::Action: break;  // any shape
        }
    }

    Edge read_edge(const json& j) {
        check_keys(j, "edge", {"id", "source", "target", "guard", "object"});
        Edge e;
        e.id = str(j, "id", "edge");
        claim_id(e.id, "edge");
        e.source = str(j, "source", e.id);
        e.target = str(j, "target", e.id);
        e.guardText = str(j, "guard", e.id, false);
        e.objectFlow = flag(j, "object", e.id);
        return e;
    }

    // Cross-reference checks once the whole document is read.
    void resolve_and_check() {
        ModelIndex idx(m);
        for (Activity& a : m.activities) {
            for (VariableDecl& v : a.variables) check_type(v.type, a.id + "." + v.name);
            size_t initials = 0, finals = 0, inParams = 0, outParams = 0, endSends = 0;
            for (Node& n : a.nodes) {
                for (const Pin& p : n.pins)
                    if (!p.type.empty()) check_type(p.type, p.id);
                switch (n.kind) {
                    case NodeKind::Initial: ++initials; break;
                    case NodeKind::Final: ++finals; break;
                    case NodeKind::Param:
                        if (!n.paramType.empty()) check_type(n.paramType, n.id);
                        (n.paramDir == PinDir::In ? inParams : outParams)++;
                        break;
                    case NodeKind::Send:
                        if (!idx.signal.count(n.signal))
                            fail(n.id, "unknown signal '" + n.signal + "'");
                        if (!idx.activity.count(n.targetActivity))
                            fail(n.id, "unknown target activity '" + n.targetActivity + "'");
                        if (n.endAction) ++endSends;
                        break;
                    case NodeKind::Accept: {
                        if (!idx.signal.count(n.signal))
                            fail(n.id, "unknown signal '" + n.signal + "'");
                        if (!n.interrupts.empty()) {
                            const Node* t = idx.node.count(n.interrupts)
                                                ? idx.node.at(n.interrupts)
                                                : nullptr;
                            if (!t || idx.nodeOwner.at(n.interrupts) != &a ||
                                t->kind != NodeKind::Action)
                                fail(n.id, "'interrupts' must name an action in the same activity");
                        }
                        break;
                    }
                    case NodeKind::Action:
                        if (!n.calls.empty() && !idx.activity.count(n.calls))
                            fail(n.id, "unknown called activity '" + n.calls + "'");
                        if (!n.performer.empty() && !idx.performer.count(n.performer))
                            fail(n.id, "unknown performer '" + n.performer + "'");
                        break;
                    case NodeKind::ForEach: {
                        const VariableDecl* v = idx.find_variable(a, n.collection);
                        if (!v) fail(n.id, "unknown collection variable '" + n.collection + "'");
                        if (v->type.rfind("list", 0) != 0)
                            fail(n.id, "collection variable must have a list type");
                        if (!idx.activity.count(n.body))
                            fail(n.id, "unknown body activity '" + n.body + "'");
                        break;
                    }
                    default: break;
                }
            }
            if (inParams == 0 && initials != 1)
                fail(a.id, "an activity without input parameters needs exactly one initial node");
            if (initials > 1) fail(a.id, "more than one initial node");
            if (finals + outParams + endSends == 0)
                fail(a.id, "no way to finish (needs a final node, an output parameter, "
                           "or an end-signalling send)");
            for (Edge& e : a.edges) {
                bool srcPin = idx.pin.count(e.source);
                bool srcNode = idx.node.count(e.source);
                if (!srcPin && !srcNode) fail(e.id, "unknown source '" + e.source + "'");
                if (srcPin) {
                    if (idx.pin.at(e.source)->dir != PinDir::Out)
                        fail(e.id, "edge source must be an out pin");
                    if (idx.nodeOwner.at(idx.pinOwner.at(e.source)->id) != &a)
                        fail(e.id, "edge crosses activities");
                } else {
                    if (!is_control(idx.node.at(e.source)->kind))
                        fail(e.id, "edge source must be a pin or a control node");
                    if (idx.nodeOwner.at(e.source) != &a) fail(e.id, "edge crosses activities");
                }
                bool tgtPin = idx.pin.count(e.target);
                bool tgtNode = idx.node.count(e.target);
                if (!tgtPin && !tgtNode) fail(e.id, "unknown target '" + e.target + "'");
                if (tgtPin) {
                    if (idx.pin.at(e.target)->dir != PinDir::In)
                        fail(e.id, "edge target must be an in pin");
                    if (idx.nodeOwner.at(idx.pinOwner.at(e.target)->id) != &a)
                        fail(e.id, "edge crosses activities");
                } else {
                    if (!is_control(idx.node.at(e.target)->kind))
                        fail(e.id, "edge target must be a pin or a control node");
                    if (idx.nodeOwner.at(e.target) != &a) fail(e.id, "edge crosses activities");
                }
                if (!e.guardText.empty()) {
                    bool fromDecision =
                        srcNode && idx.node.at(e.source)->kind == NodeKind::Decision;
                    bool fromAcceptOut =
                        srcPin && idx.pinOwner.at(e.source)->kind == NodeKind::Accept;
                    if (!fromDecision && !fromAcceptOut)
                        fail(e.id,
                             "guards are allowed only on edges from decisions or accept output "
                             "pins");
                    e.guard = parse_guard(e.guardText);
                    if (e.guard->kind == Expr::Kind::Else && !fromDecision)
                        fail(e.id, "'else' is only legal on decision edges");
                }
            }
            // Structural arity of control nodes (the validator checks the
            // semantic minimums; these shapes are nonsensical in any model).
            for (const Node& n : a.nodes) {
                if (n.kind == NodeKind::Merge || n.kind == NodeKind::Join) {
                    if (idx.out_edges(n.id).size() > 1)
                        fail(n.id, "merge/join nodes have a single outgoing edge");
                }
                if (n.kind == NodeKind::Fork) {
                    if (idx.in_edges(n.id).size() > 1)
                        fail(n.id, "fork nodes have a single incoming edge");
                }
            }
        }
    }

    void check_type(const std::string& type, const std::string& where) {
        if (type == "int" || type == "bool" || type == "string") return;
        if (type.rfind("list<", 0) == 0 && type.back() == '>') {
            check_type(type.substr(5, type.size() - 6), where);
            return;
        }
        for (const DataClass& c : m.classes)
            if (c.name == type) return;
        fail(where, "unknown type '" + type + "'");
    }
};

}  // namespace detail

inline ProcessModel parse_model(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError("document", e.what());
    }
    detail::ModelReader reader(j);
    return reader.read();
}

inline ProcessModel load_model(const std::string& path) {
    return parse_model(read_text_file(path));
}

namespace detail {

template <typename T, typename Key>
std::vector<const T*> sorted_by(const std::vector<T>& v, Key key) {
    std::vector<const T*> out;
    for (const T& e : v) out.push_back(&e);
    std::sort(out.begin(), out.end(),
              [&key](const T* a, const T* b) { return key(*a) < key(*b); });
    return out;
}

inline json node_to_json(const Node& n) {
    json j;
    j["id"] = n.id;
    switch (n.kind) {
        case NodeKind::Action: j["kind"] = "action"; break;
        case NodeKind::Send: j["kind"] = "send"; break;
        case NodeKind::Accept: j["kind"] = "accept"; break;
        case NodeKind::ForEach: j["kind"] = "foreach"; break;
        case NodeKind::Initial: j["kind"] = "initial"; break;
        case NodeKind::Final: j["kind"] = "final"; break;
        case NodeKind::Param: j["kind"] = "param"; break;
        case NodeKind::Decision: j["kind"] = "decision"; break;
        case NodeKind::Merge: j["kind"] = "merge"; break;
        case NodeKind::Fork: j["kind"] = "fork"; break;
        case NodeKind::Join: j["kind"] = "join"; break;
    }
    if (!n.name.empty()) j["name"] = n.name;
    if (n.kind == NodeKind::Action) {
        switch (n.actionKind) {
            case ActionKind::Plain: break;
            case ActionKind::Service: j["actionKind"] = "service"; break;
            case ActionKind::User: j["actionKind"] = "user"; break;
            case ActionKind::Manual: j["actionKind"] = "manual"; break;
        }
        if (!n.performer.empty()) j["performer"] = n.performer;
        if (n.duration != 1) j["duration"] = n.duration;
        if (!n.calls.empty()) j["calls"] = n.calls;
        if (!n.assignments.empty()) {
            json arr = json::array();
            for (const Assignment& a : n.assignments) {
                json aj;
                aj["target"] = a.targetText;
                aj["expr"] = a.exprText;
                arr.push_back(aj);
            }
            j["assignments"] = arr;
        }
        if (!n.measures.empty()) j["measures"] = n.measures;
    } else if (n.kind == NodeKind::Send) {
        j["signal"] = n.signal;
        j["to"] = n.targetActivity;
        if (n.endAction) j["end"] = true;
    } else if (n.kind == NodeKind::Accept) {
        j["signal"] = n.signal;
        if (n.interrupting) j["interrupting"] = true;
        if (!n.interrupts.empty()) j["interrupts"] = n.interrupts;
    } else if (n.kind == NodeKind::ForEach) {
        j["collection"] = n.collection;
        j["body"] = n.body;
    } else if (n.kind == NodeKind::Param) {
        j["dir"] = n.paramDir == PinDir::In ? "in" : "out";
        if (!n.paramType.empty()) j["type"] = n.paramType;
    }
    if (!n.pins.empty()) {
        json arr = json::array();
        for (const Pin* p : sorted_by(n.pins, [](const Pin& x) { return x.id; })) {
            json pj;
            pj["id"] = p->id;
            pj["dir"] = p->dir == PinDir::In ? "in" : "out";
            if (!p->type.empty()) pj["type"] = p->type;
            arr.push_back(pj);
        }
        j["pins"] = arr;
    }
    return j;
}

}  // namespace detail

inline std::string serialize_model(const ProcessModel& m) {
    json root;
    root["model"] = m.id;
    if (!m.classes.empty()) {
        json arr = json::array();
        for (const DataClass* c :
             detail::sorted_by(m.classes, [](const DataClass& x) { return x.name; })) {
            json cj;
            cj["name"] = c->name;
            if (!c->fields.empty()) {
                json fs = json::array();
                for (const DataField& f : c->fields) {
                    json fj;
                    fj["name"] = f.name;
                    fj["type"] = f.type;
                    fs.push_back(fj);
                }
                cj["fields"] = fs;
            }
            arr.push_back(cj);
        }
        root["classes"] = arr;
    }
    if (!m.signals.empty()) {
        json arr = json::array();
        for (const SignalType* s :
             detail::sorted_by(m.signals, [](const SignalType& x) { return x.name; })) {
            json sj;
            sj["name"] = s->name;
            if (!s->fields.empty()) sj["fields"] = s->fields;
            arr.push_back(sj);
        }
        root["signals"] = arr;
    }
    if (!m.performers.empty()) {
        json arr = json::array();
        for (const Performer* p :
             detail::sorted_by(m.performers, [](const Performer& x) { return x.id; })) {
            json pj;
            pj["id"] = p->id;
            if (!p->name.empty()) pj["name"] = p->name;
            switch (p->kind) {
                case PerformerKind::Position: break;
                case PerformerKind::OrgUnit: pj["kind"] = "orgUnit"; break;
                case PerformerKind::Resource: pj["kind"] = "resource"; break;
            }
            if (!p->measures.empty()) pj["measures"] = p->measures;
            arr.push_back(pj);
        }
        root["performers"] = arr;
    }
    json acts = json::array();
    for (const Activity* a :
         detail::sorted_by(m.activities, [](const Activity& x) { return x.id; })) {
        json aj;
        aj["id"] = a->id;
        if (!a->name.empty()) aj["name"] = a->name;
        if (a->main) aj["main"] = true;
        if (!a->variables.empty()) {
            json vs = json::array();
            for (const VariableDecl* v :
                 detail::sorted_by(a->variables, [](const VariableDecl& x) { return x.name; })) {
                json vj;
                vj["name"] = v->name;
                vj["type"] = v->type;
                if (v->init) vj["init"] = detail::value_to_json(*v->init);
                vs.push_back(vj);
            }
            aj["variables"] = vs;
        }
        if (!a->measures.empty()) aj["measures"] = a->measures;
        if (!a->nodes.empty()) {
            json ns = json::array();
            for (const Node* n : detail::sorted_by(a->nodes, [](const Node& x) { return x.id; }))
                ns.push_back(detail::node_to_json(*n));
            aj["nodes"] = ns;
        }
        if (!a->edges.empty()) {
            json es = json::array();
            for (const Edge* e : detail::sorted_by(a->edges, [](const Edge& x) { return x.id; })) {
                json ej;
                ej["id"] = e->id;
                ej["source"] = e->source;
                ej["target"] = e->target;
                if (!e->guardText.empty()) ej["guard"] = e->guardText;
                if (e->objectFlow) ej["object"] = true;
                es.push_back(ej);
            }
            aj["edges"] = es;
        }
        acts.push_back(aj);
    }
    root["activities"] = acts;
    return root.dump(2) + "\n";
}

}  // namespace flowkit
