#pragma once

// The push/pull token virtual machine. Executes a compiled model on a
// discrete logical clock with a fixed phase order, so a given model and input
// always produce byte-identical event logs.
//
// Within one tick the coordinator makes passes over all instances in creation
// order until nothing changes. Each instance runs its own fixpoint of four
// phases:
//
//   1. finish actions whose completion is due at the current tick
//      (node-id order): assignments, actionEnd, output deposits
//   2. push: tokens at output places travel forward through decisions,
//      merges and forks until they reach the next stable place
//      (place-id order, FIFO within a place)
//   3. pull: groups whose member paths can all claim a source token
//      simultaneously move as one coordinated group (destination-id order)
//   4. start actions whose input places are all occupied (node-id order)
//
// Signal delivery runs between passes: queued sends go to the first armed
// accept (instance creation order, accepts in node-id order) whose
// correlation guard — the guard on the edge leaving the accept's output pin —
// holds for the payload. Undeliverable signals stay queued.
//
// When the whole system is quiescent the clock jumps to the earliest pending
// completion (or externally scheduled signal). No pending work and live
// instances left means deadlock: those instances are marked, with the starved
// pull groups reported, and no instanceEnd is emitted for them.
//
// Semantics notes:
//  - a decision with no true branch parks the token; two true branches is a
//    guard conflict and fails the instance
//  - send actions take zero time; their payload is the input payload
//    restricted to the signal's declared fields (missing fields defaulted)
//  - call actions bind caller pins to callee parameters positionally in id
//    order and finish the tick their child instance completes; a child
//    reaching its final node or filling every output parameter completes,
//    and unfilled caller output pins yield plain control tokens
//  - loop nodes run their body once per element of the collection variable,
//    sequentially; a non-list collection fails the instance
//  - an accept is armed while a token rests at its input pin; an
//    interrupting accept is armed while the action it interrupts is active,
//    and acceptance aborts that action
//  - reaching a final node ends the instance: resident tokens are discarded,
//    running children are aborted (status=aborted), started-but-unfinished
//    actions simply never emit actionEnd

#include <algorithm>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "flowkit/common.hpp"
#include "flowkit/compile.hpp"
#include "flowkit/expr.hpp"
#include "flowkit/model.hpp"
#include "flowkit/trace.hpp"
#include "flowkit/value.hpp"

namespace flowkit {

struct RunSpec {
    struct Seed {
        std::string activity;
        std::map<std::string, Value> bindings;  // by input-parameter name (or node id)
    };
    std::vector<Seed> instances;

    struct External {  // a signal injected from outside at a given tick
        int64_t tick = 0;
        std::string signal;
        std::string toActivity;
        Value payload;
    };
    std::vector<External> externals;

    int64_t maxTicks = 100000;
};

struct InstanceSummary {
    std::string id, activity, status;
};

struct RunOutcome {
    std::string status;  // completed | failed | deadlocked | budget
    EventLog log;
    std::vector<InstanceSummary> instances;
    std::vector<std::string> diagnostics;
    int64_t finalClock = 0;

    bool ok() const { return status == "completed"; }
};

// Activities a plain `run` should instantiate: the ones flagged main, or if
// none is, the ones no call action or loop body refers to.
inline std::vector<const Activity*> main_activities(const ProcessModel& m) {
    std::vector<const Activity*> mains;
    for (const Activity& a : m.activities)
        if (a.main) mains.push_back(&a);
    if (!mains.empty()) return mains;
    std::set<std::string> referenced;
    for (const Activity& a : m.activities)
        for (const Node& n : a.nodes) {
            if (!n.calls.empty()) referenced.insert(n.calls);
            if (!n.body.empty()) referenced.insert(n.body);
        }
    for (const Activity& a : m.activities)
        if (!referenced.count(a.id)) mains.push_back(&a);
    return mains;
}

class Coordinator {
  public:
    explicit Coordinator(const CompiledModel& cm) : cm_(cm), idx_(cm.idx) {}

    RunOutcome run(const RunSpec& spec) {
        for (const RunSpec::Seed& s : spec.instances) {
            const Activity* a = find_activity(s.activity);
            spawn_root(*a, s.bindings);
        }
        externals_ = spec.externals;
        std::stable_sort(externals_.begin(), externals_.end(),
                         [](const RunSpec::External& x, const RunSpec::External& y) {
                             return x.tick < y.tick;
                         });

        bool budget = false;
        while (true) {
            inject_externals();
            while (pass()) {
                if (++work_ > kWorkBudget) {
                    diagnostics_.push_back(
                        "no quiescence within work budget (zero-duration loop?)");
                    budget = true;
                    break;
                }
            }
            if (budget) break;
            if (all_terminal()) break;
            int64_t next = next_due();
            if (next == kNever) {
                mark_deadlock();
                break;
            }
            if (next > spec.maxTicks) {
                diagnostics_.push_back("tick budget of " + std::to_string(spec.maxTicks) +
                                       " exceeded; next pending completion at tick " +
                                       std::to_string(next));
                budget = true;
                break;
            }
            clock_ = next;
        }

        RunOutcome out;
        out.log = std::move(log_);
        out.diagnostics = std::move(diagnostics_);
        out.finalClock = clock_;
        bool anyDeadlock = false, anyFailed = false;
        for (const auto& inst : instances_) {
            out.instances.push_back({inst->id, inst->activity->id, status_name(inst->status)});
            if (inst->status == Status::Deadlocked) anyDeadlock = true;
            if (inst->status == Status::Failed) anyFailed = true;
        }
        out.status = budget        ? "budget"
                     : anyDeadlock ? "deadlocked"
                     : anyFailed   ? "failed"
                                   : "completed";
        return out;
    }

  private:
    static constexpr int64_t kNever = std::numeric_limits<int64_t>::max();
    static constexpr int64_t kWorkBudget = 1000000;

    enum class Status { Running, Completed, Failed, Aborted, Deadlocked };

    static const char* status_name(Status s) {
        switch (s) {
            case Status::Running: return "running";
            case Status::Completed: return "completed";
            case Status::Failed: return "failed";
            case Status::Aborted: return "aborted";
            case Status::Deadlocked: return "deadlocked";
        }
        return "?";
    }

    struct Token {
        std::string id;
        std::optional<Value> payload;
        std::string group;  // nonempty when the token arrived as part of a pull group
    };

    struct ActiveAction {
        const Node* node = nullptr;
        int64_t due = kNever;
        std::vector<std::string> seized;  // token ids, for the log
        std::map<std::string, Value> pinPayloads;
        std::optional<Value> primaryPayload;  // first typed input pin's payload
        std::string childInstance;            // call / loop body instance
        std::map<std::string, Value> childResults;  // by caller output-pin id
        List elements;                              // loop node state
        size_t nextElem = 0;
    };

    struct Instance {
        std::string id;
        const Activity* activity = nullptr;
        const CompiledActivity* compiled = nullptr;
        Status status = Status::Running;
        std::string parent, callNode;
        Record vars;
        std::map<std::string, std::deque<Token>> places;
        std::map<std::string, ActiveAction> active;
    };

    const CompiledModel& cm_;
    const ModelIndex& idx_;
    std::vector<std::unique_ptr<Instance>> instances_;
    std::map<std::string, size_t> instanceIndex_;
    struct QueuedSignal {
        std::string signal, toActivity;
        Value payload;
    };
    std::deque<QueuedSignal> bus_;
    std::vector<RunSpec::External> externals_;
    size_t nextExternal_ = 0;
    int64_t clock_ = 0, seq_ = 0, work_ = 0;
    int64_t tokenN_ = 0, instN_ = 0, groupN_ = 0;
    EventLog log_;
    std::vector<std::string> diagnostics_;

    // ---- small helpers ----------------------------------------------------

    const Activity* find_activity(const std::string& id) const {
        auto it = idx_.activity.find(id);
        if (it == idx_.activity.end()) throw ParseError(id, "unknown activity");
        return it->second;
    }

    Event& emit(EventKind k, const std::string& subject) {
        Event& e = log_.emplace_back();
        e.tick = clock_;
        e.seq = seq_++;
        e.kind = k;
        e.subject = subject;
        return e;
    }

    static std::string bracketed(const std::vector<std::string>& ids) {
        return "[" + join(ids, ",") + "]";
    }

    std::string fresh_token() { return "t" + std::to_string(++tokenN_); }

    bool running(const Instance& inst) const { return inst.status == Status::Running; }

    Instance* by_id(const std::string& id) {
        auto it = instanceIndex_.find(id);
        return it == instanceIndex_.end() ? nullptr : instances_[it->second].get();
    }

    const StablePlace& place_of(const Instance& inst, const std::string& placeId) const {
        return *inst.compiled->place(placeId);
    }

    Bindings bindings_for(const Instance& inst, const Token* tok) const {
        Bindings b;
        b.vars = &inst.vars;
        if (tok && tok->payload) b.payload = &*tok->payload;
        return b;
    }

    // Parameter nodes of an activity in id order, filtered by direction.
    static std::vector<const Node*> params_of(const Activity& a, PinDir dir) {
        std::vector<const Node*> out;
        for (const Node& n : a.nodes)
            if (n.kind == NodeKind::Param && n.paramDir == dir) out.push_back(&n);
        std::sort(out.begin(), out.end(),
                  [](const Node* x, const Node* y) { return x->id < y->id; });
        return out;
    }

    static std::vector<const Pin*> pins_of_dir(const Node& n, PinDir dir) {
        std::vector<const Pin*> out;
        for (const Pin& p : n.pins)
            if (p.dir == dir) out.push_back(&p);
        return out;  // declaration order
    }

    static std::vector<const Pin*> sorted_pins(std::vector<const Pin*> pins) {
        std::sort(pins.begin(), pins.end(),
                  [](const Pin* x, const Pin* y) { return x->id < y->id; });
        return pins;
    }

    // ---- instance lifecycle -----------------------------------------------

    Instance& spawn_root(const Activity& a, const std::map<std::string, Value>& byName) {
        // user-facing bindings are keyed by parameter name; convert to node id
        std::map<std::string, Value> byNode;
        for (const Node* p : params_of(a, PinDir::In)) {
            auto it = byName.find(p->name.empty() ? p->id : p->name);
            if (it == byName.end()) it = byName.find(p->id);
            if (it != byName.end()) byNode[p->id] = it->second;
        }
        return spawn(a, byNode, "", "");
    }

    Instance& spawn(const Activity& a, const std::map<std::string, Value>& paramValues,
                    const std::string& parent, const std::string& callNode) {
        auto inst = std::make_unique<Instance>();
        inst->id = "i" + std::to_string(++instN_);
        inst->activity = &a;
        inst->compiled = &cm_.activities.at(a.id);
        inst->parent = parent;
        inst->callNode = callNode;
        for (const VariableDecl& v : a.variables)
            inst->vars[v.name] = v.init ? *v.init : default_value_for_type(idx_, v.type);

        Event& ev = emit(EventKind::InstanceStart, inst->id);
        ev.with("activity", a.id);
        if (!parent.empty()) ev.with("parent", parent).with("call", callNode);

        Instance& ref = *inst;
        instanceIndex_[inst->id] = instances_.size();
        instances_.push_back(std::move(inst));

        // initial nodes and input parameters carry the starting tokens
        for (const Node& n : ref.activity->nodes) {
            if (n.kind == NodeKind::Initial) {
                Token t{fresh_token(), std::nullopt, ""};
                place_token(ref, std::move(t), n.pins[0].id, "new", "");
            }
        }
        for (const Node* p : params_of(a, PinDir::In)) {
            Token t{fresh_token(), std::nullopt, ""};
            if (!p->paramType.empty()) {
                auto it = paramValues.find(p->id);
                t.payload = it != paramValues.end()
                                ? it->second
                                : default_value_for_type(idx_, p->paramType);
            }
            place_token(ref, std::move(t), p->pins[0].id, "new", "");
        }
        return ref;
    }

    // Appends a token to a place and emits the move; completion side effects
    // are handled separately so a multi-token group can land atomically.
    void deposit_token(Instance& inst, Token tok, const std::string& placeId,
                       const std::string& from, const std::string& group) {
        Event& ev = emit(EventKind::TokenMove, tok.id);
        ev.with("inst", inst.id).with("from", from).with("to", placeId);
        if (!group.empty()) ev.with("group", group);
        tok.group = group;
        inst.places[placeId].push_back(std::move(tok));
    }

    // Reacts to a deposit at `placeId`. Returns false when the deposit
    // completed (or otherwise ended) the instance.
    bool settle_place(Instance& inst, const std::string& placeId) {
        const StablePlace& sp = place_of(inst, placeId);
        if (sp.kind == PlaceKind::FinalIn) {
            complete_instance(inst, Status::Completed);
            return false;
        }
        if (sp.kind == PlaceKind::ParameterNode) {
            const Node* owner = idx_.node.at(sp.node);
            if (owner->paramDir == PinDir::Out && all_out_params_filled(inst)) {
                complete_instance(inst, Status::Completed);
                return false;
            }
        }
        return running(inst);
    }

    bool place_token(Instance& inst, Token tok, const std::string& placeId,
                     const std::string& from, const std::string& group) {
        deposit_token(inst, std::move(tok), placeId, from, group);
        return settle_place(inst, placeId);
    }

    bool all_out_params_filled(const Instance& inst) const {
        auto outs = params_of(*inst.activity, PinDir::Out);
        if (outs.empty()) return false;
        for (const Node* p : outs) {
            auto it = inst.places.find(p->pins[0].id);
            if (it == inst.places.end() || it->second.empty()) return false;
        }
        return true;
    }

    void complete_instance(Instance& inst, Status status) {
        if (!running(inst)) return;
        inst.status = status;

        // capture output-parameter payloads before tokens are discarded
        std::map<std::string, Value> results;
        if (status == Status::Completed) {
            for (const Node* p : params_of(*inst.activity, PinDir::Out)) {
                auto it = inst.places.find(p->pins[0].id);
                if (it != inst.places.end() && !it->second.empty() &&
                    it->second.front().payload)
                    results[p->id] = *it->second.front().payload;
            }
        }

        for (auto& [placeId, queue] : inst.places) {
            for (Token& t : queue)
                emit(EventKind::TokenMove, t.id)
                    .with("inst", inst.id)
                    .with("from", placeId)
                    .with("to", "discarded");
            queue.clear();
        }

        // children first (depth-first), then our own end event
        std::vector<std::string> childIds;
        for (const auto& other : instances_)
            if (other->parent == inst.id && other->status == Status::Running)
                childIds.push_back(other->id);
        inst.active.clear();
        for (const std::string& cid : childIds) complete_instance(*by_id(cid), Status::Aborted);

        emit(EventKind::InstanceEnd, inst.id)
            .with("status", status == Status::Completed ? "completed"
                            : status == Status::Failed  ? "failed"
                                                        : "aborted");

        notify_parent(inst, status, results);
    }

    void notify_parent(Instance& child, Status status,
                       const std::map<std::string, Value>& results) {
        if (child.parent.empty()) return;
        Instance* parent = by_id(child.parent);
        if (!parent || !running(*parent)) return;
        auto it = parent->active.find(child.callNode);
        if (it == parent->active.end() || it->second.childInstance != child.id) return;
        ActiveAction& act = it->second;

        if (status == Status::Failed) {
            diagnostics_.push_back("instance " + parent->id + ": child " + child.id +
                                   " of " + child.callNode + " failed");
            complete_instance(*parent, Status::Failed);
            return;
        }
        if (status == Status::Aborted) return;  // parent initiated this itself

        const Node* node = act.node;
        if (node->kind == NodeKind::ForEach) {
            if (act.nextElem + 1 < act.elements.size()) {
                ++act.nextElem;
                Instance& next = spawn_body(*parent, *node, act.elements[act.nextElem]);
                act.childInstance = next.id;
            } else {
                act.childInstance.clear();
                act.due = clock_;
            }
            return;
        }

        // call action: map callee output parameters to caller output pins,
        // positionally in id order
        auto callee = find_activity(node->calls);
        auto outParams = params_of(*callee, PinDir::Out);
        auto outPins = sorted_pins(pins_of_dir(*node, PinDir::Out));
        for (size_t i = 0; i < outParams.size() && i < outPins.size(); ++i) {
            auto rv = results.find(outParams[i]->id);
            if (rv != results.end()) act.childResults[outPins[i]->id] = rv->second;
        }
        act.childInstance.clear();
        act.due = clock_;
    }

    Instance& spawn_body(Instance& parent, const Node& loop, const Value& element) {
        const Activity* body = find_activity(loop.body);
        std::map<std::string, Value> paramValues;
        auto inParams = params_of(*body, PinDir::In);
        if (!inParams.empty()) paramValues[inParams[0]->id] = element;
        return spawn(*body, paramValues, parent.id, loop.id);
    }

    // ---- the tick ---------------------------------------------------------

    bool pass() {
        bool changed = false;
        for (size_t k = 0; k < instances_.size(); ++k) {
            Instance& inst = *instances_[k];
            if (!running(inst)) continue;
            try {
                while (running(inst)) {
                    bool c = finish_due(inst);
                    if (running(inst)) c |= push_tokens(inst);
                    if (running(inst)) c |= pull_groups(inst);
                    if (running(inst)) c |= start_actions(inst);
                    changed |= c;
                    if (!c) break;
                    if (++work_ > kWorkBudget)
                        throw EvalError("work budget exhausted inside one tick");
                }
            } catch (const EvalError& e) {
                diagnostics_.push_back("instance " + inst.id + ": " + e.what());
                complete_instance(inst, Status::Failed);
                changed = true;
            }
        }
        changed |= deliver_signals();
        return changed;
    }

    bool all_terminal() const {
        for (const auto& inst : instances_)
            if (inst->status == Status::Running) return false;
        return true;
    }

    int64_t next_due() const {
        int64_t next = kNever;
        for (const auto& inst : instances_) {
            if (inst->status != Status::Running) continue;
            for (const auto& [node, act] : inst->active)
                if (act.due != kNever && act.due > clock_ && act.due < next) next = act.due;
        }
        if (nextExternal_ < externals_.size())
            next = std::min(next, externals_[nextExternal_].tick);
        return next;
    }

    void inject_externals() {
        while (nextExternal_ < externals_.size() &&
               externals_[nextExternal_].tick <= clock_) {
            const RunSpec::External& x = externals_[nextExternal_++];
            bus_.push_back({x.signal, x.toActivity, x.payload});
        }
    }

    void mark_deadlock() {
        for (auto& inst : instances_) {
            if (inst->status != Status::Running) continue;
            inst->status = Status::Deadlocked;
            for (const auto& [dest, group] : inst->compiled->pullGroups) {
                // probe the top join of each requirement root: how many of
                // its incoming edges could deliver on their own?
                std::set<std::string> seen, members;
                for (size_t pi : group.paths) {
                    const CompiledPath& p = inst->compiled->paths[pi];
                    members.insert(p.edges.begin(), p.edges.end());
                }
                for (size_t pi : group.paths) {
                    const CompiledPath& p = inst->compiled->paths[pi];
                    if (!seen.insert(p.edges.back()).second) continue;
                    const Edge* root = idx_.edge.at(p.edges.back());
                    const Node* top = idx_.node.at(root->source);
                    if (top->kind != NodeKind::Join) continue;
                    size_t ready = 0, total = 0;
                    for (const Edge* in : idx_.in_edges(top->id)) {
                        ++total;
                        std::vector<GuardStep> guards;
                        std::vector<PullClaim> claims;
                        std::map<std::string, std::set<size_t>> taken;
                        if (satisfy_edge(*inst, *in, members, guards, claims, taken)) ++ready;
                    }
                    if (ready > 0 && ready < total)
                        diagnostics_.push_back("instance " + inst->id + ": pull group " +
                                               group.id + " starved (" +
                                               std::to_string(ready) + " of " +
                                               std::to_string(total) + " sources ready)");
                }
            }
        }
        if (!bus_.empty())
            diagnostics_.push_back(std::to_string(bus_.size()) +
                                   " undeliverable signal(s) still queued");
    }

    // ---- phase 1: completions ---------------------------------------------

    bool finish_due(Instance& inst) {
        std::vector<std::string> due;
        for (const auto& [node, act] : inst.active)
            if (act.due == clock_) due.push_back(node);
        bool any = false;
        for (const std::string& nodeId : due) {
            if (!running(inst)) break;
            auto it = inst.active.find(nodeId);
            if (it == inst.active.end() || it->second.due != clock_) continue;
            complete_action(inst, it->second);
            any = true;
        }
        return any;
    }

    void complete_action(Instance& inst, ActiveAction act) {
        const Node& n = *act.node;
        inst.active.erase(n.id);

        if (n.kind == NodeKind::Send) {
            complete_send(inst, act);
            return;
        }

        // stage output payloads: defaults, then child results, then assignments
        struct Staged {
            const Pin* pin;
            std::string token;
            std::optional<Value> payload;
        };
        std::vector<Staged> outputs;
        for (const Pin* p : pins_of_dir(n, PinDir::Out)) {
            Staged s{p, fresh_token(), std::nullopt};
            if (!p->type.empty()) {
                auto cr = act.childResults.find(p->id);
                s.payload = cr != act.childResults.end()
                                ? cr->second
                                : default_value_for_type(idx_, p->type);
            } else if (act.childResults.count(p->id)) {
                s.payload = act.childResults.at(p->id);
            }
            outputs.push_back(std::move(s));
        }

        Bindings env;
        env.vars = &inst.vars;
        env.pinPayloads = &act.pinPayloads;
        if (act.primaryPayload) env.payload = &*act.primaryPayload;
        for (const Assignment& asg : n.assignments) {
            Value v = eval_expr(*asg.expr, env);
            const std::string& root = asg.target[0];
            bool stored = false;
            for (Staged& s : outputs) {
                if (s.pin->id == root) {
                    if (!s.payload) s.payload = Value{Record{}};
                    store_path(*s.payload, asg.target, 1, v);
                    stored = true;
                    break;
                }
            }
            if (!stored) {
                auto vit = inst.vars.find(root);
                if (vit == inst.vars.end())
                    throw EvalError("assignment target '" + root + "' is not bound");
                store_path(vit->second, asg.target, 1, v);
            }
            emit(EventKind::Assignment, n.id)
                .with("inst", inst.id)
                .with("target", asg.targetText)
                .with("value", to_text(v));
        }

        std::vector<std::string> outIds;
        for (const Staged& s : outputs) outIds.push_back(s.token);
        emit(EventKind::ActionEnd, n.id)
            .with("inst", inst.id)
            .with("outputs", bracketed(outIds));

        for (Staged& s : outputs) {
            Token t{s.token, std::move(s.payload), ""};
            if (!place_token(inst, std::move(t), s.pin->id, "new", "")) return;
        }
    }

    void complete_send(Instance& inst, const ActiveAction& act) {
        const Node& n = *act.node;
        const SignalType* sig = idx_.signal.at(n.signal);
        Record payload;
        for (const std::string& field : sig->fields) {
            std::optional<Value> v;
            if (act.primaryPayload) v = lookup_path(*act.primaryPayload, {field}, 0);
            payload[field] = v ? *v : Value{};
        }
        emit(EventKind::ActionEnd, n.id).with("inst", inst.id).with("outputs", "[]");
        Value pv{std::move(payload)};
        emit(EventKind::SignalSend, n.id)
            .with("inst", inst.id)
            .with("signal", n.signal)
            .with("to", n.targetActivity)
            .with("payload", to_text(pv));
        bus_.push_back({n.signal, n.targetActivity, std::move(pv)});
        if (n.endAction) complete_instance(inst, Status::Completed);
    }

    // ---- phase 2: push ----------------------------------------------------

    bool push_tokens(Instance& inst) {
        bool any = false;
        for (const StablePlace& sp : inst.compiled->places) {
            const Pin* pin = idx_.pin.at(sp.id);
            if (pin->dir != PinDir::Out) continue;
            auto qit = inst.places.find(sp.id);
            if (qit == inst.places.end() || qit->second.empty()) continue;
            const auto& outs = idx_.out_edges(sp.id);
            if (outs.empty()) continue;

            // plan moves first, then apply, so FIFO scanning stays stable
            struct Move {
                size_t index;
                std::vector<std::string> dests;
            };
            std::vector<Move> moves;
            for (size_t i = 0; i < qit->second.size(); ++i) {
                std::optional<std::vector<std::string>> dests =
                    walk_push(inst, qit->second[i], *outs[0]);
                if (dests && !dests->empty()) moves.push_back({i, std::move(*dests)});
            }
            if (moves.empty()) continue;

            std::vector<Token> moving;
            for (auto rit = moves.rbegin(); rit != moves.rend(); ++rit) {
                moving.insert(moving.begin(), std::move(qit->second[rit->index]));
                qit->second.erase(qit->second.begin() + static_cast<long>(rit->index));
            }
            for (size_t k = 0; k < moves.size(); ++k) {
                Token& tok = moving[k];
                const std::vector<std::string>& dests = moves[k].dests;
                for (size_t d = 1; d < dests.size(); ++d) {  // fork copies
                    Token copy{fresh_token(), tok.payload, ""};
                    if (!place_token(inst, std::move(copy), dests[d], "new", "")) return true;
                }
                std::string from = sp.id;
                tok.group.clear();
                if (!place_token(inst, std::move(tok), dests[0], from, "")) return true;
            }
            any = true;
        }
        return any;
    }

    // Destinations a token reaches from this edge, or nullopt when it has to
    // wait (an unmatched decision, or a join route serviced by the pull
    // engine).
    std::optional<std::vector<std::string>> walk_push(Instance& inst, const Token& tok,
                                                      const Edge& e) {
        if (idx_.pin.count(e.target)) return std::vector<std::string>{e.target};
        const Node* c = idx_.node.at(e.target);
        switch (c->kind) {
            case NodeKind::Join:
                return std::nullopt;
            case NodeKind::Merge: {
                const auto& outs = idx_.out_edges(c->id);
                if (outs.empty()) return std::nullopt;
                return walk_push(inst, tok, *outs[0]);
            }
            case NodeKind::Fork: {
                std::vector<std::string> dests;
                for (const Edge* next : idx_.out_edges(c->id)) {
                    auto sub = walk_push(inst, tok, *next);
                    if (!sub) return std::nullopt;  // unreachable: forks never feed joins
                    dests.insert(dests.end(), sub->begin(), sub->end());
                }
                return dests;
            }
            case NodeKind::Decision: {
                Bindings env = bindings_for(inst, &tok);
                const Edge* chosen = nullptr;
                const Edge* elseEdge = nullptr;
                int trueCount = 0;
                for (const Edge* oe : idx_.out_edges(c->id)) {
                    if (oe->guard && oe->guard->kind == Expr::Kind::Else) {
                        elseEdge = oe;
                        continue;
                    }
                    if (oe->guard && eval_condition(*oe->guard, env)) {
                        ++trueCount;
                        if (!chosen) chosen = oe;
                    }
                }
                if (trueCount > 1)
                    throw EvalError("guard conflict at decision " + c->id + ": " +
                                    std::to_string(trueCount) + " branches true for token " +
                                    tok.id);
                if (trueCount == 1) return walk_push(inst, tok, *chosen);
                if (elseEdge) return walk_push(inst, tok, *elseEdge);
                return std::nullopt;  // nothing matched: the token waits here
            }
            default:
                throw LogicError("token routed into non-control node " + c->id);
        }
    }

    // ---- phase 3: pull ----------------------------------------------------

    bool condition_holds(Instance& inst, const CompiledPath& p, const Token& tok) const {
        if (!p.condition) return true;
        Bindings env = bindings_for(inst, &tok);
        return eval_condition(*p.condition, env);
    }

    bool pull_groups(Instance& inst) {
        bool any = false;
        for (const auto& [dest, group] : inst.compiled->pullGroups) {
            while (running(inst) && fire_group(inst, group)) any = true;
            if (!running(inst)) break;
        }
        return any;
    }

    // A pull group fires when the requirement tree behind the destination's
    // incoming run is satisfiable: a join requires every incoming edge, a
    // merge (or the incoming side of a decision) is served by whichever
    // alternative can deliver, tried in edge order, and a stable source
    // requires a resting token that passes every decision guard collected on
    // the way down. The walk claims tokens as it descends and rolls back a
    // failed alternative, so claiming is all-or-nothing per firing.

    struct GuardStep {
        const Node* decision;
        const Edge* taken;
    };
    struct PullClaim {
        std::string place;
        size_t index;  // into the source place queue
    };

    bool token_admissible(Instance& inst, const Token& tok,
                          const std::vector<GuardStep>& guards) const {
        Bindings env = bindings_for(inst, &tok);
        for (const GuardStep& g : guards) {
            bool isElse = g.taken->guard && g.taken->guard->kind == Expr::Kind::Else;
            if (isElse) {
                // `else` admits the token when no sibling guard does
                for (const Edge* sib : idx_.out_edges(g.decision->id)) {
                    if (sib == g.taken || !sib->guard) continue;
                    if (sib->guard->kind != Expr::Kind::Else && eval_condition(*sib->guard, env))
                        return false;
                }
            } else if (g.taken->guard && !eval_condition(*g.taken->guard, env)) {
                return false;
            }
        }
        return true;
    }

    // `members` is the union of the group's path edges: the walk stays inside
    // it so push-serviced alternatives reaching the same merge (which carry
    // their tokens to the destination on their own) are not treated as pull
    // feeders.
    bool satisfy_edge(Instance& inst, const Edge& e, const std::set<std::string>& members,
                      std::vector<GuardStep>& guards, std::vector<PullClaim>& claims,
                      std::map<std::string, std::set<size_t>>& taken) {
        const std::string& src = e.source;
        if (idx_.pin.count(src)) {
            auto qit = inst.places.find(src);
            if (qit == inst.places.end()) return false;
            for (size_t i = 0; i < qit->second.size(); ++i) {
                if (taken[src].count(i)) continue;
                if (token_admissible(inst, qit->second[i], guards)) {
                    claims.push_back({src, i});
                    taken[src].insert(i);
                    return true;
                }
            }
            return false;
        }
        const Node* c = idx_.node.at(src);
        switch (c->kind) {
            case NodeKind::Join: {
                for (const Edge* in : idx_.in_edges(c->id))
                    if (!satisfy_edge(inst, *in, members, guards, claims, taken)) return false;
                return true;
            }
            case NodeKind::Merge:
            case NodeKind::Decision: {
                if (c->kind == NodeKind::Decision) guards.push_back({c, &e});
                bool ok = false;
                for (const Edge* in : idx_.in_edges(c->id)) {
                    if (!members.count(in->id)) continue;
                    size_t mark = claims.size();
                    auto takenBefore = taken;
                    if (satisfy_edge(inst, *in, members, guards, claims, taken)) {
                        ok = true;
                        break;
                    }
                    claims.resize(mark);
                    taken = std::move(takenBefore);
                }
                if (c->kind == NodeKind::Decision) guards.pop_back();
                return ok;
            }
            default:
                throw LogicError("pull walk hit unexpected node " + c->id);
        }
    }

    bool fire_group(Instance& inst, const PullGroupSpec& group) {
        // requirement roots: the edges by which pull runs enter the place
        std::vector<const Edge*> roots;
        std::set<std::string> seen, members;
        for (size_t pi : group.paths) {
            const CompiledPath& p = inst.compiled->paths[pi];
            members.insert(p.edges.begin(), p.edges.end());
            const std::string& last = p.edges.back();
            if (seen.insert(last).second) roots.push_back(idx_.edge.at(last));
        }

        for (const Edge* root : roots) {
            std::vector<GuardStep> guards;
            std::vector<PullClaim> claims;
            std::map<std::string, std::set<size_t>> taken;
            if (!satisfy_edge(inst, *root, members, guards, claims, taken)) continue;

            std::vector<Token> moving;
            for (const PullClaim& c : claims) moving.push_back(inst.places.at(c.place)[c.index]);
            // erase claimed tokens, highest index first within each place
            std::map<std::string, std::vector<size_t>> byPlace;
            for (const PullClaim& c : claims) byPlace[c.place].push_back(c.index);
            for (auto& [placeId, indices] : byPlace) {
                std::sort(indices.rbegin(), indices.rend());
                auto& queue = inst.places.at(placeId);
                for (size_t i : indices) queue.erase(queue.begin() + static_cast<long>(i));
            }

            // the group lands as one unit: every member move is logged before
            // any completion triggered by the destination place runs
            std::string groupId = "grp" + std::to_string(++groupN_);
            for (size_t k = 0; k < claims.size(); ++k)
                deposit_token(inst, std::move(moving[k]), group.dest, claims[k].place, groupId);
            settle_place(inst, group.dest);
            return true;
        }
        return false;
    }

    // ---- phase 4: starts --------------------------------------------------

    bool start_actions(Instance& inst) {
        std::vector<const Node*> candidates;
        for (const Node& n : inst.activity->nodes) {
            if (n.kind != NodeKind::Action && n.kind != NodeKind::Send &&
                n.kind != NodeKind::ForEach)
                continue;
            if (inst.active.count(n.id)) continue;
            candidates.push_back(&n);
        }
        std::sort(candidates.begin(), candidates.end(),
                  [](const Node* x, const Node* y) { return x->id < y->id; });

        bool any = false;
        for (const Node* n : candidates) {
            if (!running(inst)) break;
            auto inPins = sorted_pins(pins_of_dir(*n, PinDir::In));
            if (inPins.empty()) continue;  // nothing to trigger on
            bool ready = true;
            for (const Pin* p : inPins) {
                auto it = inst.places.find(p->id);
                if (it == inst.places.end() || it->second.empty()) {
                    ready = false;
                    break;
                }
            }
            if (!ready) continue;
            start_one(inst, *n, inPins);
            any = true;
        }
        return any;
    }

    void start_one(Instance& inst, const Node& n, const std::vector<const Pin*>& inPins) {
        ActiveAction act;
        act.node = &n;
        for (const Pin* p : inPins) {
            auto& queue = inst.places.at(p->id);
            // seize the head token together with the rest of its pull group
            std::string group = queue.front().group;
            do {
                Token t = std::move(queue.front());
                queue.pop_front();
                act.seized.push_back(t.id);
                if (t.payload && !act.pinPayloads.count(p->id))
                    act.pinPayloads[p->id] = *t.payload;
            } while (!group.empty() && !queue.empty() && queue.front().group == group);
        }
        // the primary payload is the first typed input pin's, in declaration order
        for (const Pin& p : n.pins) {
            if (p.dir == PinDir::In && !p.type.empty() && act.pinPayloads.count(p.id)) {
                act.primaryPayload = act.pinPayloads.at(p.id);
                break;
            }
        }

        emit(EventKind::ActionStart, n.id)
            .with("inst", inst.id)
            .with("seized", bracketed(act.seized));

        switch (n.kind) {
            case NodeKind::Send:
                act.due = clock_;
                break;
            case NodeKind::ForEach: {
                auto vit = inst.vars.find(n.collection);
                if (vit == inst.vars.end() || !vit->second.is_list())
                    throw EvalError("loop collection '" + n.collection +
                                    "' is not a list variable");
                act.elements = vit->second.as_list();
                if (act.elements.empty()) {
                    act.due = clock_;
                } else {
                    act.due = kNever;
                    Instance& child = spawn_body(inst, n, act.elements[0]);
                    act.childInstance = child.id;
                }
                break;
            }
            case NodeKind::Action:
                if (!n.calls.empty()) {
                    act.due = kNever;
                    const Activity* callee = find_activity(n.calls);
                    auto callerPins = sorted_pins(pins_of_dir(n, PinDir::In));
                    auto calleeParams = params_of(*callee, PinDir::In);
                    std::map<std::string, Value> paramValues;
                    for (size_t i = 0; i < callerPins.size() && i < calleeParams.size(); ++i) {
                        auto pv = act.pinPayloads.find(callerPins[i]->id);
                        if (pv != act.pinPayloads.end())
                            paramValues[calleeParams[i]->id] = pv->second;
                    }
                    Instance& child = spawn(*callee, paramValues, inst.id, n.id);
                    act.childInstance = child.id;
                } else {
                    act.due = clock_ + n.duration;
                }
                break;
            default:
                throw LogicError("start_one on non-action node " + n.id);
        }
        inst.active[n.id] = std::move(act);
    }

    // ---- signal delivery --------------------------------------------------

    bool deliver_signals() {
        bool any = false;
        for (size_t qi = 0; qi < bus_.size();) {
            if (try_deliver(bus_[qi])) {
                bus_.erase(bus_.begin() + static_cast<long>(qi));
                any = true;
            } else {
                ++qi;
            }
        }
        return any;
    }

    bool try_deliver(const QueuedSignal& q) {
        for (auto& instPtr : instances_) {
            Instance& inst = *instPtr;
            if (!running(inst) || inst.activity->id != q.toActivity) continue;

            std::vector<const Node*> accepts;
            for (const Node& n : inst.activity->nodes)
                if (n.kind == NodeKind::Accept && n.signal == q.signal) accepts.push_back(&n);
            std::sort(accepts.begin(), accepts.end(),
                      [](const Node* x, const Node* y) { return x->id < y->id; });

            for (const Node* n : accepts) {
                try {
                    if (accept_signal(inst, *n, q)) return true;
                } catch (const EvalError& e) {
                    diagnostics_.push_back("instance " + inst.id + ": " + e.what());
                    complete_instance(inst, Status::Failed);
                    break;  // next instance; the signal stays queued
                }
            }
        }
        return false;
    }

    bool accept_signal(Instance& inst, const Node& n, const QueuedSignal& q) {
        const Pin* inPin = nullptr;
        const Pin* outPin = nullptr;
        for (const Pin& p : n.pins) (p.dir == PinDir::In ? inPin : outPin) = &p;
        if (!outPin) return false;

        if (n.interrupting) {
            if (!inst.active.count(n.interrupts)) return false;
        } else {
            if (!inPin) return false;
            auto it = inst.places.find(inPin->id);
            if (it == inst.places.end() || it->second.empty()) return false;
        }

        // correlation guard: the guard on the edge leaving the output pin
        const auto& outs = idx_.out_edges(outPin->id);
        if (!outs.empty() && outs[0]->guard) {
            Bindings env;
            env.vars = &inst.vars;
            env.payload = &q.payload;
            if (!eval_condition(*outs[0]->guard, env)) return false;
        }

        if (n.interrupting) {
            auto it = inst.active.find(n.interrupts);
            if (it != inst.active.end()) {
                if (!it->second.childInstance.empty()) {
                    Instance* child = by_id(it->second.childInstance);
                    if (child && running(*child)) complete_instance(*child, Status::Aborted);
                }
                inst.active.erase(n.interrupts);  // no actionEnd: it was cut short
            }
        } else {
            auto& queue = inst.places.at(inPin->id);
            Token arming = std::move(queue.front());
            queue.pop_front();
            emit(EventKind::TokenMove, arming.id)
                .with("inst", inst.id)
                .with("from", inPin->id)
                .with("to", "discarded");
        }

        std::string tokId = fresh_token();
        emit(EventKind::SignalReceive, n.id)
            .with("inst", inst.id)
            .with("signal", q.signal)
            .with("token", tokId)
            .with("payload", to_text(q.payload));
        Token t{tokId, q.payload, ""};
        place_token(inst, std::move(t), outPin->id, "new", "");
        return true;
    }
};

inline RunOutcome run_process(const CompiledModel& cm, const RunSpec& spec) {
    Coordinator coord(cm);
    return coord.run(spec);
}

inline RunOutcome run_single(const CompiledModel& cm, const std::string& activity,
                             std::map<std::string, Value> bindings = {},
                             int64_t maxTicks = 100000) {
    RunSpec spec;
    spec.instances.push_back({activity, std::move(bindings)});
    spec.maxTicks = maxTicks;
    return run_process(cm, spec);
}

}  // namespace flowkit
