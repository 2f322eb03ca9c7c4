#pragma once

// Reference interpreter with conventional offer/accept token semantics. It
// exists as an independent second implementation of the process language: it
// works directly on the model graph — no compiled paths, no push/pull
// engines — so agreement between the two interpreters is meaningful
// evidence. Only the model, expression, value and event-log types are
// shared.
//
// Semantics: tokens rest at output pins (plus the initial node's and input
// parameters' pins). Downstream elements see *offers* computed over the
// control graph: a decision forwards an offer along its unique true branch, a
// merge concatenates offers, a fork offers the same token to every branch,
// and a join offers a complete bundle only when every incoming edge has an
// offer. Consuming an offer through a fork leaves residue tokens on the
// untaken branches. Finals, output parameters and accept armings consume
// offers eagerly; actions consume one offer per input pin when all pins have
// one. The tick loop (completion, movement, starts, signal delivery, clock
// jump to the next due completion) mirrors the structure of the push/pull
// machine so logical time is directly comparable.
//
// Accepts emit signalReceive only, never actionStart/actionEnd, in both
// interpreters; the equivalence check projects action starts and ends.

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
#include "flowkit/expr.hpp"
#include "flowkit/model.hpp"
#include "flowkit/runtime.hpp"  // RunSpec / RunOutcome / main_activities
#include "flowkit/trace.hpp"
#include "flowkit/value.hpp"

namespace flowkit {

class OfferInterpreter {
  public:
    explicit OfferInterpreter(const ProcessModel& m) : m_(m), idx_(m) {}

    RunOutcome run(const RunSpec& spec) {
        for (const RunSpec::Seed& s : spec.instances) spawn_root(s.activity, s.bindings);
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
                    diagnostics_.push_back("no quiescence within work budget");
                    budget = true;
                    break;
                }
            }
            if (budget) break;
            if (all_terminal()) break;
            int64_t next = next_due();
            if (next == kNever) {
                for (auto& inst : instances_)
                    if (inst->status == Status::Running) inst->status = Status::Deadlocked;
                break;
            }
            if (next > spec.maxTicks) {
                diagnostics_.push_back("tick budget of " + std::to_string(spec.maxTicks) +
                                       " exceeded");
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

    struct OToken {
        std::string id;
        std::optional<Value> payload;
    };

    // An offer is a bundle of tokens (joins concatenate) together with the
    // instructions for consuming it: which resting tokens to remove, and
    // which forks were crossed (whose other branches then receive residues).
    struct Offer {
        std::vector<OToken> tokens;
        struct Origin {
            bool residue;    // false: a place, true: a fork residue buffer
            std::string id;  // place id / edge id
            size_t index;
        };
        std::vector<Origin> origins;
        struct Crossing {
            const Node* fork;
            std::string takenEdge;
            OToken token;
        };
        std::vector<Crossing> crossings;
    };

    struct ActiveAction {
        const Node* node = nullptr;
        int64_t due = kNever;
        std::vector<std::string> seized;
        std::map<std::string, Value> pinPayloads;
        std::optional<Value> primaryPayload;
        std::string childInstance;
        std::map<std::string, Value> childResults;
        List elements;
        size_t nextElem = 0;
    };

    struct Instance {
        std::string id;
        const Activity* activity = nullptr;
        Status status = Status::Running;
        std::string parent, callNode;
        Record vars;
        std::map<std::string, std::deque<OToken>> places;    // resting tokens
        std::map<std::string, std::deque<OToken>> residues;  // by fork out-edge id
        std::map<std::string, std::deque<OToken>> armed;     // by accept node id
        std::map<std::string, ActiveAction> active;
    };

    const ProcessModel& m_;
    ModelIndex idx_;
    std::vector<std::unique_ptr<Instance>> instances_;
    std::map<std::string, size_t> instanceIndex_;
    struct QueuedSignal {
        std::string signal, toActivity;
        Value payload;
    };
    std::deque<QueuedSignal> bus_;
    std::vector<RunSpec::External> externals_;
    size_t nextExternal_ = 0;
    int64_t clock_ = 0, seq_ = 0, work_ = 0, tokenN_ = 0, instN_ = 0;
    EventLog log_;
    std::vector<std::string> diagnostics_;

    Event& emit(EventKind k, const std::string& subject) {
        Event& e = log_.emplace_back();
        e.tick = clock_;
        e.seq = seq_++;
        e.kind = k;
        e.subject = subject;
        return e;
    }

    std::string fresh_token() { return "t" + std::to_string(++tokenN_); }
    bool running(const Instance& inst) const { return inst.status == Status::Running; }
    Instance* by_id(const std::string& id) {
        auto it = instanceIndex_.find(id);
        return it == instanceIndex_.end() ? nullptr : instances_[it->second].get();
    }

    const Activity* find_activity(const std::string& id) const {
        auto it = idx_.activity.find(id);
        if (it == idx_.activity.end()) throw ParseError(id, "unknown activity");
        return it->second;
    }

    static std::vector<const Node*> params_of(const Activity& a, PinDir dir) {
        std::vector<const Node*> out;
        for (const Node& n : a.nodes)
            if (n.kind == NodeKind::Param && n.paramDir == dir) out.push_back(&n);
        std::sort(out.begin(), out.end(),
                  [](const Node* x, const Node* y) { return x->id < y->id; });
        return out;
    }

    static std::vector<const Pin*> in_pins_sorted(const Node& n) {
        std::vector<const Pin*> out;
        for (const Pin& p : n.pins)
            if (p.dir == PinDir::In) out.push_back(&p);
        std::sort(out.begin(), out.end(),
                  [](const Pin* x, const Pin* y) { return x->id < y->id; });
        return out;
    }

    // ---- lifecycle --------------------------------------------------------

    Instance& spawn_root(const std::string& activity, const std::map<std::string, Value>& byName) {
        const Activity* a = find_activity(activity);
        std::map<std::string, Value> byNode;
        for (const Node* p : params_of(*a, PinDir::In)) {
            auto it = byName.find(p->name.empty() ? p->id : p->name);
            if (it == byName.end()) it = byName.find(p->id);
            if (it != byName.end()) byNode[p->id] = it->second;
        }
        return spawn(*a, byNode, "", "");
    }

    Instance& spawn(const Activity& a, const std::map<std::string, Value>& paramValues,
                    const std::string& parent, const std::string& callNode) {
        auto inst = std::make_unique<Instance>();
        inst->id = "i" + std::to_string(++instN_);
        inst->activity = &a;
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

        for (const Node& n : a.nodes) {
            if (n.kind == NodeKind::Initial) {
                OToken t{fresh_token(), std::nullopt};
                emit(EventKind::TokenMove, t.id)
                    .with("inst", ref.id)
                    .with("from", "new")
                    .with("to", n.pins[0].id);
                ref.places[n.pins[0].id].push_back(std::move(t));
            }
        }
        for (const Node* p : params_of(a, PinDir::In)) {
            OToken t{fresh_token(), std::nullopt};
            if (!p->paramType.empty()) {
                auto it = paramValues.find(p->id);
                t.payload = it != paramValues.end() ? it->second
                                                    : default_value_for_type(idx_, p->paramType);
            }
            emit(EventKind::TokenMove, t.id)
                .with("inst", ref.id)
                .with("from", "new")
                .with("to", p->pins[0].id);
            ref.places[p->pins[0].id].push_back(std::move(t));
        }
        return ref;
    }

    void complete_instance(Instance& inst, Status status) {
        if (!running(inst)) return;
        inst.status = status;

        std::map<std::string, Value> results;
        if (status == Status::Completed) {
            for (const Node* p : params_of(*inst.activity, PinDir::Out)) {
                auto it = inst.places.find(p->pins[0].id);
                if (it != inst.places.end() && !it->second.empty() && it->second.front().payload)
                    results[p->id] = *it->second.front().payload;
            }
        }
        for (auto& [placeId, queue] : inst.places) {
            for (OToken& t : queue)
                emit(EventKind::TokenMove, t.id)
                    .with("inst", inst.id)
                    .with("from", placeId)
                    .with("to", "discarded");
            queue.clear();
        }
        inst.residues.clear();
        inst.armed.clear();
        inst.active.clear();

        std::vector<std::string> childIds;
        for (const auto& other : instances_)
            if (other->parent == inst.id && other->status == Status::Running)
                childIds.push_back(other->id);
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
            complete_instance(*parent, Status::Failed);
            return;
        }
        if (status == Status::Aborted) return;

        const Node* node = act.node;
        if (node->kind == NodeKind::ForEach) {
            if (act.nextElem + 1 < act.elements.size()) {
                ++act.nextElem;
                act.childInstance = spawn_body(*parent, *node, act.elements[act.nextElem]).id;
            } else {
                act.childInstance.clear();
                act.due = clock_;
            }
            return;
        }
        const Activity* callee = find_activity(node->calls);
        auto outParams = params_of(*callee, PinDir::Out);
        std::vector<const Pin*> outPins;
        for (const Pin& p : node->pins)
            if (p.dir == PinDir::Out) outPins.push_back(&p);
        std::sort(outPins.begin(), outPins.end(),
                  [](const Pin* x, const Pin* y) { return x->id < y->id; });
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

    // ---- offers -----------------------------------------------------------

    std::vector<Offer> offers_from(Instance& inst, const Edge& e) {
        std::vector<Offer> out;
        if (idx_.pin.count(e.source)) {
            auto it = inst.places.find(e.source);
            if (it != inst.places.end()) {
                for (size_t i = 0; i < it->second.size(); ++i) {
                    Offer o;
                    o.tokens.push_back(it->second[i]);
                    o.origins.push_back({false, e.source, i});
                    out.push_back(std::move(o));
                }
            }
            return out;
        }

        const Node* c = idx_.node.at(e.source);
        switch (c->kind) {
            case NodeKind::Fork: {
                auto rit = inst.residues.find(e.id);
                if (rit != inst.residues.end()) {
                    for (size_t i = 0; i < rit->second.size(); ++i) {
                        Offer o;
                        o.tokens.push_back(rit->second[i]);
                        o.origins.push_back({true, e.id, i});
                        out.push_back(std::move(o));
                    }
                }
                for (Offer& o : offers_into(inst, *c)) {
                    o.crossings.push_back({c, e.id, o.tokens[0]});
                    out.push_back(std::move(o));
                }
                return out;
            }
            case NodeKind::Merge:
                return offers_into(inst, *c);
            case NodeKind::Decision: {
                for (Offer& o : offers_into(inst, *c)) {
                    if (decision_branch(inst, *c, o) == &e) out.push_back(std::move(o));
                }
                return out;
            }
            case NodeKind::Join: {
                Offer bundle;
                for (const Edge* in : idx_.in_edges(c->id)) {
                    std::vector<Offer> offs = offers_from(inst, *in);
                    if (offs.empty()) return {};
                    Offer& head = offs.front();
                    bundle.tokens.insert(bundle.tokens.end(), head.tokens.begin(),
                                         head.tokens.end());
                    bundle.origins.insert(bundle.origins.end(), head.origins.begin(),
                                          head.origins.end());
                    bundle.crossings.insert(bundle.crossings.end(), head.crossings.begin(),
                                            head.crossings.end());
                }
                out.push_back(std::move(bundle));
                return out;
            }
            default:
                throw LogicError("offer requested from non-control node " + c->id);
        }
    }

    std::vector<Offer> offers_into(Instance& inst, const Node& ctrl) {
        std::vector<Offer> out;
        for (const Edge* in : idx_.in_edges(ctrl.id)) {
            std::vector<Offer> offs = offers_from(inst, *in);
            for (Offer& o : offs) out.push_back(std::move(o));
        }
        return out;
    }

    std::vector<Offer> offers_into_pin(Instance& inst, const std::string& pinId) {
        std::vector<Offer> out;
        for (const Edge* in : idx_.in_edges(pinId)) {
            std::vector<Offer> offs = offers_from(inst, *in);
            for (Offer& o : offs) out.push_back(std::move(o));
        }
        return out;
    }

    // The branch every token of the offer agrees on, or null when the offer
    // has to wait. Two true guards for one token is a conflict.
    const Edge* decision_branch(Instance& inst, const Node& decision, const Offer& offer) {
        const Edge* agreed = nullptr;
        for (const OToken& tok : offer.tokens) {
            Bindings env;
            env.vars = &inst.vars;
            if (tok.payload) env.payload = &*tok.payload;
            const Edge* chosen = nullptr;
            const Edge* elseEdge = nullptr;
            int trueCount = 0;
            for (const Edge* oe : idx_.out_edges(decision.id)) {
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
                throw EvalError("guard conflict at decision " + decision.id + " for token " +
                                tok.id);
            const Edge* pick = trueCount == 1 ? chosen : elseEdge;
            if (!pick) return nullptr;
            if (agreed && agreed != pick) return nullptr;  // tokens disagree: wait
            agreed = pick;
        }
        return agreed;
    }

    void consume(Instance& inst, const Offer& offer) {
        // remove origins highest index first, per container
        std::map<std::pair<bool, std::string>, std::vector<size_t>> grouped;
        for (const Offer::Origin& o : offer.origins)
            grouped[{o.residue, o.id}].push_back(o.index);
        for (auto& [key, indices] : grouped) {
            auto& container = key.first ? inst.residues.at(key.second)
                                        : inst.places.at(key.second);
            std::sort(indices.rbegin(), indices.rend());
            for (size_t i : indices) container.erase(container.begin() + static_cast<long>(i));
        }
        for (const Offer::Crossing& cr : offer.crossings) {
            for (const Edge* oe : idx_.out_edges(cr.fork->id)) {
                if (oe->id == cr.takenEdge) continue;
                inst.residues[oe->id].push_back({fresh_token(), cr.token.payload});
            }
        }
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
                    while (running(inst) && (single_sink(inst) || single_start(inst))) c = true;
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
        while (nextExternal_ < externals_.size() && externals_[nextExternal_].tick <= clock_) {
            const RunSpec::External& x = externals_[nextExternal_++];
            bus_.push_back({x.signal, x.toActivity, x.payload});
        }
    }

    // ---- completions ------------------------------------------------------

    bool finish_due(Instance& inst) {
        std::vector<std::string> due;
        for (const auto& [node, act] : inst.active)
            if (act.due == clock_) due.push_back(node);
        bool any = false;
        for (const std::string& nodeId : due) {
            if (!running(inst)) break;
            auto it = inst.active.find(nodeId);
            if (it == inst.active.end() || it->second.due != clock_) continue;
            ActiveAction act = it->second;
            inst.active.erase(nodeId);
            if (act.node->kind == NodeKind::Send) complete_send(inst, act);
            else complete_action(inst, act);
            any = true;
        }
        return any;
    }

    void complete_action(Instance& inst, ActiveAction& act) {
        const Node& n = *act.node;
        struct Staged {
            const Pin* pin;
            std::string token;
            std::optional<Value> payload;
        };
        std::vector<Staged> outputs;
        for (const Pin& p : n.pins) {
            if (p.dir != PinDir::Out) continue;
            Staged s{&p, fresh_token(), std::nullopt};
            if (!p.type.empty()) {
                auto cr = act.childResults.find(p.id);
                s.payload = cr != act.childResults.end() ? cr->second
                                                         : default_value_for_type(idx_, p.type);
            } else if (act.childResults.count(p.id)) {
                s.payload = act.childResults.at(p.id);
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
            .with("outputs", "[" + join(outIds, ",") + "]");
        for (Staged& s : outputs) {
            emit(EventKind::TokenMove, s.token)
                .with("inst", inst.id)
                .with("from", "new")
                .with("to", s.pin->id);
            inst.places[s.pin->id].push_back({s.token, std::move(s.payload)});
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

    // ---- movement: sinks then action starts -------------------------------

    // Finals, output parameters and accept armings consume one offer, by node
    // id. Returns true when something was consumed.
    bool single_sink(Instance& inst) {
        std::vector<const Node*> sinks;
        for (const Node& n : inst.activity->nodes) {
            if (n.kind == NodeKind::Final ||
                (n.kind == NodeKind::Param && n.paramDir == PinDir::Out) ||
                (n.kind == NodeKind::Accept && !n.interrupting))
                sinks.push_back(&n);
        }
        std::sort(sinks.begin(), sinks.end(),
                  [](const Node* x, const Node* y) { return x->id < y->id; });

        for (const Node* n : sinks) {
            const Pin* inPin = nullptr;
            for (const Pin& p : n->pins)
                if (p.dir == PinDir::In) inPin = &p;
            if (!inPin) continue;
            std::vector<Offer> offs = offers_into_pin(inst, inPin->id);
            if (offs.empty()) continue;
            Offer offer = offs.front();
            consume(inst, offer);
            if (n->kind == NodeKind::Final) {
                for (const OToken& t : offer.tokens)
                    emit(EventKind::TokenMove, t.id)
                        .with("inst", inst.id)
                        .with("from", inPin->id)
                        .with("to", "discarded");
                complete_instance(inst, Status::Completed);
                return true;
            }
            if (n->kind == NodeKind::Param) {
                for (OToken& t : offer.tokens) inst.places[inPin->id].push_back(std::move(t));
                if (all_out_params_filled(inst)) complete_instance(inst, Status::Completed);
                return true;
            }
            // accept arming
            for (OToken& t : offer.tokens) inst.armed[n->id].push_back(std::move(t));
            return true;
        }
        return false;
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

    bool single_start(Instance& inst) {
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

        for (const Node* n : candidates) {
            auto inPins = in_pins_sorted(*n);
            if (inPins.empty()) continue;
            bool allOffered = true;
            for (const Pin* p : inPins) {
                if (offers_into_pin(inst, p->id).empty()) {
                    allOffered = false;
                    break;
                }
            }
            if (!allOffered) continue;

            // consume pin by pin, recomputing offers after each consumption;
            // roll back if a later pin's offer disappeared underneath us
            auto placesBackup = inst.places;
            auto residuesBackup = inst.residues;
            int64_t tokenBackup = tokenN_;
            ActiveAction act;
            act.node = n;
            bool okAll = true;
            for (const Pin* p : inPins) {
                std::vector<Offer> offs = offers_into_pin(inst, p->id);
                if (offs.empty()) {
                    okAll = false;
                    break;
                }
                Offer offer = offs.front();
                consume(inst, offer);
                for (OToken& t : offer.tokens) {
                    act.seized.push_back(t.id);
                    if (t.payload && !act.pinPayloads.count(p->id))
                        act.pinPayloads[p->id] = *t.payload;
                }
            }
            if (!okAll) {
                inst.places = std::move(placesBackup);
                inst.residues = std::move(residuesBackup);
                tokenN_ = tokenBackup;
                continue;
            }
            for (const Pin& p : n->pins) {
                if (p.dir == PinDir::In && !p.type.empty() && act.pinPayloads.count(p.id)) {
                    act.primaryPayload = act.pinPayloads.at(p.id);
                    break;
                }
            }
            emit(EventKind::ActionStart, n->id)
                .with("inst", inst.id)
                .with("seized", "[" + join(act.seized, ",") + "]");
            begin_action(inst, *n, act);
            inst.active[n->id] = std::move(act);
            return true;
        }
        return false;
    }

    void begin_action(Instance& inst, const Node& n, ActiveAction& act) {
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
                    act.childInstance = spawn_body(inst, n, act.elements[0]).id;
                }
                break;
            }
            default:
                if (!n.calls.empty()) {
                    act.due = kNever;
                    const Activity* callee = find_activity(n.calls);
                    auto callerPins = in_pins_sorted(n);
                    auto calleeParams = params_of(*callee, PinDir::In);
                    std::map<std::string, Value> paramValues;
                    for (size_t i = 0; i < callerPins.size() && i < calleeParams.size(); ++i) {
                        auto pv = act.pinPayloads.find(callerPins[i]->id);
                        if (pv != act.pinPayloads.end())
                            paramValues[calleeParams[i]->id] = pv->second;
                    }
                    act.childInstance = spawn(*callee, paramValues, inst.id, n.id).id;
                } else {
                    act.due = clock_ + n.duration;
                }
        }
    }

    // ---- signals ----------------------------------------------------------

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
                    break;
                }
            }
        }
        return false;
    }

    bool accept_signal(Instance& inst, const Node& n, const QueuedSignal& q) {
        const Pin* outPin = nullptr;
        for (const Pin& p : n.pins)
            if (p.dir == PinDir::Out) outPin = &p;
        if (!outPin) return false;

        if (n.interrupting) {
            if (!inst.active.count(n.interrupts)) return false;
        } else {
            auto it = inst.armed.find(n.id);
            if (it == inst.armed.end() || it->second.empty()) return false;
        }

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
                inst.active.erase(n.interrupts);
            }
        } else {
            OToken arming = std::move(inst.armed.at(n.id).front());
            inst.armed.at(n.id).pop_front();
            emit(EventKind::TokenMove, arming.id)
                .with("inst", inst.id)
                .with("from", n.id)
                .with("to", "discarded");
        }

        std::string tokId = fresh_token();
        emit(EventKind::SignalReceive, n.id)
            .with("inst", inst.id)
            .with("signal", q.signal)
            .with("token", tokId)
            .with("payload", to_text(q.payload));
        emit(EventKind::TokenMove, tokId)
            .with("inst", inst.id)
            .with("from", "new")
            .with("to", outPin->id);
        inst.places[outPin->id].push_back({tokId, q.payload});
        return true;
    }
};

inline RunOutcome run_oracle(const ProcessModel& m, const RunSpec& spec) {
    OfferInterpreter interp(m);
    return interp.run(spec);
}

inline RunOutcome run_oracle_single(const ProcessModel& m, const std::string& activity,
                                    std::map<std::string, Value> bindings = {},
                                    int64_t maxTicks = 100000) {
    RunSpec spec;
    spec.instances.push_back({activity, std::move(bindings)});
    spec.maxTicks = maxTicks;
    return run_oracle(m, spec);
}

}  // namespace flowkit
