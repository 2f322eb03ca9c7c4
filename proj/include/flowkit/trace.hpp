#pragma once

// Execution event logs. One event per line:
//
//   <tick> <seq> <kind> <subject> [key=value ...]
//
// tick is the logical clock, seq a global monotonically increasing sequence
// number that makes the total order explicit. Values are either bare atoms
// (no spaces) or canonical value text (see value.hpp); the parser splits
// key=value pairs at top-level spaces only, so quoted strings, records and
// lists survive the round trip.
//
// Event kinds and their details:
//   instanceStart  subject=instance   activity=, [parent=, call=]
//   instanceEnd    subject=instance   status=completed|failed|aborted
//   actionStart    subject=node       inst=, seized=[tokens]
//   actionEnd      subject=node       inst=, outputs=[tokens]
//   tokenMove      subject=token      inst=, from=, to=, [group=]
//   signalSend     subject=node       inst=, signal=, to=, payload=
//   signalReceive  subject=node       inst=, signal=, token=, payload=
//   assignment     subject=node       inst=, target=, value=
//
// tokenMove `from=new` marks token creation; `to=discarded` marks disposal
// (instance completion with tokens still resident, or an arming token being
// consumed by a signal acceptance).

#include <algorithm>
#include <cstdint>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "flowkit/common.hpp"
#include "flowkit/value.hpp"

namespace flowkit {

enum class EventKind {
    InstanceStart,
    InstanceEnd,
    ActionStart,
    ActionEnd,
    TokenMove,
    SignalSend,
    SignalReceive,
    Assignment,
};

inline const char* event_kind_name(EventKind k) {
    switch (k) {
        case EventKind::InstanceStart: return "instanceStart";
        case EventKind::InstanceEnd: return "instanceEnd";
        case EventKind::ActionStart: return "actionStart";
        case EventKind::ActionEnd: return "actionEnd";
        case EventKind::TokenMove: return "tokenMove";
        case EventKind::SignalSend: return "signalSend";
        case EventKind::SignalReceive: return "signalReceive";
        case EventKind::Assignment: return "assignment";
    }
    return "?";
}

inline EventKind event_kind_from_name(const std::string& s) {
    if (s == "instanceStart") return EventKind::InstanceStart;
    if (s == "instanceEnd") return EventKind::InstanceEnd;
    if (s == "actionStart") return EventKind::ActionStart;
    if (s == "actionEnd") return EventKind::ActionEnd;
    if (s == "tokenMove") return EventKind::TokenMove;
    if (s == "signalSend") return EventKind::SignalSend;
    if (s == "signalReceive") return EventKind::SignalReceive;
    if (s == "assignment") return EventKind::Assignment;
    throw ParseError(s, "unknown event kind");
}

struct Event {
    int64_t tick = 0;
    int64_t seq = 0;
    EventKind kind = EventKind::TokenMove;
    std::string subject;
    std::vector<std::pair<std::string, std::string>> details;

    const std::string* find(const std::string& key) const {
        for (const auto& [k, v] : details)
            if (k == key) return &v;
        return nullptr;
    }
    std::string get(const std::string& key) const {
        const std::string* v = find(key);
        if (!v) throw ParseError(key, "missing event detail");
        return *v;
    }
    Event& with(std::string key, std::string value) {
        details.emplace_back(std::move(key), std::move(value));
        return *this;
    }
};

using EventLog = std::vector<Event>;

inline std::string to_line(const Event& e) {
    std::string out =
        std::to_string(e.tick) + " " + std::to_string(e.seq) + " " + event_kind_name(e.kind) +
        " " + e.subject;
    for (const auto& [k, v] : e.details) {
        out += ' ';
        out += k;
        out += '=';
        out += v;
    }
    return out;
}

inline std::string to_text(const EventLog& log) {
    std::string out;
    for (const Event& e : log) {
        out += to_line(e);
        out += '\n';
    }
    return out;
}

namespace detail {

// Splits a log line at spaces that are outside strings/records/lists.
inline std::vector<std::string> split_log_tokens(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    int depth = 0;
    bool inStr = false;
    for (size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (inStr) {
            cur += c;
            if (c == '\\' && i + 1 < line.size()) cur += line[++i];
            else if (c == '"') inStr = false;
            continue;
        }
        if (c == '"') {
            inStr = true;
            cur += c;
        } else if (c == '{' || c == '[') {
            ++depth;
            cur += c;
        } else if (c == '}' || c == ']') {
            --depth;
            cur += c;
        } else if (c == ' ' && depth == 0) {
            if (!cur.empty()) out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

}  // namespace detail

inline Event parse_event_line(const std::string& line) {
    std::vector<std::string> tok = detail::split_log_tokens(line);
    if (tok.size() < 4) throw ParseError(line, "event line needs tick, seq, kind, subject");
    Event e;
    try {
        e.tick = std::stoll(tok[0]);
        e.seq = std::stoll(tok[1]);
    } catch (const std::exception&) {
        throw ParseError(line, "tick/seq must be integers");
    }
    e.kind = event_kind_from_name(tok[2]);
    e.subject = tok[3];
    for (size_t i = 4; i < tok.size(); ++i) {
        size_t eq = tok[i].find('=');
        if (eq == std::string::npos) throw ParseError(tok[i], "expected key=value detail");
        e.details.emplace_back(tok[i].substr(0, eq), tok[i].substr(eq + 1));
    }
    return e;
}

inline EventLog parse_log(const std::string& text) {
    EventLog log;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        log.push_back(parse_event_line(line));
    }
    return log;
}

// The observable behaviour used to compare interpreters: ticks of action
// starts and ends. Token transport differs between semantics by design, so
// only the action lifecycle is projected.
struct ProjectedEvent {
    int64_t tick;
    bool start;  // false = end
    std::string instance;
    std::string node;

    bool operator==(const ProjectedEvent& o) const {
        return tick == o.tick && start == o.start && instance == o.instance && node == o.node;
    }
    // Canonical order: by tick, ends before starts (matching the phase order
    // within a tick), then instance and node. Interpreters may emit same-tick
    // events in different scan orders; sorting makes the projection a pure
    // function of the behaviour.
    bool operator<(const ProjectedEvent& o) const {
        return std::tie(tick, start, instance, node) < std::tie(o.tick, o.start, o.instance, o.node);
    }
};

inline std::vector<ProjectedEvent> project_action_events(const EventLog& log) {
    std::vector<ProjectedEvent> out;
    for (const Event& e : log) {
        if (e.kind == EventKind::ActionStart || e.kind == EventKind::ActionEnd) {
            out.push_back({e.tick, e.kind == EventKind::ActionStart, e.get("inst"), e.subject});
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

// Returns a human-readable description of the first difference, or empty when
// the projections agree.
inline std::string diff_projections(const std::vector<ProjectedEvent>& a,
                                    const std::vector<ProjectedEvent>& b) {
    auto describe = [](const ProjectedEvent& p) {
        return std::string(p.start ? "start" : "end") + " of " + p.node + " in " + p.instance +
               " at tick " + std::to_string(p.tick);
    };
    for (size_t i = 0; i < a.size() && i < b.size(); ++i) {
        if (!(a[i] == b[i]))
            return "event " + std::to_string(i) + ": " + describe(a[i]) + " vs " + describe(b[i]);
    }
    if (a.size() != b.size())
        return "lengths differ: " + std::to_string(a.size()) + " vs " + std::to_string(b.size());
    return "";
}

}  // namespace flowkit
