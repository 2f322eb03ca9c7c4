#pragma once

// Runtime data values carried by tokens, variables, and signal payloads.
//
// A Value is one of: int (64-bit), bool, string, record (string-keyed map),
// list. Every value has exactly one canonical text form, so payloads can be
// embedded in event-log lines and parsed back without loss. The canonical
// forms:
//
//   42   -17   true   false   "text\n with escapes"
//   {amount=12,id="x"}      record, keys sorted ascending
//   [1,2,3]                 list
//
// Strings escape `"` `\` newline and tab; all other characters pass through.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "flowkit/common.hpp"

namespace flowkit {

struct Value;
using Record = std::map<std::string, Value>;  // ordered map keeps keys sorted
using List = std::vector<Value>;

struct Value {
    std::variant<int64_t, bool, std::string, Record, List> data;

    Value() : data(int64_t{0}) {}
    Value(int64_t v) : data(v) {}
    Value(int v) : data(int64_t{v}) {}
    Value(bool v) : data(v) {}
    Value(const char* v) : data(std::string(v)) {}
    Value(std::string v) : data(std::move(v)) {}
    Value(Record v) : data(std::move(v)) {}
    Value(List v) : data(std::move(v)) {}

    bool is_int() const { return std::holds_alternative<int64_t>(data); }
    bool is_bool() const { return std::holds_alternative<bool>(data); }
    bool is_string() const { return std::holds_alternative<std::string>(data); }
    bool is_record() const { return std::holds_alternative<Record>(data); }
    bool is_list() const { return std::holds_alternative<List>(data); }

    int64_t as_int() const { return std::get<int64_t>(data); }
    bool as_bool() const { return std::get<bool>(data); }
    const std::string& as_string() const { return std::get<std::string>(data); }
    const Record& as_record() const { return std::get<Record>(data); }
    Record& as_record() { return std::get<Record>(data); }
    const List& as_list() const { return std::get<List>(data); }
    List& as_list() { return std::get<List>(data); }

    const char* kind_name() const {
        switch (data.index()) {
            case 0: return "int";
            case 1: return "bool";
            case 2: return "string";
            case 3: return "record";
            default: return "list";
        }
    }

    bool operator==(const Value& o) const { return data == o.data; }
    bool operator!=(const Value& o) const { return !(*this == o); }
};

namespace detail {

inline void print_value(const Value& v, std::string& out) {
    if (v.is_int()) {
        out += std::to_string(v.as_int());
    } else if (v.is_bool()) {
        out += v.as_bool() ? "true" : "false";
    } else if (v.is_string()) {
        out += '"';
        for (char c : v.as_string()) {
            switch (c) {
                case '"': out += "\\\""; break;
                case '\\': out += "\\\\"; break;
                case '\n': out += "\\n"; break;
                case '\t': out += "\\t"; break;
                default: out += c;
            }
        }
        out += '"';
    } else if (v.is_record()) {
        out += '{';
        bool first = true;
        for (const auto& [k, val] : v.as_record()) {
            if (!first) out += ',';
            first = false;
            out += k;
            out += '=';
            print_value(val, out);
        }
        out += '}';
    } else {
        out += '[';
        const List& l = v.as_list();
        for (size_t i = 0; i < l.size(); ++i) {
            if (i) out += ',';
            print_value(l[i], out);
        }
        out += ']';
    }
}

struct ValueScanner {
    const std::string& s;
    size_t pos = 0;

    explicit ValueScanner(const std::string& text) : s(text) {}

    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError("value text offset " + std::to_string(pos), msg);
    }
    char peek() const { return pos < s.size() ? s[pos] : '\0'; }
    char take() {
        if (pos >= s.size()) fail("unexpected end of value text");
        return s[pos++];
    }
    void expect(char c) {
        if (take() != c) {
            --pos;
            fail(std::string("expected '") + c + "'");
        }
    }

    Value value() {
        char c = peek();
        if (c == '"') return string_value();
        if (c == '{') return record_value();
        if (c == '[') return list_value();
        if (c == 't' || c == 'f') return bool_value();
        if (c == '-' || (c >= '0' && c <= '9')) return int_value();
        fail("expected a value");
    }

    Value string_value() {
        expect('"');
        std::string out;
        for (;;) {
            char c = take();
            if (c == '"') return Value(std::move(out));
            if (c == '\\') {
                char e = take();
                switch (e) {
                    case '"': out += '"'; break;
                    case '\\': out += '\\'; break;
                    case 'n': out += '\n'; break;
                    case 't': out += '\t'; break;
                    default: --pos; fail("bad escape");
                }
            } else {
                out += c;
            }
        }
    }

    Value bool_value() {
        if (s.compare(pos, 4, "true") == 0) {
            pos += 4;
            return Value(true);
        }
        if (s.compare(pos, 5, "false") == 0) {
            pos += 5;
            return Value(false);
        }
        fail("expected true or false");
    }

    Value int_value() {
        size_t start = pos;
        if (peek() == '-') ++pos;
        while (peek() >= '0' && peek() <= '9') ++pos;
        if (pos == start || (s[start] == '-' && pos == start + 1)) fail("expected digits");
        return Value(int64_t(std::stoll(s.substr(start, pos - start))));
    }

    Value record_value() {
        expect('{');
        Record rec;
        if (peek() == '}') {
            ++pos;
            return Value(std::move(rec));
        }
        for (;;) {
            std::string key;
            while (peek() != '=' && peek() != '\0') key += take();
            expect('=');
            rec[key] = value();
            char c = take();
            if (c == '}') return Value(std::move(rec));
            if (c != ',') {
                --pos;
                fail("expected ',' or '}'");
            }
        }
    }

    Value list_value() {
        expect('[');
        List out;
        if (peek() == ']') {
            ++pos;
            return Value(std::move(out));
        }
        for (;;) {
            out.push_back(value());
            char c = take();
            if (c == ']') return Value(std::move(out));
            if (c != ',') {
                --pos;
                fail("expected ',' or ']'");
            }
        }
    }
};

}  // namespace detail

inline std::string to_text(const Value& v) {
    std::string out;
    detail::print_value(v, out);
    return out;
}

// Parses exactly one canonical value occupying the whole string.
inline Value value_from_text(const std::string& text) {
    detail::ValueScanner sc(text);
    Value v = sc.value();
    if (sc.pos != text.size()) sc.fail("trailing characters after value");
    return v;
}

// Reads a value out of a larger string starting at `pos`; leaves `pos` just
// past it. Used by the event-log parser, where values are embedded in lines.
inline Value value_from_text_at(const std::string& text, size_t& pos) {
    detail::ValueScanner sc(text);
    sc.pos = pos;
    Value v = sc.value();
    pos = sc.pos;
    return v;
}

// Descends into records by field name. Empty path returns the value itself.
inline std::optional<Value> lookup_path(const Value& root,
                                        const std::vector<std::string>& path,
                                        size_t from = 0) {
    const Value* cur = &root;
    for (size_t i = from; i < path.size(); ++i) {
        if (!cur->is_record()) return std::nullopt;
        auto it = cur->as_record().find(path[i]);
        if (it == cur->as_record().end()) return std::nullopt;
        cur = &it->second;
    }
    return *cur;
}

// Writes through a field path, materialising intermediate records as needed.
// An empty remaining path replaces the value wholesale.
inline void store_path(Value& root, const std::vector<std::string>& path, size_t from,
                       Value v) {
    Value* cur = &root;
    for (size_t i = from; i < path.size(); ++i) {
        if (!cur->is_record()) *cur = Value{Record{}};
        cur = &std::get<Record>(cur->data)[path[i]];
    }
    *cur = std::move(v);
}

}  // namespace flowkit
