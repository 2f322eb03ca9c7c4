#include <catch2/catch_amalgamated.hpp>

#include "flowkit/value.hpp"

using namespace flowkit;

TEST_CASE("canonical value text") {
    CHECK(to_text(Value(int64_t{42})) == "42");
    CHECK(to_text(Value(int64_t{-17})) == "-17");
    CHECK(to_text(Value(true)) == "true");
    CHECK(to_text(Value(false)) == "false");
    CHECK(to_text(Value("hi")) == "\"hi\"");
    CHECK(to_text(Value("a\"b\\c\nd\te")) == "\"a\\\"b\\\\c\\nd\\te\"");

    Record r;
    r["id"] = Value(int64_t{7});
    r["name"] = Value("x y");
    CHECK(to_text(Value(r)) == "{id=7,name=\"x y\"}");

    List l{Value(int64_t{1}), Value(int64_t{2})};
    CHECK(to_text(Value(l)) == "[1,2]");
    CHECK(to_text(Value(Record{})) == "{}");
    CHECK(to_text(Value(List{})) == "[]");
}

TEST_CASE("record keys print sorted regardless of insertion order") {
    Record r;
    r["zeta"] = Value(int64_t{1});
    r["alpha"] = Value(int64_t{2});
    CHECK(to_text(Value(r)) == "{alpha=2,zeta=1}");
}

TEST_CASE("value text round-trips") {
    auto roundtrip = [](const std::string& text) {
        Value v = value_from_text(text);
        CHECK(to_text(v) == text);
    };
    roundtrip("42");
    roundtrip("-3");
    roundtrip("true");
    roundtrip("false");
    roundtrip("\"hello world\"");
    roundtrip("\"quote \\\" slash \\\\ nl \\n tab \\t\"");
    roundtrip("{a=1,b={c=[1,2,{d=\"x\"}]},e=true}");
    roundtrip("[]");
    roundtrip("{}");
    roundtrip("[{k=\"v\"},[],[3]]");
}

TEST_CASE("malformed value text is rejected") {
    CHECK_THROWS_AS(value_from_text(""), ParseError);
    CHECK_THROWS_AS(value_from_text("{a=1"), ParseError);
    CHECK_THROWS_AS(value_from_text("[1,]"), ParseError);
    CHECK_THROWS_AS(value_from_text("\"open"), ParseError);
    CHECK_THROWS_AS(value_from_text("42x"), ParseError);
    CHECK_THROWS_AS(value_from_text("tru"), ParseError);
    CHECK_THROWS_AS(value_from_text("--5"), ParseError);
}

TEST_CASE("embedded value parsing tracks position") {
    std::string s = "before {a=1} after";
    size_t pos = 7;
    Value v = value_from_text_at(s, pos);
    CHECK(to_text(v) == "{a=1}");
    CHECK(pos == 12);
}

TEST_CASE("path lookup walks nested records") {
    Value v = value_from_text("{order={id=5,items=[1,2]},done=false}");
    CHECK(lookup_path(v, {"order", "id"}) == Value(int64_t{5}));
    CHECK(lookup_path(v, {"done"}) == Value(false));
    CHECK_FALSE(lookup_path(v, {"order", "missing"}).has_value());
    CHECK_FALSE(lookup_path(v, {"order", "id", "deeper"}).has_value());
    CHECK(lookup_path(v, {}) == v);
}
