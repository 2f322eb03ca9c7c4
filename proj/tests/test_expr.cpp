#include <catch2/catch_amalgamated.hpp>

#include "flowkit/expr.hpp"

using namespace flowkit;

namespace {

Value ev(const std::string& text, const Bindings& b) {
    return eval_expr(*parse_expr(text), b);
}

Bindings empty_bindings() { return Bindings{}; }

}  // namespace

TEST_CASE("literals and operators") {
    Bindings b = empty_bindings();
    CHECK(ev("1 + 2 * 3", b) == Value(int64_t{7}));
    CHECK(ev("(1 + 2) * 3", b) == Value(int64_t{9}));
    CHECK(ev("10 - 3 - 2", b) == Value(int64_t{5}));  // left associative
    CHECK(ev("-4 * -2", b) == Value(int64_t{8}));
    CHECK(ev("2 < 3", b) == Value(true));
    CHECK(ev("3 <= 3", b) == Value(true));
    CHECK(ev("2 >= 3", b) == Value(false));
    CHECK(ev("\"abc\" < \"abd\"", b) == Value(true));
    CHECK(ev("\"a\" = \"a\"", b) == Value(true));
    CHECK(ev("1 != 2", b) == Value(true));
    CHECK(ev("true and false", b) == Value(false));
    CHECK(ev("true or false", b) == Value(true));
    CHECK(ev("not false", b) == Value(true));
    CHECK(ev("not (1 = 2)", b) == Value(true));
    CHECK(ev("1 = 1 and 2 = 2", b) == Value(true));
    CHECK(ev("1 = 2 or 2 = 2", b) == Value(true));
}

TEST_CASE("precedence: or < and < not < comparison < additive < multiplicative") {
    Bindings b = empty_bindings();
    // Parsed as (not (1=2)) and ((2+3*4) = 14)
    CHECK(ev("not 1 = 2 and 2 + 3 * 4 = 14", b) == Value(true));
    CHECK(ev("false and false or true", b) == Value(true));  // (f and f) or t
}

TEST_CASE("references resolve through variables, payload, and pins") {
    Record vars;
    vars["limit"] = Value(int64_t{10});
    vars["order"] = value_from_text("{id=5,total=80}");
    Value payload = value_from_text("{limit=99,qty=12}");  // limit shadowed by the variable
    std::map<std::string, Value> pins;
    pins["in1"] = value_from_text("{amount=3}");

    Bindings b;
    b.vars = &vars;
    b.payload = &payload;
    b.pinPayloads = &pins;

    CHECK(ev("limit", b) == Value(int64_t{10}));          // variable wins
    CHECK(ev("payload.limit", b) == Value(int64_t{99}));  // explicit payload access
    CHECK(ev("qty", b) == Value(int64_t{12}));            // falls through to payload field
    CHECK(ev("payload.qty", b) == Value(int64_t{12}));
    CHECK(ev("order.total", b) == Value(int64_t{80}));
    CHECK(ev("in1.amount", b) == Value(int64_t{3}));
    CHECK(ev("qty > limit", b) == Value(true));
}

TEST_CASE("evaluation errors") {
    Bindings b = empty_bindings();
    CHECK_THROWS_AS(ev("missing", b), EvalError);
    CHECK_THROWS_AS(ev("1 + true", b), EvalError);
    CHECK_THROWS_AS(ev("1 = \"x\"", b), EvalError);
    CHECK_THROWS_AS(ev("not 3", b), EvalError);
    CHECK_THROWS_AS(ev("true < false", b), EvalError);
    CHECK_THROWS_AS(eval_expr(*parse_guard("else"), b), EvalError);
}

TEST_CASE("short-circuit avoids evaluating the right side") {
    Bindings b = empty_bindings();
    CHECK(ev("false and missing = 1", b) == Value(false));
    CHECK(ev("true or missing = 1", b) == Value(true));
}

TEST_CASE("else is only legal as the whole guard of a decision edge") {
    CHECK(parse_guard("else")->kind == Expr::Kind::Else);
    CHECK_THROWS_AS(parse_guard("else or true"), ParseError);
    CHECK_THROWS_AS(parse_guard("not else"), ParseError);
    CHECK_THROWS_AS(parse_expr("else"), ParseError);
}

TEST_CASE("parse errors carry position info") {
    CHECK_THROWS_AS(parse_expr(""), ParseError);
    CHECK_THROWS_AS(parse_expr("1 +"), ParseError);
    CHECK_THROWS_AS(parse_expr("(1"), ParseError);
    CHECK_THROWS_AS(parse_expr("a ."), ParseError);
    CHECK_THROWS_AS(parse_expr("1 2"), ParseError);
    CHECK_THROWS_AS(parse_expr("a & b"), ParseError);
    try {
        parse_expr("1 + + 2");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("offset") != std::string::npos);
    }
}

TEST_CASE("printer emits canonical text with minimal parentheses") {
    auto canon = [](const std::string& text) { return to_text(*parse_guard(text)); };
    CHECK(canon("1+2*3") == "1 + 2 * 3");
    CHECK(canon("(1+2)*3") == "(1 + 2) * 3");
    CHECK(canon("not(a or b)") == "not (a or b)");
    CHECK(canon("not a") == "not a");
    CHECK(canon("a and (b or c)") == "a and (b or c)");
    CHECK(canon("(a and b) or c") == "a and b or c");
    CHECK(canon("payload.qty >= 10") == "payload.qty >= 10");
    CHECK(canon("x = \"ok\"") == "x = \"ok\"");
    CHECK(canon("else") == "else");
    // Reprinting canonical text parses to an equal tree.
    std::string c = canon("not (a or not b) and x.y.z + 1 * 2 - 3 < 4");
    CHECK(expr_equal(parse_guard(c), parse_guard("not (a or not b) and x.y.z + 1 * 2 - 3 < 4")));
    CHECK(to_text(*parse_guard(c)) == c);
}

TEST_CASE("reference collection") {
    auto refs = collect_refs(parse_expr("a.b + payload.x * f and q"));
    REQUIRE(refs.size() == 4);
    CHECK(refs[0] == std::vector<std::string>{"a", "b"});
    CHECK(refs[1] == std::vector<std::string>{"payload", "x"});
    CHECK(refs[2] == std::vector<std::string>{"f"});
    CHECK(refs[3] == std::vector<std::string>{"q"});
}

TEST_CASE("structural equality ignores formatting") {
    CHECK(expr_equal(parse_expr("a+b*c"), parse_expr("a + b * c")));
    CHECK_FALSE(expr_equal(parse_expr("a+(b*c)"), parse_expr("(a+b)*c")));
}

TEST_CASE("reference path parsing") {
    CHECK(parse_ref_path("a.b.c") == std::vector<std::string>({"a", "b", "c"}));
    CHECK(parse_ref_path("order") == std::vector<std::string>({"order"}));
    CHECK_THROWS_AS(parse_ref_path("a..b"), ParseError);
    CHECK_THROWS_AS(parse_ref_path("a.b extra"), ParseError);
    CHECK_THROWS_AS(parse_ref_path("3x"), ParseError);
}
