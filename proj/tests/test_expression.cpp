#include "ndde/expression.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace ndde;

namespace {

double at(const std::string& text, double t) { return parse_expression(text)(t); }

}  // namespace

TEST_CASE("evaluation of coefficient text") {
    CHECK(at("sin(t)/7", std::numbers::pi / 2) == doctest::Approx(1.0 / 7.0).epsilon(1e-15));
    CHECK(at("0.01*(0.8*t + 0.2)^(1/3)/((t + 0.1)*(t + 0.2))", 0.0) ==
          doctest::Approx(0.01 * std::cbrt(0.2) / 0.02).epsilon(1e-14));
    CHECK(at("exp(ln(3))", 0.0) == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(at("abs(-2.5)", 0.0) == 2.5);
    CHECK(at("pi", 0.0) == std::numbers::pi);
    CHECK(at("1.5e-3*t", 2.0) == doctest::Approx(3e-3));
}

TEST_CASE("precedence and associativity") {
    CHECK(at("2 + 3*4^2", 0.0) == 50.0);
    CHECK(at("-2^2", 0.0) == -4.0);
    CHECK(at("2^3^2", 0.0) == 512.0);
    CHECK(at("2^-1", 0.0) == 0.5);
    CHECK(at("8/4/2", 0.0) == 1.0);
    CHECK(at("1 - 2 - 3", 0.0) == -4.0);
    CHECK(at("-t^2", 3.0) == -9.0);
}

TEST_CASE("two- and three-variable expressions") {
    const Expression F = parse_expression("x*y/(1 + y^2)", {Var::x, Var::y});
    CHECK(F.evaluate({0.0, 2.0, 1.0}) == doctest::Approx(1.0));
    CHECK(F.depends_on(Var::x));
    CHECK_FALSE(F.depends_on(Var::t));
}

TEST_CASE("parse errors carry offsets") {
    CHECK_THROWS_AS(parse_expression("1 + * 2"), ParseError);
    try {
        parse_expression("t + y");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.offset() == 4);
    }
    CHECK_THROWS_AS(parse_expression("sin t"), ParseError);
    CHECK_THROWS_AS(parse_expression("(t + 1"), ParseError);
    CHECK_THROWS_AS(parse_expression("t 1"), ParseError);
    CHECK_THROWS_AS(parse_expression(""), ParseError);
}

TEST_CASE("domain errors") {
    CHECK_THROWS_AS(at("ln(t)", -1.0), DomainError);
    CHECK_THROWS_AS(at("1/t", 0.0), DomainError);
}

TEST_CASE("symbolic derivative") {
    CHECK(differentiate(parse_expression("1/(t + 0.2)"))(0.0) == doctest::Approx(-25.0).epsilon(1e-14));
    CHECK(differentiate(parse_expression("sin(t)/7"))(0.0) == doctest::Approx(1.0 / 7.0));
    CHECK(differentiate(parse_expression("3"))(1.0) == 0.0);
    CHECK_THROWS_AS(differentiate(parse_expression("abs(t)")), DifferentiationError);
}

TEST_CASE("symbolic derivative against central differences") {
    const char* cases[] = {
        "sin(t)*exp(-0.3*t)",
        "(t + 1)^(1/3)/(t^2 + 2)",
        "ln(2 + cos(t))*t",
        "0.1/(t + 0.1) - 1/(t + 0.2)",
        "exp(sin(t))^2",
        "(0.8*t + 0.2)^(1/3)",
    };
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(0.1, 5.0);
    for (const char* text : cases) {
        const Expression e = parse_expression(text);
        const Expression d = differentiate(e);
        for (int k = 0; k < 10; ++k) {
            const double t = U(rng), h = 1e-5;
            const double fd = (e(t + h) - e(t - h)) / (2 * h);
            CHECK(d(t) == doctest::Approx(fd).epsilon(1e-7));
        }
    }
}

TEST_CASE("printing round-trips") {
    const char* cases[] = {"sin(t)/7", "-t^2 + 3*t - 1", "2^-t", "(t - 1)*(t + 1)", "sgnpow(t - 2, 1/3)"};
    for (const char* text : cases) {
        const Expression e = parse_expression(text);
        const Expression back = parse_expression(e.to_string());
        for (double t : {-1.5, 0.0, 0.3, 2.7}) {
            double a = 0.0, b = 0.0;
            bool ea = false, eb = false;
            try { a = e(t); } catch (const DomainError&) { ea = true; }
            try { b = back(t); } catch (const DomainError&) { eb = true; }
            CHECK(ea == eb);
            if (!ea) CHECK(a == b);
        }
    }
}

TEST_CASE("substitute") {
    const Expression G = parse_expression("sin(x)", {Var::x});
    const Expression composed = G.substitute(Var::x, parse_expression("t*t"));
    CHECK(composed(1.5) == doctest::Approx(std::sin(2.25)));
}

TEST_CASE("signed power and rational exponents") {
    CHECK(signed_power(0.512, 1.0 / 3.0) == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(signed_power(-0.512, Rational{1, 3}) == doctest::Approx(-0.8).epsilon(1e-15));
    CHECK(signed_power(0.0, 0.6) == 0.0);
    CHECK(at("sgnpow(-8, 1/3)", 0.0) == doctest::Approx(-2.0));

    const Rational r = parse_rational("3/5");
    CHECK(r.num == 3);
    CHECK(r.den == 5);
    CHECK(r.valid());
    CHECK_FALSE(parse_rational("1/2").valid());
    CHECK_FALSE(parse_rational("5/3").valid());
    CHECK_THROWS(parse_rational("one third"));
}
