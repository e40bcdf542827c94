#include "fixtures.hpp"

#include "ndde/model.hpp"

#include <doctest.h>

#include <cmath>

using namespace ndde;

TEST_CASE("delay derivatives") {
    const DelaySpec r(parse_expression("0.2*t"));
    CHECK(r.tau(5.0) == doctest::Approx(4.0));
    CHECK(r.rate(3.0) == doctest::Approx(0.2));
    CHECK(r.curvature(3.0) == 0.0);
    const DelaySpec s(parse_expression("1 + 0.5*sin(t)"));
    CHECK(s.rate(0.0) == doctest::Approx(0.5));
    CHECK(s.curvature(std::acos(-1.0) / 2) == doctest::Approx(-0.5));
}

TEST_CASE("neutral quotient and general re-encoding") {
    const ProblemSpec pr = fixture::worked_problem();
    const Expression q = neutral_quotient(pr);
    CHECK(q(1.0) == doctest::Approx(std::sin(1.0) / 7.0 / 0.8).epsilon(1e-14));

    const ProblemSpec g = to_general(pr);
    CHECK(g.form == Form::general);
    for (double t : {0.0, 0.7, 3.0}) {
        CHECK(g.Q.evaluate({t, 2.0, 0.0}) == doctest::Approx(2.0 * q(t)));
        CHECK(g.bQ(t) == doctest::Approx(std::fabs(q(t))));
        CHECK(g.a(t) == doctest::Approx(pr.a(t) + std::cos(t) / 7.0 / 0.8).epsilon(1e-12));
        CHECK(g.Q_x.evaluate({t, 5.0, 0.0}) == doctest::Approx(q(t)));
        CHECK(g.Q_t.evaluate({t, 1.0, 0.0}) == doctest::Approx(std::cos(t) / 7.0 / 0.8));
        CHECK(g.d(t) == 0.0);
    }
}

TEST_CASE("horizon of the delays") {
    ProblemSpec pr = fixture::worked_problem();
    CHECK(horizon(pr, 100.0).m == doctest::Approx(0.0));
    pr.r1 = DelaySpec(parse_expression("1"));
    pr.r2 = DelaySpec(parse_expression("2"));
    const HorizonResult h = horizon(pr, 100.0);
    CHECK(h.m == doctest::Approx(-2.0));
    CHECK(h.delay_index == 2);
}

TEST_CASE("validation") {
    ProblemSpec pr = fixture::worked_problem();
    const AuxiliarySpec aux = fixture::worked_aux();
    const ValidationReport rep = validate(pr, aux, 1e3);
    REQUIRE(rep.warnings.size() >= 1);
    CHECK(rep.warnings.front().find("p(t0)") != std::string::npos);

    ProblemSpec unit_rate = pr;
    unit_rate.r1 = DelaySpec(parse_expression("t + 1"));
    CHECK_THROWS_AS(validate(unit_rate, 100.0), ValidationError);

    ProblemSpec even = pr;
    even.gamma = {1, 2};
    CHECK_THROWS_AS(validate(even, 100.0), ValidationError);

    ProblemSpec negative = pr;
    negative.r2 = DelaySpec(parse_expression("-1"));
    CHECK_THROWS_AS(validate(negative, 100.0), ValidationError);

    const AuxiliarySpec bad_p(parse_expression("1 - t"), parse_expression("0"), 0.0);
    CHECK_THROWS_AS(validate(pr, bad_p, 100.0), ValidationError);
}

TEST_CASE("auxiliary pair extension left of t0") {
    const AuxiliarySpec aux = fixture::worked_aux();
    CHECK(aux.p(-1.0) == 1.0);
    CHECK(aux.dp(-1.0) == 0.0);
    CHECK(aux.p(0.0) == doctest::Approx(5.0));
    CHECK(aux.dp(0.0) == doctest::Approx(-25.0));
    CHECK(aux.kernel(0.0) == doctest::Approx(1.0 + 5.0));
}

TEST_CASE("history function") {
    const HistoryFunction psi(parse_expression("0.01*cos(t)"), -2.0, 0.0);
    CHECK(psi.norm() == doctest::Approx(0.01));
    CHECK(psi.derivative(-1.0) == doctest::Approx(0.01 * std::sin(1.0)));
    CHECK(psi.lo() == -2.0);

    const HistoryFunction kink(parse_expression("abs(t + 1)"), -2.0, 0.0);
    CHECK_FALSE(kink.has_derivative());
    CHECK_THROWS_AS(kink.derivative(-0.5), ValidationError);

    const HistoryFunction supplied(parse_expression("abs(t + 1)"), -2.0, 0.0, parse_expression("1"));
    CHECK(supplied.derivative(-0.5) == 1.0);
}
