#include "fixtures.hpp"

#include "ndde/criteria.hpp"
#include "ndde/integrator.hpp"
#include "ndde/operator.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace ndde;

namespace {

/// x' = -a x(t-1) + b x'(t-1) + c sin(x^(1/3)(t-1)) with p ≡ 1, g = a.
ProblemSpec smooth_problem() {
    ProblemSpec pr;
    pr.form = Form::linear_neutral;
    pr.a = parse_expression("0.5");
    pr.b = parse_expression("0.1*sin(t)");
    pr.c = parse_expression("0.02*exp(-t)");
    pr.G = parse_expression("sin(x)", {Var::x});
    pr.r1 = DelaySpec(parse_expression("1"));
    pr.r2 = DelaySpec(parse_expression("1"));
    return pr;
}

AuxiliarySpec smooth_aux() { return AuxiliarySpec(Expression::constant(1.0), parse_expression("0.5"), 0.0); }

}  // namespace

TEST_CASE("mesh layout") {
    const Mesh m = Mesh::uniform(-1.0, 0.0, 10.0, 0.1);
    CHECK(m.cells == 100);
    CHECK(m.node(0) == 0.0);
    CHECK(m.node(m.cells) == 10.0);
    CHECK(m.history_node(0) == -1.0);
    CHECK(m.history_node(m.history_cells) == 0.0);
    CHECK(m.history_step() <= 0.1 + 1e-15);

    const Mesh degenerate = Mesh::uniform(0.0, 0.0, 1.0, 0.5);
    CHECK(degenerate.history_cells == 0);
    CHECK(degenerate.cells >= 4);
}

TEST_CASE("grid function interpolation and CSV") {
    const SplitOperator op(smooth_problem(), smooth_aux(), HistoryFunction(parse_expression("cos(t)"), -1.0, 0.0), 5.0,
                           0.05);
    const GridFunction z = op.candidate([](double t) { return std::cos(t); }, [](double t) { return -std::sin(t); });
    const Mesh& m = z.mesh();
    for (std::size_t i = 0; i <= m.cells; ++i) CHECK(z(m.node(i)) == z.values()[i]);
    for (std::size_t i = 0; i <= m.history_cells; ++i) CHECK(z.history_values()[i] == std::cos(m.history_node(i)));
    CHECK(std::fabs(z(1.2345) - std::cos(1.2345)) < 1e-6);
    CHECK(std::fabs(z(-0.777) - std::cos(-0.777)) < 1e-6);
    CHECK(z.sup_norm() >= std::fabs(z(2.0)));

    std::stringstream ss;
    z.write_csv(ss, "z");
    const GridFunction back = GridFunction::read_csv(ss);
    CHECK(back.mesh().cells == m.cells);
    CHECK(sup_distance(back, z) == 0.0);
}

TEST_CASE("A vanishes on the zero candidate and for c = 0") {
    const ProblemSpec pr = fixture::worked_problem();
    const AuxiliarySpec aux = fixture::worked_aux();
    const SplitOperator op(pr, aux, fixture::constant_history(0.0), 10.0, 0.05);
    CHECK(op.apply_A(op.candidate([](double) { return 0.0; })).solution_sup() == 0.0);

    ProblemSpec no_c = pr;
    no_c.c = Expression::constant(0.0);
    const SplitOperator op2(no_c, aux, fixture::constant_history(0.001), 10.0, 0.05);
    CHECK(op2.apply_A(op2.candidate([](double t) { return std::sin(t); })).solution_sup() == 0.0);
}

TEST_CASE("A on the unit candidate is bounded by the decay term") {
    const SplitOperator op(fixture::worked_problem(), fixture::worked_aux(), fixture::constant_history(0.0), 200.0,
                           0.05);
    const GridFunction Az = op.apply_A(op.candidate([](double) { return 1.0; }));
    CHECK(Az.solution_sup() <= 0.1);
}

TEST_CASE("B: trivial cases") {
    const SplitOperator zero(fixture::worked_problem(), fixture::worked_aux(), fixture::constant_history(0.0), 10.0,
                             0.05);
    CHECK(zero.apply_B(zero.candidate([](double) { return 0.0; })).solution_sup() == 0.0);

    ProblemSpec pr;
    pr.form = Form::linear_neutral;
    pr.a = pr.b = pr.c = Expression::constant(0.0);
    pr.r1 = DelaySpec(parse_expression("1"));
    pr.r2 = DelaySpec(parse_expression("1"));
    const HistoryFunction psi(parse_expression("1 + 0.1*t"), -1.0, 0.0);
    const SplitOperator op(pr, AuxiliarySpec(), psi, 5.0, 0.1);
    const GridFunction Bz = op.apply_B(op.candidate([](double t) { return std::cos(3 * t); }));
    for (double v : Bz.values()) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));
    for (std::size_t i = 0; i <= Bz.mesh().history_cells; ++i)
        CHECK(Bz.history_values()[i] == psi.value(Bz.mesh().history_node(i)));
}

TEST_CASE("Picard on the zero history") {
    const SplitOperator op(fixture::worked_problem(), fixture::worked_aux(), fixture::constant_history(0.0), 20.0,
                           0.05);
    const PicardResult r = picard_solve(op);
    CHECK(r.status == PicardStatus::converged);
    CHECK(r.iterations == 1);
    CHECK(r.z.sup_norm() == 0.0);
    CHECK(residual(op, r.z) == 0.0);
}

TEST_CASE("Picard on the worked example matches direct integration") {
    const ProblemSpec pr = fixture::worked_problem();
    const AuxiliarySpec aux = fixture::worked_aux();
    const HistoryFunction psi = fixture::constant_history(0.001);
    const SplitOperator op(pr, aux, psi, 50.0, 0.01);
    const PicardResult r = picard_solve(op, 1e-8);
    REQUIRE(r.status == PicardStatus::converged);
    CHECK(r.residual < 1e-6);
    CHECK(residual(op, r.z) <= 10 * 1e-8);
    CHECK_FALSE(r.cap_exceeded);

    const Trajectory xd = integrate(x_equation(pr, psi), 50.0);
    const GridFunction x = reconstruct_x(r.z, aux);
    double gap = 0.0;
    for (std::size_t i = 0; i <= x.mesh().cells; ++i)
        gap = std::max(gap, std::fabs(x.values()[i] - xd.value(x.mesh().node(i))));
    CHECK(gap < 1e-3);

    // the direct solution, mapped to z, nearly solves the fixed-point equation
    IntegrateOptions fine;
    fine.step = 1e-3;
    const Trajectory zd = integrate(z_equation(pr, aux, psi), 50.0, fine);
    const GridFunction zc = op.candidate([&](double t) { return zd.value(t); }, [&](double t) { return zd.derivative(t); });
    CHECK(residual(op, zc) < 1e-4);
}

TEST_CASE("reconstruct x") {
    const SplitOperator op(fixture::worked_problem(), fixture::worked_aux(), fixture::constant_history(1.0), 5.0,
                           0.05);
    const GridFunction one = op.candidate([](double) { return 1.0; });
    const GridFunction x = reconstruct_x(one, fixture::worked_aux());
    CHECK(x.values()[0] == doctest::Approx(5.0));
    CHECK(x(1.0) == doctest::Approx(1.0 / 1.2).epsilon(1e-6));
    CHECK(x.sup_norm() <= one.sup_norm() * 5.0 + 1e-12);
}

TEST_CASE("empirical contraction of B on the worked example") {
    const ProblemSpec pr = fixture::worked_problem();
    const AuxiliarySpec aux = fixture::worked_aux();
    const CriterionModel model(pr, aux, 50.0);
    const AlphaEstimate a = alpha_estimate(model, 2048);
    double alpha_B = 0.0;
    for (std::size_t j = 0; j + 1 < a.terms.size(); ++j) alpha_B += a.terms[j].sup;

    const SplitOperator op(pr, aux, fixture::constant_history(0.001), 50.0, 0.02);
    std::mt19937_64 rng(5);
    const double z0 = 0.001 / aux.p(0.0);
    for (int k = 0; k < 10; ++k) {
        const GridFunction z1 = fixture::random_candidate(op, rng, z0), z2 = fixture::random_candidate(op, rng, z0);
        const double ratio = contraction_ratio(op, z1, z2);
        CHECK(ratio < 1.0);
        CHECK(ratio <= alpha_B + 0.05);
    }
}

TEST_CASE("candidate space is closed under A z1 + B z2 for small histories") {
    const ProblemSpec pr = fixture::worked_problem();
    const AuxiliarySpec aux = fixture::worked_aux();
    const CriterionModel model(pr, aux, 1e4);
    const AlphaEstimate a = alpha_estimate(model);
    const DeltaBounds d = delta_bounds(a.alpha, 1.0, 0.1, model);
    const SplitOperator op(pr, aux, fixture::constant_history(d.existence), 50.0, 0.02);
    std::mt19937_64 rng(8);
    const double z0 = d.existence / aux.p(0.0);
    for (int k = 0; k < 10; ++k) {
        const GridFunction z1 = fixture::random_candidate(op, rng, z0), z2 = fixture::random_candidate(op, rng, z0);
        const GridFunction Az = op.apply_A(z1), Bz = op.apply_B(z2);
        double sup = 0.0;
        for (std::size_t i = 0; i < Az.values().size(); ++i) sup = std::max(sup, std::fabs(Az.values()[i] + Bz.values()[i]));
        CHECK(sup <= 1.0 + 1e-9);
    }
}

TEST_CASE("mesh refinement shrinks the residual of the discrete fixed point") {
    // history slope matches the equation at t0, so no derivative jump propagates through the neutral term
    ProblemSpec pr = smooth_problem();
    pr.c = Expression::constant(0.0);
    const AuxiliarySpec aux = smooth_aux();
    const HistoryFunction psi(parse_expression("0.01*cos(t) - 0.01*cos(1)*t"), -1.0, 0.0);
    const SplitOperator fine(pr, aux, psi, 10.0, 0.00625);
    double previous = 0.0;
    for (double h : {0.2, 0.1, 0.05}) {
        const SplitOperator op(pr, aux, psi, 10.0, h);
        const PicardResult r = picard_solve(op, 1e-14);
        REQUIRE(r.converged);
        const double res = residual(fine, r.z);
        if (previous > 0.0) CHECK(previous / res >= 4.0);
        previous = res;
    }
}

TEST_CASE("a slope jump at t0 limits refinement to first order") {
    const HistoryFunction psi(parse_expression("0.01*cos(t)"), -1.0, 0.0);
    const SplitOperator fine(smooth_problem(), smooth_aux(), psi, 10.0, 0.00625);
    double previous = 0.0;
    for (double h : {0.1, 0.05}) {
        const PicardResult r = picard_solve(SplitOperator(smooth_problem(), smooth_aux(), psi, 10.0, h), 1e-14);
        const double res = residual(fine, r.z);
        if (previous > 0.0) CHECK(previous / res == doctest::Approx(2.0).epsilon(0.25));
        previous = res;
    }
}

TEST_CASE("negative control: Picard with the neutral coefficient scaled by 10") {
    const SplitOperator op(fixture::worked_problem(10.0), fixture::worked_aux(), fixture::constant_history(0.001),
                           50.0, 0.01);
    const PicardResult r = picard_solve(op, 1e-10, 200);
    double max_ratio = 0.0;
    for (double q : r.ratios) max_ratio = std::max(max_ratio, q);
    CHECK(max_ratio > 1.0);
    CHECK(r.status != PicardStatus::converged);
    CHECK(r.status != PicardStatus::failed);
    CHECK_FALSE(r.message.empty());
}

TEST_CASE("the operator rejects p(t0) != 1 with a non-degenerate history") {
    ProblemSpec pr = smooth_problem();
    const AuxiliarySpec aux(parse_expression("2 + t"), parse_expression("0.5"), 0.0);
    CHECK_THROWS_AS(SplitOperator(pr, aux, HistoryFunction(parse_expression("1"), -1.0, 0.0), 5.0, 0.1), ValidationError);
}
