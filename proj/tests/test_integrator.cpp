#include "fixtures.hpp"

#include "ndde/integrator.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace ndde;

namespace {

DelayEquation scalar(std::function<double(double)> tau, std::function<double(double, double, const DelayedState&)> rhs) {
    DelayEquation eq;
    eq.initial = 1.0;
    eq.tau1 = tau;
    eq.tau2 = tau;
    eq.rhs = std::move(rhs);
    eq.history = [](double) { return 1.0; };
    eq.history_slope = [](double) { return 0.0; };
    return eq;
}

DelayEquation decay() {
    return scalar([](double t) { return t; }, [](double, double x, const DelayedState&) { return -x; });
}

DelayEquation pantograph() {
    return scalar([](double t) { return 0.8 * t; }, [](double, double, const DelayedState& d) { return -d.x1; });
}

/// Forward Euler for x' = -x(0.8 t), x(0) = 1, with linear interpolation of the past.
double pantograph_euler(double T, double h) {
    const std::size_t n = static_cast<std::size_t>(std::llround(T / h));
    std::vector<double> x(n + 1);
    x[0] = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double u = 0.8 * static_cast<double>(i);
        const std::size_t k = static_cast<std::size_t>(u);
        const double f = u - static_cast<double>(k);
        const double past = k < i ? x[k] * (1 - f) + x[k + 1] * f : x[k];
        x[i + 1] = x[i] - h * past;
    }
    return x[n];
}

ProblemSpec linear_problem(const std::string& b) {
    ProblemSpec pr;
    pr.form = Form::linear_neutral;
    pr.a = parse_expression("0.6 + 0.2*sin(t)");
    pr.b = parse_expression(b);
    pr.c = parse_expression("0");
    pr.r1 = DelaySpec(parse_expression("1 + 0.3*sin(t)"));
    pr.r2 = DelaySpec(parse_expression("1.5"));
    return pr;
}

}  // namespace

TEST_CASE("x' = -x") {
    const Trajectory tr = integrate(decay(), 5.0);
    CHECK(std::fabs(tr.value(5.0) - std::exp(-5.0)) < 1e-6);
    const OrderEstimate o = convergence_order(decay(), 5.0, {0.1, 0.05, 0.025, 0.0125});
    CHECK(o.order == doctest::Approx(4.0).epsilon(0.3 / 4.0));
}

TEST_CASE("pantograph against a fine Euler oracle") {
    IntegrateOptions opt;
    opt.step = 0.01;
    const Trajectory tr = integrate(pantograph(), 1.0, opt);
    CHECK(std::fabs(tr.value(1.0) - pantograph_euler(1.0, 1e-6)) < 1e-4);
    CHECK(convergence_order(pantograph(), 5.0, {0.1, 0.05, 0.025, 0.0125}).order >= 3.0);
}

TEST_CASE("worked example: self-convergence order") {
    const DelayEquation eq = x_equation(fixture::worked_problem(), fixture::constant_history(0.001));
    CHECK(convergence_order(eq, 5.0, {0.04, 0.02, 0.01, 0.005}).order >= 3.0);
}

TEST_CASE("dense output is continuous and reproduces nodes") {
    const Trajectory tr = integrate(pantograph(), 2.0, {0.05});
    for (std::size_t i = 1; i + 1 < tr.times().size(); i += 7) {
        const double t = tr.times()[i];
        CHECK(tr.value(t) == tr.values()[i]);
        CHECK(tr.derivative(t) == tr.slopes()[i]);
        const double left = tr.value(std::nextafter(t, -1e300)), right = tr.value(std::nextafter(t, 1e300));
        CHECK(std::fabs(left - right) <= 1e-12 * (1 + std::fabs(tr.values()[i])));
    }
}

TEST_CASE("history queries") {
    const ProblemSpec pr = linear_problem("0.2*cos(t)");
    const HistoryFunction psi(parse_expression("0.01*cos(t)"), -1.5, 0.0);
    const Trajectory tr = integrate(x_equation(pr, psi), 10.0);
    for (double t : {-1.5, -1.0, -0.3}) {
        CHECK(tr.value(t) == psi.value(t));
        CHECK(tr.derivative(t) == psi.derivative(t));
    }
    CHECK_THROWS_AS(tr.value(-1.6), IntegrationError);
    CHECK_THROWS_AS(tr.value(10.5), IntegrationError);
}

TEST_CASE("transform consistency on the worked example") {
    const ProblemSpec pr = fixture::worked_problem();
    const AuxiliarySpec aux = fixture::worked_aux();
    const HistoryFunction psi = fixture::constant_history(0.001);
    const Trajectory x = integrate(x_equation(pr, psi), 50.0);
    const Trajectory z = integrate(z_equation(pr, aux, psi), 50.0);
    double gap = 0.0;
    for (std::size_t i = 0; i < x.times().size(); ++i)
        gap = std::max(gap, std::fabs(aux.p(x.times()[i]) * z.value(x.times()[i]) - x.values()[i]));
    CHECK(gap < 1e-4);
}

TEST_CASE("general-form integration agrees with the linear-neutral form") {
    const ProblemSpec pr = linear_problem("0.2*cos(t)");
    const HistoryFunction psi(parse_expression("0.01*cos(t)"), -1.5, 0.0);
    const Trajectory a = integrate(x_equation(pr, psi), 20.0);
    const Trajectory b = integrate(x_equation(to_general(pr), psi), 20.0);
    double gap = 0.0;
    for (std::size_t i = 0; i < a.times().size(); ++i) gap = std::max(gap, std::fabs(a.values()[i] - b.values()[i]));
    CHECK(gap < 1e-9);
}

TEST_CASE("linearity when the nonlinear parts vanish") {
    const ProblemSpec pr = linear_problem("0.2*cos(t)");
    const HistoryFunction psi(parse_expression("0.01*cos(t)"), -1.5, 0.0);
    const HistoryFunction scaled(parse_expression("0.037*cos(t)"), -1.5, 0.0);
    const Trajectory a = integrate(x_equation(pr, psi), 20.0), b = integrate(x_equation(pr, scaled), 20.0);
    for (std::size_t i = 0; i < a.times().size(); i += 97)
        CHECK(std::fabs(b.values()[i] - 3.7 * a.values()[i]) <= 1e-9 * (1e-3 + std::fabs(b.values()[i])));
}

TEST_CASE("implicit slope at t0 fails fast when the neutral term dominates") {
    ProblemSpec pr = linear_problem("2");
    pr.r1 = DelaySpec(parse_expression("0.5*t"));
    CHECK_THROWS_AS(integrate(x_equation(pr, fixture::constant_history(1.0)), 1.0), IntegrationError);
}

TEST_CASE("stability experiments") {
    ProblemSpec zero = linear_problem("0");
    zero.a = Expression::constant(0.0);
    const StabilityReport z =
        stability_experiment(zero, 0.1, 0.0, default_history_family(0.0, -1.5, 0.0), 20.0, {0.01});
    CHECK(z.bounded);
    for (const auto& run : z.runs) CHECK(run.max_abs == 0.0);

    const ProblemSpec pr = fixture::worked_problem();
    const double delta = 0.0154;
    const StabilityReport r = stability_experiment(pr, 0.1, delta, default_history_family(delta, 0.0, 0.0), 200.0, {0.01});
    CHECK(r.runs.size() == 4);
    CHECK(r.bounded);

    const StabilityReport wild = stability_experiment(fixture::worked_problem(10.0), 0.1, 0.00135,
                                                      default_history_family(0.00135, 0.0, 0.0), 200.0, {0.01});
    CHECK(wild.runs.size() == 4);
}

TEST_CASE("trajectory CSV") {
    const Trajectory tr = integrate(decay(), 0.01, {0.005});
    std::ostringstream os;
    tr.write_csv(os, {"label decay"});
    const std::string s = os.str();
    CHECK(s.rfind("# label decay\n", 0) == 0);
    CHECK(s.find("t,x,xprime\n") != std::string::npos);
}
