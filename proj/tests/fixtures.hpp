#pragma once

#include "ndde/criteria.hpp"
#include "ndde/model.hpp"

#include <string>

namespace fixture {

inline ndde::AuxiliarySpec worked_aux() {
    return ndde::AuxiliarySpec(ndde::parse_expression("1/(t + 0.2)"), ndde::parse_expression("0.1/(t + 0.1)"), 0.0);
}

/// The worked example with a(t) zeroing the third bracket; `b_scale` multiplies b after a is built.
inline ndde::ProblemSpec worked_problem(double b_scale = 1.0) {
    using namespace ndde;
    ProblemSpec pr;
    pr.form = Form::linear_neutral;
    pr.t0 = 0.0;
    pr.gamma = {1, 3};
    pr.b = parse_expression("sin(t)/7");
    pr.r1 = DelaySpec(parse_expression("0.2*t"));
    pr.r2 = pr.r1;
    pr.c = parse_expression("0.01*(0.8*t + 0.2)^(1/3)/((t + 0.1)*(t + 0.2))");
    pr.G = parse_expression("sin(x)", {Var::x});
    pr.k4 = 1.0;
    pr.a = bracket_coefficient(pr, worked_aux());
    if (b_scale != 1.0) pr.b = Expression::constant(b_scale) * pr.b;
    return pr;
}

inline ndde::HistoryFunction constant_history(double v, double lo = 0.0, double t0 = 0.0) {
    return ndde::HistoryFunction(ndde::Expression::constant(v), lo, t0);
}

inline std::string preset(const std::string& name) { return std::string(NDDE_PRESET_DIR) + "/" + name; }

}  // namespace fixture

#include "ndde/operator.hpp"

#include <cmath>
#include <random>

namespace fixture {

/// Smooth random element of the candidate space: starts at z0, stays within |z| ≤ 1.
inline ndde::GridFunction random_candidate(const ndde::SplitOperator& op, std::mt19937_64& rng, double z0) {
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    const double A = 0.5 * U(rng), w = 2.0 + 3.0 * U(rng), phase = 3.0 * U(rng);
    const double B = 0.4 * U(rng), w2 = 0.3 * U(rng);
    const double t0 = op.mesh().t0;
    return op.candidate([=](double t) {
        const double ramp = 1.0 - std::exp(-(t - t0));
        return z0 + (A * std::sin(w * t + phase) + B * std::sin(w2 * t)) * ramp;
    });
}

/// Random linear-neutral problem with constant plus oscillating coefficients.
inline ndde::ProblemSpec random_linear(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    auto num = [&](double scale) { return std::to_string(scale * U(rng)); };
    ndde::ProblemSpec pr;
    pr.form = ndde::Form::linear_neutral;
    pr.gamma = {1, 3};
    pr.a = ndde::parse_expression("0.3 + " + num(0.2) + "*sin(" + num(2.0) + "*t)");
    pr.b = ndde::parse_expression(num(0.3) + "*cos(" + num(1.5) + "*t) + " + num(0.1));
    pr.c = ndde::parse_expression("(" + num(0.05) + ")/(1 + t)");
    pr.G = ndde::parse_expression("sin(x)", {ndde::Var::x});
    const double rho = 0.1 + 0.3 * std::fabs(U(rng));
    pr.r1 = ndde::DelaySpec(ndde::parse_expression(std::to_string(rho) + "*t + " + std::to_string(0.5 * std::fabs(U(rng)))));
    pr.r2 = ndde::DelaySpec(ndde::parse_expression(std::to_string(0.5 + 0.5 * std::fabs(U(rng)))));
    return pr;
}

}  // namespace fixture
