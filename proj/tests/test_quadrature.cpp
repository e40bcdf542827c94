#include "ndde/quadrature.hpp"

#include <doctest.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <random>

using namespace ndde;

namespace {

/// Random nonnegative damping rates with closed-form antiderivatives.
struct RateCase {
    ScalarFunction g;
    ScalarFunction G;  // ∫_0^t g
};

RateCase random_rate(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> U(0.05, 2.0);
    const double A = U(rng), B = U(rng), C = 0.5 * U(rng);
    switch (rng() % 3) {
        case 0:
            return {[=](double t) { return A / (t + B); }, [=](double t) { return A * std::log((t + B) / B); }};
        case 1:
            return {[=](double t) { return A * std::exp(-C * t) + 0.1 * B; },
                    [=](double t) { return A / C * (1 - std::exp(-C * t)) + 0.1 * B * t; }};
        default:
            return {[=](double t) { return A * (1 + std::sin(C * t)); },
                    [=](double t) { return A * (t + (1 - std::cos(C * t)) / C); }};
    }
}

}  // namespace

TEST_CASE("adaptive Simpson") {
    CHECK(adaptive_simpson([](double t) { return std::sin(t); }, 0.0, std::numbers::pi, 1e-12) ==
          doctest::Approx(2.0).epsilon(1e-11));
    CHECK(adaptive_simpson([](double t) { return std::sqrt(t); }, 0.0, 1.0, 1e-10) ==
          doctest::Approx(2.0 / 3.0).epsilon(1e-9));
    CHECK_THROWS_AS(adaptive_simpson([](double) { return std::nan(""); }, 0.0, 1.0, 1e-10), QuadratureError);
}

TEST_CASE("window integral is antisymmetric") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-3.0, 3.0);
    for (int k = 0; k < 20; ++k) {
        const double w = U(rng), a = U(rng), b = U(rng);
        auto f = [w](double t) { return std::cos(w * t) + t * t; };
        CHECK(std::fabs(window_integral(f, a, b) + window_integral(f, b, a)) < 1e-12);
    }
    CHECK(window_integral([](double) { return 1.0; }, 2.0, 2.0) == 0.0);
}

TEST_CASE("cumulative exponent matches closed form") {
    const CumulativeExponent G([](double t) { return 0.1 / (t + 0.1); }, 0.0);
    CHECK(G.cumulative(0.9) == doctest::Approx(0.1 * std::log(10.0)).epsilon(1e-12));
    CHECK(G.cumulative(1e4) == doctest::Approx(0.1 * std::log((1e4 + 0.1) / 0.1)).epsilon(1e-10));
    CHECK(G.damping_weight(3.0, 3.0) == 1.0);
    CHECK(G.damping_weight(0.0, 0.9) == doctest::Approx(std::pow(10.0, -0.1)).epsilon(1e-12));
}

TEST_CASE("cumulative integral extends backward") {
    const CumulativeIntegral C([](double t) { return 2 * t; }, 0.0, -3.0);
    CHECK(C.value(-2.5) == doctest::Approx(6.25).epsilon(1e-13));
    CHECK(C.value(4.0) == doctest::Approx(16.0).epsilon(1e-13));
    CHECK(C.between(-1.0, 2.0) == doctest::Approx(3.0).epsilon(1e-13));
}

TEST_CASE("weight identity: ∫ e^{-(G(t)-G(s))} g(s) ds = 1 - e^{-G(t)}") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> T(0.5, 200.0);
    for (int k = 0; k < 20; ++k) {
        const RateCase rc = random_rate(rng);
        const auto G = std::make_shared<const CumulativeExponent>(rc.g, 0.0);
        const double t = T(rng);
        const double expected = 1.0 - std::exp(-rc.G(t));
        CHECK(std::fabs(weighted_integral(*G, rc.g, t) - expected) < 1e-9);
        CHECK(std::fabs(weighted_integral_direct(*G, rc.g, t) - expected) < 1e-9);
    }
}

TEST_CASE("checkpoint recurrence agrees with the direct pass") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> T(0.0, 80.0);
    for (int k = 0; k < 5; ++k) {
        const RateCase rc = random_rate(rng);
        const auto G = std::make_shared<const CumulativeExponent>(rc.g, 0.0);
        auto f = [](double s) { return std::sin(s) / (1 + s); };
        const WeightedIntegral I(G, f);
        for (int j = 0; j < 10; ++j) {
            const double t = T(rng);
            CHECK(std::fabs(I.value(t) - weighted_integral_direct(*G, f, t)) < 1e-9);
        }
    }
}

TEST_CASE("serial and parallel tables are bitwise identical") {
    auto g = [](double t) { return 0.3 + 0.2 * std::sin(t); };
    QuadratureOptions serial, parallel;
    serial.execution = Execution::serial;
    parallel.execution = Execution::parallel;
    const CumulativeIntegral a(g, 0.0, -5.0, serial), b(g, 0.0, -5.0, parallel);
    a.extend_to(500.0);
    b.extend_to(500.0);
    for (double t : {-4.3, 0.0, 17.2, 333.3, 499.9}) CHECK(a.value(t) == b.value(t));
}

TEST_CASE("sup scan") {
    const SupResult r = sup_scan([](double t) { return -(t - 1) * (t - 1); }, 0.0, 3.0, 64);
    CHECK(std::fabs(r.sup) < 1e-12);
    CHECK(r.argsup == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(r.tail_slope < 0.0);

    const SupResult rising = sup_scan([](double t) { return t; }, 0.0, 10.0, 32);
    CHECK(rising.sup == doctest::Approx(10.0));
    CHECK(rising.envelope_slope == doctest::Approx(1.0));

    auto h = [](double t) { return std::sin(7 * t) * std::exp(-0.1 * t); };
    const SupResult s = sup_scan(h, 0.0, 50.0, 4096, Execution::serial);
    const SupResult p = sup_scan(h, 0.0, 50.0, 4096, Execution::parallel);
    CHECK(s.sup == p.sup);
    CHECK(s.argsup == p.argsup);
}
