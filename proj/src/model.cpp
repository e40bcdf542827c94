#include "ndde/model.hpp"

#include "ndde/search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace ndde {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

/// Uniform grid over [lo, hi] plus a dense block on the first unit, where
/// most coefficients vary fastest.
std::vector<double> sample_grid(double lo, double hi) {
    std::vector<double> ts;
    if (hi <= lo) return {lo};
    constexpr int kUniform = 2048;
    constexpr int kDense = 256;
    for (int i = 0; i <= kUniform; ++i) ts.push_back(lo + (hi - lo) * i / kUniform);
    const double dense_hi = std::min(hi, lo + 1.0);
    for (int i = 1; i < kDense; ++i) ts.push_back(lo + (dense_hi - lo) * i / kDense);
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    return ts;
}

constexpr int kSpotChecks = 10000;
constexpr double kLipschitzSlack = 1e-12;

}  // namespace

DelaySpec::DelaySpec(Expression r)
    : r_(std::move(r)), dr_(differentiate(r_)), ddr_(differentiate(dr_)) {}

const char* to_string(Form f) { return f == Form::general ? "general" : "linear-neutral"; }

void ProblemSpec::derive_partials() {
    Q_t = differentiate(Q, Var::t);
    Q_x = differentiate(Q, Var::x);
}

Expression neutral_quotient(const ProblemSpec& linear) {
    return linear.b / (Expression::constant(1.0) - linear.r1.derivative());
}

ProblemSpec to_general(const ProblemSpec& linear) {
    if (linear.form == Form::general) return linear;
    ProblemSpec g = linear;
    g.form = Form::general;
    const Expression q = neutral_quotient(linear);
    const Expression x = Expression::variable(Var::x);
    g.Q = q * x;
    g.bQ = abs(q);
    g.a = linear.a + differentiate(q);
    g.d = Expression::constant(0.0);
    g.F = Expression::constant(0.0);
    g.k2 = 1.0;
    g.k3 = 1.0;
    g.b = Expression::constant(0.0);
    g.derive_partials();
    return g;
}

AuxiliarySpec::AuxiliarySpec(Expression p, Expression g, double t0)
    : p_(std::move(p)), dp_(differentiate(p_)), g_(std::move(g)), t0_(t0) {}

HistoryFunction::HistoryFunction(Expression psi, double lo, double t0, std::optional<Expression> derivative)
    : psi_(std::move(psi)), dpsi_(std::move(derivative)), lo_(lo), t0_(t0), norm_(0.0) {
    if (!dpsi_) {
        try {
            dpsi_ = differentiate(psi_);
        } catch (const DifferentiationError&) {
            dpsi_.reset();
        }
    }
    if (lo_ > t0_) throw ValidationError("history interval is empty: m(t0) > t0");
    auto mag = [this](double t) { return std::fabs(psi_(t)); };
    if (lo_ == t0_) {
        norm_ = mag(t0_);
        return;
    }
    constexpr int kSamples = 256;
    const double step = (t0_ - lo_) / kSamples;
    int best = 0;
    double best_val = -1.0;
    for (int i = 0; i <= kSamples; ++i) {
        const double v = mag(lo_ + step * i);
        if (v > best_val) {
            best_val = v;
            best = i;
        }
    }
    const double a = std::max(lo_, lo_ + step * (best - 1));
    const double b = std::min(t0_, lo_ + step * (best + 1));
    norm_ = std::max(best_val, golden_max(mag, a, b).value);
}

double HistoryFunction::derivative(double t) const {
    if (!dpsi_) throw ValidationError("history derivative unavailable: supply dpsi for non-differentiable psi");
    return (*dpsi_)(t);
}

HorizonResult horizon(const ProblemSpec& problem, double tmax) {
    if (!(tmax > problem.t0)) throw ValidationError("horizon: Tmax must exceed t0");
    HorizonResult best{};
    best.m = std::numeric_limits<double>::infinity();
    const DelaySpec* delays[2] = {&problem.r1, &problem.r2};
    const std::vector<double> grid = sample_grid(problem.t0, tmax);
    for (int j = 0; j < 2; ++j) {
        const DelaySpec& r = *delays[j];
        std::size_t arg = 0;
        double lowest = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double v = r.tau(grid[i]);
            if (!std::isfinite(v)) throw ValidationError("horizon: non-finite delayed argument at t=" + fmt(grid[i]));
            if (v < lowest) {
                lowest = v;
                arg = i;
            }
        }
        const double a = grid[arg == 0 ? 0 : arg - 1];
        const double b = grid[std::min(arg + 1, grid.size() - 1)];
        const Extremum e = golden_max([&r](double t) { return -r.tau(t); }, a, b);
        const double m = std::min(lowest, -e.value);
        const double where = -e.value < lowest ? e.arg : grid[arg];
        if (m < best.m) best = {m, where, j + 1};
    }
    return best;
}

ValidationReport validate(const ProblemSpec& problem, double tmax) {
    ValidationReport report;
    if (!problem.gamma.valid())
        throw ValidationError("gamma = " + problem.gamma.to_string() +
                              " must lie in (0,1) with an odd positive denominator");
    if (!(problem.k4 > 0.0)) throw ValidationError("k4 must be positive");
    if (problem.form == Form::general && !(problem.k2 > 0.0 && problem.k3 > 0.0))
        throw ValidationError("k2 and k3 must be positive");

    const HorizonResult h = horizon(problem, tmax);
    const std::vector<double> grid = sample_grid(problem.t0, tmax);

    for (double t : grid) {
        if (problem.r1.delay(t) < 0.0 || problem.r2.delay(t) < 0.0)
            throw ValidationError("delay r(t) is negative at t=" + fmt(t));
        if (std::fabs(1.0 - problem.r1.rate(t)) <= 1e-12)
            throw ValidationError("r1'(t) = 1 at t=" + fmt(t) + " (r1 must satisfy r1' != 1)");
    }
    if (h.m < problem.t0) {
        for (double t : sample_grid(h.m, problem.t0)) {
            try {
                if (std::fabs(1.0 - problem.r1.rate(t)) <= 1e-12)
                    throw ValidationError("r1'(t) = 1 at t=" + fmt(t) + " (r1 must satisfy r1' != 1)");
            } catch (const DomainError&) {
                report.warnings.push_back("r1' undefined on part of [m(t0), t0]");
                break;
            }
        }
    }
    for (const DelaySpec* r : {&problem.r1, &problem.r2}) {
        bool increasing = true;
        for (std::size_t i = 1; i < grid.size(); ++i) {
            if (r->tau(grid[i]) < r->tau(grid[i - 1])) {
                increasing = false;
                break;
            }
        }
        if (!increasing || !(r->tau(tmax) > r->tau(problem.t0)))
            report.warnings.push_back("t - r(t) is not increasing on the sample grid for r = " +
                                      r->expression().to_string());
    }

    std::mt19937_64 rng(20240607);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);

    if (problem.G.evaluate({0.0, 0.0, 0.0}) != 0.0) throw ValidationError("G(0) must be 0");
    for (int i = 0; i < kSpotChecks; ++i) {
        const double u = unit(rng), v = unit(rng);
        const double lhs = std::fabs(problem.G.evaluate({0, u, 0}) - problem.G.evaluate({0, v, 0}));
        if (lhs > problem.k4 * std::fabs(u - v) * (1.0 + kLipschitzSlack) + 1e-15)
            throw ValidationError("G violates |G(x)-G(y)| <= k4|x-y| at x=" + fmt(u) + ", y=" + fmt(v));
    }

    if (problem.form == Form::general) {
        if (problem.F.evaluate({0, 0, 0}) != 0.0) throw ValidationError("F(0,0) must be 0");
        for (int i = 0; i < kSpotChecks; ++i) {
            const double x = unit(rng), z = unit(rng), y = unit(rng), w = unit(rng);
            const double dx = std::fabs(problem.F.evaluate({0, x, y}) - problem.F.evaluate({0, z, y}));
            if (dx > problem.k2 * std::fabs(x - z) * (1.0 + kLipschitzSlack) + 1e-15)
                throw ValidationError("F violates the k2 Lipschitz bound at x=" + fmt(x) + ", z=" + fmt(z));
            const double dy = std::fabs(problem.F.evaluate({0, x, y}) - problem.F.evaluate({0, x, w}));
            if (dy > problem.k3 * std::fabs(y - w) * (1.0 + kLipschitzSlack) + 1e-15)
                throw ValidationError("F violates the k3 Lipschitz bound at y=" + fmt(y) + ", w=" + fmt(w));
        }
        for (double t : grid) {
            if (problem.Q.evaluate({t, 0.0, 0.0}) != 0.0) throw ValidationError("Q(t,0) must be 0 at t=" + fmt(t));
            if (problem.bQ(t) < 0.0) throw ValidationError("bQ(t) must be nonnegative at t=" + fmt(t));
        }
        std::uniform_real_distribution<double> when(problem.t0, tmax);
        for (int i = 0; i < kSpotChecks; ++i) {
            const double t = i < static_cast<int>(grid.size()) ? grid[i] : when(rng);
            const double u = unit(rng), v = unit(rng);
            const double lhs = std::fabs(problem.Q.evaluate({t, u, 0}) - problem.Q.evaluate({t, v, 0}));
            if (lhs > problem.bQ(t) * std::fabs(u - v) * (1.0 + kLipschitzSlack) + 1e-15)
                throw ValidationError("Q violates |Q(t,u)-Q(t,v)| <= bQ(t)|u-v| at t=" + fmt(t));
        }
    }
    return report;
}

ValidationReport validate(const ProblemSpec& problem, const AuxiliarySpec& aux, double tmax) {
    ValidationReport report = validate(problem, tmax);
    const HorizonResult h = horizon(problem, tmax);
    const double p0 = aux.p_expression()(problem.t0);
    if (std::fabs(p0 - 1.0) > 1e-12)
        report.warnings.push_back("p(t0) = " + fmt(p0) + " != 1; p is extended by 1 to the left of t0");
    double pmax = 0.0;
    for (double t : sample_grid(problem.t0, tmax)) {
        const double pv = aux.p(t);
        if (!(pv > 0.0)) throw ValidationError("p(t) must be positive; p(" + fmt(t) + ") = " + fmt(pv));
        pmax = std::max(pmax, pv);
    }
    if (pmax > 1e8) report.warnings.push_back("p reaches " + fmt(pmax) + " on the sample grid (p must be bounded)");
    bool negative_g = false;
    for (double t : sample_grid(h.m, tmax)) {
        if (aux.g(t) < 0.0) negative_g = true;
    }
    if (negative_g) report.warnings.push_back("g takes negative values on the sample grid");
    return report;
}

}  // namespace ndde
