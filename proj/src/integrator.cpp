#include "ndde/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <memory>
#include <ostream>
#include <sstream>

namespace ndde {

namespace {

struct HermiteCell {
    double t0, x0, d0, t1, x1, d1;

    double value(double t) const {
        const double h = t1 - t0;
        const double u = (t - t0) / h, u2 = u * u, u3 = u2 * u;
        return (2 * u3 - 3 * u2 + 1) * x0 + (u3 - 2 * u2 + u) * h * d0 + (-2 * u3 + 3 * u2) * x1 +
               (u3 - u2) * h * d1;
    }
    double slope(double t) const {
        const double h = t1 - t0;
        const double u = (t - t0) / h, u2 = u * u;
        return ((6 * u2 - 6 * u) * x0 + (-6 * u2 + 6 * u) * x1) / h + (3 * u2 - 4 * u + 1) * d0 +
               (3 * u2 - 2 * u) * d1;
    }
};

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(10) << v;
    return os.str();
}

}  // namespace

DelayEquation x_equation(const ProblemSpec& problem, const HistoryFunction& psi) {
    auto pr = std::make_shared<const ProblemSpec>(problem);
    DelayEquation eq;
    eq.t0 = problem.t0;
    eq.lo = psi.lo();
    eq.initial = psi.value(problem.t0);
    eq.tau1 = [pr](double t) { return pr->r1.tau(t); };
    eq.tau2 = [pr](double t) { return pr->r2.tau(t); };
    const double gamma = problem.gamma.value();
    if (problem.form == Form::linear_neutral) {
        eq.rhs = [pr, gamma](double t, double, const DelayedState& d) {
            return -pr->a(t) * d.x1 + pr->b(t) * d.dx1 + pr->c(t) * pr->G.evaluate({t, signed_power(d.x2, gamma), 0});
        };
    } else {
        eq.rhs = [pr, gamma](double t, double, const DelayedState& d) {
            const Point at{t, d.x1, 0.0};
            return -pr->a(t) * d.x1 + pr->Q_t.evaluate(at) +
                   pr->Q_x.evaluate(at) * d.dx1 * (1.0 - pr->r1.rate(t)) +
                   pr->d(t) * pr->F.evaluate({t, d.x1, d.x2}) +
                   pr->c(t) * pr->G.evaluate({t, signed_power(d.x2, gamma), 0});
        };
    }
    auto h = std::make_shared<const HistoryFunction>(psi);
    eq.history = [h](double t) { return h->value(t); };
    eq.history_slope = [h](double t) { return h->derivative(t); };
    return eq;
}

DelayEquation z_equation(const ProblemSpec& problem, const AuxiliarySpec& aux, const HistoryFunction& psi) {
    auto pr = std::make_shared<const ProblemSpec>(to_general(problem));
    auto ax = std::make_shared<const AuxiliarySpec>(aux);
    DelayEquation eq;
    eq.t0 = problem.t0;
    eq.lo = psi.lo();
    eq.initial = psi.value(problem.t0) / aux.p(problem.t0);
    eq.tau1 = [pr](double t) { return pr->r1.tau(t); };
    eq.tau2 = [pr](double t) { return pr->r2.tau(t); };
    const double gamma = problem.gamma.value();
    eq.rhs = [pr, ax, gamma](double t, double z, const DelayedState& d) {
        const double tau1 = pr->r1.tau(t), tau2 = pr->r2.tau(t);
        const double p1 = ax->p(tau1), p2 = ax->p(tau2);
        const double u1 = p1 * d.x1, u2 = p2 * d.x2;
        const double du1 = (ax->dp(tau1) * d.x1 + p1 * d.dx1) * (1.0 - pr->r1.rate(t));
        const Point at{t, u1, 0.0};
        const double xprime = -pr->a(t) * u1 + pr->Q_t.evaluate(at) + pr->Q_x.evaluate(at) * du1 +
                              pr->d(t) * pr->F.evaluate({t, u1, u2}) +
                              pr->c(t) * pr->G.evaluate({t, signed_power(u2, gamma), 0});
        return (xprime - ax->dp(t) * z) / ax->p(t);
    };
    auto h = std::make_shared<const HistoryFunction>(psi);
    eq.history = [h](double t) { return h->value(t); };
    eq.history_slope = [h](double t) { return h->derivative(t); };
    return eq;
}

Trajectory::Trajectory(const DelayEquation& eq)
    : t0_(eq.t0), lo_(eq.lo), history_(eq.history), history_slope_(eq.history_slope) {}

double Trajectory::value(double t) const {
    if (t < t0_) {
        if (t < lo_ - 1e-12 * (1.0 + std::fabs(lo_)))
            throw IntegrationError("query at t=" + fmt(t) + " precedes the history interval");
        return history_(t);
    }
    if (t > t_.back() + 1e-12 * (1.0 + std::fabs(t))) throw IntegrationError("query past the integrated range");
    if (t_.size() == 1) return x_[0];
    auto it = std::upper_bound(t_.begin(), t_.end(), t);
    std::size_t i = static_cast<std::size_t>(it - t_.begin());
    i = std::clamp<std::size_t>(i, 1, t_.size() - 1) - 1;
    if (t == t_[i]) return x_[i];
    return HermiteCell{t_[i], x_[i], d_[i], t_[i + 1], x_[i + 1], d_[i + 1]}.value(t);
}

double Trajectory::derivative(double t) const {
    if (t < t0_) {
        if (t < lo_ - 1e-12 * (1.0 + std::fabs(lo_)))
            throw IntegrationError("query at t=" + fmt(t) + " precedes the history interval");
        return history_slope_(t);
    }
    if (t_.size() == 1) return d_[0];
    auto it = std::upper_bound(t_.begin(), t_.end(), t);
    std::size_t i = static_cast<std::size_t>(it - t_.begin());
    i = std::clamp<std::size_t>(i, 1, t_.size() - 1) - 1;
    if (t == t_[i]) return d_[i];
    return HermiteCell{t_[i], x_[i], d_[i], t_[i + 1], x_[i + 1], d_[i + 1]}.slope(t);
}

double Trajectory::max_abs(double a, double b) const {
    double m = 0.0;
    auto first = std::lower_bound(t_.begin(), t_.end(), a);
    for (auto it = first; it != t_.end() && *it <= b; ++it)
        m = std::max(m, std::fabs(x_[static_cast<std::size_t>(it - t_.begin())]));
    return m;
}

void Trajectory::write_csv(std::ostream& os, const std::vector<std::string>& metadata) const {
    for (const auto& line : metadata) os << "# " << line << "\n";
    os << "# t0 " << std::setprecision(17) << t0_ << "\n";
    os << "# nodes " << t_.size() << "\n";
    os << "t,x,xprime\n";
    for (std::size_t i = 0; i < t_.size(); ++i) os << t_[i] << "," << x_[i] << "," << d_[i] << "\n";
}

Trajectory integrate(const DelayEquation& eq, double T, const IntegrateOptions& options) {
    if (!(options.step > 0.0)) throw IntegrationError("step must be positive");
    if (!(T > eq.t0)) throw IntegrationError("T must exceed t0");
    Trajectory tr(eq);
    tr.t_.reserve(static_cast<std::size_t>((T - eq.t0) / options.step) + 8);
    tr.x_.reserve(tr.t_.capacity());
    tr.d_.reserve(tr.t_.capacity());

    const double t0 = eq.t0;
    const double x0 = eq.initial;
    tr.t_.push_back(t0);
    tr.x_.push_back(x0);

    // Slope at t0; when a delay vanishes at t0 the neutral term is implicit in x'(t0).
    {
        auto read = [&](double tau, double slope_guess, double& x, double& dx) {
            if (tau < t0) {
                x = eq.history(tau);
                dx = eq.history_slope(tau);
            } else {
                x = x0;
                dx = slope_guess;
            }
        };
        double d0 = 0.0;
        bool settled = false;
        for (int it = 0; it < 200; ++it) {
            DelayedState s;
            double unused = 0.0;
            read(eq.tau1(t0), d0, s.x1, s.dx1);
            read(eq.tau2(t0), d0, s.x2, unused);
            const double next = eq.rhs(t0, x0, s);
            if (!std::isfinite(next)) throw IntegrationError("non-finite slope at t0");
            const bool done = std::fabs(next - d0) <= options.inner_tol * (1.0 + std::fabs(next));
            d0 = next;
            if (done) {
                settled = true;
                break;
            }
        }
        if (!settled) throw IntegrationError("implicit slope at t0 did not settle (neutral coefficient too large)");
        tr.d_.push_back(d0);
    }

    auto try_step = [&](double h, double& x_out, double& d_out) -> bool {
        const double tn = tr.t_.back(), xn = tr.x_.back(), dn = tr.d_.back();
        const double tn1 = tn + h;
        HermiteCell cell{tn, xn, dn, tn1, xn + h * dn, dn};
        bool overlap = false;
        auto f = [&](double ts, double xs) {
            DelayedState s;
            const double a = eq.tau1(ts), b = eq.tau2(ts);
            if (a == ts) {
                s.x1 = xs;
                s.dx1 = ts > tn ? cell.slope(ts) : dn;
                if (ts > tn) overlap = true;
            } else if (a <= tn) {
                s.x1 = tr.value(a);
                s.dx1 = tr.derivative(a);
            } else {
                overlap = true;
                s.x1 = cell.value(a);
                s.dx1 = cell.slope(a);
            }
            if (b == ts) {
                s.x2 = xs;
            } else if (b <= tn) {
                s.x2 = tr.value(b);
            } else {
                overlap = true;
                s.x2 = cell.value(b);
            }
            return eq.rhs(ts, xs, s);
        };
        for (int it = 0; it < std::max(1, options.inner_max); ++it) {
            overlap = false;
            const double k1 = dn;
            const double k2 = f(tn + 0.5 * h, xn + 0.5 * h * k1);
            const double k3 = f(tn + 0.5 * h, xn + 0.5 * h * k2);
            const double k4 = f(tn1, xn + h * k3);
            const double x1 = xn + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            const double d1 = f(tn1, x1);
            if (!std::isfinite(x1) || !std::isfinite(d1))
                throw IntegrationError("non-finite state at t=" + fmt(tn1));
            const bool settled = std::fabs(x1 - cell.x1) <= options.inner_tol * (1.0 + std::fabs(x1)) &&
                                 std::fabs(d1 - cell.d1) <= options.inner_tol * (1.0 + std::fabs(d1));
            cell.x1 = x1;
            cell.d1 = d1;
            if (!overlap || settled) {
                x_out = x1;
                d_out = d1;
                return true;
            }
        }
        return false;
    };

    auto advance = [&](auto&& self, double h, int depth) -> void {
        double x1 = 0.0, d1 = 0.0;
        if (try_step(h, x1, d1)) {
            tr.t_.push_back(tr.t_.back() + h);
            tr.x_.push_back(x1);
            tr.d_.push_back(d1);
            return;
        }
        if (depth >= options.max_halvings)
            throw IntegrationError("inner iteration did not settle near t=" + fmt(tr.t_.back()) +
                                   " after " + std::to_string(options.max_halvings) + " step halvings");
        ++tr.halvings_;
        self(self, 0.5 * h, depth + 1);
        self(self, 0.5 * h, depth + 1);
    };

    const std::size_t steps = static_cast<std::size_t>(std::ceil((T - t0) / options.step - 1e-9));
    for (std::size_t n = 0; n < steps; ++n) {
        const double target = n + 1 == steps ? T : t0 + options.step * static_cast<double>(n + 1);
        advance(advance, target - tr.t_.back(), 0);
        tr.t_.back() = target;
    }
    return tr;
}

std::vector<HistoryCase> default_history_family(double delta, double lo, double t0) {
    const Expression t = Expression::variable(Var::t);
    const Expression d = Expression::constant(delta);
    std::vector<HistoryCase> family;
    family.push_back({"constant+", HistoryFunction(d, lo, t0)});
    family.push_back({"constant-", HistoryFunction(Expression::constant(-delta), lo, t0)});
    family.push_back({"cosine", HistoryFunction(d * cos(t - Expression::constant(t0)), lo, t0)});
    family.push_back({"ramp", HistoryFunction(d * (t - Expression::constant(lo - 1.0)) /
                                                  Expression::constant(t0 - lo + 1.0),
                                              lo, t0)});
    return family;
}

StabilityReport stability_experiment(const ProblemSpec& problem, double epsilon, double delta,
                                     const std::vector<HistoryCase>& family, double T,
                                     const IntegrateOptions& options, Execution exec) {
    StabilityReport rep;
    rep.epsilon = epsilon;
    rep.delta = delta;
    rep.T = T;
    rep.runs.resize(family.size());
    const double span = T - problem.t0;
    for_each_index(family.size(), exec, [&](std::size_t i) {
        TrajectorySummary& s = rep.runs[i];
        s.label = family[i].label;
        try {
            const Trajectory tr = integrate(x_equation(problem, family[i].psi), T, options);
            s.max_abs = tr.max_abs(problem.t0, T);
            s.end_abs = std::fabs(tr.values().back());
            s.last_window_max = tr.max_abs(T - 0.1 * span, T);
            s.previous_window_max = tr.max_abs(T - 0.2 * span, T - 0.1 * span);
        } catch (const std::exception& e) {
            s.failure = e.what();
            s.max_abs = s.end_abs = std::numeric_limits<double>::infinity();
        }
    });
    rep.bounded = !rep.runs.empty();
    rep.asymptotic = !rep.runs.empty();
    for (const auto& s : rep.runs) {
        if (!s.failure.empty() || !(s.max_abs < epsilon)) rep.bounded = false;
        if (!s.failure.empty() || !(s.end_abs < 0.01 * epsilon) || !(s.last_window_max < s.previous_window_max))
            rep.asymptotic = false;
    }
    return rep;
}

OrderEstimate convergence_order(const DelayEquation& eq, double T, const std::vector<double>& steps,
                                Execution exec) {
    if (steps.size() < 3) throw IntegrationError("convergence_order needs at least three step sizes");
    const double finest = *std::min_element(steps.begin(), steps.end());
    std::vector<double> all = steps;
    all.push_back(0.5 * finest);
    std::vector<Trajectory> runs(all.size());
    for_each_index(all.size(), exec, [&](std::size_t i) {
        IntegrateOptions o;
        o.step = all[i];
        runs[i] = integrate(eq, T, o);
    });
    const Trajectory& ref = runs.back();
    OrderEstimate out;
    out.steps = steps;
    bool informative = false;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        double err = 0.0;
        for (int k = 1; k <= 64; ++k) {
            const double t = eq.t0 + (T - eq.t0) * k / 64.0;
            err = std::max(err, std::fabs(runs[i].value(t) - ref.value(t)));
        }
        out.errors.push_back(err);
        if (err > 1e-14) informative = true;
    }
    if (!informative) throw IntegrationError("convergence_order: all errors below 1e-14");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(steps.size());
    for (std::size_t i = 0; i < steps.size(); ++i) {
        const double lx = std::log(steps[i]);
        const double ly = std::log(std::max(out.errors[i], 1e-300));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    out.order = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return out;
}

}  // namespace ndde
