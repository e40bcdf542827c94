#pragma once

#include "ndde/model.hpp"
#include "ndde/parallel.hpp"

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace ndde {

class IntegrationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Values read through the delays at one stage.
struct DelayedState {
    double x1 = 0.0;   // x(τ1)
    double dx1 = 0.0;  // x'(τ1)
    double x2 = 0.0;   // x(τ2)
};

/// y'(t) = rhs(t, y(t), delayed) with y = history on [lo, t0) and y(t0) = initial.
struct DelayEquation {
    double t0 = 0.0;
    double lo = 0.0;
    double initial = 0.0;
    std::function<double(double)> tau1;
    std::function<double(double)> tau2;
    std::function<double(double, double, const DelayedState&)> rhs;
    std::function<double(double)> history;
    std::function<double(double)> history_slope;
};

/// Equation for x itself. Linear-neutral problems use b x'(τ1) directly; the
/// general form expands d/dt Q(t, x(τ1)) = Q_t + Q_x x'(τ1)(1 - r1').
DelayEquation x_equation(const ProblemSpec& problem, const HistoryFunction& psi);

/// Transformed equation for z = x/p (p ≡ 1 left of t0), always through the
/// general-form data of `problem`.
DelayEquation z_equation(const ProblemSpec& problem, const AuxiliarySpec& aux, const HistoryFunction& psi);

struct IntegrateOptions {
    double step = 1e-3;
    double inner_tol = 1e-12;
    int inner_max = 25;
    int max_halvings = 6;
};

/// Accepted nodes with cubic Hermite dense output. Queries left of t0 return
/// the history and its slope.
class Trajectory {
public:
    Trajectory() = default;
    explicit Trajectory(const DelayEquation& eq);

    double value(double t) const;
    double derivative(double t) const;

    const std::vector<double>& times() const { return t_; }
    const std::vector<double>& values() const { return x_; }
    const std::vector<double>& slopes() const { return d_; }
    double t0() const { return t0_; }
    double lo() const { return lo_; }
    double end() const { return t_.back(); }
    std::size_t halvings() const { return halvings_; }

    /// max |x| over nodes in [a, b].
    double max_abs(double a, double b) const;

    /// Columns t,x,xprime; '#' lines carry metadata.
    void write_csv(std::ostream& os, const std::vector<std::string>& metadata = {}) const;

private:
    friend Trajectory integrate(const DelayEquation&, double, const IntegrateOptions&);
    double t0_ = 0.0;
    double lo_ = 0.0;
    std::function<double(double)> history_;
    std::function<double(double)> history_slope_;
    std::vector<double> t_, x_, d_;
    std::size_t halvings_ = 0;
};

/// Classical RK4 with fixed step. Stages whose delayed argument falls inside
/// the current step read a provisional Hermite interpolant of that step, which
/// is corrected by fixed-point iteration; a step that does not settle is split
/// in two, at most `max_halvings` times.
Trajectory integrate(const DelayEquation& eq, double T, const IntegrateOptions& options = {});

struct TrajectorySummary {
    std::string label;
    double max_abs = 0.0;
    double end_abs = 0.0;
    double last_window_max = 0.0;      // max |x| over the last 10% of [t0, T]
    double previous_window_max = 0.0;  // max |x| over the 10% before that
    std::string failure;               // non-empty if the run stopped early
};

struct StabilityReport {
    double epsilon = 0.0;
    double delta = 0.0;
    double T = 0.0;
    std::vector<TrajectorySummary> runs;
    bool bounded = false;     // every run has max |x| < ε
    bool asymptotic = false;  // every run has |x(T)| < 0.01 ε and a shrinking last window
};

struct HistoryCase {
    std::string label;
    HistoryFunction psi;
};

/// {+δ, -δ, δ cos(t - t0), δ (t - m + 1)/(t0 - m + 1)} on [m, t0].
std::vector<HistoryCase> default_history_family(double delta, double lo, double t0);

StabilityReport stability_experiment(const ProblemSpec& problem, double epsilon, double delta,
                                     const std::vector<HistoryCase>& family, double T,
                                     const IntegrateOptions& options = {}, Execution exec = Execution::parallel);

struct OrderEstimate {
    double order = 0.0;
    std::vector<double> steps;
    std::vector<double> errors;
};

/// Self-convergence: errors against a run at half the finest step, measured as
/// max |x_h - x_ref| on 64 sample times in [t0, T]; least-squares slope of log error vs log h.
OrderEstimate convergence_order(const DelayEquation& eq, double T, const std::vector<double>& steps,
                                Execution exec = Execution::parallel);

}  // namespace ndde
