#pragma once

#include "ndde/model.hpp"
#include "ndde/quadrature.hpp"

#include <memory>
#include <string>
#include <vector>

namespace ndde {

/// Weighted-integral tables for one (problem, aux) pair. Term functions read
/// from it concurrently; all tables extend on demand.
class CriterionModel {
public:
    CriterionModel(ProblemSpec problem, AuxiliarySpec aux, double tmax, QuadratureOptions options = {});
    CriterionModel(const CriterionModel&) = delete;
    CriterionModel& operator=(const CriterionModel&) = delete;

    const ProblemSpec& problem() const { return problem_; }
    const AuxiliarySpec& aux() const { return aux_; }
    double t0() const { return problem_.t0; }
    double horizon() const { return m_; }
    double tmax() const { return tmax_; }

    const CumulativeExponent& exponent() const { return *G_; }
    std::shared_ptr<const CumulativeExponent> exponent_ptr() const { return G_; }

    /// ∫_{τ1(t)}^{t} |g - p'/p|.
    double window_kernel(double t) const { return H_->value(t) - H_->value(problem_.r1.tau(t)); }

    /// Neutral quotient q = b/(1-r1') and q' (linear-neutral form only).
    double neutral(double t) const { return q_(t); }
    double neutral_rate(double t) const { return dq_(t); }

    double term(std::size_t index, double t) const;
    std::size_t term_count() const { return problem_.form == Form::general ? 7 : 5; }
    const std::vector<std::string>& term_names() const;

    /// Precompute every table up to `t` (parallel panel construction).
    void extend_to(double t) const;

    /// k4 ∫ w |c/p| p^γ(τ2); the A-operator bound.
    double decay_term(double t) const { return term(term_count() - 1, t); }

private:
    const WeightedIntegral& weighted(std::size_t index) const { return *weighted_[index]; }

    ProblemSpec problem_;
    AuxiliarySpec aux_;
    double tmax_;
    double m_;
    Expression q_;
    Expression dq_;
    std::shared_ptr<CumulativeExponent> G_;
    std::unique_ptr<CumulativeIntegral> H_;
    std::vector<std::unique_ptr<WeightedIntegral>> weighted_;  // aligned with term index, null for pointwise terms
};

/// (T1, T2, T3, T4, T5, T6a, T6b) of the general form at t.
std::vector<double> term_values_general(const CriterionModel& model, double t);

/// Five addends of the linear-neutral criterion at t.
std::vector<double> term_values_linear(const CriterionModel& model, double t);

struct NeutralCoefficients {
    double mu = 0.0;    // (a p(τ1) - b p'(τ1)) / p
    double cbar = 0.0;  // p(τ1) q / p
    double beta = 0.0;  // g cbar + cbar'
};

NeutralCoefficients neutral_coefficients(const CriterionModel& model, double s);
NeutralCoefficients neutral_coefficients(const ProblemSpec& linear, const AuxiliarySpec& aux, double s);

struct AlphaEstimate {
    double alpha = 0.0;         // sup over t of the pointwise sum
    double argsup = 0.0;
    double tail_slope = 0.0;
    double envelope_slope = 0.0;
    double sum_of_sups = 0.0;   // Σ_j sup_t term_j
    std::vector<std::string> names;
    std::vector<SupResult> terms;
};

AlphaEstimate alpha_estimate(const CriterionModel& model, std::size_t n_coarse = 4096,
                             Execution exec = Execution::parallel);

enum class WindowKind { decay_coefficient, damping_rate };

struct WindowConstant {
    double window = 0.0;     // sup |∫_{t1}^{t2} f| / |t2 - t1| over sampled windows of length ≤ 1
    double pointwise = 0.0;  // sup |f|
};

/// decay_coefficient: f = |c/p| p^γ(τ2); damping_rate: f = g.
WindowConstant window_lipschitz(const CriterionModel& model, WindowKind kind, std::size_t n_coarse = 4096,
                                Execution exec = Execution::parallel);

/// sup_{t1 ≤ t2} exp(G(t1) - G(t2)) on a grid of n points over [t0, tmax].
double K_estimate(const CumulativeExponent& exponent, double tmax, std::size_t n = 1 << 16);

struct AsymptoticCheck {
    double decay_tail = 0.0;        // k4 ∫ w |c/p| p^γ(τ2) at tmax
    double decay_slope = 0.0;       // over [t0 + (tmax-t0)/10, tmax]
    double exponent_end = 0.0;      // G(tmax)
    double exponent_last = 0.0;     // G(tmax) - G(mid)
    double exponent_previous = 0.0; // G(mid) - G(quarter)
    bool decaying = false;
    bool divergent = false;
};

AsymptoticCheck asymptotic_check(const CriterionModel& model);

struct DeltaBounds {
    double existence = 0.0;
    double uniform = 0.0;
    double head = 1.0;  // C in C·δ + α ≤ 1
};

/// Throws std::domain_error when α ≥ 1.
DeltaBounds delta_bounds(double alpha, double K, double epsilon, const CriterionModel& model);

enum class Verdict { satisfied, violated, inconclusive };
const char* to_string(Verdict v);

struct CriteriaOptions {
    double tmax = 1e4;
    std::size_t n_coarse = 4096;
    double epsilon = 0.1;
    QuadratureOptions quadrature{};
};

struct CriteriaReport {
    std::string form;
    double t0 = 0.0;
    double tmax = 0.0;
    double horizon = 0.0;
    std::size_t n_coarse = 0;
    AlphaEstimate alpha;
    WindowConstant L1;
    WindowConstant L2;
    double K = 1.0;
    double epsilon = 0.1;
    DeltaBounds delta;
    bool delta_defined = false;
    AsymptoticCheck asymptotic;
    Verdict bounded = Verdict::inconclusive;
    Verdict uniform = Verdict::inconclusive;
    Verdict asymptotically_stable = Verdict::inconclusive;
    std::vector<std::string> warnings;
};

CriteriaReport check_criteria(const ProblemSpec& problem, const AuxiliarySpec& aux, const CriteriaOptions& options,
                              Execution exec = Execution::parallel);

/// Exit code contract: 0 satisfied, 2 violated, 3 inconclusive.
int exit_code(const CriteriaReport& report);

std::string report_json(const CriteriaReport& report);
/// Flat `key = value` lines, one per scalar.
std::string report_text(const CriteriaReport& report);

/// a(t) making the bracket of the third linear-neutral term equal `offset(t)`:
///   a = [b p'(τ1) + (k(τ1)(1 - r1') - β̄ - offset) p] / p(τ1).
/// Requires τ1(t) ≥ t0 on the working interval (p is used unextended).
Expression bracket_coefficient(const ProblemSpec& linear, const AuxiliarySpec& aux,
                               const Expression& offset = Expression::constant(0.0));

}  // namespace ndde
