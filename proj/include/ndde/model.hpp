#pragma once

#include "ndde/expression.hpp"

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ndde {

/// A problem or auxiliary function that breaks a structural hypothesis.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Variable delay r(t) with exact first and second derivatives.
class DelaySpec {
public:
    DelaySpec() : DelaySpec(Expression::constant(0.0)) {}
    explicit DelaySpec(Expression r);

    double delay(double t) const { return r_(t); }
    double tau(double t) const { return t - r_(t); }
    double rate(double t) const { return dr_(t); }         // r'
    double curvature(double t) const { return ddr_(t); }   // r''

    const Expression& expression() const { return r_; }
    const Expression& derivative() const { return dr_; }
    /// t - r(t) as a symbolic expression in t.
    Expression tau_expression() const { return Expression::variable(Var::t) - r_; }

private:
    Expression r_;
    Expression dr_;
    Expression ddr_;
};

enum class Form { general, linear_neutral };

const char* to_string(Form f);

/// Equation data for
///   general:         x' = -a x(τ1) + d/dt Q(t, x(τ1)) + d F(x(τ1), x(τ2)) + c G(x^γ(τ2))
///   linear-neutral:  x' = -a x(τ1) + b x'(τ1) + c G(x^γ(τ2))
/// with τj(t) = t - rj(t).
///
/// The symbol `b` is the neutral coefficient of the linear-neutral form; the
/// Lipschitz bound of Q(t, ·) in the general form is `bQ`.
struct ProblemSpec {
    Form form = Form::linear_neutral;
    double t0 = 0.0;
    Rational gamma{1, 3};

    Expression a;
    Expression c;
    Expression G = Expression::variable(Var::x);  // G(x)
    double k4 = 1.0;

    // linear-neutral
    Expression b;

    // general
    Expression Q;    // Q(t, x)
    Expression Q_t;  // ∂Q/∂t
    Expression Q_x;  // ∂Q/∂x
    Expression bQ;   // |Q(t,u) - Q(t,v)| <= bQ(t) |u - v|
    Expression d;
    Expression F;    // F(x, y)
    double k2 = 1.0;
    double k3 = 1.0;

    DelaySpec r1;
    DelaySpec r2;

    /// Fill Q_t, Q_x from Q by symbolic differentiation.
    void derive_partials();
};

/// Neutral coefficient q(t) = b(t)/(1 - r1'(t)) of the linear-neutral form.
Expression neutral_quotient(const ProblemSpec& linear);

/// Re-encode a linear-neutral problem in the general form with
/// Q(t,x) = q(t) x, bQ = |q|, a_general = a + q', d = 0, F = 0.
ProblemSpec to_general(const ProblemSpec& linear);

/// User-chosen auxiliary pair (p, g). p is extended by the constant 1 to the
/// left of t0, so p'(t) = 0 there.
class AuxiliarySpec {
public:
    AuxiliarySpec() : AuxiliarySpec(Expression::constant(1.0), Expression::constant(0.0), 0.0) {}
    AuxiliarySpec(Expression p, Expression g, double t0);

    double p(double t) const { return t < t0_ ? 1.0 : p_(t); }
    double dp(double t) const { return t < t0_ ? 0.0 : dp_(t); }
    double g(double t) const { return g_(t); }
    /// g - p'/p, the kernel of the window integrals.
    double kernel(double t) const { return g(t) - dp(t) / p(t); }

    double t0() const { return t0_; }
    const Expression& p_expression() const { return p_; }
    const Expression& dp_expression() const { return dp_; }
    const Expression& g_expression() const { return g_; }

private:
    Expression p_;
    Expression dp_;
    Expression g_;
    double t0_;
};

/// Initial function ψ on [m(t0), t0].
class HistoryFunction {
public:
    HistoryFunction() : HistoryFunction(Expression::constant(0.0), 0.0, 0.0) {}
    /// `derivative` overrides the symbolic ψ' (needed when ψ uses abs/sgnpow).
    HistoryFunction(Expression psi, double lo, double t0, std::optional<Expression> derivative = std::nullopt);

    double value(double t) const { return psi_(t); }
    /// Throws ValidationError if ψ' is unavailable.
    double derivative(double t) const;
    bool has_derivative() const { return dpsi_.has_value(); }

    double lo() const { return lo_; }
    double t0() const { return t0_; }
    /// max |ψ| on [lo, t0], grid plus golden-section refinement.
    double norm() const { return norm_; }
    const Expression& expression() const { return psi_; }

private:
    Expression psi_;
    std::optional<Expression> dpsi_;
    double lo_;
    double t0_;
    double norm_;
};

struct HorizonResult {
    double m = 0.0;       // m(t0) = min_j inf_{t >= t0} τj(t) (on [t0, Tmax])
    double argmin = 0.0;  // where the infimum is attained
    int delay_index = 1;  // 1 or 2
};

/// m(t0) over [t0, tmax], grid scan plus local refinement.
HorizonResult horizon(const ProblemSpec& problem, double tmax);

struct ValidationReport {
    std::vector<std::string> warnings;
};

/// Checks the structural hypotheses on a sample grid over [m(t0), tmax]:
/// γ, Lipschitz constants (with random spot checks), G(0)=0, F(0,0)=0,
/// Q(t,0)=0, r ≥ 0, r1' ≠ 1, p > 0, p(t0)=1, g ≥ 0. Hard failures throw
/// ValidationError; soft findings are returned as warnings.
ValidationReport validate(const ProblemSpec& problem, const AuxiliarySpec& aux, double tmax);

/// Same hypotheses restricted to the equation data.
ValidationReport validate(const ProblemSpec& problem, double tmax);

}  // namespace ndde
