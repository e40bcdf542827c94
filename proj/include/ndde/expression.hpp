#pragma once

#include <cstdint>
#include <initializer_list>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ndde {

/// Raised when an expression is evaluated outside its domain (division by
/// zero, ln of a non-positive argument, non-finite result).
class DomainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Syntax or identifier error; `offset` is the byte offset into the source text.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : std::runtime_error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// Raised by differentiate() on abs / sgnpow nodes that depend on the variable.
class DifferentiationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Free variables. Coefficient functions use `t`; nonlinearity shapes use `x`
/// (and `y` for the two-argument F).
enum class Var : std::uint8_t { t = 0, x = 1, y = 2 };

struct Point {
    double t = 0.0;
    double x = 0.0;
    double y = 0.0;
};

struct Node;

/// Immutable symbolic scalar function. Evaluation runs a compiled postfix
/// program; the tree is kept for printing, differentiation and substitution.
class Expression {
public:
    Expression();  // the constant 0
    explicit Expression(double value);

    static Expression constant(double value);
    static Expression variable(Var v);

    double evaluate(const Point& at) const;
    double operator()(double t) const { return evaluate(Point{t, 0.0, 0.0}); }

    bool depends_on(Var v) const;
    std::optional<double> constant_value() const;

    std::string to_string() const;

    /// Replace every occurrence of `v` by `replacement`.
    Expression substitute(Var v, const Expression& replacement) const;

    const Node& node() const { return *root_; }
    std::shared_ptr<const Node> root() const { return root_; }

    explicit Expression(std::shared_ptr<const Node> root);

private:
    struct Program;
    std::shared_ptr<const Node> root_;
    std::shared_ptr<const Program> program_;
};

enum class Op : std::uint8_t {
    Const, Var, Neg, Add, Sub, Mul, Div, Pow, Sin, Cos, Exp, Ln, Abs, SgnPow
};

struct Node {
    Op op = Op::Const;
    double value = 0.0;
    Var var = Var::t;
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;
};

/// Parse `text` using the documented grammar (docs/expression-grammar.md).
/// Only the listed variables are accepted as identifiers.
Expression parse_expression(std::string_view text, std::initializer_list<Var> allowed = {Var::t});

/// Symbolic derivative with light algebraic simplification.
Expression differentiate(const Expression& e, Var v = Var::t);

// Simplifying builders used by differentiate() and by library code that
// assembles derived coefficients.
Expression operator+(const Expression& a, const Expression& b);
Expression operator-(const Expression& a, const Expression& b);
Expression operator*(const Expression& a, const Expression& b);
Expression operator/(const Expression& a, const Expression& b);
Expression operator-(const Expression& a);
Expression pow(const Expression& base, const Expression& exponent);
Expression sin(const Expression& a);
Expression cos(const Expression& a);
Expression exp(const Expression& a);
Expression ln(const Expression& a);
Expression abs(const Expression& a);

/// Exact rational exponent with odd denominator, 0 < num/den < 1.
struct Rational {
    int num = 1;
    int den = 3;

    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    bool valid() const;
    std::string to_string() const { return std::to_string(num) + "/" + std::to_string(den); }
};

/// Parse "p/q" or a plain integer ratio; throws std::invalid_argument.
Rational parse_rational(std::string_view text);

/// sign(x)·|x|^γ, the real odd branch of x^γ for odd-denominator γ.
double signed_power(double x, double gamma);
inline double signed_power(double x, Rational gamma) { return signed_power(x, gamma.value()); }

}  // namespace ndde
