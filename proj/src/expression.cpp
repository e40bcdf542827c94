#include "ndde/expression.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <utility>

namespace ndde {

namespace {

using NodePtr = std::shared_ptr<const Node>;

NodePtr make_node(Op op, double value = 0.0, Var var = Var::t, NodePtr lhs = nullptr, NodePtr rhs = nullptr) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->value = value;
    n->var = var;
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    return n;
}

NodePtr make_const(double v) { return make_node(Op::Const, v); }

[[noreturn]] void domain_fail(const char* what) { throw DomainError(what); }

double apply_pow(double base, double exponent) {
    if (base == 0.0 && exponent < 0.0) domain_fail("division by zero in power");
    if (base < 0.0 && exponent != std::floor(exponent))
        domain_fail("negative base with non-integer exponent (use sgnpow)");
    return std::pow(base, exponent);
}

double apply_binary(Op op, double a, double b) {
    switch (op) {
        case Op::Add: return a + b;
        case Op::Sub: return a - b;
        case Op::Mul: return a * b;
        case Op::Div:
            if (b == 0.0) domain_fail("division by zero");
            return a / b;
        case Op::Pow: return apply_pow(a, b);
        case Op::SgnPow: return signed_power(a, b);
        default: break;
    }
    domain_fail("bad binary op");
}

double apply_unary(Op op, double a) {
    switch (op) {
        case Op::Neg: return -a;
        case Op::Sin: return std::sin(a);
        case Op::Cos: return std::cos(a);
        case Op::Exp: return std::exp(a);
        case Op::Ln:
            if (!(a > 0.0)) domain_fail("ln of a non-positive argument");
            return std::log(a);
        case Op::Abs: return std::fabs(a);
        default: break;
    }
    domain_fail("bad unary op");
}

}  // namespace

// ---------------------------------------------------------------------------
// Compiled postfix program

struct Expression::Program {
    struct Instr {
        Op op;
        Var var;
        double value;
    };
    std::vector<Instr> code;
    std::size_t max_depth = 0;

    void emit(const Node& n, std::size_t depth) {
        if (n.lhs) emit(*n.lhs, depth);
        if (n.rhs) emit(*n.rhs, depth + 1);
        max_depth = std::max(max_depth, depth + 1 + (n.rhs ? 1 : 0));
        code.push_back({n.op, n.var, n.value});
    }

    double run(const Point& at) const {
        constexpr std::size_t kInline = 32;
        std::array<double, kInline> small{};
        std::vector<double> big;
        double* stack = small.data();
        if (max_depth > kInline) {
            big.resize(max_depth);
            stack = big.data();
        }
        std::size_t sp = 0;
        for (const Instr& in : code) {
            switch (in.op) {
                case Op::Const: stack[sp++] = in.value; break;
                case Op::Var:
                    stack[sp++] = in.var == Var::t ? at.t : (in.var == Var::x ? at.x : at.y);
                    break;
                case Op::Neg: case Op::Sin: case Op::Cos: case Op::Exp: case Op::Ln: case Op::Abs:
                    stack[sp - 1] = apply_unary(in.op, stack[sp - 1]);
                    break;
                default:
                    --sp;
                    stack[sp - 1] = apply_binary(in.op, stack[sp - 1], stack[sp]);
                    break;
            }
        }
        const double r = stack[0];
        if (!std::isfinite(r)) domain_fail("non-finite expression value");
        return r;
    }
};

Expression::Expression() : Expression(make_const(0.0)) {}
Expression::Expression(double value) : Expression(make_const(value)) {}

Expression::Expression(std::shared_ptr<const Node> root) : root_(std::move(root)) {
    auto prog = std::make_shared<Program>();
    prog->emit(*root_, 0);
    program_ = std::move(prog);
}

Expression Expression::constant(double value) { return Expression(make_const(value)); }
Expression Expression::variable(Var v) { return Expression(make_node(Op::Var, 0.0, v)); }

double Expression::evaluate(const Point& at) const { return program_->run(at); }

namespace {
bool node_depends(const Node& n, Var v) {
    if (n.op == Op::Var) return n.var == v;
    return (n.lhs && node_depends(*n.lhs, v)) || (n.rhs && node_depends(*n.rhs, v));
}
}  // namespace

bool Expression::depends_on(Var v) const { return node_depends(*root_, v); }

std::optional<double> Expression::constant_value() const {
    if (depends_on(Var::t) || depends_on(Var::x) || depends_on(Var::y)) return std::nullopt;
    try {
        return evaluate({});
    } catch (const DomainError&) {
        return std::nullopt;
    }
}

// ---------------------------------------------------------------------------
// Printing. Parenthesization preserves tree shape so parse(print(e)) == e.

namespace {

int precedence(const Node& n) {
    switch (n.op) {
        case Op::Add: case Op::Sub: return 1;
        case Op::Mul: case Op::Div: return 2;
        case Op::Neg: return 3;
        case Op::Pow: return 4;
        case Op::Const: return n.value < 0.0 || std::signbit(n.value) ? 3 : 5;
        default: return 5;
    }
}

std::string format_number(double v) {
    std::array<char, 64> buf{};
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

const char* function_name(Op op) {
    switch (op) {
        case Op::Sin: return "sin";
        case Op::Cos: return "cos";
        case Op::Exp: return "exp";
        case Op::Ln: return "ln";
        case Op::Abs: return "abs";
        case Op::SgnPow: return "sgnpow";
        default: return "?";
    }
}

const char* var_name(Var v) {
    switch (v) {
        case Var::t: return "t";
        case Var::x: return "x";
        case Var::y: return "y";
    }
    return "?";
}

void print(const Node& n, std::string& out);

void print_wrapped(const Node& n, bool wrap, std::string& out) {
    if (wrap) out += '(';
    print(n, out);
    if (wrap) out += ')';
}

void print(const Node& n, std::string& out) {
    switch (n.op) {
        case Op::Const: out += format_number(n.value); return;
        case Op::Var: out += var_name(n.var); return;
        case Op::Neg: {
            out += '-';
            // A literal directly after '-' would re-parse as a negative constant.
            const bool wrap = precedence(*n.lhs) < 3 || n.lhs->op == Op::Const;
            print_wrapped(*n.lhs, wrap, out);
            return;
        }
        case Op::Add: case Op::Sub: case Op::Mul: case Op::Div: {
            const int p = precedence(n);
            print_wrapped(*n.lhs, precedence(*n.lhs) < p, out);
            out += n.op == Op::Add ? " + " : n.op == Op::Sub ? " - " : n.op == Op::Mul ? "*" : "/";
            print_wrapped(*n.rhs, precedence(*n.rhs) <= p, out);
            return;
        }
        case Op::Pow:
            print_wrapped(*n.lhs, precedence(*n.lhs) <= 4, out);
            out += '^';
            print_wrapped(*n.rhs, precedence(*n.rhs) < 3, out);
            return;
        case Op::SgnPow:
            out += "sgnpow(";
            print(*n.lhs, out);
            out += ", ";
            print(*n.rhs, out);
            out += ')';
            return;
        default:
            out += function_name(n.op);
            out += '(';
            print(*n.lhs, out);
            out += ')';
            return;
    }
}

}  // namespace

std::string Expression::to_string() const {
    std::string out;
    print(*root_, out);
    return out;
}

// ---------------------------------------------------------------------------
// Parser
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('-' | '+') unary | power
//   power   := primary ('^' unary)?
//   primary := number | 'pi' | variable | func '(' expr ')'
//            | 'sgnpow' '(' expr ',' expr ')' | '(' expr ')'

namespace {

class Parser {
public:
    Parser(std::string_view text, std::initializer_list<Var> allowed) : text_(text), allowed_(allowed) {}

    NodePtr parse() {
        NodePtr n = expr();
        skip_ws();
        if (pos_ != text_.size()) fail("unexpected character '" + std::string(1, text_[pos_]) + "'");
        return n;
    }

private:
    std::string_view text_;
    std::vector<Var> allowed_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, pos_); }

    void skip_ws() {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) fail(std::string("expected '") + c + "'");
    }

    NodePtr expr() {
        NodePtr lhs = term();
        for (;;) {
            if (accept('+')) lhs = make_node(Op::Add, 0, Var::t, lhs, term());
            else if (accept('-')) lhs = make_node(Op::Sub, 0, Var::t, lhs, term());
            else return lhs;
        }
    }

    NodePtr term() {
        NodePtr lhs = unary();
        for (;;) {
            if (accept('*')) lhs = make_node(Op::Mul, 0, Var::t, lhs, unary());
            else if (accept('/')) lhs = make_node(Op::Div, 0, Var::t, lhs, unary());
            else return lhs;
        }
    }

    NodePtr unary() {
        if (accept('-')) {
            skip_ws();
            if (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) {
                // -2^2 is -(2^2); a bare -2 becomes a negative literal.
                const double n = number();
                skip_ws();
                if (pos_ < text_.size() && text_[pos_] == '^')
                    return make_node(Op::Neg, 0, Var::t, power_tail(make_const(n)));
                return make_const(-n);
            }
            return make_node(Op::Neg, 0, Var::t, unary());
        }
        if (accept('+')) return unary();
        return power_tail(primary());
    }

    NodePtr power_tail(NodePtr base) {
        if (accept('^')) return make_node(Op::Pow, 0, Var::t, base, unary());
        return base;
    }

    double number() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (pos_ < text_.size() && text_[pos_] == '.') {
            ++pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        }
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t look = pos_ + 1;
            if (look < text_.size() && (text_[look] == '+' || text_[look] == '-')) ++look;
            if (look < text_.size() && std::isdigit(static_cast<unsigned char>(text_[look]))) {
                pos_ = look;
                while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            }
        }
        double v = 0.0;
        auto res = std::from_chars(text_.data() + start, text_.data() + pos_, v);
        if (res.ec != std::errc() || res.ptr != text_.data() + pos_) {
            pos_ = start;
            fail("malformed number");
        }
        return v;
    }

    NodePtr primary() {
        skip_ws();
        if (pos_ >= text_.size()) fail("unexpected end of input");
        const char c = text_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return make_const(number());
        if (c == '(') {
            ++pos_;
            NodePtr inner = expr();
            expect(')');
            return inner;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            const std::size_t start = pos_;
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
                ++pos_;
            const std::string_view id = text_.substr(start, pos_ - start);
            return identifier(id, start);
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    NodePtr identifier(std::string_view id, std::size_t start) {
        struct Fn {
            std::string_view name;
            Op op;
        };
        static constexpr Fn kFunctions[] = {
            {"sin", Op::Sin}, {"cos", Op::Cos}, {"exp", Op::Exp},
            {"ln", Op::Ln},   {"abs", Op::Abs}, {"sgnpow", Op::SgnPow},
        };
        for (const Fn& f : kFunctions) {
            if (f.name != id) continue;
            expect('(');
            NodePtr arg = expr();
            if (f.op == Op::SgnPow) {
                expect(',');
                NodePtr gamma = expr();
                expect(')');
                return make_node(Op::SgnPow, 0, Var::t, arg, gamma);
            }
            expect(')');
            return make_node(f.op, 0, Var::t, arg);
        }
        if (id == "pi") return make_const(std::numbers::pi);
        for (Var v : allowed_) {
            if (id == var_name(v)) return make_node(Op::Var, 0, v);
        }
        throw ParseError("unknown identifier '" + std::string(id) + "'", start);
    }
};

}  // namespace

Expression parse_expression(std::string_view text, std::initializer_list<Var> allowed) {
    return Expression(Parser(text, allowed).parse());
}

// ---------------------------------------------------------------------------
// Simplifying builders

namespace {

std::optional<double> as_const(const Expression& e) {
    if (e.node().op == Op::Const) return e.node().value;
    return std::nullopt;
}

Expression fold_or(Op op, const Expression& a, const Expression& b) {
    auto ca = as_const(a);
    auto cb = as_const(b);
    if (ca && cb) {
        try {
            const double v = apply_binary(op, *ca, *cb);
            if (std::isfinite(v)) return Expression::constant(v);
        } catch (const DomainError&) {
        }
    }
    return Expression(make_node(op, 0, Var::t, a.root(), b.root()));
}

Expression fold_unary(Op op, const Expression& a) {
    if (auto ca = as_const(a)) {
        try {
            const double v = apply_unary(op, *ca);
            if (std::isfinite(v)) return Expression::constant(v);
        } catch (const DomainError&) {
        }
    }
    return Expression(make_node(op, 0, Var::t, a.root()));
}

}  // namespace

Expression operator+(const Expression& a, const Expression& b) {
    if (as_const(a) == 0.0) return b;
    if (as_const(b) == 0.0) return a;
    return fold_or(Op::Add, a, b);
}

Expression operator-(const Expression& a, const Expression& b) {
    if (as_const(b) == 0.0) return a;
    if (as_const(a) == 0.0) return -b;
    return fold_or(Op::Sub, a, b);
}

Expression operator*(const Expression& a, const Expression& b) {
    if (as_const(a) == 0.0 || as_const(b) == 0.0) return Expression::constant(0.0);
    if (as_const(a) == 1.0) return b;
    if (as_const(b) == 1.0) return a;
    if (as_const(a) == -1.0) return -b;
    if (as_const(b) == -1.0) return -a;
    return fold_or(Op::Mul, a, b);
}

Expression operator/(const Expression& a, const Expression& b) {
    if (as_const(a) == 0.0) return Expression::constant(0.0);
    if (as_const(b) == 1.0) return a;
    return fold_or(Op::Div, a, b);
}

Expression operator-(const Expression& a) {
    if (auto c = as_const(a)) return Expression::constant(-*c);
    if (a.node().op == Op::Neg) return Expression(a.node().lhs);
    return Expression(make_node(Op::Neg, 0, Var::t, a.root()));
}

Expression pow(const Expression& base, const Expression& exponent) {
    if (as_const(exponent) == 1.0) return base;
    if (as_const(exponent) == 0.0) return Expression::constant(1.0);
    return fold_or(Op::Pow, base, exponent);
}

Expression sin(const Expression& a) { return fold_unary(Op::Sin, a); }
Expression cos(const Expression& a) { return fold_unary(Op::Cos, a); }
Expression exp(const Expression& a) { return fold_unary(Op::Exp, a); }
Expression ln(const Expression& a) { return fold_unary(Op::Ln, a); }
Expression abs(const Expression& a) { return fold_unary(Op::Abs, a); }

// ---------------------------------------------------------------------------
// Differentiation and substitution

namespace {

Expression rebuild(const Node& n, const Expression& l, const Expression& r) {
    switch (n.op) {
        case Op::Add: return l + r;
        case Op::Sub: return l - r;
        case Op::Mul: return l * r;
        case Op::Div: return l / r;
        case Op::Pow: return pow(l, r);
        case Op::SgnPow: return Expression(make_node(Op::SgnPow, 0, Var::t, l.root(), r.root()));
        case Op::Neg: return -l;
        case Op::Sin: return sin(l);
        case Op::Cos: return cos(l);
        case Op::Exp: return exp(l);
        case Op::Ln: return ln(l);
        case Op::Abs: return abs(l);
        default: break;
    }
    throw std::logic_error("rebuild: leaf node");
}

Expression derive(const NodePtr& np, Var v) {
    const Node& n = *np;
    if (!node_depends(n, v)) return Expression::constant(0.0);
    const Expression self(np);
    switch (n.op) {
        case Op::Var: return Expression::constant(1.0);
        case Op::Neg: return -derive(n.lhs, v);
        case Op::Add: return derive(n.lhs, v) + derive(n.rhs, v);
        case Op::Sub: return derive(n.lhs, v) - derive(n.rhs, v);
        case Op::Mul: {
            const Expression a(n.lhs), b(n.rhs);
            return derive(n.lhs, v) * b + a * derive(n.rhs, v);
        }
        case Op::Div: {
            const Expression a(n.lhs), b(n.rhs);
            const Expression da = derive(n.lhs, v);
            if (!node_depends(*n.rhs, v)) return da / b;
            return (da * b - a * derive(n.rhs, v)) / pow(b, Expression::constant(2.0));
        }
        case Op::Pow: {
            const Expression a(n.lhs), b(n.rhs);
            if (!node_depends(*n.rhs, v)) {
                return b * pow(a, b - Expression::constant(1.0)) * derive(n.lhs, v);
            }
            if (!node_depends(*n.lhs, v)) return self * ln(a) * derive(n.rhs, v);
            return self * (derive(n.rhs, v) * ln(a) + b * derive(n.lhs, v) / a);
        }
        case Op::Sin: return cos(Expression(n.lhs)) * derive(n.lhs, v);
        case Op::Cos: return -(sin(Expression(n.lhs)) * derive(n.lhs, v));
        case Op::Exp: return self * derive(n.lhs, v);
        case Op::Ln: return derive(n.lhs, v) / Expression(n.lhs);
        case Op::Abs: throw DifferentiationError("abs() is not differentiable");
        case Op::SgnPow: throw DifferentiationError("sgnpow() is not differentiable");
        case Op::Const: break;
    }
    return Expression::constant(0.0);
}

Expression subst(const NodePtr& np, Var v, const Expression& with) {
    const Node& n = *np;
    if (!node_depends(n, v)) return Expression(np);
    if (n.op == Op::Var) return with;
    const Expression l = subst(n.lhs, v, with);
    const Expression r = n.rhs ? subst(n.rhs, v, with) : Expression();
    return rebuild(n, l, r);
}

}  // namespace

Expression differentiate(const Expression& e, Var v) { return derive(e.root(), v); }

Expression Expression::substitute(Var v, const Expression& replacement) const {
    return subst(root_, v, replacement);
}

// ---------------------------------------------------------------------------

bool Rational::valid() const {
    return den > 0 && num > 0 && num < den && (den % 2 != 0);
}

Rational parse_rational(std::string_view text) {
    auto trim = [](std::string_view s) {
        while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
        while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
        return s;
    };
    text = trim(text);
    Rational r{};
    const auto slash = text.find('/');
    auto to_int = [](std::string_view s, int& out) {
        auto res = std::from_chars(s.data(), s.data() + s.size(), out);
        return res.ec == std::errc() && res.ptr == s.data() + s.size();
    };
    if (slash == std::string_view::npos) {
        throw std::invalid_argument("gamma must be written as p/q");
    }
    if (!to_int(trim(text.substr(0, slash)), r.num) || !to_int(trim(text.substr(slash + 1)), r.den))
        throw std::invalid_argument("malformed rational '" + std::string(text) + "'");
    return r;
}

double signed_power(double x, double gamma) {
    if (x == 0.0) return 0.0;
    const double m = std::pow(std::fabs(x), gamma);
    return x < 0.0 ? -m : m;
}

}  // namespace ndde
