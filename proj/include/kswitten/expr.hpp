#pragma once

// Arithmetic expression language for 1-d potentials phi(x), evaluated together
// with phi' and phi'' through second-order dual numbers.  The grammar is
// deliberately small: +, -, *, /, integer powers, unary minus and the calls
// {exp, cos, sin, cosh}.  Integer-only exponents keep the dual-number
// differentiation free of fractional-power singularities.

#include <cctype>
#include <cmath>
#include <cstdio>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "kswitten/errors.hpp"

namespace ksw {

// Truncated second-order Taylor algebra: value, first and second derivative
// with respect to the single variable x.
struct Dual2 {
    double v = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;

    bool finite() const { return std::isfinite(v) && std::isfinite(d1) && std::isfinite(d2); }
};

inline Dual2 dual_constant(double c) { return {c, 0.0, 0.0}; }
inline Dual2 dual_variable(double x) { return {x, 1.0, 0.0}; }

inline Dual2 operator+(const Dual2& a, const Dual2& b) { return {a.v + b.v, a.d1 + b.d1, a.d2 + b.d2}; }
inline Dual2 operator-(const Dual2& a, const Dual2& b) { return {a.v - b.v, a.d1 - b.d1, a.d2 - b.d2}; }
inline Dual2 operator-(const Dual2& a) { return {-a.v, -a.d1, -a.d2}; }

inline Dual2 operator*(const Dual2& a, const Dual2& b) {
    return {a.v * b.v,
            a.d1 * b.v + a.v * b.d1,
            a.d2 * b.v + 2.0 * a.d1 * b.d1 + a.v * b.d2};
}

inline Dual2 operator/(const Dual2& a, const Dual2& b) {
    const double q = a.v / b.v;
    const double q1 = (a.d1 - q * b.d1) / b.v;
    const double q2 = (a.d2 - 2.0 * q1 * b.d1 - q * b.d2) / b.v;
    return {q, q1, q2};
}

inline Dual2 dual_ipow(const Dual2& u, long k) {
    if (k == 0) return dual_constant(1.0);
    if (k == 1) return u;
    auto ipow = [](double base, long e) {
        double r = 1.0, b = base;
        for (long m = e; m > 0; m >>= 1) {
            if (m & 1) r *= b;
            b *= b;
        }
        return r;
    };
    const double p2 = ipow(u.v, k - 2);
    const double p1 = p2 * u.v;
    const double p0 = p1 * u.v;
    const double kd = static_cast<double>(k);
    return {p0,
            kd * p1 * u.d1,
            kd * (kd - 1.0) * p2 * u.d1 * u.d1 + kd * p1 * u.d2};
}

inline Dual2 dual_exp(const Dual2& u) {
    const double e = std::exp(u.v);
    return {e, e * u.d1, e * (u.d2 + u.d1 * u.d1)};
}

inline Dual2 dual_sin(const Dual2& u) {
    const double s = std::sin(u.v), c = std::cos(u.v);
    return {s, c * u.d1, -s * u.d1 * u.d1 + c * u.d2};
}

inline Dual2 dual_cos(const Dual2& u) {
    const double s = std::sin(u.v), c = std::cos(u.v);
    return {c, -s * u.d1, -c * u.d1 * u.d1 - s * u.d2};
}

inline Dual2 dual_cosh(const Dual2& u) {
    const double ch = std::cosh(u.v), sh = std::sinh(u.v);
    return {ch, sh * u.d1, ch * u.d1 * u.d1 + sh * u.d2};
}

// ---------------------------------------------------------------------------
// AST

enum class ExprKind { Constant, Variable, Add, Sub, Mul, Div, Pow, Neg, Call };
enum class ExprFunc { Exp, Sin, Cos, Cosh };

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
    ExprKind kind;
    double value = 0.0;   // Constant
    long exponent = 0;    // Pow
    ExprFunc func = ExprFunc::Exp;
    ExprPtr lhs, rhs;     // rhs unused for Neg/Call/Pow
};

// Immutable after parse; safe for concurrent read-only evaluation.
class ExprAst {
public:
    ExprAst() = default;
    explicit ExprAst(ExprPtr root) : root_(std::move(root)) {}

    const ExprNode& root() const { return *root_; }
    ExprPtr root_ptr() const { return root_; }
    bool empty() const { return root_ == nullptr; }

private:
    ExprPtr root_;
};

namespace detail {

inline Dual2 eval_node(const ExprNode& n, double x) {
    switch (n.kind) {
    case ExprKind::Constant: return dual_constant(n.value);
    case ExprKind::Variable: return dual_variable(x);
    case ExprKind::Add: return eval_node(*n.lhs, x) + eval_node(*n.rhs, x);
    case ExprKind::Sub: return eval_node(*n.lhs, x) - eval_node(*n.rhs, x);
    case ExprKind::Mul: return eval_node(*n.lhs, x) * eval_node(*n.rhs, x);
    case ExprKind::Div: return eval_node(*n.lhs, x) / eval_node(*n.rhs, x);
    case ExprKind::Pow: return dual_ipow(eval_node(*n.lhs, x), n.exponent);
    case ExprKind::Neg: return -eval_node(*n.lhs, x);
    case ExprKind::Call:
        switch (n.func) {
        case ExprFunc::Exp: return dual_exp(eval_node(*n.lhs, x));
        case ExprFunc::Sin: return dual_sin(eval_node(*n.lhs, x));
        case ExprFunc::Cos: return dual_cos(eval_node(*n.lhs, x));
        case ExprFunc::Cosh: return dual_cosh(eval_node(*n.lhs, x));
        }
    }
    return {};
}

inline double eval_value_node(const ExprNode& n, double x) {
    switch (n.kind) {
    case ExprKind::Constant: return n.value;
    case ExprKind::Variable: return x;
    case ExprKind::Add: return eval_value_node(*n.lhs, x) + eval_value_node(*n.rhs, x);
    case ExprKind::Sub: return eval_value_node(*n.lhs, x) - eval_value_node(*n.rhs, x);
    case ExprKind::Mul: return eval_value_node(*n.lhs, x) * eval_value_node(*n.rhs, x);
    case ExprKind::Div: return eval_value_node(*n.lhs, x) / eval_value_node(*n.rhs, x);
    case ExprKind::Pow: {
        double r = 1.0, b = eval_value_node(*n.lhs, x);
        for (long m = n.exponent; m > 0; m >>= 1) {
            if (m & 1) r *= b;
            b *= b;
        }
        return r;
    }
    case ExprKind::Neg: return -eval_value_node(*n.lhs, x);
    case ExprKind::Call: {
        const double u = eval_value_node(*n.lhs, x);
        switch (n.func) {
        case ExprFunc::Exp: return std::exp(u);
        case ExprFunc::Sin: return std::sin(u);
        case ExprFunc::Cos: return std::cos(u);
        case ExprFunc::Cosh: return std::cosh(u);
        }
    }
    }
    return 0.0;
}

// Recursive-descent parser.  Precedence: ^  >  unary -  >  * /  >  + -.
class Parser {
public:
    explicit Parser(std::string_view src) : src_(src) {}

    ExprPtr parse() {
        ExprPtr e = sum();
        skip_ws();
        if (pos_ != src_.size())
            throw ParseError("unexpected trailing input", pos_);
        return e;
    }

private:
    std::string_view src_;
    std::size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool peek(char c) {
        skip_ws();
        return pos_ < src_.size() && src_[pos_] == c;
    }

    bool accept(char c) {
        if (peek(c)) {
            ++pos_;
            return true;
        }
        return false;
    }

    static ExprPtr node(ExprKind k, ExprPtr l, ExprPtr r = nullptr) {
        auto n = std::make_shared<ExprNode>();
        n->kind = k;
        n->lhs = std::move(l);
        n->rhs = std::move(r);
        return n;
    }

    ExprPtr sum() {
        ExprPtr e = term();
        for (;;) {
            if (accept('+')) e = node(ExprKind::Add, e, term());
            else if (accept('-')) e = node(ExprKind::Sub, e, term());
            else return e;
        }
    }

    ExprPtr term() {
        ExprPtr e = unary();
        for (;;) {
            if (accept('*')) e = node(ExprKind::Mul, e, unary());
            else if (accept('/')) e = node(ExprKind::Div, e, unary());
            else return e;
        }
    }

    ExprPtr unary() {
        if (accept('-')) return node(ExprKind::Neg, unary());
        return power();
    }

    ExprPtr power() {
        ExprPtr e = atom();
        while (accept('^')) {
            skip_ws();
            const std::size_t at = pos_;
            if (pos_ >= src_.size())
                throw ParseError("expected integer exponent", at);
            if (src_[pos_] == '-')
                throw ParseError("non-integer exponent: negative exponents are not allowed", at);
            if (!std::isdigit(static_cast<unsigned char>(src_[pos_])))
                throw ParseError("non-integer exponent", at);
            long k = 0;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                k = k * 10 + (src_[pos_] - '0');
                if (k > 1000000) throw ParseError("exponent too large", at);
                ++pos_;
            }
            if (pos_ < src_.size() && (src_[pos_] == '.' || src_[pos_] == 'e' || src_[pos_] == 'E'))
                throw ParseError("non-integer exponent", at);
            auto n = std::make_shared<ExprNode>();
            n->kind = ExprKind::Pow;
            n->exponent = k;
            n->lhs = e;
            e = n;
        }
        return e;
    }

    ExprPtr atom() {
        skip_ws();
        const std::size_t at = pos_;
        if (pos_ >= src_.size())
            throw ParseError("expected operand", at);
        const char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            ExprPtr e = sum();
            if (!accept(')'))
                throw ParseError("expected ')'", pos_);
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number(at);
        if (std::isalpha(static_cast<unsigned char>(c))) return identifier(at);
        throw ParseError(std::string("unexpected character '") + c + "'", at);
    }

    ExprPtr number(std::size_t at) {
        std::size_t end = pos_;
        while (end < src_.size() &&
               (std::isdigit(static_cast<unsigned char>(src_[end])) || src_[end] == '.'))
            ++end;
        if (end < src_.size() && (src_[end] == 'e' || src_[end] == 'E')) {
            std::size_t m = end + 1;
            if (m < src_.size() && (src_[m] == '+' || src_[m] == '-')) ++m;
            std::size_t digits = m;
            while (digits < src_.size() && std::isdigit(static_cast<unsigned char>(src_[digits]))) ++digits;
            if (digits > m) end = digits;
        }
        const std::string text(src_.substr(at, end - at));
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(text, &used);
        } catch (const std::exception&) {
            throw ParseError("malformed number", at);
        }
        if (used != text.size())
            throw ParseError("malformed number", at);
        pos_ = end;
        auto n = std::make_shared<ExprNode>();
        n->kind = ExprKind::Constant;
        n->value = v;
        return n;
    }

    ExprPtr identifier(std::size_t at) {
        std::size_t end = pos_;
        while (end < src_.size() && std::isalpha(static_cast<unsigned char>(src_[end]))) ++end;
        const std::string name(src_.substr(at, end - at));
        pos_ = end;
        if (name == "x") {
            auto n = std::make_shared<ExprNode>();
            n->kind = ExprKind::Variable;
            return n;
        }
        ExprFunc f;
        if (name == "exp") f = ExprFunc::Exp;
        else if (name == "sin") f = ExprFunc::Sin;
        else if (name == "cos") f = ExprFunc::Cos;
        else if (name == "cosh") f = ExprFunc::Cosh;
        else throw ParseError("unknown identifier '" + name + "'", at);
        if (!accept('('))
            throw ParseError("expected '(' after function name", pos_);
        ExprPtr arg = sum();
        if (!accept(')'))
            throw ParseError("expected ')'", pos_);
        auto n = std::make_shared<ExprNode>();
        n->kind = ExprKind::Call;
        n->func = f;
        n->lhs = arg;
        return n;
    }
};

inline void print_node(const ExprNode& n, std::string& out) {
    switch (n.kind) {
    case ExprKind::Constant: {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", n.value);
        out += buf;
        break;
    }
    case ExprKind::Variable: out += 'x'; break;
    case ExprKind::Add:
    case ExprKind::Sub:
    case ExprKind::Mul:
    case ExprKind::Div: {
        const char op = n.kind == ExprKind::Add ? '+'
                      : n.kind == ExprKind::Sub ? '-'
                      : n.kind == ExprKind::Mul ? '*' : '/';
        out += '(';
        print_node(*n.lhs, out);
        out += op;
        print_node(*n.rhs, out);
        out += ')';
        break;
    }
    case ExprKind::Pow:
        out += '(';
        print_node(*n.lhs, out);
        out += '^';
        out += std::to_string(n.exponent);
        out += ')';
        break;
    case ExprKind::Neg:
        out += "(-";
        print_node(*n.lhs, out);
        out += ')';
        break;
    case ExprKind::Call:
        switch (n.func) {
        case ExprFunc::Exp: out += "exp("; break;
        case ExprFunc::Sin: out += "sin("; break;
        case ExprFunc::Cos: out += "cos("; break;
        case ExprFunc::Cosh: out += "cosh("; break;
        }
        print_node(*n.lhs, out);
        out += ')';
        break;
    }
}

} // namespace detail

inline ExprAst parse_expr(std::string_view src) {
    return ExprAst(detail::Parser(src).parse());
}

// (phi, phi', phi'') at x, exact to rounding.  Division by zero and overflow
// surface as non-finite components; callers check Dual2::finite().
inline Dual2 eval_d2(const ExprAst& ast, double x) {
    return detail::eval_node(ast.root(), x);
}

inline double eval_value(const ExprAst& ast, double x) {
    return detail::eval_value_node(ast.root(), x);
}

inline std::string to_string(const ExprAst& ast) {
    std::string out;
    detail::print_node(ast.root(), out);
    return out;
}

inline bool ast_equal(const ExprNode& a, const ExprNode& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
    case ExprKind::Constant: return a.value == b.value;
    case ExprKind::Variable: return true;
    case ExprKind::Pow: return a.exponent == b.exponent && ast_equal(*a.lhs, *b.lhs);
    case ExprKind::Neg: return ast_equal(*a.lhs, *b.lhs);
    case ExprKind::Call: return a.func == b.func && ast_equal(*a.lhs, *b.lhs);
    default: return ast_equal(*a.lhs, *b.lhs) && ast_equal(*a.rhs, *b.rhs);
    }
}

} // namespace ksw
