#include "gfc/funcexpr.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>

#include "gfc/specfun.hpp"

namespace gfc::expr {

namespace {

ExprPtr make(NodeKind kind, double value, CallFn fn, ExprPtr a, ExprPtr b) {
    auto n = std::make_shared<Node>();
    n->kind = kind;
    n->value = value;
    n->fn = fn;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

ExprPtr constant(double v) { return make(NodeKind::Constant, v, CallFn::Exp, nullptr, nullptr); }
ExprPtr variable() { return make(NodeKind::Variable, 0.0, CallFn::Exp, nullptr, nullptr); }

bool is_const(const ExprPtr& n, double v) {
    return n->kind == NodeKind::Constant && n->value == v;
}

// Smart constructors: constant folding plus zero/one elimination.
ExprPtr mk_neg(ExprPtr a) {
    if (a->kind == NodeKind::Constant) return constant(-a->value);
    if (a->kind == NodeKind::Neg) return a->a;
    return make(NodeKind::Neg, 0.0, CallFn::Exp, std::move(a), nullptr);
}

ExprPtr mk_add(ExprPtr a, ExprPtr b) {
    if (a->kind == NodeKind::Constant && b->kind == NodeKind::Constant)
        return constant(a->value + b->value);
    if (is_const(a, 0.0)) return b;
    if (is_const(b, 0.0)) return a;
    return make(NodeKind::Add, 0.0, CallFn::Exp, std::move(a), std::move(b));
}

ExprPtr mk_sub(ExprPtr a, ExprPtr b) {
    if (a->kind == NodeKind::Constant && b->kind == NodeKind::Constant)
        return constant(a->value - b->value);
    if (is_const(b, 0.0)) return a;
    if (is_const(a, 0.0)) return mk_neg(std::move(b));
    return make(NodeKind::Sub, 0.0, CallFn::Exp, std::move(a), std::move(b));
}

ExprPtr mk_mul(ExprPtr a, ExprPtr b) {
    if (a->kind == NodeKind::Constant && b->kind == NodeKind::Constant)
        return constant(a->value * b->value);
    if (is_const(a, 0.0) || is_const(b, 0.0)) return constant(0.0);
    if (is_const(a, 1.0)) return b;
    if (is_const(b, 1.0)) return a;
    return make(NodeKind::Mul, 0.0, CallFn::Exp, std::move(a), std::move(b));
}

ExprPtr mk_div(ExprPtr a, ExprPtr b) {
    if (a->kind == NodeKind::Constant && b->kind == NodeKind::Constant && b->value != 0.0)
        return constant(a->value / b->value);
    if (is_const(a, 0.0)) return constant(0.0);
    if (is_const(b, 1.0)) return a;
    return make(NodeKind::Div, 0.0, CallFn::Exp, std::move(a), std::move(b));
}

ExprPtr mk_pow(ExprPtr base, double e) {
    if (e == 0.0) return constant(1.0);
    if (e == 1.0) return base;
    if (base->kind == NodeKind::Constant) {
        const double r = std::pow(base->value, e);
        if (std::isfinite(r)) return constant(r);
        // fall through so evaluation reports the domain violation
    }
    return make(NodeKind::Pow, e, CallFn::Exp, std::move(base), nullptr);
}

ExprPtr mk_call(CallFn fn, ExprPtr arg) {
    return make(NodeKind::Call, 0.0, fn, std::move(arg), nullptr);
}

ExprPtr mk_h(double alpha) { return make(NodeKind::Call, alpha, CallFn::H, nullptr, nullptr); }

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    ExprPtr parse() {
        ExprPtr ast = parse_sum(0);
        skip_ws();
        if (pos_ != text_.size()) {
            throw SyntaxError(pos_, "operator or end of input");
        }
        return ast;
    }

private:
    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    // Recursion guard only; the tree limits (depth 64, 10000 nodes) are
    // enforced on the finished AST, where folding and parentheses have
    // already collapsed.
    void check_depth(int depth) {
        if (depth > 400) throw DepthError("parse: expression nesting is too deep");
    }

    ExprPtr parse_sum(int depth) {
        check_depth(depth);
        ExprPtr lhs = parse_term(depth + 1);
        for (;;) {
            if (eat('+')) {
                lhs = mk_add(std::move(lhs), parse_term(depth + 1));
            } else if (eat('-')) {
                lhs = mk_sub(std::move(lhs), parse_term(depth + 1));
            } else {
                return lhs;
            }
        }
    }

    ExprPtr parse_term(int depth) {
        check_depth(depth);
        ExprPtr lhs = parse_unary(depth + 1);
        for (;;) {
            if (eat('*')) {
                lhs = mk_mul(std::move(lhs), parse_unary(depth + 1));
            } else if (eat('/')) {
                lhs = mk_div(std::move(lhs), parse_unary(depth + 1));
            } else {
                return lhs;
            }
        }
    }

    ExprPtr parse_unary(int depth) {
        check_depth(depth);
        if (eat('-')) {
            return mk_neg(parse_unary(depth + 1));
        }
        return parse_power(depth + 1);
    }

    ExprPtr parse_power(int depth) {
        check_depth(depth);
        ExprPtr base = parse_primary(depth + 1);
        if (!eat('^')) {
            return base;
        }
        skip_ws();
        const std::size_t exp_at = pos_;
        ExprPtr e = parse_unary(depth + 1);  // right-associative
        if (contains_variable(e)) {
            throw SyntaxError(exp_at, "constant exponent");
        }
        return mk_pow(std::move(base), eval_expr(e, 0.0));
    }

    ExprPtr parse_primary(int depth) {
        check_depth(depth);
        skip_ws();
        if (pos_ >= text_.size()) {
            throw SyntaxError(pos_, "number, 't', function call, or '('");
        }
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            ExprPtr inner = parse_sum(depth + 1);
            if (!eat(')')) throw SyntaxError(pos_, "')'");
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            return parse_number();
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            return parse_name(depth);
        }
        throw SyntaxError(pos_, "number, 't', function call, or '('");
    }

    ExprPtr parse_number() {
        double v = 0.0;
        const char* first = text_.data() + pos_;
        const char* last = text_.data() + text_.size();
        auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc{} || ptr == first) {
            throw SyntaxError(pos_, "numeric literal");
        }
        pos_ = static_cast<std::size_t>(ptr - text_.data());
        return constant(v);
    }

    ExprPtr parse_name(int depth) {
        const std::size_t start = pos_;
        while (pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        const std::string_view name = text_.substr(start, pos_ - start);
        if (name == "t") {
            return variable();
        }
        CallFn fn;
        if (name == "exp") fn = CallFn::Exp;
        else if (name == "sin") fn = CallFn::Sin;
        else if (name == "cos") fn = CallFn::Cos;
        else if (name == "sqrt") fn = CallFn::Sqrt;
        else if (name == "log") fn = CallFn::Log;
        else if (name == "h") fn = CallFn::H;
        else throw SyntaxError(start, "'t' or one of exp, sin, cos, sqrt, log, h");

        if (!eat('(')) throw SyntaxError(pos_, "'(' after function name");
        skip_ws();
        const std::size_t arg_at = pos_;
        ExprPtr arg = parse_sum(depth + 1);
        if (!eat(')')) throw SyntaxError(pos_, "')'");
        if (fn == CallFn::H) {
            if (contains_variable(arg)) {
                throw SyntaxError(arg_at, "constant parameter of h(...)");
            }
            return mk_h(eval_expr(arg, 0.0));
        }
        return mk_call(fn, std::move(arg));
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

}  // namespace

ExprPtr parse_expr(std::string_view text) {
    if (text.empty()) {
        throw SyntaxError(0, "nonempty expression");
    }
    if (text.size() > 64 * 1024) {
        throw DomainError("parse_expr: expression text exceeds 64 KiB");
    }
    ExprPtr ast = Parser(text).parse();
    if (node_count(ast) > kMaxNodes) {
        throw DepthError("parse: expression exceeds 10000 nodes");
    }
    if (depth(ast) > kMaxDepth) {
        throw DepthError("parse: expression tree exceeds depth 64");
    }
    return ast;
}

double eval_expr(const ExprPtr& ast, double t) {
    if (!ast) throw DomainError("eval_expr: null expression");
    if (!(t >= 0.0)) throw DomainError("eval_expr: t must be nonnegative");
    switch (ast->kind) {
        case NodeKind::Constant:
            return ast->value;
        case NodeKind::Variable:
            return t;
        case NodeKind::Add:
            return eval_expr(ast->a, t) + eval_expr(ast->b, t);
        case NodeKind::Sub:
            return eval_expr(ast->a, t) - eval_expr(ast->b, t);
        case NodeKind::Mul:
            return eval_expr(ast->a, t) * eval_expr(ast->b, t);
        case NodeKind::Div: {
            const double denom = eval_expr(ast->b, t);
            if (denom == 0.0) throw DomainError("eval_expr: division by zero");
            return eval_expr(ast->a, t) / denom;
        }
        case NodeKind::Pow: {
            const double base = eval_expr(ast->a, t);
            const double e = ast->value;
            if (base == 0.0 && e < 0.0) {
                throw DomainError("eval_expr: negative power of zero");
            }
            if (base < 0.0 && e != std::floor(e)) {
                throw DomainError("eval_expr: non-integer power of a negative base");
            }
            return std::pow(base, e);
        }
        case NodeKind::Neg:
            return -eval_expr(ast->a, t);
        case NodeKind::Call:
            switch (ast->fn) {
                case CallFn::Exp:
                    return std::exp(eval_expr(ast->a, t));
                case CallFn::Sin:
                    return std::sin(eval_expr(ast->a, t));
                case CallFn::Cos:
                    return std::cos(eval_expr(ast->a, t));
                case CallFn::Sqrt: {
                    const double v = eval_expr(ast->a, t);
                    if (v < 0.0) throw DomainError("eval_expr: sqrt of a negative value");
                    return std::sqrt(v);
                }
                case CallFn::Log: {
                    const double v = eval_expr(ast->a, t);
                    if (v <= 0.0) throw DomainError("eval_expr: log of a nonpositive value");
                    return std::log(v);
                }
                case CallFn::H: {
                    const double c = specfun::reciprocal_gamma(ast->value);
                    if (c == 0.0) return 0.0;  // h_alpha vanishes at Gamma poles
                    const double e = ast->value - 1.0;
                    if (t == 0.0) {
                        if (e < 0.0) throw DomainError("eval_expr: h(alpha) singular at t = 0");
                        return e == 0.0 ? c : 0.0;
                    }
                    return c * std::pow(t, e);
                }
            }
    }
    throw DomainError("eval_expr: corrupt expression node");
}

namespace {

ExprPtr diff_once(const ExprPtr& n) {
    switch (n->kind) {
        case NodeKind::Constant:
            return constant(0.0);
        case NodeKind::Variable:
            return constant(1.0);
        case NodeKind::Add:
            return mk_add(diff_once(n->a), diff_once(n->b));
        case NodeKind::Sub:
            return mk_sub(diff_once(n->a), diff_once(n->b));
        case NodeKind::Mul:
            return mk_add(mk_mul(diff_once(n->a), n->b), mk_mul(n->a, diff_once(n->b)));
        case NodeKind::Div:
            // (u'v - uv') / v^2
            return mk_div(mk_sub(mk_mul(diff_once(n->a), n->b), mk_mul(n->a, diff_once(n->b))),
                          mk_pow(n->b, 2.0));
        case NodeKind::Pow:
            // c * u^{c-1} * u'
            return mk_mul(mk_mul(constant(n->value), mk_pow(n->a, n->value - 1.0)),
                          diff_once(n->a));
        case NodeKind::Neg:
            return mk_neg(diff_once(n->a));
        case NodeKind::Call:
            switch (n->fn) {
                case CallFn::Exp:
                    return mk_mul(mk_call(CallFn::Exp, n->a), diff_once(n->a));
                case CallFn::Sin:
                    return mk_mul(mk_call(CallFn::Cos, n->a), diff_once(n->a));
                case CallFn::Cos:
                    return mk_neg(mk_mul(mk_call(CallFn::Sin, n->a), diff_once(n->a)));
                case CallFn::Sqrt:
                    return mk_div(diff_once(n->a),
                                  mk_mul(constant(2.0), mk_call(CallFn::Sqrt, n->a)));
                case CallFn::Log:
                    return mk_div(diff_once(n->a), n->a);
                case CallFn::H:
                    // d/dt h_alpha = h_{alpha-1}
                    return mk_h(n->value - 1.0);
            }
    }
    throw DomainError("diff_expr: corrupt expression node");
}

}  // namespace

ExprPtr diff_expr(const ExprPtr& ast, int order) {
    if (!ast) throw DomainError("diff_expr: null expression");
    if (order < 1 || order > kMaxDerivativeOrder) {
        throw DomainError("diff_expr: order must lie in 1..8");
    }
    ExprPtr d = ast;
    for (int i = 0; i < order; ++i) {
        d = diff_once(d);
        if (node_count(d) > kMaxNodes) {
            throw DepthError("diff_expr: derivative exceeds the 10000-node budget");
        }
    }
    return d;
}

double value_at_zero(const ExprPtr& ast, int order) {
    if (order < 0 || order > kMaxDerivativeOrder) {
        throw DomainError("value_at_zero: order must lie in 0..8");
    }
    const ExprPtr d = order == 0 ? ast : diff_expr(ast, order);
    constexpr double probes[3] = {1e-9, 1e-10, 1e-11};
    double v[3];
    for (int i = 0; i < 3; ++i) {
        try {
            v[i] = eval_expr(d, probes[i]);
        } catch (const DomainError&) {
            throw SingularAtZeroError("value_at_zero: derivative undefined near t = 0");
        }
        if (!std::isfinite(v[i])) {
            throw SingularAtZeroError("value_at_zero: derivative diverges near t = 0");
        }
    }
    const double lo = std::min({v[0], v[1], v[2]});
    const double hi = std::max({v[0], v[1], v[2]});
    const double scale = std::max({1.0, std::fabs(v[0]), std::fabs(v[1]), std::fabs(v[2])});
    if (hi - lo > 1e-6 * scale) {
        throw SingularAtZeroError("value_at_zero: probes at 1e-9..1e-11 disagree beyond 1e-6");
    }
    // One Richardson step on the two smallest probes (ratio 10).
    return (10.0 * v[2] - v[1]) / 9.0;
}

namespace {

int precedence(const Node& n) {
    switch (n.kind) {
        case NodeKind::Add:
        case NodeKind::Sub:
            return 1;
        case NodeKind::Mul:
        case NodeKind::Div:
            return 2;
        case NodeKind::Neg:
            return 3;
        case NodeKind::Pow:
            return 4;
        default:
            return 5;
    }
}

void format_double(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
}

void print_node(std::string& out, const ExprPtr& n, int min_prec) {
    const int prec = precedence(*n);
    const bool parens = prec < min_prec;
    if (parens) out += '(';
    switch (n->kind) {
        case NodeKind::Constant:
            format_double(out, n->value);
            break;
        case NodeKind::Variable:
            out += 't';
            break;
        case NodeKind::Add:
            print_node(out, n->a, 1);
            out += '+';
            print_node(out, n->b, 2);
            break;
        case NodeKind::Sub:
            print_node(out, n->a, 1);
            out += '-';
            print_node(out, n->b, 2);
            break;
        case NodeKind::Mul:
            print_node(out, n->a, 2);
            out += '*';
            print_node(out, n->b, 3);
            break;
        case NodeKind::Div:
            print_node(out, n->a, 2);
            out += '/';
            print_node(out, n->b, 3);
            break;
        case NodeKind::Neg:
            out += '-';
            print_node(out, n->a, 3);
            break;
        case NodeKind::Pow:
            print_node(out, n->a, 5);
            out += '^';
            format_double(out, n->value);
            break;
        case NodeKind::Call:
            switch (n->fn) {
                case CallFn::Exp: out += "exp("; break;
                case CallFn::Sin: out += "sin("; break;
                case CallFn::Cos: out += "cos("; break;
                case CallFn::Sqrt: out += "sqrt("; break;
                case CallFn::Log: out += "log("; break;
                case CallFn::H: out += "h("; break;
            }
            if (n->fn == CallFn::H) {
                format_double(out, n->value);
            } else {
                print_node(out, n->a, 1);
            }
            out += ')';
            break;
    }
    if (parens) out += ')';
}

}  // namespace

std::string to_string(const ExprPtr& ast) {
    if (!ast) return "0";
    std::string out;
    print_node(out, ast, 1);
    return out;
}

std::size_t node_count(const ExprPtr& ast) {
    if (!ast) return 0;
    return 1 + node_count(ast->a) + node_count(ast->b);
}

int depth(const ExprPtr& ast) {
    if (!ast) return 0;
    return 1 + std::max(depth(ast->a), depth(ast->b));
}

bool contains_variable(const ExprPtr& ast) {
    if (!ast) return false;
    if (ast->kind == NodeKind::Variable) return true;
    return contains_variable(ast->a) || contains_variable(ast->b);
}

FunctionInput FunctionInput::from_expression(std::string_view text) {
    FunctionInput f;
    f.ast_ = parse_expr(text);
    return f;
}

FunctionInput FunctionInput::from_ast(ExprPtr ast) {
    if (!ast) throw DomainError("FunctionInput: null expression");
    FunctionInput f;
    f.ast_ = std::move(ast);
    return f;
}

FunctionInput FunctionInput::from_series(series::ExponentSumSeries s) {
    FunctionInput f;
    f.series_ = std::move(s);
    return f;
}

const series::ExponentSumSeries& FunctionInput::series_value() const {
    if (!series_) throw DomainError("FunctionInput: not a series input");
    return *series_;
}

const ExprPtr& FunctionInput::ast() const {
    if (!ast_) throw DomainError("FunctionInput: not an expression input");
    return ast_;
}

ExprPtr FunctionInput::derivative(int order) const {
    if (!ast_) throw DomainError("FunctionInput: derivatives require an expression input");
    if (order < 0 || order > kMaxDerivativeOrder) {
        throw DomainError("FunctionInput: derivative order must lie in 0..8");
    }
    if (deriv_cache_.empty()) deriv_cache_.push_back(ast_);
    while (static_cast<int>(deriv_cache_.size()) <= order) {
        deriv_cache_.push_back(diff_expr(deriv_cache_.back(), 1));
    }
    return deriv_cache_[static_cast<std::size_t>(order)];
}

double FunctionInput::eval(double t) const {
    if (series_) return series_->evaluate(t);
    return eval_expr(ast_, t);
}

std::string FunctionInput::description() const {
    if (series_) return "series(" + std::to_string(series_->size()) + " terms)";
    return to_string(ast_);
}

}  // namespace gfc::expr
