#include "qstab/expr.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <optional>

#include "qstab/error.hpp"

namespace qstab {

namespace {

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

const std::vector<std::string> kOperandStart = {"a", "ad", "n", "id", "number", "identifier", "dag", "(", "-"};

// End of an unsigned real literal starting at pos, if there is one.
std::optional<std::size_t> scan_real(std::string_view s, std::size_t pos) {
    std::size_t p = pos;
    std::size_t digits = 0;
    while (p < s.size() && is_digit(s[p])) ++p, ++digits;
    if (p < s.size() && s[p] == '.') {
        ++p;
        while (p < s.size() && is_digit(s[p])) ++p, ++digits;
    }
    if (digits == 0) return std::nullopt;
    if (p < s.size() && (s[p] == 'e' || s[p] == 'E')) {
        std::size_t q = p + 1;
        if (q < s.size() && (s[q] == '+' || s[q] == '-')) ++q;
        if (q < s.size() && is_digit(s[q])) {
            while (q < s.size() && is_digit(s[q])) ++q;
            p = q;
        }
    }
    return p;
}

double to_double(std::string_view s) {
    double x = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw ParseError("malformed number '" + std::string(s) + "'", 0, {"number"});
    }
    return x;
}

bool imag_suffix_at(std::string_view s, std::size_t p) {
    return p < s.size() && s[p] == 'i' && !(p + 1 < s.size() && is_ident_char(s[p + 1]));
}

struct NumberToken {
    cplx value;
    std::size_t end = 0;
    bool two_part = false;
};

// Real, imaginary or `RE+IMi` literal at pos (no sign on the real part).
std::optional<NumberToken> scan_number(std::string_view s, std::size_t pos) {
    const auto end1 = scan_real(s, pos);
    if (!end1) return std::nullopt;
    const double first = to_double(s.substr(pos, *end1 - pos));
    if (imag_suffix_at(s, *end1)) return NumberToken{{0.0, first}, *end1 + 1, false};
    if (*end1 < s.size() && (s[*end1] == '+' || s[*end1] == '-')) {
        if (const auto end2 = scan_real(s, *end1 + 1); end2 && imag_suffix_at(s, *end2)) {
            double im = to_double(s.substr(*end1 + 1, *end2 - *end1 - 1));
            if (s[*end1] == '-') im = -im;
            return NumberToken{{first, im}, *end2 + 1, true};
        }
    }
    return NumberToken{{first, 0.0}, *end1, false};
}

Expr leaf(ExprKind k) {
    Expr e;
    e.kind = k;
    return e;
}

Expr node(ExprKind k, std::vector<Expr> args) {
    Expr e;
    e.kind = k;
    e.args = std::move(args);
    return e;
}

class Parser {
public:
    Parser(std::string_view text, const ParamMap* params) : s_(text), params_(params) {}

    Expr parse() {
        Expr e = expr();
        skip_ws();
        if (pos_ != s_.size()) fail("unexpected character", {"+", "-", "*", "^", "end of input"});
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& what, std::vector<std::string> expected) const {
        std::string msg = what + " at offset " + std::to_string(pos_) + "; expected one of:";
        for (const auto& t : expected) msg += " '" + t + "'";
        throw ParseError(msg, pos_, std::move(expected));
    }

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    Expr expr() {
        Expr lhs = term();
        for (;;) {
            if (accept('+')) {
                lhs = node(ExprKind::add, {std::move(lhs), term()});
            } else if (accept('-')) {
                lhs = node(ExprKind::sub, {std::move(lhs), term()});
            } else {
                return lhs;
            }
        }
    }

    Expr term() {
        Expr lhs = unary();
        while (accept('*')) lhs = node(ExprKind::mul, {std::move(lhs), unary()});
        return lhs;
    }

    Expr unary() {
        if (accept('-')) {
            // `-1+2i` written without spaces is one literal with a negative real part.
            if (auto num = scan_number(s_, pos_); num && num->two_part) {
                std::size_t after = num->end;
                while (after < s_.size() && std::isspace(static_cast<unsigned char>(s_[after]))) ++after;
                if (after >= s_.size() || s_[after] != '^') {
                    pos_ = num->end;
                    Expr e = leaf(ExprKind::literal);
                    e.value = {-num->value.real(), num->value.imag()};
                    return e;
                }
            }
            return node(ExprKind::neg, {unary()});
        }
        return power();
    }

    Expr power() {
        Expr base = primary();
        while (accept('^')) {
            skip_ws();
            const std::size_t start = pos_;
            while (pos_ < s_.size() && is_digit(s_[pos_])) ++pos_;
            if (pos_ == start || (pos_ < s_.size() && (s_[pos_] == '.' || is_ident_char(s_[pos_])))) {
                pos_ = start;
                fail("exponent must be a non-negative integer", {"integer"});
            }
            int n = 0;
            const auto res = std::from_chars(s_.data() + start, s_.data() + pos_, n);
            if (res.ec != std::errc() || n > 4096) {
                pos_ = start;
                fail("exponent out of range", {"integer"});
            }
            Expr p = node(ExprKind::pow, {std::move(base)});
            p.exponent = n;
            base = std::move(p);
        }
        return base;
    }

    Expr primary() {
        skip_ws();
        if (pos_ >= s_.size()) fail("unexpected end of input", kOperandStart);
        const char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            Expr e = expr();
            if (!accept(')')) fail("unbalanced parenthesis", {"+", "-", "*", "^", ")"});
            return e;
        }
        if (is_digit(c) || c == '.') {
            const auto num = scan_number(s_, pos_);
            if (!num) fail("malformed number", {"number"});
            pos_ = num->end;
            Expr e = leaf(ExprKind::literal);
            e.value = num->value;
            return e;
        }
        if (is_ident_start(c)) {
            const std::size_t start = pos_;
            while (pos_ < s_.size() && is_ident_char(s_[pos_])) ++pos_;
            const std::string name(s_.substr(start, pos_ - start));
            if (name == "a") return leaf(ExprKind::a);
            if (name == "ad") return leaf(ExprKind::ad);
            if (name == "n") return leaf(ExprKind::n);
            if (name == "id") return leaf(ExprKind::id);
            if (name == "dag") {
                if (!accept('(')) fail("dag requires parentheses", {"("});
                Expr inner = expr();
                if (!accept(')')) fail("unbalanced parenthesis", {"+", "-", "*", "^", ")"});
                return node(ExprKind::dag, {std::move(inner)});
            }
            if (params_ && !params_->count(name)) {
                std::vector<std::string> known;
                for (const auto& [k, v] : *params_) known.push_back(k);
                throw UnknownIdentifier(name, start, std::move(known));
            }
            Expr e = leaf(ExprKind::param);
            e.name = name;
            return e;
        }
        fail("unexpected character", kOperandStart);
    }

    std::string_view s_;
    const ParamMap* params_;
    std::size_t pos_ = 0;
};

struct Value {
    bool scalar = true;
    cplx s{};
    Operator m;
};

Operator as_operator(const Value& v, int dim) {
    return v.scalar ? Operator(v.s * identity_op(dim)) : v.m;
}

Value op_value(Operator m) {
    Value v;
    v.scalar = false;
    v.m = std::move(m);
    return v;
}

Value eval(const Expr& e, int dim, const ParamMap& params) {
    switch (e.kind) {
        case ExprKind::a: return op_value(annihilation_op(dim));
        case ExprKind::ad: return op_value(creation_op(dim));
        case ExprKind::n: return op_value(number_op(dim));
        case ExprKind::id: return op_value(identity_op(dim));
        case ExprKind::literal: return Value{true, e.value, {}};
        case ExprKind::param: {
            const auto it = params.find(e.name);
            if (it == params.end()) {
                std::vector<std::string> known;
                for (const auto& [k, v] : params) known.push_back(k);
                throw UnknownIdentifier(e.name, 0, std::move(known));
            }
            return Value{true, it->second, {}};
        }
        case ExprKind::neg: {
            Value v = eval(e.args[0], dim, params);
            if (v.scalar) return Value{true, -v.s, {}};
            return op_value(-v.m);
        }
        case ExprKind::dag: {
            Value v = eval(e.args[0], dim, params);
            if (v.scalar) return Value{true, std::conj(v.s), {}};
            return op_value(v.m.adjoint());
        }
        case ExprKind::pow: {
            Value base = eval(e.args[0], dim, params);
            if (base.scalar) return Value{true, std::pow(base.s, e.exponent), {}};
            Operator result = identity_op(dim);
            Operator sq = base.m;
            for (int k = e.exponent; k > 0; k >>= 1) {
                if (k & 1) result = result * sq;
                if (k > 1) sq = sq * sq;
            }
            return op_value(std::move(result));
        }
        case ExprKind::add:
        case ExprKind::sub:
        case ExprKind::mul: {
            const Value l = eval(e.args[0], dim, params);
            const Value r = eval(e.args[1], dim, params);
            if (l.scalar && r.scalar) {
                if (e.kind == ExprKind::add) return Value{true, l.s + r.s, {}};
                if (e.kind == ExprKind::sub) return Value{true, l.s - r.s, {}};
                return Value{true, l.s * r.s, {}};
            }
            if (e.kind == ExprKind::mul) {
                if (l.scalar) return op_value(l.s * r.m);
                if (r.scalar) return op_value(l.m * r.s);
                return op_value(l.m * r.m);
            }
            Operator lm = as_operator(l, dim);
            const Operator rm = as_operator(r, dim);
            if (e.kind == ExprKind::add) lm += rm;
            else lm -= rm;
            return op_value(std::move(lm));
        }
    }
    throw InvalidArgument("corrupt expression node");
}

std::string real_text(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

}  // namespace

Expr parse_expr(std::string_view text, const ParamMap* params) {
    return Parser(text, params).parse();
}

std::string format_double(double x) { return real_text(x); }

std::string format_complex(cplx z) {
    std::string out = std::signbit(z.real()) ? "-" + real_text(-z.real()) : real_text(z.real());
    out += std::signbit(z.imag()) ? '-' : '+';
    out += real_text(std::abs(z.imag()));
    out += 'i';
    return out;
}

std::string print_expr(const Expr& e) {
    switch (e.kind) {
        case ExprKind::a: return "a";
        case ExprKind::ad: return "ad";
        case ExprKind::n: return "n";
        case ExprKind::id: return "id";
        case ExprKind::literal:
            return std::signbit(e.value.real()) ? "(" + format_complex(e.value) + ")" : format_complex(e.value);
        case ExprKind::param: return e.name;
        case ExprKind::neg: return "(- " + print_expr(e.args[0]) + ")";
        case ExprKind::dag: return "dag(" + print_expr(e.args[0]) + ")";
        case ExprKind::pow: return "(" + print_expr(e.args[0]) + "^" + std::to_string(e.exponent) + ")";
        case ExprKind::add: return "(" + print_expr(e.args[0]) + " + " + print_expr(e.args[1]) + ")";
        case ExprKind::sub: return "(" + print_expr(e.args[0]) + " - " + print_expr(e.args[1]) + ")";
        case ExprKind::mul: return "(" + print_expr(e.args[0]) + " * " + print_expr(e.args[1]) + ")";
    }
    return {};
}

Operator evaluate(const Expr& e, int dim, const ParamMap& params) {
    if (dim < 1) throw InvalidDimension("dimension must be positive");
    return as_operator(eval(e, dim, params), dim);
}

int ladder_degree(const Expr& e) {
    switch (e.kind) {
        case ExprKind::a:
        case ExprKind::ad: return 1;
        case ExprKind::neg:
        case ExprKind::dag: return ladder_degree(e.args[0]);
        case ExprKind::pow: return ladder_degree(e.args[0]) * e.exponent;
        case ExprKind::add:
        case ExprKind::sub: return std::max(ladder_degree(e.args[0]), ladder_degree(e.args[1]));
        case ExprKind::mul: return ladder_degree(e.args[0]) + ladder_degree(e.args[1]);
        default: return 0;
    }
}

cplx parse_complex(std::string_view text) {
    std::size_t pos = 0;
    bool negative = false;
    if (!text.empty() && (text[0] == '-' || text[0] == '+')) {
        negative = text[0] == '-';
        pos = 1;
    }
    const auto num = scan_number(text, pos);
    if (!num || num->end != text.size()) {
        throw ParseError("malformed complex number '" + std::string(text) + "'", num ? num->end : pos,
                         {"RE+IMi"});
    }
    cplx z = num->value;
    if (negative) z = num->two_part ? cplx(-z.real(), z.imag()) : -z;
    return z;
}

}  // namespace qstab
