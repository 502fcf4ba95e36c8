#pragma once

#include <charconv>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include "currents/expression.hpp"

namespace currents {

struct SexprError : std::runtime_error {
    std::size_t position;
    SexprError(const std::string& msg, std::size_t pos)
        : std::runtime_error(msg + " (at offset " + std::to_string(pos) + ")"), position(pos) {}
};

namespace detail {

inline std::string format_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline void write_sexpr(const NodePtr& n, std::string& out) {
    switch (n->op) {
        case Op::Lit:
            if (n->lit.imag() == 0.0) {
                out += format_double(n->lit.real());
            } else {
                out += "(complex ";
                out += format_double(n->lit.real());
                out += ' ';
                out += format_double(n->lit.imag());
                out += ')';
            }
            return;
        case Op::Param:
            out += 'u';
            out += std::to_string(n->aux + 1);
            return;
        default: break;
    }
    auto binary = [&](const char* name) {
        out += '(';
        out += name;
        out += ' ';
        write_sexpr(n->a, out);
        out += ' ';
        write_sexpr(n->b, out);
        out += ')';
    };
    auto unary = [&](const char* name) {
        out += '(';
        out += name;
        out += ' ';
        write_sexpr(n->a, out);
        out += ')';
    };
    switch (n->op) {
        case Op::Add: binary("+"); break;
        case Op::Sub: binary("-"); break;
        case Op::Mul: binary("*"); break;
        case Op::Div: binary("/"); break;
        case Op::Neg: unary("-"); break;
        case Op::Conj: unary("conj"); break;
        case Op::Re: unary("re"); break;
        case Op::Im: unary("im"); break;
        case Op::Exp: unary("exp"); break;
        case Op::Sin: unary("sin"); break;
        case Op::Cos: unary("cos"); break;
        case Op::Pow:
            out += "(pow ";
            write_sexpr(n->a, out);
            out += ' ';
            out += std::to_string(n->aux);
            out += ')';
            break;
        default: break;
    }
}

class SexprParser {
public:
    explicit SexprParser(std::string_view text) : text_(text) {}

    Expr parse() {
        Expr e = parse_expr();
        skip_ws();
        if (pos_ != text_.size()) throw SexprError("trailing characters after expression", pos_);
        return e;
    }

private:
    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    char peek() {
        skip_ws();
        if (pos_ >= text_.size()) throw SexprError("unexpected end of input", pos_);
        return text_[pos_];
    }

    std::string_view token() {
        skip_ws();
        std::size_t start = pos_;
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == '(' || c == ')' || std::isspace(static_cast<unsigned char>(c))) break;
            ++pos_;
        }
        if (start == pos_) throw SexprError("expected a token", pos_);
        return text_.substr(start, pos_ - start);
    }

    double parse_number(std::string_view tok, std::size_t at) {
        double v = 0.0;
        auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
            throw SexprError("malformed number '" + std::string(tok) + "'", at);
        return v;
    }

    int parse_int(std::string_view tok, std::size_t at) {
        int v = 0;
        auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
            throw SexprError("malformed integer '" + std::string(tok) + "'", at);
        return v;
    }

    Expr parse_expr() {
        char c = peek();
        if (c != '(') {
            std::size_t at = pos_;
            std::string_view tok = token();
            if (tok.size() >= 2 && tok[0] == 'u' &&
                std::isdigit(static_cast<unsigned char>(tok[1]))) {
                int idx = parse_int(tok.substr(1), at);
                if (idx < 1) throw SexprError("parameter index must be >= 1", at);
                return Expr::param(idx - 1);
            }
            return Expr::literal(Complex(parse_number(tok, at)));
        }
        std::size_t open_at = pos_;
        ++pos_; // consume '('
        std::size_t at = pos_;
        std::string_view head = token();
        Expr result;
        if (head == "+" || head == "*" || head == "/" ) {
            Expr a = parse_expr();
            Expr b = parse_expr();
            result = head == "+" ? a + b : head == "*" ? a * b : a / b;
        } else if (head == "-") {
            Expr a = parse_expr();
            skip_ws();
            if (peek_is_close()) {
                result = -a;
            } else {
                Expr b = parse_expr();
                result = a - b;
            }
        } else if (head == "pow") {
            Expr a = parse_expr();
            std::size_t nat = pos_;
            result = pow(a, parse_int(token(), nat));
        } else if (head == "conj") {
            result = conj(parse_expr());
        } else if (head == "re") {
            result = real_part(parse_expr());
        } else if (head == "im") {
            result = imag_part(parse_expr());
        } else if (head == "exp") {
            result = exp(parse_expr());
        } else if (head == "sin") {
            result = sin(parse_expr());
        } else if (head == "cos") {
            result = cos(parse_expr());
        } else if (head == "complex") {
            std::size_t a1 = pos_;
            double re = parse_number(token(), a1);
            std::size_t a2 = pos_;
            double im = parse_number(token(), a2);
            result = Expr::literal(Complex(re, im));
        } else {
            throw SexprError("unknown operator '" + std::string(head) + "'", at);
        }
        skip_ws();
        if (pos_ >= text_.size() || text_[pos_] != ')')
            throw SexprError("expected ')'", open_at);
        ++pos_;
        return result;
    }

    bool peek_is_close() {
        skip_ws();
        return pos_ < text_.size() && text_[pos_] == ')';
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

} // namespace detail

inline std::string to_sexpr(const Expr& e) {
    std::string out;
    detail::write_sexpr(e.node(), out);
    return out;
}

inline Expr parse_sexpr(std::string_view text) { return detail::SexprParser(text).parse(); }

inline std::vector<std::string> to_sexprs(const ExpressionMap& m) {
    std::vector<std::string> out;
    out.reserve(m.outputs().size());
    for (const auto& e : m.outputs()) out.push_back(to_sexpr(e));
    return out;
}

inline ExpressionMap map_from_sexprs(int arity_in, const std::vector<std::string>& exprs,
                                     bool holomorphic = false) {
    std::vector<Expr> outs;
    outs.reserve(exprs.size());
    for (const auto& s : exprs) outs.push_back(parse_sexpr(s));
    return ExpressionMap(arity_in, std::move(outs), holomorphic);
}

} // namespace currents
