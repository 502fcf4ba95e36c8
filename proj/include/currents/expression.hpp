#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "currents/interval.hpp"

namespace currents {

using Complex = std::complex<double>;

enum class Op : std::uint8_t {
    Lit, Param, Add, Sub, Mul, Div, Neg, Pow, Conj, Re, Im, Exp, Sin, Cos
};

struct ExprNode;
using NodePtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
    Op op;
    Complex lit{};   // Lit
    int aux = 0;     // Param index / Pow exponent
    NodePtr a, b;
};

// Expression in real parameters u1..un with complex values. Immutable, DAG
// shared via shared_ptr; constant subexpressions are folded on construction.
class Expr {
public:
    Expr() : node_(literal(Complex(0.0)).node_) {}
    explicit Expr(NodePtr n) : node_(std::move(n)) {}
    Expr(double v) : Expr(literal(Complex(v))) {}
    Expr(Complex v) : Expr(literal(v)) {}

    static Expr literal(Complex v) {
        auto n = std::make_shared<ExprNode>();
        n->op = Op::Lit;
        n->lit = v;
        return Expr(std::move(n));
    }

    static Expr param(int idx) {
        auto n = std::make_shared<ExprNode>();
        n->op = Op::Param;
        n->aux = idx;
        return Expr(std::move(n));
    }

    const NodePtr& node() const { return node_; }
    bool is_lit() const { return node_->op == Op::Lit; }
    Complex lit_value() const { return node_->lit; }

private:
    NodePtr node_;
};

namespace detail {

inline Expr make_unary(Op op, const Expr& a, int aux = 0) {
    if (a.is_lit()) {
        Complex v = a.lit_value();
        switch (op) {
            case Op::Neg:  return Expr::literal(-v);
            case Op::Conj: return Expr::literal(std::conj(v));
            case Op::Re:   return Expr::literal(Complex(v.real(), 0.0));
            case Op::Im:   return Expr::literal(Complex(v.imag(), 0.0));
            case Op::Exp:  return Expr::literal(std::exp(v));
            case Op::Sin:  return Expr::literal(std::sin(v));
            case Op::Cos:  return Expr::literal(std::cos(v));
            case Op::Pow:  return Expr::literal(aux == 0 ? Complex(1.0) : std::pow(v, aux));
            default: break;
        }
    }
    auto n = std::make_shared<ExprNode>();
    n->op = op;
    n->aux = aux;
    n->a = a.node();
    return Expr(std::move(n));
}

inline Expr make_binary(Op op, const Expr& a, const Expr& b) {
    if (a.is_lit() && b.is_lit()) {
        Complex x = a.lit_value(), y = b.lit_value();
        switch (op) {
            case Op::Add: return Expr::literal(x + y);
            case Op::Sub: return Expr::literal(x - y);
            case Op::Mul: return Expr::literal(x * y);
            case Op::Div: return Expr::literal(x / y);
            default: break;
        }
    }
    // cheap algebraic identities keep derived cells (boundary faces,
    // compositions) small
    if (op == Op::Add) {
        if (a.is_lit() && a.lit_value() == Complex(0.0)) return b;
        if (b.is_lit() && b.lit_value() == Complex(0.0)) return a;
    }
    if (op == Op::Sub && b.is_lit() && b.lit_value() == Complex(0.0)) return a;
    if (op == Op::Mul) {
        if (a.is_lit()) {
            if (a.lit_value() == Complex(0.0)) return Expr::literal(Complex(0.0));
            if (a.lit_value() == Complex(1.0)) return b;
        }
        if (b.is_lit()) {
            if (b.lit_value() == Complex(0.0)) return Expr::literal(Complex(0.0));
            if (b.lit_value() == Complex(1.0)) return a;
        }
    }
    auto n = std::make_shared<ExprNode>();
    n->op = op;
    n->a = a.node();
    n->b = b.node();
    return Expr(std::move(n));
}

} // namespace detail

inline Expr operator+(const Expr& a, const Expr& b) { return detail::make_binary(Op::Add, a, b); }
inline Expr operator-(const Expr& a, const Expr& b) { return detail::make_binary(Op::Sub, a, b); }
inline Expr operator*(const Expr& a, const Expr& b) { return detail::make_binary(Op::Mul, a, b); }
inline Expr operator/(const Expr& a, const Expr& b) { return detail::make_binary(Op::Div, a, b); }
inline Expr operator-(const Expr& a) { return detail::make_unary(Op::Neg, a); }

inline Expr conj(const Expr& a) { return detail::make_unary(Op::Conj, a); }
inline Expr real_part(const Expr& a) { return detail::make_unary(Op::Re, a); }
inline Expr imag_part(const Expr& a) { return detail::make_unary(Op::Im, a); }
inline Expr exp(const Expr& a) { return detail::make_unary(Op::Exp, a); }
inline Expr sin(const Expr& a) { return detail::make_unary(Op::Sin, a); }
inline Expr cos(const Expr& a) { return detail::make_unary(Op::Cos, a); }
inline Expr pow(const Expr& a, int n) { return detail::make_unary(Op::Pow, a, n); }

// ---------------------------------------------------------------------------
// Tape: expression DAG flattened to a shared instruction list so repeated
// evaluation in quadrature loops costs no allocation and no hashing.
// ---------------------------------------------------------------------------

struct Tape {
    struct Ins {
        Op op;
        std::int32_t a = -1, b = -1;
        std::int32_t aux = 0;
        Complex lit{};
    };
    int arity_in = 0;
    std::vector<Ins> code;
    std::vector<std::int32_t> outputs;

    std::size_t size() const { return code.size(); }
};

namespace detail {

inline std::int32_t flatten(const NodePtr& n, Tape& tape,
                            std::unordered_map<const ExprNode*, std::int32_t>& memo) {
    auto it = memo.find(n.get());
    if (it != memo.end()) return it->second;
    Tape::Ins ins;
    ins.op = n->op;
    ins.lit = n->lit;
    ins.aux = n->aux;
    if (n->a) ins.a = flatten(n->a, tape, memo);
    if (n->b) ins.b = flatten(n->b, tape, memo);
    auto id = static_cast<std::int32_t>(tape.code.size());
    tape.code.push_back(ins);
    memo.emplace(n.get(), id);
    return id;
}

} // namespace detail

// Scratch buffers reused across evaluations of one tape.
struct TapeWorkspace {
    std::vector<Complex> val;
    std::vector<Complex> der; // node-major, np partials per node
    std::vector<CBox> box;
    std::vector<CBox> dbox;
};

// Map from n real parameters to m complex coordinates, with value, forward
// derivative (jet), and interval evaluation. The jet seed matrix expresses
// the parameters as functions of np outer variables, enabling chain-rule
// evaluation of compositions without materializing them.
class ExpressionMap {
public:
    ExpressionMap() = default;
    ExpressionMap(int arity_in, std::vector<Expr> outputs, bool holomorphic = false)
        : arity_in_(arity_in), outputs_(std::move(outputs)), holomorphic_(holomorphic) {
        compile();
    }

    int arity_in() const { return arity_in_; }
    int arity_out() const { return static_cast<int>(outputs_.size()); }
    bool holomorphic() const { return holomorphic_; }
    const std::vector<Expr>& outputs() const { return outputs_; }
    const Tape& tape() const { return tape_; }

    TapeWorkspace make_ws() const { return TapeWorkspace{}; }

    void eval(std::span<const double> x, std::span<Complex> out, TapeWorkspace& ws) const {
        check_in(x.size());
        auto& v = ws.val;
        v.resize(tape_.code.size());
        for (std::size_t i = 0; i < tape_.code.size(); ++i) {
            const auto& ins = tape_.code[i];
            switch (ins.op) {
                case Op::Lit:   v[i] = ins.lit; break;
                case Op::Param: v[i] = Complex(x[static_cast<std::size_t>(ins.aux)], 0.0); break;
                case Op::Add:   v[i] = v[ins.a] + v[ins.b]; break;
                case Op::Sub:   v[i] = v[ins.a] - v[ins.b]; break;
                case Op::Mul:   v[i] = v[ins.a] * v[ins.b]; break;
                case Op::Div:   v[i] = div_checked(v[ins.a], v[ins.b]); break;
                case Op::Neg:   v[i] = -v[ins.a]; break;
                case Op::Pow:   v[i] = ipow(v[ins.a], ins.aux); break;
                case Op::Conj:  v[i] = std::conj(v[ins.a]); break;
                case Op::Re:    v[i] = Complex(v[ins.a].real(), 0.0); break;
                case Op::Im:    v[i] = Complex(v[ins.a].imag(), 0.0); break;
                case Op::Exp:   v[i] = std::exp(v[ins.a]); break;
                case Op::Sin:   v[i] = std::sin(v[ins.a]); break;
                case Op::Cos:   v[i] = std::cos(v[ins.a]); break;
            }
        }
        for (std::size_t o = 0; o < tape_.outputs.size(); ++o) out[o] = v[tape_.outputs[o]];
    }

    // seed is arity_in x np (row-major): seed[p*np + j] = d param_p / d t_j.
    // out_der is arity_out x np.
    void eval_jet(std::span<const double> x, const double* seed, int np,
                  std::span<Complex> out_val, Complex* out_der, TapeWorkspace& ws) const {
        check_in(x.size());
        const std::size_t n = tape_.code.size();
        auto& v = ws.val;
        auto& d = ws.der;
        v.resize(n);
        d.resize(n * static_cast<std::size_t>(np));
        auto D = [&](std::size_t i) { return d.data() + i * static_cast<std::size_t>(np); };
        for (std::size_t i = 0; i < n; ++i) {
            const auto& ins = tape_.code[i];
            Complex* di = D(i);
            switch (ins.op) {
                case Op::Lit:
                    v[i] = ins.lit;
                    for (int j = 0; j < np; ++j) di[j] = 0.0;
                    break;
                case Op::Param: {
                    auto p = static_cast<std::size_t>(ins.aux);
                    v[i] = Complex(x[p], 0.0);
                    const double* s = seed + p * static_cast<std::size_t>(np);
                    for (int j = 0; j < np; ++j) di[j] = Complex(s[j], 0.0);
                    break;
                }
                case Op::Add: {
                    v[i] = v[ins.a] + v[ins.b];
                    const Complex *da = D(ins.a), *db = D(ins.b);
                    for (int j = 0; j < np; ++j) di[j] = da[j] + db[j];
                    break;
                }
                case Op::Sub: {
                    v[i] = v[ins.a] - v[ins.b];
                    const Complex *da = D(ins.a), *db = D(ins.b);
                    for (int j = 0; j < np; ++j) di[j] = da[j] - db[j];
                    break;
                }
                case Op::Mul: {
                    Complex va = v[ins.a], vb = v[ins.b];
                    v[i] = va * vb;
                    const Complex *da = D(ins.a), *db = D(ins.b);
                    for (int j = 0; j < np; ++j) di[j] = da[j] * vb + va * db[j];
                    break;
                }
                case Op::Div: {
                    Complex va = v[ins.a], vb = v[ins.b];
                    Complex q = div_checked(va, vb);
                    v[i] = q;
                    const Complex *da = D(ins.a), *db = D(ins.b);
                    for (int j = 0; j < np; ++j) di[j] = (da[j] - q * db[j]) / vb;
                    break;
                }
                case Op::Neg: {
                    v[i] = -v[ins.a];
                    const Complex* da = D(ins.a);
                    for (int j = 0; j < np; ++j) di[j] = -da[j];
                    break;
                }
                case Op::Pow: {
                    Complex va = v[ins.a];
                    int m = ins.aux;
                    v[i] = ipow(va, m);
                    const Complex* da = D(ins.a);
                    if (m == 0) {
                        for (int j = 0; j < np; ++j) di[j] = 0.0;
                    } else {
                        Complex f = static_cast<double>(m) * ipow(va, m - 1);
                        for (int j = 0; j < np; ++j) di[j] = f * da[j];
                    }
                    break;
                }
                case Op::Conj: {
                    v[i] = std::conj(v[ins.a]);
                    const Complex* da = D(ins.a);
                    for (int j = 0; j < np; ++j) di[j] = std::conj(da[j]);
                    break;
                }
                case Op::Re: {
                    v[i] = Complex(v[ins.a].real(), 0.0);
                    const Complex* da = D(ins.a);
                    for (int j = 0; j < np; ++j) di[j] = Complex(da[j].real(), 0.0);
                    break;
                }
                case Op::Im: {
                    v[i] = Complex(v[ins.a].imag(), 0.0);
                    const Complex* da = D(ins.a);
                    for (int j = 0; j < np; ++j) di[j] = Complex(da[j].imag(), 0.0);
                    break;
                }
                case Op::Exp: {
                    Complex e = std::exp(v[ins.a]);
                    v[i] = e;
                    const Complex* da = D(ins.a);
                    for (int j = 0; j < np; ++j) di[j] = e * da[j];
                    break;
                }
                case Op::Sin: {
                    Complex va = v[ins.a];
                    v[i] = std::sin(va);
                    Complex c = std::cos(va);
                    const Complex* da = D(ins.a);
                    for (int j = 0; j < np; ++j) di[j] = c * da[j];
                    break;
                }
                case Op::Cos: {
                    Complex va = v[ins.a];
                    v[i] = std::cos(va);
                    Complex s = -std::sin(va);
                    const Complex* da = D(ins.a);
                    for (int j = 0; j < np; ++j) di[j] = s * da[j];
                    break;
                }
            }
        }
        for (std::size_t o = 0; o < tape_.outputs.size(); ++o) {
            out_val[o] = v[tape_.outputs[o]];
            const Complex* src = D(static_cast<std::size_t>(tape_.outputs[o]));
            for (int j = 0; j < np; ++j) out_der[o * static_cast<std::size_t>(np) + j] = src[j];
        }
    }

    void eval_box(std::span<const Interval> x, std::span<CBox> out, TapeWorkspace& ws) const {
        check_in(x.size());
        auto& v = ws.box;
        v.resize(tape_.code.size());
        for (std::size_t i = 0; i < tape_.code.size(); ++i) {
            const auto& ins = tape_.code[i];
            switch (ins.op) {
                case Op::Lit:   v[i] = CBox(Interval(ins.lit.real()), Interval(ins.lit.imag())); break;
                case Op::Param: v[i] = CBox(x[static_cast<std::size_t>(ins.aux)], Interval(0.0)); break;
                case Op::Add:   v[i] = v[ins.a] + v[ins.b]; break;
                case Op::Sub:   v[i] = v[ins.a] - v[ins.b]; break;
                case Op::Mul:   v[i] = v[ins.a] * v[ins.b]; break;
                case Op::Div:   v[i] = v[ins.a] / v[ins.b]; break;
                case Op::Neg:   v[i] = -v[ins.a]; break;
                case Op::Pow:   v[i] = box_pow(v[ins.a], ins.aux); break;
                case Op::Conj:  v[i] = conj(v[ins.a]); break;
                case Op::Re:    v[i] = CBox(v[ins.a].re, Interval(0.0)); break;
                case Op::Im:    v[i] = CBox(v[ins.a].im, Interval(0.0)); break;
                case Op::Exp:   v[i] = box_exp(v[ins.a]); break;
                case Op::Sin:   v[i] = box_sin(v[ins.a]); break;
                case Op::Cos:   v[i] = box_cos(v[ins.a]); break;
            }
        }
        for (std::size_t o = 0; o < tape_.outputs.size(); ++o) out[o] = v[tape_.outputs[o]];
    }

    // Interval enclosure of all first partials over the parameter box;
    // out_der is arity_out x arity_in.
    void eval_jet_box(std::span<const Interval> x, std::span<CBox> out_val,
                      std::vector<CBox>& out_der, TapeWorkspace& ws) const {
        check_in(x.size());
        const std::size_t n = tape_.code.size();
        const int np = arity_in_;
        auto& v = ws.box;
        auto& d = ws.dbox;
        v.resize(n);
        d.assign(n * static_cast<std::size_t>(np), CBox());
        auto D = [&](std::int32_t i) { return d.data() + static_cast<std::size_t>(i) * np; };
        for (std::size_t i = 0; i < n; ++i) {
            const auto& ins = tape_.code[i];
            CBox* di = D(static_cast<std::int32_t>(i));
            switch (ins.op) {
                case Op::Lit:
                    v[i] = CBox(Interval(ins.lit.real()), Interval(ins.lit.imag()));
                    break;
                case Op::Param:
                    v[i] = CBox(x[static_cast<std::size_t>(ins.aux)], Interval(0.0));
                    di[ins.aux] = CBox(Interval(1.0), Interval(0.0));
                    break;
                case Op::Add:
                    v[i] = v[ins.a] + v[ins.b];
                    for (int j = 0; j < np; ++j) di[j] = D(ins.a)[j] + D(ins.b)[j];
                    break;
                case Op::Sub:
                    v[i] = v[ins.a] - v[ins.b];
                    for (int j = 0; j < np; ++j) di[j] = D(ins.a)[j] - D(ins.b)[j];
                    break;
                case Op::Mul:
                    v[i] = v[ins.a] * v[ins.b];
                    for (int j = 0; j < np; ++j)
                        di[j] = D(ins.a)[j] * v[ins.b] + v[ins.a] * D(ins.b)[j];
                    break;
                case Op::Div: {
                    CBox q = v[ins.a] / v[ins.b];
                    v[i] = q;
                    for (int j = 0; j < np; ++j)
                        di[j] = (D(ins.a)[j] - q * D(ins.b)[j]) / v[ins.b];
                    break;
                }
                case Op::Neg:
                    v[i] = -v[ins.a];
                    for (int j = 0; j < np; ++j) di[j] = -D(ins.a)[j];
                    break;
                case Op::Pow: {
                    int m = ins.aux;
                    v[i] = box_pow(v[ins.a], m);
                    if (m == 0) break;
                    CBox f = CBox(Interval(static_cast<double>(m)), Interval(0.0)) *
                             box_pow(v[ins.a], m - 1);
                    for (int j = 0; j < np; ++j) di[j] = f * D(ins.a)[j];
                    break;
                }
                case Op::Conj:
                    v[i] = conj(v[ins.a]);
                    for (int j = 0; j < np; ++j) di[j] = conj(D(ins.a)[j]);
                    break;
                case Op::Re:
                    v[i] = CBox(v[ins.a].re, Interval(0.0));
                    for (int j = 0; j < np; ++j) di[j] = CBox(D(ins.a)[j].re, Interval(0.0));
                    break;
                case Op::Im:
                    v[i] = CBox(v[ins.a].im, Interval(0.0));
                    for (int j = 0; j < np; ++j) di[j] = CBox(D(ins.a)[j].im, Interval(0.0));
                    break;
                case Op::Exp: {
                    CBox e = box_exp(v[ins.a]);
                    v[i] = e;
                    for (int j = 0; j < np; ++j) di[j] = e * D(ins.a)[j];
                    break;
                }
                case Op::Sin: {
                    CBox c = box_cos(v[ins.a]);
                    v[i] = box_sin(v[ins.a]);
                    for (int j = 0; j < np; ++j) di[j] = c * D(ins.a)[j];
                    break;
                }
                case Op::Cos: {
                    CBox s = -box_sin(v[ins.a]);
                    v[i] = box_cos(v[ins.a]);
                    for (int j = 0; j < np; ++j) di[j] = s * D(ins.a)[j];
                    break;
                }
            }
        }
        out_der.resize(tape_.outputs.size() * static_cast<std::size_t>(np));
        for (std::size_t o = 0; o < tape_.outputs.size(); ++o) {
            out_val[o] = v[tape_.outputs[o]];
            for (int j = 0; j < np; ++j)
                out_der[o * static_cast<std::size_t>(np) + j] = D(tape_.outputs[o])[j];
        }
    }

    // Upper bound on the Lipschitz constant over the parameter box, treating
    // the map as R^{arity_in} -> R^{2*arity_out} (Frobenius bound on the
    // differential via interval enclosures of all partials).
    double lip_bound(std::span<const Interval> box) const {
        TapeWorkspace ws;
        std::vector<CBox> vals(outputs_.size());
        std::vector<CBox> ders;
        eval_jet_box(box, vals, ders, ws);
        double sum = 0.0;
        for (const CBox& d : ders) {
            double m = d.absmax();
            sum += m * m;
        }
        return std::sqrt(sum);
    }

    double lip_bound_unit_cube() const {
        std::vector<Interval> box(static_cast<std::size_t>(arity_in_), Interval(0.0, 1.0));
        return lip_bound(box);
    }

private:
    static Complex ipow(Complex v, int n) {
        if (n == 0) return Complex(1.0);
        bool inv = n < 0;
        unsigned m = static_cast<unsigned>(inv ? -n : n);
        Complex r(1.0), base = v;
        while (m) {
            if (m & 1u) r *= base;
            base *= base;
            m >>= 1u;
        }
        if (inv) {
            if (r == Complex(0.0)) throw EvalDomainError("zero raised to a negative power");
            return Complex(1.0) / r;
        }
        return r;
    }

    static Complex div_checked(Complex a, Complex b) {
        if (b == Complex(0.0)) throw EvalDomainError("division by zero in expression");
        return a / b;
    }

    void check_in(std::size_t n) const {
        if (n != static_cast<std::size_t>(arity_in_))
            throw std::invalid_argument("expression map: wrong input arity");
    }

    void compile() {
        tape_.arity_in = arity_in_;
        std::unordered_map<const ExprNode*, std::int32_t> memo;
        for (const auto& e : outputs_) {
            if (max_param(e.node()) >= arity_in_)
                throw std::invalid_argument("expression references parameter beyond declared arity");
            tape_.outputs.push_back(detail::flatten(e.node(), tape_, memo));
        }
    }

    static int max_param(const NodePtr& n) {
        int m = -1;
        if (n->op == Op::Param) m = n->aux;
        if (n->a) m = std::max(m, max_param(n->a));
        if (n->b) m = std::max(m, max_param(n->b));
        return m;
    }

    int arity_in_ = 0;
    std::vector<Expr> outputs_;
    bool holomorphic_ = false;
    Tape tape_;
};

// ---------------------------------------------------------------------------
// Structural rewrites
// ---------------------------------------------------------------------------

namespace detail {

inline Expr substitute(const NodePtr& n, const std::vector<Expr>& repl,
                       std::unordered_map<const ExprNode*, Expr>& memo) {
    auto it = memo.find(n.get());
    if (it != memo.end()) return it->second;
    Expr r;
    switch (n->op) {
        case Op::Lit:   r = Expr::literal(n->lit); break;
        case Op::Param: r = repl[static_cast<std::size_t>(n->aux)]; break;
        case Op::Add: case Op::Sub: case Op::Mul: case Op::Div: {
            Expr a = substitute(n->a, repl, memo);
            Expr b = substitute(n->b, repl, memo);
            r = make_binary(n->op, a, b);
            break;
        }
        default: {
            Expr a = substitute(n->a, repl, memo);
            r = make_unary(n->op, a, n->aux);
            break;
        }
    }
    memo.emplace(n.get(), r);
    return r;
}

} // namespace detail

// Replaces parameter p by repl[p] in every output.
inline ExpressionMap substitute_params(const ExpressionMap& f, int new_arity,
                                       const std::vector<Expr>& repl, bool holomorphic = false) {
    std::unordered_map<const ExprNode*, Expr> memo;
    std::vector<Expr> outs;
    outs.reserve(f.outputs().size());
    for (const auto& e : f.outputs()) outs.push_back(detail::substitute(e.node(), repl, memo));
    return ExpressionMap(new_arity, std::move(outs), holomorphic);
}

// Composition (f . g): g maps k real params to m complex coordinates, f reads
// 2m real inputs laid out (Re w1, Im w1, Re w2, ...).
inline ExpressionMap compose(const ExpressionMap& f, const ExpressionMap& g) {
    if (f.arity_in() != 2 * g.arity_out())
        throw std::invalid_argument("compose: input arity of f must be 2x output arity of g");
    std::vector<Expr> repl;
    repl.reserve(static_cast<std::size_t>(f.arity_in()));
    for (int c = 0; c < g.arity_out(); ++c) {
        repl.push_back(real_part(g.outputs()[static_cast<std::size_t>(c)]));
        repl.push_back(imag_part(g.outputs()[static_cast<std::size_t>(c)]));
    }
    return substitute_params(f, g.arity_in(), repl, f.holomorphic() && g.holomorphic());
}

// Pins parameter `idx` to `value`; the remaining parameters shift down.
inline ExpressionMap fix_param(const ExpressionMap& f, int idx, double value) {
    std::vector<Expr> repl;
    repl.reserve(static_cast<std::size_t>(f.arity_in()));
    for (int p = 0; p < f.arity_in(); ++p) {
        if (p == idx) repl.push_back(Expr::literal(Complex(value)));
        else repl.push_back(Expr::param(p < idx ? p : p - 1));
    }
    return substitute_params(f, f.arity_in() - 1, repl, f.holomorphic());
}

// Moves parameter p to index map[p] (arity may grow).
inline ExpressionMap remap_params(const ExpressionMap& f, int new_arity,
                                  const std::vector<int>& map) {
    std::vector<Expr> repl;
    repl.reserve(static_cast<std::size_t>(f.arity_in()));
    for (int p = 0; p < f.arity_in(); ++p)
        repl.push_back(Expr::param(map[static_cast<std::size_t>(p)]));
    return substitute_params(f, new_arity, repl, f.holomorphic());
}

} // namespace currents
