#pragma once

#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "currents/ambient.hpp"
#include "currents/expression.hpp"

namespace currents {

// Pure-type tag for differential entries. Holomorphic means the entry
// depends on the ambient point through z only, antiholomorphic through
// z-bar only; General entries cannot be type-decomposed unless affine.
enum class EntryType { General, Holomorphic, AntiHolomorphic };

// Leading coefficient of a metric form. Either an expression over the 2N
// ambient reals or an arbitrary callable (bumps, mollifier products); only
// values are ever needed from this slot.
struct FormScalar {
    std::optional<ExpressionMap> expr;
    std::function<Complex(std::span<const double>)> fn;

    FormScalar() = default;
    static FormScalar one(int N) {
        return from_expr(ExpressionMap(2 * N, {Expr::literal(Complex(1.0))}));
    }
    static FormScalar constant(int N, Complex c) {
        return from_expr(ExpressionMap(2 * N, {Expr::literal(c)}));
    }
    static FormScalar from_expr(ExpressionMap m) {
        FormScalar s;
        s.expr = std::move(m);
        return s;
    }
    static FormScalar from_fn(std::function<Complex(std::span<const double>)> f) {
        FormScalar s;
        s.fn = std::move(f);
        return s;
    }

    bool valid() const { return expr.has_value() || static_cast<bool>(fn); }

    // pointwise product; expression pairs stay expressions
    friend FormScalar operator*(const FormScalar& a, const FormScalar& b) {
        if (a.expr && b.expr) {
            return from_expr(ExpressionMap(a.expr->arity_in(),
                                           {a.expr->outputs()[0] * b.expr->outputs()[0]}));
        }
        FormScalar s;
        FormScalar ac = a, bc = b;
        s.fn = [ac, bc](std::span<const double> x) { return ac.value_slow(x) * bc.value_slow(x); };
        return s;
    }

    // convenience path (allocates a workspace); hot loops use FormScalarEval
    Complex value_slow(std::span<const double> x) const {
        if (expr) {
            TapeWorkspace ws;
            Complex out;
            expr->eval(x, std::span<Complex>(&out, 1), ws);
            return out;
        }
        return fn(x);
    }
};

// One differential slot pi_j of a metric form.
struct FormEntry {
    std::optional<ExpressionMap> expr; // 2N reals -> 1 complex
    std::function<Complex(std::span<const double>)> value_fn;
    std::function<void(std::span<const double>, std::span<Complex>)> grad_fn; // 2N partials
    EntryType type = EntryType::General;
    bool affine = false;

    static FormEntry from_expr(ExpressionMap m, EntryType t = EntryType::General,
                               bool affine_hint = false) {
        FormEntry e;
        e.expr = std::move(m);
        e.type = t;
        e.affine = affine_hint;
        return e;
    }

    static FormEntry from_fns(std::function<Complex(std::span<const double>)> v,
                              std::function<void(std::span<const double>, std::span<Complex>)> g,
                              EntryType t = EntryType::General) {
        FormEntry e;
        e.value_fn = std::move(v);
        e.grad_fn = std::move(g);
        e.type = t;
        return e;
    }

    bool is_expr() const { return expr.has_value(); }
};

// Affine entry sum_j alpha_j z_j + sum_j beta_j conj(z_j) + c.
inline FormEntry affine_entry(int N, std::span<const Complex> alpha,
                              std::span<const Complex> beta, Complex c = Complex(0.0)) {
    Expr acc = Expr::literal(c);
    bool has_a = false, has_b = false;
    for (int j = 0; j < N; ++j) {
        Complex aj = j < static_cast<int>(alpha.size()) ? alpha[static_cast<std::size_t>(j)]
                                                        : Complex(0.0);
        Complex bj = j < static_cast<int>(beta.size()) ? beta[static_cast<std::size_t>(j)]
                                                       : Complex(0.0);
        if (aj != Complex(0.0)) {
            acc = acc + Expr::literal(aj) * zvar(j);
            has_a = true;
        }
        if (bj != Complex(0.0)) {
            acc = acc + Expr::literal(bj) * zbar(j);
            has_b = true;
        }
    }
    EntryType t = EntryType::General;
    if (has_a && !has_b) t = EntryType::Holomorphic;
    if (!has_a && has_b) t = EntryType::AntiHolomorphic;
    if (!has_a && !has_b) t = EntryType::Holomorphic; // constant: harmless either way
    return FormEntry::from_expr(ExpressionMap(2 * N, {acc}, !has_b), t, /*affine=*/true);
}

inline FormEntry coordinate_entry(int N, int j, bool conjugated = false) {
    std::vector<Complex> a(static_cast<std::size_t>(N), Complex(0.0));
    std::vector<Complex> b(static_cast<std::size_t>(N), Complex(0.0));
    if (conjugated) b[static_cast<std::size_t>(j)] = 1.0;
    else a[static_cast<std::size_t>(j)] = 1.0;
    return affine_entry(N, a, b);
}

// Real and imaginary parts of coordinate j, as affine entries.
inline FormEntry re_coordinate_entry(int N, int j) {
    std::vector<Complex> a(static_cast<std::size_t>(N), Complex(0.0));
    std::vector<Complex> b(static_cast<std::size_t>(N), Complex(0.0));
    a[static_cast<std::size_t>(j)] = 0.5;
    b[static_cast<std::size_t>(j)] = 0.5;
    return affine_entry(N, a, b);
}

inline FormEntry im_coordinate_entry(int N, int j) {
    std::vector<Complex> a(static_cast<std::size_t>(N), Complex(0.0));
    std::vector<Complex> b(static_cast<std::size_t>(N), Complex(0.0));
    a[static_cast<std::size_t>(j)] = Complex(0.0, -0.5);
    b[static_cast<std::size_t>(j)] = Complex(0.0, 0.5);
    return affine_entry(N, a, b);
}

// Metric k-form (f, pi_1..pi_k) over a 2N-real ambient.
struct MetricForm {
    int N = 1;
    FormScalar f;
    std::vector<FormEntry> entries;

    MetricForm() = default;
    MetricForm(int ambient_N, FormScalar lead, std::vector<FormEntry> pis)
        : N(ambient_N), f(std::move(lead)), entries(std::move(pis)) {}

    int degree() const { return static_cast<int>(entries.size()); }
};

// Splits an entry into its holomorphic / antiholomorphic parts (only the
// differential matters downstream, so constants are dropped). Works for
// pure-type entries and for affine ones via the gradient at the origin.
struct EntrySplit {
    std::optional<FormEntry> hol;
    std::optional<FormEntry> antihol;
};

inline EntrySplit split_entry(const FormEntry& e, int N) {
    EntrySplit out;
    if (e.type == EntryType::Holomorphic) {
        out.hol = e;
        return out;
    }
    if (e.type == EntryType::AntiHolomorphic) {
        out.antihol = e;
        return out;
    }
    if (!e.affine || !e.is_expr())
        throw std::invalid_argument(
            "type decomposition requires a pure-type or affine differential entry");
    std::vector<double> x0(static_cast<std::size_t>(2 * N), 0.0);
    std::vector<double> seed(static_cast<std::size_t>(2 * N) * static_cast<std::size_t>(2 * N),
                             0.0);
    for (int m = 0; m < 2 * N; ++m)
        seed[static_cast<std::size_t>(m) * (2 * N) + m] = 1.0;
    TapeWorkspace ws;
    Complex val;
    std::vector<Complex> grad(static_cast<std::size_t>(2 * N));
    e.expr->eval_jet(x0, seed.data(), 2 * N, std::span<Complex>(&val, 1), grad.data(), ws);
    std::vector<Complex> alpha(static_cast<std::size_t>(N)), beta(static_cast<std::size_t>(N));
    double na = 0.0, nb = 0.0;
    const Complex I(0.0, 1.0);
    for (int j = 0; j < N; ++j) {
        Complex gx = grad[static_cast<std::size_t>(2 * j)];
        Complex gy = grad[static_cast<std::size_t>(2 * j + 1)];
        alpha[static_cast<std::size_t>(j)] = 0.5 * (gx - I * gy);
        beta[static_cast<std::size_t>(j)] = 0.5 * (gx + I * gy);
        na += std::abs(alpha[static_cast<std::size_t>(j)]);
        nb += std::abs(beta[static_cast<std::size_t>(j)]);
    }
    std::vector<Complex> zero(static_cast<std::size_t>(N), Complex(0.0));
    if (na > 1e-14) out.hol = affine_entry(N, alpha, zero);
    if (nb > 1e-14) out.antihol = affine_entry(N, zero, beta);
    return out;
}

// ---------------------------------------------------------------------------
// Smooth bumps and mollifiers
// ---------------------------------------------------------------------------

// exp(1 - 1/(1-t)) for t in [0,1), zero for t >= 1; all derivatives vanish at
// the support edge, so spectral quadrature stays accurate through the cutoff.
inline double flat_bump(double t) {
    if (t >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - t));
}

inline double flat_bump_deriv(double t) { // d/dt
    if (t >= 1.0) return 0.0;
    double s = 1.0 - t;
    return -flat_bump(t) / (s * s);
}

// Product bump over selected complex coordinates: prod_j B(|z_j - c_j|^2 / R_j^2).
// Coordinates with radius <= 0 are unconstrained.
struct ProductBump {
    std::vector<Complex> center;
    std::vector<double> radius;

    double value(std::span<const double> x) const {
        double v = 1.0;
        for (std::size_t j = 0; j < radius.size(); ++j) {
            if (radius[j] <= 0.0) continue;
            double dr = x[2 * j] - center[j].real();
            double di = x[2 * j + 1] - center[j].imag();
            double t = (dr * dr + di * di) / (radius[j] * radius[j]);
            v *= flat_bump(t);
            if (v == 0.0) return 0.0;
        }
        return v;
    }

    // gradient with respect to the 2N reals
    void gradient(std::span<const double> x, std::span<Complex> out) const {
        std::size_t n2 = out.size();
        std::vector<double> factors(radius.size(), 1.0);
        double v = 1.0;
        for (std::size_t j = 0; j < radius.size(); ++j) {
            if (radius[j] <= 0.0) continue;
            double dr = x[2 * j] - center[j].real();
            double di = x[2 * j + 1] - center[j].imag();
            double t = (dr * dr + di * di) / (radius[j] * radius[j]);
            factors[j] = flat_bump(t);
            v *= factors[j];
        }
        for (std::size_t m = 0; m < n2; ++m) out[m] = 0.0;
        if (v == 0.0) return;
        for (std::size_t j = 0; j < radius.size(); ++j) {
            if (radius[j] <= 0.0) continue;
            double R2 = radius[j] * radius[j];
            double dr = x[2 * j] - center[j].real();
            double di = x[2 * j + 1] - center[j].imag();
            double t = (dr * dr + di * di) / R2;
            double rest = factors[j] > 0.0 ? v / factors[j] : 0.0;
            double db = flat_bump_deriv(t) * rest;
            out[2 * j] = db * 2.0 * dr / R2;
            out[2 * j + 1] = db * 2.0 * di / R2;
        }
    }

    FormScalar as_scalar() const {
        ProductBump b = *this;
        return FormScalar::from_fn([b](std::span<const double> x) { return Complex(b.value(x)); });
    }

    FormEntry as_entry() const {
        ProductBump b = *this;
        return FormEntry::from_fns(
            [b](std::span<const double> x) { return Complex(b.value(x)); },
            [b](std::span<const double> x, std::span<Complex> g) { b.gradient(x, g); });
    }
};

// C^2 mollifier (1 - (t/eps)^2)^3, normalized to unit integral on [-eps,eps].
struct Mollifier {
    double eps = 0.1;

    double value(double t) const {
        double s = t / eps;
        if (std::abs(s) >= 1.0) return 0.0;
        double q = 1.0 - s * s;
        return 35.0 / (32.0 * eps) * q * q * q;
    }
};

} // namespace currents
