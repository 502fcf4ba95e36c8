#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <string>

#include "currents/current.hpp"

namespace currents {
namespace fixtures {

constexpr double kTau = 6.283185307179586476925286766559; // 2*pi

// center + radius * e^{2*pi*i*t} with t = parameter `idx`
inline Expr circle_expr(Complex center, double radius, int idx) {
    Expr angle = Expr::literal(Complex(0.0, kTau)) * Expr::param(idx);
    return Expr::literal(center) + Expr::literal(Complex(radius)) * exp(angle);
}

// polynomial in an expression, coefficients ascending
inline Expr poly_in(const Expr& z, std::span<const Complex> coeffs) {
    if (coeffs.empty()) return Expr::literal(Complex(0.0));
    Expr acc = Expr::literal(coeffs[coeffs.size() - 1]);
    for (std::size_t i = coeffs.size() - 1; i-- > 0;)
        acc = acc * z + Expr::literal(coeffs[i]);
    return acc;
}

// ---------------------------------------------------------------------------
// Analytic example maps
// ---------------------------------------------------------------------------

// g(z,w) = { z*w^n }, n = 1..n_max; the fiber over 0 is {z=0}, so the map is
// holomorphic and injective off that fiber but not proper.
inline ExpressionMap map_zw_powers(int n_max) {
    Expr z = zvar(0), w = zvar(1);
    std::vector<Expr> outs;
    outs.reserve(static_cast<std::size_t>(n_max));
    for (int n = 1; n <= n_max; ++n) outs.push_back(z * pow(w, n));
    return ExpressionMap(4, std::move(outs), /*holomorphic=*/true);
}

// f(z) = { z^n }, n = 1..n_max; proper into the truncation of c_0/l^2.
inline ExpressionMap map_z_powers(int n_max) {
    Expr z = zvar(0);
    std::vector<Expr> outs;
    outs.reserve(static_cast<std::size_t>(n_max));
    for (int n = 1; n <= n_max; ++n) outs.push_back(pow(z, n));
    return ExpressionMap(2, std::move(outs), /*holomorphic=*/true);
}

inline std::vector<std::vector<int>> multi_indices(int k, int deg_max) {
    std::vector<std::vector<int>> all;
    std::vector<int> cur(static_cast<std::size_t>(k), 0);
    // graded lexicographic, degrees 1..deg_max
    for (int m = 1; m <= deg_max; ++m) {
        std::function<void(int, int)> rec = [&](int pos, int rem) {
            if (pos == k - 1) {
                cur[static_cast<std::size_t>(pos)] = rem;
                all.push_back(cur);
                return;
            }
            for (int v = rem; v >= 0; --v) {
                cur[static_cast<std::size_t>(pos)] = v;
                rec(pos + 1, rem - v);
            }
        };
        rec(0, m);
    }
    return all;
}

// F(z_1..z_k) = { z^I }, 1 <= |I| <= deg_max, graded order.
inline ExpressionMap map_multi_powers(int k, int deg_max) {
    auto idx = multi_indices(k, deg_max);
    std::vector<Expr> outs;
    outs.reserve(idx.size());
    for (const auto& I : idx) {
        Expr m = Expr::literal(Complex(1.0));
        for (int j = 0; j < k; ++j)
            if (I[static_cast<std::size_t>(j)] > 0)
                m = m * pow(zvar(j), I[static_cast<std::size_t>(j)]);
        outs.push_back(m);
    }
    return ExpressionMap(2 * k, std::move(outs), /*holomorphic=*/true);
}

// l^p summability certificate for map_multi_powers on the polydisk of radius r:
// the direct partial sum against the dominating series sum_m (2m)^k r^{pm}.
struct MultiPowersCertificate {
    double direct_partial = 0.0;     // sum over |I| <= deg_max of r^{p|I|}... evaluated at |z_i| = r
    double dominating_partial = 0.0; // sum_{m<=deg_max} (2m)^k r^{pm}
    double dominating_tail = 0.0;    // sum_{m>deg_max} (2m)^k r^{pm}, summed to convergence
    int deg_max = 0;
    bool converged = false;
};

inline MultiPowersCertificate multi_powers_certificate(int k, double p, double r, int deg_max) {
    MultiPowersCertificate c;
    c.deg_max = deg_max;
    auto count = [&](long m) {
        // (m+k-1 choose k-1)
        double b = 1.0;
        for (int i = 1; i <= k - 1; ++i) b *= static_cast<double>(m + i) / i;
        return b;
    };
    for (int m = 1; m <= deg_max; ++m) {
        c.direct_partial += count(m) * std::pow(r, p * m);
        c.dominating_partial += std::pow(2.0 * m, k) * std::pow(r, p * m);
    }
    if (r < 1.0) {
        double tail = 0.0;
        for (int m = deg_max + 1; m <= deg_max + 100000; ++m) {
            double term = std::pow(2.0 * m, k) * std::pow(r, p * m);
            tail += term;
            if (term < 1e-300 || term < 1e-18 * std::max(tail, 1.0)) {
                c.converged = true;
                break;
            }
        }
        c.dominating_tail = tail;
    }
    return c;
}

// ---------------------------------------------------------------------------
// Tail budgets
// ---------------------------------------------------------------------------

// sup_{|z|<=rho} l^2 norm of (z^n/n!) for n > N
inline double factorial_tail(int N, double rho = 1.0) {
    double sum = 0.0, fact = 1.0;
    for (int n = 1; n <= N; ++n) fact *= n;
    double p = std::pow(rho, N);
    for (int n = N + 1; n < N + 200; ++n) {
        fact *= n;
        p *= rho;
        double term = (p / fact) * (p / fact);
        sum += term;
        if (term < 1e-320) break;
    }
    return std::sqrt(sum);
}

// sup_{|z|<=rho} l^2 norm of (z^n) for n > N, rho < 1
inline double zpowers_tail(int N, double rho) {
    double q = rho * rho;
    return std::sqrt(std::pow(q, N + 1) / (1.0 - q));
}

// ---------------------------------------------------------------------------
// Currents
// ---------------------------------------------------------------------------

// flat disk {(c + rho*z, 0, ..): |z| <= 1} in C^N, polar cell
inline RectifiableCurrent disk(int N = 1, double rho = 1.0, Complex center = 0.0) {
    Expr r = Expr::param(0);
    Expr z = Expr::literal(center) +
             Expr::literal(Complex(rho)) * r * exp(Expr::literal(Complex(0.0, kTau)) * Expr::param(1));
    std::vector<Expr> outs{z};
    for (int j = 1; j < N; ++j) outs.push_back(Expr::literal(Complex(0.0)));
    return RectifiableCurrent(AmbientSpace(N), 2,
                              {Cell(2, ExpressionMap(2, std::move(outs)))});
}

inline RectifiableCurrent circle(int N = 1, double rho = 1.0, Complex center = 0.0) {
    std::vector<Expr> outs{circle_expr(center, rho, 0)};
    for (int j = 1; j < N; ++j) outs.push_back(Expr::literal(Complex(0.0)));
    return RectifiableCurrent(AmbientSpace(N), 1,
                              {Cell(1, ExpressionMap(1, std::move(outs)))});
}

// graph of fiber maps over the disk of radius rho: z |-> (z, F_2(z), .., F_N(z))
inline RectifiableCurrent graph_over_disk(const std::vector<std::vector<Complex>>& fiber_coeffs,
                                          double rho = 1.0, long long mult = 1,
                                          double tail = 0.0) {
    Expr z = Expr::literal(Complex(rho)) * Expr::param(0) *
             exp(Expr::literal(Complex(0.0, kTau)) * Expr::param(1));
    std::vector<Expr> outs{z};
    for (const auto& coeffs : fiber_coeffs) outs.push_back(poly_in(z, coeffs));
    int N = static_cast<int>(outs.size());
    return RectifiableCurrent(AmbientSpace(N), 2,
                              {Cell(2, ExpressionMap(2, std::move(outs)), mult)}, tail);
}

// w = z^2 over the disk of radius rho, in C^2
inline RectifiableCurrent parabola_graph(double rho = 1.0) {
    return graph_over_disk({{0.0, 0.0, 1.0}}, rho);
}

// (z, z^2, ..., z^N) over the disk of radius rho
inline RectifiableCurrent zpowers_graph(int N, double rho) {
    std::vector<std::vector<Complex>> fibers;
    for (int n = 2; n <= N; ++n) {
        std::vector<Complex> c(static_cast<std::size_t>(n + 1), Complex(0.0));
        c[static_cast<std::size_t>(n)] = 1.0;
        fibers.push_back(std::move(c));
    }
    return graph_over_disk(fibers, rho, 1, zpowers_tail(N, rho));
}

// (z, z^2/2!, ..., z^N/N!) over the disk of radius rho
inline RectifiableCurrent factorial_graph(int N, double rho = 1.0) {
    std::vector<std::vector<Complex>> fibers;
    double fact = 1.0;
    for (int n = 2; n <= N; ++n) {
        fact *= n;
        std::vector<Complex> c(static_cast<std::size_t>(n + 1), Complex(0.0));
        c[static_cast<std::size_t>(n)] = 1.0 / fact;
        fibers.push_back(std::move(c));
    }
    return graph_over_disk(fibers, rho, 1, factorial_tail(N, rho));
}

// the two-sheet chain {w^2 = z} over the annulus r0^2 < |z| < r1^2,
// parametrized by w on the w-annulus (one cell, fibers of size two)
inline RectifiableCurrent branch_pair(double r0 = 0.5, double r1 = 1.0) {
    Expr radius = Expr::literal(Complex(r0)) +
                  Expr::literal(Complex(r1 - r0)) * Expr::param(0);
    Expr w = radius * exp(Expr::literal(Complex(0.0, kTau)) * Expr::param(1));
    std::vector<Expr> outs{w * w, w};
    return RectifiableCurrent(AmbientSpace(2), 2, {Cell(2, ExpressionMap(2, std::move(outs)))});
}

// one branch only: w covers half the annulus angle, so z covers it once;
// not a cycle (the two radial seams do not cancel)
inline RectifiableCurrent half_branch(double r0 = 0.5, double r1 = 1.0) {
    Expr radius = Expr::literal(Complex(r0)) +
                  Expr::literal(Complex(r1 - r0)) * Expr::param(0);
    Expr w = radius * exp(Expr::literal(Complex(0.0, kTau / 2.0)) * Expr::param(1));
    std::vector<Expr> outs{w * w, w};
    return RectifiableCurrent(AmbientSpace(2), 2, {Cell(2, ExpressionMap(2, std::move(outs)))});
}

// flat annulus piece {(z, 0): rin <= |z| <= rout} with multiplicity
inline RectifiableCurrent plane_piece(double rin, double rout, long long mult = 1) {
    Expr radius = Expr::literal(Complex(rin)) +
                  Expr::literal(Complex(rout - rin)) * Expr::param(0);
    Expr z = radius * exp(Expr::literal(Complex(0.0, kTau)) * Expr::param(1));
    std::vector<Expr> outs{z, Expr::literal(Complex(0.0))};
    return RectifiableCurrent(AmbientSpace(2), 2,
                              {Cell(2, ExpressionMap(2, std::move(outs)), mult)});
}

// totally real unit square {(x + 0i, y + 0i, 0, ..)} in C^N
inline RectifiableCurrent real_plane(int N = 2) {
    std::vector<Expr> outs{Expr::param(0), Expr::param(1)};
    for (int j = 2; j < N; ++j) outs.push_back(Expr::literal(Complex(0.0)));
    return RectifiableCurrent(AmbientSpace(N), 2, {Cell(2, ExpressionMap(2, std::move(outs)))});
}

// graph of (w1, w2) = (z1^2, z1 z2) over the bidisk of radius rho, in C^4
inline RectifiableCurrent bidisk_graph(double rho = 0.9) {
    Expr z1 = Expr::literal(Complex(rho)) * Expr::param(0) *
              exp(Expr::literal(Complex(0.0, kTau)) * Expr::param(1));
    Expr z2 = Expr::literal(Complex(rho)) * Expr::param(2) *
              exp(Expr::literal(Complex(0.0, kTau)) * Expr::param(3));
    std::vector<Expr> outs{z1, z2, z1 * z1, z1 * z2};
    return RectifiableCurrent(AmbientSpace(4), 4, {Cell(4, ExpressionMap(4, std::move(outs)))});
}

// boundary 3-sphere of the graph {(z, w, z*w) : |z|^2 + |w|^2 <= rho^2} in C^3
inline RectifiableCurrent s3_graph_boundary(double rho = 1.0) {
    Expr theta = Expr::literal(Complex(kTau / 4.0)) * Expr::param(0);
    Expr z = Expr::literal(Complex(rho)) * cos(theta) *
             exp(Expr::literal(Complex(0.0, kTau)) * Expr::param(1));
    Expr w = Expr::literal(Complex(rho)) * sin(theta) *
             exp(Expr::literal(Complex(0.0, kTau)) * Expr::param(2));
    std::vector<Expr> outs{z, w, z * w};
    return RectifiableCurrent(AmbientSpace(3), 3, {Cell(3, ExpressionMap(3, std::move(outs)))});
}

// totally real 3-torus {(r e^{i a}, r e^{i b}, r e^{i c})} in C^3
inline RectifiableCurrent torus3(double r = 0.9) {
    std::vector<Expr> outs;
    for (int j = 0; j < 3; ++j)
        outs.push_back(Expr::literal(Complex(r)) *
                       exp(Expr::literal(Complex(0.0, kTau)) * Expr::param(j)));
    return RectifiableCurrent(AmbientSpace(3), 3, {Cell(3, ExpressionMap(3, std::move(outs)))});
}

// ---------------------------------------------------------------------------
// Boundary-problem cycles (closed curves in C^N, shadow = first coordinate)
// ---------------------------------------------------------------------------

// graph curve over the unit circle: t |-> (g(t), F_2(g), ..) with g = e^{2 pi i t}
inline RectifiableCurrent graph_curve(const std::vector<std::vector<Complex>>& fiber_coeffs,
                                      double tail = 0.0) {
    Expr zeta = circle_expr(Complex(0.0), 1.0, 0);
    std::vector<Expr> outs{zeta};
    for (const auto& coeffs : fiber_coeffs) outs.push_back(poly_in(zeta, coeffs));
    int N = static_cast<int>(outs.size());
    return RectifiableCurrent(AmbientSpace(N), 1, {Cell(1, ExpressionMap(1, std::move(outs)))},
                              tail);
}

// (zeta, zeta^2) on the unit circle
inline RectifiableCurrent parabola_curve() { return graph_curve({{0.0, 0.0, 1.0}}); }

// (zeta, zeta^2/2!, ..., zeta^N/N!)
inline RectifiableCurrent factorial_curve(int N) {
    std::vector<std::vector<Complex>> fibers;
    double fact = 1.0;
    for (int n = 2; n <= N; ++n) {
        fact *= n;
        std::vector<Complex> c(static_cast<std::size_t>(n + 1), Complex(0.0));
        c[static_cast<std::size_t>(n)] = 1.0 / fact;
        fibers.push_back(std::move(c));
    }
    return graph_curve(fibers, factorial_tail(N, 1.0));
}

// (zeta, s*zeta^2): closed-form family for continuity checks
inline RectifiableCurrent scaled_parabola_curve(double s) {
    return graph_curve({{0.0, 0.0, Complex(s)}});
}

// moment-condition negative control: (zeta, zeta^2 + a*conj(zeta))
inline RectifiableCurrent perturbed_curve(double a = 0.1) {
    Expr zeta = circle_expr(Complex(0.0), 1.0, 0);
    std::vector<Expr> outs{zeta, zeta * zeta + Expr::literal(Complex(a)) * conj(zeta)};
    return RectifiableCurrent(AmbientSpace(2), 1, {Cell(1, ExpressionMap(1, std::move(outs)))});
}

// boundary of the branch pair: two curves (w^2, w) on |w| = r1 (+) and r0 (-);
// the shadow covers each circle twice, so the projection overlaps itself
inline RectifiableCurrent branch_boundary(double r0 = 0.5, double r1 = 1.0) {
    auto make = [&](double r) {
        Expr w = circle_expr(Complex(0.0), r, 0);
        std::vector<Expr> outs{w * w, w};
        return ExpressionMap(1, std::move(outs));
    };
    std::vector<Cell> cells;
    cells.emplace_back(1, make(r1), 1);
    cells.emplace_back(1, make(r0), -1);
    return RectifiableCurrent(AmbientSpace(2), 1, std::move(cells));
}

// limacon-type cycle: (q(w), w, w^2, ..) on |w| = 1 with q(w) = w^2 + c*w.
// The shadow has one transverse crossing; faces carry 2 / 1 / 0 sheets of the
// chain {z = q(w), |w| < 1}.
inline RectifiableCurrent limacon_curve(int N = 3, double c = 0.55) {
    Expr w = circle_expr(Complex(0.0), 1.0, 0);
    std::vector<Expr> outs{w * w + Expr::literal(Complex(c)) * w};
    for (int j = 1; j < N; ++j) outs.push_back(pow(w, j));
    return RectifiableCurrent(AmbientSpace(N), 1, {Cell(1, ExpressionMap(1, std::move(outs)))});
}

// Gerono lemniscate shadow with an embedding lift; windings are +1 / -1 on
// the two lobes (arrangement fixture; bounds no positive chain)
inline RectifiableCurrent gerono_curve(int N = 2) {
    Expr ang = Expr::literal(Complex(kTau)) * Expr::param(0);
    Expr shadow = sin(ang) * (Expr::literal(Complex(1.0)) +
                              Expr::literal(Complex(0.0, 1.0)) * cos(ang));
    std::vector<Expr> outs{shadow, exp(Expr::literal(Complex(0.0, kTau)) * Expr::param(0))};
    for (int j = 2; j < N; ++j) outs.push_back(Expr::literal(Complex(0.0)));
    return RectifiableCurrent(AmbientSpace(N), 1, {Cell(1, ExpressionMap(1, std::move(outs)))});
}

// two disjoint circle curves, honest chain boundaries over both disks
inline RectifiableCurrent two_circles(double sep = 1.6, double rho = 0.6) {
    auto cellf = [&](Complex center, const std::vector<Complex>& fiber) {
        Expr zeta = circle_expr(center, rho, 0);
        std::vector<Expr> outs{zeta, poly_in(zeta, fiber)};
        return Cell(1, ExpressionMap(1, std::move(outs)));
    };
    std::vector<Cell> cells;
    cells.push_back(cellf(Complex(-sep, 0.0), {0.0, 0.0, 1.0})); // w = z^2
    cells.push_back(cellf(Complex(sep, 0.0), {1.5, 2.0}));       // w = 1.5 + 2z
    return RectifiableCurrent(AmbientSpace(2), 1, std::move(cells));
}

// nested circles: outer boundary of [w = z^2 over unit disk], inner boundary
// of [w = 1.5 + 2z over the disk of radius rin]; annulus face carries one
// sheet, the inner disk two
inline RectifiableCurrent nested_pair(double rin = 0.4) {
    std::vector<Cell> cells;
    {
        Expr zeta = circle_expr(Complex(0.0), 1.0, 0);
        std::vector<Expr> outs{zeta, zeta * zeta};
        cells.emplace_back(1, ExpressionMap(1, std::move(outs)), 1);
    }
    {
        Expr zeta = circle_expr(Complex(0.0), rin, 0);
        std::vector<Expr> outs{zeta, Expr::literal(Complex(1.5)) +
                                         Expr::literal(Complex(2.0)) * zeta};
        cells.emplace_back(1, ExpressionMap(1, std::move(outs)), 1);
    }
    return RectifiableCurrent(AmbientSpace(2), 1, std::move(cells));
}

// curve whose shadow degenerates: first coordinate is Re(zeta), an interval
// traversed back and forth (immersion failure fixture)
inline RectifiableCurrent collapsed_curve() {
    Expr ang = Expr::literal(Complex(kTau)) * Expr::param(0);
    std::vector<Expr> outs{cos(ang), exp(Expr::literal(Complex(0.0, kTau)) * Expr::param(0))};
    return RectifiableCurrent(AmbientSpace(2), 1, {Cell(1, ExpressionMap(1, std::move(outs)))});
}

// circle graph (zeta, zeta^2/2) used for projection fixtures
inline RectifiableCurrent circle_graph_half_square() {
    return graph_curve({{0.0, 0.0, 0.5}});
}

} // namespace fixtures
} // namespace currents
