#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <complex>
#include <functional>
#include <limits>
#include <vector>

#include "currents/expression.hpp"

namespace currents {

// Newton's identities: power sums p_1..p_m -> elementary symmetric e_1..e_m
// via d*e_d = sum_{i=1..d} (-1)^{i-1} e_{d-i} p_i.
inline std::vector<Complex> power_sums_to_elementary(std::span<const Complex> p) {
    const std::size_t m = p.size();
    std::vector<Complex> e(m + 1, Complex(0.0));
    e[0] = 1.0;
    for (std::size_t d = 1; d <= m; ++d) {
        Complex acc(0.0);
        double sign = 1.0;
        for (std::size_t i = 1; i <= d; ++i) {
            acc += sign * e[d - i] * p[i - 1];
            sign = -sign;
        }
        e[d] = acc / static_cast<double>(d);
    }
    return std::vector<Complex>(e.begin() + 1, e.end());
}

// inverse direction, p_d = e_1 p_{d-1} - e_2 p_{d-2} + ... +- d*e_d
inline std::vector<Complex> elementary_to_power_sums(std::span<const Complex> e, int count) {
    std::vector<Complex> p(static_cast<std::size_t>(count), Complex(0.0));
    const std::size_t m = e.size();
    for (int d = 1; d <= count; ++d) {
        Complex acc(0.0);
        double sign = 1.0;
        for (int i = 1; i < d; ++i) {
            if (static_cast<std::size_t>(i) <= m)
                acc += sign * e[static_cast<std::size_t>(i - 1)] * p[static_cast<std::size_t>(d - i - 1)];
            sign = -sign;
        }
        if (static_cast<std::size_t>(d) <= m)
            acc += sign * static_cast<double>(d) * e[static_cast<std::size_t>(d - 1)];
        p[static_cast<std::size_t>(d - 1)] = acc;
    }
    return p;
}

// monic coefficients (descending from W^{m-1} down to W^0) of
// prod (W - r_i) expressed through the elementary symmetric values
inline std::vector<Complex> elementary_to_monic(std::span<const Complex> e) {
    std::vector<Complex> c(e.size());
    double sign = -1.0;
    for (std::size_t d = 0; d < e.size(); ++d) {
        c[d] = sign * e[d];
        sign = -sign;
    }
    return c;
}

// roots of W^m + c[0] W^{m-1} + ... + c[m-1] via the companion matrix
inline std::vector<Complex> monic_roots(std::span<const Complex> c) {
    const int m = static_cast<int>(c.size());
    if (m == 0) return {};
    if (m == 1) return {-c[0]};
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(m, m);
    for (int i = 1; i < m; ++i) A(i, i - 1) = 1.0;
    for (int i = 0; i < m; ++i) A(i, m - 1) = -c[static_cast<std::size_t>(m - 1 - i)];
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(A, /*computeEigenvectors=*/false);
    std::vector<Complex> roots(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) roots[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
    return roots;
}

inline Complex eval_monic(std::span<const Complex> c, Complex w) {
    Complex acc(1.0);
    for (std::size_t i = 0; i < c.size(); ++i) acc = acc * w + c[i];
    return acc;
}

// ---------------------------------------------------------------------------
// Holomorphic polynomial fitting on point grids
// ---------------------------------------------------------------------------

// Chebyshev tensor grid in the polydisk around `center` with the given radii:
// per complex axis, Chebyshev nodes offset both the real and imaginary part.
inline std::vector<std::vector<Complex>> cheb_polydisk_grid(std::span<const Complex> center,
                                                            std::span<const double> radius,
                                                            int nodes_per_axis) {
    const int k = static_cast<int>(center.size());
    std::vector<double> cheb(static_cast<std::size_t>(nodes_per_axis));
    for (int i = 0; i < nodes_per_axis; ++i)
        cheb[static_cast<std::size_t>(i)] =
            std::cos(3.14159265358979323846 * (2.0 * i + 1.0) / (2.0 * nodes_per_axis));
    // scale so the square grid stays inside the disk of the given radius
    const double s = 1.0 / std::sqrt(2.0);
    std::vector<std::vector<Complex>> pts;
    std::vector<int> idx(static_cast<std::size_t>(2 * k), 0);
    std::size_t total = 1;
    for (int i = 0; i < 2 * k; ++i) total *= static_cast<std::size_t>(nodes_per_axis);
    pts.reserve(total);
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t rem = flat;
        std::vector<Complex> p(static_cast<std::size_t>(k));
        for (int ax = 2 * k - 1; ax >= 0; --ax) {
            idx[static_cast<std::size_t>(ax)] = static_cast<int>(rem % nodes_per_axis);
            rem /= static_cast<std::size_t>(nodes_per_axis);
        }
        for (int c = 0; c < k; ++c) {
            double re = center[static_cast<std::size_t>(c)].real() +
                        radius[static_cast<std::size_t>(c)] * s *
                            cheb[static_cast<std::size_t>(idx[static_cast<std::size_t>(2 * c)])];
            double im = center[static_cast<std::size_t>(c)].imag() +
                        radius[static_cast<std::size_t>(c)] * s *
                            cheb[static_cast<std::size_t>(idx[static_cast<std::size_t>(2 * c + 1)])];
            p[static_cast<std::size_t>(c)] = Complex(re, im);
        }
        pts.push_back(std::move(p));
    }
    return pts;
}

struct PolyFit {
    std::vector<std::vector<int>> monomials; // exponent vectors, degree <= max_deg
    std::vector<Complex> coeffs;
    double residual = 0.0;       // max |fit - value| on the grid
    double condition = 0.0;      // Vandermonde condition estimate
    std::vector<Complex> center; // fit variables are (z - center)
};

inline std::vector<std::vector<int>> graded_monomials(int k, int max_deg) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur(static_cast<std::size_t>(k), 0);
    std::function<void(int, int)> rec = [&](int pos, int rem) {
        if (pos == k - 1) {
            cur[static_cast<std::size_t>(pos)] = rem;
            out.push_back(cur);
            return;
        }
        for (int v = rem; v >= 0; --v) {
            cur[static_cast<std::size_t>(pos)] = v;
            rec(pos + 1, rem - v);
        }
    };
    for (int m = 0; m <= max_deg; ++m) rec(0, m);
    return out;
}

// Least-squares fit of grid values by holomorphic monomials in (z - center);
// since the basis carries no conjugates, the residual doubles as the
// holomorphy certificate of the sampled function.
inline PolyFit fit_holomorphic(const std::vector<std::vector<Complex>>& grid,
                               std::span<const Complex> values, int max_deg,
                               std::span<const Complex> center) {
    PolyFit fit;
    const int k = static_cast<int>(grid.empty() ? 0 : grid[0].size());
    fit.monomials = graded_monomials(k, max_deg);
    fit.center.assign(center.begin(), center.end());
    const Eigen::Index rows = static_cast<Eigen::Index>(grid.size());
    const Eigen::Index cols = static_cast<Eigen::Index>(fit.monomials.size());
    Eigen::MatrixXcd A(rows, cols);
    Eigen::VectorXcd b(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto& z = grid[static_cast<std::size_t>(r)];
        for (Eigen::Index c = 0; c < cols; ++c) {
            Complex m(1.0);
            const auto& exps = fit.monomials[static_cast<std::size_t>(c)];
            for (int j = 0; j < k; ++j) {
                Complex base = z[static_cast<std::size_t>(j)] - center[static_cast<std::size_t>(j)];
                for (int e = 0; e < exps[static_cast<std::size_t>(j)]; ++e) m *= base;
            }
            A(r, c) = m;
        }
        b(r) = values[static_cast<std::size_t>(r)];
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Eigen::VectorXcd x = svd.solve(b);
    double smin = svd.singularValues()(svd.singularValues().size() - 1);
    fit.condition = smin > 0.0 ? svd.singularValues()(0) / smin
                               : std::numeric_limits<double>::infinity();
    fit.coeffs.resize(static_cast<std::size_t>(cols));
    for (Eigen::Index c = 0; c < cols; ++c) fit.coeffs[static_cast<std::size_t>(c)] = x(c);
    Eigen::VectorXcd r = A * x - b;
    fit.residual = r.size() ? r.cwiseAbs().maxCoeff() : 0.0;
    return fit;
}

inline Complex eval_fit(const PolyFit& fit, std::span<const Complex> z) {
    Complex acc(0.0);
    for (std::size_t m = 0; m < fit.monomials.size(); ++m) {
        Complex term = fit.coeffs[m];
        for (std::size_t j = 0; j < fit.center.size(); ++j) {
            Complex base = z[j] - fit.center[j];
            for (int e = 0; e < fit.monomials[m][j]; ++e) term *= base;
        }
        acc += term;
    }
    return acc;
}

// expression form of a univariate fit, for building graph cells
inline Expr fit_to_expr(const PolyFit& fit, const Expr& z) {
    Expr shifted = z - Expr::literal(fit.center.empty() ? Complex(0.0) : fit.center[0]);
    int max_e = 0;
    for (const auto& m : fit.monomials) max_e = std::max(max_e, m[0]);
    std::vector<Complex> asc(static_cast<std::size_t>(max_e + 1), Complex(0.0));
    for (std::size_t m = 0; m < fit.monomials.size(); ++m)
        asc[static_cast<std::size_t>(fit.monomials[m][0])] += fit.coeffs[m];
    Expr acc = Expr::literal(asc.back());
    for (std::size_t i = asc.size() - 1; i-- > 0;)
        acc = acc * shifted + Expr::literal(asc[i]);
    return acc;
}

// Solves the Vandermonde system V(base)^T-style pairing: given n distinct
// anchor values base_h and mixed sums M_s = sum_h base_h^s * y_h for
// s = 0..n-1, recovers the y_h aligned with the anchors.
inline std::vector<Complex> vandermonde_solve(std::span<const Complex> base,
                                              std::span<const Complex> mixed) {
    const int n = static_cast<int>(base.size());
    Eigen::MatrixXcd V(n, n);
    Eigen::VectorXcd rhs(n);
    for (int s = 0; s < n; ++s) {
        for (int h = 0; h < n; ++h) {
            Complex p(1.0);
            for (int e = 0; e < s; ++e) p *= base[static_cast<std::size_t>(h)];
            V(s, h) = p;
        }
        rhs(s) = mixed[static_cast<std::size_t>(s)];
    }
    Eigen::VectorXcd y = V.colPivHouseholderQr().solve(rhs);
    std::vector<Complex> out(static_cast<std::size_t>(n));
    for (int h = 0; h < n; ++h) out[static_cast<std::size_t>(h)] = y(h);
    return out;
}

} // namespace currents
