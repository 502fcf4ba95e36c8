#pragma once

#include <string>
#include <vector>

#include "currents/expression.hpp"

namespace currents {

// Truncation of l^2 to the span of the first N basis vectors, with the
// standard hermitian product. Points are stored as 2N reals, interleaved
// (Re z1, Im z1, Re z2, ...).
struct AmbientSpace {
    int N = 1;
    std::vector<std::string> labels;

    AmbientSpace() = default;
    explicit AmbientSpace(int n) : N(n) {
        labels.reserve(static_cast<std::size_t>(n));
        for (int i = 1; i <= n; ++i) labels.push_back("z" + std::to_string(i));
    }

    int real_dim() const { return 2 * N; }
};

// Complex coordinate z_j (0-based) as an expression over 2N real inputs.
inline Expr zvar(int j) {
    return Expr::param(2 * j) + Expr::literal(Complex(0.0, 1.0)) * Expr::param(2 * j + 1);
}

inline Expr zbar(int j) {
    return Expr::param(2 * j) - Expr::literal(Complex(0.0, 1.0)) * Expr::param(2 * j + 1);
}

// Ordered subset of {0..N-1}; models both the PAS prefix projections p_t and
// the coordinate projections used for slicing.
struct CoordinateProjection {
    std::vector<int> indices;

    CoordinateProjection() = default;
    explicit CoordinateProjection(std::vector<int> idx) : indices(std::move(idx)) {}

    static CoordinateProjection prefix(int t) {
        std::vector<int> idx(static_cast<std::size_t>(t));
        for (int i = 0; i < t; ++i) idx[static_cast<std::size_t>(i)] = i;
        return CoordinateProjection(std::move(idx));
    }

    int target_dim() const { return static_cast<int>(indices.size()); }

    void check_range(int N) const {
        for (int i : indices)
            if (i < 0 || i >= N)
                throw std::out_of_range("coordinate index out of range for ambient dimension");
    }

    // H -> C^|I|, selecting the indexed coordinates.
    ExpressionMap selection_map(int N) const {
        check_range(N);
        std::vector<Expr> outs;
        outs.reserve(indices.size());
        for (int i : indices) outs.push_back(zvar(i));
        return ExpressionMap(2 * N, std::move(outs), /*holomorphic=*/true);
    }

    // H -> H, zeroing the complement; realizes p_t inside the ambient space.
    ExpressionMap truncation_map(int N) const {
        check_range(N);
        std::vector<bool> keep(static_cast<std::size_t>(N), false);
        for (int i : indices) keep[static_cast<std::size_t>(i)] = true;
        std::vector<Expr> outs;
        outs.reserve(static_cast<std::size_t>(N));
        for (int j = 0; j < N; ++j)
            outs.push_back(keep[static_cast<std::size_t>(j)] ? zvar(j)
                                                             : Expr::literal(Complex(0.0)));
        return ExpressionMap(2 * N, std::move(outs), /*holomorphic=*/true);
    }
};

// Weak-star distance on bounded sets, with the convergent weights 2^{-n}.
inline double weak_star_distance(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size())
        throw std::invalid_argument("weak_star_distance: dimension mismatch");
    double sum = 0.0;
    double w = 0.5;
    for (std::size_t j = 0; j + 1 < x.size(); j += 2) {
        double dr = x[j] - y[j], di = x[j + 1] - y[j + 1];
        sum += w * std::hypot(dr, di);
        w *= 0.5;
    }
    return sum;
}

} // namespace currents
