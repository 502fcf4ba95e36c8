#pragma once

#include "currents/current.hpp"
#include "currents/fixtures.hpp"
#include "currents/rng.hpp"

namespace currents {

// (p_I)_# T through the coordinate truncation; the ambient stays fixed so the
// projected current remains comparable against the same forms. Orthogonal
// projections have norm 1, so mass can only shrink (up to quadrature).
inline RectifiableCurrent project_current(const CoordinateProjection& I,
                                          const RectifiableCurrent& T) {
    I.check_range(T.ambient.N);
    RectifiableCurrent P = pushforward(I.truncation_map(T.ambient.N), T);
    // the truncation drops coordinates: fold their sup into the tail budget
    std::vector<bool> keep(static_cast<std::size_t>(T.ambient.N), false);
    for (int i : I.indices) keep[static_cast<std::size_t>(i)] = true;
    Box b = support_bbox(T);
    double extra2 = 0.0;
    for (int j = 0; j < T.ambient.N; ++j) {
        if (keep[static_cast<std::size_t>(j)]) continue;
        double mr = std::max(std::abs(b.lo[static_cast<std::size_t>(2 * j)]),
                             std::abs(b.hi[static_cast<std::size_t>(2 * j)]));
        double mi = std::max(std::abs(b.lo[static_cast<std::size_t>(2 * j + 1)]),
                             std::abs(b.hi[static_cast<std::size_t>(2 * j + 1)]));
        extra2 += mr * mr + mi * mi;
    }
    P.tail_budget = T.tail_budget + std::sqrt(extra2);
    return P;
}

struct PasReport {
    std::vector<int> prefixes;
    std::vector<std::vector<double>> entries; // [prefix][probe]
};

// |evaluate(T_t, w) - evaluate(T, w)| for the prefix projections T_t.
inline PasReport pas_convergence_report(const RectifiableCurrent& T,
                                        const std::vector<int>& prefixes,
                                        const std::vector<MetricForm>& probes, int order = 16) {
    PasReport rep;
    rep.prefixes = prefixes;
    std::vector<Complex> full;
    full.reserve(probes.size());
    for (const auto& w : probes) full.push_back(evaluate(T, w, order));
    for (int t : prefixes) {
        RectifiableCurrent Tt = project_current(CoordinateProjection::prefix(t), T);
        std::vector<double> row;
        row.reserve(probes.size());
        for (std::size_t i = 0; i < probes.size(); ++i)
            row.push_back(std::abs(evaluate(Tt, probes[i], order) - full[i]));
        rep.entries.push_back(std::move(row));
    }
    return rep;
}

// Probes whose coefficients involve every coordinate: (1, L, conj(L), ...)
// with L = sum_m c_m z_m. Projection error then tracks the discarded tail.
inline std::vector<MetricForm> full_coordinate_probes(int N, int degree, int count,
                                                      std::uint64_t seed) {
    Rng rng(seed);
    std::vector<MetricForm> probes;
    probes.reserve(static_cast<std::size_t>(count));
    for (int p = 0; p < count; ++p) {
        std::vector<FormEntry> entries;
        for (int e = 0; e < degree; ++e) {
            std::vector<Complex> a(static_cast<std::size_t>(N));
            double norm = 1.0 / std::sqrt(static_cast<double>(N));
            for (int m = 0; m < N; ++m)
                a[static_cast<std::size_t>(m)] = norm * rng.complex_in_box(-1.0, 1.0);
            std::vector<Complex> zero(static_cast<std::size_t>(N), Complex(0.0));
            // alternate holomorphic / antiholomorphic entries
            if (e % 2 == 0) entries.push_back(affine_entry(N, a, zero));
            else entries.push_back(affine_entry(N, zero, a));
        }
        probes.emplace_back(N, FormScalar::one(N), std::move(entries));
    }
    return probes;
}

} // namespace currents
