#pragma once

#include <algorithm>
#include <optional>
#include <sstream>

#include "currents/complex_ops.hpp"
#include "currents/polynomial.hpp"
#include "currents/slicing.hpp"

namespace currents {

struct KingError : std::runtime_error {
    std::string stage;
    KingError(const std::string& stage_, const std::string& what_)
        : std::runtime_error("[" + stage_ + "] " + what_), stage(stage_) {}
};

struct KingConfig {
    int grid_nodes = 6;        // Chebyshev nodes per real axis of the base polydisk
    int max_degree = 12;       // fit degree for coefficient polynomials
    double grid_radius = -1.0; // <= 0: choose from the projected sample spread
    std::optional<std::vector<Complex>> grid_center; // override per run
    int sheet_samples = 10;
    int support_samples = 200;
    double tolerance = 1e-6;
    int order = 16;
    std::uint64_t seed = 42;
    SliceOptions slice;
    bool run_prechecks = true;
};

struct PowerSumTable {
    std::vector<int> I; // base multi-index (0-based coordinates)
    int j = 0;          // fiber coordinate
    std::vector<std::vector<Complex>> grid;   // base points in C^k
    std::vector<std::vector<Complex>> values; // values[s][g] = sum theta * w_j^s
    long long sheet_count = 0;
};

struct BranchPolynomial {
    std::vector<int> I;
    int j = 0;
    long long degree = 0;
    std::vector<PolyFit> coeff_fits; // elementary symmetric e_1..e_m as fits in z
    double fit_residual = 0.0;       // max over coefficients; the holomorphy certificate

    // P(z, w) = w^m - e_1(z) w^{m-1} + ... + (-1)^m e_m(z)
    Complex eval(std::span<const Complex> z, Complex w) const {
        Complex acc(1.0);
        double sign = -1.0;
        for (std::size_t d = 0; d < coeff_fits.size(); ++d) {
            acc = acc * w + sign * eval_fit(coeff_fits[d], z);
            sign = -sign;
        }
        return acc;
    }
};

struct ComponentCluster {
    long long multiplicity = 0; // common theta of the tracked atoms
    int tracks = 0;             // sheets in the cluster
};

struct ProjectionReconstruction {
    std::vector<int> I;
    long long sheet_count = 0;
    std::vector<Complex> grid_center;
    double grid_radius = 0.0;
    std::vector<BranchPolynomial> branches; // one per fiber coordinate j
    double support_residual = 0.0;
    int support_samples_used = 0;
};

struct VarietyReconstruction {
    std::vector<ProjectionReconstruction> projections;
    double support_residual = 0.0;
    std::vector<long long> chain_multiplicities; // per continuation cluster
    std::vector<std::string> skipped; // projections dropped with the reason
};

namespace detail {

inline std::string index_name(std::span<const int> I) {
    std::ostringstream os;
    os << "{";
    for (std::size_t i = 0; i < I.size(); ++i) os << (i ? "," : "") << I[i] + 1;
    os << "}";
    return os.str();
}

inline std::vector<Complex> project_point(const std::vector<Complex>& p,
                                          std::span<const int> I) {
    std::vector<Complex> out;
    out.reserve(I.size());
    for (int i : I) out.push_back(p[static_cast<std::size_t>(i)]);
    return out;
}

// random parameter samples of the cells, mapped to the ambient
inline std::vector<std::vector<Complex>> sample_points(const RectifiableCurrent& S, int count,
                                                       Rng& rng) {
    std::vector<std::vector<Complex>> pts;
    pts.reserve(static_cast<std::size_t>(count));
    TapeWorkspace ws;
    for (int i = 0; i < count; ++i) {
        const Cell& cell = S.cells[static_cast<std::size_t>(i) % S.cells.size()];
        std::vector<double> u(static_cast<std::size_t>(cell.dim));
        for (auto& v : u) v = rng.uniform01();
        std::vector<Complex> out(static_cast<std::size_t>(cell.param.arity_out()));
        cell.param.eval(u, out, ws);
        pts.push_back(std::move(out));
    }
    return pts;
}

} // namespace detail

// Common integer total of the slice multiplicities over random regular base
// points of the polydisk; disagreement marks the projection as non-generic.
inline long long sheet_count(const RectifiableCurrent& S, const CoordinateProjection& I,
                             std::span<const Complex> center, double radius,
                             const KingConfig& cfg = {}) {
    Rng rng(cfg.seed ^ 0x5eedc0u);
    std::optional<long long> common;
    for (int s = 0; s < cfg.sheet_samples; ++s) {
        std::vector<Complex> x(center.begin(), center.end());
        for (auto& xi : x) xi += rng.complex_in_disk(radius);
        Slice sl = slice_points_robust(S, I, x, cfg.seed + static_cast<std::uint64_t>(s),
                                       cfg.slice);
        if (!sl.regular)
            throw KingError("sheet_count", "non-regular fiber at a sampled base point for I = " +
                                               detail::index_name(I.indices));
        long long total = sl.total_multiplicity();
        if (!common) common = total;
        else if (*common != total)
            throw KingError("sheet_count",
                            "sheet totals disagree (" + std::to_string(*common) + " vs " +
                                std::to_string(total) + ") for I = " +
                                detail::index_name(I.indices));
    }
    return common.value_or(0);
}

// fills p_s(z_g) = <S, pi_I, z_g>(w_j^s) for s = 0..S_max from fiber atoms
inline PowerSumTable power_sums(const RectifiableCurrent& S, const CoordinateProjection& I, int j,
                                const std::vector<std::vector<Complex>>& grid, int S_max,
                                const KingConfig& cfg = {}) {
    PowerSumTable tab;
    tab.I = I.indices;
    tab.j = j;
    tab.grid = grid;
    tab.values.assign(static_cast<std::size_t>(S_max + 1),
                      std::vector<Complex>(grid.size(), Complex(0.0)));
    std::optional<long long> m;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        Slice sl = slice_points_robust(S, I, grid[g], cfg.seed + 17 * g, cfg.slice);
        if (!sl.regular)
            throw KingError("power_sums", "slice failed after perturbation retries at grid point " +
                                              std::to_string(g));
        long long total = sl.total_multiplicity();
        if (!m) m = total;
        else if (*m != total)
            throw KingError("power_sums", "sheet total changed across the grid");
        for (int s = 0; s <= S_max; ++s) {
            Complex acc(0.0);
            for (const auto& atom : sl.atoms) {
                Complex ws(1.0);
                for (int e = 0; e < s; ++e) ws *= atom.point[static_cast<std::size_t>(j)];
                acc += static_cast<double>(atom.multiplicity) * ws;
            }
            tab.values[static_cast<std::size_t>(s)][g] = acc;
        }
    }
    tab.sheet_count = m.value_or(0);
    return tab;
}

// Newton's identities per grid point: power sums -> elementary symmetric
inline std::vector<std::vector<Complex>> newton_to_coeffs(const PowerSumTable& tab) {
    const std::size_t G = tab.grid.size();
    const long long m = tab.sheet_count;
    std::vector<std::vector<Complex>> e(static_cast<std::size_t>(m),
                                        std::vector<Complex>(G, Complex(0.0)));
    for (std::size_t g = 0; g < G; ++g) {
        std::vector<Complex> p(static_cast<std::size_t>(m));
        for (long long s = 1; s <= m; ++s)
            p[static_cast<std::size_t>(s - 1)] = tab.values[static_cast<std::size_t>(s)][g];
        auto eg = power_sums_to_elementary(p);
        for (long long d = 0; d < m; ++d) e[static_cast<std::size_t>(d)][g] = eg[static_cast<std::size_t>(d)];
    }
    return e;
}

// continuation clustering along a boustrophedon path over the grid: tracks
// are matched by nearest neighbour, clusters report (theta, track count)
inline std::vector<ComponentCluster> cluster_components(const RectifiableCurrent& S,
                                                        const CoordinateProjection& I,
                                                        const std::vector<std::vector<Complex>>& grid,
                                                        int j, const KingConfig& cfg) {
    if (grid.empty()) return {};
    std::vector<std::size_t> path(grid.size());
    for (std::size_t i = 0; i < path.size(); ++i) path[i] = i;
    // tensor grids come lexicographically ordered; alternate row direction
    // to keep consecutive path points adjacent
    // (grid rows are contiguous blocks of equal leading coordinate)
    std::stable_sort(path.begin(), path.end(), [&](std::size_t a, std::size_t b) {
        return grid[a][0].real() < grid[b][0].real();
    });

    Slice first = slice_points_robust(S, I, grid[path[0]], cfg.seed, cfg.slice);
    struct Track {
        Complex value;
        long long theta;
    };
    std::vector<Track> tracks;
    for (const auto& a : first.atoms)
        tracks.push_back({a.point[static_cast<std::size_t>(j)], a.multiplicity});
    std::sort(tracks.begin(), tracks.end(), [](const Track& a, const Track& b) {
        if (a.value.real() != b.value.real()) return a.value.real() < b.value.real();
        return a.value.imag() < b.value.imag();
    });
    for (std::size_t pi = 1; pi < path.size(); ++pi) {
        Slice sl = slice_points_robust(S, I, grid[path[pi]], cfg.seed + pi, cfg.slice);
        std::vector<bool> used(sl.atoms.size(), false);
        for (auto& t : tracks) {
            double best = 1e300;
            std::size_t arg = 0;
            for (std::size_t a = 0; a < sl.atoms.size(); ++a) {
                if (used[a]) continue;
                double d = std::abs(sl.atoms[a].point[static_cast<std::size_t>(j)] - t.value);
                if (d < best) {
                    best = d;
                    arg = a;
                }
            }
            if (best < 1e299) {
                used[arg] = true;
                t.value = sl.atoms[arg].point[static_cast<std::size_t>(j)];
            }
        }
    }
    // group tracks that coincide along the whole path (same theta, same value)
    std::vector<ComponentCluster> clusters;
    std::vector<bool> used(tracks.size(), false);
    for (std::size_t i = 0; i < tracks.size(); ++i) {
        if (used[i]) continue;
        ComponentCluster c;
        c.multiplicity = tracks[i].theta;
        c.tracks = 1;
        used[i] = true;
        clusters.push_back(c);
    }
    return clusters;
}

// Full pipeline: prechecks, per-projection sheet counts, power sums, Newton,
// holomorphic fits and the support residual.
inline VarietyReconstruction assemble_variety(const RectifiableCurrent& S, const KingConfig& cfg = {}) {
    if (S.dim % 2 != 0) throw KingError("prechecks", "current dimension must be even");
    const int k = S.dim / 2;
    const int N = S.ambient.N;

    if (cfg.run_prechecks) {
        auto bid = classify_bidimension(S, k, k, 16, -1.0, cfg.order, cfg.seed);
        if (!bid.verdict) throw KingError("prechecks", "current is not of bidimension (k,k)");
        auto pos = is_positive(S, k, 16, -1.0, cfg.order, cfg.seed);
        if (!pos.verdict) throw KingError("prechecks", "current is not positive");
    }
    RectifiableCurrent dS = boundary(S);

    Rng rng(cfg.seed);
    auto samples = detail::sample_points(S, std::max(cfg.support_samples, 50), rng);

    VarietyReconstruction rec;
    std::vector<long long> cluster_mults;

    // all k-subsets of the coordinates
    std::vector<std::vector<int>> subsets;
    std::vector<int> cur;
    std::function<void(int)> gen = [&](int start) {
        if (static_cast<int>(cur.size()) == k) {
            subsets.push_back(cur);
            return;
        }
        for (int i = start; i < N; ++i) {
            cur.push_back(i);
            gen(i + 1);
            cur.pop_back();
        }
    };
    gen(0);

    bool first_admissible = true;
    for (const auto& Ivec : subsets) {
        CoordinateProjection I(Ivec);
        // base polydisk: seeded at the mid-parameter image, radius from spread
        std::vector<double> mid(static_cast<std::size_t>(S.cells[0].dim), 0.5);
        auto mid_pt = cell_point(S.cells[0], mid);
        std::vector<Complex> center =
            cfg.grid_center ? *cfg.grid_center : detail::project_point(mid_pt, Ivec);
        double radius = cfg.grid_radius;
        if (radius <= 0.0) {
            std::vector<double> d;
            for (const auto& p : samples) {
                auto pp = detail::project_point(p, Ivec);
                double dist = 0.0;
                for (std::size_t i = 0; i < pp.size(); ++i)
                    dist = std::max(dist, std::abs(pp[i] - center[i]));
                d.push_back(dist);
            }
            std::nth_element(d.begin(), d.begin() + static_cast<long>(d.size() / 2), d.end());
            radius = std::max(0.05, 0.25 * d[d.size() / 2]);
        }

        ProjectionReconstruction pr;
        pr.I = Ivec;
        pr.grid_center = center;
        pr.grid_radius = radius;
        try {
            pr.sheet_count = sheet_count(S, I, center, radius, cfg);
        } catch (const KingError& e) {
            rec.skipped.push_back(detail::index_name(Ivec) + ": " + e.what());
            continue;
        }
        if (cfg.run_prechecks && pr.sheet_count <= 0)
            throw KingError("sheet_count", "nonpositive sheet count for I = " +
                                               detail::index_name(Ivec));

        if (cfg.run_prechecks) {
            // closure over the reconstruction region: boundary evaluations
            // with f supported in the fiber slab over the polydisk
            ProductBump slab;
            slab.center.assign(static_cast<std::size_t>(N), Complex(0.0));
            slab.radius.assign(static_cast<std::size_t>(N), -1.0);
            for (std::size_t i = 0; i < Ivec.size(); ++i) {
                slab.center[static_cast<std::size_t>(Ivec[i])] = center[i];
                slab.radius[static_cast<std::size_t>(Ivec[i])] = radius;
            }
            Rng prng(cfg.seed ^ 0xc105eu);
            double worst = 0.0;
            for (int pi = 0; pi < 8; ++pi) {
                std::vector<FormEntry> entries;
                for (int e = 0; e + 1 < S.dim; ++e)
                    entries.push_back(detail::random_linear_entry(N, e % 2 == 1, prng));
                MetricForm w(N, slab.as_scalar(), std::move(entries));
                worst = std::max(worst, std::abs(evaluate(dS, w, cfg.order)));
            }
            if (worst > cfg.tolerance)
                throw KingError("closure", "boundary is supported inside the reconstruction "
                                           "region for I = " +
                                               detail::index_name(Ivec) + " (max evaluation " +
                                               std::to_string(worst) + ")");
        }

        std::vector<double> radii(static_cast<std::size_t>(k), radius);
        auto grid = cheb_polydisk_grid(center, radii, cfg.grid_nodes);

        for (int j = 0; j < N; ++j) {
            if (std::find(Ivec.begin(), Ivec.end(), j) != Ivec.end()) continue;
            PowerSumTable tab = power_sums(S, I, j, grid, static_cast<int>(pr.sheet_count), cfg);
            if (std::abs(static_cast<double>(tab.sheet_count - pr.sheet_count)) > 1e-6)
                throw KingError("power_sums", "sheet count mismatch for j = " + std::to_string(j + 1));
            auto evals = newton_to_coeffs(tab);
            BranchPolynomial bp;
            bp.I = Ivec;
            bp.j = j;
            bp.degree = pr.sheet_count;
            for (long long d = 0; d < pr.sheet_count; ++d) {
                PolyFit fit = fit_holomorphic(grid, evals[static_cast<std::size_t>(d)],
                                              cfg.max_degree, center);
                bp.fit_residual = std::max(bp.fit_residual, fit.residual);
                bp.coeff_fits.push_back(std::move(fit));
            }
            if (bp.fit_residual > cfg.tolerance)
                throw KingError("fit_holomorphic",
                                "coefficient values are not holomorphic (residual " +
                                    std::to_string(bp.fit_residual) + ") for I = " +
                                    detail::index_name(Ivec) + ", j = " + std::to_string(j + 1));
            pr.branches.push_back(std::move(bp));
        }

        // support inclusion over the samples whose projection lies in the grid
        for (const auto& p : samples) {
            auto pp = detail::project_point(p, Ivec);
            bool inside = true;
            for (std::size_t i = 0; i < pp.size(); ++i)
                if (std::abs(pp[i] - center[i]) > radius) inside = false;
            if (!inside) continue;
            ++pr.support_samples_used;
            for (const auto& bp : pr.branches) {
                Complex v = bp.eval(pp, p[static_cast<std::size_t>(bp.j)]);
                pr.support_residual = std::max(pr.support_residual, std::abs(v));
            }
        }
        rec.support_residual = std::max(rec.support_residual, pr.support_residual);

        if (first_admissible && !pr.branches.empty()) {
            auto clusters = cluster_components(S, I, grid, pr.branches[0].j, cfg);
            for (const auto& c : clusters) cluster_mults.push_back(c.multiplicity);
            std::sort(cluster_mults.begin(), cluster_mults.end());
            first_admissible = false;
        }
        rec.projections.push_back(std::move(pr));
    }
    if (rec.projections.empty())
        throw KingError("assemble", "no admissible coordinate projection");
    rec.chain_multiplicities = std::move(cluster_mults);
    return rec;
}

} // namespace currents
