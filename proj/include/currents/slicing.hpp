#pragma once

#include "currents/complex_ops.hpp"
#include "currents/current.hpp"
#include "currents/rng.hpp"

namespace currents {

struct SliceAtom {
    std::vector<Complex> point; // ambient coordinates
    std::vector<double> param;  // preimage in the cell cube
    int cell = 0;
    long long multiplicity = 0; // cell theta times orientation sign of the fiber map
    double jacobian = 0.0;      // |det| of the real Jacobian at the root
};

struct Slice {
    std::vector<Complex> base;
    std::vector<SliceAtom> atoms;
    bool regular = true;

    long long total_multiplicity() const {
        long long s = 0;
        for (const auto& a : atoms) s += a.multiplicity;
        return s;
    }
};

struct SliceOptions {
    int starts_per_axis = 32;
    int max_iterations = 50;
    double residual_tol = 1e-11;
    double dedup_tol = 1e-8;
    double jacobian_threshold = 1e-6;
    double domain_slack = 1e-7;
};

namespace detail {

// solve A x = b for small real systems, Gaussian elimination with pivoting
inline bool solve_small(std::vector<double> A, std::vector<double> b, int n,
                        std::vector<double>& x) {
    for (int c = 0; c < n; ++c) {
        int piv = c;
        double best = std::abs(A[static_cast<std::size_t>(c) * n + c]);
        for (int r = c + 1; r < n; ++r) {
            double m = std::abs(A[static_cast<std::size_t>(r) * n + c]);
            if (m > best) {
                best = m;
                piv = r;
            }
        }
        if (best < 1e-300) return false;
        if (piv != c) {
            for (int j = 0; j < n; ++j)
                std::swap(A[static_cast<std::size_t>(piv) * n + j],
                          A[static_cast<std::size_t>(c) * n + j]);
            std::swap(b[static_cast<std::size_t>(piv)], b[static_cast<std::size_t>(c)]);
        }
        for (int r = c + 1; r < n; ++r) {
            double f = A[static_cast<std::size_t>(r) * n + c] / A[static_cast<std::size_t>(c) * n + c];
            for (int j = c; j < n; ++j)
                A[static_cast<std::size_t>(r) * n + j] -= f * A[static_cast<std::size_t>(c) * n + j];
            b[static_cast<std::size_t>(r)] -= f * b[static_cast<std::size_t>(c)];
        }
    }
    x.assign(static_cast<std::size_t>(n), 0.0);
    for (int r = n - 1; r >= 0; --r) {
        double acc = b[static_cast<std::size_t>(r)];
        for (int j = r + 1; j < n; ++j)
            acc -= A[static_cast<std::size_t>(r) * n + j] * x[static_cast<std::size_t>(j)];
        x[static_cast<std::size_t>(r)] = acc / A[static_cast<std::size_t>(r) * n + r];
    }
    return true;
}

inline double det_small(std::vector<double> A, int n) {
    double det = 1.0;
    for (int c = 0; c < n; ++c) {
        int piv = c;
        double best = std::abs(A[static_cast<std::size_t>(c) * n + c]);
        for (int r = c + 1; r < n; ++r) {
            double m = std::abs(A[static_cast<std::size_t>(r) * n + c]);
            if (m > best) {
                best = m;
                piv = r;
            }
        }
        if (best == 0.0) return 0.0;
        if (piv != c) {
            for (int j = 0; j < n; ++j)
                std::swap(A[static_cast<std::size_t>(piv) * n + j],
                          A[static_cast<std::size_t>(c) * n + j]);
            det = -det;
        }
        det *= A[static_cast<std::size_t>(c) * n + c];
        for (int r = c + 1; r < n; ++r) {
            double f = A[static_cast<std::size_t>(r) * n + c] / A[static_cast<std::size_t>(c) * n + c];
            for (int j = c; j < n; ++j)
                A[static_cast<std::size_t>(r) * n + j] -= f * A[static_cast<std::size_t>(c) * n + j];
        }
    }
    return det;
}

} // namespace detail

// Fiber of the coordinate projection pi_I over x as weighted points, found by
// damped Newton from a dense start grid. Requires 2|I| = T.dim so the fiber
// is zero-dimensional.
inline Slice slice_points(const RectifiableCurrent& T, const CoordinateProjection& I,
                          std::span<const Complex> x, const SliceOptions& opt = {}) {
    const int m = I.target_dim();
    if (2 * m != T.dim)
        throw DimensionMismatch("slice_points: need 2|I| = dim T for point slices");
    I.check_range(T.ambient.N);
    if (static_cast<int>(x.size()) != m)
        throw DimensionMismatch("slice_points: base point dimension mismatch");

    Slice slice;
    slice.base.assign(x.begin(), x.end());
    const int k = T.dim;
    double xscale = 1.0;
    for (const auto& xi : x) xscale = std::max(xscale, std::abs(xi));

    for (std::size_t ci = 0; ci < T.cells.size(); ++ci) {
        const Cell& cell = T.cells[ci];
        const int N = cell.param.arity_out();
        TapeWorkspace ws;
        std::vector<double> seed(static_cast<std::size_t>(k) * k, 0.0);
        for (int i = 0; i < k; ++i) seed[static_cast<std::size_t>(i) * k + i] = 1.0;
        std::vector<Complex> values(static_cast<std::size_t>(N));
        std::vector<Complex> jac(static_cast<std::size_t>(N) * k);

        auto residual_and_jac = [&](const double* u, std::vector<double>& r,
                                    std::vector<double>& J) {
            cell.param.eval_jet(std::span<const double>(u, static_cast<std::size_t>(k)),
                                seed.data(), k, values, jac.data(), ws);
            r.resize(static_cast<std::size_t>(k));
            J.resize(static_cast<std::size_t>(k) * k);
            for (int i = 0; i < m; ++i) {
                Complex diff = values[static_cast<std::size_t>(I.indices[static_cast<std::size_t>(i)])] -
                               x[static_cast<std::size_t>(i)];
                r[static_cast<std::size_t>(2 * i)] = diff.real();
                r[static_cast<std::size_t>(2 * i + 1)] = diff.imag();
                for (int j = 0; j < k; ++j) {
                    Complex d = jac[static_cast<std::size_t>(I.indices[static_cast<std::size_t>(i)]) * k + j];
                    J[static_cast<std::size_t>(2 * i) * k + j] = d.real();
                    J[static_cast<std::size_t>(2 * i + 1) * k + j] = d.imag();
                }
            }
        };

        std::vector<SliceAtom> found;
        std::vector<double> r, J, du, u(static_cast<std::size_t>(k)), utrial(static_cast<std::size_t>(k));
        const int S = opt.starts_per_axis;
        std::size_t total = 1;
        for (int i = 0; i < k; ++i) total *= static_cast<std::size_t>(S);
        for (std::size_t flat = 0; flat < total; ++flat) {
            std::size_t rem = flat;
            for (int ax = k - 1; ax >= 0; --ax) {
                u[static_cast<std::size_t>(ax)] =
                    (static_cast<double>(rem % static_cast<std::size_t>(S)) + 0.5) / S;
                rem /= static_cast<std::size_t>(S);
            }
            bool ok = false;
            double rn = 0.0;
            for (int it = 0; it < opt.max_iterations; ++it) {
                residual_and_jac(u.data(), r, J);
                rn = 0.0;
                for (double v : r) rn = std::max(rn, std::abs(v));
                if (rn < opt.residual_tol * xscale) {
                    ok = true;
                    break;
                }
                std::vector<double> rhs(r.size());
                for (std::size_t i = 0; i < r.size(); ++i) rhs[i] = -r[i];
                if (!detail::solve_small(J, rhs, k, du)) break;
                double lambda = 1.0;
                bool stepped = false;
                for (int bt = 0; bt < 12; ++bt) {
                    for (int i = 0; i < k; ++i) {
                        utrial[static_cast<std::size_t>(i)] =
                            u[static_cast<std::size_t>(i)] + lambda * du[static_cast<std::size_t>(i)];
                        // keep iterates near the cube
                        utrial[static_cast<std::size_t>(i)] =
                            std::clamp(utrial[static_cast<std::size_t>(i)], -0.25, 1.25);
                    }
                    std::vector<double> r2, J2;
                    residual_and_jac(utrial.data(), r2, J2);
                    double rn2 = 0.0;
                    for (double v : r2) rn2 = std::max(rn2, std::abs(v));
                    if (rn2 < (1.0 - 0.25 * lambda) * rn) {
                        u = utrial;
                        stepped = true;
                        break;
                    }
                    lambda *= 0.5;
                }
                if (!stepped) break;
            }
            if (!ok) continue;
            bool inside = true;
            for (int i = 0; i < k; ++i)
                if (u[static_cast<std::size_t>(i)] < -opt.domain_slack ||
                    u[static_cast<std::size_t>(i)] > 1.0 + opt.domain_slack)
                    inside = false;
            if (!inside) continue;
            residual_and_jac(u.data(), r, J);
            double dj = detail::det_small(J, k);
            SliceAtom atom;
            atom.param = u;
            atom.cell = static_cast<int>(ci);
            atom.jacobian = std::abs(dj);
            atom.multiplicity = cell.multiplicity * (dj >= 0.0 ? 1 : -1);
            atom.point.assign(values.begin(), values.end());
            // dedup in parameter space, then coalesce periodic seams by image
            bool dup = false;
            for (const auto& f : found) {
                double dp = 0.0;
                for (int i = 0; i < k; ++i)
                    dp = std::max(dp, std::abs(f.param[static_cast<std::size_t>(i)] -
                                               u[static_cast<std::size_t>(i)]));
                if (dp < opt.dedup_tol) {
                    dup = true;
                    break;
                }
                double di = 0.0;
                for (int c = 0; c < N; ++c)
                    di = std::max(di, std::abs(f.point[static_cast<std::size_t>(c)] -
                                               atom.point[static_cast<std::size_t>(c)]));
                if (di < opt.dedup_tol) {
                    dup = true;
                    break;
                }
            }
            if (!dup) found.push_back(std::move(atom));
        }
        for (auto& a : found) {
            if (a.jacobian < opt.jacobian_threshold) slice.regular = false;
            slice.atoms.push_back(std::move(a));
        }
    }
    // atoms at the same ambient point across cells stack multiplicities
    std::vector<SliceAtom> merged;
    for (auto& a : slice.atoms) {
        bool hit = false;
        for (auto& mgd : merged) {
            double d = 0.0;
            for (std::size_t c = 0; c < mgd.point.size(); ++c)
                d = std::max(d, std::abs(mgd.point[c] - a.point[c]));
            if (d < opt.dedup_tol && mgd.cell != a.cell) {
                mgd.multiplicity += a.multiplicity;
                hit = true;
                break;
            }
        }
        if (!hit) merged.push_back(a);
    }
    slice.atoms = std::move(merged);
    return slice;
}

// retry wrapper: perturbs the base point when the fiber is non-regular
inline Slice slice_points_robust(const RectifiableCurrent& T, const CoordinateProjection& I,
                                 std::span<const Complex> x, std::uint64_t seed = 7,
                                 const SliceOptions& opt = {}, int retries = 5,
                                 double step = 1e-6) {
    std::vector<Complex> base(x.begin(), x.end());
    Rng rng(seed);
    for (int attempt = 0;; ++attempt) {
        Slice s = slice_points(T, I, base, opt);
        if (s.regular || attempt >= retries) return s;
        for (auto& b : base) {
            double a = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
            b += step * Complex(std::cos(a), std::sin(a));
        }
    }
}

// ---------------------------------------------------------------------------
// Mollified slices
// ---------------------------------------------------------------------------

// <T, pi, x> realized at mollifier width eps: evaluating against (f, eta)
// computes T(f * rho_eps(pi - x), pi_1, .., pi_m, eta_1, ..). pi is a list of
// real coordinate functionals (indices into the 2N reals).
struct MollifiedSlice {
    const RectifiableCurrent* T = nullptr;
    std::vector<int> real_indices;
    std::vector<double> base;
    double eps = 0.1;

    Complex evaluate_against(const MetricForm& tail, int order = 32) const {
        MetricForm w;
        w.N = T->ambient.N;
        std::vector<int> idx = real_indices;
        std::vector<double> x0 = base;
        double e = eps;
        FormScalar moll = FormScalar::from_fn([idx, x0, e](std::span<const double> pt) {
            Mollifier rho{e};
            double v = 1.0;
            for (std::size_t i = 0; i < idx.size(); ++i)
                v *= rho.value(pt[static_cast<std::size_t>(idx[i])] - x0[i]);
            return Complex(v);
        });
        w.f = tail.f * moll;
        for (int ri : real_indices) {
            int coord = ri / 2;
            w.entries.push_back(ri % 2 == 0 ? re_coordinate_entry(T->ambient.N, coord)
                                            : im_coordinate_entry(T->ambient.N, coord));
        }
        w.entries.insert(w.entries.end(), tail.entries.begin(), tail.entries.end());
        return evaluate(*T, w, order);
    }
};

inline MollifiedSlice mollified_slice(const RectifiableCurrent& T, std::vector<int> real_indices,
                                      std::vector<double> base, double eps) {
    if (eps <= 0.0) throw std::invalid_argument("mollified_slice: eps must be positive");
    if (real_indices.size() != base.size())
        throw DimensionMismatch("mollified_slice: base dimension mismatch");
    for (int ri : real_indices)
        if (ri < 0 || ri >= 2 * T.ambient.N)
            throw std::out_of_range("mollified_slice: real coordinate index out of range");
    return MollifiedSlice{&T, std::move(real_indices), std::move(base), eps};
}

// ---------------------------------------------------------------------------
// Slice-integral identity
// ---------------------------------------------------------------------------

struct SliceIntegralResult {
    Complex slice_integral{};
    Complex contracted{};
    double residual = 0.0;
    int grid_points_per_axis = 0;
};

namespace detail {

// composite Simpson weights on n+1 uniform samples (n even)
inline std::vector<double> simpson_weights(int n, double h) {
    std::vector<double> w(static_cast<std::size_t>(n + 1), 0.0);
    for (int i = 0; i < n; i += 2) {
        w[static_cast<std::size_t>(i)] += h / 3.0;
        w[static_cast<std::size_t>(i + 1)] += 4.0 * h / 3.0;
        w[static_cast<std::size_t>(i + 2)] += h / 3.0;
    }
    return w;
}

} // namespace detail

// integral over the base box of the mollified slice evaluations against
// (f, g), compared with T contracted by (1, pi). Simpson in the base, tensor
// Gauss inside each slice evaluation.
inline SliceIntegralResult slice_integral_check(const RectifiableCurrent& T,
                                                const std::vector<int>& real_indices,
                                                const MetricForm& tail,
                                                std::span<const double> lo,
                                                std::span<const double> hi, int n_per_axis,
                                                double eps, int order = 32) {
    const int m = static_cast<int>(real_indices.size());
    if (static_cast<int>(lo.size()) != m || static_cast<int>(hi.size()) != m)
        throw DimensionMismatch("slice_integral_check: grid box dimension mismatch");
    if (n_per_axis % 2 != 0) ++n_per_axis;

    std::vector<std::vector<double>> weights;
    std::vector<double> h(static_cast<std::size_t>(m));
    for (int ax = 0; ax < m; ++ax) {
        h[static_cast<std::size_t>(ax)] =
            (hi[static_cast<std::size_t>(ax)] - lo[static_cast<std::size_t>(ax)]) / n_per_axis;
        weights.push_back(detail::simpson_weights(n_per_axis, h[static_cast<std::size_t>(ax)]));
    }

    std::size_t total = 1;
    for (int ax = 0; ax < m; ++ax) total *= static_cast<std::size_t>(n_per_axis + 1);
    std::vector<Complex> vals(total);
    parallel_for(total, [&](std::size_t flat) {
        std::size_t rem = flat;
        std::vector<double> x(static_cast<std::size_t>(m));
        double w = 1.0;
        for (int ax = m - 1; ax >= 0; --ax) {
            std::size_t i = rem % static_cast<std::size_t>(n_per_axis + 1);
            rem /= static_cast<std::size_t>(n_per_axis + 1);
            x[static_cast<std::size_t>(ax)] =
                lo[static_cast<std::size_t>(ax)] + static_cast<double>(i) * h[static_cast<std::size_t>(ax)];
            w *= weights[static_cast<std::size_t>(ax)][i];
        }
        MollifiedSlice s = mollified_slice(T, real_indices, x, eps);
        vals[flat] = w * s.evaluate_against(tail, order);
    });
    Kahan<Complex> acc;
    for (const Complex& v : vals) acc.add(v);

    SliceIntegralResult res;
    res.grid_points_per_axis = n_per_axis + 1;
    res.slice_integral = acc.value();
    MetricForm contracted_form;
    contracted_form.N = T.ambient.N;
    contracted_form.f = tail.f;
    for (int ri : real_indices) {
        int coord = ri / 2;
        contracted_form.entries.push_back(ri % 2 == 0 ? re_coordinate_entry(T.ambient.N, coord)
                                                      : im_coordinate_entry(T.ambient.N, coord));
    }
    contracted_form.entries.insert(contracted_form.entries.end(), tail.entries.begin(),
                                   tail.entries.end());
    res.contracted = evaluate(T, contracted_form, order);
    res.residual = std::abs(res.slice_integral - res.contracted);
    return res;
}

// same identity through the point-slice pipeline, for full complex slicing
// (2|I| = dim T): integrates sum_atoms theta * f(atom) over the base box
inline SliceIntegralResult slice_integral_check_atoms(const RectifiableCurrent& T,
                                                      const CoordinateProjection& I,
                                                      const MetricForm& tail,
                                                      std::span<const double> lo,
                                                      std::span<const double> hi, int n_per_axis,
                                                      int order = 32,
                                                      const SliceOptions& opt = {}) {
    const int m = I.target_dim();
    if (2 * m != T.dim) throw DimensionMismatch("atom slice check needs 2|I| = dim");
    if (n_per_axis % 2 != 0) ++n_per_axis;
    const int rm = 2 * m;
    std::vector<std::vector<double>> weights;
    std::vector<double> h(static_cast<std::size_t>(rm));
    for (int ax = 0; ax < rm; ++ax) {
        h[static_cast<std::size_t>(ax)] =
            (hi[static_cast<std::size_t>(ax)] - lo[static_cast<std::size_t>(ax)]) / n_per_axis;
        weights.push_back(detail::simpson_weights(n_per_axis, h[static_cast<std::size_t>(ax)]));
    }
    std::size_t total = 1;
    for (int ax = 0; ax < rm; ++ax) total *= static_cast<std::size_t>(n_per_axis + 1);
    std::vector<Complex> vals(total);
    parallel_for(total, [&](std::size_t flat) {
        std::size_t rem = flat;
        std::vector<double> xr(static_cast<std::size_t>(rm));
        double w = 1.0;
        for (int ax = rm - 1; ax >= 0; --ax) {
            std::size_t i = rem % static_cast<std::size_t>(n_per_axis + 1);
            rem /= static_cast<std::size_t>(n_per_axis + 1);
            xr[static_cast<std::size_t>(ax)] =
                lo[static_cast<std::size_t>(ax)] + static_cast<double>(i) * h[static_cast<std::size_t>(ax)];
            w *= weights[static_cast<std::size_t>(ax)][i];
        }
        std::vector<Complex> x(static_cast<std::size_t>(m));
        for (int i = 0; i < m; ++i)
            x[static_cast<std::size_t>(i)] = Complex(xr[static_cast<std::size_t>(2 * i)],
                                                     xr[static_cast<std::size_t>(2 * i + 1)]);
        Slice s = slice_points(T, I, x, opt);
        Complex acc(0.0);
        std::vector<double> pt(static_cast<std::size_t>(2 * T.ambient.N));
        for (const auto& atom : s.atoms) {
            for (int c = 0; c < T.ambient.N; ++c) {
                pt[static_cast<std::size_t>(2 * c)] = atom.point[static_cast<std::size_t>(c)].real();
                pt[static_cast<std::size_t>(2 * c + 1)] = atom.point[static_cast<std::size_t>(c)].imag();
            }
            Complex fv = tail.f.expr ? tail.f.value_slow(pt) : tail.f.fn(pt);
            acc += static_cast<double>(atom.multiplicity) * fv;
        }
        vals[flat] = w * acc;
    });
    Kahan<Complex> acc;
    for (const Complex& v : vals) acc.add(v);
    SliceIntegralResult res;
    res.grid_points_per_axis = n_per_axis + 1;
    res.slice_integral = acc.value();
    MetricForm contracted_form;
    contracted_form.N = T.ambient.N;
    contracted_form.f = tail.f;
    for (int i = 0; i < m; ++i) {
        contracted_form.entries.push_back(
            re_coordinate_entry(T.ambient.N, I.indices[static_cast<std::size_t>(i)]));
        contracted_form.entries.push_back(
            im_coordinate_entry(T.ambient.N, I.indices[static_cast<std::size_t>(i)]));
    }
    res.contracted = evaluate(T, contracted_form, order);
    res.residual = std::abs(res.slice_integral - res.contracted);
    return res;
}

// ---------------------------------------------------------------------------
// Dolbeault / slicing commutation
// ---------------------------------------------------------------------------

struct CommutationProbe {
    ProductBump f;   // compactly supported scalar, also used as an entry
    FormEntry eta;   // affine entry
};

struct CommutationResult {
    double max_residual = 0.0;
    double max_lhs = 0.0;
    double max_rhs = 0.0;
};

// <delbar T, pi, x> vs delbar <T, pi, x> through a holomorphic coordinate
// projection pi = z_c, both sides evaluated at mollifier width eps.
inline CommutationResult delbar_slice_commutation_check(const RectifiableCurrent& T, int p, int q,
                                                        int coord, Complex x,
                                                        const std::vector<CommutationProbe>& probes,
                                                        double eps, int order = 24,
                                                        bool conjugated_projection = false) {
    if (conjugated_projection)
        throw std::invalid_argument(
            "delbar_slice_commutation_check: projection must be holomorphic");
    if (p + q != T.dim) throw DimensionMismatch("commutation check: p + q must equal dim");
    const int N = T.ambient.N;
    DolbeaultOps ops = make_dolbeault(T, p, q);
    CommutationResult res;
    for (const auto& probe : probes) {
        // LHS: slice of delbar T
        MetricForm lhs_form;
        lhs_form.N = N;
        ProductBump fb = probe.f;
        double e = eps;
        int c = coord;
        lhs_form.f = FormScalar::from_fn([fb, e, c, x](std::span<const double> pt) {
            Mollifier r2{e};
            double mr = r2.value(pt[static_cast<std::size_t>(2 * c)] - x.real()) *
                        r2.value(pt[static_cast<std::size_t>(2 * c + 1)] - x.imag());
            return Complex(fb.value(pt) * mr);
        });
        lhs_form.entries.push_back(re_coordinate_entry(N, coord));
        lhs_form.entries.push_back(im_coordinate_entry(N, coord));
        lhs_form.entries.push_back(probe.eta);
        Complex lhs = eval_delbar(ops, lhs_form, order);

        // RHS: delbar of the slice = S(1, f, eta_hol) with S the mollified slice
        EntrySplit sp = split_entry(probe.eta, N);
        Complex rhs(0.0);
        if (sp.hol) {
            MetricForm rhs_form;
            rhs_form.N = N;
            rhs_form.f = FormScalar::from_fn([e, c, x](std::span<const double> pt) {
                Mollifier r2{e};
                return Complex(r2.value(pt[static_cast<std::size_t>(2 * c)] - x.real()) *
                               r2.value(pt[static_cast<std::size_t>(2 * c + 1)] - x.imag()));
            });
            rhs_form.entries.push_back(re_coordinate_entry(N, coord));
            rhs_form.entries.push_back(im_coordinate_entry(N, coord));
            rhs_form.entries.push_back(probe.f.as_entry());
            rhs_form.entries.push_back(*sp.hol);
            rhs = evaluate(T, rhs_form, order);
        }
        res.max_residual = std::max(res.max_residual, std::abs(lhs - rhs));
        res.max_lhs = std::max(res.max_lhs, std::abs(lhs));
        res.max_rhs = std::max(res.max_rhs, std::abs(rhs));
    }
    return res;
}

} // namespace currents
