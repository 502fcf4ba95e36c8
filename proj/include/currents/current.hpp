#pragma once

#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "currents/ambient.hpp"
#include "currents/forms.hpp"
#include "currents/parallel.hpp"
#include "currents/quadrature.hpp"

namespace currents {

struct DimensionMismatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Oriented parametrized piece: an integer-weighted image of [0,1]^k. The
// parametrization is injective off a parameter-null set; rank drops on null
// sets (cone tips, polar axes) are harmless under the area formula.
struct Cell {
    int dim = 0;
    ExpressionMap param; // dim reals -> N complex
    long long multiplicity = 1;

    Cell() = default;
    Cell(int k, ExpressionMap p, long long mult = 1)
        : dim(k), param(std::move(p)), multiplicity(mult) {
        if (param.arity_in() != k)
            throw DimensionMismatch("cell parametrization arity differs from declared dimension");
    }
};

struct RectifiableCurrent {
    AmbientSpace ambient;
    int dim = 0;
    std::vector<Cell> cells;
    double tail_budget = 0.0; // sup over the domain of the discarded l^2 tail

    RectifiableCurrent() = default;
    RectifiableCurrent(AmbientSpace amb, int k, std::vector<Cell> cs, double tail = 0.0)
        : ambient(amb), dim(k), cells(std::move(cs)), tail_budget(tail) {
        for (const auto& c : cells) {
            if (c.dim != dim)
                throw DimensionMismatch("all cells of a current must share its dimension");
            if (c.param.arity_out() != ambient.N)
                throw DimensionMismatch("cell target dimension differs from ambient");
        }
        if (dim > 2 * ambient.N)
            throw DimensionMismatch("current dimension exceeds real ambient dimension");
    }
};

struct MassReport {
    double total = 0.0;
    std::vector<double> per_cell;
    int quadrature_order = 0;
    double estimated_error = 0.0;
};

struct Box {
    std::vector<double> lo, hi; // over the 2N ambient reals
};

namespace detail {

// LU determinant of a k x k complex matrix (row-major), partial pivoting.
inline Complex det_complex(std::vector<Complex>& a, int k) {
    if (k == 0) return Complex(1.0);
    if (k == 1) return a[0];
    if (k == 2) return a[0] * a[3] - a[1] * a[2];
    Complex det(1.0);
    for (int c = 0; c < k; ++c) {
        int piv = c;
        double best = std::abs(a[static_cast<std::size_t>(c) * k + c]);
        for (int r = c + 1; r < k; ++r) {
            double m = std::abs(a[static_cast<std::size_t>(r) * k + c]);
            if (m > best) {
                best = m;
                piv = r;
            }
        }
        if (best == 0.0) return Complex(0.0);
        if (piv != c) {
            for (int j = 0; j < k; ++j)
                std::swap(a[static_cast<std::size_t>(piv) * k + j],
                          a[static_cast<std::size_t>(c) * k + j]);
            det = -det;
        }
        Complex p = a[static_cast<std::size_t>(c) * k + c];
        det *= p;
        for (int r = c + 1; r < k; ++r) {
            Complex f = a[static_cast<std::size_t>(r) * k + c] / p;
            for (int j = c; j < k; ++j)
                a[static_cast<std::size_t>(r) * k + j] -= f * a[static_cast<std::size_t>(c) * k + j];
        }
    }
    return det;
}

// determinant of a symmetric positive semidefinite k x k real matrix
inline double det_spd(std::vector<double>& g, int k) {
    if (k == 0) return 1.0;
    if (k == 1) return g[0];
    if (k == 2) return g[0] * g[3] - g[1] * g[2];
    double det = 1.0;
    for (int c = 0; c < k; ++c) {
        int piv = c;
        double best = std::abs(g[static_cast<std::size_t>(c) * k + c]);
        for (int r = c + 1; r < k; ++r) {
            double m = std::abs(g[static_cast<std::size_t>(r) * k + c]);
            if (m > best) {
                best = m;
                piv = r;
            }
        }
        if (best == 0.0) return 0.0;
        if (piv != c) {
            for (int j = 0; j < k; ++j)
                std::swap(g[static_cast<std::size_t>(piv) * k + j],
                          g[static_cast<std::size_t>(c) * k + j]);
            det = -det;
        }
        double p = g[static_cast<std::size_t>(c) * k + c];
        det *= p;
        for (int r = c + 1; r < k; ++r) {
            double f = g[static_cast<std::size_t>(r) * k + c] / p;
            for (int j = c; j < k; ++j)
                g[static_cast<std::size_t>(r) * k + j] -= f * g[static_cast<std::size_t>(c) * k + j];
        }
    }
    return det;
}

// Per-task evaluation context for one cell against one form.
struct CellFormCtx {
    const Cell* cell;
    const MetricForm* form;
    int N, k;
    std::vector<double> seed; // identity k x k

    TapeWorkspace param_ws;
    TapeWorkspace f_ws;
    std::vector<TapeWorkspace> entry_ws;
    std::vector<Complex> values;   // N complex
    std::vector<Complex> jac;      // N x k complex
    std::vector<double> x;         // 2N reals
    std::vector<double> S;         // 2N x k reals
    std::vector<Complex> grad2N;   // scratch for callable entries
    std::vector<Complex> mat;      // k x k
    Complex fval;

    CellFormCtx(const Cell& c, const MetricForm& w) : cell(&c), form(&w) {
        N = c.param.arity_out();
        k = c.dim;
        seed.assign(static_cast<std::size_t>(k) * k, 0.0);
        for (int i = 0; i < k; ++i) seed[static_cast<std::size_t>(i) * k + i] = 1.0;
        entry_ws.resize(w.entries.size());
        values.resize(static_cast<std::size_t>(N));
        jac.resize(static_cast<std::size_t>(N) * std::max(k, 1));
        x.resize(static_cast<std::size_t>(2 * N));
        S.resize(static_cast<std::size_t>(2 * N) * std::max(k, 1));
        grad2N.resize(static_cast<std::size_t>(2 * N));
        mat.resize(static_cast<std::size_t>(k) * k);
    }

    // integrand f(phi(u)) * det D((pi o phi))(u); also exposes x and S
    Complex integrand(const double* u) {
        cell->param.eval_jet(std::span<const double>(u, static_cast<std::size_t>(k)),
                             seed.data(), k, values, jac.data(), param_ws);
        for (int c = 0; c < N; ++c) {
            x[static_cast<std::size_t>(2 * c)] = values[static_cast<std::size_t>(c)].real();
            x[static_cast<std::size_t>(2 * c + 1)] = values[static_cast<std::size_t>(c)].imag();
            for (int j = 0; j < k; ++j) {
                Complex d = jac[static_cast<std::size_t>(c) * k + j];
                S[static_cast<std::size_t>(2 * c) * k + j] = d.real();
                S[static_cast<std::size_t>(2 * c + 1) * k + j] = d.imag();
            }
        }
        if (form->f.expr) {
            form->f.expr->eval(x, std::span<Complex>(&fval, 1), f_ws);
        } else {
            fval = form->f.fn(x);
        }
        if (fval == Complex(0.0)) return Complex(0.0);
        const int kk = k;
        for (std::size_t e = 0; e < form->entries.size(); ++e) {
            const FormEntry& ent = form->entries[e];
            Complex* row = mat.data() + e * static_cast<std::size_t>(kk);
            if (ent.is_expr()) {
                Complex val;
                ent.expr->eval_jet(x, S.data(), kk, std::span<Complex>(&val, 1), row,
                                   entry_ws[e]);
            } else {
                ent.grad_fn(x, grad2N);
                for (int j = 0; j < kk; ++j) {
                    Complex acc(0.0);
                    for (int m = 0; m < 2 * N; ++m)
                        acc += grad2N[static_cast<std::size_t>(m)] *
                               S[static_cast<std::size_t>(m) * kk + j];
                    row[j] = acc;
                }
            }
        }
        std::vector<Complex> tmp = mat; // det destroys its input
        return fval * det_complex(tmp, kk);
    }
};

constexpr std::size_t kBlock = 8192;

} // namespace detail

// T(f, pi_1..pi_k) by tensor Gauss-Legendre over every cell. Cells and node
// blocks run in parallel; block partial sums are combined in fixed order.
inline Complex evaluate(const RectifiableCurrent& T, const MetricForm& form, int order = 16) {
    if (form.degree() != T.dim)
        throw DimensionMismatch("form degree " + std::to_string(form.degree()) +
                                " differs from current dimension " + std::to_string(T.dim));
    if (form.N != T.ambient.N)
        throw DimensionMismatch("form ambient differs from current ambient");

    Kahan<Complex> total;
    for (const Cell& cell : T.cells) {
        if (cell.dim == 0) {
            detail::CellFormCtx ctx(cell, form);
            double dummy = 0.0;
            // 0-cells: value of f at the image point
            cell.param.eval(std::span<const double>(&dummy, 0), ctx.values, ctx.param_ws);
            for (int c = 0; c < ctx.N; ++c) {
                ctx.x[static_cast<std::size_t>(2 * c)] = ctx.values[static_cast<std::size_t>(c)].real();
                ctx.x[static_cast<std::size_t>(2 * c + 1)] =
                    ctx.values[static_cast<std::size_t>(c)].imag();
            }
            Complex fv = form.f.expr ? [&] {
                Complex out;
                form.f.expr->eval(ctx.x, std::span<Complex>(&out, 1), ctx.f_ws);
                return out;
            }()
                                     : form.f.fn(ctx.x);
            total.add(static_cast<double>(cell.multiplicity) * fv);
            continue;
        }
        TensorGrid grid(cell.dim, order);
        std::size_t nblocks = (grid.size() + detail::kBlock - 1) / detail::kBlock;
        std::vector<Complex> partial(nblocks, Complex(0.0));
        parallel_for(nblocks, [&](std::size_t b) {
            detail::CellFormCtx ctx(cell, form);
            double u[8];
            Kahan<Complex> acc;
            std::size_t lo = b * detail::kBlock;
            std::size_t hi = std::min(grid.size(), lo + detail::kBlock);
            for (std::size_t id = lo; id < hi; ++id) {
                double w = grid.point(id, u);
                acc.add(w * ctx.integrand(u));
            }
            partial[b] = acc.value();
        });
        Kahan<Complex> cell_sum;
        for (const Complex& p : partial) cell_sum.add(p);
        total.add(static_cast<double>(cell.multiplicity) * cell_sum.value());
    }
    return total.value();
}

namespace detail {

inline double cell_mass(const Cell& cell, int order) {
    if (cell.dim == 0) return 1.0;
    TensorGrid grid(cell.dim, order);
    const int k = cell.dim;
    const int N = cell.param.arity_out();
    std::size_t nblocks = (grid.size() + kBlock - 1) / kBlock;
    std::vector<double> partial(nblocks, 0.0);
    parallel_for(nblocks, [&](std::size_t b) {
        TapeWorkspace ws;
        std::vector<double> seed(static_cast<std::size_t>(k) * k, 0.0);
        for (int i = 0; i < k; ++i) seed[static_cast<std::size_t>(i) * k + i] = 1.0;
        std::vector<Complex> values(static_cast<std::size_t>(N));
        std::vector<Complex> jac(static_cast<std::size_t>(N) * k);
        std::vector<double> gram(static_cast<std::size_t>(k) * k);
        double u[8];
        Kahan<double> acc;
        std::size_t lo = b * kBlock;
        std::size_t hi = std::min(grid.size(), lo + kBlock);
        for (std::size_t id = lo; id < hi; ++id) {
            double w = grid.point(id, u);
            cell.param.eval_jet(std::span<const double>(u, static_cast<std::size_t>(k)),
                                seed.data(), k, values, jac.data(), ws);
            // real Gram matrix of the differential
            for (int i = 0; i < k; ++i) {
                for (int j = i; j < k; ++j) {
                    double g = 0.0;
                    for (int c = 0; c < N; ++c) {
                        Complex di = jac[static_cast<std::size_t>(c) * k + i];
                        Complex dj = jac[static_cast<std::size_t>(c) * k + j];
                        g += di.real() * dj.real() + di.imag() * dj.imag();
                    }
                    gram[static_cast<std::size_t>(i) * k + j] = g;
                    gram[static_cast<std::size_t>(j) * k + i] = g;
                }
            }
            std::vector<double> tmp = gram;
            double d = det_spd(tmp, k);
            acc.add(w * std::sqrt(std::max(d, 0.0)));
        }
        partial[b] = acc.value();
    });
    Kahan<double> sum;
    for (double p : partial) sum.add(p);
    return sum.value();
}

} // namespace detail

inline MassReport mass(const RectifiableCurrent& T, int order = 16, bool estimate_error = true) {
    MassReport r;
    r.quadrature_order = order;
    r.per_cell.reserve(T.cells.size());
    Kahan<double> total, err;
    for (const Cell& cell : T.cells) {
        double m = std::abs(static_cast<double>(cell.multiplicity)) *
                   detail::cell_mass(cell, order);
        r.per_cell.push_back(m);
        total.add(m);
        if (estimate_error && cell.dim > 0) {
            double m2 = std::abs(static_cast<double>(cell.multiplicity)) *
                        detail::cell_mass(cell, 2 * order);
            err.add(std::abs(m2 - m));
        }
    }
    r.total = total.value();
    r.estimated_error = err.value();
    return r;
}

// Faces of every cell with the induced orientation: parameter j pinned at 0
// carries sign (-1)^(j+1), pinned at 1 carries (-1)^j (j counted from 1), so
// shared faces of adjacent cells and the double boundary cancel exactly.
inline RectifiableCurrent boundary(const RectifiableCurrent& T) {
    if (T.dim < 1) throw DimensionMismatch("boundary of a 0-dimensional current");
    std::vector<Cell> faces;
    faces.reserve(T.cells.size() * static_cast<std::size_t>(2 * T.dim));
    for (const Cell& cell : T.cells) {
        for (int p = 0; p < cell.dim; ++p) {
            long long sign_lo = (p % 2 == 0) ? -1 : 1; // (-1)^(p+1)
            long long sign_hi = -sign_lo;
            faces.emplace_back(cell.dim - 1, fix_param(cell.param, p, 0.0),
                               sign_lo * cell.multiplicity);
            faces.emplace_back(cell.dim - 1, fix_param(cell.param, p, 1.0),
                               sign_hi * cell.multiplicity);
        }
    }
    return RectifiableCurrent(T.ambient, T.dim - 1, std::move(faces), T.tail_budget);
}

// F_# T: composition of every parametrization with F. F maps the 2N ambient
// reals to M complex outputs.
inline RectifiableCurrent pushforward(const ExpressionMap& F, const RectifiableCurrent& T) {
    if (F.arity_in() != 2 * T.ambient.N)
        throw DimensionMismatch("pushforward map arity differs from current ambient");
    std::vector<Cell> cells;
    cells.reserve(T.cells.size());
    for (const Cell& cell : T.cells)
        cells.emplace_back(cell.dim, compose(F, cell.param), cell.multiplicity);
    return RectifiableCurrent(AmbientSpace(F.arity_out()), T.dim, std::move(cells),
                              T.tail_budget);
}

// Lazy contraction T |_ (u, v_1..v_h): geometry untouched, the integrand is
// rewritten at evaluation time.
struct ContractedCurrent {
    RectifiableCurrent base;
    FormScalar u;
    std::vector<FormEntry> v;

    int dim() const { return base.dim - static_cast<int>(v.size()); }
};

inline ContractedCurrent contract(const RectifiableCurrent& T, const FormScalar& u,
                                  std::vector<FormEntry> v) {
    if (static_cast<int>(v.size()) > T.dim)
        throw DimensionMismatch("contraction degree exceeds current dimension");
    return ContractedCurrent{T, u, std::move(v)};
}

inline Complex evaluate(const ContractedCurrent& C, const MetricForm& form, int order = 16) {
    if (form.degree() != C.dim())
        throw DimensionMismatch("form degree differs from contracted dimension");
    MetricForm combined;
    combined.N = C.base.ambient.N;
    combined.f = form.f * C.u;
    combined.entries = C.v;
    combined.entries.insert(combined.entries.end(), form.entries.begin(), form.entries.end());
    return evaluate(C.base, combined, order);
}

// Interval hull of all cell images, inflated by pad.
inline Box support_bbox(const RectifiableCurrent& T, double pad = 1e-9) {
    const int n2 = 2 * T.ambient.N;
    Box box;
    box.lo.assign(static_cast<std::size_t>(n2), 0.0);
    box.hi.assign(static_cast<std::size_t>(n2), 0.0);
    bool first = true;
    TapeWorkspace ws;
    for (const Cell& cell : T.cells) {
        std::vector<Interval> dom(static_cast<std::size_t>(cell.dim), Interval(0.0, 1.0));
        std::vector<CBox> out(static_cast<std::size_t>(T.ambient.N));
        cell.param.eval_box(dom, out, ws);
        for (int c = 0; c < T.ambient.N; ++c) {
            double rlo = out[static_cast<std::size_t>(c)].re.lo;
            double rhi = out[static_cast<std::size_t>(c)].re.hi;
            double ilo = out[static_cast<std::size_t>(c)].im.lo;
            double ihi = out[static_cast<std::size_t>(c)].im.hi;
            std::size_t ix = static_cast<std::size_t>(2 * c);
            if (first) {
                box.lo[ix] = rlo;
                box.hi[ix] = rhi;
                box.lo[ix + 1] = ilo;
                box.hi[ix + 1] = ihi;
            } else {
                box.lo[ix] = std::min(box.lo[ix], rlo);
                box.hi[ix] = std::max(box.hi[ix], rhi);
                box.lo[ix + 1] = std::min(box.lo[ix + 1], ilo);
                box.hi[ix + 1] = std::max(box.hi[ix + 1], ihi);
            }
        }
        first = false;
    }
    for (std::size_t i = 0; i < box.lo.size(); ++i) {
        box.lo[i] -= pad;
        box.hi[i] += pad;
    }
    return box;
}

// Evaluates the parametrization at a parameter point (utility for sampling).
inline std::vector<Complex> cell_point(const Cell& cell, std::span<const double> u) {
    TapeWorkspace ws;
    std::vector<Complex> out(static_cast<std::size_t>(cell.param.arity_out()));
    cell.param.eval(u, out, ws);
    return out;
}

struct InjectivityReport {
    bool ok = true;
    double worst_image_distance = 0.0; // over the colliding pairs
    int collisions = 0;
};

// Spot check of the declared injectivity (off parameter-null sets): for
// sampled anchors a, the far-from-a part of the cube is scanned for images
// close to param(a) and the best candidate is polished by coordinate
// descent. Genuine overlaps (doubly wound loops, folded sheets) drive the
// polished distance to zero; injective cells keep a positive floor.
inline InjectivityReport injectivity_spot_check(const Cell& cell, int anchors = 8,
                                                std::uint64_t seed = 2717,
                                                double separation = 0.2,
                                                double image_tol = 1e-7) {
    InjectivityReport rep;
    if (cell.dim == 0) return rep;
    std::mt19937_64 eng(seed);
    auto unif = [&] { return static_cast<double>(eng() >> 11) * 0x1.0p-53; };
    TapeWorkspace ws;
    const int k = cell.dim;
    const int N = cell.param.arity_out();
    std::vector<Complex> va(static_cast<std::size_t>(N)), vb(static_cast<std::size_t>(N));
    auto image_dist = [&](std::span<const double> a, std::span<const double> b) {
        cell.param.eval(a, va, ws);
        cell.param.eval(b, vb, ws);
        double d = 0.0;
        for (int c = 0; c < N; ++c)
            d = std::max(d, std::abs(va[static_cast<std::size_t>(c)] - vb[static_cast<std::size_t>(c)]));
        return d;
    };
    const int grid = k == 1 ? 256 : 24;
    std::vector<double> a(static_cast<std::size_t>(k)), b(static_cast<std::size_t>(k));
    std::vector<double> best_b(static_cast<std::size_t>(k));
    for (int trial = 0; trial < anchors; ++trial) {
        for (int i = 0; i < k; ++i) a[static_cast<std::size_t>(i)] = 0.05 + 0.9 * unif();
        // coarse scan of separated parameter points
        double best = 1e300;
        std::size_t total = 1;
        for (int i = 0; i < k; ++i) total *= static_cast<std::size_t>(grid);
        for (std::size_t flat = 0; flat < total; ++flat) {
            std::size_t rem = flat;
            double dp = 0.0;
            for (int i = k - 1; i >= 0; --i) {
                b[static_cast<std::size_t>(i)] =
                    (static_cast<double>(rem % static_cast<std::size_t>(grid)) + 0.5) / grid;
                rem /= static_cast<std::size_t>(grid);
                dp = std::max(dp, std::abs(b[static_cast<std::size_t>(i)] -
                                           a[static_cast<std::size_t>(i)]));
            }
            if (dp < separation) continue;
            double d = image_dist(a, b);
            if (d < best) {
                best = d;
                best_b = b;
            }
        }
        if (best >= 1e299) continue;
        // coordinate-descent polish around the best candidate
        double step = 1.0 / grid;
        b = best_b;
        for (int it = 0; it < 40 && step > 1e-12; ++it) {
            bool improved = false;
            for (int i = 0; i < k; ++i) {
                for (double dir : {-1.0, 1.0}) {
                    std::vector<double> bt = b;
                    bt[static_cast<std::size_t>(i)] =
                        std::clamp(bt[static_cast<std::size_t>(i)] + dir * step, 0.0, 1.0);
                    double dp = 0.0;
                    for (int j = 0; j < k; ++j)
                        dp = std::max(dp, std::abs(bt[static_cast<std::size_t>(j)] -
                                                   a[static_cast<std::size_t>(j)]));
                    if (dp < separation) continue;
                    double d = image_dist(a, bt);
                    if (d < best) {
                        best = d;
                        b = bt;
                        improved = true;
                    }
                }
            }
            if (!improved) step *= 0.5;
        }
        if (best < image_tol) {
            rep.ok = false;
            ++rep.collisions;
            rep.worst_image_distance = std::max(rep.worst_image_distance, best);
        }
    }
    return rep;
}

} // namespace currents
