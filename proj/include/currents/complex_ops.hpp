#pragma once

#include <map>
#include <optional>
#include <string>
#include <tuple>

#include "currents/current.hpp"
#include "currents/hilbert.hpp"
#include "currents/rng.hpp"

namespace currents {

struct Bidegree {
    int r = 0, s = 0;
    friend bool operator<(const Bidegree& a, const Bidegree& b) {
        return std::tie(a.r, a.s) < std::tie(b.r, b.s);
    }
    friend bool operator==(const Bidegree& a, const Bidegree& b) {
        return a.r == b.r && a.s == b.s;
    }
};

struct ClassificationReport {
    std::map<Bidegree, double> tested_profile; // max |evaluation| over probes
    bool verdict = true;
    double tolerance = 0.0;
    std::string note;
};

// ---------------------------------------------------------------------------
// Pure-type probe forms
// ---------------------------------------------------------------------------

namespace detail {

// Deterministic low-order monomial factors z^a conj(z)^b multiplying the
// probe bump; they cover the Fourier modes that a plain positive bump would
// miss on symmetric fixtures (tori).
inline std::vector<std::pair<std::vector<int>, std::vector<int>>> monomial_sweep(int N) {
    int vars = std::min(N, 3);
    std::vector<std::pair<std::vector<int>, std::vector<int>>> out;
    int total = 1;
    for (int i = 0; i < vars; ++i) total *= 3;
    for (int code = 0; code < total; ++code) {
        std::vector<int> a(static_cast<std::size_t>(N), 0), b(static_cast<std::size_t>(N), 0);
        int rem = code;
        for (int i = 0; i < vars; ++i) {
            int d = rem % 3 - 1; // -1, 0, +1
            rem /= 3;
            if (d > 0) b[static_cast<std::size_t>(i)] = 1;
            if (d < 0) a[static_cast<std::size_t>(i)] = 1;
        }
        out.emplace_back(std::move(a), std::move(b));
    }
    return out;
}

inline FormScalar monomial_scalar(int N, const std::vector<int>& a, const std::vector<int>& b) {
    Expr acc = Expr::literal(Complex(1.0));
    for (int j = 0; j < N; ++j) {
        for (int e = 0; e < a[static_cast<std::size_t>(j)]; ++e) acc = acc * zvar(j);
        for (int e = 0; e < b[static_cast<std::size_t>(j)]; ++e) acc = acc * zbar(j);
    }
    return FormScalar::from_expr(ExpressionMap(2 * N, {acc}));
}

inline ProductBump box_bump(const Box& box, double inflate = 1.25) {
    ProductBump bump;
    std::size_t N = box.lo.size() / 2;
    bump.center.resize(N);
    bump.radius.resize(N);
    for (std::size_t j = 0; j < N; ++j) {
        double cr = 0.5 * (box.lo[2 * j] + box.hi[2 * j]);
        double ci = 0.5 * (box.lo[2 * j + 1] + box.hi[2 * j + 1]);
        bump.center[j] = Complex(cr, ci);
        double hr = 0.5 * (box.hi[2 * j] - box.lo[2 * j]);
        double hi = 0.5 * (box.hi[2 * j + 1] - box.lo[2 * j + 1]);
        bump.radius[j] = inflate * std::max(1e-6, std::hypot(hr, hi));
    }
    return bump;
}

inline FormEntry random_linear_entry(int N, bool conjugated, Rng& rng) {
    std::vector<Complex> coeff(static_cast<std::size_t>(N));
    for (int j = 0; j < N; ++j) coeff[static_cast<std::size_t>(j)] = rng.complex_in_box(-1.0, 1.0);
    std::vector<Complex> zero(static_cast<std::size_t>(N), Complex(0.0));
    return conjugated ? affine_entry(N, zero, coeff) : affine_entry(N, coeff, zero);
}

} // namespace detail

// count pure-(r,s) probes: r holomorphic linear entries, s antiholomorphic,
// f = smooth bump over bbox times a deterministic monomial sweep factor
inline std::vector<MetricForm> probe_forms(int N, int r, int s, int count, const Box& bbox,
                                           std::uint64_t seed) {
    if (count < 1) throw std::invalid_argument("probe_forms: count must be >= 1");
    Rng rng(seed + 1000003ull * static_cast<std::uint64_t>(r) +
            7000003ull * static_cast<std::uint64_t>(s));
    ProductBump bump = detail::box_bump(bbox);
    auto sweep = detail::monomial_sweep(N);
    std::vector<MetricForm> probes;
    probes.reserve(static_cast<std::size_t>(count));
    for (int p = 0; p < count; ++p) {
        std::vector<FormEntry> entries;
        entries.reserve(static_cast<std::size_t>(r + s));
        for (int i = 0; i < r; ++i) entries.push_back(detail::random_linear_entry(N, false, rng));
        for (int i = 0; i < s; ++i) entries.push_back(detail::random_linear_entry(N, true, rng));
        const auto& [ma, mb] = sweep[static_cast<std::size_t>(p) % sweep.size()];
        FormScalar f = bump.as_scalar() * detail::monomial_scalar(N, ma, mb);
        probes.emplace_back(N, std::move(f), std::move(entries));
    }
    return probes;
}

// swaps holomorphic and antiholomorphic content: entries and f conjugated
inline MetricForm conjugate_probe(const MetricForm& w) {
    MetricForm out;
    out.N = w.N;
    if (w.f.expr)
        out.f = FormScalar::from_expr(
            ExpressionMap(w.f.expr->arity_in(), {conj(w.f.expr->outputs()[0])}));
    else {
        auto fn = w.f.fn;
        out.f = FormScalar::from_fn(
            [fn](std::span<const double> x) { return std::conj(fn(x)); });
    }
    for (const auto& e : w.entries) {
        if (!e.is_expr()) throw std::invalid_argument("conjugate_probe: expression entries only");
        EntryType t = e.type == EntryType::Holomorphic    ? EntryType::AntiHolomorphic
                      : e.type == EntryType::AntiHolomorphic ? EntryType::Holomorphic
                                                             : EntryType::General;
        out.entries.push_back(FormEntry::from_expr(
            ExpressionMap(e.expr->arity_in(), {conj(e.expr->outputs()[0])}), t, e.affine));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Bidimension and positivity
// ---------------------------------------------------------------------------

// max |T(probe)| for pure (r,s) probes, all r+s = T.dim, recorded per type;
// verdict: every type with r > p or s > q stays below tolerance.
inline ClassificationReport classify_bidimension(const RectifiableCurrent& T, int p, int q,
                                                 int count = 32, double tol = -1.0,
                                                 int order = 16, std::uint64_t seed = 1) {
    if (p + q != T.dim)
        throw DimensionMismatch("classify_bidimension: p + q must equal the current dimension");
    ClassificationReport rep;
    double scale = mass(T, order, /*estimate_error=*/false).total;
    rep.tolerance = tol > 0.0 ? tol : 1e-8 * (1.0 + scale);
    Box bbox = support_bbox(T);
    for (int r = 0; r <= T.dim; ++r) {
        int s = T.dim - r;
        if (r > 2 * T.ambient.N || s > 2 * T.ambient.N) continue;
        auto probes = probe_forms(T.ambient.N, r, s, count, bbox, seed);
        double worst = 0.0;
        for (const auto& w : probes) worst = std::max(worst, std::abs(evaluate(T, w, order)));
        rep.tested_profile[{r, s}] = worst;
        if ((r > p || s > q) && worst >= rep.tolerance) rep.verdict = false;
    }
    return rep;
}

// T(f, pi_1, conj pi_1, .., pi_k, conj pi_k) >= 0 for holomorphic linear pi
// and f >= 0, after the (i/2)^k volume normalization. Probes mix random
// holomorphic frames with the coordinate frames themselves.
inline ClassificationReport is_positive(const RectifiableCurrent& T, int k, int count = 32,
                                        double tol = -1.0, int order = 16,
                                        std::uint64_t seed = 1) {
    if (T.dim != 2 * k) throw DimensionMismatch("is_positive: current dimension must be 2k");
    ClassificationReport rep;
    double scale = mass(T, order, /*estimate_error=*/false).total;
    rep.tolerance = tol > 0.0 ? tol : 1e-8 * (1.0 + scale);
    Box bbox = support_bbox(T);
    ProductBump bump = detail::box_bump(bbox);
    Rng rng(seed);
    const int N = T.ambient.N;
    Complex norm = std::pow(Complex(0.0, 0.5), k);

    auto run_probe = [&](const std::vector<FormEntry>& hol_entries) {
        std::vector<FormEntry> entries;
        for (const auto& e : hol_entries) {
            entries.push_back(e);
            entries.push_back(FormEntry::from_expr(
                ExpressionMap(e.expr->arity_in(), {conj(e.expr->outputs()[0])}),
                EntryType::AntiHolomorphic, true));
        }
        MetricForm w(N, bump.as_scalar(), std::move(entries));
        Complex v = norm * evaluate(T, w, order);
        return v;
    };

    double worst = 0.0; // most negative real part / largest imaginary part
    // coordinate frames (the Wirtinger volume terms)
    std::vector<int> tuple(static_cast<std::size_t>(k));
    std::function<void(int, int)> coords = [&](int start, int pos) {
        if (pos == k) {
            std::vector<FormEntry> hol;
            for (int i = 0; i < k; ++i)
                hol.push_back(coordinate_entry(N, tuple[static_cast<std::size_t>(i)]));
            Complex v = run_probe(hol);
            worst = std::max(worst, std::max(-v.real(), std::abs(v.imag())));
            return;
        }
        for (int j = start; j < N; ++j) {
            tuple[static_cast<std::size_t>(pos)] = j;
            coords(j + 1, pos + 1);
        }
    };
    coords(0, 0);
    for (int pr = 0; pr < count; ++pr) {
        std::vector<FormEntry> hol;
        for (int i = 0; i < k; ++i) hol.push_back(detail::random_linear_entry(N, false, rng));
        Complex v = run_probe(hol);
        worst = std::max(worst, std::max(-v.real(), std::abs(v.imag())));
    }
    rep.tested_profile[{k, k}] = worst;
    rep.verdict = worst < rep.tolerance;
    return rep;
}

// ---------------------------------------------------------------------------
// Dolbeault-split evaluations
// ---------------------------------------------------------------------------

// d T = S_{p,q-1} + S_{p-1,q} for a (p,q) current; the split components are
// observed through evaluations only: del pairs dT with the (p-1,q)-part of
// the form, delbar with the (p,q-1)-part.
struct DolbeaultOps {
    RectifiableCurrent dT;
    int p = 0, q = 0;
};

inline DolbeaultOps make_dolbeault(const RectifiableCurrent& T, int p, int q) {
    if (p + q != T.dim) throw DimensionMismatch("make_dolbeault: p + q must equal dim");
    return DolbeaultOps{boundary(T), p, q};
}

namespace detail {

// expands a form multilinearly into pure-type terms and sums the evaluations
// matching (target_hol, target_anti)
inline Complex eval_type_component(const RectifiableCurrent& S, const MetricForm& w,
                                   int target_hol, int target_anti, int order) {
    const int k = w.degree();
    Complex total(0.0);
    std::vector<const FormEntry*> chosen(static_cast<std::size_t>(k));
    std::vector<EntrySplit> splits;
    splits.reserve(static_cast<std::size_t>(k));
    for (const auto& e : w.entries) splits.push_back(split_entry(e, w.N));
    std::function<void(int, int, int)> rec = [&](int i, int h, int a) {
        if (h > target_hol || a > target_anti) return;
        if (i == k) {
            if (h == target_hol && a == target_anti) {
                MetricForm term;
                term.N = w.N;
                term.f = w.f;
                for (const FormEntry* e : chosen) term.entries.push_back(*e);
                total += evaluate(S, term, order);
            }
            return;
        }
        if (splits[static_cast<std::size_t>(i)].hol) {
            chosen[static_cast<std::size_t>(i)] = &*splits[static_cast<std::size_t>(i)].hol;
            rec(i + 1, h + 1, a);
        }
        if (splits[static_cast<std::size_t>(i)].antihol) {
            chosen[static_cast<std::size_t>(i)] = &*splits[static_cast<std::size_t>(i)].antihol;
            rec(i + 1, h, a + 1);
        }
    };
    rec(0, 0, 0);
    return total;
}

} // namespace detail

inline Complex eval_del(const DolbeaultOps& ops, const MetricForm& w, int order = 16) {
    if (w.degree() != ops.dT.dim)
        throw DimensionMismatch("eval_del: form degree must be dim T - 1");
    return detail::eval_type_component(ops.dT, w, ops.p - 1, ops.q, order);
}

inline Complex eval_delbar(const DolbeaultOps& ops, const MetricForm& w, int order = 16) {
    if (w.degree() != ops.dT.dim)
        throw DimensionMismatch("eval_delbar: form degree must be dim T - 1");
    return detail::eval_type_component(ops.dT, w, ops.p, ops.q - 1, order);
}

// d^c = i (del - delbar)
inline Complex eval_dc(const DolbeaultOps& ops, const MetricForm& w, int order = 16) {
    return Complex(0.0, 1.0) * (eval_del(ops, w, order) - eval_delbar(ops, w, order));
}

// ---------------------------------------------------------------------------
// Wirtinger comparison
// ---------------------------------------------------------------------------

struct WirtingerReport {
    double coordinate_sum = 0.0; // sum over increasing k-tuples of the volume terms
    double mass_total = 0.0;
    double ratio = 0.0;
    double imag_residual = 0.0;
    bool mass_le_sum = false;
    double tol = 0.0;
};

// sum over i_1 < .. < i_k of T((i/2)^k, z_{i_1}, conj z_{i_1}, ..) against
// the quadrature mass; holomorphic graphs give equality, the truncated tail
// widens the tolerance.
inline WirtingerReport wirtinger_mass(const RectifiableCurrent& T, int k, int order = 16,
                                      double tol = 1e-6) {
    if (T.dim != 2 * k) throw DimensionMismatch("wirtinger_mass: current dimension must be 2k");
    const int N = T.ambient.N;
    WirtingerReport rep;
    Complex norm = std::pow(Complex(0.0, 0.5), k);
    Kahan<Complex> acc;
    std::vector<int> tuple(static_cast<std::size_t>(k));
    std::function<void(int, int)> rec = [&](int start, int pos) {
        if (pos == k) {
            std::vector<FormEntry> entries;
            for (int i = 0; i < k; ++i) {
                entries.push_back(coordinate_entry(N, tuple[static_cast<std::size_t>(i)]));
                entries.push_back(coordinate_entry(N, tuple[static_cast<std::size_t>(i)], true));
            }
            MetricForm w(N, FormScalar::constant(N, norm), std::move(entries));
            acc.add(evaluate(T, w, order));
            return;
        }
        for (int j = start; j < N; ++j) {
            tuple[static_cast<std::size_t>(pos)] = j;
            rec(j + 1, pos + 1);
        }
    };
    rec(0, 0);
    Complex sum = acc.value();
    rep.coordinate_sum = sum.real();
    rep.imag_residual = std::abs(sum.imag());
    rep.mass_total = mass(T, order, /*estimate_error=*/false).total;
    rep.ratio = rep.mass_total > 0.0 ? rep.coordinate_sum / rep.mass_total : 0.0;
    rep.tol = tol * (1.0 + rep.mass_total) + T.tail_budget;
    rep.mass_le_sum = rep.mass_total <= rep.coordinate_sum + rep.tol;
    return rep;
}

// ---------------------------------------------------------------------------
// Maximal complexity
// ---------------------------------------------------------------------------

// (2p-1)-current: all (r,s) evaluations with |r-s| > 1 vanish. For p = 1 the
// condition is vacuous and the report points at the moment condition instead.
inline ClassificationReport is_maximally_complex(const RectifiableCurrent& M, int count = 32,
                                                 double tol = -1.0, int order = 16,
                                                 std::uint64_t seed = 1) {
    if (M.dim % 2 != 1) throw DimensionMismatch("is_maximally_complex: dimension must be odd");
    ClassificationReport rep;
    double scale = mass(M, order, /*estimate_error=*/false).total;
    rep.tolerance = tol > 0.0 ? tol : 1e-8 * (1.0 + scale);
    if (M.dim == 1) {
        rep.verdict = true;
        rep.note = "moment condition required";
        return rep;
    }
    Box bbox = support_bbox(M);
    for (int r = 0; r <= M.dim; ++r) {
        int s = M.dim - r;
        auto probes = probe_forms(M.ambient.N, r, s, count, bbox, seed);
        double worst = 0.0;
        for (const auto& w : probes) worst = std::max(worst, std::abs(evaluate(M, w, order)));
        rep.tested_profile[{r, s}] = worst;
        if (std::abs(r - s) > 1 && worst >= rep.tolerance) rep.verdict = false;
    }
    return rep;
}

} // namespace currents
