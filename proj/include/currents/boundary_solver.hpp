#pragma once

#include <algorithm>
#include <deque>
#include <optional>
#include <set>
#include <sstream>

#include "currents/complex_ops.hpp"
#include "currents/polynomial.hpp"

namespace currents {

struct SolverError : std::runtime_error {
    std::string stage;
    SolverError(const std::string& stage_, const std::string& what_)
        : std::runtime_error("[" + stage_ + "] " + what_), stage(stage_) {}
};

struct SolverConfig {
    int shadow_samples = 2048; // polyline samples per curve cell
    int grid_nx = 72;          // arrangement grid resolution per axis
    int extra_moments = 2;     // consistency moments beyond the sheet count
    int panels = 1024;         // composite panels per cell for contour integrals
    int panel_order = 8;
    int fit_degree = 16;
    int quad_order = 24;
    double integrality_tol = 1e-3; // N_0 distance to the nearest integer
    double consistency_tol = 1e-5; // Newton-forward residual on higher moments
    double exterior_tol = 1e-5;    // moments on the unbounded face
    double margin_factor = 2.0;    // times the local sample spacing
    double immersion_tol = 1e-6;
    double crossing_angle_min = 0.05; // radians
    std::uint64_t seed = 99;
};

// ---------------------------------------------------------------------------
// Cycle validation
// ---------------------------------------------------------------------------

struct CycleReport {
    double cycle_residual = 0.0;
    bool cycle_ok = false;
    double min_shadow_speed = 0.0;
    bool immersion_ok = false;
    int crossings = 0;
    double min_crossing_angle = 0.0;
    bool shadow_overlaps = false; // projection covers part of itself
    bool transversal_ok = false;
    bool moment_condition_required = true; // p = 1
    bool passed() const { return cycle_ok && immersion_ok && transversal_ok; }
};

namespace detail {

struct ShadowLoop {
    std::vector<Complex> pts;   // closed polyline (pts.front() ~ pts.back())
    std::vector<Complex> vel;   // shadow velocity at samples
    long long multiplicity = 1;
};

inline std::vector<ShadowLoop> sample_shadow(const RectifiableCurrent& M, int n) {
    std::vector<ShadowLoop> loops;
    for (const Cell& cell : M.cells) {
        ShadowLoop loop;
        loop.multiplicity = cell.multiplicity;
        loop.pts.resize(static_cast<std::size_t>(n) + 1);
        loop.vel.resize(static_cast<std::size_t>(n) + 1);
        TapeWorkspace ws;
        const int N = cell.param.arity_out();
        std::vector<Complex> val(static_cast<std::size_t>(N));
        std::vector<Complex> der(static_cast<std::size_t>(N));
        double seed1 = 1.0;
        for (int i = 0; i <= n; ++i) {
            double t = static_cast<double>(i) / n;
            cell.param.eval_jet(std::span<const double>(&t, 1), &seed1, 1, val, der.data(), ws);
            loop.pts[static_cast<std::size_t>(i)] = val[0];
            loop.vel[static_cast<std::size_t>(i)] = der[0];
        }
        loops.push_back(std::move(loop));
    }
    return loops;
}

inline bool segments_intersect(Complex a, Complex b, Complex c, Complex d, Complex& at) {
    Complex r = b - a, s = d - c;
    double denom = r.real() * s.imag() - r.imag() * s.real();
    if (std::abs(denom) < 1e-18) return false;
    Complex ca = c - a;
    double t = (ca.real() * s.imag() - ca.imag() * s.real()) / denom;
    double u = (ca.real() * r.imag() - ca.imag() * r.real()) / denom;
    if (t <= 0.0 || t >= 1.0 || u <= 0.0 || u >= 1.0) return false;
    at = a + t * r;
    return true;
}

} // namespace detail

inline CycleReport validate_cycle(const RectifiableCurrent& M, const SolverConfig& cfg = {}) {
    if (M.dim != 1)
        throw DimensionMismatch("validate_cycle: implementation handles curves (p = 1)");
    CycleReport rep;

    // cycle: endpoint atoms of the boundary must cancel on probe functions
    {
        RectifiableCurrent dM = boundary(M);
        Box bbox = support_bbox(M);
        ProductBump bump = detail::box_bump(bbox);
        auto sweep = detail::monomial_sweep(M.ambient.N);
        double worst = 0.0;
        for (std::size_t i = 0; i < std::min<std::size_t>(sweep.size(), 9); ++i) {
            MetricForm w(M.ambient.N,
                         bump.as_scalar() * detail::monomial_scalar(M.ambient.N, sweep[i].first,
                                                                    sweep[i].second),
                         {});
            worst = std::max(worst, std::abs(evaluate(dM, w, 4)));
        }
        rep.cycle_residual = worst;
        rep.cycle_ok = worst < 1e-8 * (1.0 + mass(M, 8, false).total);
    }

    auto loops = detail::sample_shadow(M, cfg.shadow_samples);

    // immersion of the shadow: the projected velocity never stalls
    rep.min_shadow_speed = std::numeric_limits<double>::infinity();
    for (const auto& loop : loops)
        for (const auto& v : loop.vel) rep.min_shadow_speed = std::min(rep.min_shadow_speed, std::abs(v));
    rep.immersion_ok = rep.min_shadow_speed > cfg.immersion_tol;

    // transversality of shadow self-intersections
    std::vector<Complex> crossings;
    double min_angle = std::numeric_limits<double>::infinity();
    std::size_t overlap_hits = 0;
    auto check_pair = [&](const detail::ShadowLoop& la, std::size_t i, const detail::ShadowLoop& lb,
                          std::size_t j) {
        Complex at;
        if (!detail::segments_intersect(la.pts[i], la.pts[i + 1], lb.pts[j], lb.pts[j + 1], at))
            return;
        Complex va = la.pts[i + 1] - la.pts[i];
        Complex vb = lb.pts[j + 1] - lb.pts[j];
        double cross = std::abs(va.real() * vb.imag() - va.imag() * vb.real());
        double angle = std::asin(std::clamp(cross / (std::abs(va) * std::abs(vb)), 0.0, 1.0));
        if (angle < cfg.crossing_angle_min) {
            ++overlap_hits;
            return;
        }
        // merge near-duplicate reported crossings
        for (const auto& c : crossings)
            if (std::abs(c - at) < 1e-6) return;
        crossings.push_back(at);
        min_angle = std::min(min_angle, angle);
    };
    for (std::size_t l = 0; l < loops.size(); ++l) {
        const auto& la = loops[l];
        for (std::size_t i = 0; i + 1 < la.pts.size(); ++i) {
            for (std::size_t j = i + 2; j + 1 < la.pts.size(); ++j) {
                if (i == 0 && j + 2 == la.pts.size()) continue; // closing seam adjacency
                check_pair(la, i, la, j);
            }
        }
        for (std::size_t l2 = l + 1; l2 < loops.size(); ++l2)
            for (std::size_t i = 0; i + 1 < la.pts.size(); ++i)
                for (std::size_t j = 0; j + 1 < loops[l2].pts.size(); ++j)
                    check_pair(la, i, loops[l2], j);
    }
    rep.crossings = static_cast<int>(crossings.size());
    rep.min_crossing_angle = crossings.empty() ? 0.0 : min_angle;
    rep.shadow_overlaps = overlap_hits > loops.size() * 4;
    rep.transversal_ok = !rep.shadow_overlaps;
    return rep;
}

// ---------------------------------------------------------------------------
// Planar arrangement of the shadow
// ---------------------------------------------------------------------------

struct PlanarArrangement {
    std::vector<detail::ShadowLoop> loops;
    double lo_x = 0.0, lo_y = 0.0, spacing = 0.0;
    int nx = 0, ny = 0;
    double margin = 0.0;
    std::vector<int> face_of;      // grid node -> face index, -1 = excluded band
    std::vector<double> dist;      // grid node -> distance to the shadow
    struct Face {
        int winding = 0;
        bool unbounded = false;
        std::vector<std::size_t> nodes;    // BFS order from the anchor
        std::vector<std::size_t> parent;   // BFS parent position (index into nodes)
        std::vector<int> loop_windings;    // winding of each loop around the anchor
        std::vector<int> adjacent_loops;
    };
    std::vector<Face> faces;

    Complex node_point(std::size_t id) const {
        std::size_t ix = id % static_cast<std::size_t>(nx);
        std::size_t iy = id / static_cast<std::size_t>(nx);
        return {lo_x + spacing * static_cast<double>(ix), lo_y + spacing * static_cast<double>(iy)};
    }
};

namespace detail {

// integer winding by signed ray crossings; exact off the curve
inline int winding_number(const std::vector<Complex>& poly, Complex p) {
    int w = 0;
    for (std::size_t i = 0; i + 1 < poly.size(); ++i) {
        Complex a = poly[i], b = poly[i + 1];
        if (a.imag() <= p.imag()) {
            if (b.imag() > p.imag()) {
                double cross = (b.real() - a.real()) * (p.imag() - a.imag()) -
                               (b.imag() - a.imag()) * (p.real() - a.real());
                if (cross > 0.0) ++w;
            }
        } else if (b.imag() <= p.imag()) {
            double cross = (b.real() - a.real()) * (p.imag() - a.imag()) -
                           (b.imag() - a.imag()) * (p.real() - a.real());
            if (cross < 0.0) --w;
        }
    }
    return w;
}

inline double dist_to_segment(Complex p, Complex a, Complex b) {
    Complex ab = b - a;
    double len2 = std::norm(ab);
    if (len2 == 0.0) return std::abs(p - a);
    double t = std::clamp(((p - a).real() * ab.real() + (p - a).imag() * ab.imag()) / len2, 0.0, 1.0);
    return std::abs(p - (a + t * ab));
}

} // namespace detail

inline PlanarArrangement build_arrangement(const RectifiableCurrent& M, const SolverConfig& cfg = {}) {
    if (M.dim != 1) throw DimensionMismatch("build_arrangement: curves only (p = 1)");
    PlanarArrangement arr;
    arr.loops = detail::sample_shadow(M, cfg.shadow_samples);
    for (const auto& loop : arr.loops)
        for (std::size_t i = 0; i + 1 < loop.pts.size(); ++i)
            if (std::abs(loop.pts[i + 1] - loop.pts[i]) == 0.0)
                throw SolverError("arrangement", "degenerate sampling: duplicate shadow points");

    double xlo = 1e300, xhi = -1e300, ylo = 1e300, yhi = -1e300, max_spacing = 0.0;
    for (const auto& loop : arr.loops) {
        for (std::size_t i = 0; i < loop.pts.size(); ++i) {
            xlo = std::min(xlo, loop.pts[i].real());
            xhi = std::max(xhi, loop.pts[i].real());
            ylo = std::min(ylo, loop.pts[i].imag());
            yhi = std::max(yhi, loop.pts[i].imag());
            if (i + 1 < loop.pts.size())
                max_spacing = std::max(max_spacing, std::abs(loop.pts[i + 1] - loop.pts[i]));
        }
    }
    double diam = std::max(xhi - xlo, yhi - ylo);
    double pad = 0.25 * diam;
    xlo -= pad;
    xhi += pad;
    ylo -= pad;
    yhi += pad;
    arr.nx = cfg.grid_nx;
    arr.spacing = std::max(xhi - xlo, yhi - ylo) / (cfg.grid_nx - 1);
    arr.ny = static_cast<int>(std::ceil((yhi - ylo) / arr.spacing)) + 1;
    arr.lo_x = xlo;
    arr.lo_y = ylo;
    arr.margin = cfg.margin_factor * max_spacing;

    const std::size_t total = static_cast<std::size_t>(arr.nx) * static_cast<std::size_t>(arr.ny);
    arr.dist.assign(total, 0.0);
    std::vector<int> winding(total, 0);
    std::vector<char> excluded(total, 0);
    parallel_for(total, [&](std::size_t id) {
        Complex p = arr.node_point(id);
        double d = 1e300;
        int w = 0;
        for (const auto& loop : arr.loops) {
            for (std::size_t i = 0; i + 1 < loop.pts.size(); ++i)
                d = std::min(d, detail::dist_to_segment(p, loop.pts[i], loop.pts[i + 1]));
            w += static_cast<int>(loop.multiplicity) * detail::winding_number(loop.pts, p);
        }
        arr.dist[id] = d;
        winding[id] = w;
        excluded[id] = d <= arr.margin ? 1 : 0;
    });

    // connected components of equal winding
    arr.face_of.assign(total, -1);
    for (std::size_t start = 0; start < total; ++start) {
        if (excluded[start] || arr.face_of[start] != -1) continue;
        PlanarArrangement::Face face;
        face.winding = winding[start];
        int id = static_cast<int>(arr.faces.size());
        std::deque<std::pair<std::size_t, std::size_t>> queue; // node, parent position
        arr.face_of[start] = id;
        queue.emplace_back(start, 0);
        while (!queue.empty()) {
            auto [node, parent_pos] = queue.front();
            queue.pop_front();
            face.nodes.push_back(node);
            face.parent.push_back(parent_pos);
            std::size_t pos = face.nodes.size() - 1;
            int ix = static_cast<int>(node % static_cast<std::size_t>(arr.nx));
            int iy = static_cast<int>(node / static_cast<std::size_t>(arr.nx));
            const int dx[4] = {1, -1, 0, 0};
            const int dy[4] = {0, 0, 1, -1};
            for (int d = 0; d < 4; ++d) {
                int jx = ix + dx[d], jy = iy + dy[d];
                if (jx < 0 || jx >= arr.nx || jy < 0 || jy >= arr.ny) {
                    face.unbounded = true;
                    continue;
                }
                std::size_t nid = static_cast<std::size_t>(jy) * static_cast<std::size_t>(arr.nx) +
                                  static_cast<std::size_t>(jx);
                if (excluded[nid] || winding[nid] != face.winding || arr.face_of[nid] != -1)
                    continue;
                arr.face_of[nid] = id;
                queue.emplace_back(nid, pos);
            }
        }
        Complex anchor = arr.node_point(face.nodes.front());
        for (const auto& loop : arr.loops)
            face.loop_windings.push_back(detail::winding_number(loop.pts, anchor));
        arr.faces.push_back(std::move(face));
    }

    // loop adjacency: faces reached from loop samples along the normal
    for (std::size_t l = 0; l < arr.loops.size(); ++l) {
        const auto& loop = arr.loops[l];
        std::set<int> adj;
        for (std::size_t i = 0; i + 1 < loop.pts.size(); i += 4) {
            Complex tangent = loop.pts[i + 1] - loop.pts[i];
            Complex normal = Complex(-tangent.imag(), tangent.real()) / std::abs(tangent);
            for (double side : {1.0, -1.0}) {
                Complex q = loop.pts[i] + side * (arr.margin + 1.5 * arr.spacing) * normal;
                int ix = static_cast<int>(std::round((q.real() - arr.lo_x) / arr.spacing));
                int iy = static_cast<int>(std::round((q.imag() - arr.lo_y) / arr.spacing));
                if (ix < 0 || ix >= arr.nx || iy < 0 || iy >= arr.ny) continue;
                std::size_t nid = static_cast<std::size_t>(iy) * static_cast<std::size_t>(arr.nx) +
                                  static_cast<std::size_t>(ix);
                if (arr.face_of[nid] >= 0) adj.insert(arr.face_of[nid]);
            }
        }
        for (int f : adj) arr.faces[static_cast<std::size_t>(f)].adjacent_loops.push_back(static_cast<int>(l));
    }
    return arr;
}

// ---------------------------------------------------------------------------
// Cauchy-transform moments
// ---------------------------------------------------------------------------

// cached contour data: composite panels along every cell with shadow values,
// shadow velocity and all fiber coordinates
class MomentEngine {
public:
    MomentEngine(const RectifiableCurrent& M, const SolverConfig& cfg = {}) : N_(M.ambient.N) {
        CompositeRule rule = composite_gauss(cfg.panels, cfg.panel_order);
        for (const Cell& cell : M.cells) {
            CellData data;
            data.multiplicity = static_cast<double>(cell.multiplicity);
            const std::size_t n = rule.nodes.size();
            data.weight.resize(n);
            data.shadow.resize(n);
            data.dshadow.resize(n);
            data.coords.assign(static_cast<std::size_t>(N_), std::vector<Complex>(n));
            TapeWorkspace ws;
            std::vector<Complex> val(static_cast<std::size_t>(N_));
            std::vector<Complex> der(static_cast<std::size_t>(N_));
            double seed1 = 1.0;
            for (std::size_t i = 0; i < n; ++i) {
                double t = rule.nodes[i];
                cell.param.eval_jet(std::span<const double>(&t, 1), &seed1, 1, val, der.data(), ws);
                data.weight[i] = rule.weights[i];
                data.shadow[i] = val[0];
                data.dshadow[i] = der[0];
                for (int c = 0; c < N_; ++c) data.coords[static_cast<std::size_t>(c)][i] = val[static_cast<std::size_t>(c)];
            }
            cells_.push_back(std::move(data));
        }
    }

    int ambient_dim() const { return N_; }

    // N_s(z) = (1/2 pi i) * integral over M of w_j^s dzeta / (zeta - z)
    Complex moment(Complex z, int j, int s) const {
        return generic(z, [&](const CellData& c, std::size_t i) {
            Complex p(1.0);
            for (int e = 0; e < s; ++e) p *= c.coords[static_cast<std::size_t>(j)][i];
            return p;
        });
    }

    // mixed moment integral of w_{j0}^s * w_j dzeta / (zeta - z)
    Complex moment_mixed(Complex z, int j0, int s, int j) const {
        return generic(z, [&](const CellData& c, std::size_t i) {
            Complex p(1.0);
            for (int e = 0; e < s; ++e) p *= c.coords[static_cast<std::size_t>(j0)][i];
            return p * c.coords[static_cast<std::size_t>(j)][i];
        });
    }

private:
    struct CellData {
        double multiplicity = 1.0;
        std::vector<double> weight;
        std::vector<Complex> shadow, dshadow;
        std::vector<std::vector<Complex>> coords;
    };

    template <class F>
    Complex generic(Complex z, F&& numerator) const {
        Kahan<Complex> acc;
        for (const auto& c : cells_) {
            Kahan<Complex> cell_acc;
            for (std::size_t i = 0; i < c.weight.size(); ++i) {
                Complex den = c.shadow[i] - z;
                cell_acc.add(c.weight[i] * numerator(c, i) * c.dshadow[i] / den);
            }
            acc.add(c.multiplicity * cell_acc.value());
        }
        const Complex two_pi_i(0.0, 2.0 * 3.14159265358979323846);
        return acc.value() / two_pi_i;
    }

    int N_;
    std::vector<CellData> cells_;
};

// Margin-guarded moment vector N_0..N_smax at a base point; points closer to
// the shadow than the arrangement margin are rejected (the Cauchy kernel
// quadrature is unreliable there).
inline std::vector<Complex> cauchy_moments(const MomentEngine& engine,
                                           const PlanarArrangement& arr, int coord, Complex z,
                                           int smax) {
    double d = 1e300;
    for (const auto& loop : arr.loops)
        for (std::size_t i = 0; i + 1 < loop.pts.size(); ++i)
            d = std::min(d, detail::dist_to_segment(z, loop.pts[i], loop.pts[i + 1]));
    if (d <= arr.margin)
        throw SolverError("moments", "base point is closer to the shadow than the margin (" +
                                         std::to_string(d) + " <= " +
                                         std::to_string(arr.margin) + ")");
    std::vector<Complex> out;
    out.reserve(static_cast<std::size_t>(smax) + 1);
    for (int s = 0; s <= smax; ++s) out.push_back(engine.moment(z, coord, s));
    return out;
}

// the per-face scalar solve: sheet counts, branch values, continuation labels
struct ScalarSolution {
    int coord = 0; // 0-based fiber coordinate
    struct FaceData {
        long long sheets = 0;
        double n0_deviation = 0.0;       // max |N_0 - round| over sampled nodes
        double consistency_residual = 0.0; // Newton-forward residual of extra moments
        double max_jump = 0.0;           // continuation step size
        // branch_values[pos][h]: value of sheet h at face node position pos
        std::vector<std::vector<Complex>> branch_values;
    };
    std::vector<FaceData> faces;
};

namespace detail {

// brute-force min-cost assignment for small n
inline std::vector<int> match_labels(const std::vector<Complex>& prev,
                                     const std::vector<Complex>& next) {
    const int n = static_cast<int>(prev.size());
    std::vector<int> perm(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
    std::vector<int> best = perm;
    double best_cost = 1e300;
    std::sort(perm.begin(), perm.end());
    do {
        double cost = 0.0;
        for (int i = 0; i < n; ++i) cost += std::abs(prev[static_cast<std::size_t>(i)] -
                                                     next[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])]);
        if (cost < best_cost) {
            best_cost = cost;
            best = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

} // namespace detail

// Moment-condition gate + branch extraction for one fiber coordinate.
// Rejections: non-integral or non-constant N_0, negative sheet count,
// nonvanishing exterior moments, Newton-inconsistent higher moments.
inline ScalarSolution solve_scalar(const MomentEngine& engine, const PlanarArrangement& arr,
                                   int coord, const SolverConfig& cfg = {}) {
    if (coord < 1 || coord >= engine.ambient_dim())
        throw SolverError("solve_scalar", "fiber coordinate out of range");
    ScalarSolution sol;
    sol.coord = coord;
    sol.faces.resize(arr.faces.size());
    for (std::size_t f = 0; f < arr.faces.size(); ++f) {
        const auto& face = arr.faces[f];
        auto& out = sol.faces[f];
        // N_0 integrality and constancy over a sample of the face
        std::size_t stride = std::max<std::size_t>(1, face.nodes.size() / 16);
        std::optional<long long> n_common;
        for (std::size_t pos = 0; pos < face.nodes.size(); pos += stride) {
            Complex z = arr.node_point(face.nodes[pos]);
            Complex n0 = engine.moment(z, coord, 0);
            double dev = std::abs(n0 - std::round(n0.real()));
            out.n0_deviation = std::max(out.n0_deviation, dev);
            if (dev > cfg.integrality_tol)
                throw SolverError("moment_condition",
                                  "N_0 is not integral on face " + std::to_string(f) +
                                      " (deviation " + std::to_string(dev) + ")");
            long long n = static_cast<long long>(std::llround(n0.real()));
            if (!n_common) n_common = n;
            else if (*n_common != n)
                throw SolverError("moment_condition",
                                  "sheet count is not constant on face " + std::to_string(f));
        }
        long long n = n_common.value_or(0);
        if (n < 0)
            throw SolverError("moment_condition", "negative sheet count on face " +
                                                      std::to_string(f) +
                                                      " (orientation not positive)");
        out.sheets = n;
        if (face.unbounded && n != 0)
            throw SolverError("moment_condition", "unbounded face carries sheets");

        const int smax = static_cast<int>(n) + cfg.extra_moments;
        if (n == 0) {
            // no chain here: all moments must vanish
            double worst = 0.0;
            for (std::size_t pos = 0; pos < face.nodes.size(); pos += stride) {
                Complex z = arr.node_point(face.nodes[pos]);
                for (int s = 1; s <= smax; ++s)
                    worst = std::max(worst, std::abs(engine.moment(z, coord, s)));
            }
            out.consistency_residual = worst;
            if (worst > cfg.exterior_tol)
                throw SolverError("moment_condition",
                                  (face.unbounded ? std::string("exterior") : std::string("empty")) +
                                      " face " + std::to_string(f) +
                                      " has nonvanishing moments (max " + std::to_string(worst) +
                                      "); no holomorphic chain");
            continue;
        }

        // branch extraction with continuation along the BFS order
        out.branch_values.assign(face.nodes.size(), {});
        double scale = 1.0;
        for (std::size_t pos = 0; pos < face.nodes.size(); ++pos) {
            Complex z = arr.node_point(face.nodes[pos]);
            std::vector<Complex> p(static_cast<std::size_t>(n));
            for (long long s = 1; s <= n; ++s)
                p[static_cast<std::size_t>(s - 1)] = engine.moment(z, coord, static_cast<int>(s));
            auto e = power_sums_to_elementary(p);
            // Newton-forward consistency on the extra moments
            auto predicted = elementary_to_power_sums(e, smax);
            for (int s = static_cast<int>(n) + 1; s <= smax; ++s) {
                Complex measured = engine.moment(z, coord, s);
                double res = std::abs(measured - predicted[static_cast<std::size_t>(s - 1)]);
                out.consistency_residual = std::max(out.consistency_residual, res);
                scale = std::max(scale, std::abs(measured));
            }
            auto roots = monic_roots(elementary_to_monic(e));
            if (pos == 0) {
                std::sort(roots.begin(), roots.end(), [](Complex a, Complex b) {
                    if (a.real() != b.real()) return a.real() < b.real();
                    return a.imag() < b.imag();
                });
                out.branch_values[pos] = std::move(roots);
            } else {
                const auto& prev = out.branch_values[face.parent[pos]];
                auto perm = detail::match_labels(prev, roots);
                std::vector<Complex> labeled(roots.size());
                double jump = 0.0;
                for (std::size_t h = 0; h < roots.size(); ++h) {
                    labeled[h] = roots[static_cast<std::size_t>(perm[h])];
                    jump = std::max(jump, std::abs(labeled[h] - prev[h]));
                }
                out.max_jump = std::max(out.max_jump, jump);
                out.branch_values[pos] = std::move(labeled);
            }
        }
        if (out.consistency_residual > cfg.consistency_tol * scale)
            throw SolverError("moment_condition",
                              "higher moments are inconsistent with " + std::to_string(n) +
                                  " sheets on face " + std::to_string(f) + " (residual " +
                                  std::to_string(out.consistency_residual) +
                                  "); no holomorphic chain");
    }
    return sol;
}

// ---------------------------------------------------------------------------
// Assembly into a holomorphic chain
// ---------------------------------------------------------------------------

struct FaceSolution {
    int face = -1;
    long long sheets = 0;
    std::vector<std::size_t> nodes; // grid ids in BFS order
    // aligned branch values: values[j-1][pos][h] for fiber coordinate j
    std::vector<std::vector<std::vector<Complex>>> values;
    // polynomial fits: fits[h][j-1]
    std::vector<std::vector<PolyFit>> fits;
    double fit_residual = 0.0;
    double coherence_residual = 0.0;
    std::string fill; // "cone", "blend" or "" when not materialized
};

struct ChainSolution {
    int N_trunc = 0;
    double tail_bound = 0.0;
    CycleReport validation;
    PlanarArrangement arrangement;
    std::vector<FaceSolution> faces;
    RectifiableCurrent chain; // graph cells over the materialized faces
    bool fully_materialized = true;
    MassReport mass_report;
};

namespace detail {

inline Expr loop_shadow_expr(const Cell& curve_cell) {
    ExpressionMap shadow(1, {curve_cell.param.outputs()[0]});
    ExpressionMap shifted = remap_params(shadow, 2, {1}); // t becomes parameter u2
    return shifted.outputs()[0];
}

// orientation check of the blend (s,t) -> (1-s) hole(t) + s outer(t)
inline bool blend_orientation_ok(const ShadowLoop& hole, const ShadowLoop& outer) {
    const std::size_t n = std::min(hole.pts.size(), outer.pts.size()) - 1;
    for (std::size_t i = 0; i < n; i += std::max<std::size_t>(1, n / 64)) {
        for (double s : {0.1, 0.5, 0.9}) {
            Complex zs = outer.pts[i] - hole.pts[i];
            Complex zt = (1.0 - s) * hole.vel[i] + s * outer.vel[i];
            double det = zs.real() * zt.imag() - zs.imag() * zt.real();
            if (det <= 0.0) return false;
        }
    }
    return true;
}

} // namespace detail

// Branch maps assembled across coordinates: the first fiber coordinate is
// solved by moments + Newton + continuation; every further coordinate is
// aligned to those labels through mixed moments and a Vandermonde solve,
// then cross-checked against its own scalar solve (degree coherence).
inline ChainSolution assemble(const RectifiableCurrent& M, int N_trunc,
                              const SolverConfig& cfg = {}) {
    if (N_trunc < 2 || N_trunc > M.ambient.N)
        throw SolverError("assemble", "N_trunc must lie between 2 and the ambient dimension");
    ChainSolution sol;
    sol.N_trunc = N_trunc;
    sol.validation = validate_cycle(M, cfg);
    if (!sol.validation.cycle_ok) throw SolverError("assemble", "input is not a cycle");
    if (!sol.validation.immersion_ok)
        throw SolverError("assemble", "shadow projection is not an immersion");
    sol.arrangement = build_arrangement(M, cfg);
    const PlanarArrangement& arr = sol.arrangement;
    MomentEngine engine(M, cfg);

    const int primary = 1;
    ScalarSolution base = solve_scalar(engine, arr, primary, cfg);

    // independent per-coordinate solves for the coherence check
    std::vector<ScalarSolution> per_coord(static_cast<std::size_t>(N_trunc));
    for (int j = 2; j < N_trunc; ++j)
        per_coord[static_cast<std::size_t>(j)] = solve_scalar(engine, arr, j, cfg);

    std::vector<Cell> chain_cells;
    for (std::size_t f = 0; f < arr.faces.size(); ++f) {
        const auto& face = arr.faces[f];
        long long n = base.faces[f].sheets;
        if (n == 0) continue;
        FaceSolution fs;
        fs.face = static_cast<int>(f);
        fs.sheets = n;
        fs.nodes = face.nodes;
        fs.values.assign(static_cast<std::size_t>(N_trunc - 1), {});
        fs.values[0] = base.faces[f].branch_values;

        for (int j = 2; j < N_trunc; ++j) {
            if (per_coord[static_cast<std::size_t>(j)].faces[f].sheets != n)
                throw SolverError("assemble", "sheet counts disagree across coordinates on face " +
                                                  std::to_string(f));
            auto& aligned = fs.values[static_cast<std::size_t>(j - 1)];
            aligned.assign(face.nodes.size(), {});
            for (std::size_t pos = 0; pos < face.nodes.size(); ++pos) {
                Complex z = arr.node_point(face.nodes[pos]);
                const auto& baseh = fs.values[0][pos];
                if (n == 1) {
                    aligned[pos] = {engine.moment_mixed(z, primary, 0, j)};
                } else {
                    std::vector<Complex> mixed(static_cast<std::size_t>(n));
                    for (long long s = 0; s < n; ++s)
                        mixed[static_cast<std::size_t>(s)] =
                            engine.moment_mixed(z, primary, static_cast<int>(s), j);
                    aligned[pos] = vandermonde_solve(baseh, mixed);
                }
                // degree/value coherence against the independent scalar solve
                const auto& own = per_coord[static_cast<std::size_t>(j)].faces[f].branch_values[pos];
                for (const Complex& v : aligned[pos]) {
                    double best = 1e300;
                    for (const Complex& w : own) best = std::min(best, std::abs(v - w));
                    fs.coherence_residual = std::max(fs.coherence_residual, best);
                }
            }
        }
        double scale = 1.0;
        for (const auto& per_j : fs.values)
            for (const auto& per_pos : per_j)
                for (const Complex& v : per_pos) scale = std::max(scale, std::abs(v));
        if (fs.coherence_residual > 1e-6 * scale)
            throw SolverError("assemble", "aligned branch values disagree with the scalar solves "
                                          "on face " +
                                              std::to_string(f) + " (residual " +
                                              std::to_string(fs.coherence_residual) + ")");

        // holomorphic polynomial fits per sheet and coordinate
        std::vector<std::vector<Complex>> grid;
        grid.reserve(face.nodes.size());
        Complex centroid(0.0);
        for (std::size_t id : face.nodes) centroid += arr.node_point(id);
        centroid /= static_cast<double>(face.nodes.size());
        for (std::size_t id : face.nodes) grid.push_back({arr.node_point(id)});
        std::vector<Complex> center{centroid};
        fs.fits.assign(static_cast<std::size_t>(n), {});
        for (long long h = 0; h < n; ++h) {
            for (int j = 1; j < N_trunc; ++j) {
                std::vector<Complex> vals(face.nodes.size());
                for (std::size_t pos = 0; pos < face.nodes.size(); ++pos)
                    vals[pos] = fs.values[static_cast<std::size_t>(j - 1)][pos][static_cast<std::size_t>(h)];
                PolyFit fit = fit_holomorphic(grid, vals, cfg.fit_degree, center);
                fs.fit_residual = std::max(fs.fit_residual, fit.residual);
                fs.fits[static_cast<std::size_t>(h)].push_back(std::move(fit));
            }
        }

        // materialize graph cells over the face
        std::vector<int> adj = face.adjacent_loops;
        std::vector<int> outers, holes;
        for (int l : adj) {
            int w = face.loop_windings[static_cast<std::size_t>(l)];
            if (w != 0) outers.push_back(l);
            else holes.push_back(l);
        }
        Expr zexpr;
        bool can_fill = false;
        if (outers.size() == 1 && holes.empty() &&
            face.loop_windings[static_cast<std::size_t>(outers[0])] == 1) {
            // cone from the centroid; verify star-shapedness on the samples
            const auto& loop = arr.loops[static_cast<std::size_t>(outers[0])];
            bool star = true;
            std::size_t step = std::max<std::size_t>(1, (loop.pts.size() - 1) / 64);
            for (std::size_t i = 0; i + 1 < loop.pts.size() && star; i += step) {
                for (double t : {0.35, 0.6, 0.85}) {
                    Complex q = centroid + t * (loop.pts[i] - centroid);
                    int ix = static_cast<int>(std::round((q.real() - arr.lo_x) / arr.spacing));
                    int iy = static_cast<int>(std::round((q.imag() - arr.lo_y) / arr.spacing));
                    if (ix < 0 || ix >= arr.nx || iy < 0 || iy >= arr.ny) continue;
                    int fo = arr.face_of[static_cast<std::size_t>(iy) * static_cast<std::size_t>(arr.nx) +
                                         static_cast<std::size_t>(ix)];
                    if (fo != -1 && fo != static_cast<int>(f)) {
                        star = false;
                        break;
                    }
                }
            }
            if (star) {
                Expr shadow_t = detail::loop_shadow_expr(M.cells[static_cast<std::size_t>(outers[0])]);
                zexpr = Expr::literal(centroid) +
                        Expr::param(0) * (shadow_t - Expr::literal(centroid));
                fs.fill = "cone";
                can_fill = true;
            }
        } else if (outers.size() == 1 && holes.size() == 1 &&
                   face.loop_windings[static_cast<std::size_t>(outers[0])] == 1) {
            const auto& outer = arr.loops[static_cast<std::size_t>(outers[0])];
            const auto& hole = arr.loops[static_cast<std::size_t>(holes[0])];
            if (detail::blend_orientation_ok(hole, outer)) {
                Expr outer_t = detail::loop_shadow_expr(M.cells[static_cast<std::size_t>(outers[0])]);
                Expr hole_t = detail::loop_shadow_expr(M.cells[static_cast<std::size_t>(holes[0])]);
                zexpr = (Expr::literal(Complex(1.0)) - Expr::param(0)) * hole_t +
                        Expr::param(0) * outer_t;
                fs.fill = "blend";
                can_fill = true;
            }
        }
        if (can_fill) {
            for (long long h = 0; h < n; ++h) {
                std::vector<Expr> outs{zexpr};
                for (int j = 1; j < N_trunc; ++j)
                    outs.push_back(fit_to_expr(fs.fits[static_cast<std::size_t>(h)][static_cast<std::size_t>(j - 1)],
                                               zexpr));
                chain_cells.emplace_back(2, ExpressionMap(2, std::move(outs)), 1);
            }
        } else {
            sol.fully_materialized = false;
        }
        sol.faces.push_back(std::move(fs));
    }

    // certified tail: discarded coordinates sampled over M plus the declared
    // analytic budget of the fixture
    double tail = 0.0;
    {
        TapeWorkspace ws;
        std::vector<Complex> val(static_cast<std::size_t>(M.ambient.N));
        for (const Cell& cell : M.cells) {
            for (int i = 0; i <= cfg.shadow_samples; ++i) {
                double t = static_cast<double>(i) / cfg.shadow_samples;
                cell.param.eval(std::span<const double>(&t, 1), val, ws);
                double s2 = 0.0;
                for (int c = N_trunc; c < M.ambient.N; ++c)
                    s2 += std::norm(val[static_cast<std::size_t>(c)]);
                tail = std::max(tail, std::sqrt(s2));
            }
        }
    }
    sol.tail_bound = tail + M.tail_budget;

    if (!chain_cells.empty()) {
        sol.chain = RectifiableCurrent(AmbientSpace(N_trunc), 2, std::move(chain_cells));
        sol.mass_report = mass(sol.chain, 12, /*estimate_error=*/false);
    } else {
        sol.fully_materialized = false;
    }
    return sol;
}

// ---------------------------------------------------------------------------
// Boundary verification
// ---------------------------------------------------------------------------

struct VerifyReport {
    double residual = 0.0;   // max probe defect / (1 + mass of the datum)
    double scale = 1.0;
    int probes = 0;
    double mass_candidate = 0.0;
    double mass_datum = 0.0;
};

// max over probes (f, pi) of |T(1, f, pi) - [M](f, pi)|, normalized by the
// datum's mass. Uniqueness is not certified: closed interior components move
// the mass, not this residual.
inline VerifyReport verify_boundary(const RectifiableCurrent& T, const RectifiableCurrent& M,
                                    int probe_count = 50, int order = 24,
                                    std::uint64_t seed = 123) {
    if (T.dim != M.dim + 1)
        throw DimensionMismatch("verify_boundary: dim T must exceed dim M by one");
    VerifyReport rep;
    rep.probes = probe_count;
    rep.mass_candidate = mass(T, 12, false).total;
    rep.mass_datum = mass(M, 12, false).total;
    rep.scale = 1.0 + rep.mass_datum;

    Box bt = support_bbox(T), bm = support_bbox(M);
    Box joint = bt;
    for (std::size_t i = 0; i < joint.lo.size(); ++i) {
        joint.lo[i] = std::min(joint.lo[i], bm.lo[i]);
        joint.hi[i] = std::max(joint.hi[i], bm.hi[i]);
    }
    Rng rng(seed);
    const int N = T.ambient.N;
    double worst = 0.0;
    for (int p = 0; p < probe_count; ++p) {
        // off-center bumps so f genuinely varies along the datum
        ProductBump bump = detail::box_bump(joint, 2.0);
        for (std::size_t j = 0; j < bump.center.size(); ++j) {
            double hw = 0.5 * (joint.hi[2 * j] - joint.lo[2 * j]);
            double hh = 0.5 * (joint.hi[2 * j + 1] - joint.lo[2 * j + 1]);
            bump.center[j] += Complex(rng.uniform(-hw, hw), rng.uniform(-hh, hh));
        }
        std::vector<FormEntry> tail_entries;
        for (int e = 0; e < M.dim; ++e)
            tail_entries.push_back(detail::random_linear_entry(N, e % 2 == 1, rng));
        // datum side
        MetricForm wm(N, bump.as_scalar(), tail_entries);
        Complex rhs = evaluate(M, wm, order);
        // candidate side: T(1, f, pi)
        MetricForm wt;
        wt.N = N;
        wt.f = FormScalar::one(N);
        wt.entries.push_back(bump.as_entry());
        wt.entries.insert(wt.entries.end(), tail_entries.begin(), tail_entries.end());
        Complex lhs = evaluate(T, wt, order);
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    rep.residual = worst / rep.scale;
    return rep;
}

// ---------------------------------------------------------------------------
// Parameter families
// ---------------------------------------------------------------------------

struct FamilyReport {
    std::vector<double> s_values;
    std::vector<double> distances; // sup branch-value distance between neighbours
    std::vector<double> moduli;    // distances / delta s
    std::vector<std::size_t> splits; // indices where the arrangement topology changed
};

// modulus of continuity of s -> ChainSolution over a parameter grid; families
// crossing an arrangement-topology change are split there.
inline FamilyReport family_continuity_check(const std::vector<std::pair<double, RectifiableCurrent>>& family,
                                            int N_trunc, const SolverConfig& cfg = {}) {
    FamilyReport rep;
    std::vector<ChainSolution> sols;
    for (const auto& [s, M] : family) {
        rep.s_values.push_back(s);
        sols.push_back(assemble(M, N_trunc, cfg));
    }
    for (std::size_t i = 0; i + 1 < sols.size(); ++i) {
        const auto& a = sols[i];
        const auto& b = sols[i + 1];
        auto winding_multiset = [](const ChainSolution& c) {
            std::vector<int> w;
            for (const auto& f : c.arrangement.faces) w.push_back(f.winding);
            std::sort(w.begin(), w.end());
            return w;
        };
        if (a.faces.size() != b.faces.size() ||
            winding_multiset(a) != winding_multiset(b)) {
            rep.splits.push_back(i + 1);
            rep.distances.push_back(std::numeric_limits<double>::quiet_NaN());
            rep.moduli.push_back(std::numeric_limits<double>::quiet_NaN());
            continue;
        }
        double dist = 0.0;
        for (std::size_t fa = 0; fa < a.faces.size(); ++fa) {
            // match faces by winding of the underlying arrangement face
            const auto& fsa = a.faces[fa];
            const FaceSolution* fsb = nullptr;
            for (const auto& cand : b.faces)
                if (b.arrangement.faces[static_cast<std::size_t>(cand.face)].winding ==
                        a.arrangement.faces[static_cast<std::size_t>(fsa.face)].winding &&
                    cand.sheets == fsa.sheets)
                    fsb = &cand;
            if (!fsb) {
                rep.splits.push_back(i + 1);
                continue;
            }
            // compare fitted branches at the anchor of solution a
            std::vector<Complex> z{a.arrangement.node_point(fsa.nodes.front())};
            for (long long h = 0; h < fsa.sheets; ++h) {
                for (int j = 0; j + 1 < N_trunc; ++j) {
                    Complex va = eval_fit(fsa.fits[static_cast<std::size_t>(h)][static_cast<std::size_t>(j)], z);
                    double best = 1e300;
                    for (long long h2 = 0; h2 < fsb->sheets; ++h2) {
                        Complex vb = eval_fit(fsb->fits[static_cast<std::size_t>(h2)][static_cast<std::size_t>(j)], z);
                        best = std::min(best, std::abs(va - vb));
                    }
                    dist = std::max(dist, best);
                }
            }
        }
        double ds = std::abs(rep.s_values[i + 1] - rep.s_values[i]);
        rep.distances.push_back(dist);
        rep.moduli.push_back(ds > 0.0 ? dist / ds : 0.0);
    }
    return rep;
}

} // namespace currents
