// Acceptance suite: one line per criterion, exit 0 only if every criterion
// holds at its stated tolerance. Run through ctest or directly.

#include <chrono>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <vector>

#include "currents/scenario.hpp"

using namespace currents;

namespace {

const double kPi = 3.14159265358979323846;

struct Criterion {
    std::string name;
    std::function<bool(std::string&)> run;
};

FormEntry random_affine(int N, Rng& rng) {
    std::vector<Complex> a(static_cast<std::size_t>(N)), b(static_cast<std::size_t>(N));
    for (int j = 0; j < N; ++j) {
        a[static_cast<std::size_t>(j)] = rng.complex_in_box(-1.0, 1.0);
        b[static_cast<std::size_t>(j)] = rng.complex_in_box(-1.0, 1.0);
    }
    return affine_entry(N, a, b, rng.complex_in_box(-1.0, 1.0));
}

std::vector<RectifiableCurrent> calculus_fixtures() {
    return {fixtures::disk(),
            fixtures::circle(),
            fixtures::parabola_graph(),
            fixtures::branch_pair(),
            fixtures::half_branch(),
            fixtures::real_plane(2),
            fixtures::zpowers_graph(3, 0.9),
            fixtures::factorial_graph(6, 1.0),
            fixtures::graph_over_disk({{0.0, 0.7}}, 0.9),
            fixtures::bidisk_graph(0.8)};
}

bool criterion_calculus(std::string& detail) {
    Rng rng(2024);
    auto disk = fixtures::disk();
    auto graph = fixtures::parabola_graph();
    double worst_lin = 0.0, worst_alt = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const RectifiableCurrent& T = (trial % 2 == 0) ? disk : graph;
        const int N = T.ambient.N;
        FormEntry e1 = random_affine(N, rng), e1b = random_affine(N, rng),
                  e2 = random_affine(N, rng);
        Complex a = rng.complex_in_box(-1.0, 1.0), b = rng.complex_in_box(-1.0, 1.0);
        FormEntry combo = FormEntry::from_expr(
            ExpressionMap(2 * N, {Expr::literal(a) * e1.expr->outputs()[0] +
                                  Expr::literal(b) * e1b.expr->outputs()[0]}),
            EntryType::General, true);
        Complex lhs = evaluate(T, MetricForm(N, FormScalar::one(N), {combo, e2}), 10);
        Complex rhs = a * evaluate(T, MetricForm(N, FormScalar::one(N), {e1, e2}), 10) +
                      b * evaluate(T, MetricForm(N, FormScalar::one(N), {e1b, e2}), 10);
        worst_lin = std::max(worst_lin, std::abs(lhs - rhs) / (1.0 + std::abs(lhs)));
        Complex fw = evaluate(T, MetricForm(N, FormScalar::one(N), {e1, e2}), 10);
        Complex sw = evaluate(T, MetricForm(N, FormScalar::one(N), {e2, e1}), 10);
        worst_alt = std::max(worst_alt, std::abs(fw + sw) / (1.0 + std::abs(fw)));
    }
    // locality: a differential entry constant near the support annihilates T
    std::vector<Complex> zc(1, Complex(0.0));
    double worst_loc = std::abs(evaluate(
        disk,
        MetricForm(1, FormScalar::one(1),
                   {affine_entry(1, zc, zc, Complex(2.0, 1.0)), coordinate_entry(1, 0, true)}),
        10));

    // Stokes at order 32 across ten fixtures
    double worst_stokes = 0.0;
    for (const auto& T : calculus_fixtures()) {
        auto dT = boundary(T);
        const int N = T.ambient.N;
        FormEntry fe = random_affine(N, rng);
        std::vector<FormEntry> pis;
        for (int e = 0; e + 1 < T.dim; ++e) pis.push_back(random_affine(N, rng));
        MetricForm low(N, FormScalar::from_expr(*fe.expr), pis);
        std::vector<FormEntry> lifted{fe};
        for (const auto& p : pis) lifted.push_back(p);
        MetricForm high(N, FormScalar::one(N), lifted);
        Complex lhs = evaluate(dT, low, 32);
        Complex rhs = evaluate(T, high, 32);
        worst_stokes = std::max(worst_stokes, std::abs(lhs - rhs) / (1.0 + std::abs(rhs)));
    }

    // pushforward/boundary commutation on 20 probes
    ExpressionMap F(4, {zvar(0) + Expr::literal(Complex(0.3)) * zvar(1),
                        zvar(1) + Expr::literal(Complex(0.2)) * pow(zvar(0), 2)},
                    true);
    auto lhsC = boundary(pushforward(F, graph));
    auto rhsC = pushforward(F, boundary(graph));
    double worst_comm = 0.0;
    for (int probe = 0; probe < 20; ++probe) {
        FormEntry fe = random_affine(2, rng), pe = random_affine(2, rng);
        MetricForm w(2, FormScalar::from_expr(*fe.expr), {pe});
        Complex a = evaluate(lhsC, w, 20), b = evaluate(rhsC, w, 20);
        worst_comm = std::max(worst_comm, std::abs(a - b));
    }

    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "multilinear %.2e, alternation %.2e, locality %.2e, stokes %.2e, "
                  "d(F#T)=F#(dT) %.2e",
                  worst_lin, worst_alt, worst_loc, worst_stokes, worst_comm);
    detail = buf;
    return worst_lin < 1e-12 && worst_alt < 1e-12 && worst_loc < 1e-12 &&
           worst_stokes < 1e-8 && worst_comm < 1e-10;
}

bool criterion_mass_wirtinger(std::string& detail) {
    auto disk = fixtures::disk();
    double m_disk = mass(disk, 16).total;
    bool ok = std::abs(m_disk - kPi) < 1e-10;

    // independent oracle for the graph: 2D polar quadrature of 1 + 4|z|^2
    const GaussRule& g = gauss_rule(48);
    double oracle = 0.0;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        double r = g.nodes[i];
        oracle += g.weights[i] * (1.0 + 4.0 * r * r) * r;
    }
    oracle *= 2.0 * kPi;
    double m_graph = mass(fixtures::parabola_graph(), 24).total;
    ok = ok && std::abs(m_graph - 3.0 * kPi) < 1e-6 && std::abs(m_graph - oracle) < 1e-6;

    // Wirtinger equality on every positive holomorphic-graph fixture
    double worst_rel = 0.0;
    std::vector<RectifiableCurrent> graphs{fixtures::parabola_graph(),
                                           fixtures::zpowers_graph(3, 0.9),
                                           fixtures::factorial_graph(8, 1.0),
                                           fixtures::graph_over_disk({{0.0, 0.7}}, 0.9)};
    for (const auto& T : graphs) {
        auto rep = wirtinger_mass(T, 1, 24);
        worst_rel = std::max(worst_rel,
                             std::abs(rep.coordinate_sum - rep.mass_total) / rep.mass_total);
        ok = ok && rep.mass_le_sum;
    }
    // negative control: the totally real plane is flagged
    auto neg = wirtinger_mass(fixtures::real_plane(2), 1, 12);
    ok = ok && !neg.mass_le_sum;

    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "disk mass err %.2e, graph mass err %.2e, wirtinger rel %.2e, "
                  "real-plane flagged %s",
                  std::abs(m_disk - kPi), std::abs(m_graph - 3.0 * kPi), worst_rel,
                  neg.mass_le_sum ? "no" : "yes");
    detail = buf;
    return ok && worst_rel < 1e-6;
}

bool criterion_slicing(std::string& detail) {
    // disk against Re z, mollified pipeline at 256 and 512 base points
    auto disk = fixtures::disk();
    MetricForm tail_disk(1, FormScalar::one(1), {im_coordinate_entry(1, 0)});
    std::vector<double> lo{-1.2}, hi{1.2};
    auto d256 = slice_integral_check(disk, {0}, tail_disk, lo, hi, 256, 0.05, 96);
    auto d512 = slice_integral_check(disk, {0}, tail_disk, lo, hi, 512, 0.05, 96);
    bool ok = d256.residual < 1e-4 * std::abs(d256.contracted) &&
              d512.residual <= 0.5 * d256.residual + 1e-12;

    // branch pair against Re z with a radial shell
    auto pair = fixtures::branch_pair();
    auto shell = [](std::span<const double> x) {
        double q = x[0] * x[0] + x[1] * x[1];
        double s = (q - 0.5) / 0.15;
        return Complex(std::exp(-s * s));
    };
    MetricForm tail_pair;
    tail_pair.N = 2;
    tail_pair.f = FormScalar::from_fn(shell);
    tail_pair.entries.push_back(im_coordinate_entry(2, 0));
    std::vector<double> lo2{-1.1}, hi2{1.1};
    auto p256 = slice_integral_check(pair, {0}, tail_pair, lo2, hi2, 256, 0.06, 128);
    auto p512 = slice_integral_check(pair, {0}, tail_pair, lo2, hi2, 512, 0.06, 128);
    ok = ok && p256.residual < 1e-4 * std::abs(p256.contracted) &&
         p512.residual <= 0.5 * p256.residual + 1e-12;

    // sheet-count constancy along 20-point regular paths, exact integers
    bool sheets_ok = true;
    for (int i = 0; i < 20; ++i) {
        double t = static_cast<double>(i) / 19.0;
        std::vector<Complex> xa{Complex(0.3 + 0.4 * t, 0.15)};
        sheets_ok = sheets_ok &&
                    slice_points(pair, CoordinateProjection({0}), xa).total_multiplicity() == 2;
        std::vector<Complex> xg{Complex(-0.4 + 0.8 * t, 0.2)};
        sheets_ok = sheets_ok && slice_points(fixtures::parabola_graph(),
                                              CoordinateProjection({0}), xg)
                                         .total_multiplicity() == 1;
    }
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "disk resid %.2e -> %.2e, pair resid %.2e -> %.2e, sheet paths %s",
                  d256.residual, d512.residual, p256.residual, p512.residual,
                  sheets_ok ? "exact" : "BROKEN");
    detail = buf;
    return ok && sheets_ok;
}

bool criterion_delbar_slicing(std::string& detail) {
    auto T = fixtures::bidisk_graph(1.0);
    std::vector<CommutationProbe> probes;
    Rng rng(71);
    for (int i = 0; i < 10; ++i) {
        CommutationProbe p;
        p.f.center = {Complex(0.0), Complex(0.0), Complex(0.0), Complex(0.0)};
        p.f.radius = {0.8, 0.8, -1.0, -1.0};
        std::vector<Complex> a(4);
        for (auto& c : a) c = rng.complex_in_box(-1.0, 1.0);
        std::vector<Complex> zero(4, Complex(0.0));
        p.eta = affine_entry(4, a, zero);
        probes.push_back(std::move(p));
    }
    auto res = delbar_slice_commutation_check(T, 2, 2, 1, Complex(0.0), probes, 0.1, 20);
    char buf[128];
    std::snprintf(buf, sizeof(buf), "max |<dbar T> - dbar<T>| = %.2e on 10 probes",
                  res.max_residual);
    detail = buf;
    return res.max_residual < 1e-8;
}

bool criterion_king(std::string& detail) {
    std::string parts;
    bool ok = true;

    // (a) branch pair: P = W^2 - z, coefficients against hand Newton values
    {
        auto pair = fixtures::branch_pair();
        KingConfig cfg;
        cfg.grid_center = std::vector<Complex>{Complex(-0.56, 0.0)};
        cfg.grid_radius = 0.1;
        cfg.max_degree = 6;
        auto rec = assemble_variety(pair, cfg);
        const ProjectionReconstruction* pr = nullptr;
        for (const auto& p : rec.projections)
            if (p.I == std::vector<int>{0}) pr = &p;
        double err = 1e300;
        if (pr && pr->sheet_count == 2) {
            err = 0.0;
            auto grid = cheb_polydisk_grid(pr->grid_center,
                                           std::vector<double>{pr->grid_radius}, 5);
            for (const auto& z : grid) {
                // hand Newton: p = (0, 2z) -> e_1 = 0, e_2 = -z
                err = std::max(err, std::abs(eval_fit(pr->branches[0].coeff_fits[0], z)));
                err = std::max(err,
                               std::abs(eval_fit(pr->branches[0].coeff_fits[1], z) + z[0]));
            }
        }
        ok = ok && err < 1e-6;
        char buf[96];
        std::snprintf(buf, sizeof(buf), "W^2-z coeff err %.2e", err);
        parts += buf;
    }

    // (b) z-powers graph in C^3
    {
        KingConfig cfg;
        cfg.grid_radius = 0.12;
        cfg.max_degree = 8;
        auto rec = assemble_variety(fixtures::zpowers_graph(3, 0.9), cfg);
        const ProjectionReconstruction* pr = nullptr;
        for (const auto& p : rec.projections)
            if (p.I == std::vector<int>{0}) pr = &p;
        double err = 1e300;
        if (pr && pr->branches.size() == 2) {
            err = 0.0;
            auto grid = cheb_polydisk_grid(pr->grid_center,
                                           std::vector<double>{pr->grid_radius}, 5);
            for (const auto& z : grid) {
                err = std::max(err, std::abs(eval_fit(pr->branches[0].coeff_fits[0], z) -
                                             z[0] * z[0]));
                err = std::max(err, std::abs(eval_fit(pr->branches[1].coeff_fits[0], z) -
                                             z[0] * z[0] * z[0]));
            }
        }
        ok = ok && err < 1e-6 && rec.support_residual < 1e-8;
        char buf[96];
        std::snprintf(buf, sizeof(buf), "; zpowers coeff err %.2e support %.2e", err,
                      rec.support_residual);
        parts += buf;
    }

    // (c) multiplicity fixture 2 [w = z]
    {
        KingConfig cfg;
        cfg.grid_radius = 0.12;
        cfg.max_degree = 6;
        auto rec = assemble_variety(fixtures::graph_over_disk({{0.0, 1.0}}, 0.9, 2), cfg);
        const ProjectionReconstruction* pr = nullptr;
        for (const auto& p : rec.projections)
            if (p.I == std::vector<int>{0}) pr = &p;
        double err = 1e300;
        if (pr && pr->sheet_count == 2) {
            err = 0.0;
            auto grid = cheb_polydisk_grid(pr->grid_center,
                                           std::vector<double>{pr->grid_radius}, 5);
            for (const auto& z : grid) {
                err = std::max(err, std::abs(eval_fit(pr->branches[0].coeff_fits[0], z) -
                                             2.0 * z[0]));
                err = std::max(err, std::abs(eval_fit(pr->branches[0].coeff_fits[1], z) -
                                             z[0] * z[0]));
            }
        }
        bool mult_ok = rec.chain_multiplicities == std::vector<long long>{2};
        ok = ok && err < 1e-6 && mult_ok;
        char buf[96];
        std::snprintf(buf, sizeof(buf), "; (W-z)^2 err %.2e mult %s", err,
                      mult_ok ? "{2}" : "WRONG");
        parts += buf;
    }

    // (d) non-closed half branch rejected by the holomorphy fit
    {
        auto half = fixtures::half_branch();
        KingConfig cfg;
        std::vector<Complex> center{Complex(0.5625, 0.0)};
        auto grid = cheb_polydisk_grid(center, std::vector<double>{0.08}, 6);
        bool rejected = false;
        double resid = 0.0;
        try {
            PowerSumTable tab = power_sums(half, CoordinateProjection({0}), 1, grid, 1, cfg);
            auto evals = newton_to_coeffs(tab);
            PolyFit fit = fit_holomorphic(grid, evals[0], cfg.max_degree, center);
            resid = fit.residual;
            rejected = fit.residual > cfg.tolerance;
        } catch (const KingError&) {
            rejected = true;
        }
        ok = ok && rejected;
        char buf[96];
        std::snprintf(buf, sizeof(buf), "; half-branch fit residual %.2e (rejected %s)", resid,
                      rejected ? "yes" : "NO");
        parts += buf;
    }
    detail = parts;
    return ok;
}

bool criterion_boundary(std::string& detail) {
    SolverConfig cfg;
    cfg.shadow_samples = 2048;
    cfg.grid_nx = 64;
    cfg.panels = 1024;
    std::string parts;
    bool ok = true;

    // (a) parabola curve
    {
        auto M = fixtures::parabola_curve();
        MomentEngine engine(M, cfg);
        double moment_err = 0.0;
        for (Complex z : {Complex(0.3, 0.2), Complex(-0.4, 0.1)})
            for (int s = 0; s <= 3; ++s)
                moment_err = std::max(moment_err,
                                      std::abs(engine.moment(z, 1, s) - std::pow(z, 2 * s)));
        ChainSolution sol = assemble(M, 2, cfg);
        double branch_err = 1e300;
        if (sol.faces.size() == 1) {
            branch_err = 0.0;
            const auto& face = sol.arrangement.faces[static_cast<std::size_t>(sol.faces[0].face)];
            for (std::size_t pos = 0; pos < face.nodes.size(); ++pos) {
                Complex z = sol.arrangement.node_point(face.nodes[pos]);
                branch_err = std::max(branch_err,
                                      std::abs(sol.faces[0].values[0][pos][0] - z * z));
            }
        }
        VerifyReport vr = verify_boundary(sol.chain, M, 50, 24, 7);
        ok = ok && moment_err < 1e-8 && branch_err < 1e-6 && vr.residual < 1e-6;
        char buf[128];
        std::snprintf(buf, sizeof(buf),
                      "moments %.2e, F(z)=z^2 sup err %.2e, verify %.2e", moment_err,
                      branch_err, vr.residual);
        parts += buf;
    }

    // (b) factorial decay fixture: truncation 12 vs 16 under the certified tail
    {
        auto M = fixtures::factorial_curve(16);
        SolverConfig fcfg = cfg;
        fcfg.grid_nx = 48;
        ChainSolution s12 = assemble(M, 12, fcfg);
        ChainSolution s16 = assemble(M, 16, fcfg);
        double branch_err = 1e300;
        if (!s12.faces.empty()) {
            branch_err = 0.0;
            const auto& face =
                s12.arrangement.faces[static_cast<std::size_t>(s12.faces[0].face)];
            for (std::size_t pos = 0; pos < face.nodes.size(); ++pos) {
                Complex z = s12.arrangement.node_point(face.nodes[pos]);
                double fact = 1.0;
                for (int j = 2; j <= 12; ++j) {
                    fact *= j;
                    branch_err = std::max(
                        branch_err,
                        std::abs(s12.faces[0].values[static_cast<std::size_t>(j - 2)][pos][0] -
                                 std::pow(z, j) / fact));
                }
            }
        }
        double diff = 0.0;
        if (!s16.faces.empty()) {
            const auto& face =
                s16.arrangement.faces[static_cast<std::size_t>(s16.faces[0].face)];
            for (std::size_t pos = 0; pos < face.nodes.size(); ++pos) {
                double extra2 = 0.0;
                for (int j = 12; j < 16; ++j)
                    extra2 += std::norm(
                        s16.faces[0].values[static_cast<std::size_t>(j - 1)][pos][0]);
                diff = std::max(diff, std::sqrt(extra2));
            }
        }
        ok = ok && branch_err < 1e-6 && diff <= s12.tail_bound && s12.tail_bound > 0.0;
        char buf[128];
        std::snprintf(buf, sizeof(buf),
                      "; factorial branch err %.2e, |A16-A12| %.2e <= tail %.2e", branch_err,
                      diff, s12.tail_bound);
        parts += buf;
    }

    // (c) moment-condition negative control
    {
        bool rejected = false;
        std::string stage;
        try {
            auto M = fixtures::perturbed_curve(0.1);
            PlanarArrangement arr = build_arrangement(M, cfg);
            MomentEngine engine(M, cfg);
            solve_scalar(engine, arr, 1, cfg);
        } catch (const SolverError& e) {
            rejected = true;
            stage = e.stage;
        }
        ok = ok && rejected;
        parts += "; control rejected " + std::string(rejected ? "yes" : "NO") + " [" + stage + "]";
    }

    // (d) limacon: 3 faces with coherent sheet counts
    {
        auto M = fixtures::limacon_curve(3, 0.55);
        ChainSolution sol = assemble(M, 3, cfg);
        std::map<int, long long> by_winding;
        double coher = 0.0;
        for (const auto& f : sol.faces) {
            by_winding[sol.arrangement.faces[static_cast<std::size_t>(f.face)].winding] =
                f.sheets;
            coher = std::max(coher, f.coherence_residual);
        }
        bool faces_ok = sol.arrangement.faces.size() == 3 && by_winding[1] == 1 &&
                        by_winding[2] == 2 && coher < 1e-6;
        ok = ok && faces_ok;
        char buf[96];
        std::snprintf(buf, sizeof(buf), "; limacon faces 3 sheets (2,1,0) coherence %.2e",
                      coher);
        parts += buf;
    }
    detail = parts;
    return ok;
}

bool criterion_max_complexity(std::string& detail) {
    auto S3 = fixtures::s3_graph_boundary(1.0);
    auto repS3 = is_maximally_complex(S3, 18, -1.0, 14, 9);
    auto torus = fixtures::torus3(0.9);
    auto repT = is_maximally_complex(torus, 30, -1.0, 14, 9);
    bool ok = repS3.verdict && repS3.tested_profile.at({3, 0}) < 1e-6 &&
              repS3.tested_profile.at({0, 3}) < 1e-6 &&
              repS3.tested_profile.at({2, 1}) > 1e-3 && !repT.verdict &&
              repT.tested_profile.at({3, 0}) > 1e-3;
    char buf[192];
    std::snprintf(buf, sizeof(buf),
                  "S3: (3,0) %.2e, (0,3) %.2e, (2,1) %.2e; torus (3,0) %.2e verdict %s",
                  repS3.tested_profile.at({3, 0}), repS3.tested_profile.at({0, 3}),
                  repS3.tested_profile.at({2, 1}), repT.tested_profile.at({3, 0}),
                  repT.verdict ? "TRUE" : "false");
    detail = buf;
    return ok;
}

bool criterion_determinism(std::string& detail) {
    const char* text = R"({
        "seed": 77,
        "currents": {
            "g": {"fixture": "parabola-graph"},
            "m": {"fixture": "parabola-curve"}
        },
        "pipeline": [
            {"op": "mass", "current": "g"},
            {"op": "classify-bidimension", "current": "g", "p": 1, "q": 1, "count": 8},
            {"op": "slice", "current": "g", "indices": [1], "at": [0.25, 0.0]},
            {"op": "solve-boundary", "current": "m", "trunc": 2, "grid": 40,
             "samples": 512, "panels": 256, "verify_probes": 10},
            {"op": "king-reconstruct", "current": "g", "grid_radius": 0.1,
             "grid_center": [-0.5, 0.0], "max_degree": 6}
        ]
    })";
    auto s = parse_scenario(text);
    std::string b1 = run_scenario(s).dump();
    std::string b2 = run_scenario(s).dump();
    setenv("CURRENTS_THREADS", "1", 1);
    std::string b_single = run_scenario(s).dump();
    unsetenv("CURRENTS_THREADS");
    bool ok = b1 == b2 && b1 == b_single;
    detail = "rerun identical " + std::string(b1 == b2 ? "yes" : "NO") +
             ", CURRENTS_THREADS=1 identical " + std::string(b1 == b_single ? "yes" : "NO");
    return ok;
}

} // namespace

int main() {
    std::vector<Criterion> criteria{
        {"1. current calculus (multilinearity, locality, Stokes, pushforward)",
         criterion_calculus},
        {"2. mass and Wirtinger comparison", criterion_mass_wirtinger},
        {"3. slicing identity and sheet counts", criterion_slicing},
        {"4. delbar-slicing commutation", criterion_delbar_slicing},
        {"5. King reconstruction", criterion_king},
        {"6. boundary problem", criterion_boundary},
        {"7. maximal complexity", criterion_max_complexity},
        {"8. determinism", criterion_determinism},
    };
    int failures = 0;
    for (auto& c : criteria) {
        auto t0 = std::chrono::steady_clock::now();
        std::string detail;
        bool pass = false;
        try {
            pass = c.run(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        auto t1 = std::chrono::steady_clock::now();
        double secs = std::chrono::duration<double>(t1 - t0).count();
        std::printf("[%s] %s (%.1fs) %s\n", pass ? "PASS" : "FAIL", c.name.c_str(), secs,
                    detail.c_str());
        std::fflush(stdout);
        if (!pass) ++failures;
    }
    if (failures) std::printf("%d criterion(s) failed\n", failures);
    else std::printf("all criteria passed\n");
    return failures == 0 ? 0 : 1;
}
