#include <catch2/catch_amalgamated.hpp>

#include "currents/complex_ops.hpp"
#include "currents/hilbert.hpp"

using namespace currents;
using Catch::Approx;

namespace {
const double kPi = 3.14159265358979323846;
}

TEST_CASE("full-range projection is the identity on evaluations") {
    auto T = fixtures::circle_graph_half_square(); // (zeta, zeta^2/2) in C^2
    auto P = project_current(CoordinateProjection::prefix(2), T);
    Rng rng(3);
    for (int i = 0; i < 5; ++i) {
        auto probes = full_coordinate_probes(2, 1, 1, rng.next_u64());
        CHECK(std::abs(evaluate(P, probes[0], 16) - evaluate(T, probes[0], 16)) < 1e-12);
    }
}

TEST_CASE("projection of the circle graph to the first coordinate has mass 2 pi") {
    auto T = fixtures::circle_graph_half_square();
    auto P = project_current(CoordinateProjection::prefix(1), T);
    CHECK(mass(P, 24).total == Approx(2.0 * kPi).margin(1e-9));
    CHECK(P.tail_budget > 0.0); // discarded second coordinate enters the budget
}

TEST_CASE("projections never increase mass") {
    std::vector<RectifiableCurrent> fixtures_list{
        fixtures::parabola_graph(0.8), fixtures::zpowers_graph(3, 0.8),
        fixtures::factorial_graph(6, 1.0), fixtures::branch_pair(),
        fixtures::circle_graph_half_square()};
    Rng rng(17);
    int checked = 0;
    for (const auto& T : fixtures_list) {
        double full = mass(T, 16).total;
        for (int trial = 0; trial < 4; ++trial) {
            std::vector<int> idx;
            for (int j = 0; j < T.ambient.N; ++j)
                if (rng.uniform01() < 0.6 || j == 0) idx.push_back(j);
            auto P = project_current(CoordinateProjection(idx), T);
            CHECK(mass(P, 16).total <= full + 1e-9);
            ++checked;
        }
    }
    CHECK(checked == 20);
}

TEST_CASE("prefix projections compose to the shorter prefix") {
    const int N = 5;
    auto p2 = CoordinateProjection::prefix(2).truncation_map(N);
    auto p4 = CoordinateProjection::prefix(4).truncation_map(N);
    auto both = compose(p2, p4); // p2 o p4 = p2
    Rng rng(23);
    TapeWorkspace ws;
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> x(static_cast<std::size_t>(2 * N));
        for (auto& v : x) v = rng.uniform(-2.0, 2.0);
        std::vector<Complex> a(static_cast<std::size_t>(N)), b(static_cast<std::size_t>(N));
        both.eval(x, a, ws);
        p2.eval(x, b, ws);
        for (int j = 0; j < N; ++j)
            CHECK(std::abs(a[static_cast<std::size_t>(j)] - b[static_cast<std::size_t>(j)]) == 0.0);
    }
}

TEST_CASE("PAS convergence table for the factorial graph") {
    const int N = 16;
    auto T = fixtures::factorial_graph(N, 1.0);
    auto probes = full_coordinate_probes(N, T.dim, 3, 777);
    std::vector<int> prefixes{2, 4, 6, 12};
    PasReport rep = pas_convergence_report(T, prefixes, probes, 12);
    REQUIRE(rep.entries.size() == prefixes.size());
    // monotone decay: doubling the prefix never increases an entry
    for (std::size_t p = 0; p + 1 < prefixes.size(); ++p)
        for (std::size_t q = 0; q < rep.entries[p].size(); ++q)
            CHECK(rep.entries[p + 1][q] <= rep.entries[p][q] + 1e-12);
    // below 1e-8 at prefix 12, dominated by the directly summed tail
    double tail12 = 0.0;
    double fact = 479001600.0; // 12!
    for (int n = 13; n < 40; ++n) {
        fact *= n;
        tail12 += (n / fact) * (n / fact);
    }
    for (double v : rep.entries.back()) {
        CHECK(v < 1e-8);
        CHECK(v <= 50.0 * std::sqrt(tail12));
    }
}

TEST_CASE("currents supported in a prefix have an exactly zero table") {
    auto T = fixtures::parabola_graph(0.7); // lives in C^2
    // embed into C^4 by a holomorphic inclusion
    std::vector<Expr> inc{zvar(0), zvar(1), Expr::literal(Complex(0.0)),
                          Expr::literal(Complex(0.0))};
    auto T4 = pushforward(ExpressionMap(4, std::move(inc), true), T);
    auto probes = full_coordinate_probes(4, 2, 2, 5);
    PasReport rep = pas_convergence_report(T4, {2, 3}, probes, 10);
    for (const auto& row : rep.entries)
        for (double v : row) CHECK(v < 1e-13);
}

TEST_CASE("zw^n fixture values and non-proper fiber") {
    auto g = fixtures::map_zw_powers(6);
    TapeWorkspace ws;
    std::vector<Complex> out(6);
    double x0[4] = {0.0, 0.0, 0.7, -0.2}; // z = 0
    g.eval(std::span<const double>(x0, 4), out, ws);
    for (const auto& v : out) CHECK(std::abs(v) == 0.0);
    double xh[4] = {0.5, 0.0, 0.5, 0.0};
    g.eval(std::span<const double>(xh, 4), out, ws);
    for (int j = 1; j <= 6; ++j)
        CHECK(std::abs(out[static_cast<std::size_t>(j - 1)] - std::pow(2.0, -(j + 1))) < 1e-15);
}

TEST_CASE("z-powers fixture: bounded image, injectivity witness, properness") {
    auto f = fixtures::map_z_powers(24);
    TapeWorkspace ws;
    std::vector<Complex> out(24);
    auto norm_at = [&](double r) {
        double x[2] = {r, 0.0};
        f.eval(std::span<const double>(x, 2), out, ws);
        double s = 0.0, mx = 0.0;
        for (const auto& v : out) {
            s += std::norm(v);
            mx = std::max(mx, std::abs(v));
        }
        CHECK(std::abs(out[0] - Complex(r)) < 1e-15); // first coordinate recovers z
        CHECK(mx <= r + 1e-15);
        return std::sqrt(s);
    };
    double n1 = norm_at(0.9), n2 = norm_at(0.99), n3 = norm_at(0.999);
    CHECK(n1 < n2);
    CHECK(n2 < n3); // no convergence toward the boundary: properness witness
}

TEST_CASE("multi-power fixture counts and certificate") {
    auto idx = fixtures::multi_indices(2, 3);
    int deg3 = 0;
    for (const auto& I : idx)
        if (I[0] + I[1] == 3) ++deg3;
    CHECK(deg3 == 4); // (m + k - 1 choose k - 1) at m = 3, k = 2

    auto F = fixtures::map_multi_powers(2, 3);
    TapeWorkspace ws;
    std::vector<Complex> out(idx.size());
    double zero[4] = {0.0, 0.0, 0.0, 0.0};
    F.eval(std::span<const double>(zero, 4), out, ws);
    for (const auto& v : out) CHECK(std::abs(v) == 0.0);

    auto cert = fixtures::multi_powers_certificate(2, 2.0, 0.5, 40);
    CHECK(cert.converged);
    CHECK(cert.direct_partial <= cert.dominating_partial + cert.dominating_tail);
    CHECK(cert.dominating_tail < 1e-10);
}

TEST_CASE("weak-star distance is a convergent pseudometric on the truncation") {
    std::vector<double> x{1.0, 0.0, 2.0, 0.0}, y{0.0, 0.0, 2.0, 0.0};
    CHECK(weak_star_distance(x, y) == Approx(0.5));
    CHECK(weak_star_distance(x, x) == 0.0);
    std::vector<double> z{0.0, 1.0, 2.0, 0.0};
    CHECK(weak_star_distance(x, z) <=
          weak_star_distance(x, y) + weak_star_distance(y, z) + 1e-15);
}

TEST_CASE("prefix projection masses increase to the full mass") {
    auto T = fixtures::factorial_graph(8, 1.0);
    double full = mass(T, 16).total;
    double prev = 0.0;
    for (int t : {1, 2, 4, 8}) {
        double m = mass(project_current(CoordinateProjection::prefix(t), T), 16).total;
        CHECK(m >= prev - 1e-12);
        CHECK(m <= full + 1e-9);
        prev = m;
    }
    CHECK(std::abs(prev - full) < 1e-9);
}
