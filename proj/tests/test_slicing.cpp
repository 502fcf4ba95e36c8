#include <catch2/catch_amalgamated.hpp>

#include "currents/slicing.hpp"
#include "currents/fixtures.hpp"

using namespace currents;
using Catch::Approx;

namespace {
const double kPi = 3.14159265358979323846;
}

TEST_CASE("graph fiber: single atom with unit multiplicity") {
    auto T = fixtures::parabola_graph();
    std::vector<Complex> x{Complex(0.25, 0.0)};
    Slice s = slice_points(T, CoordinateProjection({0}), x);
    REQUIRE(s.atoms.size() == 1);
    CHECK(s.regular);
    CHECK(std::abs(s.atoms[0].point[0] - Complex(0.25)) < 1e-9);
    CHECK(std::abs(s.atoms[0].point[1] - Complex(0.0625)) < 1e-9);
    CHECK(s.atoms[0].multiplicity == 1);
}

TEST_CASE("two-branch fiber of w^2 = z") {
    auto T = fixtures::branch_pair();
    std::vector<Complex> x{Complex(0.25, 0.0)};
    Slice s = slice_points(T, CoordinateProjection({0}), x);
    REQUIRE(s.atoms.size() == 2);
    CHECK(s.total_multiplicity() == 2);
    std::vector<double> ws{s.atoms[0].point[1].real(), s.atoms[1].point[1].real()};
    std::sort(ws.begin(), ws.end());
    CHECK(ws[0] == Approx(-0.5).margin(1e-9));
    CHECK(ws[1] == Approx(0.5).margin(1e-9));
}

TEST_CASE("base points off the shadow give empty slices") {
    auto T = fixtures::parabola_graph();
    std::vector<Complex> x{Complex(2.5, 0.0)};
    Slice s = slice_points(T, CoordinateProjection({0}), x);
    CHECK(s.atoms.empty());
}

TEST_CASE("sheet totals are constant along regular paths") {
    auto pair = fixtures::branch_pair();
    auto graph = fixtures::parabola_graph();
    for (int i = 0; i < 20; ++i) {
        double t = static_cast<double>(i) / 19.0;
        // a path inside the annulus image and inside the disk respectively
        std::vector<Complex> xa{Complex(0.3 + 0.4 * t, 0.15)};
        CHECK(slice_points(pair, CoordinateProjection({0}), xa).total_multiplicity() == 2);
        std::vector<Complex> xg{Complex(-0.4 + 0.8 * t, 0.2)};
        CHECK(slice_points(graph, CoordinateProjection({0}), xg).total_multiplicity() == 1);
    }
}

TEST_CASE("critical base points are flagged and perturbation recovers") {
    auto T = fixtures::parabola_graph();
    // fibers of the w-coordinate: w = z^2 branches collide at w = 0
    std::vector<Complex> x{Complex(0.0, 0.0)};
    Slice s0 = slice_points(T, CoordinateProjection({1}), x);
    CHECK_FALSE(s0.regular);
    Slice s1 = slice_points_robust(T, CoordinateProjection({1}), x, 7, {}, 5, 1e-3);
    CHECK(s1.regular);
    CHECK(s1.total_multiplicity() == 2); // two z-preimages of a generic w
}

TEST_CASE("multiplicity weights scale atom multiplicities") {
    auto one = fixtures::parabola_graph();
    RectifiableCurrent two(one.ambient, 2, {Cell(2, one.cells[0].param, 2)});
    std::vector<Complex> x{Complex(-0.3, 0.1)};
    Slice s = slice_points(two, CoordinateProjection({0}), x);
    REQUIRE(s.atoms.size() == 1);
    CHECK(s.atoms[0].multiplicity == 2);
}

TEST_CASE("mollified slices converge to the fiber values") {
    auto T = fixtures::parabola_graph();
    // f smooth on the ambient; exact value at the single atom (x, x^2)
    ProductBump f;
    f.center = {Complex(0.25, 0.0), Complex(0.0625, 0.0)};
    f.radius = {2.0, 2.0};
    std::vector<double> base{0.25, 0.0};
    std::vector<Complex> base_c{Complex(0.25, 0.0)};
    Slice atoms = slice_points(T, CoordinateProjection({0}), base_c);
    std::vector<double> pt(4);
    pt[0] = atoms.atoms[0].point[0].real();
    pt[1] = atoms.atoms[0].point[0].imag();
    pt[2] = atoms.atoms[0].point[1].real();
    pt[3] = atoms.atoms[0].point[1].imag();
    double exact = f.value(pt);
    MetricForm tail(2, f.as_scalar(), {});
    double prev_err = 1e300;
    for (double eps : {0.1, 0.05, 0.025}) {
        // the quadrature must resolve the mollifier band
        int order = static_cast<int>(16.0 / eps);
        MollifiedSlice ms = mollified_slice(T, {0, 1}, base, eps);
        double err = std::abs(ms.evaluate_against(tail, order) - Complex(exact));
        CHECK(err < prev_err + 1e-12);
        prev_err = err;
    }
    CHECK(prev_err < 2e-3);
}

TEST_CASE("mollified slice of zero data and far base points vanish") {
    auto T = fixtures::parabola_graph();
    MetricForm zero_tail(2, FormScalar::constant(2, Complex(0.0)), {});
    MollifiedSlice ms = mollified_slice(T, {0, 1}, {0.25, 0.0}, 0.05);
    CHECK(std::abs(ms.evaluate_against(zero_tail, 32)) == 0.0);
    MetricForm one_tail(2, FormScalar::one(2), {});
    MollifiedSlice far = mollified_slice(T, {0, 1}, {5.0, 0.0}, 0.05);
    CHECK(std::abs(far.evaluate_against(one_tail, 32)) == 0.0);
}

TEST_CASE("slice integral identity for the disk against Re z") {
    auto disk = fixtures::disk();
    MetricForm tail(1, FormScalar::one(1), {im_coordinate_entry(1, 0)});
    std::vector<double> lo{-1.2}, hi{1.2};
    auto r256 = slice_integral_check(disk, {0}, tail, lo, hi, 256, 0.05, 96);
    CHECK(std::abs(r256.contracted - Complex(kPi)) < 1e-9);
    CHECK(r256.residual < 1e-4 * kPi);
    auto r512 = slice_integral_check(disk, {0}, tail, lo, hi, 512, 0.05, 96);
    CHECK(r512.residual <= 0.5 * r256.residual + 1e-12);
}

TEST_CASE("slice integral identity for the branch pair along Re z") {
    auto T = fixtures::branch_pair();
    // radially symmetric shell of |z| supported inside the annulus image
    auto shell = [](std::span<const double> x) {
        double q = x[0] * x[0] + x[1] * x[1];
        double s = (q - 0.5) / 0.15;
        return Complex(std::exp(-s * s));
    };
    MetricForm tail;
    tail.N = 2;
    tail.f = FormScalar::from_fn(shell);
    tail.entries.push_back(im_coordinate_entry(2, 0));
    std::vector<double> lo{-1.1}, hi{1.1};
    auto r256 = slice_integral_check(T, {0}, tail, lo, hi, 256, 0.06, 128);
    CHECK(std::abs(r256.contracted) > 0.5);
    CHECK(r256.residual < 1e-4 * std::abs(r256.contracted));
    auto r512 = slice_integral_check(T, {0}, tail, lo, hi, 512, 0.06, 128);
    CHECK(r512.residual <= 0.5 * r256.residual + 1e-12);
}

TEST_CASE("slice integral identity through atoms for the full complex projection") {
    auto T = fixtures::branch_pair();
    auto shell = [](std::span<const double> x) {
        double q = x[0] * x[0] + x[1] * x[1];
        if (q <= 0.0625 || q >= 1.0) return Complex(0.0);
        double u = (q - 0.0625) * (1.0 - q);
        double u2 = u * u;
        return Complex(40.0 * u2 * u2);
    };
    MetricForm tail(2, FormScalar::from_fn(shell), {});
    std::vector<double> lo{-1.05, -1.05}, hi{1.05, 1.05};
    SliceOptions opt;
    opt.starts_per_axis = 8;
    auto r32 = slice_integral_check_atoms(T, CoordinateProjection({0}), tail, lo, hi, 32, 64, opt);
    CHECK(std::abs(r32.contracted) > 0.05);
    CHECK(r32.residual < 1e-3 * std::abs(r32.contracted));
    auto r64 = slice_integral_check_atoms(T, CoordinateProjection({0}), tail, lo, hi, 64, 64, opt);
    CHECK(r64.residual <= 0.5 * r32.residual + 1e-12);
}

TEST_CASE("boundary and slicing anticommute for one real slicing coordinate") {
    // solid prism: disk x [0,1] interval in C^2, sliced by Re z_2
    Expr z1 = Expr::param(0) * exp(Expr::literal(Complex(0.0, fixtures::kTau)) * Expr::param(1));
    ExpressionMap prism(3, {z1, Expr::param(2)});
    RectifiableCurrent T(AmbientSpace(2), 3, {Cell(3, prism)});
    auto dT = boundary(T);
    double x = 0.5;
    double eps = 0.08;
    Rng rng(3);
    for (int probe = 0; probe < 3; ++probe) {
        std::vector<Complex> a(2);
        for (auto& c : a) c = rng.complex_in_box(-1.0, 1.0);
        std::vector<Complex> zero(2, Complex(0.0));
        FormEntry eta = affine_entry(2, a, zero);
        ProductBump f;
        f.center = {Complex(0.0, 0.0), Complex(0.5, 0.0)};
        f.radius = {0.8, -1.0};
        // d<T,pi,x>(f, eta) = <T,pi,x>(1, f, eta)
        MollifiedSlice sliceT = mollified_slice(T, {2}, {x}, eps);
        MetricForm lifted(2, FormScalar::one(2), {f.as_entry(), eta});
        Complex lhs = sliceT.evaluate_against(lifted, 48);
        // (-1)^m <dT,pi,x>(f, eta), m = 1
        MollifiedSlice slice_dT = mollified_slice(dT, {2}, {x}, eps);
        MetricForm plain(2, f.as_scalar(), {eta});
        Complex rhs = -slice_dT.evaluate_against(plain, 48);
        CHECK(std::abs(lhs - rhs) < 2e-4 * (1.0 + std::abs(lhs)));
    }
}

TEST_CASE("delbar commutes with slicing through a holomorphic coordinate") {
    auto T = fixtures::bidisk_graph(1.0);
    std::vector<CommutationProbe> probes;
    Rng rng(71);
    for (int i = 0; i < 10; ++i) {
        CommutationProbe p;
        p.f.center = {Complex(0.0), Complex(0.0), Complex(0.0), Complex(0.0)};
        p.f.radius = {0.8, 0.8, -1.0, -1.0}; // compact support inside the bidisk
        std::vector<Complex> a(4);
        for (auto& c : a) c = rng.complex_in_box(-1.0, 1.0);
        std::vector<Complex> zero(4, Complex(0.0));
        p.eta = affine_entry(4, a, zero);
        probes.push_back(std::move(p));
    }
    auto res = delbar_slice_commutation_check(T, 2, 2, 1, Complex(0.0), probes, 0.1, 20);
    CHECK(res.max_residual < 1e-8);
    CHECK_THROWS_AS(delbar_slice_commutation_check(T, 2, 2, 1, Complex(0.0), probes, 0.1, 20,
                                                   /*conjugated_projection=*/true),
                    std::invalid_argument);
}
