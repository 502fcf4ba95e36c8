#include <catch2/catch_amalgamated.hpp>

#include "currents/quadrature.hpp"

using namespace currents;
using Catch::Approx;

TEST_CASE("Gauss-Legendre integrates polynomials exactly") {
    const GaussRule& g = gauss_rule(8);
    // degree 15 monomial on [0,1]
    double acc = 0.0;
    for (std::size_t i = 0; i < g.nodes.size(); ++i)
        acc += g.weights[i] * std::pow(g.nodes[i], 15);
    CHECK(acc == Approx(1.0 / 16.0).epsilon(1e-13));
    double wsum = 0.0;
    for (double w : g.weights) wsum += w;
    CHECK(wsum == Approx(1.0).epsilon(1e-14));
}

TEST_CASE("tensor grid covers the square with product weights") {
    TensorGrid grid(2, 6);
    double acc = 0.0, u[2];
    for (std::size_t id = 0; id < grid.size(); ++id) {
        double w = grid.point(id, u);
        acc += w * (u[0] * u[0] + u[1]);
    }
    CHECK(acc == Approx(1.0 / 3.0 + 0.5).epsilon(1e-13));
}

TEST_CASE("order refinement stabilizes a smooth integral") {
    auto integrate = [](int order) {
        const GaussRule& g = gauss_rule(order);
        double acc = 0.0;
        for (std::size_t i = 0; i < g.nodes.size(); ++i)
            acc += g.weights[i] * std::exp(std::sin(6.0 * g.nodes[i]));
        return acc;
    };
    double e16 = std::abs(integrate(16) - integrate(64));
    double e32 = std::abs(integrate(32) - integrate(64));
    CHECK(e32 <= e16 + 1e-15);
}

TEST_CASE("compensated summation keeps cancellation error tiny") {
    Kahan<double> acc;
    for (int i = 0; i < 100000; ++i) {
        acc.add(1e16);
        acc.add(1.0);
        acc.add(-1e16);
    }
    CHECK(acc.value() == Approx(100000.0).epsilon(1e-12));
}

TEST_CASE("composite panels reproduce a near-singular contour factor") {
    // integral of 1/(x - z) over [0,1] with z just off the segment
    std::complex<double> z(0.5, 0.004);
    CompositeRule rule = composite_gauss(256, 8);
    std::complex<double> acc(0.0);
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        acc += rule.weights[i] / (rule.nodes[i] - z);
    std::complex<double> exact = std::log((1.0 - z) / (0.0 - z));
    // principal branch matches since the path stays on one side
    CHECK(std::abs(acc - exact) < 1e-10);
}
