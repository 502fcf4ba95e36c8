#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <mutex>
#include <vector>

namespace currents {

// Neumaier compensated accumulator; reduction order must be fixed by the
// caller for reproducible results.
template <class T>
struct Kahan;

template <>
struct Kahan<double> {
    double sum = 0.0, comp = 0.0;
    void add(double v) {
        double t = sum + v;
        if (std::abs(sum) >= std::abs(v)) comp += (sum - t) + v;
        else comp += (v - t) + sum;
        sum = t;
    }
    double value() const { return sum + comp; }
};

template <>
struct Kahan<std::complex<double>> {
    Kahan<double> re, im;
    void add(std::complex<double> v) {
        re.add(v.real());
        im.add(v.imag());
    }
    std::complex<double> value() const { return {re.value(), im.value()}; }
};

struct GaussRule {
    std::vector<double> nodes;   // on [0,1]
    std::vector<double> weights; // sum to 1
};

// Gauss-Legendre rule by Newton iteration on the Legendre recurrence,
// mapped to [0,1].
inline GaussRule make_gauss_rule(int n) {
    GaussRule r;
    r.nodes.resize(static_cast<std::size_t>(n));
    r.weights.resize(static_cast<std::size_t>(n));
    const double pi = 3.14159265358979323846;
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        double w = 2.0 / ((1.0 - x * x) * pp * pp);
        r.nodes[static_cast<std::size_t>(i)] = 0.5 * (1.0 - x);
        r.nodes[static_cast<std::size_t>(n - 1 - i)] = 0.5 * (1.0 + x);
        r.weights[static_cast<std::size_t>(i)] = 0.5 * w;
        r.weights[static_cast<std::size_t>(n - 1 - i)] = 0.5 * w;
    }
    return r;
}

inline const GaussRule& gauss_rule(int n) {
    static std::mutex mu;
    static std::map<int, GaussRule> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, make_gauss_rule(n)).first;
    return it->second;
}

// Tensor grid over [0,1]^k, lexicographic order (last axis fastest).
class TensorGrid {
public:
    TensorGrid(int dim, int order) : dim_(dim), rule_(&gauss_rule(order)) {
        count_ = 1;
        for (int i = 0; i < dim; ++i) count_ *= static_cast<std::size_t>(order);
    }

    std::size_t size() const { return count_; }
    int dim() const { return dim_; }

    // Fills point (size dim) and returns the weight product for flat index id.
    double point(std::size_t id, double* u) const {
        double w = 1.0;
        std::size_t n = rule_->nodes.size();
        for (int ax = dim_ - 1; ax >= 0; --ax) {
            std::size_t j = id % n;
            id /= n;
            u[ax] = rule_->nodes[j];
            w *= rule_->weights[j];
        }
        return w;
    }

private:
    int dim_;
    const GaussRule* rule_;
    std::size_t count_ = 1;
};

// Composite Gauss panels on [0,1]; used for contour integrals with nearby
// singularities where one spectral rule would stall.
struct CompositeRule {
    std::vector<double> nodes, weights;
};

inline CompositeRule composite_gauss(int panels, int order) {
    CompositeRule r;
    const GaussRule& g = gauss_rule(order);
    double h = 1.0 / panels;
    r.nodes.reserve(static_cast<std::size_t>(panels * order));
    r.weights.reserve(static_cast<std::size_t>(panels * order));
    for (int p = 0; p < panels; ++p) {
        for (int i = 0; i < order; ++i) {
            r.nodes.push_back((p + g.nodes[static_cast<std::size_t>(i)]) * h);
            r.weights.push_back(g.weights[static_cast<std::size_t>(i)] * h);
        }
    }
    return r;
}

} // namespace currents
