#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace currents {

// Seeded generator with explicitly coded distributions, so that streams are
// identical across platforms and standard-library versions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    double uniform01() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    std::complex<double> complex_in_disk(double radius) {
        // rejection-free: sqrt for area uniformity
        double r = radius * std::sqrt(uniform01());
        double a = 2.0 * 3.14159265358979323846 * uniform01();
        return {r * std::cos(a), r * std::sin(a)};
    }

    std::complex<double> complex_in_box(double lo, double hi) {
        return {uniform(lo, hi), uniform(lo, hi)};
    }

    double gaussian() {
        // Box-Muller, deterministic pairing
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform01(), u2 = uniform01();
        if (u1 < 1e-300) u1 = 1e-300;
        double m = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * 3.14159265358979323846 * u2;
        spare_ = m * std::sin(a);
        have_spare_ = true;
        return m * std::cos(a);
    }

    std::complex<double> complex_gaussian() {
        double re = gaussian();
        double im = gaussian();
        return {re, im};
    }

    int uniform_int(int lo, int hi) { // inclusive
        return lo + static_cast<int>(uniform01() * (hi - lo + 1 - 1e-12));
    }

private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace currents
