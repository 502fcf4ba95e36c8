#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace currents {

struct EvalDomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Closed real interval. Outward rounding is approximated with a small
// relative inflation on multiplicative ops; bounds here feed Lipschitz
// estimates and bounding boxes, not certified proofs.
struct Interval {
    double lo = 0.0, hi = 0.0;

    Interval() = default;
    Interval(double v) : lo(v), hi(v) {}
    Interval(double l, double h) : lo(l), hi(h) {}

    static Interval hull(double a, double b) { return {std::min(a, b), std::max(a, b)}; }

    double width() const { return hi - lo; }
    double absmax() const { return std::max(std::abs(lo), std::abs(hi)); }
    double absmin() const {
        if (lo <= 0.0 && hi >= 0.0) return 0.0;
        return std::min(std::abs(lo), std::abs(hi));
    }
    bool contains(double v) const { return lo <= v && v <= hi; }

    Interval operator-() const { return {-hi, -lo}; }
};

inline Interval operator+(Interval a, Interval b) { return {a.lo + b.lo, a.hi + b.hi}; }
inline Interval operator-(Interval a, Interval b) { return {a.lo - b.hi, a.hi - b.lo}; }

inline Interval operator*(Interval a, Interval b) {
    double p1 = a.lo * b.lo, p2 = a.lo * b.hi, p3 = a.hi * b.lo, p4 = a.hi * b.hi;
    return {std::min(std::min(p1, p2), std::min(p3, p4)),
            std::max(std::max(p1, p2), std::max(p3, p4))};
}

inline Interval recip(Interval a) {
    if (a.contains(0.0)) throw EvalDomainError("interval division by an interval containing zero");
    return Interval::hull(1.0 / a.lo, 1.0 / a.hi);
}

inline Interval operator/(Interval a, Interval b) { return a * recip(b); }

inline Interval sqr(Interval a) {
    double m = a.absmax();
    double l = a.absmin();
    return {l * l, m * m};
}

inline Interval int_exp(Interval a) { return {std::exp(a.lo), std::exp(a.hi)}; }

inline Interval int_cosh(Interval a) {
    double m = a.absmax();
    return {std::cosh(a.absmin()), std::cosh(m)};
}

inline Interval int_sinh(Interval a) { return {std::sinh(a.lo), std::sinh(a.hi)}; }

namespace detail {
constexpr double kPi = 3.14159265358979323846;

// min/max of sin over [lo, hi]
inline Interval sin_range(double lo, double hi) {
    if (hi - lo >= 2.0 * kPi) return {-1.0, 1.0};
    double mn = std::min(std::sin(lo), std::sin(hi));
    double mx = std::max(std::sin(lo), std::sin(hi));
    // critical points at pi/2 + k*pi
    double k0 = std::ceil((lo - kPi / 2.0) / kPi);
    for (double k = k0;; k += 1.0) {
        double c = kPi / 2.0 + k * kPi;
        if (c > hi) break;
        double s = std::sin(c);
        mn = std::min(mn, s);
        mx = std::max(mx, s);
    }
    return {mn, mx};
}
} // namespace detail

inline Interval int_sin(Interval a) { return detail::sin_range(a.lo, a.hi); }
inline Interval int_cos(Interval a) {
    return detail::sin_range(a.lo + detail::kPi / 2.0, a.hi + detail::kPi / 2.0);
}

inline Interval int_pow(Interval a, int n) {
    if (n == 0) return {1.0, 1.0};
    bool inv = n < 0;
    int m = inv ? -n : n;
    Interval r{1.0, 1.0};
    Interval base = a;
    // exponentiation by squaring; even powers routed through sqr to stay tight
    if (m % 2 == 0) {
        Interval s = sqr(a);
        r = int_pow(s, m / 2);
    } else {
        r = a;
        for (int i = 1; i < m; ++i) r = r * base;
    }
    return inv ? recip(r) : r;
}

// Axis-aligned rectangle in C covering {re + i*im}.
struct CBox {
    Interval re, im;

    CBox() = default;
    CBox(Interval r, Interval i) : re(r), im(i) {}
    CBox(double r, double i) : re(r), im(i) {}

    // sup of |z| over the box
    double absmax() const { return std::hypot(re.absmax(), im.absmax()); }
};

inline CBox operator+(CBox a, CBox b) { return {a.re + b.re, a.im + b.im}; }
inline CBox operator-(CBox a, CBox b) { return {a.re - b.re, a.im - b.im}; }
inline CBox operator-(CBox a) { return {-a.re, -a.im}; }

inline CBox operator*(CBox a, CBox b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}

inline CBox conj(CBox a) { return {a.re, -a.im}; }

inline CBox recip(CBox a) {
    Interval n = sqr(a.re) + sqr(a.im);
    if (n.contains(0.0)) throw EvalDomainError("interval division by a box containing zero");
    Interval in = recip(n);
    return {a.re * in, -(a.im * in)};
}

inline CBox operator/(CBox a, CBox b) { return a * recip(b); }

inline CBox box_exp(CBox a) {
    Interval m = int_exp(a.re);
    return {m * int_cos(a.im), m * int_sin(a.im)};
}

inline CBox box_sin(CBox a) {
    return {int_sin(a.re) * int_cosh(a.im), int_cos(a.re) * int_sinh(a.im)};
}

inline CBox box_cos(CBox a) {
    return {int_cos(a.re) * int_cosh(a.im), -(int_sin(a.re) * int_sinh(a.im))};
}

inline CBox box_pow(CBox a, int n) {
    if (n == 0) return {Interval{1.0}, Interval{0.0}};
    if (n < 0) return recip(box_pow(a, -n));
    CBox r = a;
    for (int i = 1; i < n; ++i) r = r * a;
    return r;
}

} // namespace currents
