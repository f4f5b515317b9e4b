#pragma once

#include <cmath>

namespace reslab {

// Truncated second-order Taylor jet: value, first and second derivative
// with respect to a single scalar parameter.
struct Jet {
    double v = 0.0;
    double d = 0.0;
    double dd = 0.0;

    constexpr Jet() = default;
    constexpr Jet(double value) : v(value) {}
    constexpr Jet(double value, double d1, double d2) : v(value), d(d1), dd(d2) {}

    static constexpr Jet variable(double x) { return Jet(x, 1.0, 0.0); }

    Jet& operator+=(const Jet& o) { v += o.v; d += o.d; dd += o.dd; return *this; }
    Jet& operator-=(const Jet& o) { v -= o.v; d -= o.d; dd -= o.dd; return *this; }
};

inline Jet operator-(const Jet& a) { return {-a.v, -a.d, -a.dd}; }
inline Jet operator+(const Jet& a, const Jet& b) { return {a.v + b.v, a.d + b.d, a.dd + b.dd}; }
inline Jet operator-(const Jet& a, const Jet& b) { return {a.v - b.v, a.d - b.d, a.dd - b.dd}; }
inline Jet operator*(const Jet& a, const Jet& b) {
    return {a.v * b.v, a.d * b.v + a.v * b.d, a.dd * b.v + 2.0 * a.d * b.d + a.v * b.dd};
}
inline Jet operator/(const Jet& a, const Jet& b) {
    const double q = a.v / b.v;
    const double qd = (a.d - q * b.d) / b.v;
    const double qdd = (a.dd - 2.0 * qd * b.d - q * b.dd) / b.v;
    return {q, qd, qdd};
}
inline Jet operator+(const Jet& a, double b) { return {a.v + b, a.d, a.dd}; }
inline Jet operator+(double a, const Jet& b) { return b + a; }
inline Jet operator-(const Jet& a, double b) { return {a.v - b, a.d, a.dd}; }
inline Jet operator-(double a, const Jet& b) { return {a - b.v, -b.d, -b.dd}; }
inline Jet operator*(const Jet& a, double b) { return {a.v * b, a.d * b, a.dd * b}; }
inline Jet operator*(double a, const Jet& b) { return b * a; }
inline Jet operator/(const Jet& a, double b) { return {a.v / b, a.d / b, a.dd / b}; }
inline Jet operator/(double a, const Jet& b) { return Jet(a) / b; }

// f(g) with f, f', f'' supplied at g.v
inline Jet compose(const Jet& g, double f0, double f1, double f2) {
    return {f0, f1 * g.d, f2 * g.d * g.d + f1 * g.dd};
}

inline Jet sqrt(const Jet& a) {
    const double s = std::sqrt(a.v);
    return compose(a, s, 0.5 / s, -0.25 / (s * a.v));
}
inline Jet exp(const Jet& a) {
    const double e = std::exp(a.v);
    return compose(a, e, e, e);
}
inline Jet log(const Jet& a) { return compose(a, std::log(a.v), 1.0 / a.v, -1.0 / (a.v * a.v)); }
inline Jet sinh(const Jet& a) {
    const double s = std::sinh(a.v), c = std::cosh(a.v);
    return compose(a, s, c, s);
}
inline Jet cosh(const Jet& a) {
    const double s = std::sinh(a.v), c = std::cosh(a.v);
    return compose(a, c, s, c);
}
inline Jet pow(const Jet& a, double p) {
    const double f = std::pow(a.v, p);
    return compose(a, f, p * f / a.v, p * (p - 1.0) * f / (a.v * a.v));
}

inline double value_of(double x) { return x; }
inline double value_of(const Jet& x) { return x.v; }

}  // namespace reslab
