#include "reslab/elliptic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace reslab {

namespace {

constexpr double kPi = std::numbers::pi;

void check_modulus(const EllipticModulus& m) {
    if (!(m.k >= 0.0 && m.k <= 1.0) || !(m.k_comp >= 0.0 && m.k_comp <= 1.0))
        throw DomainError("elliptic modulus outside [0,1]");
}

// sn, cn, dn for 0 <= u <= K/2 by descending Landen / AGM.
SnCnDn landen_core(double u, const EllipticModulus& m) {
    std::array<double, 40> a{}, c{};
    a[0] = 1.0;
    c[0] = m.k;
    double b = m.k_comp;
    int n = 0;
    while (std::abs(c[n]) > 1e-16 * a[n] && n < 38) {
        a[n + 1] = 0.5 * (a[n] + b);
        c[n + 1] = 0.5 * (a[n] - b);
        b = std::sqrt(a[n] * b);
        ++n;
    }
    double phi = std::ldexp(a[n] * u, n);
    for (int j = n; j > 0; --j) phi = 0.5 * (phi + std::asin(c[j] / a[j] * std::sin(phi)));
    const double sn = std::sin(phi);
    const double cn = std::cos(phi);
    const double dn = std::sqrt(m.k_comp * m.k_comp + m.k * m.k * cn * cn);
    return {sn, cn, dn};
}

}  // namespace

EllipticModulus EllipticModulus::from_k(double k) {
    if (!(k >= 0.0 && k <= 1.0)) throw DomainError("elliptic modulus outside [0,1]");
    return {k, std::sqrt((1.0 - k) * (1.0 + k))};
}

EllipticModulus EllipticModulus::from_k_comp(double kc) {
    if (!(kc >= 0.0 && kc <= 1.0)) throw DomainError("complementary modulus outside [0,1]");
    return {std::sqrt((1.0 - kc) * (1.0 + kc)), kc};
}

EllipticModulus EllipticModulus::from_squares(double k2, double kc2) {
    if (!(k2 >= 0.0 && kc2 >= 0.0) || std::abs(k2 + kc2 - 1.0) > 1e-13)
        throw DomainError("inconsistent modulus squares");
    return {std::sqrt(k2), std::sqrt(kc2)};
}

double complete_K(const EllipticModulus& m) {
    check_modulus(m);
    if (m.k_comp <= 0.0) throw DomainError("K(k) diverges at k = 1");
    double K, E;
    complete_KE(m.k, m.k_comp, K, E);
    return K;
}

double complete_E(const EllipticModulus& m) {
    check_modulus(m);
    if (m.k_comp <= 0.0) return 1.0;
    double K, E;
    complete_KE(m.k, m.k_comp, K, E);
    return E;
}

SnCnDn jacobi_sn_cn_dn(double u, const EllipticModulus& m) {
    check_modulus(m);
    if (!std::isfinite(u)) throw DomainError("jacobi_sn_cn_dn: non-finite argument");
    if (m.k == 0.0) return {std::sin(u), std::cos(u), 1.0};
    if (m.k_comp == 0.0) {
        const double s = 1.0 / std::cosh(u);
        return {std::tanh(u), s, s};
    }
    const double K = complete_K(m);
    double r = std::fmod(u, 4.0 * K);
    if (r > 2.0 * K) r -= 4.0 * K;
    if (r < -2.0 * K) r += 4.0 * K;
    const double sgn = r < 0.0 ? -1.0 : 1.0;
    r = std::abs(r);
    double cn_sign = 1.0;
    if (r > K) {
        r = 2.0 * K - r;
        cn_sign = -1.0;
    }
    SnCnDn out;
    if (r <= 0.5 * K) {
        out = landen_core(r, m);
    } else {
        const SnCnDn v = landen_core(K - r, m);
        out = {v.cn / v.dn, m.k_comp * v.sn / v.dn, m.k_comp / v.dn};
    }
    out.sn *= sgn;
    out.cn *= cn_sign;
    return out;
}

double carlson_rf(double x, double y, double z) {
    if (x < 0.0 || y < 0.0 || z < 0.0 || (x + y == 0.0) || (x + z == 0.0) || (y + z == 0.0))
        throw DomainError("carlson_rf: invalid arguments");
    constexpr double errtol = 0.0025;
    double xt = x, yt = y, zt = z, ave, dx, dy, dz;
    for (;;) {
        const double sx = std::sqrt(xt), sy = std::sqrt(yt), sz = std::sqrt(zt);
        const double lam = sx * (sy + sz) + sy * sz;
        xt = 0.25 * (xt + lam);
        yt = 0.25 * (yt + lam);
        zt = 0.25 * (zt + lam);
        ave = (xt + yt + zt) / 3.0;
        dx = (ave - xt) / ave;
        dy = (ave - yt) / ave;
        dz = (ave - zt) / ave;
        if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) <= errtol) break;
    }
    const double e2 = dx * dy - dz * dz;
    const double e3 = dx * dy * dz;
    return (1.0 + (e2 / 24.0 - 0.1 - 3.0 * e3 / 44.0) * e2 + e3 / 14.0) / std::sqrt(ave);
}

double incomplete_F(double phi, const EllipticModulus& m) {
    check_modulus(m);
    if (!std::isfinite(phi)) throw DomainError("incomplete_F: non-finite amplitude");
    const double j = std::nearbyint(phi / kPi);
    const double r = phi - j * kPi;
    double base = 0.0;
    if (j != 0.0) base = 2.0 * j * complete_K(m);
    const double s = std::sin(r), c = std::cos(r);
    if (s == 0.0) return base;
    const double F = s * carlson_rf(c * c, m.k_comp * m.k_comp + m.k * m.k * c * c, 1.0);
    return base + F;
}

}  // namespace reslab
