#pragma once

#include <cmath>
#include <numbers>

#include "reslab/errors.hpp"
#include "reslab/jet.hpp"

namespace reslab {

// Modulus k together with its complement k' = sqrt(1-k^2), both stored so
// that quantities near k=1 (where k' carries all the information) stay accurate.
struct EllipticModulus {
    double k = 0.0;
    double k_comp = 1.0;

    static EllipticModulus from_k(double k);
    static EllipticModulus from_k_comp(double k_comp);
    // k^2 and k'^2 given separately; used when both come from a closed form.
    static EllipticModulus from_squares(double k2, double kc2);

    EllipticModulus complement() const { return {k_comp, k}; }
};

struct SnCnDn {
    double sn;
    double cn;
    double dn;
};

double complete_K(const EllipticModulus& m);
double complete_E(const EllipticModulus& m);
SnCnDn jacobi_sn_cn_dn(double u, const EllipticModulus& m);

// Incomplete integral of the first kind F(phi|k) for any real phi
// (quasi-periodic extension F(phi + j*pi) = F(phi) + 2jK).
double incomplete_F(double phi, const EllipticModulus& m);

double carlson_rf(double x, double y, double z);

template <class T>
T agm(T a, T b) {
    using std::abs;
    using std::sqrt;
    for (int it = 0; it < 64; ++it) {
        if (abs(value_of(a) - value_of(b)) <= 1e-16 * value_of(a)) {
            for (int extra = 0; extra < 2; ++extra) {
                T an = (a + b) * 0.5;
                b = sqrt(a * b);
                a = an;
            }
            return a;
        }
        T an = (a + b) * 0.5;
        b = sqrt(a * b);
        a = an;
    }
    throw NumericalError("agm: no convergence");
}

// K and E as functions of (k, k') via the arithmetic-geometric mean.
// T is double or Jet; with Jet the derivatives follow the iteration.
template <class T>
void complete_KE(const T& k, const T& kc, T& K, T& E) {
    using std::abs;
    using std::sqrt;
    const double pi = std::numbers::pi;
    T a = T(1.0);
    T b = kc;
    T c = k;
    T sum = c * c * 0.5;
    double w = 0.5;
    int extra = 2;
    for (int it = 0; it < 64; ++it) {
        T an = (a + b) * 0.5;
        T cn = c * c / (4.0 * an);
        b = sqrt(a * b);
        a = an;
        c = cn;
        w *= 2.0;
        sum += c * c * w;
        if (abs(value_of(c)) <= 1e-17 * value_of(a)) {
            if (--extra < 0) break;
        }
    }
    K = pi / (2.0 * a);
    E = K * (1.0 - sum);
}

}  // namespace reslab
