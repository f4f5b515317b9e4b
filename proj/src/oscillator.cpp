#include "reslab/oscillator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace reslab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSqrt2 = std::numbers::sqrt2;

// 2(m-1)K + (2-m)E by its Maclaurin series in m; the closed form cancels for small m.
template <class T>
T inside_bracket_series(const T& m) {
    T sum = T(0.0);
    T mp = m;
    double a_prev = 1.0, b_prev = 1.0;  // a_0, b_0
    for (int n = 1; n < 200; ++n) {
        const double r = (n - 0.5) / n;
        const double a = a_prev * r * r;
        const double b = a / (1.0 - 2.0 * n);
        const double c = 2.0 * a_prev - 2.0 * a + 2.0 * b - b_prev;
        const T term = mp * c;
        sum += term;
        if (n > 3 && std::abs(value_of(term)) < 1e-18 * std::abs(value_of(sum))) break;
        mp = mp * m;
        a_prev = a;
        b_prev = b;
    }
    return sum * (kPi / 2.0);
}

}  // namespace

void PhysicalParams::validate() const {
    if (!(mu > 0.0) || !(gamma >= 0.0)) throw DomainError("mu must be positive and gamma non-negative");
    if (!(delta >= 0.0)) throw DomainError("delta must be non-negative");
    if (!(nu > 0.0)) throw DomainError("nu must be positive");
    if (!(sigma >= 0.0)) throw DomainError("sigma must be non-negative");
    if (!(eps > 0.0 && eps < 1.0)) throw DomainError("eps must lie in (0,1)");
    if (!(kappa >= 1.0)) throw DomainError("kappa must be >= 1");
}

const char* side_name(Side s) { return s == Side::InsideWell ? "inside" : "outside"; }

double hamiltonian(double q1, double q2) {
    const double q1s = q1 * q1;
    return 0.5 * q2 * q2 - 0.5 * q1s + 0.25 * q1s * q1s;
}

double H_of_k(const EllipticModulus& k, Side side) {
    const double m = k.k * k.k, mc = k.k_comp * k.k_comp;
    if (side == Side::InsideWell) {
        const double d = 1.0 + mc;
        return -mc / (d * d);
    }
    const double d = m - mc;
    return m * mc / (d * d);
}

EnergyLevel level_from_k(const EllipticModulus& k, Side side) {
    if (side == Side::InsideWell) {
        if (k.k >= 1.0) throw DomainError("inside-well modulus must be < 1");
    } else if (!(k.k * k.k > 0.5) || k.k >= 1.0) {
        throw DomainError("outside modulus must lie in (1/sqrt2, 1)");
    }
    return {H_of_k(k, side), side, k};
}

EnergyLevel level_from_H(double H, Side side) {
    if (!std::isfinite(H)) throw DomainError("non-finite energy");
    if (std::abs(H) < kHomoclinicGuard) throw DomainError("energy inside the homoclinic guard band");
    const double s = std::sqrt(1.0 + 4.0 * H);
    if (side == Side::InsideWell) {
        if (H < -0.25 || H > 0.0) throw DomainError("inside-well energy must lie in [-1/4, 0)");
        const double kc2 = -4.0 * H / ((1.0 + s) * (1.0 + s));
        const double k2 = 2.0 * s / (1.0 + s);
        return {H, side, {std::sqrt(k2), std::sqrt(kc2)}};
    }
    if (H < 0.0) throw DomainError("outside energy must be positive");
    const double kc2 = 2.0 * H / (s * (s + 1.0));
    const double k2 = (s + 1.0) / (2.0 * s);
    return {H, side, {std::sqrt(k2), std::sqrt(kc2)}};
}

BranchJets branch_jets(const EnergyLevel& level) {
    BranchJets b;
    const double kv = level.k.k, kcv = level.k.k_comp;
    b.m = Jet::variable(kv * kv);
    b.k = sqrt(b.m);
    b.k.v = kv;
    b.kc = sqrt(1.0 - b.m);
    b.kc.v = kcv;
    if (kv == 0.0) b.k = Jet(0.0);  // derivatives in m undefined at k = 0
    complete_KE(b.k, b.kc, b.K, b.E);
    const Jet& m = b.m;
    if (level.side == Side::InsideWell) {
        const Jet d = 2.0 - m;
        const Jet sd = sqrt(d);
        b.Omega = kPi / (b.K * sd);
        Jet B;
        if (m.v < 0.5)
            B = inside_bracket_series(m);
        else
            B = 2.0 * (m - 1.0) * b.K + d * b.E;
        b.I = 2.0 / (3.0 * kPi) * B / (d * sd);
    } else {
        const Jet d = 2.0 * m - 1.0;
        const Jet sd = sqrt(d);
        b.Omega = kPi / (2.0 * b.K * sd);
        b.I = 4.0 / (3.0 * kPi) * ((1.0 - m) * b.K + d * b.E) / (d * sd);
    }
    return b;
}

double frequency(const EnergyLevel& level) {
    const double m = level.k.k * level.k.k;
    const double K = complete_K(level.k);
    if (level.side == Side::InsideWell) return kPi / (K * std::sqrt(1.0 + level.k.k_comp * level.k.k_comp));
    return kPi / (2.0 * K * std::sqrt(2.0 * m - 1.0));
}

double action(const EnergyLevel& level) {
    const double m = level.k.k * level.k.k;
    const double mc = level.k.k_comp * level.k.k_comp;
    if (level.side == Side::InsideWell) {
        const double d = 1.0 + mc;
        double B;
        if (m < 0.5) {
            B = inside_bracket_series(m);
        } else {
            double K, E;
            complete_KE(level.k.k, level.k.k_comp, K, E);
            B = -2.0 * mc * K + d * E;
        }
        return 2.0 / (3.0 * kPi) * B / (d * std::sqrt(d));
    }
    double K, E;
    complete_KE(level.k.k, level.k.k_comp, K, E);
    const double d = m - mc;
    return 4.0 / (3.0 * kPi) * (mc * K + d * E) / (d * std::sqrt(d));
}

FrequencyDerivs frequency_derivs(const EnergyLevel& level) {
    EnergyLevel lv = level;
    // the m-parameterization is singular at the well bottom; evaluate just above it
    if (lv.side == Side::InsideWell && lv.k.k < 1e-3) lv = level_from_k(EllipticModulus::from_k(1e-3), lv.side);
    const BranchJets b = branch_jets(lv);
    const Jet& W = b.Omega;
    const Jet& I = b.I;
    FrequencyDerivs out;
    out.Omega = frequency(level);
    out.dOmega_dI = W.d / I.d;
    out.d2Omega_dI2 = (W.dd * I.d - W.d * I.dd) / (I.d * I.d * I.d);
    return out;
}

EnergyLevel level_from_I(double I, Side side) {
    if (!(I >= 0.0)) throw DomainError("action must be non-negative");
    if (side == Side::InsideWell && I == 0.0) return level_from_k(EllipticModulus{}, side);
    // bisection in H; I is increasing in H on both branches
    double lo, hi;
    if (side == Side::InsideWell) {
        lo = -0.25;
        hi = -kHomoclinicGuard;
        if (I >= action(level_from_H(hi, side))) throw DomainError("action beyond the inside-well range");
    } else {
        lo = kHomoclinicGuard;
        hi = 1.0;
        if (I <= action(level_from_H(lo, side))) throw DomainError("action below the outside range");
        while (action(level_from_H(hi, side)) < I) hi *= 2.0;
    }
    for (int it = 0; it < 200 && hi - lo > 1e-16 * std::max(1.0, std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        if (action(level_from_H(mid, side)) < I)
            lo = mid;
        else
            hi = mid;
    }
    return level_from_H(0.5 * (lo + hi), side);
}

OrbitPoint to_phase(const EnergyLevel& level, double phi, bool left_well) {
    const EllipticModulus& k = level.k;
    const double m = k.k * k.k;
    const double K = complete_K(k);
    OrbitPoint q;
    if (level.side == Side::InsideWell) {
        const double d = 1.0 + k.k_comp * k.k_comp;
        const SnCnDn e = jacobi_sn_cn_dn(K * phi / kPi, k);
        q.q1 = std::sqrt(2.0 / d) * e.dn;
        q.q2 = -kSqrt2 * m / d * e.cn * e.sn;
        if (left_well) q = {-q.q1, -q.q2};
    } else {
        const double d = 2.0 * m - 1.0;
        const SnCnDn e = jacobi_sn_cn_dn(2.0 * K * phi / kPi, k);
        q.q1 = std::sqrt(2.0 * m / d) * e.cn;
        q.q2 = -kSqrt2 * k.k / d * e.sn * e.dn;
    }
    return q;
}

OrbitPoint to_phase(const ActionAngle& aa) {
    return to_phase(level_from_I(aa.I, aa.side), aa.phi, aa.left_well);
}

ActionAngle from_phase(double q1, double q2, Side side) {
    const double H = hamiltonian(q1, q2);
    ActionAngle aa;
    aa.side = side;
    if (side == Side::InsideWell) {
        if (H >= 0.0) throw DomainError("point is not inside a well");
        if (q1 < 0.0) {
            aa.left_well = true;
            q1 = -q1;
            q2 = -q2;
        }
    } else if (H <= 0.0) {
        throw DomainError("point is not outside the homoclinic orbit");
    }
    if (H == -0.25 || (q1 == 0.0 && q2 == 0.0)) throw DomainError("from_phase: fixed point has no angle");
    const EnergyLevel lv = level_from_H(H, side);
    const EllipticModulus& k = lv.k;
    const double m = k.k * k.k;
    const double K = complete_K(k);
    aa.I = action(lv);
    double am;
    if (side == Side::InsideWell) {
        const double d = 1.0 + k.k_comp * k.k_comp;
        const double dn = q1 / std::sqrt(2.0 / d);
        const double w = -q2 * d / (kSqrt2 * m);  // cn*sn
        const double root = std::sqrt(std::max(0.0, 1.0 - 4.0 * w * w));
        const double s2_small = 2.0 * w * w / (1.0 + root);
        const double s2 = dn * dn >= 1.0 - 0.5 * m ? s2_small : 1.0 - s2_small;
        const double s = std::sqrt(std::clamp(s2, 0.0, 1.0));
        double c = std::sqrt(std::clamp(1.0 - s2, 0.0, 1.0));
        if (w < 0.0) c = -c;  // sn >= 0 on the half-period
        am = std::atan2(s, c);
        aa.phi = kPi * incomplete_F(am, k) / K;
    } else {
        const double d = 2.0 * m - 1.0;
        const double cn = std::clamp(q1 / std::sqrt(2.0 * m / d), -1.0, 1.0);
        const double w = -q2 * d / (kSqrt2 * k.k);  // sn*dn
        double s;
        if (cn * cn >= 0.5) {
            const double root = std::sqrt(std::max(0.0, 1.0 - 4.0 * m * w * w));
            s = std::sqrt(2.0 * w * w / (1.0 + root));
        } else {
            s = std::sqrt(std::max(0.0, 1.0 - cn * cn));
        }
        if (w < 0.0) s = -s;
        am = std::atan2(s, cn);
        aa.phi = kPi * incomplete_F(am, k) / (2.0 * K);
    }
    aa.phi = std::fmod(aa.phi, 2.0 * kPi);
    if (aa.phi < 0.0) aa.phi += 2.0 * kPi;
    return aa;
}

OrbitPoint dq_dI(const EnergyLevel& level, double phi) {
    const BranchJets b = branch_jets(level);
    const double m = b.m.v;
    const double h = 1e-5 * std::min(m, 1.0 - m);
    const double mlo = m - h, mhi = m + h;
    auto at = [&](double mm) {
        EllipticModulus k{std::sqrt(mm), std::sqrt(1.0 - mm)};
        return to_phase(EnergyLevel{H_of_k(k, level.side), level.side, k}, phi);
    };
    const OrbitPoint a = at(mlo), c = at(mhi);
    const double dI = b.I.d * 2.0 * h;
    return {(c.q1 - a.q1) / dI, (c.q2 - a.q2) / dI};
}

OrbitPoint unperturbed_rhs(const OrbitPoint& q) { return {q.q2, q.q1 - q.q1 * q.q1 * q.q1}; }

}  // namespace reslab
