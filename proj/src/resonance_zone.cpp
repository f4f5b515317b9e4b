#include "reslab/resonance_zone.hpp"

#include <cmath>
#include <numbers>

namespace reslab {

namespace {

constexpr double kPi = std::numbers::pi;

double omega_at_H(double H, Side side) { return frequency(level_from_H(H, side)); }

}  // namespace

ForcingCoeffs forcing_coeffs(const EnergyLevel& level, int m, int n) {
    if (m <= 0 || n <= 0) throw DomainError("m and n must be positive");
    EnergyLevel lv = level;
    if (lv.side == Side::InsideWell && lv.k.k < 1e-3) lv = level_from_k(EllipticModulus::from_k(1e-3), lv.side);
    const BranchJets b = branch_jets(lv);
    Jet Kt, Et;
    complete_KE(b.kc, b.k, Kt, Et);
    const bool integral = m % n == 0;
    const int r = integral ? m / n : 0;
    Jet Je(0.0), Ja(0.0);
    if (lv.side == Side::InsideWell) {
        if (integral) {
            const Jet d = 2.0 - b.m;
            const Jet arg = r * kPi * Kt / b.K;
            Je = -(kPi * kPi * r * r) / (2.0 * b.K * b.K * d) / sinh(arg);
            Ja = -(kPi * r) / (std::numbers::sqrt2 * b.K * sqrt(d)) / cosh(arg);
        }
    } else if (integral) {
        const Jet d = 2.0 * b.m - 1.0;
        const Jet arg = 0.5 * r * kPi * Kt / b.K;
        if (r % 2 == 0)
            Je = -(kPi * kPi * r * r) / (4.0 * b.K * b.K * d) / sinh(arg);
        else
            Ja = -(kPi * r) / (std::numbers::sqrt2 * b.K * sqrt(d)) / cosh(arg);
    }
    ForcingCoeffs out;
    // at the well bottom K~ diverges and both J vanish
    const bool shifted = lv.k.k != level.k.k;
    out.J_eta = shifted ? 0.0 : Je.v;
    out.J_alpha = shifted ? 0.0 : Ja.v;
    out.dJ_eta_dI = Je.d / b.I.d;
    out.dJ_alpha_dI = Ja.d / b.I.d;
    return out;
}

ResonanceSpec find_resonance(int m, int n, double nu, Side side) {
    if (m <= 0 || n <= 0) throw DomainError("m and n must be positive");
    if (!(nu > 0.0) || !std::isfinite(nu)) throw DomainError("nu must be positive");
    const double target = n * nu / m;
    double lo, hi;
    if (side == Side::InsideWell) {
        lo = -0.25;
        hi = -kHomoclinicGuard;
        if (!(target < std::numbers::sqrt2) || !(target > omega_at_H(hi, side)))
            throw RegimeError("no inside-well resonance for this n*nu/m");
        // Omega decreasing in H inside
        for (int it = 0; it < 300; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (mid == lo || mid == hi) break;
            if (omega_at_H(mid, side) > target)
                lo = mid;
            else
                hi = mid;
        }
    } else {
        lo = kHomoclinicGuard;
        if (!(target > omega_at_H(lo, side))) throw RegimeError("no outside resonance for this n*nu/m");
        hi = 1.0;
        while (omega_at_H(hi, side) < target) {
            hi *= 2.0;
            if (hi > 1e12) throw RegimeError("outside resonance beyond the energy range");
        }
        for (int it = 0; it < 300; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (mid == lo || mid == hi) break;
            if (omega_at_H(mid, side) < target)
                lo = mid;
            else
                hi = mid;
        }
    }
    const double Hl = omega_at_H(lo, side), Hh = omega_at_H(hi, side);
    const double H = std::abs(Hl - target) <= std::abs(Hh - target) ? lo : hi;

    ResonanceSpec s;
    s.m = m;
    s.n = n;
    s.nu = nu;
    s.level = level_from_H(H, side);
    s.I_r = action(s.level);
    const FrequencyDerivs fd = frequency_derivs(s.level);
    s.Omega_r = fd.Omega;
    s.dOmega_dI = fd.dOmega_dI;
    s.d2Omega_dI2 = fd.d2Omega_dI2;
    const ForcingCoeffs fc = forcing_coeffs(s.level, m, n);
    s.J_eta = fc.J_eta;
    s.J_alpha = fc.J_alpha;
    s.dJ_eta_dI = fc.dJ_eta_dI;
    s.dJ_alpha_dI = fc.dJ_alpha_dI;
    return s;
}

double PendulumSystem::lambda() const {
    return 2.0 * delta * spec.Omega_r / (sigma * sigma * spec.dOmega_dI * spec.I_r);
}

double PendulumSystem::curvature_at_center() const {
    return spec.dOmega_dI * J_r / spec.ratio() * std::cos(psi_center / spec.ratio());
}

FixedPointPair classify_fixed_points(const PendulumSystem& ps) {
    const ResonanceSpec& s = ps.spec;
    if (ps.J_r == 0.0) throw DomainError("J_r = 0: no fixed points");
    const double chi = ps.delta * s.I_r / ps.J_r;
    if (!(std::abs(chi) < 1.0)) throw DomainError("|chi| >= 1: the pendulum has no fixed point");
    const double r = s.ratio();
    const double Psi = r * std::asin(chi);
    const double c = std::cos(Psi / r);
    const double prod = s.dOmega_dI * ps.J_r * c / r;
    if (prod == 0.0 || s.dOmega_dI == 0.0) throw DomainError("degenerate fixed-point pair");
    const bool up = s.dOmega_dI > 0.0;
    if (prod > 0.0) return {Psi, (up ? 1.0 : -1.0) * r * kPi - Psi};
    return {(up ? -1.0 : 1.0) * r * kPi - Psi, Psi};
}

PendulumSystem build_pendulum(const ResonanceSpec& spec, double delta, double eta, double alpha, double sigma) {
    if (!(delta >= 0.0)) throw DomainError("delta must be non-negative");
    if (!(sigma >= 0.0)) throw DomainError("sigma must be non-negative");
    PendulumSystem ps;
    ps.spec = spec;
    ps.delta = delta;
    ps.eta = eta;
    ps.alpha = alpha;
    ps.sigma = sigma;
    ps.J_r = eta * spec.J_eta + alpha * spec.J_alpha;
    ps.dJ_r = eta * spec.dJ_eta_dI + alpha * spec.dJ_alpha_dI;
    const FixedPointPair fp = classify_fixed_points(ps);
    ps.chi = delta * spec.I_r / ps.J_r;
    ps.Psi_star = spec.ratio() * std::asin(ps.chi);
    ps.psi_saddle = fp.psi_saddle;
    ps.psi_center = fp.psi_center;
    ps.H_sd = pendulum_H(ps, fp.psi_saddle, 0.0);
    ps.H_sk = pendulum_H(ps, fp.psi_center, 0.0);
    return ps;
}

double averaged_F(const PendulumSystem& ps, double psi) {
    return -ps.delta * ps.spec.I_r + ps.J_r * std::sin(psi / ps.spec.ratio());
}

double averaged_G(const PendulumSystem& ps, double psi) {
    return ps.spec.ratio() * ps.dJ_r * std::cos(psi / ps.spec.ratio());
}

double pendulum_H(const PendulumSystem& ps, double psi, double h) {
    const double r = ps.spec.ratio();
    return 0.5 * ps.spec.dOmega_dI * h * h + ps.delta * ps.spec.I_r * psi + r * ps.J_r * (std::cos(psi / r) - 1.0);
}

double escape_measure(const PendulumSystem& ps) {
    const double chi = ps.chi;
    if (!(std::abs(chi) < 1.0)) throw DomainError("|chi| >= 1: no trap");
    if (chi == 0.0) return 0.0;
    const double a = std::abs(chi);
    const double s2 = ps.sigma * ps.sigma;
    if (s2 == 0.0) throw DomainError("escape measure needs sigma > 0");
    return 2.0 * ps.spec.Omega_r * ps.spec.ratio() / (s2 * std::abs(ps.spec.dOmega_dI)) * ps.delta * ps.delta *
           (2.0 * std::asin(a) - kPi + 2.0 * std::sqrt(1.0 - a * a) / a);
}

double raw_F(const PendulumSystem& ps, double phi, double theta) {
    const OrbitPoint q = to_phase(ps.spec.level, phi);
    const double c = std::cos(theta);
    return q.q2 / ps.spec.Omega_r * (ps.eta * q.q1 * c + ps.alpha * c - ps.delta * q.q2);
}

double raw_G(const PendulumSystem& ps, double phi, double theta) {
    const OrbitPoint q = to_phase(ps.spec.level, phi);
    const OrbitPoint dq = dq_dI(ps.spec.level, phi);
    const double c = std::cos(theta);
    return -dq.q1 * (ps.eta * q.q1 * c + ps.alpha * c - ps.delta * q.q2);
}

double quadrature_averaged_F(const PendulumSystem& ps, double psi, int nodes) {
    const int m = ps.spec.m;
    const int N = nodes * m;
    const double h = 2.0 * kPi * m / N;
    double sum = 0.0;
    for (int i = 0; i < N; ++i) {
        const double th = i * h;
        sum += raw_F(ps, psi + ps.spec.ratio() * th, th);
    }
    return sum / N;
}

}  // namespace reslab
