#include "doctest.h"

#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "reslab/oscillator.hpp"

using namespace reslab;
using doctest::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

struct Q {
    double a, b;
};
Q operator+(Q x, Q y) { return {x.a + y.a, x.b + y.b}; }
Q operator*(double s, Q x) { return {s * x.a, s * x.b}; }

Q duffing(Q q) { return {q.b, q.a - q.a * q.a * q.a}; }

double angle_diff(double a, double b) { return std::remainder(a - b, 2.0 * kPi); }

}  // namespace

TEST_CASE("hamiltonian values") {
    CHECK(hamiltonian(1.0, 0.0) == -0.25);
    CHECK(hamiltonian(0.0, 0.0) == 0.0);
    CHECK(hamiltonian(0.0, 1.0) == 0.5);
}

TEST_CASE("level_from_H matches a bisection oracle on H(k)") {
    const double Hin = -0.1;
    const EnergyLevel in = level_from_H(Hin, Side::InsideWell);
    const double kin = oracle::bisect(
        [&](double k) { return H_of_k(EllipticModulus::from_k(k), Side::InsideWell) - Hin; }, 0.0, 1.0 - 1e-15);
    CHECK(in.k.k == Approx(kin).epsilon(1e-12));
    CHECK(in.k.k * in.k.k + in.k.k_comp * in.k.k_comp == Approx(1.0).epsilon(1e-15));

    const double Hout = 0.05;
    const EnergyLevel out = level_from_H(Hout, Side::OutsideHomoclinic);
    const double kout = oracle::bisect(
        [&](double k) { return H_of_k(EllipticModulus::from_k(k), Side::OutsideHomoclinic) - Hout; },
        std::sqrt(0.5) + 1e-12, 1.0 - 1e-15);
    CHECK(out.k.k == Approx(kout).epsilon(1e-12));

    CHECK_THROWS_AS(level_from_H(0.1, Side::InsideWell), DomainError);
    CHECK_THROWS_AS(level_from_H(-0.1, Side::OutsideHomoclinic), DomainError);
    CHECK_THROWS_AS(level_from_H(1e-10, Side::OutsideHomoclinic), DomainError);
    CHECK_THROWS_AS(level_from_H(-0.3, Side::InsideWell), DomainError);
}

TEST_CASE("frequency: closed forms and the well bottom") {
    CHECK(frequency(level_from_k(EllipticModulus::from_k(0.0), Side::InsideWell)) ==
          Approx(std::sqrt(2.0)).epsilon(1e-15));
    const EllipticModulus k9 = EllipticModulus::from_k(0.9);
    CHECK(frequency(level_from_k(k9, Side::InsideWell)) ==
          Approx(kPi / (oracle::K_agm(0.9) * std::sqrt(2.0 - 0.81))).epsilon(1e-13));
    CHECK(frequency(level_from_k(k9, Side::OutsideHomoclinic)) ==
          Approx(kPi / (2.0 * oracle::K_agm(0.9) * std::sqrt(2.0 * 0.81 - 1.0))).epsilon(1e-13));
}

TEST_CASE("action agrees with direct quadrature of the orbit area") {
    for (double k : {0.1, 0.5, 0.8, 0.99}) {
        const EnergyLevel lv = level_from_k(EllipticModulus::from_k(k), Side::InsideWell);
        CAPTURE(k);
        CHECK(action(lv) == Approx(oracle::action_inside(lv.H)).epsilon(1e-10));
    }
    for (double k : {0.75, 0.9, 0.99}) {
        const EnergyLevel lv = level_from_k(EllipticModulus::from_k(k), Side::OutsideHomoclinic);
        CAPTURE(k);
        CHECK(action(lv) == Approx(oracle::action_outside(lv.H)).epsilon(1e-10));
    }
    CHECK(action(level_from_k(EllipticModulus::from_k(0.0), Side::InsideWell)) == 0.0);
}

TEST_CASE("dI/dH equals 1/Omega") {
    for (Side side : {Side::InsideWell, Side::OutsideHomoclinic}) {
        for (double H : side == Side::InsideWell ? std::array<double, 4>{-0.24, -0.15, -0.05, -0.005}
                                                 : std::array<double, 4>{0.005, 0.05, 0.3, 2.0}) {
            const double h = 1e-5 * std::abs(H);
            const double dI = (action(level_from_H(H + h, side)) - action(level_from_H(H - h, side))) / (2.0 * h);
            CAPTURE(H);
            CHECK(dI * frequency(level_from_H(H, side)) == Approx(1.0).epsilon(1e-6));
        }
    }
}

TEST_CASE("frequency derivatives agree with finite differences in I") {
    for (Side side : {Side::InsideWell, Side::OutsideHomoclinic}) {
        for (double H : side == Side::InsideWell ? std::array<double, 3>{-0.2, -0.1, -0.02}
                                                 : std::array<double, 3>{0.02, 0.1, 0.5}) {
            const EnergyLevel lv = level_from_H(H, side);
            const FrequencyDerivs fd = frequency_derivs(lv);
            const double I = action(lv), h = 1e-4 * I;
            const double wp = frequency(level_from_I(I + h, side)), wm = frequency(level_from_I(I - h, side));
            const double w0 = frequency(lv);
            CAPTURE(H);
            CHECK(fd.Omega == Approx(w0).epsilon(1e-14));
            CHECK(fd.dOmega_dI == Approx((wp - wm) / (2.0 * h)).epsilon(1e-6));
            CHECK(fd.d2Omega_dI2 == Approx((wp - 2.0 * w0 + wm) / (h * h)).epsilon(1e-3));
        }
    }
    // Omega decreases with I inside the well
    CHECK(frequency_derivs(level_from_H(-0.1, Side::InsideWell)).dOmega_dI < 0.0);
    CHECK(frequency_derivs(level_from_H(0.1, Side::OutsideHomoclinic)).dOmega_dI > 0.0);
}

TEST_CASE("to_phase reference points") {
    const OrbitPoint a = to_phase(level_from_k(EllipticModulus::from_k(0.0), Side::InsideWell), 0.0);
    CHECK(a.q1 == Approx(1.0).epsilon(1e-15));
    CHECK(a.q2 == 0.0);
    const EnergyLevel lv = level_from_k(EllipticModulus::from_k(0.5), Side::InsideWell);
    const OrbitPoint b = to_phase(lv, 0.0);
    CHECK(b.q1 == Approx(std::sqrt(2.0 / 1.75)).epsilon(1e-14));
    for (int i = 0; i < 16; ++i) {
        const OrbitPoint p = to_phase(lv, 2.0 * kPi * i / 16);
        CHECK(hamiltonian(p.q1, p.q2) == Approx(lv.H).epsilon(1e-13));
    }
    const OrbitPoint c = to_phase(lv, 1.0, true);
    const OrbitPoint d = to_phase(lv, 1.0);
    CHECK(c.q1 == -d.q1);
    CHECK(c.q2 == -d.q2);
}

TEST_CASE("energy round trip H -> k -> H over random levels") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uin(-0.25, -1e-6), uout(1e-6, 5.0);
    for (int i = 0; i < 100; ++i) {
        const Side side = i % 2 ? Side::InsideWell : Side::OutsideHomoclinic;
        const double H = side == Side::InsideWell ? uin(rng) : uout(rng);
        const EnergyLevel lv = level_from_H(H, side);
        CHECK(H_of_k(lv.k, side) == Approx(H).epsilon(1e-12));
        CHECK(level_from_I(action(lv), side).H == Approx(H).epsilon(1e-9));
    }
}

TEST_CASE("action-angle round trip on random phase points") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.8, 1.8);
    int n = 0;
    while (n < 200) {
        const double q1 = u(rng), q2 = u(rng);
        const double H = hamiltonian(q1, q2);
        if (std::abs(H) < 1e-3 || H < -0.2499) continue;
        const Side side = H < 0.0 ? Side::InsideWell : Side::OutsideHomoclinic;
        const ActionAngle aa = from_phase(q1, q2, side);
        const OrbitPoint p = to_phase(aa);
        CAPTURE(q1);
        CAPTURE(q2);
        CHECK(std::abs(p.q1 - q1) < 1e-9);
        CHECK(std::abs(p.q2 - q2) < 1e-9);
        ++n;
    }
    CHECK_THROWS_AS(from_phase(0.0, 0.5, Side::InsideWell), DomainError);
}

TEST_CASE("angle advances at Omega under the unperturbed flow; RK4 conserves H") {
    for (Side side : {Side::InsideWell, Side::OutsideHomoclinic}) {
        const EnergyLevel lv = level_from_H(side == Side::InsideWell ? -0.12 : 0.2, side);
        const double W = frequency(lv), T = 2.0 * kPi / W;
        const double phi0 = 0.4;
        const OrbitPoint p0 = to_phase(lv, phi0);
        Q q{p0.q1, p0.q2};
        const int steps = 4000;
        const double dt = T / steps;
        for (int i = 1; i <= steps; ++i) {
            q = oracle::rk4_step(duffing, q, dt);
            if (i % 500 == 0) {
                const ActionAngle aa = from_phase(q.a, q.b, side);
                CHECK(std::abs(angle_diff(aa.phi, phi0 + W * i * dt)) < 1e-8);
            }
        }
        CHECK(std::abs(hamiltonian(q.a, q.b) - lv.H) < 1e-10);
        CHECK(std::abs(q.a - p0.q1) < 1e-8);
        CHECK(std::abs(q.b - p0.q2) < 1e-8);
    }
}

TEST_CASE("dq_dI against finite differences in the action") {
    const EnergyLevel lv = level_from_H(-0.1, Side::InsideWell);
    const double I = action(lv), h = 1e-5 * I;
    for (double phi : {0.0, 1.0, 2.5, 4.0}) {
        const OrbitPoint d = dq_dI(lv, phi);
        const OrbitPoint a = to_phase(level_from_I(I + h, Side::InsideWell), phi);
        const OrbitPoint b = to_phase(level_from_I(I - h, Side::InsideWell), phi);
        CHECK(d.q1 == Approx((a.q1 - b.q1) / (2.0 * h)).epsilon(1e-5));
        CHECK(d.q2 == Approx((a.q2 - b.q2) / (2.0 * h)).epsilon(1e-5).scale(1.0));
    }
}

TEST_CASE("parameter validation") {
    PhysicalParams p;
    CHECK_NOTHROW(p.validate());
    p.eps = 0.0;
    CHECK_THROWS_AS(p.validate(), DomainError);
    p = {};
    p.kappa = 0.5;
    CHECK_THROWS_AS(p.validate(), DomainError);
}
