#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "reslab/bottom_well.hpp"
#include "reslab/sdesim.hpp"

using namespace reslab;
using doctest::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

// P = eta sqrt(2 mu)/4; delta, lambda, gamma chosen from the hatted values
ZSystem hatted(double mu, double eta, double dh, double lh, double gh, double eps) {
    const double P = eta * std::sqrt(2.0 * mu) / 4.0;
    const double nu0 = 2.0 * std::sqrt(2.0 * mu);
    // b = nu lambda/2 with nu = nu0 (1 + eps lambda)
    const double b = lh * P;
    const double lambda = (-1.0 + std::sqrt(1.0 + 8.0 * eps * b / nu0)) / (2.0 * eps);
    return ZSystem::make(mu, gh * P * 4.0 * mu / 3.0, 2.0 * P * dh, eta, lambda, 0.0, eps);
}

ZSystem random_regime(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const double mu = 0.5 + 1.5 * U(rng), eta = 0.3 + 2.0 * U(rng);
    const double dh = 0.95 * U(rng);
    const double lh = -std::sqrt(1.0 - dh * dh) - 0.05 - 4.0 * U(rng);
    const double gh = 0.3 + 2.0 * U(rng);
    return ZSystem::from_hat(mu, eta, dh, lh, gh, 0.0);
}

// invert y = v + k (v1^2 + 2 v2^2, -2 v1 v2) by fixed-point iteration
Vec2 y_to_v(const Vec2& y, double k) {
    Vec2 v = y;
    for (int i = 0; i < 100; ++i) v = y - k * Vec2(v(0) * v(0) + 2.0 * v(1) * v(1), -2.0 * v(0) * v(1));
    return v;
}

}  // namespace

TEST_CASE("averaged drift: raw and rescaled forms coincide") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-3.0, 3.0);
    for (int i = 0; i < 50; ++i) {
        const ZSystem zs = random_regime(rng);
        const Vec2 z(U(rng), U(rng));
        const Vec2 a = averaged_drift(zs, z), b = averaged_drift_rescaled(zs, z);
        CHECK((a - b).norm() < 1e-12 * std::max(1.0, a.norm()));
        // Jacobian against central differences
        const double h = 1e-6;
        for (int j = 0; j < 2; ++j) {
            Vec2 e = Vec2::Zero();
            e(j) = h;
            const Vec2 col = (averaged_drift(zs, z + e) - averaged_drift(zs, z - e)) / (2.0 * h);
            CHECK((col - drift_jacobian(zs, z).col(j)).norm() < 1e-6 * std::max(1.0, col.norm()));
        }
    }
    const ZSystem zs = ZSystem::from_hat(1.0, 1.0, 0.0, -2.0, 1.0, 0.0);
    CHECK(averaged_drift(zs, Vec2::Zero()).norm() == 0.0);
    // the R+ point lies on the second axis in this frame
    CHECK(averaged_drift(zs, Vec2(0.0, std::sqrt(3.0))).norm() < 1e-14);
    CHECK(averaged_drift(zs, Vec2(1.0, 0.0)).norm() < 1e-14);
    CHECK(averaged_drift(zs, Vec2(std::sqrt(3.0), 0.0)).norm() > 0.1);
}

TEST_CASE("hatted parameters round trip") {
    const ZSystem zs = ZSystem::from_hat(1.3, 0.7, 0.35, -1.6, 0.8, 0.2);
    CHECK(zs.delta_hat() == Approx(0.35).epsilon(1e-14));
    CHECK(zs.lambda_hat() == Approx(-1.6).epsilon(1e-14));
    CHECK(zs.gamma_hat() == Approx(0.8).epsilon(1e-14));
    CHECK(zs.diffusion() == Approx(0.04 / 5.2).epsilon(1e-14));
    CHECK(zs.five_point_regime());
    CHECK_FALSE(ZSystem::from_hat(1.0, 1.0, 0.4, -0.5, 1.0, 0.0).five_point_regime());
    CHECK_THROWS_AS(fixed_points(ZSystem::from_hat(1.0, 1.0, 0.4, -0.5, 1.0, 0.0)), RegimeError);
    CHECK_THROWS_AS(ZSystem::make(1.0, 1.0, 0.1, -1.0, -1.0, 0.0, 0.1), DomainError);
    const ZSystem m = ZSystem::make(1.0, 1.0, 0.1, 1.0, -1.0, 0.0, 0.1);
    CHECK(m.nu == Approx(2.0 * std::sqrt(2.0) * 0.9));
}

TEST_CASE("fixed points on the axes when delta_hat = 0") {
    const ZFixedPoints fp = fixed_points(ZSystem::from_hat(1.0, 1.0, 0.0, -2.0, 1.0, 0.0));
    CHECK(fp.R_plus == Approx(std::sqrt(3.0)).epsilon(1e-15));
    CHECK(fp.R_minus == Approx(1.0).epsilon(1e-15));
    CHECK(std::abs(fp.zp0(0)) < 1e-15);
    CHECK(fp.zp0(1) == Approx(std::sqrt(3.0)));
    CHECK(fp.zm0(0) == Approx(1.0));
    CHECK(std::abs(fp.zm0(1)) < 1e-15);
}

TEST_CASE("fixed points: radii, angle law, zeros of the drift, classification") {
    std::mt19937_64 rng(17);
    int checked = 0;
    for (int i = 0; i < 100; ++i) {
        const ZSystem zs = random_regime(rng);
        const ZFixedPoints fp = fixed_points(zs);
        const double dh = zs.delta_hat(), lh = zs.lambda_hat(), gh = zs.gamma_hat();
        const double Rp = std::sqrt((-lh + std::sqrt(1.0 - dh * dh)) / gh);
        const double Rm = std::sqrt((-lh - std::sqrt(1.0 - dh * dh)) / gh);
        CHECK(std::abs(fp.zp0.norm() - Rp) < 1e-12 * Rp);
        CHECK(std::abs(fp.zppi.norm() - Rp) < 1e-12 * Rp);
        CHECK(std::abs(fp.zm0.norm() - Rm) < 1e-12 * Rp);
        CHECK(std::abs(fp.zmpi.norm() - Rm) < 1e-12 * Rp);
        for (const Vec2& z : {fp.zp0, fp.zppi, fp.zm0, fp.zmpi}) {
            CHECK(2.0 * z(0) * z(1) / z.squaredNorm() == Approx(dh).epsilon(1e-12).scale(1.0));
        }
        const double scale = zs.P() * (1.0 + gh * Rp * Rp) * Rp;
        for (const Vec2& z : fp.all()) CHECK(averaged_drift(zs, z).norm() < 1e-10 * std::max(1.0, scale));
        CHECK((fp.zppi + fp.zp0).norm() == 0.0);
        CHECK((fp.zmpi + fp.zm0).norm() == 0.0);

        // eigenvalues from the trace/determinant of an independent finite-difference Jacobian
        for (int j = 0; j < 5; ++j) {
            const Vec2 z = fp.all()[j];
            Mat2 Jn;
            const double h = 1e-7 * std::max(1.0, Rp);
            for (int c = 0; c < 2; ++c) {
                Vec2 e = Vec2::Zero();
                e(c) = h;
                Jn.col(c) = (averaged_drift(zs, z + e) - averaged_drift(zs, z - e)) / (2.0 * h);
            }
            const double tr = Jn.trace(), det = Jn.determinant();
            if (j == 3 || j == 4) {
                CHECK(det < 0.0);
                CHECK(fp.kinds[j] == PointKind::Saddle);
            } else {
                CHECK(det > 0.0);
                CHECK(tr < 0.0);
                CHECK(fp.kinds[j] == PointKind::Sink);
            }
        }
        ++checked;
    }
    CHECK(checked == 100);
}

TEST_CASE("fixed points under parameter changes") {
    double prev_angle = -1.0;
    for (double dh : {0.0, 0.2, 0.4, 0.6, 0.8}) {
        const ZFixedPoints fp = fixed_points(ZSystem::from_hat(1.0, 2.0, dh, -1.2, 1.0, 0.0));
        const double a = std::atan2(fp.zm0(1), fp.zm0(0));
        CHECK(a > prev_angle);
        prev_angle = a;
    }
    double prev_R = 0.0;
    for (double lh : {-1.1, -1.5, -2.0, -3.0}) {
        const ZFixedPoints fp = fixed_points(ZSystem::from_hat(1.0, 2.0, 0.4, lh, 1.0, 0.0));
        CHECK(fp.R_minus > prev_R);
        prev_R = fp.R_minus;
    }
    const ZSystem zs = ZSystem::from_hat(1.0, 2.0, 0.4, -1.2, 1.0, 0.0);
    const ZFixedPoints fp = fixed_points(zs);
    CHECK(c_param(zs, Vec2::Zero()) == Approx(-0.5 * zs.nu * zs.lambda));
    CHECK(c_param(zs, fp.zp0) == Approx(-zs.a() * fp.R_plus * fp.R_plus - zs.b()));
}

TEST_CASE("solution branches") {
    const double eps = 0.01;
    const ZSystem zs = hatted(1.0, 2.0, 0.4, -1.2, 1.0, eps);
    const auto br = solution_branches(zs, eps);
    REQUIRE(br.size() == 5);
    CHECK(br[0].amplitude == 0.0);
    const double corr = eps * zs.eta * zs.mu * std::sqrt(zs.mu / zs.gamma) / (zs.nu * zs.nu - 2.0 * zs.mu);
    for (const SolutionBranch& b : br) {
        CHECK(b.corrector == Approx(corr).epsilon(1e-14));
        CHECK(b.constant == Approx(std::sqrt(zs.mu / zs.gamma)));
    }
    const ZFixedPoints fp = fixed_points(zs);
    CHECK(br[1].amplitude == Approx(std::sqrt(eps) * fp.R_plus));
    CHECK(br[3].amplitude == Approx(std::sqrt(eps) * fp.R_minus));
    CHECK(br[1].stable);
    CHECK(br[2].stable);
    CHECK_FALSE(br[3].stable);
    CHECK_FALSE(br[4].stable);
    CHECK(std::remainder(br[2].phase - br[1].phase - kPi, 2.0 * kPi) == Approx(0.0).scale(1.0));

    // the R+ branch is followed by the raw dynamics
    SimConfig c;
    c.params.mu = zs.mu;
    c.params.gamma = zs.gamma;
    c.params.delta = zs.delta;
    c.params.eta = zs.eta;
    c.params.nu = zs.nu;
    c.params.eps = eps;
    const double period = 2.0 * kPi / zs.nu;
    c.dt = period / 256.0;
    c.t_max = 20.0 * period;
    const RawPath p = simulate_raw(c, {br[1].q1(zs.nu, 0.0), br[1].q2(zs.nu, 0.0)});
    double err = 0.0;
    for (const RawSample& s : p.samples) err = std::max(err, std::abs(s.q1 - br[1].q1(zs.nu, s.t)));
    CHECK(err < 5.0 * eps);
}

TEST_CASE("averaged z flow: origin, attraction, basins") {
    const ZSystem zs = ZSystem::from_hat(1.0, 2.0, 0.4, -1.2, 1.0, 0.0);
    const ZFixedPoints fp = fixed_points(zs);
    const ZPath still = simulate_z(zs, 0.1, 1.0, Vec2::Zero(), 0.01, 1, 10.0, ZMode::Averaged);
    CHECK(still.z.back().norm() == 0.0);

    const Vec2 start = 1.1 * fp.zp0;
    const ZPath p = simulate_z(zs, 0.1, 1.0, start, 0.01, 1, 200.0, ZMode::Averaged, 0, 1000);
    CHECK((p.z.back() - fp.zp0).norm() < 1e-6);
    CHECK(basin_of(zs, start) == 1);
    CHECK(basin_of(zs, -start) == 2);
    CHECK(basin_of(zs, 0.5 * fp.zm0) == 0);
}

TEST_CASE("oscillatory and averaged z equations agree at small eps") {
    const double eps = 1e-3;
    const ZSystem zs = hatted(1.0, 2.0, 0.4, -1.2, 1.0, eps);
    const ZFixedPoints fp = fixed_points(zs);
    const Vec2 z0 = 0.8 * fp.zm0 + Vec2(0.1, 0.3);
    const double dt = 2.0 * kPi * eps / (64.0 * zs.nu);
    const ZPath a = simulate_z(zs, eps, 1.0, z0, dt, 1, 1.0, ZMode::Oscillatory, 0, 64);
    const ZPath b = simulate_z(zs, eps, 1.0, z0, dt, 1, 1.0, ZMode::Averaged, 0, 64);
    REQUIRE(a.z.size() == b.z.size());
    double err = 0.0;
    for (std::size_t i = 0; i < a.z.size(); ++i) err = std::max(err, (a.z[i] - b.z[i]).norm());
    CHECK(err < std::sqrt(eps));

    // with noise the two modes share the diffusion strength: compare spread at t = 1 from the origin
    ZSystem noisy = zs;
    noisy.sigma = 0.5;
    const double dtn = 2.0 * kPi * 0.01 / (64.0 * zs.nu);
    double va = 0.0, vb = 0.0;
    const int N = 400;
    for (int i = 0; i < N; ++i) {
        va += simulate_z(noisy, 0.01, 1.0, Vec2::Zero(), dtn, 9, 0.2, ZMode::Oscillatory, i, 1000000)
                  .z.back()
                  .squaredNorm();
        vb += simulate_z(noisy, 0.01, 1.0, Vec2::Zero(), dtn, 9, 0.2, ZMode::Averaged, i, 1000000)
                  .z.back()
                  .squaredNorm();
    }
    CHECK(va / vb == Approx(1.0).epsilon(0.25));
    CHECK_THROWS_AS(simulate_z(zs, eps, 1.0, z0, 10.0 * dt, 1, 1.0, ZMode::Oscillatory), DomainError);
}

TEST_CASE("free oscillations at the well bottom follow the Lindstedt frequency shift") {
    // x'' + w0^2 x + a2 x^2 + a3 x^3 = 0: w = w0 + (3 a3/(8 w0) - 5 a2^2/(12 w0^3)) A^2
    const double mu = 1.0, gamma = 1.0, w0 = std::sqrt(2.0 * mu), A = 0.02;
    const double a2 = 3.0 * std::sqrt(mu * gamma), a3 = gamma;
    const double w = w0 + (3.0 * a3 / (8.0 * w0) - 5.0 * a2 * a2 / (12.0 * std::pow(w0, 3))) * A * A;
    SimConfig c;
    c.params.eps = 0.1;
    c.params.nu = w0;
    c.dt = 2.0 * kPi / (512.0 * w0);
    c.t_max = 400.0;
    const RawPath p = simulate_raw(c, {std::sqrt(mu / gamma) + A, 0.0});
    // count upward zero crossings of q2 to get the period
    std::vector<double> up;
    for (std::size_t i = 1; i < p.samples.size(); ++i) {
        const RawSample &a = p.samples[i - 1], &b = p.samples[i];
        if (a.q2 < 0.0 && b.q2 >= 0.0) up.push_back(a.t + (b.t - a.t) * (-a.q2) / (b.q2 - a.q2));
    }
    REQUIRE(up.size() > 10);
    const double measured = 2.0 * kPi * (up.size() - 1) / (up.back() - up.front());
    CHECK((measured - w0) / (w - w0) == Approx(1.0).epsilon(0.05));
    // shift is -3 gamma A^2/(2 w0); the averaged drift rotates at 3 gamma/(4 mu) |z|^2, equal only at mu = 1/2
    CHECK(-(w - w0) / (A * A) == Approx(3.0 * gamma / (2.0 * w0)));
}

TEST_CASE("raw coordinates map onto the averaged z flow") {
    const double eps = 1e-3;
    // mu = 1/2, where the averaged cubic coefficient coincides with the Lindstedt shift
    const ZSystem zs = hatted(0.5, 2.0, 0.4, -1.2, 1.0, eps);
    const ZFixedPoints fp = fixed_points(zs);
    const Vec2 z0 = 0.8 * fp.zm0 + Vec2(0.1, 0.3);
    const double se = std::sqrt(eps);
    const double C = zs.eta * zs.mu * std::sqrt(zs.mu / zs.gamma) / (zs.nu * zs.nu - 2.0 * zs.mu);
    const Vec2 v = y_to_v(z0, se * std::sqrt(zs.gamma / (4.0 * zs.mu)));
    const double q1 = std::sqrt(zs.mu / zs.gamma) + se * v(0) - eps * C;
    const double q2 = se * std::sqrt(2.0 * zs.mu) * v(1);
    CHECK((raw_to_z(zs, eps, 0.0, q1, q2) - z0).norm() < 1e-12);

    SimConfig c;
    c.params.mu = zs.mu;
    c.params.gamma = zs.gamma;
    c.params.delta = zs.delta;
    c.params.eta = zs.eta;
    c.params.nu = zs.nu;
    c.params.eps = eps;
    c.dt = 2.0 * kPi / (128.0 * zs.nu);
    c.t_max = 1.0 / eps;
    c.record_stride = 200;
    const RawPath raw = simulate_raw(c, {q1, q2});
    const ZPath avg = simulate_z(zs, eps, 1.0, z0, c.dt * eps, 1, 1.0, ZMode::Averaged, 0, 200);
    REQUIRE(raw.samples.size() == avg.z.size());
    double err = 0.0;
    for (std::size_t i = 0; i < raw.samples.size(); ++i) {
        const RawSample& s = raw.samples[i];
        err = std::max(err, (raw_to_z(zs, eps, s.t, s.q1, s.q2) - avg.z[i]).norm());
    }
    CHECK(err < std::sqrt(eps));
}
