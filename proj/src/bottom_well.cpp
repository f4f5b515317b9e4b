#include "reslab/bottom_well.hpp"

#include <cmath>
#include <numbers>

#include "reslab/rng.hpp"

namespace reslab {

namespace {

constexpr double kPi = std::numbers::pi;

Vec2 rot(const Vec2& z) { return {z(1), -z(0)}; }

// e^{sB}, B = (nu/2) [[0,1],[-1,0]]
Mat2 rotation(double nu, double s) {
    const double c = std::cos(0.5 * nu * s), si = std::sin(0.5 * nu * s);
    Mat2 R;
    R << c, si, -si, c;
    return R;
}

}  // namespace

ZSystem ZSystem::make(double mu, double gamma, double delta, double eta, double lambda, double sigma, double eps) {
    ZSystem zs{mu, gamma, delta, eta, lambda, sigma, 2.0 * std::sqrt(2.0 * mu) * (1.0 + eps * lambda)};
    zs.validate();
    return zs;
}

ZSystem ZSystem::from_hat(double mu, double eta, double delta_hat, double lambda_hat, double gamma_hat, double sigma) {
    const double P = eta * std::sqrt(2.0 * mu) / 4.0;
    ZSystem zs;
    zs.mu = mu;
    zs.eta = eta;
    zs.sigma = sigma;
    zs.nu = 2.0 * std::sqrt(2.0 * mu);
    zs.delta = 2.0 * P * delta_hat;
    zs.lambda = lambda_hat * P / (0.5 * zs.nu);
    zs.gamma = gamma_hat * P * 4.0 * mu / 3.0;
    zs.validate();
    return zs;
}

double ZSystem::P() const { return eta * std::sqrt(2.0 * mu) / 4.0; }
double ZSystem::a() const { return 3.0 * gamma / (4.0 * mu); }
double ZSystem::b() const { return 0.5 * nu * lambda; }
double ZSystem::delta_hat() const { return 0.5 * delta / P(); }
double ZSystem::lambda_hat() const { return b() / P(); }
double ZSystem::gamma_hat() const { return a() / P(); }
double ZSystem::diffusion() const { return sigma * sigma / (4.0 * mu); }

bool ZSystem::five_point_regime() const {
    const double P2 = P() * P(), d2 = 0.25 * delta * delta;
    return 0.5 * delta < P() && -b() > std::sqrt(P2 - d2);
}

void ZSystem::validate() const {
    if (!(mu > 0.0) || !(gamma > 0.0)) throw DomainError("mu and gamma must be positive");
    if (!(eta > 0.0)) throw DomainError("eta must be positive");
    if (!(delta >= 0.0) || !(sigma >= 0.0)) throw DomainError("delta and sigma must be non-negative");
    if (!(nu > 0.0)) throw DomainError("nu must be positive");
}

Vec2 averaged_drift(const ZSystem& zs, const Vec2& z) {
    const double r2 = z.squaredNorm();
    return (-zs.a() * r2 - zs.b()) * rot(z) - 0.5 * zs.delta * z + zs.P() * Vec2(z(1), z(0));
}

Vec2 averaged_drift_rescaled(const ZSystem& zs, const Vec2& z) {
    const double r2 = z.squaredNorm();
    return zs.P() * ((-zs.gamma_hat() * r2 - zs.lambda_hat()) * rot(z) - zs.delta_hat() * z + Vec2(z(1), z(0)));
}

Mat2 drift_jacobian(const ZSystem& zs, const Vec2& z) {
    const double A = -zs.a() * z.squaredNorm() - zs.b();
    const double a = zs.a(), P = zs.P(), d = 0.5 * zs.delta;
    Mat2 J;
    J << -2.0 * a * z(0) * z(1) - d, A - 2.0 * a * z(1) * z(1) + P,
        -A + 2.0 * a * z(0) * z(0) + P, 2.0 * a * z(0) * z(1) - d;
    return J;
}

double c_param(const ZSystem& zs, const Vec2& z_star) { return -zs.a() * z_star.squaredNorm() - zs.b(); }

const char* point_kind_name(PointKind k) {
    switch (k) {
        case PointKind::Sink: return "sink";
        case PointKind::Saddle: return "saddle";
        case PointKind::Source: return "source";
        default: return "degenerate";
    }
}

PointKind classify_point(const ZSystem& zs, const Vec2& z) {
    const Eigen::Vector2cd ev = drift_jacobian(zs, z).eigenvalues();
    const double r0 = ev(0).real(), r1 = ev(1).real();
    if (r0 < 0.0 && r1 < 0.0) return PointKind::Sink;
    if (r0 > 0.0 && r1 > 0.0) return PointKind::Source;
    if (r0 * r1 < 0.0) return PointKind::Saddle;
    return PointKind::Degenerate;
}

ZFixedPoints fixed_points(const ZSystem& zs) {
    zs.validate();
    if (!zs.five_point_regime()) throw RegimeError("outside the five-fixed-point regime");
    const double dh = zs.delta_hat(), lh = zs.lambda_hat(), gh = zs.gamma_hat();
    const double c = std::sqrt(1.0 - dh * dh);
    ZFixedPoints fp;
    fp.R_plus = std::sqrt((-lh + c) / gh);
    fp.R_minus = std::sqrt((-lh - c) / gh);
    const double ap = 0.5 * kPi - 0.5 * std::asin(dh);
    const double am = 0.5 * std::asin(dh);
    fp.z0 = Vec2::Zero();
    fp.zp0 = fp.R_plus * Vec2(std::cos(ap), std::sin(ap));
    fp.zppi = -fp.zp0;
    fp.zm0 = fp.R_minus * Vec2(std::cos(am), std::sin(am));
    fp.zmpi = -fp.zm0;
    const auto pts = fp.all();
    for (int i = 0; i < 5; ++i) fp.kinds[i] = classify_point(zs, pts[i]);
    return fp;
}

double SolutionBranch::q1(double nu, double t) const {
    return constant + amplitude * std::cos(0.5 * nu * t + phase) - corrector * std::cos(nu * t);
}

double SolutionBranch::q2(double nu, double t) const {
    return -0.5 * nu * amplitude * std::sin(0.5 * nu * t + phase) + nu * corrector * std::sin(nu * t);
}

std::vector<SolutionBranch> solution_branches(const ZSystem& zs, double eps) {
    if (!(eps > 0.0 && eps < 1.0)) throw DomainError("eps must lie in (0,1)");
    const ZFixedPoints fp = fixed_points(zs);
    const double base = std::sqrt(zs.mu / zs.gamma);
    const double corr = eps * zs.eta * zs.mu * base / (zs.nu * zs.nu - 2.0 * zs.mu);
    const double se = std::sqrt(eps);
    const double thp = -std::atan2(fp.zp0(1), fp.zp0(0));
    const double thm = -std::atan2(fp.zm0(1), fp.zm0(0));
    return {
        {"z0", base, 0.0, 0.0, corr, true},
        {"z+0", base, se * fp.R_plus, thp, corr, true},
        {"z+pi", base, se * fp.R_plus, thp + kPi, corr, true},
        {"z-0", base, se * fp.R_minus, thm, corr, false},
        {"z-pi", base, se * fp.R_minus, thm + kPi, corr, false},
    };
}

Vec2 raw_to_z(const ZSystem& zs, double eps, double t, double q1, double q2) {
    const double C = zs.eta * zs.mu * std::sqrt(zs.mu / zs.gamma) / (zs.nu * zs.nu - 2.0 * zs.mu);
    const double se = std::sqrt(eps);
    const double x1 = q1 - std::sqrt(zs.mu / zs.gamma), x2 = q2;
    const double v1 = (x1 + eps * C * std::cos(zs.nu * t)) / se;
    const double v2 = (x2 - eps * C * zs.nu * std::sin(zs.nu * t)) / (se * std::sqrt(2.0 * zs.mu));
    const double k = se * std::sqrt(zs.gamma / (4.0 * zs.mu));
    const Vec2 y(v1 + k * (v1 * v1 + 2.0 * v2 * v2), v2 - k * 2.0 * v1 * v2);
    return rotation(zs.nu, -t) * y;
}

ZPath simulate_z(const ZSystem& zs, double eps, double kappa, const Vec2& z0, double dt, std::uint64_t seed,
                 double t_max, ZMode mode, std::uint64_t path_index, int record_stride) {
    zs.validate();
    if (!(eps > 0.0 && eps < 1.0)) throw DomainError("eps must lie in (0,1)");
    if (!(dt > 0.0) || !(t_max > 0.0)) throw DomainError("dt and t_max must be positive");
    if (record_stride <= 0) throw DomainError("record_stride must be positive");
    const bool osc = mode == ZMode::Oscillatory;
    if (osc && dt > 2.0 * kPi * eps / (64.0 * zs.nu)) throw DomainError("dt must resolve the fast rotation");

    const double ek = std::pow(eps, kappa - 1.0);
    const double noise = osc ? ek * zs.sigma / std::sqrt(2.0 * zs.mu) : ek * zs.sigma / std::sqrt(4.0 * zs.mu);
    const double fast = zs.eta * std::sqrt(2.0 * zs.mu);

    auto drift = [&](double t, const Vec2& z) -> Vec2 {
        if (!osc) return averaged_drift(zs, z);
        const Mat2 R = rotation(zs.nu, t / eps), Ri = rotation(zs.nu, -t / eps);
        Mat2 C;
        C << 0.0, 0.0, fast * std::cos(zs.nu * t / eps), -zs.delta;
        return Ri * C * R * z + (-zs.a() * z.squaredNorm() - zs.b()) * rot(z);
    };

    PathRng rng(seed, path_index);
    ZPath path;
    Vec2 z = z0;
    path.t.push_back(0.0);
    path.z.push_back(z);
    const long nsteps = static_cast<long>(std::ceil(t_max / dt - 1e-9));
    const double sq = std::sqrt(dt);
    for (long k = 0; k < nsteps; ++k) {
        const double t = k * dt;
        if (noise == 0.0) {
            const Vec2 k1 = drift(t, z);
            const Vec2 k2 = drift(t + 0.5 * dt, z + 0.5 * dt * k1);
            const Vec2 k3 = drift(t + 0.5 * dt, z + 0.5 * dt * k2);
            const Vec2 k4 = drift(t + dt, z + dt * k3);
            z += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        } else if (osc) {
            const Vec2 dir = rotation(zs.nu, -t / eps) * Vec2(0.0, 1.0);
            z += drift(t, z) * dt + noise * sq * rng.normal() * dir;
        } else {
            const double w1 = rng.normal(), w2 = rng.normal();
            z += drift(t, z) * dt + noise * sq * Vec2(w1, w2);
        }
        if (!(z.norm() <= 1e3)) throw NumericalError("z simulation diverged");
        if ((k + 1) % record_stride == 0 || k + 1 == nsteps) {
            path.t.push_back((k + 1) * dt);
            path.z.push_back(z);
        }
    }
    return path;
}

int basin_of(const ZSystem& zs, const Vec2& z0, double t_max) {
    const ZFixedPoints fp = fixed_points(zs);
    const std::array<Vec2, 3> att{fp.z0, fp.zp0, fp.zppi};
    const double dt = 0.01 / std::max(1.0, zs.P() + zs.a() * fp.R_plus * fp.R_plus + std::abs(zs.b()));
    Vec2 z = z0;
    for (double t = 0.0; t < t_max; t += dt) {
        for (int i = 0; i < 3; ++i)
            if ((z - att[i]).norm() < 1e-6) return i;
        const Vec2 k1 = averaged_drift(zs, z);
        const Vec2 k2 = averaged_drift(zs, z + 0.5 * dt * k1);
        const Vec2 k3 = averaged_drift(zs, z + 0.5 * dt * k2);
        const Vec2 k4 = averaged_drift(zs, z + dt * k3);
        z += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!(z.norm() <= 1e3)) return -1;
    }
    return -1;
}

}  // namespace reslab
