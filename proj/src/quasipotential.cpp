#include "reslab/quasipotential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/tools/minima.hpp>

#include "reslab/parallel.hpp"

namespace reslab {

namespace {

constexpr double kPi = std::numbers::pi;

struct State {
    Vec2 z, p;
    double V;
};

State deriv(const ZSystem& zs, double D, const State& s) {
    const Mat2 J = drift_jacobian(zs, s.z);
    return {averaged_drift(zs, s.z) + s.p, -J.transpose() * s.p, s.p.squaredNorm() / (2.0 * D)};
}

State axpy(const State& s, double h, const State& k) { return {s.z + h * k.z, s.p + h * k.p, s.V + h * k.V}; }

double unit_scale(const ZSystem& zs) { return zs.P() / (zs.diffusion() * zs.gamma_hat()); }

}  // namespace

LinearBlocks c8_blocks(const ZSystem& zs, const Vec2& z_star) {
    const double c = c_param(zs, z_star), P = zs.P(), d = 0.5 * zs.delta;
    LinearBlocks b;
    b.M << -d, c + P, -c + P, -d;
    b.N << d, c - P, -c - P, d;
    return b;
}

Mat2 solve_unit_sylvester(const Mat2& M, const Mat2& N) {
    const Mat2 I = Mat2::Identity();
    Eigen::Matrix4d K;
    // vec(M U) = (I x M) vec U, vec(U N) = (N^T x I) vec U
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            K.block<2, 2>(2 * i, 2 * j) = I(i, j) * M - N(j, i) * I;
        }
    const Eigen::Vector4d rhs(-1.0, 0.0, 0.0, -1.0);
    Eigen::FullPivLU<Eigen::Matrix4d> lu(K);
    const double scale = std::max({1.0, M.norm(), N.norm()});
    if (!lu.isInvertible() || std::abs(lu.determinant()) < 1e-12 * std::pow(scale, 4))
        throw NumericalError("singular Sylvester system: spectra of M and N intersect");
    const Eigen::Vector4d u = lu.solve(rhs);
    Mat2 U;
    U << u(0), u(2), u(1), u(3);
    return U;
}

double HamiltonianBVP::sylvester_residual() const { return (Mat2::Identity() + M * U - U * N).norm(); }

HamiltonianBVP build_bvp(const ZSystem& zs, int domain) {
    if (domain < 0 || domain > 2) throw DomainError("domain index must be 0, 1 or 2");
    if (!(zs.sigma > 0.0)) throw DomainError("quasipotential needs sigma > 0");
    const ZFixedPoints fp = fixed_points(zs);
    HamiltonianBVP b;
    b.zs = zs;
    b.domain = domain;
    b.z_star = domain == 0 ? fp.z0 : domain == 1 ? fp.zp0 : fp.zppi;
    b.c = c_param(zs, b.z_star);
    b.D = zs.diffusion();
    // full linearization; at the origin it coincides with c8_blocks
    b.M = drift_jacobian(zs, b.z_star);
    b.N = -b.M.transpose();
    b.U = solve_unit_sylvester(b.M, b.N);
    b.U_inv = b.U.inverse();
    b.targets = {fp.zm0, fp.zmpi};
    return b;
}

double bvp_hamiltonian(const ZSystem& zs, const Vec2& z, const Vec2& p) {
    return p.dot(averaged_drift(zs, z)) + 0.5 * p.squaredNorm();
}

const char* shot_end_name(ShotEnd e) {
    switch (e) {
        case ShotEnd::HitSaddle: return "hit_saddle";
        case ShotEnd::LeftDomain: return "left_domain";
        case ShotEnd::Stalled: return "stalled";
        default: return "time_cap";
    }
}

ShotTrajectory shoot_from(const HamiltonianBVP& bvp, const Vec2& z0, const Vec2& p0, double V0,
                          const ShotOptions& opt) {
    const ZSystem& zs = bvp.zs;
    const double D = bvp.D;
    const ZFixedPoints fp = fixed_points(zs);
    const double box = 2.0 * std::max(1.0, fp.R_plus);
    const double V_cap = opt.V_cap > 0.0 ? opt.V_cap : 30.0 * unit_scale(zs);
    const double hit = 1e-3 * std::max(1.0, fp.R_minus);
    const double dt = opt.dt;

    ShotTrajectory out;
    State s{z0, p0, V0};
    auto record = [&](double t) { out.samples.push_back({t, s.z, s.p, s.V}); };
    auto closest = [&](const State& st, double& d, int& idx) {
        d = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < bvp.targets.size(); ++i) {
            const double di = (st.z - bvp.targets[i]).norm();
            if (di < d) {
                d = di;
                idx = static_cast<int>(i);
            }
        }
    };
    auto take = [&](double d, int idx) {
        out.closest = d;
        out.target = idx;
        out.V_closest = s.V;
        out.V_saddle = s.V + 0.5 * s.p.dot(bvp.targets[idx] - s.z) / D;
    };
    double d0;
    int i0 = 0;
    closest(s, d0, i0);
    take(d0, i0);
    if (opt.record_stride > 0) record(0.0);

    double prev_d = d0, slow_since = -1.0;
    const long nsteps = static_cast<long>(std::ceil(opt.t_max / dt - 1e-9));
    long k = 0;
    for (; k < nsteps; ++k) {
        const State k1 = deriv(zs, D, s);
        const State k2 = deriv(zs, D, axpy(s, 0.5 * dt, k1));
        const State k3 = deriv(zs, D, axpy(s, 0.5 * dt, k2));
        const State k4 = deriv(zs, D, axpy(s, dt, k3));
        const double Vold = s.V;
        s.z += dt / 6.0 * (k1.z + 2.0 * k2.z + 2.0 * k3.z + k4.z);
        s.p += dt / 6.0 * (k1.p + 2.0 * k2.p + 2.0 * k3.p + k4.p);
        s.V += dt / 6.0 * (k1.V + 2.0 * k2.V + 2.0 * k3.V + k4.V);
        if (s.V < Vold) out.V_monotone = false;

        const Vec2 b = averaged_drift(zs, s.z);
        double pb = s.p.dot(b);
        const double pp = s.p.squaredNorm();
        out.max_H_drift = std::max(out.max_H_drift, std::abs(pb + 0.5 * pp) / dt);
        double scale = 1.0;
        if (opt.project && pp > 0.0) {
            // nonzero root of H(z, a p) = a p.B + a^2 |p|^2 / 2
            const double a = -2.0 * pb / pp;
            if (a > 0.5 && a < 1.5) {
                s.p *= a;
                scale = a;
            }
        }
        pb *= scale;
        out.max_H = std::max(out.max_H, std::abs(pb + 0.5 * pp * scale * scale));
        const double t = (k + 1) * dt;
        if (opt.record_stride > 0 && (k + 1) % opt.record_stride == 0) record(t);

        double d;
        int idx = 0;
        closest(s, d, idx);
        if (d < out.closest) take(d, idx);
        if (out.closest < hit && d > prev_d) {
            out.reason = ShotEnd::HitSaddle;
            break;
        }
        prev_d = d;
        if (!(s.z.norm() <= box) || !(s.V <= V_cap)) {
            out.reason = ShotEnd::LeftDomain;
            break;
        }
        const double speed = (b + s.p).norm();
        if (speed < 1e-10) {
            if (slow_since < 0.0) slow_since = t;
            if (t - slow_since > 1.0) {
                out.reason = ShotEnd::Stalled;
                break;
            }
        } else {
            slow_since = -1.0;
        }
    }
    out.t_end = std::min(k + 1, nsteps) * dt;
    if (opt.record_stride > 0 && (out.samples.empty() || out.samples.back().t != out.t_end)) record(out.t_end);
    return out;
}

ShotTrajectory shoot(const HamiltonianBVP& bvp, double phi0, const ShotOptions& opt) {
    const double r0 = opt.r0 > 0.0 ? opt.r0 : 1e-4 * std::max(1.0, bvp.z_star.norm());
    // angles measured from the direction of z*, so the z+pi fan mirrors the z+0 fan exactly
    Vec2 dz = r0 * Vec2(std::cos(phi0), std::sin(phi0));
    if (bvp.z_star.norm() > 0.0) {
        const Vec2 e = bvp.z_star.normalized();
        dz = r0 * (std::cos(phi0) * e + std::sin(phi0) * Vec2(-e(1), e(0)));
    }
    const Vec2 p = bvp.U_inv * dz;
    return shoot_from(bvp, bvp.z_star + dz, p, 0.5 * dz.dot(p) / bvp.D, opt);
}

SaddleResult quasipotential_at_saddle(const ZSystem& zs, int domain, const FanOptions& opt) {
    const HamiltonianBVP bvp = build_bvp(zs, domain);
    const ZFixedPoints fp = fixed_points(zs);
    const double len = std::max(1.0, fp.R_minus);
    const int threads = resolve_threads(opt.threads);

    SaddleResult best;
    best.r0 = opt.shot.r0 > 0.0 ? opt.shot.r0 : 1e-4 * std::max(1.0, bvp.z_star.norm());
    double prev_V = std::numeric_limits<double>::quiet_NaN();
    bool found = false;
    double closest_any = std::numeric_limits<double>::infinity();
    for (int level = 0; level < opt.max_levels; ++level) {
        const int n = opt.n_angles << level;
        const double h = 2.0 * kPi / n;
        ShotOptions so = opt.shot;
        // shots costlier than twice the current estimate cannot improve it
        if (found) so.V_cap = 2.0 * prev_V + 0.1 * unit_scale(zs);
        std::vector<ShotTrajectory> fan(n);
        parallel_for(n, threads, [&](std::size_t i) { fan[i] = shoot(bvp, h * i, so); });
        best.shots += n;

        std::vector<int> cand;
        for (int i = 0; i < n; ++i) {
            const double d = fan[i].closest;
            if (d <= fan[(i + n - 1) % n].closest && d <= fan[(i + 1) % n].closest && d < 0.25 * len)
                cand.push_back(i);
        }
        std::stable_sort(cand.begin(), cand.end(), [&](int a, int b) { return fan[a].closest < fan[b].closest; });
        if (static_cast<int>(cand.size()) > opt.candidates) cand.resize(opt.candidates);

        std::vector<ShotTrajectory> refined(cand.size());
        std::vector<double> phis(cand.size());
        parallel_for(cand.size(), threads, [&](std::size_t j) {
            const double c = h * cand[j];
            auto f = [&](double phi) { return shoot(bvp, phi, so).closest; };
            std::uintmax_t iters = 200;
            const auto r = boost::math::tools::brent_find_minima(f, c - h, c + h, 48, iters);
            phis[j] = r.first;
            refined[j] = shoot(bvp, r.first, so);
        });

        SaddleResult lvl;
        bool hit = false;
        for (std::size_t j = 0; j < refined.size(); ++j) {
            const ShotTrajectory& s = refined[j];
            closest_any = std::min(closest_any, s.closest);
            if (s.closest >= opt.accept * len) continue;
            if (!hit || s.V_saddle < lvl.V) {
                lvl.V = s.V_saddle;
                lvl.phi = phis[j];
                lvl.closest = s.closest;
                lvl.target = s.target;
                lvl.max_H = s.max_H;
                lvl.max_H_drift = s.max_H_drift;
                lvl.V_monotone = s.V_monotone;
                hit = true;
            }
        }
        best.levels = level + 1;
        if (!hit) continue;
        lvl.shots = best.shots;
        lvl.levels = best.levels;
        lvl.r0 = best.r0;
        const bool converged = found && std::abs(lvl.V - prev_V) < opt.converge;
        best = lvl;
        found = true;
        if (converged || level + 1 == opt.max_levels) break;
        prev_V = lvl.V;
    }
    if (!found)
        throw NumericalError("no fan member reached the saddle (closest " + std::to_string(closest_any) + ")");
    return best;
}

R0Sensitivity r0_sensitivity(const ZSystem& zs, int domain, const FanOptions& opt) {
    R0Sensitivity out;
    out.base = quasipotential_at_saddle(zs, domain, opt);
    FanOptions fine = opt;
    fine.shot.r0 = out.base.r0 / 10.0;
    out.fine = quasipotential_at_saddle(zs, domain, fine);
    out.delta = std::abs(out.fine.V - out.base.V);
    return out;
}

}  // namespace reslab
