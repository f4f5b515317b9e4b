#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "reslab/errors.hpp"

namespace reslab {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

// 2:1 resonance at the bottom of the right well, in the slow rotating frame z.
struct ZSystem {
    double mu = 1.0;
    double gamma = 1.0;
    double delta = 0.0;
    double eta = 0.0;
    double lambda = 0.0;  // detuning
    double sigma = 0.0;
    double nu = 0.0;      // forcing frequency, 2 sqrt(2 mu)(1 + eps lambda)

    static ZSystem make(double mu, double gamma, double delta, double eta, double lambda, double sigma, double eps);
    // Rescaled parameters with nu = 2 sqrt(2 mu).
    static ZSystem from_hat(double mu, double eta, double delta_hat, double lambda_hat, double gamma_hat,
                            double sigma);

    double P() const;          // eta sqrt(2 mu) / 4
    double a() const;          // 3 gamma / (4 mu)
    double b() const;          // nu lambda / 2
    double delta_hat() const;
    double lambda_hat() const;
    double gamma_hat() const;
    double diffusion() const;  // sigma^2 / (4 mu)
    bool five_point_regime() const;
    void validate() const;
};

Vec2 averaged_drift(const ZSystem& zs, const Vec2& z);
// Same field written through (delta_hat, lambda_hat, gamma_hat) and the prefactor P.
Vec2 averaged_drift_rescaled(const ZSystem& zs, const Vec2& z);
Mat2 drift_jacobian(const ZSystem& zs, const Vec2& z);
// -(3 gamma / 4 mu)|z*|^2 - nu lambda / 2
double c_param(const ZSystem& zs, const Vec2& z_star);

enum class PointKind { Sink, Saddle, Source, Degenerate };
const char* point_kind_name(PointKind k);
PointKind classify_point(const ZSystem& zs, const Vec2& z);

struct ZFixedPoints {
    Vec2 z0, zp0, zppi, zm0, zmpi;
    double R_plus = 0.0, R_minus = 0.0;
    std::array<PointKind, 5> kinds{};  // order z0, zp0, zppi, zm0, zmpi
    std::array<Vec2, 5> all() const { return {z0, zp0, zppi, zm0, zmpi}; }
};
ZFixedPoints fixed_points(const ZSystem& zs);

struct SolutionBranch {
    std::string name;     // z0, z+0, z+pi, z-0, z-pi
    double constant;      // sqrt(mu/gamma)
    double amplitude;     // sqrt(eps) R
    double phase;
    double corrector;     // q1 contains -corrector * cos(nu t)
    bool stable;
    double q1(double nu, double t) const;
    double q2(double nu, double t) const;
};
std::vector<SolutionBranch> solution_branches(const ZSystem& zs, double eps);

// Coordinate chain from the raw state at raw time t to the slow frame z (slow time eps t).
Vec2 raw_to_z(const ZSystem& zs, double eps, double t, double q1, double q2);

enum class ZMode { Oscillatory, Averaged };
struct ZPath {
    std::vector<double> t;
    std::vector<Vec2> z;
};
// (a) Oscillatory: rotating-frame equation with a single Wiener process on the velocity.
// (b) Averaged: dz = B(z) dt + eps^{kappa-1} sigma / sqrt(4 mu) dW, W two-dimensional.
ZPath simulate_z(const ZSystem& zs, double eps, double kappa, const Vec2& z0, double dt, std::uint64_t seed,
                 double t_max, ZMode mode, std::uint64_t path_index = 0, int record_stride = 1);

// Attractor reached by the deterministic flow: 0 for z0, 1 for z+0, 2 for z+pi, -1 if undecided.
int basin_of(const ZSystem& zs, const Vec2& z, double t_max = 2000.0);

}  // namespace reslab
