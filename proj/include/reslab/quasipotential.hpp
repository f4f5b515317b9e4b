#pragma once

#include <vector>

#include "reslab/bottom_well.hpp"

namespace reslab {

// Linearization of the Euler-Lagrange system at (z*, 0) and the map U with
// z - z* = U p on the unstable eigenspace.
struct HamiltonianBVP {
    ZSystem zs;
    int domain = 0;          // 0: K0 (origin), 1: K1 (z+0), 2: K2 (z+pi)
    Vec2 z_star;
    Mat2 M, N, U, U_inv;
    double c = 0.0;
    double D = 0.0;          // sigma^2 / (4 mu)
    std::vector<Vec2> targets;  // saddles on the domain boundary
    double sylvester_residual() const;
};

// Linear blocks written with c, delta and eta sqrt(2 mu)/4 only.
struct LinearBlocks {
    Mat2 M, N;
};
LinearBlocks c8_blocks(const ZSystem& zs, const Vec2& z_star);

// Solves I + M U - U N = 0 through the 4x4 vectorized system.
Mat2 solve_unit_sylvester(const Mat2& M, const Mat2& N);

HamiltonianBVP build_bvp(const ZSystem& zs, int domain);

double bvp_hamiltonian(const ZSystem& zs, const Vec2& z, const Vec2& p);

enum class ShotEnd { HitSaddle, LeftDomain, Stalled, TimeCap };
const char* shot_end_name(ShotEnd e);

struct ShotSample {
    double t;
    Vec2 z, p;
    double V;
};

struct ShotOptions {
    double dt = 4e-3;
    double t_max = 150.0;
    double r0 = 0.0;            // 0 selects 1e-4 max(1, |z*|)
    double V_cap = 0.0;         // 0 selects 30 in table units
    int record_stride = 0;      // 0 keeps no samples
    bool project = true;
};

struct ShotTrajectory {
    std::vector<ShotSample> samples;
    ShotEnd reason = ShotEnd::TimeCap;
    double closest = 0.0;       // distance of closest approach to a target saddle
    int target = -1;
    double V_closest = 0.0;     // V at the closest point
    double V_saddle = 0.0;      // V extrapolated to the saddle
    double max_H = 0.0;         // after projection
    double max_H_drift = 0.0;   // before projection, per unit time
    bool V_monotone = true;
    double t_end = 0.0;
};

// phi0 is measured from the direction of z* (from the first axis at the origin).
ShotTrajectory shoot(const HamiltonianBVP& bvp, double phi0, const ShotOptions& opt = {});
ShotTrajectory shoot_from(const HamiltonianBVP& bvp, const Vec2& z, const Vec2& p, double V0,
                          const ShotOptions& opt = {});

struct FanOptions {
    int n_angles = 720;
    int candidates = 12;
    int max_levels = 3;
    double accept = 0.1;      // closest-approach tolerance, relative to max(1, |saddle|)
    double converge = 1e-3;   // V change between fan levels
    int threads = 0;
    ShotOptions shot;
};

struct SaddleResult {
    double V = 0.0;
    double phi = 0.0;
    double closest = 0.0;
    int target = -1;
    int levels = 0;
    int shots = 0;
    double r0 = 0.0;
    double max_H = 0.0;
    double max_H_drift = 0.0;
    bool V_monotone = true;
};
// Minimum over the fan of the extrapolated V at the boundary saddle.
SaddleResult quasipotential_at_saddle(const ZSystem& zs, int domain, const FanOptions& opt = {});

struct R0Sensitivity {
    SaddleResult base, fine;
    double delta;
};
R0Sensitivity r0_sensitivity(const ZSystem& zs, int domain, const FanOptions& opt = {});

}  // namespace reslab
