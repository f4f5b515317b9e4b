#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "reslab/resonance_zone.hpp"

namespace reslab {

// |h_level - H_sk| and |H_sd - H_sk|; the orbit exists for 0 < ell < D.
double level_offset(const PendulumSystem& ps, double h_level);
double barrier_height(const PendulumSystem& ps);

// Equal-time samples over one period of the closed pendulum orbit at h_level.
struct OrbitSamples {
    double h_level = 0.0;
    double period = 0.0;
    std::vector<double> psi;
    std::vector<double> h;
};
OrbitSamples sample_orbit(const PendulumSystem& ps, double h_level, int nodes = 2048);

// Small-oscillation period at the center.
double center_period(const PendulumSystem& ps);

double orbit_average(const PendulumSystem& ps, double h_level, const std::function<double(double, double)>& f,
                     int nodes = 2048);
double orbit_average(const OrbitSamples& orbit, const std::function<double(double, double)>& f);

struct OrbitAverage {
    double h_level;
    double period;
    double mean_h2;  // g
};
OrbitAverage orbit_g(const PendulumSystem& ps, double h_level, int nodes = 2048);

struct IbpCheck {
    double lhs1, rhs1, lhs2, rhs2;
};
IbpCheck ibp_identities_check(const PendulumSystem& ps, double h_level);

struct B1Check {
    double B1;
    double B2;
};
// Direct evaluation of the first drift term from its theta/orbit double average.
B1Check verify_B1_zero(const PendulumSystem& ps, double h_level, int theta_nodes = 256, int psi_nodes = 64);

// g, drift and diffusion of the averaged pendulum energy, tabulated once.
class AveragedCoeffs {
public:
    AveragedCoeffs(const PendulumSystem& ps, int table_size = 160);

    // g as a function of ell = |h - H_sk| in [0, D]
    double g_of_offset(double ell) const;
    double g(double h_level) const;
    double B(double h_level) const;  // = B2; B1 vanishes identically
    double B_sigma() const { return B_sigma_; }
    double Xi(double h_level) const;
    double max_Xi() const { return max_Xi_; }
    double offset_max() const { return D_; }
    // |Omega'| g / ell, smooth on [0, D) with value 1 at 0
    double q_ratio(double ell) const;

    const PendulumSystem& system() const { return ps_; }

private:
    PendulumSystem ps_;
    double D_ = 0.0;
    double B_sigma_ = 0.0;
    double max_Xi_ = 0.0;
    std::vector<double> x_nodes_;  // ell / D
    std::shared_ptr<const std::function<double(double)>> q_interp_;
};

struct ExitTimeEstimate {
    double u;             // quadrature mean exit time (inf if it overflows a double)
    double log_u;
    double laplace;       // Laplace approximation
    double log_laplace;
    double scale;         // eps^{2(kappa-1)}
};
ExitTimeEstimate mean_exit_time(const AveragedCoeffs& ac, double h0, double eps, double kappa);

struct AveragedPath {
    std::vector<double> t;
    std::vector<double> H;
    bool exited = false;
    double exit_time = 0.0;
};
// Euler-Maruyama for the averaged energy; record_stride = 0 keeps only the endpoints.
AveragedPath simulate_averaged(const AveragedCoeffs& ac, double h0, double eps, double kappa, double dt,
                               std::uint64_t seed, double t_max, std::uint64_t path_index = 0,
                               int record_stride = 0);

}  // namespace reslab
