#pragma once

#include "reslab/oscillator.hpp"

namespace reslab {

struct ResonanceSpec {
    int m = 1;
    int n = 1;
    double nu = 1.0;
    EnergyLevel level;
    double I_r = 0.0;
    double Omega_r = 0.0;
    double dOmega_dI = 0.0;
    double d2Omega_dI2 = 0.0;
    double J_eta = 0.0;
    double J_alpha = 0.0;
    double dJ_eta_dI = 0.0;
    double dJ_alpha_dI = 0.0;

    double ratio() const { return static_cast<double>(n) / m; }  // n/m
};

// J^eta, J^alpha and their I-derivatives at a level, for the m:n indicator.
struct ForcingCoeffs {
    double J_eta, J_alpha, dJ_eta_dI, dJ_alpha_dI;
};
ForcingCoeffs forcing_coeffs(const EnergyLevel& level, int m, int n);

ResonanceSpec find_resonance(int m, int n, double nu, Side side);

struct PendulumSystem {
    ResonanceSpec spec;
    double delta = 0.0;
    double eta = 0.0;
    double alpha = 0.0;
    double sigma = 0.0;
    double J_r = 0.0;
    double dJ_r = 0.0;
    double Psi_star = 0.0;
    double psi_saddle = 0.0;
    double psi_center = 0.0;
    double H_sd = 0.0;
    double H_sk = 0.0;
    double chi = 0.0;

    // 2 delta Omega_r / (sigma^2 Omega'_r I_r)
    double lambda() const;
    // Omega'_r J_r (m/n) cos(m psi_sk/n); negative at the center
    double curvature_at_center() const;
};

PendulumSystem build_pendulum(const ResonanceSpec& spec, double delta, double eta, double alpha, double sigma);

double averaged_F(const PendulumSystem& ps, double psi);
double averaged_G(const PendulumSystem& ps, double psi);
double pendulum_H(const PendulumSystem& ps, double psi, double h);

struct FixedPointPair {
    double psi_saddle;
    double psi_center;
};
FixedPointPair classify_fixed_points(const PendulumSystem& ps);

double escape_measure(const PendulumSystem& ps);

// Unaveraged perturbation terms at (I_r, phi, theta).
double raw_F(const PendulumSystem& ps, double phi, double theta);
double raw_G(const PendulumSystem& ps, double phi, double theta);
// theta-average of raw_F over [0, 2 m pi] along phi = psi + n theta/m (trapezoid, periodic)
double quadrature_averaged_F(const PendulumSystem& ps, double psi, int nodes = 512);

}  // namespace reslab
