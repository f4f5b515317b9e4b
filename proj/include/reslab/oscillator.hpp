#pragma once

#include "reslab/elliptic.hpp"
#include "reslab/jet.hpp"

namespace reslab {

// Scaled Duffing parameters. The action-angle formulas below assume mu = gamma = 1.
struct PhysicalParams {
    double mu = 1.0;
    double gamma = 1.0;
    double delta = 0.0;
    double alpha = 0.0;
    double eta = 0.0;
    double nu = 1.0;
    double sigma = 0.0;
    double eps = 0.01;
    double kappa = 1.0;

    void validate() const;
};

enum class Side { InsideWell, OutsideHomoclinic };

const char* side_name(Side s);

struct EnergyLevel {
    double H = -0.25;
    Side side = Side::InsideWell;
    EllipticModulus k;
};

struct ActionAngle {
    double I = 0.0;
    double phi = 0.0;
    Side side = Side::InsideWell;
    bool left_well = false;  // inside only: image under (q1,q2) -> (-q1,-q2)
};

struct OrbitPoint {
    double q1 = 0.0;
    double q2 = 0.0;
};

constexpr double kHomoclinicGuard = 1e-8;

double hamiltonian(double q1, double q2);

// H as a function of the modulus on each branch.
double H_of_k(const EllipticModulus& k, Side side);

EnergyLevel level_from_H(double H, Side side);
EnergyLevel level_from_k(const EllipticModulus& k, Side side);
EnergyLevel level_from_I(double I, Side side);

double frequency(const EnergyLevel& level);
double action(const EnergyLevel& level);

// Omega and I as jets in the parameter m = k^2 at the given level.
struct BranchJets {
    Jet m;
    Jet k;
    Jet kc;
    Jet K;
    Jet E;
    Jet Omega;
    Jet I;
};
BranchJets branch_jets(const EnergyLevel& level);

// Omega'(I) and Omega''(I) at the level.
struct FrequencyDerivs {
    double Omega;
    double dOmega_dI;
    double d2Omega_dI2;
};
FrequencyDerivs frequency_derivs(const EnergyLevel& level);

OrbitPoint to_phase(const EnergyLevel& level, double phi, bool left_well = false);
OrbitPoint to_phase(const ActionAngle& aa);
ActionAngle from_phase(double q1, double q2, Side side);

// d(q1,q2)/dI at fixed phi (central differences in the modulus).
OrbitPoint dq_dI(const EnergyLevel& level, double phi);

// Unperturbed vector field (q2, q1 - q1^3).
OrbitPoint unperturbed_rhs(const OrbitPoint& q);

}  // namespace reslab
