#pragma once

#include <random>

#include "reslab/resonance_zone.hpp"

namespace fixture {

// 1:1 inside-well resonance at nu = 1 with |chi| = 0.5.
inline reslab::PendulumSystem inside_11(double sigma = 0.1, double chi = 0.5) {
    const reslab::ResonanceSpec s = reslab::find_resonance(1, 1, 1.0, reslab::Side::InsideWell);
    const double J = 0.1 * s.J_eta + 0.1 * s.J_alpha;
    return reslab::build_pendulum(s, chi * std::abs(J) / s.I_r, 0.1, 0.1, sigma);
}

struct Draw {
    int m, n;
    reslab::Side side;
    double nu_lo, nu_hi;
};

// Random valid pendulum drawn over several resonances, both branches and both signs of J_r.
inline reslab::PendulumSystem random_system(std::mt19937_64& rng) {
    using reslab::Side;
    static const Draw draws[] = {
        {1, 1, Side::InsideWell, 0.5, 1.35},  {2, 1, Side::InsideWell, 1.0, 2.7},
        {3, 1, Side::InsideWell, 1.5, 4.0},  {2, 1, Side::OutsideHomoclinic, 0.6, 3.0},
        {1, 1, Side::OutsideHomoclinic, 0.4, 2.0},
    };
    std::uniform_int_distribution<int> pick(0, 4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const Draw& d = draws[pick(rng)];
    const double nu = d.nu_lo + (d.nu_hi - d.nu_lo) * u(rng);
    const reslab::ResonanceSpec s = reslab::find_resonance(d.m, d.n, nu, d.side);
    const double eta = (u(rng) < 0.5 ? -1.0 : 1.0) * (0.05 + 0.3 * u(rng));
    const double alpha = (u(rng) < 0.5 ? -1.0 : 1.0) * (0.05 + 0.3 * u(rng));
    const double J = eta * s.J_eta + alpha * s.J_alpha;
    const double chi = 0.05 + 0.9 * u(rng);
    return reslab::build_pendulum(s, chi * std::abs(J) / s.I_r, eta, alpha, 0.05 + 0.3 * u(rng));
}

}  // namespace fixture
