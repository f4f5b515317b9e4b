#pragma once

#include <cstdint>
#include <vector>

#include "reslab/resonance_zone.hpp"

namespace reslab {

struct SimConfig {
    PhysicalParams params;
    double dt = 1e-3;
    double t_max = 1.0;
    std::uint64_t seed = 1;
    int n_paths = 1;
    int record_stride = 1;
    int threads = 1;

    void validate() const;
};

struct RawSample {
    double t, q1, q2, H, I, phi;  // I, phi are NaN when undefined
};

struct RawPath {
    std::vector<RawSample> samples;
};

// Scaled Duffing system with noise eps^kappa sigma dW on q2. RK4 when the noise
// term is exactly zero. derive_action adds (I, phi) via the mu=gamma=1 formulas.
RawPath simulate_raw(const SimConfig& cfg, OrbitPoint q0, std::uint64_t path_index = 0, bool derive_action = false);

// Orbit quantities on the resonant level, tabulated in phi for fast evaluation.
class ResonantOrbitTable {
public:
    explicit ResonantOrbitTable(const ResonanceSpec& spec, int nodes = 4096);

    struct Fields {
        double F;      // perturbation of I
        double dF_dI;
        double G;      // perturbation of phi
        double dI_dq2; // q2 / Omega
    };
    Fields eval(const PendulumSystem& ps, double phi, double theta) const;

private:
    double interp(const std::vector<double>& v, double phi) const;
    const ResonanceSpec spec_;
    int N_;
    std::vector<double> q1_, q2_, dq1_, dq2_;
};

enum class TimeScale { SqrtEps, Eps };

struct LocalizedState {
    double h = 0.0;
    double psi_hat = 0.0;
    double theta = 0.0;  // reduced mod 2 m pi
    double HcalH = 0.0;
};

struct LocalizedPath {
    std::vector<double> t;
    std::vector<LocalizedState> states;
    bool validity_warning = false;
};

LocalizedState make_localized_state(const PendulumSystem& ps, double psi_hat, double h, double theta = 0.0);

// Truncated localized equations. observer(t, state) may return false to stop early.
LocalizedPath simulate_localized(const SimConfig& cfg, const PendulumSystem& ps, const ResonantOrbitTable& table,
                                 LocalizedState state0, TimeScale scale, std::uint64_t path_index = 0);

// Trap-region bookkeeping for the pendulum cell containing psi.
struct TrapGeometry {
    double psi_lo, psi_hi;  // psi-extent of the closed-orbit region in the reference cell
    double cell;            // 2 pi n/m
};
TrapGeometry trap_geometry(const PendulumSystem& ps);
// |H - H_sk| after shifting psi into the reference cell, and whether (psi, h) is in the trap.
bool in_trap(const PendulumSystem& ps, const TrapGeometry& tg, double psi, double h, double* offset = nullptr);

struct CaptureResult {
    double fraction;
    int captured;
    int total;
};
// Ensemble (psi_j, h0), psi_j spread over one cell; captured = inside the trap
// for at least 3 small-oscillation periods.
CaptureResult capture_fraction(const SimConfig& cfg, const PendulumSystem& ps, double h0);

struct ExitTimeMC {
    double mean;
    double stderr_;
    int censored;
    int n;
    std::vector<double> times;
    std::vector<double> hist_edges;
    std::vector<int> hist_counts;
    bool censoring_warning;
};
// Localized system on the eps time scale, started at the center; exit when the
// energy crosses H_sd.
ExitTimeMC exit_time_mc(const SimConfig& cfg, const PendulumSystem& ps, int bins = 20);

// Statistics helper shared with the averaged simulation.
ExitTimeMC summarize_exit_times(const std::vector<double>& times, const std::vector<char>& exited, int bins);

}  // namespace reslab
