#include "reslab/sdesim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "reslab/averaged_h.hpp"
#include "reslab/parallel.hpp"
#include "reslab/rng.hpp"

namespace reslab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double sgn(double x) { return x < 0.0 ? -1.0 : 1.0; }

double wrap(double x, double period) {
    double r = std::fmod(x, period);
    return r < 0.0 ? r + period : r;
}

}  // namespace

void SimConfig::validate() const {
    params.validate();
    if (!(dt > 0.0) || !(t_max > 0.0)) throw DomainError("dt and t_max must be positive");
    if (n_paths <= 0) throw DomainError("n_paths must be positive");
    if (record_stride <= 0) throw DomainError("record_stride must be positive");
}

RawPath simulate_raw(const SimConfig& cfg, OrbitPoint q0, std::uint64_t path_index, bool derive_action) {
    cfg.validate();
    const PhysicalParams& p = cfg.params;
    const double fastest = std::max(p.nu, std::sqrt(2.0 * p.mu));
    if (cfg.dt > 2.0 * kPi / (64.0 * fastest)) throw DomainError("dt must resolve 64 steps per fastest period");
    const double H0 = 0.5 * q0.q2 * q0.q2 - 0.5 * p.mu * q0.q1 * q0.q1 + 0.25 * p.gamma * std::pow(q0.q1, 4);
    if (std::abs(H0) < kHomoclinicGuard) throw DomainError("initial point inside the homoclinic guard band");

    const double e = p.eps;
    const double noise = std::pow(e, p.kappa) * p.sigma;
    auto rhs = [&](double t, const OrbitPoint& q) -> OrbitPoint {
        const double c = std::cos(p.nu * t);
        return {q.q2, p.mu * q.q1 - p.gamma * q.q1 * q.q1 * q.q1 +
                          e * (p.alpha * c + p.mu * p.eta * c * q.q1 - p.delta * q.q2)};
    };
    auto sample = [&](double t, const OrbitPoint& q) {
        RawSample s{t, q.q1, q.q2, 0.5 * q.q2 * q.q2 - 0.5 * p.mu * q.q1 * q.q1 + 0.25 * p.gamma * std::pow(q.q1, 4),
                    kNaN, kNaN};
        if (derive_action && p.mu == 1.0 && p.gamma == 1.0 && std::abs(s.H) >= kHomoclinicGuard && s.H > -0.25) {
            const ActionAngle aa = from_phase(q.q1, q.q2, s.H < 0.0 ? Side::InsideWell : Side::OutsideHomoclinic);
            s.I = aa.I;
            s.phi = aa.phi;
        }
        return s;
    };

    PathRng rng(cfg.seed, path_index);
    RawPath path;
    OrbitPoint q = q0;
    path.samples.push_back(sample(0.0, q));
    const long nsteps = static_cast<long>(std::ceil(cfg.t_max / cfg.dt - 1e-9));
    const double dt = cfg.dt;
    const double sq = std::sqrt(dt);
    for (long k = 0; k < nsteps; ++k) {
        const double t = k * dt;
        if (noise == 0.0) {
            const OrbitPoint k1 = rhs(t, q);
            const OrbitPoint k2 = rhs(t + 0.5 * dt, {q.q1 + 0.5 * dt * k1.q1, q.q2 + 0.5 * dt * k1.q2});
            const OrbitPoint k3 = rhs(t + 0.5 * dt, {q.q1 + 0.5 * dt * k2.q1, q.q2 + 0.5 * dt * k2.q2});
            const OrbitPoint k4 = rhs(t + dt, {q.q1 + dt * k3.q1, q.q2 + dt * k3.q2});
            q.q1 += dt / 6.0 * (k1.q1 + 2.0 * k2.q1 + 2.0 * k3.q1 + k4.q1);
            q.q2 += dt / 6.0 * (k1.q2 + 2.0 * k2.q2 + 2.0 * k3.q2 + k4.q2);
        } else {
            const OrbitPoint f = rhs(t, q);
            q.q1 += f.q1 * dt;
            q.q2 += f.q2 * dt + noise * sq * rng.normal();
        }
        if (!(std::abs(q.q1) <= 1e3 && std::abs(q.q2) <= 1e3)) throw NumericalError("raw simulation diverged");
        if ((k + 1) % cfg.record_stride == 0 || k + 1 == nsteps) path.samples.push_back(sample((k + 1) * dt, q));
    }
    return path;
}

ResonantOrbitTable::ResonantOrbitTable(const ResonanceSpec& spec, int nodes) : spec_(spec), N_(nodes) {
    if (nodes < 64) throw DomainError("orbit table needs at least 64 nodes");
    q1_.resize(N_);
    q2_.resize(N_);
    dq1_.resize(N_);
    dq2_.resize(N_);
    for (int i = 0; i < N_; ++i) {
        const double phi = 2.0 * kPi * i / N_;
        const OrbitPoint q = to_phase(spec.level, phi);
        const OrbitPoint d = dq_dI(spec.level, phi);
        q1_[i] = q.q1;
        q2_[i] = q.q2;
        dq1_[i] = d.q1;
        dq2_[i] = d.q2;
    }
}

double ResonantOrbitTable::interp(const std::vector<double>& v, double phi) const {
    const double x = wrap(phi, 2.0 * kPi) / (2.0 * kPi) * N_;
    int i = static_cast<int>(std::floor(x));
    const double t = x - i;
    auto at = [&](int j) { return v[((j % N_) + N_) % N_]; };
    const double wm = -t * (t - 1.0) * (t - 2.0) / 6.0;
    const double w0 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
    const double w1 = -(t + 1.0) * t * (t - 2.0) / 2.0;
    const double w2 = (t + 1.0) * t * (t - 1.0) / 6.0;
    return wm * at(i - 1) + w0 * at(i) + w1 * at(i + 1) + w2 * at(i + 2);
}

ResonantOrbitTable::Fields ResonantOrbitTable::eval(const PendulumSystem& ps, double phi, double theta) const {
    const double q1 = interp(q1_, phi), q2 = interp(q2_, phi);
    const double d1 = interp(dq1_, phi), d2 = interp(dq2_, phi);
    const double W = spec_.Omega_r, Wp = spec_.dOmega_dI;
    const double c = std::cos(theta);
    const double force = c * (ps.eta * q1 + ps.alpha) - ps.delta * q2;
    const double dIq2 = q2 / W;
    const double d_dIq2 = d2 / W - q2 * Wp / (W * W);
    return {dIq2 * force, d_dIq2 * force + dIq2 * (c * ps.eta * d1 - ps.delta * d2), -d1 * force, dIq2};
}

LocalizedState make_localized_state(const PendulumSystem& ps, double psi_hat, double h, double theta) {
    return {h, psi_hat, wrap(theta, 2.0 * kPi * ps.spec.m), pendulum_H(ps, psi_hat, h)};
}

namespace {

struct LocalCoefs {
    double a;       // multiplies F and Omega' h
    double b;       // multiplies F' h and the psi correction
    double noise;   // multiplies sigma dI/dq2
    double theta_rate;
};

LocalCoefs local_coefs(const PhysicalParams& p, double nu, TimeScale scale) {
    const double e = p.eps, se = std::sqrt(e);
    if (scale == TimeScale::Eps) return {1.0 / se, 1.0, std::pow(e, p.kappa - 1.0), nu / e};
    return {1.0, se, std::pow(e, p.kappa - 0.75), nu / se};
}

// Integrates the localized system; stop(t, state) returning true ends the path.
template <class Stop, class Record>
void integrate_localized(const SimConfig& cfg, const PendulumSystem& ps, const ResonantOrbitTable& table,
                         LocalizedState st, TimeScale scale, std::uint64_t path_index, Stop&& stop, Record&& record,
                         bool& warn) {
    cfg.validate();
    const ResonanceSpec& s = ps.spec;
    const LocalCoefs c = local_coefs(cfg.params, s.nu, scale);
    const double r = s.ratio();
    const double Wp = s.dOmega_dI, Wpp = s.d2Omega_dI2;
    const double sig = ps.sigma;
    const double hmax = std::pow(cfg.params.eps, -0.25);
    const double theta_period = 2.0 * kPi * s.m;
    const double theta0 = st.theta;
    const bool deterministic = sig == 0.0 || c.noise == 0.0;
    PathRng rng(cfg.seed, path_index);

    struct D2 {
        double h, psi;
    };
    auto rhs = [&](double t, double h, double psi) -> D2 {
        const double th = theta0 + c.theta_rate * t;
        const ResonantOrbitTable::Fields f = table.eval(ps, psi + r * th, th);
        return {c.a * f.F + c.b * f.dF_dI * h, c.a * Wp * h + c.b * (0.5 * Wpp * h * h + f.G)};
    };

    const double dt = cfg.dt;
    const double sq = std::sqrt(dt);
    const long nsteps = static_cast<long>(std::ceil(cfg.t_max / dt - 1e-9));
    record(0.0, st);
    if (stop(0.0, st)) return;
    double h = st.h, psi = st.psi_hat;
    for (long k = 0; k < nsteps; ++k) {
        const double t = k * dt;
        if (deterministic) {
            const D2 k1 = rhs(t, h, psi);
            const D2 k2 = rhs(t + 0.5 * dt, h + 0.5 * dt * k1.h, psi + 0.5 * dt * k1.psi);
            const D2 k3 = rhs(t + 0.5 * dt, h + 0.5 * dt * k2.h, psi + 0.5 * dt * k2.psi);
            const D2 k4 = rhs(t + dt, h + dt * k3.h, psi + dt * k3.psi);
            h += dt / 6.0 * (k1.h + 2.0 * k2.h + 2.0 * k3.h + k4.h);
            psi += dt / 6.0 * (k1.psi + 2.0 * k2.psi + 2.0 * k3.psi + k4.psi);
        } else {
            const double th = theta0 + c.theta_rate * t;
            const ResonantOrbitTable::Fields f = table.eval(ps, psi + r * th, th);
            const double dh = (c.a * f.F + c.b * f.dF_dI * h) * dt + c.noise * sig * f.dI_dq2 * sq * rng.normal();
            const double dpsi = (c.a * Wp * h + c.b * (0.5 * Wpp * h * h + f.G)) * dt;
            h += dh;
            psi += dpsi;
        }
        if (!std::isfinite(h) || !std::isfinite(psi)) throw NumericalError("localized simulation diverged");
        if (std::abs(h) > hmax) warn = true;
        const double tn = (k + 1) * dt;
        st = {h, psi, wrap(theta0 + c.theta_rate * tn, theta_period), pendulum_H(ps, psi, h)};
        const bool last = k + 1 == nsteps;
        if (stop(tn, st)) {
            record(tn, st);
            return;
        }
        if ((k + 1) % cfg.record_stride == 0 || last) record(tn, st);
    }
}

}  // namespace

LocalizedPath simulate_localized(const SimConfig& cfg, const PendulumSystem& ps, const ResonantOrbitTable& table,
                                 LocalizedState state0, TimeScale scale, std::uint64_t path_index) {
    LocalizedPath path;
    integrate_localized(
        cfg, ps, table, state0, scale, path_index, [](double, const LocalizedState&) { return false; },
        [&](double t, const LocalizedState& s) {
            path.t.push_back(t);
            path.states.push_back(s);
        },
        path.validity_warning);
    return path;
}

TrapGeometry trap_geometry(const PendulumSystem& ps) {
    const double r = ps.spec.ratio();
    const double cell = 2.0 * kPi * r;
    const double dir = sgn(ps.spec.dOmega_dI);
    const double away = sgn(ps.psi_center - ps.psi_saddle);
    auto f = [&](double psi) { return dir * (pendulum_H(ps, psi, 0.0) - ps.H_sd); };
    // far turning point of the separatrix loop, beyond the center
    double lo = ps.psi_center, hi = ps.psi_center;
    const double step = cell / 256.0;
    for (int i = 0; i < 512 && f(hi) < 0.0; ++i) {
        lo = hi;
        hi += away * step;
    }
    if (f(hi) < 0.0) throw NumericalError("separatrix loop does not close");
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (f(mid) < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    const double far = 0.5 * (lo + hi);
    return {std::min(ps.psi_saddle, far), std::max(ps.psi_saddle, far), cell};
}

bool in_trap(const PendulumSystem& ps, const TrapGeometry& tg, double psi, double h, double* offset) {
    const double start = tg.psi_lo - 0.5 * (tg.cell - (tg.psi_hi - tg.psi_lo));
    const double j = std::floor((psi - start) / tg.cell);
    const double pr = psi - j * tg.cell;
    const double ell = sgn(ps.spec.dOmega_dI) * (pendulum_H(ps, pr, h) - ps.H_sk);
    if (offset) *offset = ell;
    return pr >= tg.psi_lo && pr <= tg.psi_hi && ell < barrier_height(ps);
}

CaptureResult capture_fraction(const SimConfig& cfg, const PendulumSystem& ps, double h0) {
    cfg.validate();
    const TrapGeometry tg = trap_geometry(ps);
    const ResonantOrbitTable table(ps.spec);
    const double need = 3.0 * center_period(ps);
    const double start = tg.psi_lo - 0.5 * (tg.cell - (tg.psi_hi - tg.psi_lo));
    std::vector<char> captured(cfg.n_paths, 0);
    parallel_for(cfg.n_paths, resolve_threads(cfg.threads), [&](std::size_t j) {
        const double psi0 = start + tg.cell * (j + 0.5) / cfg.n_paths;
        double entered = -1.0;
        bool warn = false;
        bool got = false;
        integrate_localized(
            cfg, ps, table, make_localized_state(ps, psi0, h0), TimeScale::SqrtEps, j,
            [&](double t, const LocalizedState& s) {
                if (in_trap(ps, tg, s.psi_hat, s.h)) {
                    if (entered < 0.0) entered = t;
                    if (t - entered >= need) {
                        got = true;
                        return true;
                    }
                } else {
                    entered = -1.0;
                }
                return false;
            },
            [](double, const LocalizedState&) {}, warn);
        captured[j] = got ? 1 : 0;
    });
    int n = 0;
    for (char c : captured) n += c;
    return {static_cast<double>(n) / cfg.n_paths, n, cfg.n_paths};
}

ExitTimeMC summarize_exit_times(const std::vector<double>& times, const std::vector<char>& exited, int bins) {
    ExitTimeMC out{};
    out.n = static_cast<int>(times.size());
    out.times = times;
    double sum = 0.0, sum2 = 0.0, tmax = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        sum += times[i];
        sum2 += times[i] * times[i];
        tmax = std::max(tmax, times[i]);
        if (!exited[i]) ++out.censored;
    }
    const double n = std::max(1, out.n);
    out.mean = sum / n;
    const double var = out.n > 1 ? std::max(0.0, (sum2 - sum * sum / n) / (n - 1.0)) : 0.0;
    out.stderr_ = std::sqrt(var / n);
    out.censoring_warning = out.censored > 0.1 * out.n;
    bins = std::max(1, bins);
    out.hist_edges.resize(bins + 1);
    out.hist_counts.assign(bins, 0);
    const double w = tmax > 0.0 ? tmax / bins : 1.0;
    for (int b = 0; b <= bins; ++b) out.hist_edges[b] = b * w;
    for (double t : times) out.hist_counts[std::min(bins - 1, static_cast<int>(t / w))]++;
    return out;
}

ExitTimeMC exit_time_mc(const SimConfig& cfg, const PendulumSystem& ps, int bins) {
    cfg.validate();
    const TrapGeometry tg = trap_geometry(ps);
    const ResonantOrbitTable table(ps.spec);
    std::vector<double> times(cfg.n_paths, 0.0);
    std::vector<char> exited(cfg.n_paths, 0);
    parallel_for(cfg.n_paths, resolve_threads(cfg.threads), [&](std::size_t j) {
        bool warn = false;
        double last = 0.0;
        integrate_localized(
            cfg, ps, table, make_localized_state(ps, ps.psi_center, 0.0), TimeScale::Eps, j,
            [&](double t, const LocalizedState& s) {
                last = t;
                if (!in_trap(ps, tg, s.psi_hat, s.h)) {
                    exited[j] = 1;
                    return true;
                }
                return false;
            },
            [](double, const LocalizedState&) {}, warn);
        times[j] = last;
    });
    return summarize_exit_times(times, exited, bins);
}

}  // namespace reslab
