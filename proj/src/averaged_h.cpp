#include "reslab/averaged_h.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include <math.h>  // boost 1.74 pchip calls isnan unqualified

#include <boost/math/interpolators/pchip.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <unsupported/Eigen/FFT>

#include "reslab/rng.hpp"

namespace reslab {

namespace {

constexpr double kPi = std::numbers::pi;

struct PState {
    double psi, h;
};

PState pendulum_rhs(const PendulumSystem& ps, const PState& s) {
    return {ps.spec.dOmega_dI * s.h, averaged_F(ps, s.psi)};
}

PState rk4(const PendulumSystem& ps, const PState& s, double dt) {
    const PState k1 = pendulum_rhs(ps, s);
    const PState k2 = pendulum_rhs(ps, {s.psi + 0.5 * dt * k1.psi, s.h + 0.5 * dt * k1.h});
    const PState k3 = pendulum_rhs(ps, {s.psi + 0.5 * dt * k2.psi, s.h + 0.5 * dt * k2.h});
    const PState k4 = pendulum_rhs(ps, {s.psi + dt * k3.psi, s.h + dt * k3.h});
    return {s.psi + dt / 6.0 * (k1.psi + 2.0 * k2.psi + 2.0 * k3.psi + k4.psi),
            s.h + dt / 6.0 * (k1.h + 2.0 * k2.h + 2.0 * k3.h + k4.h)};
}

double sgn(double x) { return x < 0.0 ? -1.0 : 1.0; }

using GK15 = boost::math::quadrature::gauss_kronrod<double, 15>;

}  // namespace

double level_offset(const PendulumSystem& ps, double h_level) {
    return sgn(ps.spec.dOmega_dI) * (h_level - ps.H_sk);
}

double barrier_height(const PendulumSystem& ps) { return std::abs(ps.H_sd - ps.H_sk); }

double center_period(const PendulumSystem& ps) {
    const double w2 = -ps.curvature_at_center();
    if (!(w2 > 0.0)) throw DomainError("center is not elliptic");
    return 2.0 * kPi / std::sqrt(w2);
}

OrbitSamples sample_orbit(const PendulumSystem& ps, double h_level, int nodes) {
    const double ell = level_offset(ps, h_level);
    const double D = barrier_height(ps);
    if (!(ell > 0.0 && ell < D)) throw DomainError("level must lie strictly between H_sk and H_sd");
    if (nodes < 8) throw DomainError("orbit needs at least 8 nodes");
    const double Wp = ps.spec.dOmega_dI;
    const double dir = sgn(Wp);
    const PState start{ps.psi_center, std::sqrt(2.0 * (h_level - ps.H_sk) / Wp)};
    const double T0 = center_period(ps);

    const int coarse = 1024;
    const double dt0 = T0 / coarse;
    PState s = start;
    double t = 0.0;
    bool below = false;
    double period = -1.0;
    for (int step = 0; step < 10 * coarse; ++step) {
        const PState nx = rk4(ps, s, dt0);
        const double x = dir * (nx.psi - ps.psi_center);
        if (x < 0.0) below = true;
        if (below && x >= 0.0) {
            double lo = 0.0, hi = dt0;
            for (int it = 0; it < 80; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (dir * (rk4(ps, s, mid).psi - ps.psi_center) < 0.0)
                    lo = mid;
                else
                    hi = mid;
            }
            period = t + 0.5 * (lo + hi);
            break;
        }
        s = nx;
        t += dt0;
    }
    if (period <= 0.0) throw NumericalError("pendulum orbit did not close within 10 small-oscillation periods");

    OrbitSamples out;
    out.h_level = h_level;
    out.period = period;
    out.psi.resize(nodes);
    out.h.resize(nodes);
    const double dt = period / nodes;
    s = start;
    for (int i = 0; i < nodes; ++i) {
        out.psi[i] = s.psi;
        out.h[i] = s.h;
        s = rk4(ps, s, dt);
    }
    return out;
}

double orbit_average(const OrbitSamples& orbit, const std::function<double(double, double)>& f) {
    double sum = 0.0;
    for (std::size_t i = 0; i < orbit.psi.size(); ++i) sum += f(orbit.psi[i], orbit.h[i]);
    return sum / static_cast<double>(orbit.psi.size());
}

double orbit_average(const PendulumSystem& ps, double h_level, const std::function<double(double, double)>& f,
                     int nodes) {
    return orbit_average(sample_orbit(ps, h_level, nodes), f);
}

OrbitAverage orbit_g(const PendulumSystem& ps, double h_level, int nodes) {
    const OrbitSamples o = sample_orbit(ps, h_level, nodes);
    return {h_level, o.period, orbit_average(o, [](double, double h) { return h * h; })};
}

IbpCheck ibp_identities_check(const PendulumSystem& ps, double h_level) {
    const OrbitSamples o = sample_orbit(ps, h_level);
    const double r = ps.spec.ratio();
    const double g = orbit_average(o, [](double, double h) { return h * h; });
    IbpCheck c;
    c.lhs1 = orbit_average(o, [&](double psi, double h) { return h * h * std::sin(psi / r); });
    c.rhs1 = ps.chi * g;
    c.lhs2 = orbit_average(o, [&](double psi, double) { return averaged_F(ps, psi) * std::cos(psi / r); });
    c.rhs2 = ps.spec.dOmega_dI * ps.chi * g / r;
    return c;
}

B1Check verify_B1_zero(const PendulumSystem& ps, double h_level, int theta_nodes, int psi_nodes) {
    const ResonanceSpec& s = ps.spec;
    const int m = s.m;
    const double r = s.ratio();
    const double W = s.Omega_r;
    const int M = theta_nodes * m;
    const double dth = 2.0 * kPi * m / M;
    const int P = psi_nodes;
    // A1 is anchored at theta = 0, so the theta-averages are periodic in psi with period 2 pi n only
    const double psi_period = 2.0 * kPi * s.n;

    Eigen::FFT<double> fft;
    std::vector<double> a(P), b(P);
    std::vector<double> F(M), Fc(M), dF(M), A(M), dA(M);
    std::vector<std::complex<double>> spec;
    std::vector<double> tmp;

    // periodic antiderivative in theta with value 0 at theta = 0
    auto antiderivative = [&](const std::vector<double>& f, std::vector<double>& out) {
        fft.fwd(spec, f);
        spec[0] = 0.0;
        for (int k = 1; k < M; ++k) {
            int kk = k <= M / 2 ? k : k - M;
            if (2 * k == M) {
                spec[k] = 0.0;
                continue;
            }
            spec[k] /= std::complex<double>(0.0, static_cast<double>(kk) / m);
        }
        fft.inv(tmp, spec);
        const double base = tmp[0];
        for (int i = 0; i < M; ++i) out[i] = tmp[i] - base;
    };

    for (int j = 0; j < P; ++j) {
        const double psi = psi_period * j / P;
        double meanF = 0.0, meandF = 0.0;
        for (int i = 0; i < M; ++i) {
            const double th = i * dth;
            const double phi = psi + r * th;
            const OrbitPoint q = to_phase(s.level, phi);
            const double q1p = q.q2 / W;
            const double q2p = (q.q1 - q.q1 * q.q1 * q.q1) / W;
            const double c = std::cos(th);
            const double force = c * (ps.eta * q.q1 + ps.alpha) - ps.delta * q.q2;
            F[i] = q.q2 / W * force;
            dF[i] = (q2p * force + q.q2 * (c * ps.eta * q1p - ps.delta * q2p)) / W;
            meanF += F[i];
            meandF += dF[i];
        }
        meanF /= M;
        meandF /= M;
        for (int i = 0; i < M; ++i) Fc[i] = F[i] - meanF;
        antiderivative(Fc, A);
        for (int i = 0; i < M; ++i) Fc[i] = dF[i] - meandF;
        antiderivative(Fc, dA);
        double sa = 0.0, sb = 0.0;
        for (int i = 0; i < M; ++i) {
            sa += A[i] * F[i];
            sb += dA[i];
        }
        a[j] = sa / (M * s.nu);
        b[j] = sb / (M * s.nu);
    }

    // trigonometric interpolation of a(psi), b(psi)
    std::vector<std::complex<double>> ac, bc;
    fft.fwd(ac, a);
    fft.fwd(bc, b);
    auto trig = [&](const std::vector<std::complex<double>>& cf, double psi) {
        double v = cf[0].real();
        for (int k = 1; k < P / 2; ++k) {
            const double w = 2.0 * kPi * k * psi / psi_period;
            v += 2.0 * (cf[k].real() * std::cos(w) - cf[k].imag() * std::sin(w));
        }
        return v / P;
    };

    const OrbitSamples o = sample_orbit(ps, h_level);
    const double Wp = s.dOmega_dI;
    const double avg = orbit_average(o, [&](double psi, double h) { return trig(ac, psi) + Wp * h * h * trig(bc, psi); });
    const double g = orbit_average(o, [](double, double h) { return h * h; });
    return {-Wp * avg, -ps.delta * Wp * g};
}

AveragedCoeffs::AveragedCoeffs(const PendulumSystem& ps, int table_size) : ps_(ps) {
    D_ = barrier_height(ps);
    const double Wp = std::abs(ps.spec.dOmega_dI);
    const double I = ps.spec.I_r, W = ps.spec.Omega_r, s2 = ps.sigma * ps.sigma;
    B_sigma_ = 0.5 * s2 * ps.spec.dOmega_dI * I / W;
    if (table_size < 16) throw DomainError("g table too small");

    std::vector<double> xs;
    for (int j = 1; j < table_size; ++j) xs.push_back(0.5 * (1.0 - std::cos(kPi * j / table_size)));
    for (double e : {1e-3, 1e-4, 1e-5, 1e-6})
        if (1.0 - e > xs.back()) xs.push_back(1.0 - e);

    std::vector<double> x{0.0}, q{1.0};
    const double dir = sgn(ps.spec.dOmega_dI);
    for (double xi : xs) {
        const double ell = xi * D_;
        double g;
        try {
            g = orbit_g(ps, ps.H_sk + dir * ell).mean_h2;
        } catch (const NumericalError&) {
            break;  // orbits this close to the separatrix are too slow to close
        }
        x.push_back(xi);
        q.push_back(Wp * g / ell);
        max_Xi_ = std::max(max_Xi_, s2 * Wp * Wp * I * g / W);
    }
    x.push_back(1.0);
    q.push_back(0.0);
    x_nodes_ = x;
    auto interp = std::make_shared<boost::math::interpolators::pchip<std::vector<double>>>(std::move(x), std::move(q));
    q_interp_ = std::make_shared<const std::function<double(double)>>([interp](double t) { return (*interp)(t); });
}

double AveragedCoeffs::q_ratio(double ell) const {
    const double t = std::clamp(ell / D_, 0.0, 1.0);
    return std::max(0.0, (*q_interp_)(t));
}

double AveragedCoeffs::g_of_offset(double ell) const {
    return q_ratio(ell) * ell / std::abs(ps_.spec.dOmega_dI);
}

double AveragedCoeffs::g(double h_level) const { return g_of_offset(level_offset(ps_, h_level)); }

double AveragedCoeffs::B(double h_level) const { return -ps_.delta * ps_.spec.dOmega_dI * g(h_level); }

double AveragedCoeffs::Xi(double h_level) const {
    const double Wp = ps_.spec.dOmega_dI;
    return ps_.sigma * ps_.sigma * Wp * Wp * ps_.spec.I_r * g(h_level) / ps_.spec.Omega_r;
}

ExitTimeEstimate mean_exit_time(const AveragedCoeffs& ac, double h0, double eps, double kappa) {
    const PendulumSystem& ps = ac.system();
    if (!(eps > 0.0 && eps < 1.0)) throw DomainError("eps must lie in (0,1)");
    if (!(kappa >= 1.0)) throw DomainError("kappa must be >= 1");
    if (!(ps.delta > 0.0) || !(ps.sigma > 0.0)) throw DomainError("exit time needs delta > 0 and sigma > 0");
    const double D = ac.offset_max();
    const double ell0 = level_offset(ps, h0);
    if (!(ell0 > 0.0 && ell0 <= D)) throw DomainError("h0 must lie in (H_sk, H_sd]");
    const double s = std::pow(eps, 2.0 * (kappa - 1.0));
    const double Wp = std::abs(ps.spec.dOmega_dI);
    const double Lam = 2.0 * ps.delta * ps.spec.Omega_r / (ps.sigma * ps.sigma * Wp * ps.spec.I_r);
    const double expo = Lam * D / s;
    if (expo > 700.0) throw NumericalError("exit-time exponent beyond the overflow guard");

    const int n = std::max(400, static_cast<int>(std::ceil(8.0 * expo)));
    const double h = D / n;
    auto gterm = [&](double x) { return (1.0 / ac.q_ratio(x) - 1.0) / x; };
    // fixed 15-point rule per cell; the only singularity (log type, at D) is integrable
    auto Gint = [&](double a, double b) { return GK15::integrate(gterm, a, b, 0); };
    std::vector<double> G(n + 1, 0.0);
    for (int i = 0; i < n; ++i) G[i + 1] = G[i] + Gint(i * h, (i + 1) * h);
    auto G_at = [&](double y) {
        const int i = std::min(n - 1, static_cast<int>(y / h));
        return G[i] + Gint(i * h, y);
    };
    auto w = [&](double eta) { return std::exp(-Lam * eta / s + G_at(eta)) * Wp / ac.q_ratio(eta); };
    auto Pint = [&](double a, double b) { return GK15::integrate(w, a, b, 0); };
    std::vector<double> Pn(n + 1, 0.0);
    for (int i = 0; i < n; ++i) Pn[i + 1] = Pn[i] + Pint(i * h, (i + 1) * h);
    auto P_at = [&](double y) {
        const int i = std::min(n - 1, static_cast<int>(y / h));
        return Pn[i] + Pint(i * h, y);
    };
    auto outer = [&](double y) { return std::exp(Lam * (y - D) / s - G_at(y)) * P_at(y) / y; };

    double total = 0.0;
    if (ell0 < D) {
        const int i0 = std::min(n - 1, static_cast<int>(ell0 / h));
        const double first_end = std::min(D, (i0 + 1) * h);
        total += GK15::integrate(outer, ell0, first_end, 0);
        for (int i = i0 + 1; i < n; ++i) total += GK15::integrate(outer, i * h, (i + 1) * h, 0);
    }
    ExitTimeEstimate out;
    out.scale = s;
    const double logC = std::log(Lam / (s * ps.delta * Wp));
    out.log_u = total > 0.0 ? logC + expo + std::log(total) : -INFINITY;
    out.u = std::exp(out.log_u);
    out.log_laplace = std::log(s) - G[n] - std::log(D) - std::log(Lam * ps.delta) + expo;
    out.laplace = std::exp(out.log_laplace);
    return out;
}

AveragedPath simulate_averaged(const AveragedCoeffs& ac, double h0, double eps, double kappa, double dt,
                               std::uint64_t seed, double t_max, std::uint64_t path_index, int record_stride) {
    const PendulumSystem& ps = ac.system();
    if (!(eps > 0.0 && eps < 1.0)) throw DomainError("eps must lie in (0,1)");
    if (!(kappa >= 1.0)) throw DomainError("kappa must be >= 1");
    if (!(dt > 0.0) || !(t_max > 0.0)) throw DomainError("dt and t_max must be positive");
    const double D = ac.offset_max();
    double ell = level_offset(ps, h0);
    if (!(ell > 0.0 && ell < D)) throw DomainError("h0 must lie strictly between H_sk and H_sd");
    const double s = std::pow(eps, 2.0 * (kappa - 1.0));
    if (ac.max_Xi() > 0.0 && dt > D * D / (100.0 * ac.max_Xi() * s))
        throw DomainError("dt too large for the diffusion scale of the averaged energy");
    const double Wp = std::abs(ps.spec.dOmega_dI);
    const double dir = sgn(ps.spec.dOmega_dI);
    const double bsig = s * std::abs(ac.B_sigma());
    const double xi_coef = ps.sigma * ps.sigma * Wp * Wp * ps.spec.I_r / ps.spec.Omega_r;

    PathRng rng(seed, path_index);
    AveragedPath path;
    auto record = [&](double t) {
        path.t.push_back(t);
        path.H.push_back(ps.H_sk + dir * ell);
    };
    record(0.0);
    const long nsteps = static_cast<long>(std::ceil(t_max / dt));
    for (long k = 1; k <= nsteps; ++k) {
        const double g = ac.g_of_offset(ell);
        const double drift = -ps.delta * Wp * g + bsig;
        const double amp = std::sqrt(s * xi_coef * g * dt);
        double next = ell + drift * dt;
        if (amp > 0.0) {
            int tries = 0;
            do {
                next = ell + drift * dt + amp * rng.normal();
                if (++tries > 100000) throw NumericalError("entrance-boundary rejection did not terminate");
            } while (next <= 0.0);
        } else if (next <= 0.0) {
            next = 0.5 * ell;
        }
        ell = next;
        const double t = k * dt;
        if (ell >= D) {
            path.exited = true;
            path.exit_time = t;
            record(t);
            return path;
        }
        if (record_stride > 0 && k % record_stride == 0) record(t);
    }
    if (record_stride <= 0 || nsteps % record_stride != 0) record(nsteps * dt);
    path.exit_time = nsteps * dt;
    return path;
}

}  // namespace reslab
