#include "reslab/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "reslab/averaged_h.hpp"
#include "reslab/errors.hpp"
#include "reslab/parallel.hpp"
#include "reslab/quasipotential.hpp"
#include "reslab/resonance_zone.hpp"
#include "reslab/sdesim.hpp"

namespace reslab {

using ojson = nlohmann::ordered_json;

std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    EVP_DigestUpdate(ctx, bytes.data(), bytes.size());
    EVP_DigestFinal_ex(ctx, md, &len);
    EVP_MD_CTX_free(ctx);
    static const char* hex = "0123456789abcdef";
    std::string s;
    for (unsigned int i = 0; i < len; ++i) {
        s += hex[md[i] >> 4];
        s += hex[md[i] & 15];
    }
    return s;
}

namespace {

std::string num(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// JSON has no inf/nan; those become null
ojson jnum(double x) { return std::isfinite(x) ? ojson(x) : ojson(nullptr); }

class Csv {
public:
    explicit Csv(std::vector<std::string> header) {
        row_strings(header);
    }
    void row_strings(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) s_ += ',';
            s_ += quote(cells[i]);
        }
        s_ += "\r\n";
    }
    const std::string& str() const { return s_; }

private:
    static std::string quote(const std::string& c) {
        if (c.find_first_of(",\"\r\n") == std::string::npos) return c;
        std::string q = "\"";
        for (char ch : c) {
            if (ch == '"') q += '"';
            q += ch;
        }
        return q + "\"";
    }
    std::string s_;
};

// Options bound to variables; values missing on the command line fall back to
// the --config file, then to the defaults already stored in the variables.
class Params {
public:
    explicit Params(CLI::App* app) : app_(app) {}

    template <class T>
    CLI::Option* add(const std::string& key, T& var, const std::string& help, bool required = false) {
        CLI::Option* o = app_->add_option("--" + key, var, help);
        entries_.push_back({key, o, required,
                            [&var](const ojson& j) { var = j.get<T>(); },
                            [&var]() { return ojson(var); }});
        return o;
    }

    // Returns an empty string on success, else the name of a missing option.
    std::string merge(const std::string& config_path) {
        ojson cfg = ojson::object();
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw CLI::ValidationError("--config", "cannot open " + config_path);
            try {
                cfg = ojson::parse(in);
            } catch (const std::exception& e) {
                throw CLI::ValidationError("--config", e.what());
            }
        }
        for (auto& e : entries_) {
            if (e.opt->count() > 0) continue;
            if (cfg.contains(e.key)) {
                try {
                    e.set(cfg[e.key]);
                } catch (const std::exception&) {
                    throw CLI::ValidationError("--config", "bad value for " + e.key);
                }
            } else if (e.required) {
                return e.key;
            }
        }
        return {};
    }

    ojson effective() const {
        ojson j = ojson::object();
        for (const auto& e : entries_) j[e.key] = e.get();
        return j;
    }

private:
    struct Entry {
        std::string key;
        CLI::Option* opt;
        bool required;
        std::function<void(const ojson&)> set;
        std::function<ojson()> get;
    };
    CLI::App* app_;
    std::vector<Entry> entries_;
};

struct Common {
    std::string out_dir = "out";
    std::string config;
    int threads = 0;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--out", c.out_dir, "output directory");
    sub->add_option("--config", c.config, "JSON config file; command-line flags take precedence");
    sub->add_option("--threads", c.threads, "worker threads (falls back to RESLAB_THREADS)");
}

class Emitter {
public:
    Emitter(std::string dir, std::string command) : dir_(std::move(dir)), command_(std::move(command)) {
        std::filesystem::create_directories(dir_);
    }
    void write(const std::string& name, const std::string& bytes) {
        std::ofstream f(std::filesystem::path(dir_) / name, std::ios::binary);
        f << bytes;
        if (!f) throw std::runtime_error("cannot write " + name);
        files_.push_back({{"file", name}, {"sha256", sha256_hex(bytes)}, {"bytes", bytes.size()}});
    }
    void manifest(const ojson& params, std::uint64_t seed) {
        ojson m;
        m["command"] = command_;
        m["tool_version"] = kToolVersion;
        m["seed"] = seed;
        m["params"] = params;
        m["outputs"] = files_;
        std::ofstream f(std::filesystem::path(dir_) / "manifest.json", std::ios::binary);
        f << m.dump(2) << "\n";
    }

private:
    std::string dir_, command_;
    ojson files_ = ojson::array();
};

struct ResonanceArgs {
    int m = 1, n = 1;
    double nu = 1.0;
    std::string side = "inside";
    double delta = 0.02, eta = 0.1, alpha = 0.1, sigma = 0.1;
};

void add_resonance_args(Params& p, CLI::App* sub, ResonanceArgs& a, bool& inside, bool& outside) {
    p.add("m", a.m, "resonance order m (m Omega = n nu)", true);
    p.add("n", a.n, "resonance order n", true);
    p.add("nu", a.nu, "forcing frequency", true);
    p.add("side", a.side, "inside or outside the homoclinic loop")->check(CLI::IsMember({"inside", "outside"}));
    p.add("delta", a.delta, "damping");
    p.add("eta", a.eta, "parametric forcing amplitude");
    p.add("alpha", a.alpha, "additive forcing amplitude");
    p.add("sigma", a.sigma, "noise strength");
    sub->add_flag("--inside", inside, "shorthand for --side inside");
    sub->add_flag("--outside", outside, "shorthand for --side outside");
}

Side resolve_side(ResonanceArgs& a, bool inside, bool outside) {
    if (inside && outside) throw CLI::ValidationError("--inside", "conflicts with --outside");
    if (inside) a.side = "inside";
    if (outside) a.side = "outside";
    return a.side == "inside" ? Side::InsideWell : Side::OutsideHomoclinic;
}

ojson spec_json(const ResonanceSpec& s) {
    ojson j;
    j["m"] = s.m;
    j["n"] = s.n;
    j["nu"] = s.nu;
    j["side"] = side_name(s.level.side);
    j["H_r"] = s.level.H;
    j["k_r"] = s.level.k.k;
    j["I_r"] = s.I_r;
    j["Omega_r"] = s.Omega_r;
    j["dOmega_dI"] = s.dOmega_dI;
    j["d2Omega_dI2"] = s.d2Omega_dI2;
    j["J_eta"] = s.J_eta;
    j["J_alpha"] = s.J_alpha;
    j["dJ_eta_dI"] = s.dJ_eta_dI;
    j["dJ_alpha_dI"] = s.dJ_alpha_dI;
    return j;
}

ojson pendulum_json(const PendulumSystem& ps) {
    ojson j;
    j["delta"] = ps.delta;
    j["eta"] = ps.eta;
    j["alpha"] = ps.alpha;
    j["sigma"] = ps.sigma;
    j["J_r"] = ps.J_r;
    j["dJ_r"] = ps.dJ_r;
    j["chi"] = ps.chi;
    j["Psi_star"] = ps.Psi_star;
    j["psi_saddle"] = ps.psi_saddle;
    j["psi_center"] = ps.psi_center;
    j["H_sd"] = ps.H_sd;
    j["H_sk"] = ps.H_sk;
    return j;
}

int cmd_resonance(const ResonanceArgs& a, Side side, const Common& c, const ojson& params, std::ostream& out) {
    const ResonanceSpec s = find_resonance(a.m, a.n, a.nu, side);
    const PendulumSystem ps = build_pendulum(s, a.delta, a.eta, a.alpha, a.sigma);
    ojson j;
    j["resonance"] = spec_json(s);
    j["pendulum"] = pendulum_json(ps);
    j["escape_measure"] = ps.sigma > 0.0 ? jnum(escape_measure(ps)) : ojson(nullptr);
    j["saddle_above_center"] = ps.H_sd > ps.H_sk;

    const TrapGeometry tg = trap_geometry(ps);
    const double start = tg.psi_lo - 0.5 * (tg.cell - (tg.psi_hi - tg.psi_lo));
    Csv csv({"psi", "H"});
    const int samples = 201;
    for (int i = 0; i < samples; ++i) {
        const double psi = start + tg.cell * i / (samples - 1);
        csv.row_strings({num(psi), num(pendulum_H(ps, psi, 0.0))});
    }
    Emitter em(c.out_dir, "resonance");
    const std::string js = j.dump(2) + "\n";
    em.write("resonance.json", js);
    em.write("pendulum_H.csv", csv.str());
    em.manifest(params, 0);
    out << js;
    return kExitOk;
}

struct ExitArgs {
    double kappa = 1.5;
    std::vector<double> eps{0.3, 0.2, 0.1};
    int paths = 0;
    double dt = 0.02;
    std::uint64_t seed = 1;
    double t_max_factor = 20.0;
};

int cmd_exit_time(const ResonanceArgs& a, Side side, const ExitArgs& e, const Common& c, const ojson& params,
                  std::ostream& out) {
    if (!(a.sigma > 0.0)) throw DomainError("sigma = 0: the trap is deterministic and no escape happens");
    const ResonanceSpec s = find_resonance(a.m, a.n, a.nu, side);
    const PendulumSystem ps = build_pendulum(s, a.delta, a.eta, a.alpha, a.sigma);
    const AveragedCoeffs ac(ps);
    const double V = escape_measure(ps);
    const double D = barrier_height(ps);
    const double dir = s.dOmega_dI < 0.0 ? -1.0 : 1.0;
    const double h0 = ps.H_sk + dir * 1e-6 * D;
    const int threads = resolve_threads(c.threads);

    Csv csv({"eps", "scale", "log_u", "scaled_log_u", "scaled_laplace", "V", "rel_err", "mc_paths", "mc_mean",
             "mc_stderr", "mc_censored", "mc_scaled_log_mean", "mc_scaled_lo", "mc_scaled_hi"});
    ojson rows = ojson::array();
    for (double eps : e.eps) {
        const ExitTimeEstimate q = mean_exit_time(ac, h0, eps, e.kappa);
        const double sl = q.scale * q.log_u;
        std::vector<std::string> row{num(eps),  num(q.scale), num(q.log_u), num(sl), num(q.scale * q.log_laplace),
                                     num(V),    num((sl - V) / V)};
        ojson r{{"eps", eps}, {"scale", q.scale}, {"log_u", jnum(q.log_u)}, {"scaled_log_u", jnum(sl)},
                {"scaled_laplace", jnum(q.scale * q.log_laplace)}, {"rel_err", jnum((sl - V) / V)}};
        const double dt_max = D * D / (100.0 * ac.max_Xi() * q.scale);
        const double dt = std::min(e.dt, dt_max);
        const double t_max = e.t_max_factor * q.u;
        if (e.paths > 0 && std::isfinite(q.u) && t_max / dt < 5e7) {
            std::vector<double> times(e.paths);
            std::vector<char> exited(e.paths);
            parallel_for(e.paths, threads, [&](std::size_t i) {
                const AveragedPath p = simulate_averaged(ac, h0, eps, e.kappa, dt, e.seed, t_max, i);
                times[i] = p.exited ? p.exit_time : t_max;
                exited[i] = p.exited ? 1 : 0;
            });
            const ExitTimeMC mc = summarize_exit_times(times, exited, 20);
            const double lo = mc.mean - 2.0 * mc.stderr_, hi = mc.mean + 2.0 * mc.stderr_;
            auto scaled = [&](double x) { return x > 0.0 ? q.scale * std::log(x) : -INFINITY; };
            for (const auto& v : {num(e.paths), num(mc.mean), num(mc.stderr_), num(mc.censored),
                                  num(scaled(mc.mean)), num(scaled(lo)), num(scaled(hi))})
                row.push_back(v);
            r["mc"] = {{"paths", e.paths}, {"dt", dt}, {"mean", mc.mean}, {"stderr", mc.stderr_},
                       {"censored", mc.censored}, {"censoring_warning", mc.censoring_warning}};
        } else {
            for (int k = 0; k < 7; ++k) row.push_back(k == 0 ? "0" : "");
        }
        csv.row_strings(row);
        rows.push_back(r);
    }
    ojson j;
    j["resonance"] = spec_json(s);
    j["pendulum"] = pendulum_json(ps);
    j["kappa"] = e.kappa;
    j["escape_measure"] = V;
    j["ladder"] = rows;
    Emitter em(c.out_dir, "exit-time");
    em.write("exit_time_ladder.csv", csv.str());
    const std::string js = j.dump(2) + "\n";
    em.write("exit_time.json", js);
    em.manifest(params, e.seed);
    out << csv.str();
    return kExitOk;
}

struct TableArgs {
    double mu = 1.0, eta = 2.0;
    std::vector<double> delta_hat{0.2, 0.4, 0.6, 0.8};
    std::vector<double> neg_lambda_hat{1.08, 1.2, 1.8, 2.5, 5.0, 10.0};
    int n_angles = 720;
};

int cmd_table1(const TableArgs& t, const Common& c, const ojson& params, std::ostream& out) {
    // reduced units: gamma_hat = 1 and sigma^2 / (4 mu) = eta sqrt(2 mu) / 4
    const double P = t.eta * std::sqrt(2.0 * t.mu) / 4.0;
    const double sigma = std::sqrt(4.0 * t.mu * P);
    FanOptions fo;
    fo.n_angles = t.n_angles;
    fo.threads = c.threads;
    const auto t0 = std::chrono::steady_clock::now();
    Csv csv({"delta_hat", "neg_lambda_hat", "V0", "V1", "shading", "status"});
    ojson cells = ojson::array();
    int failures = 0;
    for (double dh : t.delta_hat)
        for (double nl : t.neg_lambda_hat) {
            std::string status = "ok";
            double V[2] = {NAN, NAN};
            try {
                const ZSystem zs = ZSystem::from_hat(t.mu, t.eta, dh, -nl, 1.0, sigma);
                for (int d = 0; d < 2; ++d) V[d] = quasipotential_at_saddle(zs, d, fo).V;
            } catch (const RegimeError& ex) {
                status = std::string("regime_error: ") + ex.what();
            } catch (const std::exception& ex) {
                status = std::string("error: ") + ex.what();
            }
            if (status != "ok") ++failures;
            const int shade = status == "ok" ? (V[0] > V[1] ? 1 : V[0] < V[1] ? -1 : 0) : 0;
            csv.row_strings({num(dh), num(nl), num(V[0]), num(V[1]), std::to_string(shade), status});
            cells.push_back({{"delta_hat", dh}, {"neg_lambda_hat", nl}, {"V0", jnum(V[0])}, {"V1", jnum(V[1])},
                             {"shading", shade}, {"status", status}});
        }
    Emitter em(c.out_dir, "table1");
    em.write("table1.csv", csv.str());
    ojson j;
    j["mu"] = t.mu;
    j["eta"] = t.eta;
    j["cells"] = cells;
    j["failures"] = failures;
    em.write("table1.json", j.dump(2) + "\n");
    em.manifest(params, 0);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out << csv.str();
    out << "# runtime " << num(secs) << " s, threads " << resolve_threads(c.threads) << ", failed cells " << failures
        << "\n";
    return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Resonance trapping and escape in a stochastic Duffing oscillator", "reslab-cli"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    Common c_res, c_exit, c_tab;
    ResonanceArgs ra, ea;
    bool r_in = false, r_out = false, e_in = false, e_out = false;
    ExitArgs ex;
    TableArgs ta;

    CLI::App* res = app.add_subcommand("resonance", "resonance zone, pendulum reduction and escape measure");
    Params p_res(res);
    add_common(res, c_res);
    add_resonance_args(p_res, res, ra, r_in, r_out);

    CLI::App* ext = app.add_subcommand("exit-time", "mean exit time ladder in eps against the escape measure");
    Params p_ext(ext);
    add_common(ext, c_exit);
    add_resonance_args(p_ext, ext, ea, e_in, e_out);
    p_ext.add("kappa", ex.kappa, "noise exponent");
    p_ext.add("eps", ex.eps, "eps ladder")->delimiter(',');
    p_ext.add("paths", ex.paths, "averaged-SDE Monte Carlo paths per eps (0 skips)");
    p_ext.add("dt", ex.dt, "Monte Carlo time step upper bound");
    p_ext.add("seed", ex.seed, "random seed");
    p_ext.add("t-max-factor", ex.t_max_factor, "censoring time as a multiple of the quadrature mean");

    CLI::App* tab = app.add_subcommand("table1", "quasipotentials V0, V1 over the (delta_hat, -lambda_hat) grid");
    Params p_tab(tab);
    add_common(tab, c_tab);
    p_tab.add("mu", ta.mu, "mu");
    p_tab.add("eta", ta.eta, "eta");
    p_tab.add("delta-hat", ta.delta_hat, "rescaled damping values")->delimiter(',');
    p_tab.add("neg-lambda-hat", ta.neg_lambda_hat, "values of -lambda_hat")->delimiter(',');
    p_tab.add("n-angles", ta.n_angles, "initial fan size");

    std::vector<std::string> args;
    for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
    try {
        app.parse(args);
        Common* c = res->parsed() ? &c_res : ext->parsed() ? &c_exit : &c_tab;
        Params* p = res->parsed() ? &p_res : ext->parsed() ? &p_ext : &p_tab;
        const std::string missing = p->merge(c->config);
        if (!missing.empty()) {
            CLI::App* sub = res->parsed() ? res : ext->parsed() ? ext : tab;
            err << "missing required option --" << missing << "\n" << sub->help();
            return kExitUsage;
        }
        if (res->parsed()) {
            const Side side = resolve_side(ra, r_in, r_out);
            return cmd_resonance(ra, side, *c, p->effective(), out);
        }
        if (ext->parsed()) {
            const Side side = resolve_side(ea, e_in, e_out);
            return cmd_exit_time(ea, side, ex, *c, p->effective(), out);
        }
        return cmd_table1(ta, *c, p->effective(), out);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion&) {
        out << kToolVersion << "\n";
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n";
        return kExitUsage;
    } catch (const RegimeError& e) {
        err << "regime error: " << e.what() << "\n";
        return kExitRegime;
    } catch (const DomainError& e) {
        err << "domain error: " << e.what() << "\n";
        return kExitDomain;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
}

}  // namespace reslab
