#include "commands.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>

#include "CLI11.hpp"
#include "config.hpp"
#include "phi4/diagrams.hpp"
#include "phi4/stochastic.hpp"

namespace phi4::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Run {
    std::string command;
    RunConfig cfg;
    std::ostream& out;
    json result = json::object();
    json criteria = json::array();
    json timing = json::object();
    bool all_pass = true;

    void report(const acceptance::Result& r) {
        out << r.line() << "\n";
        criteria.push_back({{"name", r.name}, {"pass", r.pass}, {"details", r.details}});
        timing[r.name] = {{"seconds", r.seconds}, {"observed", r.observed}, {"expected", r.expected},
                          {"tolerance", r.tolerance}};
        all_pass = all_pass && r.pass;
    }
    void criterion(const std::string& name, double observed, double expected, double tolerance, bool pass,
                   json details = json::object()) {
        acceptance::Result r;
        r.name = name;
        char b[3][32];
        std::snprintf(b[0], 32, "%.6g", observed);
        std::snprintf(b[1], 32, "%.6g", expected);
        std::snprintf(b[2], 32, "%.6g", tolerance);
        r.observed = b[0];
        r.expected = b[1];
        r.tolerance = b[2];
        r.pass = pass;
        r.details = std::move(details);
        report(r);
    }
    fs::path path(const std::string& suffix) const { return fs::path(cfg.out) / (command + suffix); }
};

json config_json(const RunConfig& c) {
    return {{"beta", c.params.beta},     {"dt", c.params.dt},         {"lambda", c.lambda},
            {"samples", c.params.samples}, {"seed", c.params.seed}, {"stream", c.params.stream},
            {"tolerances", c.tolerances}};
}

void write_text(const fs::path& p, const std::string& s) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    f << s;
}

std::string utc_now() {
    const std::time_t t = std::time(nullptr);
    char b[32];
    std::strftime(b, sizeof b, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return b;
}

void write_outputs(const Run& r, double seconds) {
    json doc{{"command", r.command}, {"config", config_json(r.cfg)}, {"criteria", r.criteria}, {"result", r.result},
             {"pass", r.all_pass}};
    write_text(r.path(".json"), canonical_dump(doc) + "\n");
    json meta{{"command", r.command},   {"timestamp", utc_now()},  {"seconds", seconds},
              {"threads", omp_get_max_threads()}, {"criteria", r.timing}};
    write_text(r.path(".meta.json"), meta.dump(2) + "\n");
}

void run_checks(Run& r, const std::vector<std::string>& checks, const std::vector<std::string>& allowed) {
    for (const auto& c : checks)
        if (std::find(allowed.begin(), allowed.end(), c) == allowed.end())
            throw UsageError("--check " + c + " does not belong to " + r.command);
    for (const auto& c : checks) r.report(acceptance::run(c, r.cfg.params));
}

// ---- subcommands

void cmd_solve_cauchy(Run& r) {
    const auto res = acceptance::cauchy_convergence();
    std::ofstream csv(r.path("_residuals.csv"));
    csv << "lambda,order,sup_error\n";
    csv.precision(17);
    for (const auto& row : res.details["rows"])
        csv << row["lambda"].get<double>() << "," << row["order"].get<int>() << "," << row["sup_error"].get<double>()
            << "\n";
    r.result["slopes"] = res.details["slopes"];
    r.report(res);
}

void cmd_measure(Run& r, const std::vector<std::string>& checks) {
    if (!checks.empty()) {
        run_checks(r, checks, {"solver_conservation", "delta_e_consistency", "energy_decomposition", "time_reflection"});
        return;
    }
    auto s = standard_scenario(r.cfg.params.dt);
    s.lat.lambda = r.cfg.lambda;
    if (auto t = r.cfg.tolerances.find("measurement"); t != r.cfg.tolerances.end()) s.tolerance = t->second;
    const auto e = delta_E(s, global_expand(s, r.cfg.lambda));
    r.result = {{"E_interaction", e.E_interaction}, {"E_plus", e.E_plus},
                {"E_minus", e.E_minus},             {"E_free_interaction", e.E_free_interaction},
                {"E_free_plus", e.E_free_plus},     {"E_free_minus", e.E_free_minus},
                {"delta_E", e.delta_E},             {"delta_E_vee", e.delta_E_vee},
                {"delta_E_wedge", e.delta_E_wedge}, {"k0id_residual", e.k0id_residual},
                {"flagged", e.flagged},             {"diagnostics", e.diagnostics}};
    r.out << "delta_E " << e.delta_E << " vee " << e.delta_E_vee << " wedge " << e.delta_E_wedge << "\n";
    const double scale = std::max(std::abs(e.delta_E_vee), std::abs(e.delta_E_wedge));
    const double rel = scale > 0 ? std::abs(e.delta_E_vee - e.delta_E_wedge) / scale : 0.0;
    r.criterion("measure_vee_wedge", rel, 0.0, s.tolerance, rel <= s.tolerance && !e.flagged);
}

void cmd_npoint(Run& r, int n) {
    LatticeSpec lat;
    lat.dim = 1;
    lat.N = 64;
    lat.L = 40.0;
    lat.dt = 0.05;
    lat.t_min = -14.0;
    lat.t_max = 14.0;
    lat.T = 4.0;
    if (n < 2 || n > 6) throw UsageError("npoint: --n must be in 2..6");
    const double x0[] = {-6.0, -2.5, 1.0, 4.5, -9.0};
    std::vector<WavePacket> ins;
    for (int j = 0; j < n - 1; ++j) {
        WavePacket p;
        p.t0 = -9.0;
        p.x0 = {x0[j], 0, 0};
        p.width_t = p.width_x = 1.2;
        p.k0 = (j % 2 == 0) ? 1.5 : -1.5;
        ins.push_back(p);
    }
    WavePacket o;
    o.t0 = 9.0;
    o.x0 = {0.5, 0, 0};
    o.width_t = o.width_x = 1.2;
    o.k0 = 1.0;
    std::vector<SpacetimeField> psi;
    for (const auto& p : ins) psi.push_back(phi0_from_sources(make_setup(lat, {p}, {}, 1)).phi_in);
    const auto dout = phi0_from_sources(make_setup(lat, {}, {o}, 1)).dphi_out;
    std::vector<ExternalLeg> legs{{&dout, true}};
    for (const auto& f : psi) legs.push_back({&f});
    const auto amp = npoint_amplitude(lat, legs, r.cfg.lambda);
    r.result = {{"n", n}, {"amplitude", amp.value}, {"trees", amp.trees}, {"vertices", amp.vertices},
                {"diagnostic", amp.diagnostic}};
    if (n % 2 != 0) {
        r.out << amp.diagnostic << "\n";
        r.criterion("npoint_parity", std::abs(amp.value), 0.0, 0.0, amp.value == 0.0);
        return;
    }
    if (n == 2) throw UsageError("npoint: the two-point function has no vertex; use n = 4 or 6");
    // polarization of the order n/2 - 1 energy-shift coefficient
    const int m = n / 2 - 1, count = n - 1;
    double pol = 0.0;
    for (unsigned mask = 0; mask < (1u << count); ++mask) {
        std::vector<WavePacket> on;
        for (int j = 0; j < count; ++j)
            if (mask & (1u << j)) on.push_back(ins[j]);
        auto s = make_setup(lat, on, {o}, m);
        auto g = global_expand(s, r.cfg.lambda);
        const double c = -0.5 * spacetime_dot(lat, g.rho[m].values, g.free.dphi_out);
        pol += ((count - __builtin_popcount(mask)) % 2 ? -1.0 : 1.0) * c;
    }
    const double rel = std::abs(pol + 0.5 * amp.value) / std::abs(0.5 * amp.value);
    r.result["polarization"] = pol;
    std::ofstream csv(r.path(".csv"));
    csv.precision(17);
    csv << "n,trees,vertices,amplitude,polarization\n" << n << "," << amp.trees << "," << amp.vertices << ","
        << amp.value << "," << pol << "\n";
    r.out << "n " << n << " trees " << amp.trees << " amplitude " << amp.value << "\n";
    r.criterion("npoint_polarization", rel, 0.0, 1e-6, rel < 1e-6);
}

void cmd_diagrams(Run& r, int n, int k, const std::vector<std::string>& checks) {
    if (!checks.empty()) {
        run_checks(r, checks, {"diagram_counting", "wick_weights", "beta_matching"});
        return;
    }
    if (n < 0 || n > 10 || k < 0 || k > 4) throw UsageError("diagrams: need 0 <= n <= 10 and 0 <= k <= 4");
    const auto ds = diagrams::enumerate_diagrams(n, k);
    int bad = 0;
    r.result = {{"n", n}, {"k", k}, {"topologies", ds.size()}, {"diagrams", json::array()}};
    for (const auto& d : ds) {
        if (2 * d.lines() != n + 4 * k || 2 * d.loops() != 2 * k - n + 2) ++bad;
        json e = json::parse(diagrams::to_json(d));
        e["lines"] = d.lines();
        e["loops"] = d.loops();
        if (d.loops() == 1) {
            const auto w = diagrams::beta_match(d);
            auto rat = [](const diagrams::Rational& q) { return json{{"num", q.numerator()}, {"den", q.denominator()}}; };
            e["weight_report"] = {{"classical_weight", rat(w.classical_weight)},
                                  {"quantum_weight", rat(w.quantum_weight)},
                                  {"beta_pi", rat(w.beta_pi)},
                                  {"beta_pi_symmetry", rat(w.beta_pi_symmetry)},
                                  {"loop_length", w.loop_length},
                                  {"verified", w.verified},
                                  {"note", w.note}};
        }
        r.result["diagrams"].push_back(e);
        r.out << diagrams::render_ascii(d) << "lines " << d.lines() << " loops " << d.loops() << " weight "
              << d.weight.numerator() << (d.weight.denominator() == 1 ? "" : "/" + std::to_string(d.weight.denominator()))
              << "\n\n";
    }
    r.out << "topologies " << ds.size() << "\n";
    r.criterion("counting_laws", bad, 0.0, 0.0, bad == 0);
}

void cmd_lemmarep(Run& r, int order, double p, const std::vector<std::string>& checks) {
    if (!checks.empty()) {
        run_checks(r, checks, {"lemmarep"});
        return;
    }
    if (order < 1 || order > 4) throw UsageError("lemmarep: --r must be in 1..4");
    if (!(p > 0)) throw UsageError("lemmarep: --p must be positive");
    std::mt19937_64 rng(r.cfg.params.seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    LemmaRepResult res;
    for (int tries = 0;; ++tries) {
        if (tries > 1000) throw DomainError("lemmarep: no pole-separated momentum set found");
        LemmaRepCase c;
        c.k.push_back({0.0, p, 0.0, 0.0});
        for (int a = 1; a < order; ++a) c.k.push_back({0.5 * u(rng), 1.5 * u(rng), 1.5 * u(rng), 1.5 * u(rng)});
        try {
            res = verify_lemmarep(c);
        } catch (const DomainError&) {
            continue;
        }
        if (*std::min_element(res.p.begin(), res.p.end()) >= 0.3) break;
    }
    r.result = {{"r", order},           {"p", res.p},
                {"lhs", {res.lhs.real(), res.lhs.imag()}}, {"rhs", {res.rhs.real(), res.rhs.imag()}},
                {"rel_err", res.rel_err}, {"eps", res.eps},
                {"rel_err_eps", res.rel_err_eps}};
    r.out << "lhs " << res.lhs << " rhs " << res.rhs << "\n";
    r.criterion("lemmarep_case", res.rel_err, 0.0, 1e-3, res.rel_err < 1e-3);
}

void cmd_sample(Run& r, const std::vector<std::string>& checks) {
    const std::vector<std::string> allowed{"stochastic_covariance", "zero_point_law"};
    run_checks(r, checks.empty() ? allowed : checks, allowed);
    for (const auto& c : r.criteria)
        if (c["name"] == "zero_point_law") {
            std::ofstream csv(r.path("_modes.csv"));
            csv.precision(17);
            csv << "n,omega,mean,stderr,target,beta_doubling_ratio\n";
            for (const auto& m : c["details"]["modes"])
                csv << m["n"].get<int>() << "," << m["omega"].get<double>() << "," << m["mean"].get<double>() << ","
                    << m["stderr"].get<double>() << "," << m["target"].get<double>() << ","
                    << m["beta_doubling_ratio"].get<double>() << "\n";
        }
}

void cmd_mc_delta_e(Run& r) {
    auto res = acceptance::loop_monte_carlo(r.cfg.params);
    r.out << "mean " << res.details["mean"].get<double>() << " stderr " << res.details["stderr"].get<double>()
          << " prediction " << res.details["prediction"].get<double>() << "\n";
    r.report(res);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"phi4: classical measurement and stochastic background checks"};
    app.require_subcommand(1);
    app.fallthrough();
    Overrides ov;
    std::string config;
    std::uint64_t seed = 0;
    int threads = 0;
    std::string outdir;
    auto* o_config = app.add_option("--config", config, "JSON config file");
    auto* o_seed = app.add_option("--seed", seed, "RNG seed");
    auto* o_threads = app.add_option("--threads", threads, "worker cap (results do not depend on it)")
                          ->check(CLI::NonNegativeNumber);
    auto* o_out = app.add_option("--out", outdir, "output directory");

    std::vector<std::string> checks;
    auto add_check = [&](CLI::App* sc) { sc->add_option("--check", checks, "criteria to evaluate"); };
    auto* sc_cauchy = app.add_subcommand("solve-cauchy", "perturbative Cauchy problem: residual-slope study");
    auto* sc_measure = app.add_subcommand("measure", "energy report on the standard scenario");
    double lambda = NAN;
    sc_measure->add_option("--lambda", lambda, "coupling");
    add_check(sc_measure);
    auto* sc_npoint = app.add_subcommand("npoint", "n-point amplitude and polarization check");
    int np_n = 4;
    sc_npoint->add_option("--n", np_n, "number of external legs");
    sc_npoint->add_option("--lambda", lambda, "coupling");
    auto* sc_diagrams = app.add_subcommand("diagrams", "diagram enumeration and weight reports");
    int dn = 4, dk = 1;
    sc_diagrams->add_option("--n", dn, "external legs");
    sc_diagrams->add_option("--k", dk, "vertices");
    add_check(sc_diagrams);
    auto* sc_lemma = app.add_subcommand("lemmarep", "propagator product identity");
    int lr = 1;
    double lp = 1.0;
    sc_lemma->add_option("--r", lr, "number of factors");
    sc_lemma->add_option("--p", lp, "momentum of the first factor");
    add_check(sc_lemma);
    auto* sc_sample = app.add_subcommand("sample", "stochastic background: covariance and zero-point energy");
    add_check(sc_sample);
    auto* sc_mc = app.add_subcommand("mc-delta-e", "loop Monte Carlo of the energy shift");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n" << app.help();
        return 2;
    }

    if (o_config->count()) ov.config = config;
    if (o_seed->count()) ov.seed = seed;
    if (o_threads->count()) ov.threads = threads;
    if (o_out->count()) ov.out = outdir;

    CLI::App* sc = app.get_subcommands().front();
    Run run{sc->get_name(), {}, out};
    try {
        run.cfg = resolve(ov);
        if (!std::isnan(lambda)) run.cfg.lambda = lambda;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    }
    if (run.cfg.threads > 0) omp_set_num_threads(run.cfg.threads);

    const auto t0 = std::chrono::steady_clock::now();
    try {
        fs::create_directories(run.cfg.out);
        if (sc == sc_cauchy) cmd_solve_cauchy(run);
        else if (sc == sc_measure) cmd_measure(run, checks);
        else if (sc == sc_npoint) cmd_npoint(run, np_n);
        else if (sc == sc_diagrams) cmd_diagrams(run, dn, dk, checks);
        else if (sc == sc_lemma) cmd_lemmarep(run, lr, lp, checks);
        else if (sc == sc_sample) cmd_sample(run, checks);
        else if (sc == sc_mc) cmd_mc_delta_e(run);
        write_outputs(run, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const ConfigError& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        std::error_code ec;
        fs::create_directories(run.cfg.out, ec);
        std::ofstream f(run.path(".error.json"));
        f << canonical_dump(json{{"command", run.command}, {"error", e.what()}, {"config", config_json(run.cfg)}}) << "\n";
        return 3;
    }
    return run.all_pass ? 0 : 1;
}

}  // namespace phi4::cli
