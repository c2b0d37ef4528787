#include "phi4/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "phi4/diagrams.hpp"
#include "phi4/stochastic.hpp"

namespace phi4::acceptance {

namespace {

using Clock = std::chrono::steady_clock;
double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string num(double x) {
    char b[32];
    std::snprintf(b, sizeof b, "%.6g", x);
    return b;
}

std::string join(std::initializer_list<std::string> parts) {
    std::string s;
    for (const auto& p : parts) s += (s.empty() ? "" : ";") + p;
    return s;
}

std::string rat(const diagrams::Rational& r) {
    return r.denominator() == 1 ? std::to_string(r.numerator())
                                : std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

double relerr(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// log-log slopes of |expansion(N) - oracle| over the given couplings
std::vector<double> slopes(const std::vector<double>& ls, const std::vector<std::vector<double>>& errs) {
    std::vector<double> out;
    for (const auto& e : errs) out.push_back(fit_loglog(ls, e).slope);
    return out;
}

double drift_at(double dt, double lambda) {
    auto s = standard_scenario(dt);
    auto f = phi0_from_sources(s);
    const std::size_t js = s.lat.last_before_window(), jT = s.lat.first_after_window();
    FieldState st = f.phi_in.state(js, f.dphi_in);
    for (std::size_t i = 0; i < st.phi.size(); ++i) {
        st.phi[i] += f.phi_out.at(js, i);
        st.pi[i] += f.dphi_out.at(js, i);
    }
    DirectOptions o;
    o.start = js + 1;
    o.stop = jT - 1;
    o.mask = true;
    return direct_solve(s.lat, free_evolve(s.lat, st, s.lat.dt), lambda, o).max_rel_drift;
}

}  // namespace

std::string Result::line() const {
    return std::string(pass ? "PASS" : "FAIL") + " " + name + " " + observed + " " + expected + " " + tolerance;
}

Result diagram_counting() {
    const auto t0 = Clock::now();
    Result r{"diagram_counting"};
    int total = 0, bad = 0;
    for (int n = 0; n <= 8; ++n)
        for (int k = 0; k <= 3; ++k) {
            if (n == 0 && k == 0) continue;
            int count = 0;
            for (const auto& d : diagrams::enumerate_diagrams(n, k)) {
                ++count;
                if (!d.connected() || 2 * d.lines() != n + 4 * k || 2 * d.loops() != 2 * k - n + 2) ++bad;
            }
            total += count;
            if (count) r.details["counts"][std::to_string(n) + "," + std::to_string(k)] = count;
        }
    r.seconds = since(t0);
    r.details["diagrams"] = total;
    r.details["violations"] = bad;
    r.observed = join({std::to_string(bad), num(r.seconds)});
    r.expected = join({"0", "0"});
    r.tolerance = join({"0", num(tol::counting_runtime)});
    r.pass = bad == 0 && total > 0 && r.seconds < tol::counting_runtime;
    return r;
}

Result wick_weights() {
    using diagrams::Rational;
    const auto t0 = Clock::now();
    Result r{"wick_weights"};
    bool ok = true;
    std::string worst = "1";
    for (int n : {2, 4, 6}) {
        for (const auto& t : diagrams::enumerate_trees(n).trees) {
            const Rational w = diagrams::qft_weight(t);
            r.details["tree_" + std::to_string(n)].push_back(rat(w));
            if (w != Rational(1)) {
                ok = false;
                worst = rat(w);
            }
        }
    }
    const Rational tad = diagrams::qft_weight(diagrams::tadpole());
    r.details["tadpole"] = rat(tad);
    ok = ok && tad == Rational(1, 2);
    r.seconds = since(t0);
    r.observed = join({worst, rat(tad), num(r.seconds)});
    r.expected = join({"1", "1/2", "0"});
    r.tolerance = join({"exact", "exact", num(tol::wick_runtime)});
    r.pass = ok && r.seconds < tol::wick_runtime;
    return r;
}

Result beta_matching() {
    using diagrams::Rational;
    Result r{"beta_matching"};
    const auto a = diagrams::beta_match(diagrams::tadpole());
    const auto b = diagrams::beta_match(diagrams::simple_loop());
    const auto c = diagrams::beta_match(diagrams::triangle());
    // beta in units of 1/pi
    const Rational ratio = c.beta_pi / a.beta_pi;
    for (auto [key, w] : {std::pair{"tadpole", &a}, std::pair{"simple_loop", &b}, std::pair{"triangle", &c}}) {
        r.details[key] = {{"beta_times_pi", rat(w->beta_pi)},
                          {"beta_times_pi_symmetry_weighted", rat(w->beta_pi_symmetry)},
                          {"classical_weight", rat(w->classical_weight)},
                          {"quantum_weight", rat(w->quantum_weight)},
                          {"loop_length", w->loop_length}};
    }
    r.observed = join({rat(a.beta_pi) + "/pi", rat(b.beta_pi) + "/pi", rat(c.beta_pi) + "/pi", rat(ratio)});
    r.expected = join({"1/2/pi", "1/2/pi", "1/pi", "2"});
    r.tolerance = "exact";
    r.pass = a.beta_pi == Rational(1, 2) && b.beta_pi == Rational(1, 2) && c.beta_pi == Rational(1) &&
             ratio == Rational(2) && a.verified && b.verified && c.verified;
    return r;
}

Result lemmarep(std::uint64_t seed) {
    const auto t0 = Clock::now();
    Result r{"lemmarep"};
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst = 0.0, worst_r1 = 0.0;
    for (int order : {1, 2, 3}) {
        int done = 0;
        while (done < 5) {
            LemmaRepCase c;
            for (int a = 0; a < order; ++a) c.k.push_back({0.5 * u(rng), 1.5 * u(rng), 1.5 * u(rng), 1.5 * u(rng)});
            c.q = {0.3 * u(rng), 0.3 * u(rng), 0.3 * u(rng)};
            LemmaRepResult res;
            try {
                res = verify_lemmarep(c);
            } catch (const DomainError&) {
                continue;
            }
            if (*std::min_element(res.p.begin(), res.p.end()) < 0.3) continue;
            ++done;
            worst = std::max(worst, res.rel_err);
            nlohmann::json row{{"r", order}, {"rel_err", res.rel_err}, {"lhs", {res.lhs.real(), res.lhs.imag()}},
                               {"rhs", {res.rhs.real(), res.rhs.imag()}}};
            if (order == 1) {
                const cplx expect(0.0, -std::numbers::pi / res.p[0]);
                const double e = std::max(std::abs(res.lhs - expect), std::abs(res.rhs - expect)) / std::abs(expect);
                worst_r1 = std::max(worst_r1, e);
                row["err_vs_minus_i_pi_over_p"] = e;
            }
            r.details["cases"].push_back(row);
        }
    }
    r.seconds = since(t0);
    r.observed = join({num(worst), num(worst_r1), num(r.seconds)});
    r.expected = join({"0", "0", "0"});
    r.tolerance = join({num(tol::lemmarep_rel), num(tol::lemmarep_r1), num(tol::lemmarep_runtime)});
    r.pass = worst < tol::lemmarep_rel && worst_r1 < tol::lemmarep_r1 && r.seconds < tol::lemmarep_runtime;
    return r;
}

Result cauchy_convergence() {
    const auto t0 = Clock::now();
    Result r{"cauchy_convergence"};
    LatticeSpec lat;
    lat.dim = 1;
    lat.N = 64;
    lat.L = 40.0;
    lat.dt = 0.05;
    lat.t_min = -8.0;
    lat.t_max = 8.0;
    lat.T = 4.0;
    const auto init = packet_initial_data(lat, 2.0, 2.0, 1.0);
    std::vector<double> ls;
    for (int q = 0; q < 9; ++q) ls.push_back(std::pow(10.0, -3.0 + 0.25 * q));
    const auto rows = residual_study(lat, init, ls, 3);
    const auto fits = residual_slopes(rows, 3);
    bool ok = true;
    double dev = 0.0;
    std::string obs;
    for (int n = 1; n <= 3; ++n) {
        const double sl = fits[n - 1].slope;
        dev = std::max(dev, std::abs(sl - (n + 1)));
        ok = ok && std::abs(sl - (n + 1)) <= tol::slope;
        obs += (n > 1 ? ";" : "") + num(sl);
        r.details["slopes"].push_back(sl);
    }
    for (const auto& row : rows)
        r.details["rows"].push_back({{"lambda", row.lambda}, {"order", row.order}, {"sup_error", row.sup_error}});
    r.details["max_slope_deviation"] = dev;
    r.seconds = since(t0);
    r.observed = obs + ";" + num(r.seconds);
    r.expected = "2;3;4;0";
    r.tolerance = join({num(tol::slope), num(tol::slope), num(tol::slope), num(tol::cauchy_runtime)});
    r.pass = ok && r.seconds < tol::cauchy_runtime;
    return r;
}

Result solver_conservation(const Params& p) {
    Result r{"solver_conservation"};
    const double lam = 1.0;
    const double a = drift_at(p.dt, lam), b = drift_at(0.5 * p.dt, lam);
    const double ratio = a / b;
    r.details = {{"dt", p.dt}, {"drift", a}, {"drift_half_dt", b}, {"ratio", ratio}, {"lambda", lam}};
    r.observed = join({num(a), num(ratio)});
    r.expected = join({"0", num(tol::drift_ratio)});
    r.tolerance = join({num(tol::drift), num(tol::drift_ratio_rel * tol::drift_ratio)});
    r.pass = a <= tol::drift && std::abs(ratio - tol::drift_ratio) <= tol::drift_ratio_rel * tol::drift_ratio;
    return r;
}

Result delta_e_consistency(const Params& p) {
    Result r{"delta_e_consistency"};
    const auto s = standard_scenario(p.dt);
    const auto e = delta_E(s, global_expand(s, s.lat.lambda));
    const auto fd = first_order_fd(s, 0.1);
    r.details = {{"delta_E", e.delta_E},           {"delta_E_vee", e.delta_E_vee},
                 {"delta_E_wedge", e.delta_E_wedge}, {"rel_diff", e.delta_E_rel_diff},
                 {"fd_series", fd.series},         {"fd_measured", fd.measured},
                 {"fd_rel_err", fd.rel_err}};
    r.observed = join({num(e.delta_E_rel_diff), num(fd.rel_err)});
    r.expected = "0;0";
    r.tolerance = join({num(tol::vee_wedge), num(tol::fd)});
    r.pass = e.delta_E_rel_diff < tol::vee_wedge && fd.rel_err < tol::fd && !e.flagged;
    return r;
}

Result energy_decomposition(const Params& p) {
    Result r{"energy_decomposition"};
    const auto s = standard_scenario(p.dt);
    const auto e = delta_E(s, global_expand(s, s.lat.lambda));
    const double sp = e.E_plus - e.E_free_plus, sm = e.E_minus - e.E_free_minus;
    const double dec = std::abs(sp - sm) / std::abs(sp);

    const auto f = phi0_from_sources(s);
    std::vector<double> ls;
    std::vector<std::vector<double>> errs(3);
    for (int q = 0; q < 9; ++q) {
        const double lam = 0.01 * std::pow(10.0, q / 8.0);
        ls.push_back(lam);
        const auto pic = picard_solution(s, f, lam, 1e-15, 300);
        const double oracle = plus_shift_slice(s, f, pic.phi, pic.dphi);
        const auto g = global_expand(s, lam);
        for (int N = 1; N <= 3; ++N) errs[N - 1].push_back(std::abs(plus_shift_expansion(s, g, N) - oracle));
    }
    const auto sl = slopes(ls, errs);
    bool ok = dec <= tol::decomposition;
    for (int N = 1; N <= 3; ++N) ok = ok && std::abs(sl[N - 1] - (N + 1)) <= tol::slope;
    r.details = {{"plus_shift", sp}, {"minus_shift", sm}, {"rel_diff", dec}, {"lambdas", ls}, {"errors", errs},
                 {"slopes", sl}};
    r.observed = join({num(dec), num(sl[0]), num(sl[1]), num(sl[2])});
    r.expected = "0;2;3;4";
    r.tolerance = join({num(tol::decomposition), num(tol::slope), num(tol::slope), num(tol::slope)});
    r.pass = ok;
    return r;
}

Result stochastic_covariance(const Params& p) {
    const auto t0 = Clock::now();
    Result r{"stochastic_covariance"};
    const LatticeSpec lat = standard_scenario(p.dt).lat;
    StochasticConfig cfg{p.beta, p.samples, p.seed, p.stream};
    const auto ens = sample_ensemble(cfg, lat);
    std::vector<std::array<SpacetimePoint, 2>> pairs;
    for (int q = 0; q < 20; ++q)
        pairs.push_back({SpacetimePoint{0.25 * q - 2.5, {128 + q, 0, 0}}, SpacetimePoint{1.5 - 0.1 * q, {128 - (3 * q) % 17, 0, 0}}});
    std::vector<std::array<SpacetimePoint, 3>> triples;
    for (int q = 0; q < 10; ++q)
        triples.push_back({SpacetimePoint{0.0, {10 * q, 0, 0}}, SpacetimePoint{0.5, {10 * q + 1, 0, 0}},
                           SpacetimePoint{-0.7, {10 * q + 3, 0, 0}}});
    const auto cov = covariance_mc(lat, p.beta, ens, pairs);
    const auto odd = third_moment_mc(lat, ens, triples);
    double worst_cov = 0, worst_odd = 0;
    for (const auto& e : cov) {
        worst_cov = std::max(worst_cov, e.sigma_distance);
        r.details["covariance"].push_back(
            {{"mean", e.mean}, {"stderr", e.std_error}, {"target", e.target}, {"sigma_distance", e.sigma_distance}});
    }
    for (const auto& e : odd) {
        worst_odd = std::max(worst_odd, e.sigma_distance);
        r.details["third_moment"].push_back(
            {{"mean", e.mean}, {"stderr", e.std_error}, {"target", e.target}, {"sigma_distance", e.sigma_distance}});
    }
    r.seconds = since(t0);
    r.observed = join({num(worst_cov), num(worst_odd), num(r.seconds)});
    r.expected = "0;0;0";
    r.tolerance = join({num(tol::covariance_sigma), num(tol::covariance_sigma), num(tol::covariance_runtime)});
    r.pass = worst_cov < tol::covariance_sigma && worst_odd < tol::covariance_sigma && r.seconds < tol::covariance_runtime;
    return r;
}

Result zero_point_law(const Params& p) {
    Result r{"zero_point_law"};
    const LatticeSpec lat = standard_scenario(p.dt).lat;
    ModeTable modes(lat);
    const auto e1 = zero_point_energy(lat, p.beta, sample_ensemble({p.beta, p.samples, p.seed, p.stream}, lat));
    const auto e2 = zero_point_energy(lat, 2 * p.beta, sample_ensemble({2 * p.beta, p.samples, p.seed, p.stream + 1}, lat));
    // modes n = 1 .. 12, ratios against n = 1
    auto pick = [&](const std::vector<ModeEnergy>& es, int n) {
        for (const auto& e : es)
            if (modes.n[e.mode][0] == n) return e;
        throw ConfigError("zero_point_law: mode missing");
    };
    auto ratio_sigma = [](const ModeEnergy& a, const ModeEnergy& b, double expect) {
        const double q = a.mean / b.mean, sq = q * std::hypot(a.std_error / a.mean, b.std_error / b.mean);
        return std::pair{q, std::abs(q - expect) / sq};
    };
    const auto ref = pick(e1, 1);
    double worst_lin = 0, worst_beta = 0;
    for (int n = 1; n <= 12; ++n) {
        const auto a = pick(e1, n), b = pick(e2, n);
        nlohmann::json row{{"n", n}, {"omega", a.omega}, {"mean", a.mean}, {"stderr", a.std_error}, {"target", a.target}};
        if (n > 1) {
            auto [q, sig] = ratio_sigma(a, ref, a.omega / ref.omega);
            worst_lin = std::max(worst_lin, sig);
            row["ratio_to_n1"] = q;
            row["ratio_sigma"] = sig;
        }
        auto [qb, sb] = ratio_sigma(b, a, 0.5);
        worst_beta = std::max(worst_beta, sb);
        row["beta_doubling_ratio"] = qb;
        row["beta_doubling_sigma"] = sb;
        r.details["modes"].push_back(row);
    }
    r.observed = join({num(worst_lin), num(worst_beta)});
    r.expected = "0;0";
    r.tolerance = join({num(tol::zero_point_sigma), num(tol::zero_point_sigma)});
    r.pass = worst_lin < tol::zero_point_sigma && worst_beta < tol::zero_point_sigma;
    return r;
}

Result loop_monte_carlo(const Params& p) {
    const auto t0 = Clock::now();
    Result r{"loop_monte_carlo"};
    const auto s = standard_scenario(p.dt);
    const auto m = delta_E_mc(s, {p.beta, p.samples, p.seed, p.stream}, s.lat.lambda);
    r.seconds = since(t0);
    r.details = {{"mean", m.mean},
                 {"stderr", m.std_error},
                 {"tree", m.tree},
                 {"tadpole", m.tadpole},
                 {"prediction", m.prediction},
                 {"sigma_distance", m.sigma_distance},
                 {"tree_only_sigma", m.tree_only_sigma},
                 {"order2_tree", m.order2_tree},
                 {"coincident_covariance", m.coincident_covariance},
                 {"samples", m.samples},
                 {"beta", p.beta},
                 {"flagged", m.flagged}};
    r.observed = join({num(m.sigma_distance), num(r.seconds)});
    r.expected = "0;0";
    r.tolerance = join({num(tol::mc_sigma), num(tol::mc_runtime)});
    r.pass = m.sigma_distance < tol::mc_sigma && r.seconds < tol::mc_runtime;
    return r;
}

Result time_reflection(const Params& p) {
    Result r{"time_reflection"};
    const auto s = standard_scenario(p.dt);
    const auto m = mirrored(s);
    const auto g = global_expand(s, s.lat.lambda), gm = global_expand(m, s.lat.lambda);
    const auto e = delta_E(s, g), em = delta_E(m, gm);
    const double energies = std::max({relerr(em.E_plus, e.E_minus), relerr(em.E_minus, e.E_plus),
                                      relerr(em.delta_E_vee, e.delta_E_wedge), relerr(em.delta_E_wedge, e.delta_E_vee),
                                      relerr(em.E_interaction, e.E_interaction)});
    // full field: phi'(t) = phi(-t)
    const auto a = g.total(s.order), b = gm.total(s.order);
    const std::size_t nt = s.lat.nt(), np = s.lat.points();
    double err = 0, scale = 0;
    for (std::size_t j = 0; j < nt; ++j)
        for (std::size_t i = 0; i < np; ++i) {
            err = std::max(err, std::abs(b.at(j, i) - a.at(nt - 1 - j, i)));
            scale = std::max(scale, std::abs(a.at(j, i)));
        }
    const double field = err / scale;
    r.details = {{"energy_rel_err", energies}, {"field_rel_err", field}, {"E_plus", e.E_plus},
                 {"E_minus", e.E_minus},       {"mirror_E_plus", em.E_plus}, {"mirror_E_minus", em.E_minus}};
    r.observed = join({num(energies), num(field)});
    r.expected = "0;0";
    r.tolerance = join({num(tol::reflection), num(tol::reflection)});
    r.pass = energies <= tol::reflection && field <= tol::reflection;
    return r;
}

const std::vector<std::string>& names() {
    static const std::vector<std::string> n{"diagram_counting",    "wick_weights",         "beta_matching",
                                            "lemmarep",            "cauchy_convergence",   "solver_conservation",
                                            "delta_e_consistency", "energy_decomposition", "stochastic_covariance",
                                            "zero_point_law",      "loop_monte_carlo",     "time_reflection"};
    return n;
}

Result run(const std::string& name, const Params& p) {
    if (name == "diagram_counting") return diagram_counting();
    if (name == "wick_weights") return wick_weights();
    if (name == "beta_matching") return beta_matching();
    if (name == "lemmarep") return lemmarep(p.seed);
    if (name == "cauchy_convergence") return cauchy_convergence();
    if (name == "solver_conservation") return solver_conservation(p);
    if (name == "delta_e_consistency") return delta_e_consistency(p);
    if (name == "energy_decomposition") return energy_decomposition(p);
    if (name == "stochastic_covariance") return stochastic_covariance(p);
    if (name == "zero_point_law") return zero_point_law(p);
    if (name == "loop_monte_carlo") return loop_monte_carlo(p);
    if (name == "time_reflection") return time_reflection(p);
    throw ConfigError("unknown criterion: " + name);
}

}  // namespace phi4::acceptance
