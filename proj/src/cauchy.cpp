#include "phi4/cauchy.hpp"

#include <cmath>
#include <fstream>

namespace phi4 {

SpacetimeField PerturbationSeries::partial_sum(int N, double lam) const {
    SpacetimeField out = phi.at(0);
    double ln = 1.0;
    for (int n = 1; n <= N; ++n) {
        ln *= lam;
        const auto& t = phi.at(n);
        for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] += ln * t.v[i];
    }
    return out;
}

SpacetimeField PerturbationSeries::partial_sum_dt(int N, double lam) const {
    SpacetimeField out = dphi.at(0);
    double ln = 1.0;
    for (int n = 1; n <= N; ++n) {
        ln *= lam;
        const auto& t = dphi.at(n);
        for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] += ln * t.v[i];
    }
    return out;
}

SpacetimeSource rho_n(const LatticeSpec& lat, const std::vector<SpacetimeField>& terms, int n, bool mask, Exec ex) {
    if (n < 1) throw std::invalid_argument("rho_n: order must be >= 1");
    if (static_cast<int>(terms.size()) < n) throw std::invalid_argument("rho_n: missing lower-order term");
    const std::size_t nt = lat.nt(), np = lat.points();
    SpacetimeSource out = SpacetimeSource::zeros(lat);
    out.t_lo = mask ? -lat.T : lat.t_min;
    out.t_hi = mask ? lat.T : lat.t_max;
    std::vector<std::array<int, 3>> parts;
    for (int a = 0; a < n; ++a)
        for (int b = 0; a + b < n; ++b) parts.push_back({a, b, n - 1 - a - b});
    const long ntl = static_cast<long>(nt);
#pragma omp parallel for schedule(static) if (ex == Exec::Parallel)
    for (long j = 0; j < ntl; ++j) {
        if (mask && !lat.in_window(j)) continue;
        double* o = out.values.slice(j);
        for (const auto& p : parts) {
            const double* A = terms[p[0]].slice(j);
            const double* B = terms[p[1]].slice(j);
            const double* C = terms[p[2]].slice(j);
            for (std::size_t i = 0; i < np; ++i) o[i] += A[i] * B[i] * C[i] / 6.0;
        }
    }
    return out;
}

FieldState project_retained(const LatticeSpec& lat, const FieldState& s) {
    ModeTable modes(lat);
    auto sp = to_spectral(lat, s);
    for (std::size_t i = 0; i < modes.size; ++i)
        if (!modes.retained[i]) sp.phi[i] = sp.pi[i] = 0.0;
    return from_spectral(lat, sp);
}

GreenResult free_trajectory(const LatticeSpec& lat, const FieldState& initial, Exec ex) {
    ModeTable modes(lat);
    const auto sp = to_spectral(lat, initial);
    const std::size_t nt = lat.nt(), nm = modes.size;
    ModeSeries phi(nt, nm), pi(nt, nm);
    const long ntl = static_cast<long>(nt);
#pragma omp parallel for schedule(static) if (ex == Exec::Parallel)
    for (long j = 0; j < ntl; ++j) {
        const double t = lat.time(j) - lat.t_min;
        for (std::size_t m = 0; m < nm; ++m) {
            if (!modes.retained[m]) continue;
            const double w = modes.omega[m], c = std::cos(w * t), s = std::sin(w * t);
            phi.slice(j)[m] = c * sp.phi[m] + s / w * sp.pi[m];
            pi.slice(j)[m] = -w * s * sp.phi[m] + c * sp.pi[m];
        }
    }
    return {real_series(lat, phi, ex), real_series(lat, pi, ex)};
}

PerturbationSeries perturbative_cauchy(const LatticeSpec& lat, const FieldState& initial, double lambda, int N,
                                       Exec ex) {
    if (N < 0) throw std::invalid_argument("perturbative_cauchy: order must be >= 0");
    PerturbationSeries s;
    s.order = N;
    s.lambda = lambda;
    s.rewrap_time = 0.5 * lat.L;
    auto g0 = free_trajectory(lat, initial, ex);
    s.phi.push_back(std::move(g0.phi));
    s.dphi.push_back(std::move(g0.dphi));
    for (int n = 1; n <= N; ++n) {
        auto src = rho_n(lat, s.phi, n, false, ex);
        // S^ = -(retarded inverse of the wave operator)
        auto g = apply_green(lat, PropagatorKind::Retarded, src.values, ex);
        for (auto& x : g.phi.v) x = -x;
        for (auto& x : g.dphi.v) x = -x;
        s.phi.push_back(std::move(g.phi));
        s.dphi.push_back(std::move(g.dphi));
    }
    return s;
}

Trajectory direct_solve(const LatticeSpec& lat, const FieldState& initial, double lambda, const DirectOptions& opt,
                        Exec ex) {
    (void)ex;
    ModeTable modes(lat);
    const std::size_t nt = lat.nt(), np = lat.points();
    const std::size_t stop = std::min(opt.stop, nt - 1);
    if (opt.start > stop) throw std::invalid_argument("direct_solve: start after stop");
    Trajectory tr;
    tr.start = opt.start;
    tr.phi = SpacetimeField(nt, np);
    tr.dphi = SpacetimeField(nt, np);
    auto sp = to_spectral(lat, initial);
    for (std::size_t m = 0; m < modes.size; ++m)
        if (!modes.retained[m]) sp.phi[m] = sp.pi[m] = 0.0;
    std::vector<double> phi(np), pi(np), f(np);
    std::vector<cplx> fk(np);
    std::vector<double> cw(modes.size), sw(modes.size);
    for (std::size_t m = 0; m < modes.size; ++m) {
        const double w = modes.omega[m];
        cw[m] = std::cos(w * lat.dt);
        sw[m] = std::sin(w * lat.dt);
    }
    auto force = [&](std::size_t j) {
        // fk = spectral coefficients of -(lambda/6) chi phi^3
        const double coef = (opt.mask && !lat.in_window(j)) ? 0.0 : -lambda / 6.0;
        for (std::size_t i = 0; i < np; ++i) f[i] = coef * phi[i] * phi[i] * phi[i];
        forward_real(lat, f.data(), fk.data());
        enforce_conjugate_symmetry(modes, fk.data());
        for (std::size_t m = 0; m < modes.size; ++m)
            if (!modes.retained[m]) fk[m] = 0.0;
    };
    auto record = [&](std::size_t j) {
        inverse_real(lat, sp.pi.data(), pi.data());
        std::copy(phi.begin(), phi.end(), tr.phi.slice(j));
        std::copy(pi.begin(), pi.end(), tr.dphi.slice(j));
        if (opt.record_energy) {
            const double coup = (opt.mask && !lat.in_window(j)) ? 0.0 : lambda;
            tr.energy.push_back(energy_mode_sum(lat, modes, sp) + coup / 24.0 * phi4_integral(lat, phi));
        }
    };
    inverse_real(lat, sp.phi.data(), phi.data());
    record(opt.start);
    force(opt.start);
    for (std::size_t j = opt.start; j < stop; ++j) {
        for (std::size_t m = 0; m < modes.size; ++m) {
            if (!modes.retained[m]) continue;
            const double w = modes.omega[m];
            const cplx p = sp.pi[m] + 0.5 * lat.dt * fk[m];
            const cplx x = sp.phi[m];
            sp.phi[m] = cw[m] * x + sw[m] / w * p;
            sp.pi[m] = -w * sw[m] * x + cw[m] * p;
        }
        inverse_real(lat, sp.phi.data(), phi.data());
        double mx = 0;
        for (double v : phi) mx = std::max(mx, std::abs(v));
        if (!(mx < opt.blowup))
            throw NumericalInstability("direct_solve: field norm exceeded bound", lat.time(j + 1));
        force(j + 1);
        for (std::size_t m = 0; m < modes.size; ++m) sp.pi[m] += 0.5 * lat.dt * fk[m];
        record(j + 1);
    }
    if (!tr.energy.empty()) {
        const double e0 = tr.energy.front();
        for (double e : tr.energy) tr.max_rel_drift = std::max(tr.max_rel_drift, std::abs(e - e0) / std::abs(e0));
    }
    return tr;
}

SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    SlopeFit f;
    f.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    f.intercept = (sy - f.slope * sx) / n;
    return f;
}

std::vector<ResidualRow> residual_study(const LatticeSpec& lat, const FieldState& initial,
                                        const std::vector<double>& lambdas, int max_order, Exec ex) {
    auto ser = perturbative_cauchy(lat, initial, 0.0, max_order, ex);
    DirectOptions opt;
    opt.record_energy = false;
    std::vector<ResidualRow> rows;
    const double w = lat.dt * lat.cell();
    for (double l : lambdas) {
        auto tr = direct_solve(lat, initial, l, opt, ex);
        for (int n = 1; n <= max_order; ++n) {
            auto ps = ser.partial_sum(n, l);
            ResidualRow r{l, n, 0.0, 0.0};
            std::vector<double> sq(ps.v.size());
            for (std::size_t i = 0; i < ps.v.size(); ++i) {
                const double e = ps.v[i] - tr.phi.v[i];
                r.sup_error = std::max(r.sup_error, std::abs(e));
                sq[i] = e * e;
            }
            r.l2_error = std::sqrt(w * pairwise_sum(sq.data(), sq.size()));
            rows.push_back(r);
        }
    }
    return rows;
}

std::vector<SlopeFit> residual_slopes(const std::vector<ResidualRow>& rows, int max_order) {
    std::vector<SlopeFit> out;
    for (int n = 1; n <= max_order; ++n) {
        std::vector<double> x, y;
        for (const auto& r : rows)
            if (r.order == n) {
                x.push_back(r.lambda);
                y.push_back(r.sup_error);
            }
        out.push_back(fit_loglog(x, y));
    }
    return out;
}

void write_residual_csv(const std::string& path, const std::vector<ResidualRow>& rows) {
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot open " + path);
    f.precision(17);
    f << "lambda,order,sup_error,l2_error\n";
    for (const auto& r : rows) f << r.lambda << ',' << r.order << ',' << r.sup_error << ',' << r.l2_error << '\n';
}

FieldState packet_initial_data(const LatticeSpec& lat, double amplitude, double width, double k0) {
    const std::size_t np = lat.points();
    FieldState s{std::vector<double>(np), std::vector<double>(np, 0.0)};
    for (std::size_t i = 0; i < np; ++i) {
        const auto ix = lat.unflatten(i);
        double r2 = 0.0;
        for (int a = 0; a < lat.dim; ++a) r2 += lat.coord(ix[a]) * lat.coord(ix[a]);
        s.phi[i] = amplitude * std::exp(-r2 / (2 * width * width)) * std::cos(k0 * lat.coord(ix[0]));
    }
    return project_retained(lat, s);
}

}  // namespace phi4
