#include "phi4/measurement.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace phi4 {

namespace {

double wrap(double d, double L) {
    d = std::fmod(d + 0.5 * L, L);
    if (d < 0) d += L;
    return d - 0.5 * L;
}

SpacetimeField sum_fields(const SpacetimeField& a, const SpacetimeField& b, double sb = 1.0) {
    SpacetimeField out = a;
    for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] += sb * b.v[i];
    return out;
}

FieldState slice_state(const SpacetimeField& phi, const SpacetimeField& dphi, std::size_t j) {
    return phi.state(j, dphi);
}

FieldState diff_state(const FieldState& a, const FieldState& b) {
    FieldState out = a;
    for (std::size_t i = 0; i < out.phi.size(); ++i) {
        out.phi[i] -= b.phi[i];
        out.pi[i] -= b.pi[i];
    }
    return out;
}

SpacetimeField scaled(const SpacetimeField& a, double s) {
    SpacetimeField out = a;
    for (auto& x : out.v) x *= s;
    return out;
}

}  // namespace

SpacetimeSource make_wavepacket_source(const LatticeSpec& lat, const WavePacket& p, SourceRole role) {
    lat.validate();
    if (!(p.width_t > 0) || !(p.width_x > 0)) throw ConfigError("wave packet widths must be positive");
    const double lo = p.t0 - 4 * p.width_t, hi = p.t0 + 4 * p.width_t;
    if (role == SourceRole::In && !(lo > lat.t_min && hi < -lat.T))
        throw ConfigError("incoming packet support must lie in (t_min, -T)");
    if (role == SourceRole::Out && !(lo > lat.T && hi < lat.t_max))
        throw ConfigError("outgoing packet support must lie in (T, t_max)");
    if (4 * p.width_x > 0.5 * lat.L) throw ConfigError("wave packet wider than half the box");
    SpacetimeSource src = SpacetimeSource::zeros(lat);
    src.t_lo = lo;
    src.t_hi = hi;
    const double w0 = std::sqrt(p.k0 * p.k0 + lat.mass * lat.mass);
    for (std::size_t j = 0; j < lat.nt(); ++j) {
        const double dt = lat.time(j) - p.t0;
        if (std::abs(dt) > 4 * p.width_t) continue;
        double* row = src.values.slice(j);
        for (std::size_t i = 0; i < lat.points(); ++i) {
            const auto ix = lat.unflatten(i);
            double r2 = 0.0, dx0 = 0.0;
            bool inside = true;
            for (int a = 0; a < lat.dim; ++a) {
                const double dx = wrap(lat.coord(ix[a]) - p.x0[a], lat.L);
                if (std::abs(dx) > 4 * p.width_x) inside = false;
                r2 += dx * dx;
                if (a == 0) dx0 = dx;
            }
            if (!inside) continue;
            row[i] = p.amplitude * std::exp(-2 * dt * dt / (p.width_t * p.width_t) - 2 * r2 / (p.width_x * p.width_x)) *
                     std::cos(p.k0 * dx0 - w0 * dt);
        }
    }
    return src;
}

double wavepacket_integral(const LatticeSpec& lat, const WavePacket& p) {
    const double w0 = std::sqrt(p.k0 * p.k0 + lat.mass * lat.mass);
    const double g = std::sqrt(0.5 * std::numbers::pi);
    double v = p.amplitude * g * p.width_t * std::exp(-w0 * w0 * p.width_t * p.width_t / 8);
    for (int a = 0; a < lat.dim; ++a) v *= g * p.width_x;
    return v * std::exp(-p.k0 * p.k0 * p.width_x * p.width_x / 8);
}

MeasurementSetup make_setup(const LatticeSpec& lat, const std::vector<WavePacket>& in,
                            const std::vector<WavePacket>& out, int order) {
    lat.validate();
    if (order < 1) throw ConfigError("expansion order must be >= 1");
    MeasurementSetup s;
    s.lat = lat;
    s.order = order;
    auto add = [&](const std::vector<WavePacket>& ps, SourceRole role, SpacetimeSource& dst) {
        dst = SpacetimeSource::zeros(lat);
        dst.t_lo = role == SourceRole::In ? lat.t_min : lat.T;
        dst.t_hi = role == SourceRole::In ? -lat.T : lat.t_max;
        bool first = true;
        for (const auto& p : ps) {
            auto src = make_wavepacket_source(lat, p, role);
            for (std::size_t i = 0; i < dst.values.v.size(); ++i) dst.values.v[i] += src.values.v[i];
            dst.t_lo = first ? src.t_lo : std::min(dst.t_lo, src.t_lo);
            dst.t_hi = first ? src.t_hi : std::max(dst.t_hi, src.t_hi);
            first = false;
        }
    };
    add(in, SourceRole::In, s.rho_in);
    add(out, SourceRole::Out, s.rho_out);
    return s;
}

SpacetimeSource pt_reflect(const LatticeSpec& lat, const SpacetimeSource& src, double sign) {
    if (std::abs(lat.t_min + lat.t_max) > 1e-12 * std::abs(lat.t_max))
        throw ConfigError("space-time reflection needs t_min = -t_max");
    SpacetimeSource out = SpacetimeSource::zeros(lat);
    const std::size_t nt = lat.nt(), np = lat.points();
    for (std::size_t j = 0; j < nt; ++j) {
        const double* in = src.values.slice(nt - 1 - j);
        double* o = out.values.slice(j);
        for (std::size_t i = 0; i < np; ++i) {
            auto ix = lat.unflatten(i);
            std::size_t r = 0;
            for (int a = 0; a < lat.dim; ++a) r = r * lat.N + (lat.N - ix[a]) % lat.N;
            o[i] = sign * in[r];
        }
    }
    out.t_lo = -src.t_hi;
    out.t_hi = -src.t_lo;
    return out;
}

MeasurementSetup standard_scenario(double dt) {
    LatticeSpec lat;
    lat.dim = 1;
    lat.N = 256;
    lat.L = 80.0;
    lat.dt = dt;
    lat.t_min = -45.0;
    lat.t_max = 45.0;
    lat.T = 16.0;
    lat.lambda = 1.0;
    WavePacket in;
    in.t0 = -30.0;
    in.x0 = {-31.0, 0, 0};
    in.k0 = 2.5;
    in.amplitude = 1.0;
    MeasurementSetup s = make_setup(lat, {in}, {}, 3);
    // observer: negated space-time mirror image, on the same light ray
    s.rho_out = pt_reflect(lat, s.rho_in, -1.0);
    return s;
}

MeasurementSetup mirrored(const MeasurementSetup& s) {
    const LatticeSpec& lat = s.lat;
    if (std::abs(lat.t_min + lat.t_max) > 1e-12 * std::abs(lat.t_max))
        throw ConfigError("time reflection needs t_min = -t_max");
    auto flip = [&](const SpacetimeSource& src) {
        SpacetimeSource out = SpacetimeSource::zeros(lat);
        const std::size_t nt = lat.nt();
        for (std::size_t j = 0; j < nt; ++j)
            std::copy(src.values.slice(nt - 1 - j), src.values.slice(nt - 1 - j) + lat.points(), out.values.slice(j));
        out.t_lo = -src.t_hi;
        out.t_hi = -src.t_lo;
        return out;
    };
    MeasurementSetup m = s;
    m.rho_in = flip(s.rho_out);
    m.rho_out = flip(s.rho_in);
    return m;
}

FreeFields phi0_from_sources(const MeasurementSetup& s, Exec ex) {
    FreeFields f;
    auto r = apply_green(s.lat, PropagatorKind::Retarded, s.rho_in, ex);
    auto a = apply_green(s.lat, PropagatorKind::Advanced, s.rho_out, ex);
    // S kernels invert -box; apply_green inverts +box
    f.phi_in = scaled(r.phi, -0.5);
    f.dphi_in = scaled(r.dphi, -0.5);
    f.phi_out = scaled(a.phi, -0.5);
    f.dphi_out = scaled(a.dphi, -0.5);
    return f;
}

SpacetimeField GlobalExpansion::total(int N) const {
    if (N < 0 || N >= static_cast<int>(phi.size())) N = static_cast<int>(phi.size()) - 1;
    SpacetimeField out = phi[0];
    double ln = 1.0;
    for (int n = 1; n <= N; ++n) {
        ln *= lambda;
        for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] += ln * phi[n].v[i];
    }
    return out;
}

SpacetimeField GlobalExpansion::total_dt(int N) const {
    if (N < 0 || N >= static_cast<int>(dphi.size())) N = static_cast<int>(dphi.size()) - 1;
    SpacetimeField out = dphi[0];
    double ln = 1.0;
    for (int n = 1; n <= N; ++n) {
        ln *= lambda;
        for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] += ln * dphi[n].v[i];
    }
    return out;
}

SpacetimeSource GlobalExpansion::rho_tilde_upto(const LatticeSpec& lat, int N) const {
    if (N < 0 || N >= static_cast<int>(rho.size())) return rho_tilde;
    SpacetimeSource out = SpacetimeSource::zeros(lat);
    out.t_lo = -lat.T;
    out.t_hi = lat.T;
    double ln = 1.0;
    for (int n = 1; n <= N; ++n) {
        ln *= lambda;
        for (std::size_t i = 0; i < out.values.v.size(); ++i) out.values.v[i] += ln * rho[n].values.v[i];
    }
    return out;
}

GlobalExpansion global_expand(const MeasurementSetup& s, double lambda, Exec ex) {
    if (s.order < 1) throw ConfigError("expansion order must be >= 1");
    const LatticeSpec& lat = s.lat;
    GlobalExpansion g;
    g.lambda = lambda;
    g.free = phi0_from_sources(s, ex);
    g.phi.push_back(sum_fields(g.free.phi_in, g.free.phi_out));
    g.dphi.push_back(sum_fields(g.free.dphi_in, g.free.dphi_out));
    g.rho.emplace_back();
    for (int n = 1; n <= s.order; ++n) {
        auto r = rho_n(lat, g.phi, n, true, ex);
        // S0 = -(R + A)/2
        auto c = apply_green(lat, PropagatorKind::Causal, r, ex);
        SpacetimeField p = scaled(c.phi, -1.0), dp = scaled(c.dphi, -1.0);
        if (s.c_n(n) != 0.0) {
            auto f = apply_fundamental(lat, PropagatorKind::FundP0, r.values, ex);
            p = sum_fields(p, f.phi, s.c_n(n));
            dp = sum_fields(dp, f.dphi, s.c_n(n));
        }
        if (s.d_n(n) != 0.0) {
            auto f = apply_fundamental(lat, PropagatorKind::FundK0, r.values, ex);
            p = sum_fields(p, f.phi, s.d_n(n));
            dp = sum_fields(dp, f.dphi, s.d_n(n));
        }
        g.phi.push_back(std::move(p));
        g.dphi.push_back(std::move(dp));
        g.rho.push_back(std::move(r));
    }
    g.rho_tilde = SpacetimeSource::zeros(lat);
    g.rho_tilde.t_lo = -lat.T;
    g.rho_tilde.t_hi = lat.T;
    g.rho_tilde = g.rho_tilde_upto(lat, s.order);
    return g;
}

double kdot_bilinear(const LatticeSpec& lat, const SpacetimeField& r1, const SpacetimeField& r2, Exec ex) {
    ModeTable modes(lat);
    const ModeSeries f1 = spectral_series(lat, r1, ex);
    const ModeSeries f2 = spectral_series(lat, r2, ex);
    const std::size_t nt = lat.nt(), nm = modes.size;
    std::vector<double> terms(nm, 0.0);
    const long nml = static_cast<long>(nm);
#pragma omp parallel for schedule(static) if (ex == Exec::Parallel)
    for (long m = 0; m < nml; ++m) {
        if (!modes.retained[m]) continue;
        const double w = modes.omega[m];
        cplx C1(0.0), S1(0.0), C2(0.0), S2(0.0);
        for (std::size_t j = 0; j < nt; ++j) {
            const double wt = (j == 0 || j + 1 == nt) ? 0.5 : 1.0;
            const double t = lat.time(j), c = wt * std::cos(w * t), s = wt * std::sin(w * t);
            C1 += c * f1.slice(j)[m];
            S1 += s * f1.slice(j)[m];
            C2 += c * f2.slice(j)[m];
            S2 += s * f2.slice(j)[m];
        }
        terms[m] = (std::conj(C1) * C2 + std::conj(S1) * S2).real();
    }
    return lat.volume() * lat.dt * lat.dt / (2 * std::numbers::pi) * pairwise_sum(terms.data(), nm);
}

double sdotwedge_bilinear(const LatticeSpec& lat, const SpacetimeField& r1, const SpacetimeField& r2, Exec ex) {
    auto g = apply_green(lat, PropagatorKind::Retarded, r2, ex);
    return -spacetime_dot(lat, r1, g.dphi);
}

double sdotvee_bilinear(const LatticeSpec& lat, const SpacetimeField& r1, const SpacetimeField& r2, Exec ex) {
    auto g = apply_green(lat, PropagatorKind::Advanced, r2, ex);
    return -spacetime_dot(lat, r1, g.dphi);
}

EnergyReport energy_decomposition(const MeasurementSetup& s, const GlobalExpansion& g, int N, Exec ex) {
    const LatticeSpec& lat = s.lat;
    const double q = std::numbers::pi / 4;
    const SpacetimeSource rt = g.rho_tilde_upto(lat, N);
    const SpacetimeField& in = s.rho_in.values;
    const SpacetimeField& out = s.rho_out.values;
    const SpacetimeField a = sum_fields(in, out, -1.0);
    EnergyReport r;
    r.E_interaction = q * kdot_bilinear(lat, sum_fields(a, rt.values), sum_fields(a, rt.values), ex);
    r.E_free_interaction = q * kdot_bilinear(lat, a, a, ex);
    r.E_plus = q * kdot_bilinear(lat, sum_fields(in, rt.values), sum_fields(in, rt.values), ex);
    r.E_free_plus = q * kdot_bilinear(lat, in, in, ex);
    r.E_minus = q * kdot_bilinear(lat, sum_fields(out, rt.values), sum_fields(out, rt.values), ex);
    r.E_free_minus = q * kdot_bilinear(lat, out, out, ex);
    r.finalize_delta();
    // -(1/4) Sv-dot(rho~, rho_out) and +(1/4) S^-dot(rho~, rho_in), through the stored free fields
    r.delta_E_vee = -0.5 * spacetime_dot(lat, rt.values, g.free.dphi_out);
    r.delta_E_wedge = 0.5 * spacetime_dot(lat, rt.values, g.free.dphi_in);
    const double den = std::max(std::abs(r.delta_E_vee), std::abs(r.delta_E_wedge));
    r.delta_E_rel_diff = den > 0 ? std::abs(r.delta_E_vee - r.delta_E_wedge) / den : 0.0;
    r.k0id_residual = 2 * q * kdot_bilinear(lat, a, rt.values, ex);

    const int Nuse = (N < 0 || N > s.order) ? s.order : N;
    const SpacetimeField phi = g.total(Nuse);
    const std::size_t jp = lat.first_after_window() - 1, jm = lat.last_before_window() + 1;
    r.phi4_slice_plus = phi4_integral(lat, std::vector<double>(phi.slice(jp), phi.slice(jp) + lat.points()));
    r.phi4_slice_minus = phi4_integral(lat, std::vector<double>(phi.slice(jm), phi.slice(jm) + lat.points()));

    std::ostringstream diag;
    if (r.delta_E_rel_diff > s.tolerance) {
        r.flagged = true;
        diag << "two delta_E formulas differ by " << r.delta_E_rel_diff << "; ";
    }
    const double slice_gap = g.lambda / 24.0 * std::abs(r.phi4_slice_plus - r.phi4_slice_minus);
    if (slice_gap > s.tolerance * std::abs(r.E_interaction)) {
        r.flagged = true;
        diag << "phi^4 slice terms at +-T differ by " << slice_gap << "; ";
    }
    r.diagnostics = diag.str();
    return r;
}

EnergyReport slice_energies(const MeasurementSetup& s, const FreeFields& f, const SpacetimeField& phi,
                            const SpacetimeField& dphi) {
    const LatticeSpec& lat = s.lat;
    const std::size_t jp = lat.first_after_window(), jm = lat.last_before_window();
    const FieldState full_p = slice_state(phi, dphi, jp), full_m = slice_state(phi, dphi, jm);
    const FieldState in_p = slice_state(f.phi_in, f.dphi_in, jp), out_p = slice_state(f.phi_out, f.dphi_out, jp);
    const FieldState in_m = slice_state(f.phi_in, f.dphi_in, jm), out_m = slice_state(f.phi_out, f.dphi_out, jm);
    FieldState free_p = in_p;
    for (std::size_t i = 0; i < free_p.phi.size(); ++i) {
        free_p.phi[i] += out_p.phi[i];
        free_p.pi[i] += out_p.pi[i];
    }
    EnergyReport r;
    r.E_interaction = energy_free(lat, full_p);
    r.E_free_interaction = energy_free(lat, free_p);
    r.E_plus = energy_free(lat, diff_state(full_p, out_p));
    r.E_free_plus = energy_free(lat, in_p);
    r.E_minus = energy_free(lat, diff_state(full_m, in_m));
    r.E_free_minus = energy_free(lat, out_m);
    r.finalize_delta();
    return r;
}

double plus_shift_expansion(const MeasurementSetup& s, const GlobalExpansion& g, int N, Exec ex) {
    const SpacetimeSource rt = g.rho_tilde_upto(s.lat, N);
    return std::numbers::pi / 2 * kdot_bilinear(s.lat, s.rho_in.values, rt.values, ex) +
           std::numbers::pi / 4 * kdot_bilinear(s.lat, rt.values, rt.values, ex);
}

double plus_shift_slice(const MeasurementSetup& s, const FreeFields& f, const SpacetimeField& phi,
                        const SpacetimeField& dphi) {
    const std::size_t jp = s.lat.first_after_window();
    const FieldState in = slice_state(f.phi_in, f.dphi_in, jp);
    FieldState delta = diff_state(diff_state(slice_state(phi, dphi, jp), in), slice_state(f.phi_out, f.dphi_out, jp));
    return 2 * energy_inner(s.lat, in, delta) + energy_free(s.lat, delta);
}

PicardResult picard_solution(const MeasurementSetup& s, const FreeFields& f, double lambda, double tol, int max_iter,
                             Exec ex) {
    const LatticeSpec& lat = s.lat;
    const SpacetimeField phi0 = sum_fields(f.phi_in, f.phi_out), dphi0 = sum_fields(f.dphi_in, f.dphi_out);
    PicardResult res{phi0, dphi0, 0, 0.0};
    double scale = 0.0;
    for (double x : phi0.v) scale = std::max(scale, std::abs(x));
    for (int it = 1; it <= max_iter; ++it) {
        std::vector<SpacetimeField> one{res.phi};
        auto r = rho_n(lat, one, 1, true, ex);
        auto c = apply_green(lat, PropagatorKind::Causal, r, ex);
        double upd = 0.0;
        for (std::size_t i = 0; i < res.phi.v.size(); ++i) {
            const double p = phi0.v[i] - lambda * c.phi.v[i];
            upd = std::max(upd, std::abs(p - res.phi.v[i]));
            res.phi.v[i] = p;
            res.dphi.v[i] = dphi0.v[i] - lambda * c.dphi.v[i];
        }
        res.iterations = it;
        res.last_update = scale > 0 ? upd / scale : upd;
        if (res.last_update <= tol) return res;
        if (!std::isfinite(res.last_update)) throw NumericalInstability("Picard iteration diverged", 0.0);
    }
    return res;
}

FdOracle first_order_fd(const MeasurementSetup& s, double step, Exec ex) {
    const LatticeSpec& lat = s.lat;
    const FreeFields f = phi0_from_sources(s, ex);
    const SpacetimeField phi0 = sum_fields(f.phi_in, f.phi_out), dphi0 = sum_fields(f.dphi_in, f.dphi_out);
    FdOracle o;
    o.step = step;
    {
        std::vector<SpacetimeField> one{phi0};
        auto r1 = rho_n(lat, one, 1, true, ex);
        o.series = -0.5 * spacetime_dot(lat, r1.values, f.dphi_out);
    }
    const std::size_t js = lat.last_before_window(), jT = lat.first_after_window();
    if (s.rho_in.t_hi >= lat.time(js) || s.rho_out.t_lo <= lat.time(jT))
        throw ConfigError("finite-difference oracle needs sources outside the slices next to the window");
    const FieldState start = slice_state(phi0, dphi0, js);
    const FieldState free_T = slice_state(phi0, dphi0, jT);
    const FieldState out_T = slice_state(f.phi_out, f.dphi_out, jT);
    const double e_free = energy_free(lat, free_T) - energy_free(lat, diff_state(free_T, out_T));
    DirectOptions opt;
    opt.start = js;
    opt.stop = jT;
    opt.mask = true;
    opt.record_energy = false;
    auto shift = [&](double l) {
        auto tr = direct_solve(lat, start, l, opt, ex);
        const FieldState x = tr.phi.state(jT, tr.dphi);
        return energy_free(lat, x) - energy_free(lat, diff_state(x, out_T)) - e_free;
    };
    auto central = [&](double h) { return (shift(h) - shift(-h)) / (2 * h); };
    const double d1 = central(step), d2 = central(0.5 * step);
    // retarded bookkeeping counts the cross term twice relative to the global expansion
    o.measured = 0.5 * (4 * d2 - d1) / 3;
    o.rel_err = std::abs(o.measured - o.series) / std::abs(o.series);
    return o;
}

K0InnerResult k0_inner_check(const LatticeSpec& lat, const SpacetimePoint& x, const SpacetimePoint& y,
                             const std::vector<std::uint8_t>& keep) {
    ModeTable modes(lat);
    const double A = 1.0 / (2 * std::numbers::pi * lat.volume());
    const double t_obs = 0.37;
    auto field = [&](const SpacetimePoint& p) {
        SpectralField sp{std::vector<cplx>(modes.size, 0.0), std::vector<cplx>(modes.size, 0.0)};
        for (std::size_t m = 0; m < modes.size; ++m) {
            if (!modes.retained[m] || (!keep.empty() && !keep[m])) continue;
            const double w = modes.omega[m];
            double ph = 0.0;
            for (int a = 0; a < lat.dim; ++a) ph -= 2 * std::numbers::pi * modes.n[m][a] * p.i[a] / lat.N;
            const cplx e = std::polar(A, ph);
            sp.phi[m] = std::sin(w * (t_obs - p.t)) / w * e;
            sp.pi[m] = std::cos(w * (t_obs - p.t)) * e;
        }
        return from_spectral(lat, sp);
    };
    K0InnerResult r;
    r.lhs = energy_inner(lat, field(x), field(y));
    std::vector<double> terms(modes.size, 0.0);
    for (std::size_t m = 0; m < modes.size; ++m) {
        if (!modes.retained[m] || (!keep.empty() && !keep[m])) continue;
        double ph = 0.0;
        for (int a = 0; a < lat.dim; ++a) ph += 2 * std::numbers::pi * modes.n[m][a] * (y.i[a] - x.i[a]) / lat.N;
        terms[m] = std::cos(modes.omega[m] * (y.t - x.t)) * std::cos(ph);
    }
    r.rhs = A * pairwise_sum(terms.data(), terms.size());
    r.ratio = r.lhs / r.rhs;
    return r;
}

}  // namespace phi4
