#include "phi4/propagators.hpp"

#include <cmath>
#include <numbers>

namespace phi4 {

std::string to_string(PropagatorKind k) {
    switch (k) {
        case PropagatorKind::Retarded: return "Retarded";
        case PropagatorKind::Advanced: return "Advanced";
        case PropagatorKind::Causal: return "Causal";
        case PropagatorKind::FundK0: return "FundK0";
        case PropagatorKind::FundP0: return "FundP0";
        case PropagatorKind::Feynman: return "Feynman";
    }
    return "?";
}

ModeSeries spectral_series(const LatticeSpec& lat, const SpacetimeField& f, Exec ex) {
    ModeTable modes(lat);
    ModeSeries out(f.nt, f.np);
    const long nt = static_cast<long>(f.nt);
#pragma omp parallel for schedule(static) if (ex == Exec::Parallel)
    for (long j = 0; j < nt; ++j) {
        forward_real(lat, f.slice(j), out.slice(j));
        enforce_conjugate_symmetry(modes, out.slice(j));
    }
    return out;
}

SpacetimeField real_series(const LatticeSpec& lat, const ModeSeries& s, Exec ex) {
    SpacetimeField out(s.nt, s.nm);
    const long nt = static_cast<long>(s.nt);
#pragma omp parallel for schedule(static) if (ex == Exec::Parallel)
    for (long j = 0; j < nt; ++j) inverse_real(lat, s.slice(j), out.slice(j));
    return out;
}

namespace {

// Strang form of the trapezoid Duhamel integral: the reported state at t_j contains
// half of the kick from f_j; the starting point carries weight 1/2.
void step_mode(const ModeSeries& f, std::size_t m, double w, double dt, bool reverse, ModeSeries& phi,
               ModeSeries& pi) {
    const std::size_t nt = f.nt;
    const double c = std::cos(w * dt), s = std::sin(w * dt);
    cplx x(0.0), pm(0.0);
    for (std::size_t jj = 0; jj < nt; ++jj) {
        const std::size_t j = reverse ? nt - 1 - jj : jj;
        const cplx fj = f.slice(j)[m];
        const cplx prep = pm + (jj > 0 ? 0.5 * dt * fj : cplx(0.0));
        phi.slice(j)[m] = x;
        pi.slice(j)[m] = reverse ? -prep : prep;
        const cplx pf = prep + 0.5 * dt * fj;
        const cplx xn = c * x + (s / w) * pf;
        pm = -w * s * x + c * pf;
        x = xn;
    }
}

void green_modes(const LatticeSpec& lat, const ModeTable& modes, const ModeSeries& f, bool reverse, ModeSeries& phi,
                 ModeSeries& pi, Exec ex) {
    const long nm = static_cast<long>(modes.size);
#pragma omp parallel for schedule(static) if (ex == Exec::Parallel)
    for (long m = 0; m < nm; ++m) {
        if (!modes.retained[m]) {
            for (std::size_t j = 0; j < f.nt; ++j) phi.slice(j)[m] = pi.slice(j)[m] = 0.0;
            continue;
        }
        step_mode(f, static_cast<std::size_t>(m), modes.omega[m], lat.dt, reverse, phi, pi);
    }
}

void check_shape(const LatticeSpec& lat, const SpacetimeField& rho) {
    if (rho.nt != lat.nt() || rho.np != lat.points()) throw ConfigError("source grid shape mismatch");
}

}  // namespace

GreenResult apply_green(const LatticeSpec& lat, PropagatorKind kind, const SpacetimeSource& src, Exec ex) {
    if (src.t_lo < lat.t_min - 1e-12 || src.t_hi > lat.t_max + 1e-12)
        throw DomainError("source support exceeds the time grid");
    src.check_support(lat);
    return apply_green(lat, kind, src.values, ex);
}

GreenResult apply_green(const LatticeSpec& lat, PropagatorKind kind, const SpacetimeField& rho, Exec ex) {
    check_shape(lat, rho);
    if (kind != PropagatorKind::Retarded && kind != PropagatorKind::Advanced && kind != PropagatorKind::Causal)
        throw DomainError("apply_green supports Retarded, Advanced and Causal only");
    ModeTable modes(lat);
    const ModeSeries f = spectral_series(lat, rho, ex);
    const std::size_t nt = f.nt, nm = f.nm;
    ModeSeries phi(nt, nm), pi(nt, nm);
    if (kind == PropagatorKind::Causal) {
        ModeSeries phi2(nt, nm), pi2(nt, nm);
        green_modes(lat, modes, f, false, phi, pi, ex);
        green_modes(lat, modes, f, true, phi2, pi2, ex);
        for (std::size_t i = 0; i < phi.v.size(); ++i) {
            phi.v[i] = 0.5 * (phi.v[i] + phi2.v[i]);
            pi.v[i] = 0.5 * (pi.v[i] + pi2.v[i]);
        }
    } else {
        green_modes(lat, modes, f, kind == PropagatorKind::Advanced, phi, pi, ex);
    }
    return {real_series(lat, phi, ex), real_series(lat, pi, ex)};
}

GreenResult apply_fundamental(const LatticeSpec& lat, PropagatorKind kind, const SpacetimeField& rho, Exec ex) {
    check_shape(lat, rho);
    if (kind != PropagatorKind::FundP0 && kind != PropagatorKind::FundK0)
        throw DomainError("apply_fundamental supports FundP0 and FundK0 only");
    ModeTable modes(lat);
    const ModeSeries f = spectral_series(lat, rho, ex);
    const std::size_t nt = f.nt, nm = f.nm;
    ModeSeries phi(nt, nm), pi(nt, nm);
    const bool p0 = kind == PropagatorKind::FundP0;
    const double inv2pi = 0.5 / std::numbers::pi;
    const long nml = static_cast<long>(nm);
#pragma omp parallel for schedule(static) if (ex == Exec::Parallel)
    for (long m = 0; m < nml; ++m) {
        if (!modes.retained[m]) continue;
        const double w = modes.omega[m];
        std::vector<cplx> cterm(nt), sterm(nt);
        for (std::size_t j = 0; j < nt; ++j) {
            const double wt = (j == 0 || j + 1 == nt) ? 0.5 : 1.0;
            const double t = lat.time(j);
            cterm[j] = wt * std::cos(w * t) * f.slice(j)[m];
            sterm[j] = wt * std::sin(w * t) * f.slice(j)[m];
        }
        cplx C(0.0), S(0.0);
        for (std::size_t j = 0; j < nt; ++j) {
            C += cterm[j];
            S += sterm[j];
        }
        C *= lat.dt;
        S *= lat.dt;
        for (std::size_t j = 0; j < nt; ++j) {
            const double t = lat.time(j), c = std::cos(w * t), s = std::sin(w * t);
            if (p0) {
                phi.slice(j)[m] = inv2pi / w * (c * C + s * S);
                pi.slice(j)[m] = inv2pi * (-s * C + c * S);
            } else {
                phi.slice(j)[m] = inv2pi / w * (s * C - c * S);
                pi.slice(j)[m] = inv2pi * (c * C + s * S);
            }
        }
    }
    return {real_series(lat, phi, ex), real_series(lat, pi, ex)};
}

std::vector<cplx> duhamel_reference(const std::vector<cplx>& f, double omega, double dt, bool retarded) {
    const std::size_t nt = f.size();
    std::vector<cplx> out(nt, 0.0);
    for (std::size_t j = 0; j < nt; ++j) {
        cplx acc(0.0);
        if (retarded) {
            for (std::size_t i = 0; i < j; ++i) {
                const double w = (i == 0) ? 0.5 : 1.0;
                acc += w * std::sin(omega * (j - i) * dt) / omega * f[i];
            }
        } else {
            for (std::size_t i = j + 1; i < nt; ++i) {
                const double w = (i + 1 == nt) ? 0.5 : 1.0;
                acc += w * std::sin(omega * (i - j) * dt) / omega * f[i];
            }
        }
        out[j] = dt * acc;
    }
    return out;
}

SpectralField free_evolve(const LatticeSpec& lat, const ModeTable& modes, const SpectralField& s, double dt) {
    SpectralField out = s;
    const double m2 = lat.mass * lat.mass;
    for (std::size_t i = 0; i < modes.size; ++i) {
        const double w = std::sqrt(modes.k2[i] + m2);
        const double c = std::cos(w * dt);
        const double sw = w > 0 ? std::sin(w * dt) / w : dt;
        const double ws = w * std::sin(w * dt);
        out.phi[i] = c * s.phi[i] + sw * s.pi[i];
        out.pi[i] = -ws * s.phi[i] + c * s.pi[i];
    }
    return out;
}

FieldState free_evolve(const LatticeSpec& lat, const FieldState& s, double dt) {
    ModeTable modes(lat);
    return from_spectral(lat, free_evolve(lat, modes, to_spectral(lat, s), dt));
}

cplx momentum_value(PropagatorKind kind, const MomentumPoint& p) {
    if (!(p.eps > 0)) throw DomainError("momentum_value requires eps > 0");
    const double p2 = p.square();
    const double den = p2 * p2 + p.eps * p.eps;
    switch (kind) {
        case PropagatorKind::Feynman: return cplx(p2 / den, -p.eps / den);
        case PropagatorKind::Causal: return cplx(p2 / den, 0.0);
        case PropagatorKind::FundP0: return cplx(p.eps / den, 0.0);
        default: throw DomainError("momentum_value: unsupported propagator kind " + to_string(kind));
    }
}

}  // namespace phi4
