#include "phi4/core.hpp"

#include <cmath>
#include <numbers>

namespace phi4 {

void LatticeSpec::validate() const {
    if (dim < 1 || dim > 3) throw ConfigError("lattice.dim must be 1, 2 or 3");
    if (N <= 0 || N % 2 != 0) throw ConfigError("lattice.N must be a positive even integer");
    if (!(L > 0)) throw ConfigError("lattice.L must be positive");
    if (mass < 0) throw ConfigError("lattice.mass must be >= 0");
    if (!(dt > 0)) throw ConfigError("lattice.dt must be positive");
    if (!(t_max > t_min)) throw ConfigError("lattice.t_max must exceed t_min");
    const double steps = (t_max - t_min) / dt;
    if (std::abs(steps - std::round(steps)) > 1e-9 * std::max(1.0, steps))
        throw ConfigError("lattice: (t_max - t_min) must be an integer multiple of dt");
    if (!(t_min < -T && T < t_max && T > 0)) throw ConfigError("lattice: need t_min < -T < T < t_max");
}

std::size_t LatticeSpec::points() const {
    std::size_t p = 1;
    for (int a = 0; a < dim; ++a) p *= static_cast<std::size_t>(N);
    return p;
}

std::size_t LatticeSpec::nt() const {
    return static_cast<std::size_t>(std::llround((t_max - t_min) / dt)) + 1;
}

double LatticeSpec::cell() const { return std::pow(h(), dim); }
double LatticeSpec::volume() const { return std::pow(L, dim); }

std::array<int, 3> LatticeSpec::unflatten(std::size_t i) const {
    std::array<int, 3> q{0, 0, 0};
    for (int a = dim - 1; a >= 0; --a) {
        q[a] = static_cast<int>(i % N);
        i /= N;
    }
    return q;
}

bool LatticeSpec::in_window(std::size_t j) const { return std::abs(time(j)) <= T + 1e-9 * dt; }

std::size_t LatticeSpec::first_after_window() const {
    std::size_t j = 0;
    while (j < nt() && time(j) <= T + 1e-9 * dt) ++j;
    return j;
}

std::size_t LatticeSpec::last_before_window() const {
    std::size_t j = 0;
    while (j + 1 < nt() && time(j + 1) < -T - 1e-9 * dt) ++j;
    return j;
}

ModeTable::ModeTable(const LatticeSpec& lat) : dim(lat.dim), N(lat.N), size(lat.points()) {
    k2.resize(size);
    omega.resize(size);
    retained.resize(size);
    partner.resize(size);
    n.resize(size);
    const double dk = 2.0 * std::numbers::pi / lat.L;
    for (std::size_t i = 0; i < size; ++i) {
        auto q = lat.unflatten(i);
        std::array<int, 3> nn{0, 0, 0};
        std::size_t p = 0;
        double kk = 0.0;
        bool zero = true;
        for (int a = 0; a < dim; ++a) {
            nn[a] = q[a] <= N / 2 ? q[a] : q[a] - N;
            kk += (nn[a] * dk) * (nn[a] * dk);
            zero = zero && nn[a] == 0;
            p = p * N + static_cast<std::size_t>((N - q[a]) % N);
        }
        n[i] = nn;
        k2[i] = kk;
        partner[i] = p;
        retained[i] = !(zero && lat.mass == 0.0);
        omega[i] = retained[i] ? std::sqrt(kk + lat.mass * lat.mass) : 0.0;
    }
}

FieldState SpacetimeField::state(std::size_t j, const SpacetimeField& dphi) const {
    FieldState s;
    s.phi.assign(slice(j), slice(j) + np);
    s.pi.assign(dphi.slice(j), dphi.slice(j) + np);
    return s;
}

SpacetimeSource SpacetimeSource::zeros(const LatticeSpec& lat) {
    SpacetimeSource s;
    s.values = SpacetimeField::zeros(lat);
    s.t_lo = lat.t_min;
    s.t_hi = lat.t_min;
    return s;
}

void SpacetimeSource::check_support(const LatticeSpec& lat) const {
    if (values.nt != lat.nt() || values.np != lat.points()) throw ConfigError("source grid shape mismatch");
    for (std::size_t j = 0; j < values.nt; ++j) {
        const double t = lat.time(j);
        if (t >= t_lo - 1e-12 && t <= t_hi + 1e-12) continue;
        for (std::size_t i = 0; i < values.np; ++i)
            if (values.at(j, i) != 0.0) throw DomainError("source nonzero outside its declared support");
    }
}

bool SpacetimeSource::empty() const {
    for (double x : values.v)
        if (x != 0.0) return false;
    return true;
}

void enforce_conjugate_symmetry(const ModeTable& modes, cplx* c) {
    for (std::size_t i = 0; i < modes.size; ++i) {
        const std::size_t p = modes.partner[i];
        if (p == i) {
            c[i] = cplx(c[i].real(), 0.0);
        } else if (i < p) {
            const cplx avg = 0.5 * (c[i] + std::conj(c[p]));
            c[i] = avg;
            c[p] = std::conj(avg);
        }
    }
}

SpectralField to_spectral(const LatticeSpec& lat, const FieldState& s) {
    const std::size_t np = lat.points();
    if (s.phi.size() != np || s.pi.size() != np) throw ConfigError("field shape does not match lattice");
    ModeTable modes(lat);
    SpectralField out;
    out.phi.resize(np);
    out.pi.resize(np);
    forward_real(lat, s.phi.data(), out.phi.data());
    forward_real(lat, s.pi.data(), out.pi.data());
    enforce_conjugate_symmetry(modes, out.phi.data());
    enforce_conjugate_symmetry(modes, out.pi.data());
    return out;
}

FieldState from_spectral(const LatticeSpec& lat, const SpectralField& s) {
    const std::size_t np = lat.points();
    if (s.phi.size() != np || s.pi.size() != np) throw ConfigError("spectral shape does not match lattice");
    FieldState out;
    out.phi.resize(np);
    out.pi.resize(np);
    inverse_real(lat, s.phi.data(), out.phi.data());
    inverse_real(lat, s.pi.data(), out.pi.data());
    return out;
}

std::vector<double> stiffness(const LatticeSpec& lat, const std::vector<double>& f) {
    ModeTable modes(lat);
    std::vector<cplx> c(f.size());
    forward_real(lat, f.data(), c.data());
    enforce_conjugate_symmetry(modes, c.data());
    const double m2 = lat.mass * lat.mass;
    for (std::size_t i = 0; i < c.size(); ++i) c[i] *= modes.k2[i] + m2;
    std::vector<double> out(f.size());
    inverse_real(lat, c.data(), out.data());
    return out;
}

double pairwise_sum(const double* x, std::size_t n) {
    if (n <= 16) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += x[i];
        return s;
    }
    const std::size_t h = n / 2;
    return pairwise_sum(x, h) + pairwise_sum(x + h, n - h);
}

double spatial_integral(const LatticeSpec& lat, const double* f) {
    return lat.cell() * pairwise_sum(f, lat.points());
}

double energy_free(const LatticeSpec& lat, const FieldState& s) { return energy(lat, s, 0.0); }

double energy(const LatticeSpec& lat, const FieldState& s, double lambda) {
    const std::size_t np = lat.points();
    if (s.phi.size() != np || s.pi.size() != np) throw ConfigError("field shape does not match lattice");
    auto kphi = stiffness(lat, s.phi);
    std::vector<double> dens(np);
    for (std::size_t i = 0; i < np; ++i) {
        const double p = s.phi[i];
        dens[i] = 0.5 * s.pi[i] * s.pi[i] + 0.5 * p * kphi[i] + lambda / 24.0 * p * p * p * p;
    }
    return spatial_integral(lat, dens.data());
}

double phi4_integral(const LatticeSpec& lat, const std::vector<double>& phi) {
    std::vector<double> d(phi.size());
    for (std::size_t i = 0; i < phi.size(); ++i) d[i] = phi[i] * phi[i] * phi[i] * phi[i];
    return spatial_integral(lat, d.data());
}

double energy_mode_sum(const LatticeSpec& lat, const ModeTable& modes, const SpectralField& s) {
    std::vector<double> terms(modes.size);
    const double m2 = lat.mass * lat.mass;
    for (std::size_t i = 0; i < modes.size; ++i)
        terms[i] = 0.5 * (std::norm(s.pi[i]) + (modes.k2[i] + m2) * std::norm(s.phi[i]));
    return lat.volume() * pairwise_sum(terms.data(), terms.size());
}

double energy_inner(const LatticeSpec& lat, const FieldState& a, const FieldState& b) {
    auto kb = stiffness(lat, b.phi);
    std::vector<double> dens(a.phi.size());
    for (std::size_t i = 0; i < dens.size(); ++i) dens[i] = 0.5 * (a.pi[i] * b.pi[i] + a.phi[i] * kb[i]);
    return spatial_integral(lat, dens.data());
}

double fock_inner(const LatticeSpec& lat, const FieldState& a, const FieldState& b) {
    ModeTable modes(lat);
    auto sa = to_spectral(lat, a);
    auto sb = to_spectral(lat, b);
    std::vector<double> terms(modes.size, 0.0);
    const cplx I(0.0, 1.0);
    for (std::size_t i = 0; i < modes.size; ++i) {
        if (!modes.retained[i]) continue;
        const double w = modes.omega[i];
        const cplx alpha = 0.5 * (sa.phi[i] + I * sa.pi[i] / w);
        const cplx beta = 0.5 * (sb.phi[i] + I * sb.pi[i] / w);
        terms[i] = w * (std::conj(alpha) * beta).real();
    }
    return 8.0 * std::numbers::pi * std::numbers::pi * lat.volume() * pairwise_sum(terms.data(), terms.size());
}

double spacetime_integral(const LatticeSpec& lat, const SpacetimeField& f) {
    std::vector<double> per(f.nt);
    for (std::size_t j = 0; j < f.nt; ++j) {
        const double w = (j == 0 || j + 1 == f.nt) ? 0.5 : 1.0;
        per[j] = w * pairwise_sum(f.slice(j), f.np);
    }
    return lat.dt * lat.cell() * pairwise_sum(per.data(), per.size());
}

double spacetime_dot(const LatticeSpec& lat, const SpacetimeField& a, const SpacetimeField& b) {
    SpacetimeField p(a.nt, a.np);
    for (std::size_t i = 0; i < a.v.size(); ++i) p.v[i] = a.v[i] * b.v[i];
    return spacetime_integral(lat, p);
}

}  // namespace phi4
