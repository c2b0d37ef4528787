#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "phi4/core.hpp"

namespace testutil {

inline phi4::LatticeSpec small_lattice(int dim = 1, int N = 32, double L = 20.0) {
    phi4::LatticeSpec lat;
    lat.dim = dim;
    lat.N = N;
    lat.L = L;
    lat.dt = 0.05;
    lat.t_min = -5.0;
    lat.t_max = 5.0;
    lat.T = 2.0;
    return lat;
}

// smooth random zero-mean field: random low modes
inline std::vector<double> random_field(const phi4::LatticeSpec& lat, std::mt19937_64& rng, int kmax = 6) {
    std::normal_distribution<double> g;
    const std::size_t np = lat.points();
    std::vector<phi4::cplx> c(np, 0.0);
    phi4::ModeTable modes(lat);
    for (std::size_t i = 0; i < np; ++i) {
        bool ok = modes.retained[i] && !(modes.n[i][0] == 0 && modes.n[i][1] == 0 && modes.n[i][2] == 0);
        for (int a = 0; a < lat.dim; ++a) ok = ok && std::abs(modes.n[i][a]) <= kmax;
        if (ok) c[i] = phi4::cplx(g(rng), g(rng));
    }
    phi4::enforce_conjugate_symmetry(modes, c.data());
    std::vector<double> f(np);
    phi4::inverse_real(lat, c.data(), f.data());
    return f;
}

inline phi4::FieldState random_state(const phi4::LatticeSpec& lat, std::mt19937_64& rng, int kmax = 6) {
    return {random_field(lat, rng, kmax), random_field(lat, rng, kmax)};
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

inline double max_abs(const std::vector<double>& v) {
    double m = 0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace testutil
