#pragma once

#include <array>
#include <string>
#include <vector>

#include "phi4/core.hpp"

namespace phi4 {

enum class PropagatorKind { Retarded, Advanced, Causal, FundK0, FundP0, Feynman };

std::string to_string(PropagatorKind k);

// nt x modes complex array (time-major)
struct ModeSeries {
    std::size_t nt = 0;
    std::size_t nm = 0;
    std::vector<cplx> v;
    ModeSeries() = default;
    ModeSeries(std::size_t nt_, std::size_t nm_) : nt(nt_), nm(nm_), v(nt_ * nm_) {}
    cplx* slice(std::size_t j) { return v.data() + j * nm; }
    const cplx* slice(std::size_t j) const { return v.data() + j * nm; }
};

struct GreenResult {
    SpacetimeField phi;
    SpacetimeField dphi;
};

ModeSeries spectral_series(const LatticeSpec& lat, const SpacetimeField& f, Exec ex = Exec::Parallel);
SpacetimeField real_series(const LatticeSpec& lat, const ModeSeries& s, Exec ex = Exec::Parallel);

// Solves (d_t^2 + w^2) phi_k = rho_k mode-wise: Retarded integrates from the past,
// Advanced from the future, Causal is their average. Trapezoid weights in time.
GreenResult apply_green(const LatticeSpec& lat, PropagatorKind kind, const SpacetimeSource& src,
                        Exec ex = Exec::Parallel);
GreenResult apply_green(const LatticeSpec& lat, PropagatorKind kind, const SpacetimeField& rho,
                        Exec ex = Exec::Parallel);

// Free bi-solutions smeared against rho: FundP0 gives P0 rho, FundK0 gives the real field i K0 rho.
GreenResult apply_fundamental(const LatticeSpec& lat, PropagatorKind kind, const SpacetimeField& rho,
                              Exec ex = Exec::Parallel);

// Brute force O(nt^2) Duhamel sum for one mode; reference for tests.
std::vector<cplx> duhamel_reference(const std::vector<cplx>& f, double omega, double dt, bool retarded);

FieldState free_evolve(const LatticeSpec& lat, const FieldState& s, double dt);
SpectralField free_evolve(const LatticeSpec& lat, const ModeTable& modes, const SpectralField& s, double dt);

struct MomentumPoint {
    double omega = 0.0;
    std::array<double, 3> p{0, 0, 0};
    double eps = 1e-3;
    double square() const { return omega * omega - p[0] * p[0] - p[1] * p[1] - p[2] * p[2]; }
};

// epsilon-regularized scalar values: Feynman 1/(p^2+i eps), Causal Re of it, FundP0 gives pi*P0
cplx momentum_value(PropagatorKind kind, const MomentumPoint& p);

struct LemmaRepCase {
    std::vector<std::array<double, 4>> k;  // (omega_a, kx, ky, kz)
    std::array<double, 3> q{0, 0, 0};
};

struct LemmaRepResult {
    int r = 0;
    std::vector<double> p;  // |k_a + q|
    std::vector<double> eps;
    std::vector<cplx> lhs_eps, rhs_eps;
    std::vector<double> rel_err_eps;
    cplx lhs, rhs;
    double rel_err = 0.0;
};

LemmaRepResult verify_lemmarep(const LemmaRepCase& c, const std::vector<double>& eps_schedule = {1e-2, 5e-3, 2.5e-3},
                               Exec ex = Exec::Parallel);

}  // namespace phi4
