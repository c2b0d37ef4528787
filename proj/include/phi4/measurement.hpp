#pragma once

#include <array>
#include <string>
#include <vector>

#include "phi4/cauchy.hpp"

namespace phi4 {

// Gaussian envelope exp(-2 dt^2/wt^2 - 2 |dx|^2/wx^2) times cos(k0 dx_0 - w0 dt), clipped at 4 widths.
// The sign of k0 sets the direction of travel.
struct WavePacket {
    double t0 = 0.0;
    std::array<double, 3> x0{0, 0, 0};
    double width_t = 3.2;
    double width_x = 3.2;
    double k0 = 2.5;
    double amplitude = 1.0;
};

enum class SourceRole { In, Out };

SpacetimeSource make_wavepacket_source(const LatticeSpec& lat, const WavePacket& p, SourceRole role);
// closed-form spacetime integral of the unclipped packet
double wavepacket_integral(const LatticeSpec& lat, const WavePacket& p);

struct MeasurementSetup {
    LatticeSpec lat;
    SpacetimeSource rho_in;
    SpacetimeSource rho_out;
    int order = 3;
    std::vector<double> c;  // P0 admixture per order (index n-1)
    std::vector<double> d;  // K0 admixture per order
    double tolerance = 1e-6;

    double c_n(int n) const { return n - 1 < static_cast<int>(c.size()) ? c[n - 1] : 0.0; }
    double d_n(int n) const { return n - 1 < static_cast<int>(d.size()) ? d[n - 1] : 0.0; }
};

MeasurementSetup make_setup(const LatticeSpec& lat, const std::vector<WavePacket>& in,
                            const std::vector<WavePacket>& out, int order);
// (t, x) -> (-t, -x) on the grid, times sign
SpacetimeSource pt_reflect(const LatticeSpec& lat, const SpacetimeSource& src, double sign);
// two packets in d=1 used by the acceptance runs
MeasurementSetup standard_scenario(double dt = 0.025);
// t -> -t with in and out sources exchanged; needs a symmetric time grid
MeasurementSetup mirrored(const MeasurementSetup& s);

struct FreeFields {
    SpacetimeField phi_in, dphi_in;    // S^(rho_in)/2
    SpacetimeField phi_out, dphi_out;  // Sv(rho_out)/2
};

FreeFields phi0_from_sources(const MeasurementSetup& s, Exec ex = Exec::Parallel);

struct GlobalExpansion {
    double lambda = 0.0;
    FreeFields free;
    std::vector<SpacetimeField> phi;   // phi[0] = phi_in + phi_out
    std::vector<SpacetimeField> dphi;
    std::vector<SpacetimeSource> rho;  // rho[n], n >= 1; rho[0] unused
    SpacetimeSource rho_tilde;         // sum lambda^n rho^(n)

    SpacetimeField total(int N) const;
    SpacetimeField total_dt(int N) const;
    SpacetimeSource rho_tilde_upto(const LatticeSpec& lat, int N) const;
};

GlobalExpansion global_expand(const MeasurementSetup& s, double lambda, Exec ex = Exec::Parallel);

// i K0-dot bilinear, real and symmetric: (L^d / 2pi) sum_k sum_{t,tau} cos(w(t - tau)) conj(r1_k(t)) r2_k(tau)
double kdot_bilinear(const LatticeSpec& lat, const SpacetimeField& r1, const SpacetimeField& r2,
                     Exec ex = Exec::Parallel);
// int r1(x) d/dt (S r2)(x) for the retarded (wedge) and advanced (vee) Green's functions
double sdotwedge_bilinear(const LatticeSpec& lat, const SpacetimeField& r1, const SpacetimeField& r2,
                          Exec ex = Exec::Parallel);
double sdotvee_bilinear(const LatticeSpec& lat, const SpacetimeField& r1, const SpacetimeField& r2,
                        Exec ex = Exec::Parallel);

// energies from the expansion forms; delta_E from its defining combination
EnergyReport energy_decomposition(const MeasurementSetup& s, const GlobalExpansion& g, int N = -1,
                                  Exec ex = Exec::Parallel);
inline EnergyReport delta_E(const MeasurementSetup& s, const GlobalExpansion& g, Exec ex = Exec::Parallel) {
    return energy_decomposition(s, g, -1, ex);
}

// Lattice energies on slices just outside the window for a given full solution.
EnergyReport slice_energies(const MeasurementSetup& s, const FreeFields& f, const SpacetimeField& phi,
                            const SpacetimeField& dphi);

// E_+ - E_+^free without subtracting large energies: expansion form and slice form
double plus_shift_expansion(const MeasurementSetup& s, const GlobalExpansion& g, int N, Exec ex = Exec::Parallel);
double plus_shift_slice(const MeasurementSetup& s, const FreeFields& f, const SpacetimeField& phi,
                        const SpacetimeField& dphi);

struct PicardResult {
    SpacetimeField phi, dphi;
    int iterations = 0;
    double last_update = 0.0;
};
// fixed point of phi = phi0 + lambda S0(chi phi^3 / 6)
PicardResult picard_solution(const MeasurementSetup& s, const FreeFields& f, double lambda, double tol = 1e-14,
                             int max_iter = 200, Exec ex = Exec::Parallel);

struct FdOracle {
    double series = 0.0;    // first-order coefficient from the expansion
    double measured = 0.0;  // from direct solves, Richardson in the coupling step
    double rel_err = 0.0;
    double step = 0.0;
};
// First-order energy shift from retarded direct solves started just before the window.
FdOracle first_order_fd(const MeasurementSetup& s, double step, Exec ex = Exec::Parallel);

struct SpacetimePoint {
    double t = 0.0;
    std::array<int, 3> i{0, 0, 0};  // grid indices
};

struct K0InnerResult {
    double lhs = 0.0;  // energy product of the real fields i K0(., x), i K0(., y)
    double rhs = 0.0;  // i K0-dot(y, x)
    double ratio = 0.0;
};
// keep: optional mode mask (same layout as ModeTable); empty keeps all retained modes
K0InnerResult k0_inner_check(const LatticeSpec& lat, const SpacetimePoint& x, const SpacetimePoint& y,
                             const std::vector<std::uint8_t>& keep = {});

// classical tree amplitudes ------------------------------------------------------

struct ExternalLeg {
    const SpacetimeField* field = nullptr;
    bool out = false;
};

struct NpointResult {
    double value = 0.0;
    int trees = 0;
    int vertices = 0;
    std::string diagnostic;
};

// Sum over labeled tree topologies with S0 internal lines, lambda per vertex, integrals masked to the window.
NpointResult npoint_amplitude(const LatticeSpec& lat, const std::vector<ExternalLeg>& legs, double lambda,
                              Exec ex = Exec::Parallel);

}  // namespace phi4
