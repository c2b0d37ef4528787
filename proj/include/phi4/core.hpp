#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace phi4 {

using cplx = std::complex<double>;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NumericalInstability : std::runtime_error {
    double time;
    NumericalInstability(const std::string& what, double t) : std::runtime_error(what), time(t) {}
};

enum class Exec { Serial, Parallel };

struct LatticeSpec {
    int dim = 1;
    double L = 40.0;
    int N = 64;
    double mass = 0.0;
    double dt = 0.05;
    double t_min = -20.0;
    double t_max = 20.0;
    double T = 10.0;
    double lambda = 0.0;

    void validate() const;
    std::size_t points() const;  // N^d
    std::size_t nt() const;      // number of time grid points
    double h() const { return L / N; }
    double cell() const;    // h^d
    double volume() const;  // L^d
    double time(std::size_t j) const { return t_min + static_cast<double>(j) * dt; }
    double coord(int i) const { return -0.5 * L + i * h(); }
    // grid point i -> per-axis indices (axis 0 slowest)
    std::array<int, 3> unflatten(std::size_t i) const;
    bool in_window(std::size_t j) const;
    std::size_t first_after_window() const;
    std::size_t last_before_window() const;
};

// DFT mode table. Index layout matches the FFT output (row-major, axis 0 slowest).
struct ModeTable {
    int dim = 1;
    int N = 0;
    std::size_t size = 0;
    std::vector<double> k2;
    std::vector<double> omega;  // 0 on excluded modes
    std::vector<std::uint8_t> retained;
    std::vector<std::size_t> partner;  // index of -k
    std::vector<std::array<int, 3>> n;  // signed integer wave numbers, range (-N/2, N/2]

    explicit ModeTable(const LatticeSpec& lat);
    ModeTable() = default;
    bool self_conjugate(std::size_t i) const { return partner[i] == i; }
};

struct FieldState {
    std::vector<double> phi;
    std::vector<double> pi;
};

struct SpectralField {
    std::vector<cplx> phi;
    std::vector<cplx> pi;
};

// time-major array, nt x points
struct SpacetimeField {
    std::size_t nt = 0;
    std::size_t np = 0;
    std::vector<double> v;

    SpacetimeField() = default;
    SpacetimeField(std::size_t nt_, std::size_t np_) : nt(nt_), np(np_), v(nt_ * np_, 0.0) {}
    static SpacetimeField zeros(const LatticeSpec& lat) { return SpacetimeField(lat.nt(), lat.points()); }
    double* slice(std::size_t j) { return v.data() + j * np; }
    const double* slice(std::size_t j) const { return v.data() + j * np; }
    double& at(std::size_t j, std::size_t i) { return v[j * np + i]; }
    double at(std::size_t j, std::size_t i) const { return v[j * np + i]; }
    FieldState state(std::size_t j, const SpacetimeField& dphi) const;
};

struct SpacetimeSource {
    SpacetimeField values;
    double t_lo = 0.0;
    double t_hi = 0.0;

    static SpacetimeSource zeros(const LatticeSpec& lat);
    // exact zeros outside [t_lo, t_hi]
    void check_support(const LatticeSpec& lat) const;
    bool empty() const;
};

struct EnergyReport {
    double E_interaction = 0, E_plus = 0, E_minus = 0;
    double E_free_interaction = 0, E_free_plus = 0, E_free_minus = 0;
    double delta_E = 0;
    double delta_E_vee = 0;
    double delta_E_wedge = 0;
    double delta_E_rel_diff = 0;
    double k0id_residual = 0;
    double phi4_slice_plus = 0, phi4_slice_minus = 0;
    bool flagged = false;
    std::string diagnostics;

    void finalize_delta() {
        delta_E = (E_interaction - E_free_interaction) - (E_plus - E_free_plus);
    }
};

// spectral transforms (coefficients c_k with f(x_i) = sum_k c_k e^{2 pi i n.i/N})
SpectralField to_spectral(const LatticeSpec& lat, const FieldState& s);
FieldState from_spectral(const LatticeSpec& lat, const SpectralField& s);
void forward_real(const LatticeSpec& lat, const double* in, cplx* out);
void inverse_real(const LatticeSpec& lat, const cplx* in, double* out);
void enforce_conjugate_symmetry(const ModeTable& modes, cplx* c);

// (-Laplacian + m^2) applied spectrally
std::vector<double> stiffness(const LatticeSpec& lat, const std::vector<double>& f);

double energy(const LatticeSpec& lat, const FieldState& s, double lambda);
double energy_free(const LatticeSpec& lat, const FieldState& s);
double energy_mode_sum(const LatticeSpec& lat, const ModeTable& modes, const SpectralField& s);
double phi4_integral(const LatticeSpec& lat, const std::vector<double>& phi);
double energy_inner(const LatticeSpec& lat, const FieldState& a, const FieldState& b);
double fock_inner(const LatticeSpec& lat, const FieldState& a, const FieldState& b);

// fixed-order pairwise sum
double pairwise_sum(const double* x, std::size_t n);
double spacetime_integral(const LatticeSpec& lat, const SpacetimeField& f);
double spacetime_dot(const LatticeSpec& lat, const SpacetimeField& a, const SpacetimeField& b);
double spatial_integral(const LatticeSpec& lat, const double* f);

// snapshots
void write_snapshot(const std::string& path, const std::vector<std::uint64_t>& dims, const std::vector<double>& data);
std::vector<double> read_snapshot(const std::string& path, std::vector<std::uint64_t>& dims);
void write_state_csv(const std::string& path, const LatticeSpec& lat, const FieldState& s);

}  // namespace phi4
