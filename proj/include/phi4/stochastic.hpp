#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "phi4/measurement.hpp"

namespace phi4 {

// Philox4x32-10 counter-based generator
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;
PhiloxCounter philox4x32(PhiloxCounter ctr, PhiloxKey key);

// four standard normals for (seed, stream, sample, mode), Box-Muller on 53-bit uniforms
std::array<double, 4> philox_normals(std::uint64_t seed, std::uint64_t stream, std::uint64_t sample, std::uint64_t mode);

struct StochasticConfig {
    double beta = 1.0;
    int samples = 4096;
    std::uint64_t seed = 20240601;
    std::uint64_t stream = 0;
    void validate() const;
};

// Cauchy data of one background field at t = 0
struct StochasticSample {
    SpectralField xi;
};

// <|xi_k|^2> = 1 / (2 pi beta omega L^d); <|pi_k|^2> = omega^2 times that; 0 on excluded modes
std::vector<double> mode_variance(const LatticeSpec& lat, double beta);

StochasticSample sample_xi(const StochasticConfig& cfg, const LatticeSpec& lat, std::uint64_t sample_index);
std::vector<StochasticSample> sample_ensemble(const StochasticConfig& cfg, const LatticeSpec& lat,
                                              Exec ex = Exec::Parallel);

// real-space state at time t
FieldState xi_state(const LatticeSpec& lat, const StochasticSample& s, double t);
// field value at one space-time point by direct mode sum
double xi_value(const LatticeSpec& lat, const ModeTable& modes, const StochasticSample& s, const SpacetimePoint& x);

struct MomentEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    double target = 0.0;
    double sigma_distance = 0.0;  // |mean - target| / std_error
};

// P0(x, y) / beta as a box mode sum
double covariance_target(const LatticeSpec& lat, double beta, const SpacetimePoint& x, const SpacetimePoint& y);

std::vector<MomentEstimate> covariance_mc(const LatticeSpec& lat, double beta,
                                          const std::vector<StochasticSample>& samples,
                                          const std::vector<std::array<SpacetimePoint, 2>>& pairs);
std::vector<MomentEstimate> mean_mc(const LatticeSpec& lat, const std::vector<StochasticSample>& samples,
                                    const std::vector<SpacetimePoint>& points);
// <xi(x) xi(y) xi(z)>, target 0
std::vector<MomentEstimate> third_moment_mc(const LatticeSpec& lat, const std::vector<StochasticSample>& samples,
                                            const std::vector<std::array<SpacetimePoint, 3>>& triples);
// <xi1 xi2 xi3 xi4> against the sum over the three pairings
MomentEstimate fourth_moment_mc(const LatticeSpec& lat, double beta, const std::vector<StochasticSample>& samples,
                                const std::array<SpacetimePoint, 4>& pts);

struct ModeEnergy {
    std::size_t mode = 0;
    double omega = 0.0;
    double mean = 0.0;
    double std_error = 0.0;
    double target = 0.0;  // zero_point_constant * omega / (2 pi beta)
};
// box-convention factor in front of omega / (2 pi beta); fixed by the covariance oracle
constexpr double zero_point_constant = 1.0;
// per-mode energy (L^d / 2)(|pi_k|^2 + omega^2 |xi_k|^2), summed over modes this is the free energy
std::vector<ModeEnergy> zero_point_energy(const LatticeSpec& lat, double beta,
                                          const std::vector<StochasticSample>& samples);

struct DeltaEMc {
    double mean = 0.0;
    double std_error = 0.0;
    double tree = 0.0;        // deterministic first-order shift
    double tadpole = 0.0;     // background correction, weight 1/2 C(x, x)
    double prediction = 0.0;  // tree + tadpole
    double sigma_distance = 0.0;
    double tree_only_sigma = 0.0;  // distance from the bare tree value
    double order2_tree = 0.0;      // deterministic second-order shift, truncation check
    double coincident_covariance = 0.0;
    int samples = 0;
    bool flagged = false;
};
// first-order Delta E with phi0 = phi_in + phi_out + xi, averaged over the ensemble
DeltaEMc delta_E_mc(const MeasurementSetup& s, const StochasticConfig& cfg, double lambda, Exec ex = Exec::Parallel);

}  // namespace phi4
