#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace phi4::acceptance {

// pinned tolerances
namespace tol {
constexpr double counting_runtime = 10.0;  // s
constexpr double wick_runtime = 30.0;
constexpr double lemmarep_rel = 1e-3;
constexpr double lemmarep_r1 = 1e-4;
constexpr double lemmarep_runtime = 20.0;
constexpr double slope = 0.15;
constexpr double cauchy_runtime = 120.0;
constexpr double drift = 1e-8;
constexpr double drift_ratio = 4.0;
constexpr double drift_ratio_rel = 0.2;
constexpr double vee_wedge = 1e-6;
constexpr double fd = 0.03;
constexpr double decomposition = 1e-6;
constexpr double covariance_sigma = 4.0;
constexpr double covariance_runtime = 60.0;
constexpr double zero_point_sigma = 3.0;
constexpr double mc_sigma = 3.0;
constexpr double mc_runtime = 120.0;
constexpr double reflection = 1e-8;
}  // namespace tol

struct Params {
    std::uint64_t seed = 20240601;
    std::uint64_t stream = 0;
    double beta = 1.0;
    int samples = 4096;
    double dt = 0.025;
};

struct Result {
    std::string name;
    std::string observed, expected, tolerance;  // ';' separates parts of a compound criterion
    bool pass = false;
    double seconds = 0.0;
    nlohmann::json details;  // deterministic content only
    std::string line() const;
};

Result diagram_counting();
Result wick_weights();
Result beta_matching();
Result lemmarep(std::uint64_t seed);
Result cauchy_convergence();
Result solver_conservation(const Params& p);
Result delta_e_consistency(const Params& p);
Result energy_decomposition(const Params& p);
Result stochastic_covariance(const Params& p);
Result zero_point_law(const Params& p);
Result loop_monte_carlo(const Params& p);
Result time_reflection(const Params& p);

// criterion names in order
const std::vector<std::string>& names();
Result run(const std::string& name, const Params& p = {});

}  // namespace phi4::acceptance
