#pragma once

#include <vector>

#include "phi4/propagators.hpp"

namespace phi4 {

struct PerturbationSeries {
    int order = 0;
    double lambda = 0.0;
    std::vector<SpacetimeField> phi;   // phi^(0) .. phi^(N)
    std::vector<SpacetimeField> dphi;  // time derivatives
    double rewrap_time = 0.0;

    SpacetimeField partial_sum(int N, double lam) const;
    SpacetimeField partial_sum_dt(int N, double lam) const;
};

// rho^(n) = sum_{a+b+c=n-1} phi^(a) phi^(b) phi^(c) / 6, optionally masked to [-T, T]
SpacetimeSource rho_n(const LatticeSpec& lat, const std::vector<SpacetimeField>& terms, int n, bool mask,
                      Exec ex = Exec::Parallel);

// Free evolution of initial data given at t_min, sampled on the time grid.
GreenResult free_trajectory(const LatticeSpec& lat, const FieldState& initial, Exec ex = Exec::Parallel);

// Retarded expansion of the Cauchy problem with data at t_min.
PerturbationSeries perturbative_cauchy(const LatticeSpec& lat, const FieldState& initial, double lambda, int N,
                                       Exec ex = Exec::Parallel);

struct DirectOptions {
    std::size_t start = 0;               // grid index carrying the initial data
    std::size_t stop = static_cast<std::size_t>(-1);  // last grid index (inclusive); default end of grid
    bool mask = false;                   // nonlinearity only inside [-T, T]
    double blowup = 1e6;                 // max |phi| before giving up
    bool record_energy = true;
};

struct Trajectory {
    std::size_t start = 0;
    SpacetimeField phi;   // rows start..stop, others zero
    SpacetimeField dphi;
    std::vector<double> energy;  // full energy at each recorded step
    double max_rel_drift = 0.0;
};

// Strang split step: half nonlinear kick, exact free rotation, half kick.
Trajectory direct_solve(const LatticeSpec& lat, const FieldState& initial, double lambda, const DirectOptions& opt = {},
                        Exec ex = Exec::Parallel);

// Drop modes excluded from the dynamics (the zero mode when massless).
FieldState project_retained(const LatticeSpec& lat, const FieldState& s);

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
};
SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

struct ResidualRow {
    double lambda = 0.0;
    int order = 0;
    double sup_error = 0.0;
    double l2_error = 0.0;
};

// partial sums of orders 1..max_order against the direct solver, one row per (lambda, order)
std::vector<ResidualRow> residual_study(const LatticeSpec& lat, const FieldState& initial,
                                        const std::vector<double>& lambdas, int max_order, Exec ex = Exec::Parallel);
std::vector<SlopeFit> residual_slopes(const std::vector<ResidualRow>& rows, int max_order);
void write_residual_csv(const std::string& path, const std::vector<ResidualRow>& rows);

// smooth packet used by the convergence study
FieldState packet_initial_data(const LatticeSpec& lat, double amplitude, double width, double k0);

}  // namespace phi4
