#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "annealtherm/chain.hpp"
#include "annealtherm/thermal.hpp"

namespace annealtherm {

struct QmcConfig {
    int slices = 0;  // Trotter slices M; 0 selects the smallest M with
                     // beta_h * max(A, B) / M <= 0.05
    long therm_sweeps = 2000;
    long measure_sweeps = 20000;
    std::uint64_t seed = 1;
    int bins = 32;
};

struct QmcEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;  // inflated by sqrt(2 tau_int + 1)
    double tau_int = 0.0;  // integrated autocorrelation time, sweeps
    long n_samples = 0;
};

struct QmcResult {
    QmcEstimate e_ising;
    QmcEstimate m2;
    int slices = 0;
    bool equilibrated = true;  // first/second-half drift test at 3 sigma
};

/// Suzuki-Trotter couplings of the (1+1)D classical mapping:
/// K_space = beta_h B / M per spatial bond (sign follows -J_e),
/// K_tau   = -(1/2) ln tanh(beta_h A / M) per temporal bond.
/// Throws for A <= 0 (the classical limit has no mapping) or M < 2.
std::pair<double, double> trotter_couplings(const ThermalPoint& pt, int slices);

/// Smallest M satisfying the discretization rule for this point.
int default_slices(const ThermalPoint& pt);

/// Path-integral QMC with Wolff cluster updates on the space-time lattice.
/// Estimates <H_IM> and <M_z^2>; deterministic for a fixed seed.
/// Supports signed couplings (frustrated bonds); requires all h_i = 0.
QmcResult run_qmc(const ChainSpec& spec, const ThermalPoint& pt, const QmcConfig& cfg);

/// Runs run_qmc at each M and fits mean(M) = a + b / M^2 by weighted least
/// squares; returns a with propagated uncertainty (for e_ising).
QmcEstimate trotter_extrapolate(const ChainSpec& spec, const ThermalPoint& pt, const QmcConfig& cfg,
                                const std::vector<int>& slice_counts);

/// Estimate (mean, stderr, tau_int) of a measurement series with a
/// self-consistent autocorrelation window.
QmcEstimate series_estimate(const std::vector<double>& samples);

}  // namespace annealtherm
