#pragma once

#include <complex>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "annealtherm/chain.hpp"
#include "annealtherm/exact.hpp"
#include "annealtherm/schedule.hpp"

namespace annealtherm {

struct BathParams {
    double temperature_mk = 12.0;
    double coupling = 1e-4;                     // eta g^2, dimensionless
    double cutoff_ghz = 8.0 * 3.141592653589793;  // Ohmic cutoff omega_c

    void validate() const;  // temperature, cutoff > 0; coupling >= 0
};

/// (1/2) || x - y ||_1 over eigenvalues of the Hermitian difference.
double trace_distance(const DensityMatrix& x, const DensityMatrix& y);

/// Davies-Lindblad generator for a fixed Hamiltonian, built in its
/// eigenbasis with one independent Ohmic sigma^z bath per qubit.
///
/// Rates: gamma(omega) = 2 pi eta g^2 omega e^{-|omega|/omega_c}
///                       / (1 - e^{-beta_h omega}),  gamma(0) = 2 pi eta g^2 / beta_h,
/// with omega in GHz and gamma read as 1/ns (the 2 pi converts cycles to
/// radians). The Hamiltonian commutator carries the same convention:
/// d rho/dt = -i 2 pi [H, rho] + D[rho] with t in ns.
///
/// Matrix elements rho_ab in the eigenbasis couple only within groups of
/// equal Bohr frequency (binned within 1e-9 GHz), so the generator is
/// block-diagonal over those groups and a fixed-s propagation of any
/// duration is a set of small matrix exponentials.
class DaviesGenerator {
  public:
    /// General form: h_ghz real symmetric, one jump family per coupling
    /// operator; each coupling operator is diagonal in the computational
    /// basis and given by its diagonal.
    DaviesGenerator(const Eigen::MatrixXd& h_ghz, const std::vector<Eigen::VectorXd>& coupling_diags,
                    const BathParams& bath);

    /// Chain form: H(spec, A, B) with a sigma^z bath on every qubit.
    DaviesGenerator(const ChainSpec& spec, double a_ghz, double b_ghz, const BathParams& bath,
                    int n_cap = 5);

    double rate(double omega_ghz) const;  // gamma(omega), 1/ns

    /// d rho / dt in 1/ns, computational basis.
    DensityMatrix apply(const DensityMatrix& rho) const;

    /// Exact propagation of the (time-independent) generator by dt_us.
    DensityMatrix propagate(const DensityMatrix& rho, double dt_us) const;

    /// Unitary part only (the coupling = 0 path).
    DensityMatrix propagate_unitary(const DensityMatrix& rho, double dt_us) const;

    /// ||L rho||_F / (||L||_F ||rho||_F); ~1e-15 for the exact fixed point.
    double stationarity_residual(const DensityMatrix& rho) const;

    /// Gibbs state of this Hamiltonian at the bath temperature.
    DensityMatrix gibbs() const;

    struct PauseResult {
        DensityMatrix rho;
        double effective_us = 0.0;
        bool converged = false;
    };
    /// Propagates with exponentially growing checkpoints until the trace
    /// distance between consecutive checkpoints drops below tol.
    PauseResult pause_to_convergence(const DensityMatrix& rho0, double max_us = 1e7,
                                     double tol = 1e-6) const;

    const Eigen::VectorXd& energies() const { return eig_.values; }
    Eigen::Index dim() const { return eig_.values.size(); }

  private:
    void build(const std::vector<Eigen::VectorXd>& coupling_diags);

    BathParams bath_;
    double beta_;  // 1/GHz
    EigenSystem eig_;

    // Bohr classes of size one reduce to scalar decay+phase factors; larger
    // blocks (populations, degenerate coherences) keep dense sub-generators.
    // Short steps exponentiate blocks by a scaled Taylor series; long steps
    // (pauses) trigger a lazily computed spectral decomposition, with Taylor
    // fallback when the eigenvector matrix is ill conditioned. The lazy state
    // makes concurrent propagate() calls on one instance unsafe; sweeps give
    // each task its own generator.
    struct Singleton {
        int a, b;
        std::complex<double> g;
    };
    struct BohrBlock {
        std::vector<std::pair<int, int>> pairs;  // (a, b) with omega_ab in this bin
        Eigen::MatrixXcd generator;              // includes -i 2pi omega_ab diagonal
        double norm = 0.0;
        mutable Eigen::VectorXcd eigvals;
        mutable Eigen::MatrixXcd w;
        mutable Eigen::MatrixXcd w_inv;
        mutable int spectral_state = 0;  // 0 untried, 1 ok, -1 unusable
    };
    std::vector<Singleton> singletons_;
    std::vector<BohrBlock> blocks_;
    double generator_scale_ = 0.0;  // Frobenius norm over all blocks
};

struct AmeRun {
    ChainSpec spec;
    AnnealSchedule sched;
    ScheduleProtocol proto;
    BathParams bath;
    double rtol = 1e-6;
    double atol = 1e-9;
    std::vector<double> record_grid_us;  // extra recording times
    std::optional<DensityMatrix> initial_state;  // default: Gibbs at s(0)

    void validate() const;  // n <= 5, tolerances in (0, 1e-3]
};

struct TrajectoryOutput {
    std::vector<double> times_us;
    std::vector<double> s_values;
    std::vector<double> e_ising;
    std::vector<double> trace;
    Eigen::VectorXd populations_final;  // computational basis, at the end
    double trace_error = 0.0;           // max |Tr rho - 1| over the run
    DensityMatrix final_state;
};

/// Integrates the full protocol: pauses are propagated exactly per recorded
/// interval, ramps and quenches with an adaptive exponential-midpoint
/// stepper (the generator is frozen at the midpoint of each step and the
/// step halved until the Richardson error estimate meets rtol/atol).
TrajectoryOutput evolve(const AmeRun& run);

/// Same protocol machinery with the dissipator switched off.
TrajectoryOutput closed_system_evolve(const AmeRun& run);

struct QuenchCell {
    double s_p = 0.0;
    double rate = 0.0;  // 1/us; infinity = ideal projective measurement
    double e_ising = 0.0;
    double pause_effective_us = 0.0;
    double trace_error = 0.0;
    bool ok = true;
    std::string error;
};

struct QuenchSweepOptions {
    double rtol = 1e-6;
    double atol = 1e-9;
    double pause_tol = 1e-6;
    double max_pause_us = 1e7;
    bool closed_quench = false;  // propagate the quench unitarily
};

/// For each (s_p, rate): pause at s_p until the dissipative fixed point is
/// reached (from the maximally mixed state; the fixed point is unique), then
/// quench to s = 1 and report e_ising of the diagonal-projected final state.
/// Integrator failures are recorded per cell; the sweep continues.
std::vector<QuenchCell> quench_sweep(const ChainSpec& spec, const AnnealSchedule& sched,
                                     const BathParams& bath, const std::vector<double>& s_p_list,
                                     const std::vector<double>& rate_list,
                                     const QuenchSweepOptions& opts = {});

/// i.i.d. computational-basis samples from a population vector.
std::vector<SpinConfig> sample_measurements(const Eigen::VectorXd& populations, long shots,
                                            std::uint64_t seed);

/// || T exp(-i 2pi (ds/dt)^{-1} int_{s_p}^1 H(s') ds') - 1 ||_2 for the
/// uniform ferromagnetic chain (n >= 2; the n = 2 ring has a doubled bond).
double unitary_quench_norm(int n, const AnnealSchedule& sched, double s_p, double rate_us_inv,
                           int n_cap = 8);
double unitary_quench_norm(const ChainSpec& spec, const AnnealSchedule& sched, double s_p,
                           double rate_us_inv, int n_cap = 8);

/// Uniform ferromagnetic TFIM matrix for any n >= 2 (bypasses ChainSpec's
/// minimum size so scaling studies can include the two-site ring).
Eigen::MatrixXd uniform_chain_hamiltonian(int n, double a_ghz, double b_ghz);
Eigen::VectorXd uniform_chain_ising_diagonal(int n);

}  // namespace annealtherm
