#pragma once

#include <Eigen/Dense>

#include "annealtherm/chain.hpp"
#include "annealtherm/thermal.hpp"

namespace annealtherm {

using DensityMatrix = Eigen::MatrixXcd;

struct GibbsResult {
    double e_ising = 0.0;      // <H_IM>, dimensionless
    double m2 = 0.0;           // <M_z^2>, per-site normalized, in [0, 1]
    double free_energy = 0.0;  // GHz
    double gap = 0.0;          // E_1 - E_0, GHz
};

/// H = -A sum_i sigma^x_i + B (sum_e J_e sigma^z_e sigma^z_{e+1}
///                             + sum_i h_i sigma^z_i), in GHz.
/// Basis ordering: site 0 is the most significant bit; bit 0 means spin up.
/// Real symmetric in the computational basis. n capped (default 14).
Eigen::MatrixXd build_hamiltonian(const ChainSpec& spec, double a_ghz, double b_ghz, int n_cap = 14);

/// Diagonal of H_IM over the computational basis, index-ordered as above.
Eigen::VectorXd ising_diagonal(const ChainSpec& spec);

/// Diagonal of M_z^2 over the computational basis.
Eigen::VectorXd m2_diagonal(int n);

/// Spin values of basis state `index`: +1 for bit 0, -1 for bit 1.
SpinConfig config_from_index(std::uint64_t index, int n);

/// Dense symmetric eigendecomposition (LAPACK divide and conquer).
/// Columns of `vectors` are eigenvectors; eigenvalues ascending.
struct EigenSystem {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
};
EigenSystem sym_eig(const Eigen::MatrixXd& h);

/// One eigendecomposition reused across temperatures.
class EdSolution {
  public:
    EdSolution(const ChainSpec& spec, double a_ghz, double b_ghz, int n_cap = 14);

    GibbsResult gibbs(double temperature_mk) const;
    DensityMatrix gibbs_state(double temperature_mk) const;
    /// Computational-basis populations of the Gibbs state.
    Eigen::VectorXd gibbs_populations(double temperature_mk) const;

    const Eigen::VectorXd& energies() const { return eig_.values; }
    const Eigen::MatrixXd& eigenvectors() const { return eig_.vectors; }

  private:
    int n_;
    EigenSystem eig_;
    Eigen::VectorXd e_ising_diag_;  // <a|H_IM|a> in the eigenbasis
    Eigen::VectorXd m2_diag_;       // <a|M_z^2|a> in the eigenbasis
    Eigen::VectorXd boltzmann(double temperature_mk) const;
};

/// Tr[H_IM rho] and Tr[M_z^2 rho] for rho = exp(-beta H)/Z. n <= n_cap.
GibbsResult gibbs_expectations(const ChainSpec& spec, const ThermalPoint& pt, int n_cap = 14);

/// Full Gibbs density matrix; meant for small density-matrix consumers.
DensityMatrix gibbs_state(const ChainSpec& spec, const ThermalPoint& pt, int n_cap = 7);

/// <H_IM> for the uniform ferromagnetic chain at any n, from the free-fermion
/// spectrum eps_k = 2 sqrt(A^2 + B^2 - 2AB cos k) with exact parity
/// projection of the partition function. Throws UnsupportedModelError for
/// nonuniform chains or nonzero fields.
double free_fermion_e_ising(int n, const ThermalPoint& pt);
double free_fermion_e_ising(const ChainSpec& spec, const ThermalPoint& pt);

}  // namespace annealtherm
