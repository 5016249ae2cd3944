#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace annealtherm {

/// Periodic Ising chain: edge e joins site e and site (e+1) mod n.
/// Couplings are restricted to +-1; longitudinal fields default to zero.
struct ChainSpec {
    int n = 0;
    std::vector<int> couplings;   // n entries, each -1 or +1
    std::vector<double> fields;   // n entries

    bool is_uniform_ferromagnet() const;
    bool is_frustrated() const;  // exactly one +1 coupling
};

/// Classical spin configuration, one +-1 per site.
struct SpinConfig {
    std::vector<int> spins;
};

/// Random +-1 relabeling of the qubits. Identity gauge is all +1.
struct GaugeVector {
    std::vector<int> a;
};

ChainSpec build_ferromagnetic_chain(int n);
ChainSpec build_frustrated_chain(int n, int flipped_edge);

/// Throws ValidationError if sizes are inconsistent or values out of range.
void validate_chain(const ChainSpec& spec);

/// sum_e J_e s_e s_{e+1} + sum_i h_i s_i
double ising_energy(const ChainSpec& spec, const SpinConfig& config);

/// ((sum_i s_i) / n)^2, in [0, 1].
double squared_magnetization(const SpinConfig& config);

/// J'_e = a_e a_{e+1} J_e, h'_i = a_i h_i. An involution.
ChainSpec apply_gauge_spec(const ChainSpec& spec, const GaugeVector& g);

/// s'_i = a_i s_i.
SpinConfig apply_gauge_config(const SpinConfig& config, const GaugeVector& g);

GaugeVector random_gauge(int n, std::uint64_t seed);

struct GroundSpace {
    double energy = 0.0;
    long degeneracy = 0;
};

/// Exhaustive minimum over all 2^n configurations; n <= 24.
GroundSpace brute_force_ground(const ChainSpec& spec);

/// Plain-text serialization: `n <int>`, then `J <e> <+-1>` lines, then
/// optional `h <i> <float>` lines (written only when some h_i != 0).
/// Round-trips bit-exactly.
void save_chain(const ChainSpec& spec, std::ostream& out);
ChainSpec load_chain(std::istream& in);

}  // namespace annealtherm
