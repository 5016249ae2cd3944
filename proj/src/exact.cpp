#include "annealtherm/exact.hpp"

#include <lapacke.h>

#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "annealtherm/errors.hpp"

namespace annealtherm {

namespace {

void check_size_cap(int n, int n_cap, const char* what) {
    if (n > n_cap)
        throw SizeCapError(std::string(what) + " capped at n = " + std::to_string(n_cap) + ", got n = " +
                           std::to_string(n));
}

}  // namespace

SpinConfig config_from_index(std::uint64_t index, int n) {
    SpinConfig config;
    config.spins.resize(n);
    for (int i = 0; i < n; ++i) config.spins[i] = ((index >> (n - 1 - i)) & 1) ? -1 : 1;
    return config;
}

Eigen::VectorXd ising_diagonal(const ChainSpec& spec) {
    validate_chain(spec);
    const std::uint64_t d = std::uint64_t{1} << spec.n;
    Eigen::VectorXd diag(d);
    for (std::uint64_t c = 0; c < d; ++c) diag(c) = ising_energy(spec, config_from_index(c, spec.n));
    return diag;
}

Eigen::VectorXd m2_diagonal(int n) {
    const std::uint64_t d = std::uint64_t{1} << n;
    Eigen::VectorXd diag(d);
    for (std::uint64_t c = 0; c < d; ++c) {
        const int ups = n - std::popcount(c);
        const double mz = static_cast<double>(2 * ups - n) / n;
        diag(c) = mz * mz;
    }
    return diag;
}

Eigen::MatrixXd build_hamiltonian(const ChainSpec& spec, double a_ghz, double b_ghz, int n_cap) {
    validate_chain(spec);
    check_size_cap(spec.n, n_cap, "dense Hamiltonian");
    const std::uint64_t d = std::uint64_t{1} << spec.n;
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(d, d);
    const Eigen::VectorXd diag = ising_diagonal(spec);
    for (std::uint64_t c = 0; c < d; ++c) h(c, c) = b_ghz * diag(c);
    // Transverse term: -A sigma^x_i flips bit i (site 0 is the MSB).
    for (int i = 0; i < spec.n; ++i) {
        const std::uint64_t mask = std::uint64_t{1} << (spec.n - 1 - i);
        for (std::uint64_t c = 0; c < d; ++c) h(c ^ mask, c) -= a_ghz;
    }
    return h;
}

EigenSystem sym_eig(const Eigen::MatrixXd& h) {
    EigenSystem sys;
    const int d = static_cast<int>(h.rows());
    if (d <= 64) {  // below the LAPACK call overhead crossover
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
        sys.values = es.eigenvalues();
        sys.vectors = es.eigenvectors();
        return sys;
    }
    sys.vectors = h;
    sys.values.resize(d);
    const int info =
        LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', d, sys.vectors.data(), d, sys.values.data());
    if (info != 0) throw Error("dsyevd failed with info = " + std::to_string(info));
    return sys;
}

EdSolution::EdSolution(const ChainSpec& spec, double a_ghz, double b_ghz, int n_cap) : n_(spec.n) {
    eig_ = sym_eig(build_hamiltonian(spec, a_ghz, b_ghz, n_cap));
    const Eigen::VectorXd h_im = ising_diagonal(spec);
    const Eigen::VectorXd m2 = m2_diagonal(spec.n);
    const auto d = eig_.values.size();
    e_ising_diag_.resize(d);
    m2_diag_.resize(d);
    for (Eigen::Index a = 0; a < d; ++a) {
        const auto col = eig_.vectors.col(a);
        double ei = 0.0, mm = 0.0;
        for (Eigen::Index c = 0; c < d; ++c) {
            const double w = col(c) * col(c);
            ei += h_im(c) * w;
            mm += m2(c) * w;
        }
        e_ising_diag_(a) = ei;
        m2_diag_(a) = mm;
    }
}

Eigen::VectorXd EdSolution::boltzmann(double temperature_mk) const {
    ThermalPoint pt;
    pt.temperature_mk = temperature_mk;
    const double beta = pt.beta_h();
    // Shift by the ground energy before exponentiating; beta*E spans ~1e3
    // at 12 mK for the energy scales involved.
    const double e0 = eig_.values(0);
    Eigen::VectorXd w = (-beta * (eig_.values.array() - e0)).exp();
    w /= w.sum();
    return w;
}

GibbsResult EdSolution::gibbs(double temperature_mk) const {
    ThermalPoint pt;
    pt.temperature_mk = temperature_mk;
    const double beta = pt.beta_h();
    const double e0 = eig_.values(0);
    const Eigen::VectorXd w = boltzmann(temperature_mk);
    GibbsResult out;
    out.e_ising = w.dot(e_ising_diag_);
    out.m2 = w.dot(m2_diag_);
    out.free_energy = e0 - std::log((-beta * (eig_.values.array() - e0)).exp().sum()) / beta;
    out.gap = eig_.values(1) - eig_.values(0);
    return out;
}

DensityMatrix EdSolution::gibbs_state(double temperature_mk) const {
    const Eigen::VectorXd w = boltzmann(temperature_mk);
    Eigen::MatrixXd rho = eig_.vectors * w.asDiagonal() * eig_.vectors.transpose();
    return rho.cast<std::complex<double>>();
}

Eigen::VectorXd EdSolution::gibbs_populations(double temperature_mk) const {
    const Eigen::VectorXd w = boltzmann(temperature_mk);
    const auto d = eig_.values.size();
    Eigen::VectorXd p = Eigen::VectorXd::Zero(d);
    for (Eigen::Index a = 0; a < d; ++a) {
        const auto col = eig_.vectors.col(a);
        p.array() += w(a) * col.array().square();
    }
    return p;
}

GibbsResult gibbs_expectations(const ChainSpec& spec, const ThermalPoint& pt, int n_cap) {
    return EdSolution(spec, pt.a_ghz, pt.b_ghz, n_cap).gibbs(pt.temperature_mk);
}

DensityMatrix gibbs_state(const ChainSpec& spec, const ThermalPoint& pt, int n_cap) {
    check_size_cap(spec.n, n_cap, "Gibbs density matrix");
    return EdSolution(spec, pt.a_ghz, pt.b_ghz, n_cap).gibbs_state(pt.temperature_mk);
}

namespace {

// One momentum sector of the free-fermion solution. The sinh product is
// tracked over its nonzero factors so that a single zero-energy mode (k = 0
// at A = B) still contributes the correct B-derivative: the product value
// vanishes there but d/dB of the product does not.
struct SectorTerms {
    double log_cosh = 0.0;
    double dlog_cosh = 0.0;
    double log_sinh = 0.0;  // over nonzero factors only
    double dlog_sinh = 0.0;
    double sinh_sign = 1.0;
    int zero_modes = 0;
    double zero_deriv = 0.0;  // d(2 sinh x)/dB of the zero factor, = beta * eps'
};

SectorTerms sector_terms(int n, double a, double b, double beta, bool antiperiodic) {
    SectorTerms t;
    for (int j = 0; j < n; ++j) {
        const double k = antiperiodic ? (2.0 * j + 1.0) * std::numbers::pi / n
                                      : 2.0 * j * std::numbers::pi / n;
        double eps, deps;  // single-particle energy and d eps / dB
        const double c = std::cos(k);
        if (!antiperiodic && j == 0) {
            // Unpaired k = 0 mode carries a signed energy; its occupation
            // flips the fermion parity and costs 2(A - B).
            eps = 2.0 * (a - b);
            deps = -2.0;
        } else {
            const double r = a * a + b * b - 2.0 * a * b * c;
            eps = 2.0 * std::sqrt(std::max(r, 0.0));
            deps = (eps > 0.0) ? 4.0 * (b - a * c) / eps : 0.0;
        }
        const double x = 0.5 * beta * eps;
        const double ax = std::abs(x);
        t.log_cosh += ax + std::log1p(std::exp(-2.0 * ax));
        t.dlog_cosh += 0.5 * beta * std::tanh(x) * deps;
        if (x == 0.0) {
            ++t.zero_modes;
            t.zero_deriv = beta * deps;
        } else {
            t.log_sinh += ax + std::log(-std::expm1(-2.0 * ax));
            t.dlog_sinh += 0.5 * beta * deps / std::tanh(x);
            if (x < 0.0) t.sinh_sign = -t.sinh_sign;
        }
    }
    return t;
}

}  // namespace

double free_fermion_e_ising(int n, const ThermalPoint& pt) {
    if (n < 3) throw ValidationError("chain size must be at least 3");
    const double beta = pt.beta_h();
    const double a = pt.a_ghz, b = pt.b_ghz;
    if (a < 0.0 || b < 0.0) throw ValidationError("A and B must be nonnegative");

    const SectorTerms ap = sector_terms(n, a, b, beta, true);
    const SectorTerms p = sector_terms(n, a, b, beta, false);

    // Z = (1/2) [ prod_AP 2cosh + prod_AP 2sinh + prod_P 2cosh - prod_P 2sinh ]:
    // the even-parity projection keeps the antiperiodic sector, the odd-parity
    // projection the periodic one.
    struct Term {
        double log_mag;  // log of the product over nonzero factors
        double sign;
        double dlog;
        int zero_modes;
        double zero_deriv;
    };
    const Term terms[4] = {
        {ap.log_cosh, 1.0, ap.dlog_cosh, 0, 0.0},
        {ap.log_sinh, ap.sinh_sign, ap.dlog_sinh, ap.zero_modes, ap.zero_deriv},
        {p.log_cosh, 1.0, p.dlog_cosh, 0, 0.0},
        {p.log_sinh, -p.sinh_sign, p.dlog_sinh, p.zero_modes, p.zero_deriv},
    };
    double log_max = -std::numeric_limits<double>::infinity();
    for (const auto& t : terms) log_max = std::max(log_max, t.log_mag);
    double z = 0.0, dz = 0.0;
    for (const auto& t : terms) {
        const double mag = t.sign * std::exp(t.log_mag - log_max);
        if (t.zero_modes == 0) {
            z += mag;
            dz += mag * t.dlog;
        } else if (t.zero_modes == 1) {
            // Product value is zero; its derivative keeps the term where the
            // zero factor is differentiated.
            dz += mag * t.zero_deriv;
        }  // two or more zero factors: value and derivative both vanish
    }
    if (!(z > 0.0)) throw Error("free-fermion partition function lost precision");
    // <H_IM> = dF/dB = -(1/beta) dlnZ/dB
    return -dz / (beta * z);
}

double free_fermion_e_ising(const ChainSpec& spec, const ThermalPoint& pt) {
    if (!spec.is_uniform_ferromagnet())
        throw UnsupportedModelError("free-fermion oracle supports only the uniform ferromagnetic chain");
    return free_fermion_e_ising(spec.n, pt);
}

}  // namespace annealtherm
