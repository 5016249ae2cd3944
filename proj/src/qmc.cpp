#include "annealtherm/qmc.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "annealtherm/errors.hpp"
#include "annealtherm/rng.hpp"

namespace annealtherm {

int default_slices(const ThermalPoint& pt) {
    const double target = pt.beta_h() * std::max(pt.a_ghz, pt.b_ghz) / 0.05;
    return std::max(2, static_cast<int>(std::ceil(target)));
}

std::pair<double, double> trotter_couplings(const ThermalPoint& pt, int slices) {
    if (!(pt.a_ghz > 0.0))
        throw ValidationError("Trotter mapping requires A > 0; the classical limit bypasses QMC");
    if (slices < 2) throw ValidationError("need at least 2 Trotter slices");
    const double beta = pt.beta_h();
    const double k_space = beta * pt.b_ghz / slices;
    const double k_tau = -0.5 * std::log(std::tanh(beta * pt.a_ghz / slices));
    return {k_space, k_tau};
}

namespace {

// Space-time worldline lattice, periodic in both directions.
// Storage is site-major: index(i, tau) = i * M + tau.
class Worldline {
  public:
    Worldline(const ChainSpec& spec, int slices, double k_space, double k_tau, std::mt19937_64& rng)
        : n_(spec.n), m_slices_(slices), couplings_(spec.couplings) {
        p_tau_ = -std::expm1(-2.0 * k_tau);
        p_space_ = -std::expm1(-2.0 * std::abs(k_space));
        // Signed spatial coupling per bond: K_e = -(beta B / M) J_e, so a
        // ferromagnetic J_e = -1 gives an aligning K_e > 0.
        bond_sign_.resize(n_);
        for (int e = 0; e < n_; ++e) bond_sign_[e] = (spec.couplings[e] < 0) ? 1 : -1;
        spins_.resize(static_cast<std::size_t>(n_) * slices);
        for (auto& s : spins_) s = static_cast<std::int8_t>(uniform_sign(rng));
        in_cluster_.assign(spins_.size(), 0);
        stack_.reserve(spins_.size());
        members_.reserve(spins_.size());
    }

    // One Wolff cluster grown from a random seed; returns the cluster size.
    std::size_t cluster_update(std::mt19937_64& rng) {
        const std::size_t seed_site = uniform_index(rng, spins_.size());
        stack_.clear();
        members_.clear();
        stack_.push_back(seed_site);
        members_.push_back(seed_site);
        in_cluster_[seed_site] = 1;
        while (!stack_.empty()) {
            const std::size_t site = stack_.back();
            stack_.pop_back();
            const int i = static_cast<int>(site) / m_slices_;
            const int tau = static_cast<int>(site) % m_slices_;
            const std::int8_t s = spins_[site];

            // Temporal neighbors: aligning bond of strength K_tau.
            const int tau_up = (tau + 1 == m_slices_) ? 0 : tau + 1;
            const int tau_dn = (tau == 0) ? m_slices_ - 1 : tau - 1;
            try_add(site - tau + tau_up, s, 1, p_tau_, rng);
            try_add(site - tau + tau_dn, s, 1, p_tau_, rng);

            // Spatial neighbors through bonds i (right) and i-1 (left).
            const int i_r = (i + 1 == n_) ? 0 : i + 1;
            const int i_l = (i == 0) ? n_ - 1 : i - 1;
            try_add(static_cast<std::size_t>(i_r) * m_slices_ + tau, s, bond_sign_[i], p_space_, rng);
            try_add(static_cast<std::size_t>(i_l) * m_slices_ + tau, s, bond_sign_[i_l], p_space_, rng);
        }
        for (std::size_t site : members_) {
            spins_[site] = static_cast<std::int8_t>(-spins_[site]);
            in_cluster_[site] = 0;
        }
        return members_.size();
    }

    std::size_t size() const { return spins_.size(); }

    double measure_e_ising() const {
        long sum = 0;
        for (int tau = 0; tau < m_slices_; ++tau) {
            for (int e = 0; e < n_; ++e) {
                const int j = (e + 1 == n_) ? 0 : e + 1;
                sum += couplings_[e] * spins_[static_cast<std::size_t>(e) * m_slices_ + tau] *
                       spins_[static_cast<std::size_t>(j) * m_slices_ + tau];
            }
        }
        return static_cast<double>(sum) / m_slices_;
    }

    double measure_m2() const {
        double acc = 0.0;
        for (int tau = 0; tau < m_slices_; ++tau) {
            long m = 0;
            for (int i = 0; i < n_; ++i) m += spins_[static_cast<std::size_t>(i) * m_slices_ + tau];
            const double mz = static_cast<double>(m) / n_;
            acc += mz * mz;
        }
        return acc / m_slices_;
    }

  private:
    void try_add(std::size_t neighbor, std::int8_t s, int sign, double p, std::mt19937_64& rng) {
        if (in_cluster_[neighbor]) return;
        // Activate only currently satisfied bonds: aligned for sign > 0,
        // anti-aligned for sign < 0.
        if (static_cast<int>(spins_[neighbor]) * s * sign != 1) return;
        if (uniform_double(rng) < p) {
            in_cluster_[neighbor] = 1;
            stack_.push_back(neighbor);
            members_.push_back(neighbor);
        }
    }

    int n_;
    int m_slices_;
    double p_tau_, p_space_;
    std::vector<std::int8_t> spins_;
    std::vector<int> couplings_;
    std::vector<int> bond_sign_;
    std::vector<std::uint8_t> in_cluster_;
    std::vector<std::size_t> stack_;
    std::vector<std::size_t> members_;
};

}  // namespace

QmcEstimate series_estimate(const std::vector<double>& samples) {
    QmcEstimate est;
    const long n = static_cast<long>(samples.size());
    est.n_samples = n;
    if (n == 0) return est;
    double mean = 0.0;
    for (double x : samples) mean += x;
    mean /= n;
    est.mean = mean;
    if (n < 2) return est;
    double var = 0.0;
    for (double x : samples) var += (x - mean) * (x - mean);
    var /= (n - 1);
    if (var <= 0.0) return est;  // constant series
    // Self-consistent autocorrelation window: the smallest W >= 6 tau(W).
    const long w_max = n / 4;
    double tau = 0.0;
    for (long w = 1; w <= w_max; ++w) {
        double c = 0.0;
        for (long t = 0; t < n - w; ++t) c += (samples[t] - mean) * (samples[t + w] - mean);
        c /= (n - w) * var;
        tau += c;
        if (w >= 6.0 * std::max(tau, 0.5)) break;
    }
    est.tau_int = std::max(tau, 0.0);
    est.stderr_ = std::sqrt(var / n * (2.0 * est.tau_int + 1.0));
    return est;
}

QmcResult run_qmc(const ChainSpec& spec, const ThermalPoint& pt, const QmcConfig& cfg) {
    validate_chain(spec);
    for (double h : spec.fields)
        if (h != 0.0)
            throw UnsupportedModelError("cluster QMC requires zero longitudinal fields");
    if (cfg.bins < 16) throw ValidationError("need at least 16 bins");
    if (cfg.measure_sweeps < cfg.bins) throw ValidationError("need at least one sweep per bin");
    if (cfg.therm_sweeps < 0) throw ValidationError("negative thermalization sweep count");

    const int slices = cfg.slices > 0 ? cfg.slices : default_slices(pt);
    const auto [k_space, k_tau] = trotter_couplings(pt, slices);

    std::mt19937_64 rng(cfg.seed);
    Worldline lattice(spec, slices, k_space, k_tau, rng);

    // Thermalize while calibrating the mean cluster size. The number of
    // cluster updates between measurements is then frozen: a state-dependent
    // count (e.g. "grow until n*M spins touched") would sample the chain at
    // configuration-dependent times and bias the estimates.
    double grown = 0.0;
    long n_clusters = 0;
    const double lattice_size = static_cast<double>(lattice.size());
    while (n_clusters < cfg.therm_sweeps || grown < cfg.therm_sweeps * lattice_size) {
        grown += static_cast<double>(lattice.cluster_update(rng));
        ++n_clusters;
    }
    const long per_sweep =
        std::max<long>(1, std::lround(lattice_size / (grown / static_cast<double>(n_clusters))));

    std::vector<double> e_series, m2_series;
    e_series.reserve(cfg.measure_sweeps);
    m2_series.reserve(cfg.measure_sweeps);
    for (long s = 0; s < cfg.measure_sweeps; ++s) {
        for (long k = 0; k < per_sweep; ++k) lattice.cluster_update(rng);
        e_series.push_back(lattice.measure_e_ising());
        m2_series.push_back(lattice.measure_m2());
    }

    QmcResult result;
    result.slices = slices;
    result.e_ising = series_estimate(e_series);
    result.m2 = series_estimate(m2_series);

    // Drift test: compare first- and second-half means at 3 sigma.
    auto half_est = [](const std::vector<double>& s, bool first) {
        const std::size_t h = s.size() / 2;
        std::vector<double> part(first ? s.begin() : s.begin() + h, first ? s.begin() + h : s.end());
        return series_estimate(part);
    };
    for (const auto* series : {&e_series, &m2_series}) {
        const QmcEstimate a = half_est(*series, true);
        const QmcEstimate b = half_est(*series, false);
        const double sigma = std::sqrt(a.stderr_ * a.stderr_ + b.stderr_ * b.stderr_);
        if (sigma > 0.0 && std::abs(a.mean - b.mean) > 3.0 * sigma) result.equilibrated = false;
    }
    return result;
}

QmcEstimate trotter_extrapolate(const ChainSpec& spec, const ThermalPoint& pt, const QmcConfig& cfg,
                                const std::vector<int>& slice_counts) {
    std::vector<int> ms = slice_counts;
    std::sort(ms.begin(), ms.end());
    ms.erase(std::unique(ms.begin(), ms.end()), ms.end());
    if (ms.size() < 2) throw ValidationError("Trotter extrapolation needs at least 2 distinct M values");

    std::vector<double> y, w, x;
    for (std::size_t i = 0; i < ms.size(); ++i) {
        QmcConfig c = cfg;
        c.slices = ms[i];
        c.seed = mix_seed(cfg.seed, i);
        const QmcResult r = run_qmc(spec, pt, c);
        y.push_back(r.e_ising.mean);
        x.push_back(1.0 / (static_cast<double>(ms[i]) * ms[i]));
        const double se = r.e_ising.stderr_ > 0 ? r.e_ising.stderr_ : 1.0;
        w.push_back(1.0 / (se * se));
    }
    // Weighted least squares for y = a + b x.
    double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        sw += w[i];
        swx += w[i] * x[i];
        swy += w[i] * y[i];
        swxx += w[i] * x[i] * x[i];
        swxy += w[i] * x[i] * y[i];
    }
    const double det = sw * swxx - swx * swx;
    QmcEstimate out;
    out.n_samples = static_cast<long>(y.size());
    if (det <= 0.0) {  // degenerate x spread cannot happen for distinct M
        out.mean = swy / sw;
        out.stderr_ = std::sqrt(1.0 / sw);
        return out;
    }
    out.mean = (swxx * swy - swx * swxy) / det;
    out.stderr_ = std::sqrt(swxx / det);
    return out;
}

}  // namespace annealtherm
