#include "annealtherm/ame.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include "annealtherm/errors.hpp"
#include "annealtherm/rng.hpp"
#include "annealtherm/thermal.hpp"

namespace annealtherm {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;
// H is in GHz (cycles) and protocol times in us; internally time runs in ns,
// so phases are 2 pi * E_GHz * t_ns radians.
constexpr double ns_per_us = 1e3;

using Cplx = std::complex<double>;

// Scaled-and-squared Taylor exponential; the blocks are small and their
// spectra lie in the closed left half plane, so repeated squaring is benign.
Eigen::MatrixXcd expm_small(const Eigen::MatrixXcd& m) {
    const double norm = m.norm();
    int squarings = 0;
    if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
    squarings = std::min(squarings, 64);
    const Eigen::MatrixXcd b = m / std::pow(2.0, squarings);
    Eigen::MatrixXcd term = Eigen::MatrixXcd::Identity(m.rows(), m.cols());
    Eigen::MatrixXcd sum = term;
    for (int j = 1; j <= 40; ++j) {
        term = (term * b) / static_cast<double>(j);
        sum += term;
        if (term.norm() <= 1e-17 * sum.norm()) break;
    }
    for (int k = 0; k < squarings; ++k) sum = sum * sum;
    return sum;
}

}  // namespace

void BathParams::validate() const {
    if (!(temperature_mk > 0.0)) throw ValidationError("bath temperature must be positive");
    if (!(cutoff_ghz > 0.0)) throw ValidationError("bath cutoff must be positive");
    if (coupling < 0.0) throw ValidationError("bath coupling must be nonnegative");
}

double trace_distance(const DensityMatrix& x, const DensityMatrix& y) {
    Eigen::SelfAdjointEigenSolver<DensityMatrix> es(x - y, Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

double DaviesGenerator::rate(double omega_ghz) const {
    if (bath_.coupling == 0.0) return 0.0;
    const double x = beta_ * omega_ghz;
    // gamma = 2 pi eta g^2 e^{-|w|/wc} (1/beta) * x / (1 - e^{-x}); the last
    // factor goes to 1 + x/2 + x^2/12 for small x.
    double occupancy;
    if (std::abs(x) < 1e-8)
        occupancy = 1.0 + 0.5 * x + x * x / 12.0;
    else
        occupancy = x / (-std::expm1(-x));
    return two_pi * bath_.coupling * std::exp(-std::abs(omega_ghz) / bath_.cutoff_ghz) * occupancy / beta_;
}

DaviesGenerator::DaviesGenerator(const Eigen::MatrixXd& h_ghz,
                                 const std::vector<Eigen::VectorXd>& coupling_diags,
                                 const BathParams& bath)
    : bath_(bath) {
    bath_.validate();
    ThermalPoint pt;
    pt.temperature_mk = bath_.temperature_mk;
    beta_ = pt.beta_h();
    if (h_ghz.rows() != h_ghz.cols()) throw ValidationError("Hamiltonian must be square");
    if ((h_ghz - h_ghz.transpose()).cwiseAbs().maxCoeff() > 1e-10)
        throw ValidationError("Hamiltonian must be symmetric");
    eig_ = sym_eig(h_ghz);
    build(coupling_diags);
}

DaviesGenerator::DaviesGenerator(const ChainSpec& spec, double a_ghz, double b_ghz,
                                 const BathParams& bath, int n_cap)
    : bath_(bath) {
    bath_.validate();
    ThermalPoint pt;
    pt.temperature_mk = bath_.temperature_mk;
    beta_ = pt.beta_h();
    if (spec.n > n_cap)
        throw SizeCapError("open-system dynamics capped at n = " + std::to_string(n_cap));
    eig_ = sym_eig(build_hamiltonian(spec, a_ghz, b_ghz, n_cap));
    const Eigen::Index d = eig_.values.size();
    std::vector<Eigen::VectorXd> diags;
    for (int i = 0; i < spec.n; ++i) {
        Eigen::VectorXd sz(d);
        const std::uint64_t mask = std::uint64_t{1} << (spec.n - 1 - i);
        for (Eigen::Index c = 0; c < d; ++c) sz(c) = (static_cast<std::uint64_t>(c) & mask) ? -1.0 : 1.0;
        diags.push_back(std::move(sz));
    }
    build(diags);
}

void DaviesGenerator::build(const std::vector<Eigen::VectorXd>& coupling_diags) {
    const Eigen::Index d = eig_.values.size();
    const int n_ops = static_cast<int>(coupling_diags.size());

    // Coupling operators rotated to the eigenbasis.
    std::vector<Eigen::MatrixXd> s_ops;
    s_ops.reserve(n_ops);
    for (const auto& diag : coupling_diags) {
        if (diag.size() != d) throw ValidationError("coupling operator dimension mismatch");
        s_ops.push_back(eig_.vectors.transpose() * diag.asDiagonal() * eig_.vectors);
    }

    // Bin the d^2 Bohr frequencies omega_ab = E_a - E_b within 1e-9 GHz.
    struct PairFreq {
        double omega;
        int a, b;
    };
    std::vector<PairFreq> freqs;
    freqs.reserve(d * d);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) freqs.push_back({eig_.values(a) - eig_.values(b), a, b});
    std::sort(freqs.begin(), freqs.end(), [](const PairFreq& x, const PairFreq& y) { return x.omega < y.omega; });

    constexpr double bin_tol = 1e-9;
    Eigen::MatrixXi bin_of(d, d);
    std::vector<double> bin_rep;
    std::vector<std::vector<std::pair<int, int>>> class_pairs;
    std::size_t k = 0;
    while (k < freqs.size()) {
        std::size_t j = k + 1;
        while (j < freqs.size() && freqs[j].omega - freqs[j - 1].omega <= bin_tol) ++j;
        double mean = 0.0;
        for (std::size_t t = k; t < j; ++t) mean += freqs[t].omega;
        mean /= static_cast<double>(j - k);
        const int bin = static_cast<int>(bin_rep.size());
        bin_rep.push_back(mean);
        class_pairs.emplace_back();
        for (std::size_t t = k; t < j; ++t) {
            bin_of(freqs[t].a, freqs[t].b) = bin;
            class_pairs.back().push_back({freqs[t].a, freqs[t].b});
        }
        k = j;
    }

    std::vector<double> gamma_bin(bin_rep.size());
    for (std::size_t i = 0; i < bin_rep.size(); ++i) gamma_bin[i] = rate(bin_rep[i]);

    // Total loss operator T = sum_i sum_w gamma(w) A_i(w)^dag A_i(w); real
    // symmetric and block-diagonal over (near-)degenerate energies.
    Eigen::MatrixXd t_op = Eigen::MatrixXd::Zero(d, d);
    for (int c = 0; c < d; ++c) {
        for (int dd = 0; dd < d; ++dd) {
            double acc = 0.0;
            for (int e = 0; e < d; ++e) {
                if (bin_of(c, e) != bin_of(dd, e)) continue;
                const double g = gamma_bin[bin_of(c, e)];
                if (g == 0.0) continue;
                double prod = 0.0;
                for (int i = 0; i < n_ops; ++i) prod += s_ops[i](e, c) * s_ops[i](e, dd);
                acc += g * prod;
            }
            t_op(c, dd) = acc;
        }
    }

    // Per-class generator blocks, Hamiltonian phases included.
    singletons_.clear();
    blocks_.clear();
    double scale_sq = 0.0;
    for (const auto& pairs : class_pairs) {
        const int m = static_cast<int>(pairs.size());
        Eigen::MatrixXcd gen = Eigen::MatrixXcd::Zero(m, m);
        for (int p = 0; p < m; ++p) {
            const auto [a, b] = pairs[p];
            for (int q = 0; q < m; ++q) {
                const auto [c, dd] = pairs[q];
                double val = 0.0;
                if (bin_of(c, a) == bin_of(dd, b)) {
                    const double g = gamma_bin[bin_of(c, a)];
                    if (g != 0.0) {
                        double prod = 0.0;
                        for (int i = 0; i < n_ops; ++i) prod += s_ops[i](a, c) * s_ops[i](b, dd);
                        val += g * prod;
                    }
                }
                if (dd == b) val -= 0.5 * t_op(a, c);
                if (c == a) val -= 0.5 * t_op(dd, b);
                gen(p, q) = val;
            }
            gen(p, p) -= Cplx(0.0, two_pi * (eig_.values(a) - eig_.values(b)));
        }
        scale_sq += gen.squaredNorm();
        if (m == 1) {
            singletons_.push_back({pairs[0].first, pairs[0].second, gen(0, 0)});
        } else {
            BohrBlock blk;
            blk.pairs = pairs;
            blk.norm = gen.norm();
            blk.generator = std::move(gen);
            blocks_.push_back(std::move(blk));
        }
    }
    generator_scale_ = std::sqrt(scale_sq);
}

DensityMatrix DaviesGenerator::apply(const DensityMatrix& rho) const {
    const Eigen::Index d = dim();
    const DensityMatrix rt = eig_.vectors.transpose() * rho * eig_.vectors;
    DensityMatrix out = DensityMatrix::Zero(d, d);
    for (const auto& s : singletons_) out(s.a, s.b) = s.g * rt(s.a, s.b);
    Eigen::VectorXcd x, y;
    for (const auto& blk : blocks_) {
        const int m = static_cast<int>(blk.pairs.size());
        x.resize(m);
        for (int p = 0; p < m; ++p) x(p) = rt(blk.pairs[p].first, blk.pairs[p].second);
        y = blk.generator * x;
        for (int p = 0; p < m; ++p) out(blk.pairs[p].first, blk.pairs[p].second) = y(p);
    }
    return eig_.vectors * out * eig_.vectors.transpose();
}

DensityMatrix DaviesGenerator::propagate(const DensityMatrix& rho, double dt_us) const {
    if (dt_us == 0.0) return rho;
    const Eigen::Index d = dim();
    const double dt_ns = dt_us * ns_per_us;
    const DensityMatrix rt = eig_.vectors.transpose() * rho * eig_.vectors;
    DensityMatrix out(d, d);
    for (const auto& s : singletons_) out(s.a, s.b) = std::exp(s.g * dt_ns) * rt(s.a, s.b);
    Eigen::VectorXcd x, y;
    for (const auto& blk : blocks_) {
        const int m = static_cast<int>(blk.pairs.size());
        x.resize(m);
        for (int p = 0; p < m; ++p) x(p) = rt(blk.pairs[p].first, blk.pairs[p].second);
        const bool short_step = blk.norm * dt_ns <= 4.0;
        if (!short_step && blk.spectral_state == 0) {
            blk.spectral_state = -1;
            Eigen::ComplexEigenSolver<Eigen::MatrixXcd> ces(blk.generator);
            if (ces.info() == Eigen::Success) {
                Eigen::FullPivLU<Eigen::MatrixXcd> lu(ces.eigenvectors());
                if (lu.isInvertible()) {
                    blk.w = ces.eigenvectors();
                    blk.w_inv = lu.inverse();
                    blk.eigvals = ces.eigenvalues();
                    if (blk.w.norm() * blk.w_inv.norm() < 1e9) blk.spectral_state = 1;
                }
            }
        }
        if (!short_step && blk.spectral_state == 1) {
            y = blk.w_inv * x;
            for (int i = 0; i < m; ++i) y(i) *= std::exp(blk.eigvals(i) * dt_ns);
            y = blk.w * y;
        } else {
            y = expm_small(blk.generator * dt_ns) * x;
        }
        for (int p = 0; p < m; ++p) out(blk.pairs[p].first, blk.pairs[p].second) = y(p);
    }
    return eig_.vectors * out * eig_.vectors.transpose();
}

DensityMatrix DaviesGenerator::propagate_unitary(const DensityMatrix& rho, double dt_us) const {
    const Eigen::Index d = dim();
    const double t_ns = dt_us * ns_per_us;
    DensityMatrix rt = eig_.vectors.transpose() * rho * eig_.vectors;
    for (Eigen::Index a = 0; a < d; ++a)
        for (Eigen::Index b = 0; b < d; ++b)
            rt(a, b) *= std::exp(Cplx(0.0, -two_pi * (eig_.values(a) - eig_.values(b)) * t_ns));
    return eig_.vectors * rt * eig_.vectors.transpose();
}

double DaviesGenerator::stationarity_residual(const DensityMatrix& rho) const {
    const double num = apply(rho).norm();
    return num / (generator_scale_ * rho.norm());
}

DensityMatrix DaviesGenerator::gibbs() const {
    Eigen::VectorXd w = (-beta_ * (eig_.values.array() - eig_.values(0))).exp();
    w /= w.sum();
    Eigen::MatrixXd rho = eig_.vectors * w.asDiagonal() * eig_.vectors.transpose();
    return rho.cast<Cplx>();
}

DaviesGenerator::PauseResult DaviesGenerator::pause_to_convergence(const DensityMatrix& rho0,
                                                                   double max_us, double tol) const {
    PauseResult res;
    res.rho = rho0;
    double dt = 0.05;  // us; doubled each checkpoint
    while (res.effective_us < max_us) {
        const DensityMatrix next = propagate(res.rho, dt);
        res.effective_us += dt;
        const double dist = trace_distance(next, res.rho);
        res.rho = next;
        if (dist < tol) {
            res.converged = true;
            return res;
        }
        dt *= 2.0;
    }
    return res;
}

void AmeRun::validate() const {
    validate_chain(spec);
    if (spec.n > 5) throw SizeCapError("open-system runs capped at n = 5");
    bath.validate();
    for (double tol : {rtol, atol})
        if (!(tol > 0.0) || tol > 1e-3) throw ValidationError("integrator tolerances must lie in (0, 1e-3]");
    if (proto.vertices.size() < 2) throw ValidationError("protocol needs at least 2 vertices");
}

namespace {

// Shared trajectory integrator. `closed` drops the dissipator, which leaves
// exact eigenbasis phase rotations for every propagation.
class TrajectoryIntegrator {
  public:
    TrajectoryIntegrator(const AmeRun& run, bool closed) : run_(run), closed_(closed) {
        run_.validate();
        h_im_diag_ = ising_diagonal(run.spec);
        bath_ = run.bath;
        if (closed_) bath_.coupling = 0.0;
    }

    TrajectoryOutput integrate() {
        TrajectoryOutput out;
        const auto& verts = run_.proto.vertices;
        // Recording instants: protocol vertices plus the requested grid.
        std::vector<double> record = run_.record_grid_us;
        for (const auto& v : verts) record.push_back(v.t_us);
        std::sort(record.begin(), record.end());
        record.erase(std::unique(record.begin(), record.end()), record.end());

        DensityMatrix rho;
        if (run_.initial_state) {
            rho = *run_.initial_state;
            if (rho.rows() != h_im_diag_.size()) throw ValidationError("initial state dimension mismatch");
        } else {
            rho = generator_at(verts.front().s).gibbs();
        }

        record_point(out, verts.front().t_us, verts.front().s, rho);
        std::size_t rec_idx = 0;
        while (rec_idx < record.size() && record[rec_idx] <= verts.front().t_us) ++rec_idx;

        for (std::size_t seg = 0; seg + 1 < verts.size(); ++seg) {
            const auto& v0 = verts[seg];
            const auto& v1 = verts[seg + 1];
            if (v1.t_us <= v0.t_us) continue;
            double t = v0.t_us;
            if (v0.s == v1.s) {
                // Pause: the generator is constant; one exponential map per
                // recorded interval.
                const DaviesGenerator gen = generator_at(v0.s);
                while (t < v1.t_us) {
                    double t_stop = v1.t_us;
                    if (rec_idx < record.size() && record[rec_idx] < t_stop) t_stop = record[rec_idx];
                    rho = closed_ ? gen.propagate_unitary(rho, t_stop - t) : gen.propagate(rho, t_stop - t);
                    t = t_stop;
                    if (rec_idx < record.size() && record[rec_idx] == t) ++rec_idx;
                    record_point(out, t, v0.s, rho);
                }
            } else {
                const double slope = (v1.s - v0.s) / (v1.t_us - v0.t_us);
                auto s_at = [&](double tt) { return v0.s + slope * (tt - v0.t_us); };
                double dt = (v1.t_us - v0.t_us) / 16.0;
                while (t < v1.t_us * (1.0 - 1e-15) && t < v1.t_us) {
                    double t_stop = v1.t_us;
                    if (rec_idx < record.size() && record[rec_idx] < t_stop) t_stop = record[rec_idx];
                    step_adaptive(rho, t, t_stop, dt, s_at);
                    if (rec_idx < record.size() && record[rec_idx] == t) ++rec_idx;
                    record_point(out, t, s_at(t), rho);
                }
            }
        }
        out.populations_final = rho.diagonal().real();
        out.final_state = std::move(rho);
        return out;
    }

  private:
    DaviesGenerator generator_at(double s) const {
        const auto [a, b] = run_.sched.evaluate(s);
        return DaviesGenerator(run_.spec, a, b, bath_);
    }

    DensityMatrix step_with(double s_mid, const DensityMatrix& rho, double dt) const {
        const DaviesGenerator gen = generator_at(s_mid);
        return closed_ ? gen.propagate_unitary(rho, dt) : gen.propagate(rho, dt);
    }

    // Adaptive exponential midpoint with step doubling; advances t to t_stop.
    void step_adaptive(DensityMatrix& rho, double& t, double t_stop, double& dt,
                       const std::function<double(double)>& s_at) const {
        while (t < t_stop * (1.0 - 1e-15) && t < t_stop) {
            double h = std::min(dt, t_stop - t);
            for (;;) {
                const DensityMatrix full = step_with(s_at(t + 0.5 * h), rho, h);
                DensityMatrix half = step_with(s_at(t + 0.25 * h), rho, 0.5 * h);
                half = step_with(s_at(t + 0.75 * h), half, 0.5 * h);
                const double err = (full - half).norm();
                const double tol = run_.atol + run_.rtol * half.norm();
                if (err <= tol) {
                    rho = half + (half - full) / 3.0;
                    t += h;
                    const double grow = 0.9 * std::pow(tol / std::max(err, 1e-300), 1.0 / 3.0);
                    dt = h * std::clamp(grow, 1.0, 3.0);
                    break;
                }
                h *= std::max(0.25, 0.9 * std::pow(tol / err, 1.0 / 3.0));
                if (h < 1e-12 * (t_stop - t) || h < 1e-15)
                    throw Error("integrator step underflow at t = " + std::to_string(t) + " us");
            }
        }
        t = t_stop;
    }

    void record_point(TrajectoryOutput& out, double t, double s, const DensityMatrix& rho) const {
        out.times_us.push_back(t);
        out.s_values.push_back(s);
        out.e_ising.push_back(rho.diagonal().real().dot(h_im_diag_));
        const double tr = rho.trace().real();
        out.trace.push_back(tr);
        out.trace_error = std::max(out.trace_error, std::abs(tr - 1.0));
    }

    AmeRun run_;
    bool closed_;
    BathParams bath_;
    Eigen::VectorXd h_im_diag_;
};

}  // namespace

TrajectoryOutput evolve(const AmeRun& run) { return TrajectoryIntegrator(run, false).integrate(); }

TrajectoryOutput closed_system_evolve(const AmeRun& run) {
    return TrajectoryIntegrator(run, true).integrate();
}

std::vector<QuenchCell> quench_sweep(const ChainSpec& spec, const AnnealSchedule& sched,
                                     const BathParams& bath, const std::vector<double>& s_p_list,
                                     const std::vector<double>& rate_list,
                                     const QuenchSweepOptions& opts) {
    validate_chain(spec);
    if (spec.n > 5) throw SizeCapError("quench sweep capped at n = 5");
    const Eigen::VectorXd h_im = ising_diagonal(spec);
    const Eigen::Index d = h_im.size();

    std::vector<QuenchCell> table;
    for (double s_p : s_p_list) {
        if (!(s_p > 0.0 && s_p <= 1.0)) throw ValidationError("s_p must lie in (0, 1]");
        // Pause at s_p until the dissipative fixed point is reached. The
        // fixed point is unique, so the state of the preceding ramp does not
        // matter; start from the maximally mixed state.
        const auto [a_p, b_p] = sched.evaluate(s_p);
        const DaviesGenerator gen(spec, a_p, b_p, bath);
        DensityMatrix mixed = DensityMatrix::Identity(d, d) / static_cast<double>(d);
        const auto pause = gen.pause_to_convergence(mixed, opts.max_pause_us, opts.pause_tol);

        for (double rate : rate_list) {
            QuenchCell cell;
            cell.s_p = s_p;
            cell.rate = rate;
            cell.pause_effective_us = pause.effective_us;
            try {
                if (!(rate > 0.0)) throw ValidationError("quench rate must be positive");
                if (!pause.converged) throw Error("pause did not reach the fixed point");
                DensityMatrix rho = pause.rho;
                if (std::isfinite(rate) && s_p < 1.0) {
                    AmeRun run{.spec = spec,
                               .sched = sched,
                               .proto = {},
                               .bath = bath,
                               .rtol = opts.rtol,
                               .atol = opts.atol,
                               .record_grid_us = {},
                               .initial_state = rho};
                    run.proto.vertices = {{0.0, s_p}, {(1.0 - s_p) / rate, 1.0}};
                    const TrajectoryOutput traj =
                        opts.closed_quench ? closed_system_evolve(run) : evolve(run);
                    rho = traj.final_state;
                    cell.trace_error = traj.trace_error;
                }
                // Computational-basis measurement: project onto the diagonal.
                cell.e_ising = rho.diagonal().real().dot(h_im);
            } catch (const std::exception& ex) {
                cell.ok = false;
                cell.error = ex.what();
            }
            table.push_back(std::move(cell));
        }
    }
    return table;
}

std::vector<SpinConfig> sample_measurements(const Eigen::VectorXd& populations, long shots,
                                            std::uint64_t seed) {
    const Eigen::Index d = populations.size();
    int n = 0;
    while ((Eigen::Index{1} << n) < d) ++n;
    if ((Eigen::Index{1} << n) != d) throw ValidationError("population vector length must be a power of 2");
    double total = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
        if (populations(i) < -1e-9)
            throw ValidationError("negative probability in measurement distribution");
        total += std::max(populations(i), 0.0);
    }
    if (std::abs(total - 1.0) > 1e-6)
        throw ValidationError("populations must sum to 1 within 1e-6");
    std::vector<double> cdf(d);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
        acc += std::max(populations(i), 0.0) / total;
        cdf[i] = acc;
    }
    cdf[d - 1] = 1.0;

    std::mt19937_64 rng(seed);
    std::vector<SpinConfig> out;
    out.reserve(shots);
    for (long s = 0; s < shots; ++s) {
        const double u = uniform_double(rng);
        const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
        out.push_back(config_from_index(static_cast<std::uint64_t>(it - cdf.begin()), n));
    }
    return out;
}

Eigen::VectorXd uniform_chain_ising_diagonal(int n) {
    if (n < 2) throw ValidationError("chain size must be at least 2");
    if (n >= 3) return ising_diagonal(build_ferromagnetic_chain(n));
    // Two-site ring: both edges join the same pair, H_IM = -2 sz sz.
    Eigen::VectorXd diag(4);
    for (int c = 0; c < 4; ++c) {
        const int s0 = (c & 2) ? -1 : 1;
        const int s1 = (c & 1) ? -1 : 1;
        diag(c) = -2.0 * s0 * s1;
    }
    return diag;
}

Eigen::MatrixXd uniform_chain_hamiltonian(int n, double a_ghz, double b_ghz) {
    if (n < 2) throw ValidationError("chain size must be at least 2");
    if (n >= 3) return build_hamiltonian(build_ferromagnetic_chain(n), a_ghz, b_ghz);
    const Eigen::VectorXd diag = uniform_chain_ising_diagonal(2);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(4, 4);
    for (int c = 0; c < 4; ++c) h(c, c) = b_ghz * diag(c);
    for (int i = 0; i < 2; ++i) {
        const int mask = 1 << (1 - i);
        for (int c = 0; c < 4; ++c) h(c ^ mask, c) -= a_ghz;
    }
    return h;
}

namespace {

double quench_norm_impl(const Eigen::MatrixXd& h_tf, const Eigen::VectorXd& h_im_diag,
                        const AnnealSchedule& sched, double s_p, double rate_us_inv) {
    if (!(s_p >= 0.0 && s_p <= 1.0)) throw ValidationError("s_p must lie in [0, 1]");
    if (!(rate_us_inv > 0.0)) throw ValidationError("quench rate must be positive");
    const Eigen::Index d = h_tf.rows();
    if (s_p == 1.0) return 0.0;

    auto propagate_steps = [&](int steps) {
        Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(d, d);
        const double ds = (1.0 - s_p) / steps;
        for (int k = 0; k < steps; ++k) {
            const double s_mid = s_p + (k + 0.5) * ds;
            const auto [a, b] = sched.evaluate(s_mid);
            Eigen::MatrixXd h = a * h_tf;
            h.diagonal() += b * h_im_diag;
            const EigenSystem es = sym_eig(h);
            // Phase angle per step: 2 pi * 1e3 * E_GHz * (ds / rate) us.
            const double theta = two_pi * ns_per_us * ds / rate_us_inv;
            Eigen::VectorXcd phases(d);
            for (Eigen::Index i = 0; i < d; ++i) phases(i) = std::exp(Cplx(0.0, -theta * es.values(i)));
            u = (es.vectors * phases.asDiagonal() * es.vectors.transpose()) * u;
        }
        return u;
    };

    int steps = 16;
    Eigen::MatrixXcd u = propagate_steps(steps);
    for (; steps <= (1 << 16); steps *= 2) {
        const Eigen::MatrixXcd u2 = propagate_steps(2 * steps);
        const double diff = (u2 - u).norm();
        u = u2;
        if (diff < 1e-7 * std::sqrt(static_cast<double>(d))) break;
    }
    const Eigen::MatrixXcd delta =
        u - Eigen::MatrixXcd::Identity(d, d);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(delta.adjoint() * delta, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

Eigen::MatrixXd transverse_term(int n) {
    const Eigen::Index d = Eigen::Index{1} << n;
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(d, d);
    for (int i = 0; i < n; ++i) {
        const Eigen::Index mask = Eigen::Index{1} << (n - 1 - i);
        for (Eigen::Index c = 0; c < d; ++c) h(c ^ mask, c) -= 1.0;
    }
    return h;
}

}  // namespace

double unitary_quench_norm(int n, const AnnealSchedule& sched, double s_p, double rate_us_inv,
                           int n_cap) {
    if (n < 2) throw ValidationError("chain size must be at least 2");
    if (n > n_cap) throw SizeCapError("unitary norm capped at n = " + std::to_string(n_cap));
    return quench_norm_impl(transverse_term(n), uniform_chain_ising_diagonal(n), sched, s_p,
                            rate_us_inv);
}

double unitary_quench_norm(const ChainSpec& spec, const AnnealSchedule& sched, double s_p,
                           double rate_us_inv, int n_cap) {
    validate_chain(spec);
    if (spec.n > n_cap) throw SizeCapError("unitary norm capped at n = " + std::to_string(n_cap));
    return quench_norm_impl(transverse_term(spec.n), ising_diagonal(spec), sched, s_p, rate_us_inv);
}

}  // namespace annealtherm
