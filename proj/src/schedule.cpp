#include "annealtherm/schedule.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "annealtherm/errors.hpp"

namespace annealtherm {

namespace {

// Fritsch-Carlson slopes: monotone data gives a monotone interpolant.
std::vector<double> pchip_slopes(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    std::vector<double> h(n - 1), d(n - 1), m(n, 0.0);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        h[k] = x[k + 1] - x[k];
        d[k] = (y[k + 1] - y[k]) / h[k];
    }
    for (std::size_t k = 1; k + 1 < n; ++k) {
        if (d[k - 1] == 0.0 || d[k] == 0.0 || (d[k - 1] > 0) != (d[k] > 0)) {
            m[k] = 0.0;
        } else {
            const double w1 = 2.0 * h[k] + h[k - 1];
            const double w2 = h[k] + 2.0 * h[k - 1];
            m[k] = (w1 + w2) / (w1 / d[k - 1] + w2 / d[k]);
        }
    }
    auto endpoint = [](double h0, double h1, double d0, double d1) {
        double s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if (s * d0 <= 0.0)
            s = 0.0;
        else if ((d0 > 0) != (d1 > 0) && std::abs(s) > 3.0 * std::abs(d0))
            s = 3.0 * d0;
        return s;
    };
    m[0] = endpoint(h[0], h[1], d[0], d[1]);
    m[n - 1] = endpoint(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
    return m;
}

double hermite(double x0, double x1, double y0, double y1, double m0, double m1, double x) {
    const double h = x1 - x0;
    const double t = (x - x0) / h;
    const double t2 = t * t, t3 = t2 * t;
    return y0 * (2 * t3 - 3 * t2 + 1) + h * m0 * (t3 - 2 * t2 + t) + y1 * (-2 * t3 + 3 * t2) +
           h * m1 * (t3 - t2);
}

double hermite_deriv(double x0, double x1, double y0, double y1, double m0, double m1, double x) {
    const double h = x1 - x0;
    const double t = (x - x0) / h;
    const double t2 = t * t;
    return (y0 * (6 * t2 - 6 * t) + h * m0 * (3 * t2 - 4 * t + 1) + y1 * (-6 * t2 + 6 * t) +
            h * m1 * (3 * t2 - 2 * t)) /
           h;
}

void write_double(std::ostream& out, double v) {
    char buf[40];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    out.write(buf, p - buf);
}

double parse_double(const std::string& tok, int lineno) {
    double v;
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
        throw ValidationError("bad number '" + tok + "' at line " + std::to_string(lineno));
    return v;
}

}  // namespace

AnnealSchedule::AnnealSchedule(std::vector<Knot> knots) : knots_(std::move(knots)) {
    if (knots_.size() < 4) throw ValidationError("schedule needs at least 4 knots");
    if (knots_.front().s != 0.0 || knots_.back().s != 1.0)
        throw ValidationError("schedule must span s = 0 to s = 1");
    for (std::size_t k = 0; k + 1 < knots_.size(); ++k)
        if (!(knots_[k].s < knots_[k + 1].s)) throw ValidationError("schedule s values must be strictly increasing");
    for (const auto& kn : knots_) {
        if (kn.a_ghz < 0.0 || kn.b_ghz < 0.0) throw ValidationError("schedule A, B must be nonnegative");
    }
    for (std::size_t k = 0; k + 1 < knots_.size(); ++k) {
        if (knots_[k + 1].a_ghz > knots_[k].a_ghz + 1e-12) throw ValidationError("A(s) must be nonincreasing");
        if (knots_[k + 1].b_ghz < knots_[k].b_ghz - 1e-12) throw ValidationError("B(s) must be nondecreasing");
    }
    std::vector<double> s(knots_.size()), a(knots_.size()), b(knots_.size());
    for (std::size_t k = 0; k < knots_.size(); ++k) {
        s[k] = knots_[k].s;
        a[k] = knots_[k].a_ghz;
        b[k] = knots_[k].b_ghz;
    }
    slope_a_ = pchip_slopes(s, a);
    slope_b_ = pchip_slopes(s, b);
}

std::pair<double, double> AnnealSchedule::evaluate(double s) const {
    if (s < 0.0 || s > 1.0) throw ValidationError("s out of range [0, 1]");
    // Bracket by binary search; exact hits return knot values untouched.
    std::size_t lo = 0, hi = knots_.size() - 1;
    while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        (knots_[mid].s <= s ? lo : hi) = mid;
    }
    if (s == knots_[lo].s) return {knots_[lo].a_ghz, knots_[lo].b_ghz};
    if (s == knots_[hi].s) return {knots_[hi].a_ghz, knots_[hi].b_ghz};
    const auto& k0 = knots_[lo];
    const auto& k1 = knots_[hi];
    double a = hermite(k0.s, k1.s, k0.a_ghz, k1.a_ghz, slope_a_[lo], slope_a_[hi], s);
    double b = hermite(k0.s, k1.s, k0.b_ghz, k1.b_ghz, slope_b_[lo], slope_b_[hi], s);
    return {std::max(a, 0.0), std::max(b, 0.0)};
}

std::pair<double, double> AnnealSchedule::derivative(double s) const {
    if (s < 0.0 || s > 1.0) throw ValidationError("s out of range [0, 1]");
    std::size_t lo = 0, hi = knots_.size() - 1;
    while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        (knots_[mid].s <= s ? lo : hi) = mid;
    }
    if (lo == knots_.size() - 1) lo = knots_.size() - 2, hi = lo + 1;
    const auto& k0 = knots_[lo];
    const auto& k1 = knots_[hi];
    return {hermite_deriv(k0.s, k1.s, k0.a_ghz, k1.a_ghz, slope_a_[lo], slope_a_[hi], s),
            hermite_deriv(k0.s, k1.s, k0.b_ghz, k1.b_ghz, slope_b_[lo], slope_b_[hi], s)};
}

AnnealSchedule default_schedule() {
    // Analytic forms pinned to the two public calibration facts: the A/B
    // crossing sits at s = 0.346 with A = B = 1.05 GHz there. A vanishes at
    // s = 1 and B at s = 0, with shapes similar to published flux-qubit
    // schedules.
    const double s_star = 0.346;
    const double e_star = 1.05;
    const double k_a = 5.0;
    const double p_b = 1.3;
    auto a_of = [&](double s) { return e_star * std::exp(-k_a * (s - s_star)) * (1.0 - s) / (1.0 - s_star); };
    auto b_of = [&](double s) { return e_star * std::pow(s / s_star, p_b); };

    std::vector<double> grid;
    for (int i = 0; i <= 50; ++i) grid.push_back(i / 50.0);
    grid.push_back(s_star);
    std::sort(grid.begin(), grid.end());

    std::vector<AnnealSchedule::Knot> knots;
    knots.reserve(grid.size());
    for (double s : grid) knots.push_back({s, a_of(s), b_of(s)});
    return AnnealSchedule(std::move(knots));
}

double crossing_point(const AnnealSchedule& sched) {
    auto f = [&](double s) {
        auto [a, b] = sched.evaluate(s);
        return a - b;
    };
    double lo = 0.0, hi = 1.0;
    double flo = f(lo), fhi = f(hi);
    if (!(flo > 0.0) || !(fhi < 0.0))
        throw NoCrossingError("schedule has no A = B crossing: A(0) > B(0) and A(1) < B(1) required");
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (std::abs(fm) < 1e-6) return mid;
        (fm > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

void save_schedule(const AnnealSchedule& sched, std::ostream& out) {
    out << "s,A_GHz,B_GHz\n";
    for (const auto& k : sched.knots()) {
        write_double(out, k.s);
        out << ",";
        write_double(out, k.a_ghz);
        out << ",";
        write_double(out, k.b_ghz);
        out << "\n";
    }
}

AnnealSchedule load_schedule(std::istream& in) {
    std::string line;
    int lineno = 0;
    if (!std::getline(in, line)) throw ValidationError("empty schedule file");
    ++lineno;
    if (line.size() && line.back() == '\r') line.pop_back();
    if (line != "s,A_GHz,B_GHz") throw ValidationError("schedule header must be 's,A_GHz,B_GHz'");
    std::vector<AnnealSchedule::Knot> knots;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.size() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string s_tok, a_tok, b_tok;
        if (!std::getline(row, s_tok, ',') || !std::getline(row, a_tok, ',') || !std::getline(row, b_tok))
            throw ValidationError("schedule row needs 3 comma-separated fields at line " + std::to_string(lineno));
        knots.push_back({parse_double(s_tok, lineno), parse_double(a_tok, lineno), parse_double(b_tok, lineno)});
    }
    return AnnealSchedule(std::move(knots));
}

double ScheduleProtocol::pause_time_us() const {
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < vertices.size(); ++k)
        if (vertices[k].s == vertices[k + 1].s) total += vertices[k + 1].t_us - vertices[k].t_us;
    return total;
}

namespace {

void validate_params(const ProtocolParams& p) {
    if (!(p.s_p > 0.0 && p.s_p < 1.0)) throw ValidationError("pause location must satisfy 0 < s_p < 1");
    if (p.t_p_us < 0.0) throw ValidationError("pause duration must be nonnegative");
    if (!(p.rate_i > 0.0)) throw ValidationError("initial ramp rate must be positive");
    if (p.rate_cap > 0.0 && p.rate_i > p.rate_cap)
        throw ValidationError("initial ramp rate exceeds the rate cap");
    if (!(p.rate_f > 0.0)) throw ValidationError("quench rate must be positive");
}

}  // namespace

ScheduleProtocol forward_protocol(const ProtocolParams& p) {
    validate_params(p);
    ScheduleProtocol proto;
    proto.direction = ScheduleProtocol::Direction::forward;
    const double t_ramp = p.s_p / p.rate_i;
    proto.vertices.push_back({0.0, 0.0});
    proto.vertices.push_back({t_ramp, p.s_p});
    if (p.t_p_us > 0.0) proto.vertices.push_back({t_ramp + p.t_p_us, p.s_p});
    proto.vertices.push_back({t_ramp + p.t_p_us + (1.0 - p.s_p) / p.rate_f, 1.0});
    return proto;
}

ScheduleProtocol reverse_protocol(const ProtocolParams& p) {
    validate_params(p);
    ScheduleProtocol proto;
    proto.direction = ScheduleProtocol::Direction::reverse;
    const double t_ramp = (1.0 - p.s_p) / p.rate_i;
    proto.vertices.push_back({0.0, 1.0});
    proto.vertices.push_back({t_ramp, p.s_p});
    if (p.t_p_us > 0.0) proto.vertices.push_back({t_ramp + p.t_p_us, p.s_p});
    proto.vertices.push_back({t_ramp + p.t_p_us + (1.0 - p.s_p) / p.rate_f, 1.0});
    return proto;
}

double s_of_t(const ScheduleProtocol& proto, double t_us) {
    if (proto.vertices.empty()) throw ValidationError("protocol has no vertices");
    if (t_us < proto.vertices.front().t_us || t_us > proto.vertices.back().t_us)
        throw ValidationError("time outside the protocol range");
    std::size_t lo = 0, hi = proto.vertices.size() - 1;
    while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        (proto.vertices[mid].t_us <= t_us ? lo : hi) = mid;
    }
    const auto& v0 = proto.vertices[lo];
    const auto& v1 = proto.vertices[hi];
    if (t_us == v0.t_us) return v0.s;
    if (t_us == v1.t_us) return v1.s;
    const double f = (t_us - v0.t_us) / (v1.t_us - v0.t_us);
    return v0.s + f * (v1.s - v0.s);
}

void save_protocol(const ScheduleProtocol& proto, std::ostream& out) {
    out << "t_us,s\n";
    for (const auto& v : proto.vertices) {
        write_double(out, v.t_us);
        out << ",";
        write_double(out, v.s);
        out << "\n";
    }
}

std::vector<HardwareViolation> check_hardware_limits(const ScheduleProtocol& proto, long n_anneals) {
    constexpr double rate_limit = 1.0;          // 1/us
    constexpr double per_anneal_limit = 2000.0; // us
    constexpr double total_limit = 3.0e6;       // us, applied to n_a * t_p
    std::vector<HardwareViolation> report;
    for (std::size_t k = 0; k + 1 < proto.vertices.size(); ++k) {
        const double dt = proto.vertices[k + 1].t_us - proto.vertices[k].t_us;
        if (dt <= 0.0) continue;
        const double slope = std::abs(proto.vertices[k + 1].s - proto.vertices[k].s) / dt;
        if (slope > rate_limit * (1.0 + 1e-12)) {
            report.push_back({"rate", slope, rate_limit,
                              "segment " + std::to_string(k) + " runs at " + std::to_string(slope) +
                                  "/us, above the 1/us hardware maximum"});
        }
    }
    if (!proto.vertices.empty() && proto.total_time_us() > per_anneal_limit * (1.0 + 1e-12)) {
        report.push_back({"per_anneal_time", proto.total_time_us(), per_anneal_limit,
                          "per-anneal time exceeds 2 ms"});
    }
    const double t_tot = static_cast<double>(n_anneals) * proto.pause_time_us();
    if (t_tot > total_limit * (1.0 + 1e-12)) {
        report.push_back({"total_time", t_tot, total_limit, "n_a * t_p exceeds 3000 ms"});
    }
    return report;
}

}  // namespace annealtherm
