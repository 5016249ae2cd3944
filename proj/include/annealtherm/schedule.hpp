#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace annealtherm {

/// Tabulated annealing schedule A(s), B(s) in GHz with monotone piecewise
/// cubic interpolation between knots. A decreases, B increases.
class AnnealSchedule {
  public:
    struct Knot {
        double s;
        double a_ghz;
        double b_ghz;
    };

    /// Validates and builds the interpolants. Throws ValidationError on a
    /// non-monotone grid, out-of-range s, negative values, or < 4 knots.
    explicit AnnealSchedule(std::vector<Knot> knots);

    /// Interpolated (A, B) at s in [0, 1]; exact at knots.
    std::pair<double, double> evaluate(double s) const;
    double a(double s) const { return evaluate(s).first; }
    double b(double s) const { return evaluate(s).second; }

    /// Derivatives (dA/ds, dB/ds) of the interpolant.
    std::pair<double, double> derivative(double s) const;

    const std::vector<Knot>& knots() const { return knots_; }

  private:
    std::vector<Knot> knots_;
    std::vector<double> slope_a_;  // PCHIP endpoint slopes per knot
    std::vector<double> slope_b_;
};

/// Synthetic schedule calibrated to A(0.346) = B(0.346) = 1.05 GHz, with
/// A(0)/B(0) >= 100 and B(1)/A(1) >= 1000. The true device tables are not
/// public; load_schedule accepts a user-supplied file for exact studies.
AnnealSchedule default_schedule();

/// s where A(s) = B(s), by bisection to |A - B| < 1e-6 GHz.
/// Requires A(0) > B(0) and A(1) < B(1); otherwise throws NoCrossingError.
double crossing_point(const AnnealSchedule& sched);

/// CSV with header `s,A_GHz,B_GHz`. Round-trips knot tables bit-exactly.
void save_schedule(const AnnealSchedule& sched, std::ostream& out);
AnnealSchedule load_schedule(std::istream& in);

/// Piecewise-linear s(t). Times in microseconds.
struct ScheduleProtocol {
    struct Vertex {
        double t_us;
        double s;
    };
    enum class Direction { forward, reverse };

    std::vector<Vertex> vertices;
    Direction direction = Direction::forward;

    double total_time_us() const { return vertices.empty() ? 0.0 : vertices.back().t_us; }
    /// Total duration of zero-slope segments.
    double pause_time_us() const;
};

struct ProtocolParams {
    double s_p = 0.5;       // pause location, 0 < s_p < 1
    double t_p_us = 0.0;    // pause duration
    double rate_i = 1.0;    // initial ramp rate, 1/us
    double rate_f = 1.0;    // quench rate, 1/us; may exceed hardware limits
    double rate_cap = 1.0;  // cap applied to rate_i
};

/// (0,0) -> (s_p/rate_i, s_p) -> pause t_p -> quench to s = 1 at rate_f.
ScheduleProtocol forward_protocol(const ProtocolParams& p);

/// (0,1) -> anneal back to s_p at rate_i -> pause t_p -> quench to s = 1.
ScheduleProtocol reverse_protocol(const ProtocolParams& p);

/// Linear interpolation between bracketing vertices; t must be in range.
double s_of_t(const ScheduleProtocol& proto, double t_us);

/// Rows `t_us,s`.
void save_protocol(const ScheduleProtocol& proto, std::ostream& out);

struct HardwareViolation {
    std::string constraint;  // "rate", "per_anneal_time", "total_time"
    double observed;
    double limit;
    std::string message;
};

/// Hardware-limit report: per-segment |ds/dt| <= 1/us, per-anneal time
/// <= 2000 us, n_a * t_p <= 3e6 us. Reports, never throws; super-hardware
/// quench rates are a supported simulation regime.
std::vector<HardwareViolation> check_hardware_limits(const ScheduleProtocol& proto, long n_anneals);

}  // namespace annealtherm
