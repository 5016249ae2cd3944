#include "annealtherm/chain.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "annealtherm/errors.hpp"
#include "annealtherm/rng.hpp"

namespace annealtherm {

bool ChainSpec::is_uniform_ferromagnet() const {
    if (std::any_of(couplings.begin(), couplings.end(), [](int j) { return j != -1; })) return false;
    return std::all_of(fields.begin(), fields.end(), [](double h) { return h == 0.0; });
}

bool ChainSpec::is_frustrated() const {
    return std::count(couplings.begin(), couplings.end(), 1) == 1;
}

void validate_chain(const ChainSpec& spec) {
    // n = 2 would put a double edge between the same pair of sites.
    if (spec.n < 3) throw ValidationError("chain size must be at least 3, got " + std::to_string(spec.n));
    if (static_cast<int>(spec.couplings.size()) != spec.n)
        throw ValidationError("coupling count must equal n");
    if (static_cast<int>(spec.fields.size()) != spec.n) throw ValidationError("field count must equal n");
    for (int j : spec.couplings)
        if (j != 1 && j != -1) throw ValidationError("couplings must be +1 or -1");
}

ChainSpec build_ferromagnetic_chain(int n) {
    if (n < 3) throw ValidationError("chain size must be at least 3, got " + std::to_string(n));
    ChainSpec spec;
    spec.n = n;
    spec.couplings.assign(n, -1);
    spec.fields.assign(n, 0.0);
    return spec;
}

ChainSpec build_frustrated_chain(int n, int flipped_edge) {
    ChainSpec spec = build_ferromagnetic_chain(n);
    if (flipped_edge < 0 || flipped_edge >= n)
        throw ValidationError("flipped edge index out of range: " + std::to_string(flipped_edge));
    spec.couplings[flipped_edge] = 1;
    return spec;
}

double ising_energy(const ChainSpec& spec, const SpinConfig& config) {
    if (static_cast<int>(config.spins.size()) != spec.n)
        throw ValidationError("configuration length does not match chain size");
    double e = 0.0;
    for (int i = 0; i < spec.n; ++i) {
        const int j = (i + 1 == spec.n) ? 0 : i + 1;
        e += spec.couplings[i] * static_cast<double>(config.spins[i] * config.spins[j]);
        e += spec.fields[i] * config.spins[i];
    }
    return e;
}

double squared_magnetization(const SpinConfig& config) {
    long sum = 0;
    for (int s : config.spins) sum += s;
    const double mz = static_cast<double>(sum) / static_cast<double>(config.spins.size());
    return mz * mz;
}

ChainSpec apply_gauge_spec(const ChainSpec& spec, const GaugeVector& g) {
    if (static_cast<int>(g.a.size()) != spec.n)
        throw ValidationError("gauge length does not match chain size");
    ChainSpec out = spec;
    for (int e = 0; e < spec.n; ++e) {
        const int j = (e + 1 == spec.n) ? 0 : e + 1;
        out.couplings[e] = g.a[e] * g.a[j] * spec.couplings[e];
    }
    for (int i = 0; i < spec.n; ++i) out.fields[i] = g.a[i] * spec.fields[i];
    return out;
}

SpinConfig apply_gauge_config(const SpinConfig& config, const GaugeVector& g) {
    if (config.spins.size() != g.a.size()) throw ValidationError("gauge length does not match configuration");
    SpinConfig out = config;
    for (std::size_t i = 0; i < out.spins.size(); ++i) out.spins[i] *= g.a[i];
    return out;
}

GaugeVector random_gauge(int n, std::uint64_t seed) {
    if (n < 1) throw ValidationError("gauge length must be positive");
    std::mt19937_64 rng(seed);
    GaugeVector g;
    g.a.resize(n);
    for (int i = 0; i < n; ++i) g.a[i] = uniform_sign(rng);
    return g;
}

GroundSpace brute_force_ground(const ChainSpec& spec) {
    validate_chain(spec);
    if (spec.n > 24) throw SizeCapError("brute-force enumeration capped at n = 24");
    GroundSpace gs;
    gs.energy = 1e300;
    SpinConfig config;
    config.spins.resize(spec.n);
    const std::uint64_t total = std::uint64_t{1} << spec.n;
    for (std::uint64_t c = 0; c < total; ++c) {
        for (int i = 0; i < spec.n; ++i)
            config.spins[i] = ((c >> (spec.n - 1 - i)) & 1) ? -1 : 1;
        const double e = ising_energy(spec, config);
        if (e < gs.energy - 1e-12) {
            gs.energy = e;
            gs.degeneracy = 1;
        } else if (e < gs.energy + 1e-12) {
            ++gs.degeneracy;
        }
    }
    return gs;
}

void save_chain(const ChainSpec& spec, std::ostream& out) {
    out << "n " << spec.n << "\n";
    for (int e = 0; e < spec.n; ++e) out << "J " << e << " " << (spec.couplings[e] > 0 ? "+1" : "-1") << "\n";
    const bool any_field = std::any_of(spec.fields.begin(), spec.fields.end(), [](double h) { return h != 0.0; });
    if (any_field) {
        char buf[40];
        for (int i = 0; i < spec.n; ++i) {
            auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), spec.fields[i]);
            out << "h " << i << " " << std::string(buf, p) << "\n";
        }
    }
}

ChainSpec load_chain(std::istream& in) {
    ChainSpec spec;
    std::string line;
    int lineno = 0;
    bool have_n = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream row(line);
        std::string tag;
        row >> tag;
        if (tag == "n") {
            if (!(row >> spec.n) || spec.n < 3) throw ValidationError("bad chain size at line " + std::to_string(lineno));
            spec.couplings.assign(spec.n, -1);
            spec.fields.assign(spec.n, 0.0);
            have_n = true;
        } else if (tag == "J") {
            int e, j;
            if (!have_n || !(row >> e >> j) || e < 0 || e >= spec.n || (j != 1 && j != -1))
                throw ValidationError("bad coupling row at line " + std::to_string(lineno));
            spec.couplings[e] = j;
        } else if (tag == "h") {
            int i;
            std::string value;
            if (!have_n || !(row >> i >> value) || i < 0 || i >= spec.n)
                throw ValidationError("bad field row at line " + std::to_string(lineno));
            double h;
            auto res = std::from_chars(value.data(), value.data() + value.size(), h);
            if (res.ec != std::errc{}) throw ValidationError("bad field value at line " + std::to_string(lineno));
            spec.fields[i] = h;
        } else {
            throw ValidationError("unknown row tag '" + tag + "' at line " + std::to_string(lineno));
        }
    }
    if (!have_n) throw ValidationError("chain file missing 'n' row");
    validate_chain(spec);
    return spec;
}

}  // namespace annealtherm
