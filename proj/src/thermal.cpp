#include "annealtherm/thermal.hpp"

#include <cmath>

#include "annealtherm/errors.hpp"

namespace annealtherm {

double ThermalPoint::beta_h() const {
    if (!(temperature_mk > 0.0) || !std::isfinite(temperature_mk))
        throw ValidationError("temperature must be positive and finite");
    return 1.0 / (kb_over_h_ghz_per_mk * temperature_mk);
}

}  // namespace annealtherm
