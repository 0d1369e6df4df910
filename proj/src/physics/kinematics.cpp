#include "epair/physics/kinematics.hpp"

#include <cmath>

#include "epair/constants.hpp"
#include "epair/error.hpp"

namespace epair::physics
{
double lorentz_factor(double kinetic_energy_ev)
{
    if (!(kinetic_energy_ev >= 0.0))
    {
        throw DomainError("electron kinetic energy must be non-negative");
    }
    return 1.0 + kinetic_energy_ev / constants::electron_rest_energy_ev;
}

double electron_velocity(double kinetic_energy_ev)
{
    double const gamma = lorentz_factor(kinetic_energy_ev);
    // 1 - 1/gamma^2 written as (gamma-1)(gamma+1)/gamma^2 to keep precision
    // at low energy.
    double const beta_sq = (gamma - 1.0) * (gamma + 1.0) / (gamma * gamma);
    return constants::speed_of_light * std::sqrt(beta_sq);
}
}  // namespace epair::physics
