#pragma once

namespace epair::physics
{
// Relativistic electron speed (m/s) for a kinetic energy in eV.
// Throws DomainError for negative energies.
double electron_velocity(double kinetic_energy_ev);

// Lorentz factor for a kinetic energy in eV.
double lorentz_factor(double kinetic_energy_ev);
}  // namespace epair::physics
