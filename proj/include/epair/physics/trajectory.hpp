#pragma once

#include <variant>

namespace epair::physics
{
//! Straight interaction segment at constant height above the waveguide.
struct StraightPass
{
    double length = 40e-6;  //!< [m]
};

/*!
 * Straight beam line above a ring waveguide embedded flush with the chip.
 *
 * In the top view the line runs at lateral_offset inward from the tangent to
 * the waveguide centerline; offsets beyond half the waveguide width give a
 * chord crossing the ring twice.
 */
struct RingPass
{
    double radius = 113.75e-6;  //!< Waveguide centerline radius [m]
    double waveguide_width = 2.1e-6;  //!< [m]
};

using PassGeometry = std::variant<StraightPass, RingPass>;

//! Electron beam line relative to the resonator.
struct Trajectory
{
    double kinetic_energy_ev = 120e3;
    //! Height above the chip surface [m]; negative means the beam hits the chip
    double impact_parameter = 160e-9;
    //! Lateral offset from the tangent line, positive toward the ring center [m]
    double lateral_offset = 0.0;
    PassGeometry geometry = RingPass{};

    double velocity() const;
    bool clips_chip() const { return impact_parameter < 0.0; }
};
}  // namespace epair::physics
