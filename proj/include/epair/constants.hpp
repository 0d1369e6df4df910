#pragma once

namespace epair::constants
{
// CODATA 2018 exact / recommended values, SI unless noted.
inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2.0 * pi;
inline constexpr double speed_of_light = 299792458.0;  // m/s
inline constexpr double elementary_charge = 1.602176634e-19;  // C
inline constexpr double hbar_ev_s = 6.582119569e-16;  // eV s
inline constexpr double electron_rest_energy_ev = 510998.95;  // eV

// Pixel detector time bin (1/640 MHz) and TDC tick (1/3.84 GHz).
inline constexpr double hit_tick_s = 1.0 / 640.0e6;
inline constexpr double tdc_tick_s = 1.0 / 3.84e9;
// One hit tick spans exactly this many TDC ticks.
inline constexpr unsigned tdc_ticks_per_hit_tick = 6;

// Gaussian FWHM = fwhm_per_sigma * sigma.
inline constexpr double fwhm_per_sigma = 2.3548200450309493;
}  // namespace epair::constants
