#pragma once

#include <complex>
#include <utility>
#include <vector>

#include "optical_mode.hpp"
#include "trajectory.hpp"

namespace epair::physics
{
using complex = std::complex<double>;

//! Field profile u(z) sampled on a uniform grid along the beam line.
struct SampledField
{
    double z_start = 0.0;  //!< [m]
    double step = 0.0;  //!< [m]
    std::vector<complex> values;

    double z_end() const
    {
        return values.empty()
                   ? z_start
                   : z_start + step * static_cast<double>(values.size() - 1);
    }
};

//! Minimum samples per oscillation period of the coupling integrand.
inline constexpr double min_samples_per_period = 40.0;

// Wavevector mismatch omega/v - n_eff*omega/c [1/m].
double phase_mismatch(OpticalMode const& mode, double velocity);

/*!
 * Integrate exp(i z omega/v) u*(z) over the sampled interval.
 *
 * Within each grid step the integrand magnitude and phase are interpolated
 * linearly and integrated exactly, so a constant-amplitude profile with a
 * uniform phase slope is reproduced to rounding error. Throws
 * ResolutionError if any step advances the integrand phase by more than
 * 2*pi/min_samples_per_period.
 */
complex
phase_matching_integral(SampledField const& field, double omega, double velocity);

//! Anchor for the vacuum coupling prefactor.
struct CouplingCalibration
{
    double reference_coupling = 0.03;  //!< |g| at the reference point
    double reference_distance = 50e-9;  //!< [m]
    double reference_wavelength = 1550e-9;  //!< [m]
};

//! Single-mode coupling amplitude.
struct ModeCoupling
{
    complex g{};
    bool clipped = false;
};

//! Per-mode couplings and their summed emission probability.
struct CouplingResult
{
    std::vector<complex> per_mode;
    double total_probability = 0.0;
    bool clipped = false;

    //! |g|^2 for each mode
    std::vector<double> probabilities() const;
};

/*!
 * Intervals of the beam line where the evanescent field is non-negligible.
 *
 * A tangential or straight pass gives one interval; a ring chord gives two
 * separated by a field-free gap.
 */
std::vector<std::pair<double, double>>
field_support(OpticalMode const& mode, Trajectory const& traj);

// Sample the analytic mode field on [z0, z1] fine enough for quadrature.
SampledField sample_field(OpticalMode const& mode,
                          Trajectory const& traj,
                          double z0,
                          double z1);

// Vacuum coupling g_qu for one mode; zero with clipped=true if d < 0.
ModeCoupling coupling_strength(OpticalMode const& mode,
                               Trajectory const& traj,
                               CouplingCalibration const& calibration = {});

// Couplings of every comb mode and P = sum |g|^2.
CouplingResult total_scattering_probability(
    ModeComb const& comb,
    Trajectory const& traj,
    CouplingCalibration const& calibration = {});

// Coherent sum g1 + exp(i*phase) g2 of two sequential interactions.
complex ramsey_coupling(complex g1, complex g2, double phase);

//! Couplings of the two crossings of a ring chord in their local frames.
struct ChordSegments
{
    complex first{};
    complex second{};
    double relative_phase = 0.0;  //!< Phase of second relative to first
    bool separated = false;  //!< False when the support is one interval

    //! Phase of the second term relative to the first in g1 + e^{i phi} g2
    double interference_phase() const;
};

ChordSegments chord_segments(OpticalMode const& mode,
                             Trajectory const& traj,
                             CouplingCalibration const& calibration = {});

// Spectral FWHM [eV] of |g|^2 for a continuously tuned mode whose effective
// index follows the given dispersion, scanned over [min_ev, max_ev].
double phase_matching_bandwidth(Trajectory const& traj,
                                Dispersion const& dispersion,
                                double decay_length,
                                double min_ev,
                                double max_ev,
                                CouplingCalibration const& calibration = {});
}  // namespace epair::physics
