#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace epair::physics
{
//---------------------------------------------------------------------------//
/*!
 * One longitudinal resonator mode.
 *
 * The vacuum wavelength and loaded quality factor are derived from the
 * angular frequency and the two loss rates, so they are always consistent.
 * The effective index carries the linear dispersion evaluated at this mode's
 * wavelength.
 */
struct OpticalMode
{
    int index = 0;  //!< Azimuthal order relative to the comb anchor
    double angular_frequency = 0.0;  //!< rad/s
    double effective_index = 1.0;
    double decay_length = 250e-9;  //!< Evanescent field decay length [m]
    double field_scale = 1.0;  //!< Relative peak surface field (u0)
    double intrinsic_loss_rate = 0.0;  //!< kappa_0 [rad/s]
    double external_coupling_rate = 0.0;  //!< kappa_ex [rad/s]

    double wavelength() const;
    double frequency_hz() const;
    double photon_energy_ev() const;
    double total_loss_rate() const
    {
        return intrinsic_loss_rate + external_coupling_rate;
    }
    double quality_factor() const;
};

// Throws ConfigError when a mode violates its invariants.
void validate(OpticalMode const& mode);

//! Linear effective-index dispersion n(lambda) = n0 + slope*(lambda-lambda0).
struct Dispersion
{
    double reference_wavelength = 1550e-9;
    //! Phase matched to a 120 keV electron at the reference wavelength
    double reference_index = 1.704533;
    //! dn/dlambda [1/m]; sets a ~45 meV phase-matching bandwidth at 160 nm
    double slope = -0.45e6;

    double index_at(double wavelength) const
    {
        return reference_index + slope * (wavelength - reference_wavelength);
    }
};

//! Parameters from which a mode comb is generated.
struct CombSpec
{
    double anchor_wavelength = 1550e-9;  //!< Wavelength of mode index 0
    double free_spectral_range_hz = 194e9;
    double min_wavelength = 1450e-9;
    double max_wavelength = 1700e-9;
    Dispersion dispersion{};
    double decay_length = 250e-9;
    double field_scale = 1.0;
    double quality_factor = 5.5e5;
    //! kappa_ex/(kappa_0+kappa_ex) at the anchor and its wavelength slope
    double coupling_efficiency = 0.17;
    double coupling_efficiency_slope = 0.0;  //!< [1/m]
};

//---------------------------------------------------------------------------//
/*!
 * Ordered set of modes spaced by one free spectral range.
 *
 * Modes are ordered by increasing index, i.e. increasing frequency and
 * strictly decreasing wavelength.
 */
class ModeComb
{
  public:
    ModeComb() = default;
    ModeComb(std::vector<OpticalMode> modes, double fsr_hz);

    static ModeComb generate(CombSpec const& spec);

    std::span<OpticalMode const> modes() const { return modes_; }
    std::size_t size() const { return modes_.size(); }
    bool empty() const { return modes_.empty(); }
    OpticalMode const& operator[](std::size_t i) const { return modes_[i]; }
    double free_spectral_range_hz() const { return fsr_hz_; }

    //! Index into modes() of the mode closest to a wavelength
    std::size_t nearest(double wavelength) const;

  private:
    std::vector<OpticalMode> modes_;
    double fsr_hz_ = 0.0;
};

// Bus-waveguide extraction efficiency kappa_ex/(kappa_0+kappa_ex).
double bus_coupling_efficiency(double intrinsic_loss_rate,
                               double external_coupling_rate);

// Photon lifetime Q/omega in seconds.
double cavity_lifetime(double quality_factor, double angular_frequency);
}  // namespace epair::physics
