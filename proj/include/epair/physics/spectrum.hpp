#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "coupling.hpp"
#include "optical_mode.hpp"
#include "trajectory.hpp"

namespace epair::physics
{
//---------------------------------------------------------------------------//
/*!
 * Tabulated relative detector sensitivity S(lambda).
 *
 * Linear interpolation between points sorted by wavelength. Outside the
 * tabulated range the curve is undefined and reports zero.
 */
class SensitivityCurve
{
  public:
    SensitivityCurve() = default;
    //! Points are (wavelength [m], efficiency in [0,1])
    explicit SensitivityCurve(std::vector<std::pair<double, double>> points);

    //! Constant response over all wavelengths
    static SensitivityCurve flat(double value = 1.0);
    //! Two-column CSV: wavelength_nm, efficiency (header row optional)
    static SensitivityCurve from_csv(std::string const& text);

    bool covers(double wavelength) const;
    double operator()(double wavelength) const;
    std::vector<std::pair<double, double>> const& points() const { return points_; }

  private:
    std::vector<std::pair<double, double>> points_;
    std::optional<double> flat_;
};

//! Gaussian band-pass in optical frequency (e.g. a fiber Bragg grating).
struct SpectralFilter
{
    double center_wavelength = 1550e-9;  //!< [m]
    double fwhm_hz = 100e9;
    double peak_transmission = 1.0;

    double transmission(double wavelength) const;
};

//---------------------------------------------------------------------------//
/*!
 * Ordered photon-side transmission stages.
 *
 * The wavelength-dependent bus extraction efficiency belongs to each mode
 * and the spectral sensitivity to the detector, so the chain holds only the
 * flat stages plus an optional spectral filter.
 */
struct LossChain
{
    struct Stage
    {
        std::string name;
        double transmission = 1.0;
    };

    std::vector<Stage> stages;
    std::optional<SpectralFilter> filter;

    //! Product of the flat stages
    double total() const;
    //! Flat product times the filter at this wavelength
    double transmission(double wavelength) const;
    //! Throws ConfigError if a stage is outside [0,1]
    void validate() const;
};

//! Detected-photon probability per mode.
struct SpectralEnvelope
{
    std::vector<double> wavelength;  //!< [m], comb order
    std::vector<double> coupling_probability;  //!< |g|^2
    std::vector<double> probability;  //!< |g|^2 eta S T
    std::vector<std::size_t> uncovered;  //!< modes outside the S table
    bool uncovered_warning() const { return !uncovered.empty(); }
};

SpectralEnvelope emission_spectrum(ModeComb const& comb,
                                   CouplingResult const& coupling,
                                   LossChain const& chain,
                                   SensitivityCurve const& sensitivity);

SpectralEnvelope emission_spectrum(ModeComb const& comb,
                                   Trajectory const& traj,
                                   LossChain const& chain,
                                   SensitivityCurve const& sensitivity,
                                   CouplingCalibration const& calibration = {});
}  // namespace epair::physics
