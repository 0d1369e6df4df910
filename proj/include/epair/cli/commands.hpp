#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "json.hpp"

#include "epair/config/settings.hpp"
#include "epair/error.hpp"
#include "epair/physics/spectrum.hpp"

namespace epair::cli
{
//! Bad command-line arguments (exit code 2).
class UsageError : public Error
{
  public:
    using Error::Error;
};

// Parse "first,last,count" into count evenly spaced values; count 0 is empty.
std::vector<double> parse_range(std::string const& text);
// Parse a comma-separated list of numbers.
std::vector<double> parse_list(std::string const& text);

//---------------------------------------------------------------------------//
// One row per (d, x, mode) with the per-mode and total scattering
// probability; header only for an empty scan.
std::string couple_csv(mc::SimConfig const& sim, config::CoupleScan const& scan, unsigned threads = 1);

//! Envelope summary at the configured beam position.
struct SpectrumSummary
{
    double spacing_nm = 0.0;  //!< mode spacing next to the anchor wavelength
    double support_lo_nm = 0.0;  //!< shortest wavelength with detection > 0
    double support_hi_nm = 0.0;
    std::size_t detected_modes = 0;
    std::size_t uncovered_modes = 0;
};

physics::SpectralEnvelope spectrum(mc::SimConfig const& sim);
SpectrumSummary summarize(physics::SpectralEnvelope const& env, double anchor_wavelength);
// CSV: mode,wavelength_nm,coupling_probability,detected_probability
std::string spectrum_csv(physics::SpectralEnvelope const& env);

//! Detected emission along the chip edge, with and without single-mode gating.
struct LateralScan
{
    std::vector<double> offsets;  //!< [m]
    std::vector<double> multimode;  //!< summed over modes, no filter
    std::vector<double> single_mode;  //!< through the gating filter
};

LateralScan lateral_scan(mc::SimConfig const& sim,
                         physics::SpectralFilter const& filter,
                         std::vector<double> const& offsets,
                         unsigned threads = 1);

// Number of local minima at least `contrast` times below the highest value
// on each side.
std::size_t deep_minima(std::vector<double> const& values, double contrast = 10.0);
// True if values never rise by more than `tolerance` (relative) past the maximum.
bool monotone_after_peak(std::vector<double> const& values, double tolerance = 0.01);

// CSV: x_m,multimode,single_mode
std::string lateral_csv(LateralScan const& scan);
nlohmann::json spectrum_json(SpectrumSummary const& s, LateralScan const* lateral);
}  // namespace epair::cli
