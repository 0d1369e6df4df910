#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "epair/analysis/calibration.hpp"
#include "epair/analysis/clustering.hpp"
#include "epair/analysis/metrics.hpp"
#include "epair/io/csv.hpp"
#include "epair/mc/simulation.hpp"

namespace epair::imaging
{
//---------------------------------------------------------------------------//
/*!
 * Raster of beam positions near the chip.
 *
 * Rows step the height above the surface, columns the lateral offset of the
 * beam line. Negative heights put the beam into the chip (masked pixels).
 */
struct ScanGrid
{
    std::vector<double> distances;  //!< impact parameters d, one per row [m]
    std::vector<double> offsets{0.0};  //!< lateral offsets x, one per column [m]
    double dwell = 30e-3;  //!< [s]

    // Single column with n evenly spaced heights from d0 to d1 inclusive.
    static ScanGrid line(double d0, double d1, std::size_t n, double dwell, double x = 0.0);

    std::size_t nx() const { return offsets.size(); }
    std::size_t ny() const { return distances.size(); }
    std::size_t pixels() const { return nx() * ny(); }
    bool clipped(std::size_t iy) const { return distances[iy] < 0.0; }
    void validate() const;
};

//! How each pixel's event stream is reduced to channel counts.
struct ImagingGates
{
    analysis::SpectrometerAxis spectrometer;
    analysis::ClusterOptions cluster;
    std::optional<analysis::OffsetMap> offsets;
    analysis::EnergyGate eels{0.7, 1.1};
    analysis::EnergyGate coincidence{0.6, 1.1};
    //! Unset center: located from the delays pooled over all pixels
    analysis::TimeGate time{std::nullopt, 3.5e-9};
    analysis::Sidebands sidebands;
    double delay = 0.0;  //!< [s]
};

//! Per-pixel channel counts; each Map2D is indexed (x column, d row).
struct ScanMaps
{
    io::Map2D eels;  //!< electrons in the EELS energy gate
    io::Map2D photons;  //!< raw photon tags
    io::Map2D coincidences;  //!< gated electron-photon pairs
    io::Map2D accidentals;  //!< sideband estimate of accidentals in the gate
    io::Map2D live_time;  //!< SPAD live time [s]
    double dwell = 0.0;
    double time_center = 0.0;  //!< coincidence gate center used [s]
    double half_width = 0.0;

    // Photon counts scaled by dwell/live_time (dead-time correction).
    io::Map2D corrected_photons() const;
};

// Simulate and reduce every pixel; seeds derive from cfg.seed and the pixel
// index, so the maps do not depend on threads or scheduling.
ScanMaps raster_simulate(ScanGrid const& grid,
                         mc::SimConfig const& cfg,
                         ImagingGates const& gates = {},
                         unsigned threads = 1);

//---------------------------------------------------------------------------//
//! Counts summed across columns at each height.
struct DistanceProfile
{
    std::vector<double> distance;  //!< [m]
    std::vector<double> counts;
};

DistanceProfile distance_profile(io::Map2D const& map, ScanGrid const& grid);

//! Least-squares fit of counts(d) = A exp(-d/l) + B.
struct DecayFit
{
    double decay_length = 0.0;  //!< l [m]
    double amplitude = 0.0;  //!< A, referenced to the first distance
    double offset = 0.0;  //!< B
    double decay_length_sigma = 0.0;
    double amplitude_sigma = 0.0;
    double offset_sigma = 0.0;
    double chi2 = 0.0;
    std::size_t ndf = 0;
    std::vector<double> residuals;  //!< normalized (data - model)/sigma
};

/*!
 * Fit a decay profile. Point uncertainties default to Poisson,
 * sqrt(max(counts, 1)). Throws FitError with residuals if fewer than five
 * points exceed the noise or the fit does not converge to a positive length.
 */
DecayFit decay_profile(DistanceProfile const& profile, std::span<double const> sigma = {});

struct DynamicRange
{
    double value = 1.0;
    bool flat = false;  //!< no signal above the floor
};

// Maximum counts over max(floor, 1 count); 1 and flat when nothing exceeds it.
DynamicRange dynamic_range(std::span<double const> counts, double floor);

// CSV with header x_idx,y_idx,channel,counts covering every channel.
std::string export_maps_csv(ScanMaps const& maps);

// Fits, floors and dynamic ranges of the three channels along distance.
nlohmann::json imaging_summary(ScanMaps const& maps, ScanGrid const& grid);
}  // namespace epair::imaging
