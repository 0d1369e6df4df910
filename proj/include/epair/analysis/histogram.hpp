#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "clustering.hpp"
#include "fine_time.hpp"

namespace epair::analysis
{
//! Binning of the (relative time, energy loss) plane.
struct HistogramAxes
{
    double window = 600e-9;  //!< half-width; Delta t in [-window, window)
    double energy_min_ev = -11.055;
    double energy_bin_ev = 0.11;
    std::size_t energy_bins = 512;

    //! Energy bins aligned to spectrometer pixels
    static HistogramAxes for_spectrometer(SpectrometerAxis const& axis,
                                          std::size_t pixels = 512,
                                          double window = 600e-9);

    FineTime time_bin() const { return fine_per_tdc_tick; }
    std::int64_t half_time_bins() const;
    std::size_t time_bins() const { return std::size_t(2 * half_time_bins()); }
    //! Lower edge of a time bin [s]
    double time_edge(std::size_t bin) const;
    double time_center(std::size_t bin) const;
    double energy_center(std::size_t bin) const
    {
        return energy_min_ev + (double(bin) + 0.5) * energy_bin_ev;
    }
    //! Energy bin index, or -1 outside the axis
    std::int64_t energy_index(double ev) const;

    friend bool operator==(HistogramAxes const&, HistogramAxes const&) = default;
};

//---------------------------------------------------------------------------//
/*!
 * Counts of electrons versus delay to their nearest photon tag and energy.
 *
 * Stored time-major: counts[t * energy_bins + e].
 */
struct CoincidenceHistogram
{
    HistogramAxes axes;
    std::vector<std::uint64_t> counts;
    //! Energy spectrum of every electron, with or without a photon nearby
    std::vector<std::uint64_t> electron_spectrum;
    std::uint64_t electrons = 0;
    std::uint64_t photons = 0;
    std::uint64_t in_window = 0;  //!< entries in counts
    double duration = 0.0;  //!< [s]
    double delay = 0.0;  //!< subtracted from every Delta t [s]

    explicit CoincidenceHistogram(HistogramAxes const& a = {});

    std::uint64_t at(std::size_t t, std::size_t e) const
    {
        return counts[t * axes.energy_bins + e];
    }
    std::uint64_t& at(std::size_t t, std::size_t e)
    {
        return counts[t * axes.energy_bins + e];
    }
    std::uint64_t total() const;
    CoincidenceHistogram& operator+=(CoincidenceHistogram const& other);
    friend bool operator==(CoincidenceHistogram const&,
                           CoincidenceHistogram const&) = default;
};

struct CorrelationOptions
{
    HistogramAxes axes;
    double delay = 0.0;  //!< global electronic/propagation delay [s]
    double duration = 0.0;  //!< run length for rates; 0 = span of the data
    unsigned threads = 1;
};

/*!
 * Tag each electron with the delay t_photon - t_electron - delay to its
 * nearest photon (earlier photon on ties) and bin those inside the window.
 *
 * Throws ContractError if either sequence is unsorted or photon spacing is
 * below twice the window. Parallel accumulation is bin-identical to serial.
 */
CoincidenceHistogram correlate(std::span<ElectronEvent const> electrons,
                               std::span<FineTime const> photons,
                               CorrelationOptions const& opts = {});

// Photon tag times on one TDC channel.
std::vector<FineTime> photon_times(io::EventStream const& stream, std::uint8_t channel = 0);

// Nonzero bins as time_bin,energy_bin,dt_s,energy_ev,counts
std::string export_histogram_csv(CoincidenceHistogram const& h);
CoincidenceHistogram import_histogram_csv(std::string const& text,
                                          HistogramAxes const& axes);
}  // namespace epair::analysis
