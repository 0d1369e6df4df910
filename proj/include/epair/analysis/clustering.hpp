#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "calibration.hpp"
#include "fine_time.hpp"
#include "epair/io/event_stream.hpp"

namespace epair::analysis
{
//! Maps the dispersive pixel axis to energy loss.
struct SpectrometerAxis
{
    double zlp_pixel = 100.0;
    double dispersion_ev_per_px = 0.11;

    double energy(double x) const { return (x - zlp_pixel) * dispersion_ev_per_px; }
};

//! One localized electron.
struct ElectronEvent
{
    double x = 0.0;  //!< centroid [px]
    double y = 0.0;
    double energy_loss_ev = 0.0;
    FineTime time = 0;  //!< earliest corrected hit time
    std::uint32_t hits = 0;
};

struct ClusterOptions
{
    double max_distance_px = 5.0;
    double max_time = 125e-9;  //!< [s]
};

/*!
 * Group hits into electrons.
 *
 * Two hits are linked when they are within max_distance_px (Euclidean) and
 * max_time of each other after offset correction; clusters are the
 * connected components. Each event takes the arithmetic-mean position and
 * the earliest corrected time. Non-hit packets are ignored. Output is sorted
 * by time, then position.
 */
std::vector<ElectronEvent> cluster_hits(std::span<io::Packet const> packets,
                                        SpectrometerAxis const& axis = {},
                                        ClusterOptions const& opts = {},
                                        OffsetMap const* offsets = nullptr);

//! Energy-axis re-centering against slow periodic drifts.
struct DriftCorrection
{
    double bin_duration = 100e-6;  //!< [s]
    double reference_lo_ev = -1.0;  //!< window holding the reference peak
    double reference_hi_ev = 1.0;
    std::uint32_t min_events = 5;
};

// Shift each time bin so the mean energy of reference-window events matches
// the run-wide mean. Bins short of statistics reuse the previous shift.
void correct_energy_drift(std::vector<ElectronEvent>& events,
                          DriftCorrection const& opts = {});
}  // namespace epair::analysis
