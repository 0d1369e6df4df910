#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "epair/io/event_stream.hpp"

namespace epair::analysis
{
//! Per-pixel ToA offsets [s] to subtract from raw hit times.
struct OffsetMap
{
    std::uint16_t width = io::pixel_grid_size;
    std::uint16_t height = io::pixel_grid_size;
    std::vector<double> offset;  //!< row-major, seconds
    std::vector<std::uint32_t> hits;  //!< calibration statistics per pixel
    std::vector<std::uint8_t> flagged;  //!< below minimum statistics

    static OffsetMap zero(std::uint16_t width = io::pixel_grid_size,
                          std::uint16_t height = io::pixel_grid_size);

    double at(std::uint16_t x, std::uint16_t y) const
    {
        return offset[std::size_t(y) * width + x];
    }
    std::size_t flagged_count() const;
};

struct CalibrationOptions
{
    std::uint32_t min_hits = 1750;
    std::uint8_t marker_channel = 1;
};

// Mean hit delay after the nearest pulse marker per pixel, minus the mean
// over calibrated pixels. Pixels below min_hits get offset 0 and a flag.
OffsetMap
calibrate_pixel_offsets(io::EventStream const& reference, CalibrationOptions const& opts = {});

// CSV: x,y,offset_ns,hits,flagged (only pixels with hits or nonzero offset).
// On import, pixels missing from the file are flagged.
std::string export_offsets_csv(OffsetMap const& map);
OffsetMap import_offsets_csv(std::string const& text,
                             std::uint16_t width = io::pixel_grid_size,
                             std::uint16_t height = io::pixel_grid_size);
}  // namespace epair::analysis
