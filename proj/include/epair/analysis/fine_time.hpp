#pragma once

#include <cmath>
#include <cstdint>

#include "epair/io/event_stream.hpp"

namespace epair::analysis
{
//! Analysis clock: 1/256 of a TDC tick (~1 ps), so both detector clocks and
//! sub-tick calibration offsets are exact integers.
using FineTime = std::int64_t;

inline constexpr FineTime fine_per_tdc_tick = 256;
inline constexpr FineTime fine_per_hit_tick = 6 * fine_per_tdc_tick;
inline constexpr double fine_per_second = 3.84e9 * fine_per_tdc_tick;

inline double to_seconds(FineTime t)
{
    return double(t) / fine_per_second;
}

inline FineTime to_fine(double seconds)
{
    return static_cast<FineTime>(std::llround(seconds * fine_per_second));
}

inline FineTime packet_time(io::Packet const& p)
{
    return static_cast<FineTime>(p.ticks)
           * (p.is_hit() ? fine_per_hit_tick : fine_per_tdc_tick);
}
}  // namespace epair::analysis
