#include "epair/analysis/calibration.hpp"

#include <algorithm>

#include "epair/analysis/fine_time.hpp"
#include "epair/error.hpp"
#include "epair/io/csv.hpp"

namespace epair::analysis
{
OffsetMap OffsetMap::zero(std::uint16_t width, std::uint16_t height)
{
    OffsetMap m;
    m.width = width;
    m.height = height;
    std::size_t const n = std::size_t(width) * height;
    m.offset.assign(n, 0.0);
    m.hits.assign(n, 0);
    m.flagged.assign(n, 0);
    return m;
}

std::size_t OffsetMap::flagged_count() const
{
    return std::size_t(std::count(flagged.begin(), flagged.end(), 1));
}

OffsetMap
calibrate_pixel_offsets(io::EventStream const& reference, CalibrationOptions const& opts)
{
    std::vector<FineTime> markers;
    for (auto const& p : reference.packets)
    {
        if (!p.is_hit() && p.channel == opts.marker_channel)
            markers.push_back(packet_time(p));
    }
    if (markers.empty())
        throw EstimationError("reference stream has no pulse markers");
    if (!std::is_sorted(markers.begin(), markers.end()))
        throw ContractError("pulse markers are not time-sorted");

    OffsetMap map = OffsetMap::zero();
    std::vector<double> sum(map.offset.size(), 0.0);
    for (auto const& p : reference.packets)
    {
        if (!p.is_hit())
            continue;
        FineTime const t = packet_time(p);
        auto it = std::lower_bound(markers.begin(), markers.end(), t);
        FineTime best;
        if (it == markers.end())
            best = markers.back();
        else if (it == markers.begin())
            best = *it;
        else
            best = (t - *(it - 1) <= *it - t) ? *(it - 1) : *it;
        std::size_t const idx = std::size_t(p.y) * map.width + p.x;
        sum[idx] += to_seconds(t - best);
        ++map.hits[idx];
    }

    double global = 0.0;
    std::size_t calibrated = 0;
    for (std::size_t i = 0; i < sum.size(); ++i)
    {
        if (map.hits[i] >= opts.min_hits && map.hits[i] > 0)
        {
            map.offset[i] = sum[i] / map.hits[i];
            global += map.offset[i];
            ++calibrated;
        }
        else
        {
            map.flagged[i] = 1;
        }
    }
    if (calibrated > 0)
        global /= double(calibrated);
    for (std::size_t i = 0; i < sum.size(); ++i)
    {
        if (!map.flagged[i])
            map.offset[i] -= global;
    }
    return map;
}

std::string export_offsets_csv(OffsetMap const& map)
{
    std::string out = "x,y,offset_ns,hits,flagged\n";
    for (std::uint16_t y = 0; y < map.height; ++y)
    {
        for (std::uint16_t x = 0; x < map.width; ++x)
        {
            std::size_t const i = std::size_t(y) * map.width + x;
            if (map.hits[i] == 0 && map.offset[i] == 0.0)
                continue;
            out += std::to_string(x) + ',' + std::to_string(y) + ','
                   + io::format_number(map.offset[i] * 1e9) + ','
                   + std::to_string(map.hits[i]) + ','
                   + std::to_string(int(map.flagged[i])) + '\n';
        }
    }
    return out;
}

OffsetMap
import_offsets_csv(std::string const& text, std::uint16_t width, std::uint16_t height)
{
    // Pixels absent from the file carry no calibration.
    OffsetMap map = OffsetMap::zero(width, height);
    std::fill(map.flagged.begin(), map.flagged.end(), 1);
    auto const lines = io::csv_lines(text);
    for (std::size_t i = 1; i < lines.size(); ++i)
    {
        auto const f = io::split_fields(lines[i]);
        if (f.size() < 3)
            throw ConfigError("offset CSV row " + std::to_string(i)
                              + " needs x,y,offset_ns");
        double const x = io::parse_number(f[0]);
        double const y = io::parse_number(f[1]);
        if (!(x >= 0 && x < width && y >= 0 && y < height))
            throw ConfigError("offset CSV row " + std::to_string(i)
                              + " outside the pixel grid");
        std::size_t const idx = std::size_t(y) * width + std::size_t(x);
        map.offset[idx] = io::parse_number(f[2]) * 1e-9;
        map.flagged[idx] = 0;
        if (f.size() > 3)
            map.hits[idx] = static_cast<std::uint32_t>(io::parse_number(f[3]));
        if (f.size() > 4)
            map.flagged[idx] = io::parse_number(f[4]) != 0.0;
    }
    return map;
}
}  // namespace epair::analysis
