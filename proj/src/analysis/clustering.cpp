#include "epair/analysis/clustering.hpp"

#include <algorithm>
#include <numeric>
#include <tuple>

#include "epair/error.hpp"

namespace epair::analysis
{
namespace
{
struct Hit
{
    FineTime time;
    std::uint16_t x;
    std::uint16_t y;
};

struct DisjointSet
{
    std::vector<std::uint32_t> parent;

    explicit DisjointSet(std::size_t n) : parent(n)
    {
        std::iota(parent.begin(), parent.end(), 0u);
    }

    std::uint32_t find(std::uint32_t i)
    {
        while (parent[i] != i)
        {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        return i;
    }

    void unite(std::uint32_t a, std::uint32_t b)
    {
        a = find(a);
        b = find(b);
        if (a == b)
            return;
        // Lower index as root keeps the result independent of link order.
        if (a < b)
            parent[b] = a;
        else
            parent[a] = b;
    }
};
}  // namespace

std::vector<ElectronEvent> cluster_hits(std::span<io::Packet const> packets,
                                        SpectrometerAxis const& axis,
                                        ClusterOptions const& opts,
                                        OffsetMap const* offsets)
{
    if (!(opts.max_distance_px >= 0.0) || !(opts.max_time >= 0.0))
        throw DomainError("cluster limits must be non-negative");
    std::vector<Hit> hits;
    hits.reserve(packets.size());
    for (auto const& p : packets)
    {
        if (!p.is_hit())
            continue;
        FineTime t = packet_time(p);
        if (offsets && p.x < offsets->width && p.y < offsets->height)
            t -= to_fine(offsets->at(p.x, p.y));
        hits.push_back({t, p.x, p.y});
    }
    std::sort(hits.begin(), hits.end(), [](Hit const& a, Hit const& b) {
        return std::tie(a.time, a.y, a.x) < std::tie(b.time, b.y, b.x);
    });

    FineTime const dt_max = to_fine(opts.max_time);
    double const d2_max = opts.max_distance_px * opts.max_distance_px;
    DisjointSet sets(hits.size());
    std::size_t first = 0;
    for (std::size_t i = 0; i < hits.size(); ++i)
    {
        while (hits[i].time - hits[first].time > dt_max)
            ++first;
        for (std::size_t j = first; j < i; ++j)
        {
            double const dx = double(hits[i].x) - hits[j].x;
            double const dy = double(hits[i].y) - hits[j].y;
            if (dx * dx + dy * dy <= d2_max)
                sets.unite(std::uint32_t(i), std::uint32_t(j));
        }
    }

    // Roots are the earliest hit of each cluster, so events come out in
    // time order when accumulated by root.
    std::vector<std::uint32_t> slot(hits.size(), UINT32_MAX);
    std::vector<ElectronEvent> events;
    std::vector<double> sx;
    std::vector<double> sy;
    for (std::size_t i = 0; i < hits.size(); ++i)
    {
        std::uint32_t const root = sets.find(std::uint32_t(i));
        if (slot[root] == UINT32_MAX)
        {
            slot[root] = std::uint32_t(events.size());
            ElectronEvent e;
            e.time = hits[root].time;
            events.push_back(e);
            sx.push_back(0.0);
            sy.push_back(0.0);
        }
        std::uint32_t const k = slot[root];
        sx[k] += hits[i].x;
        sy[k] += hits[i].y;
        ++events[k].hits;
    }
    for (std::size_t k = 0; k < events.size(); ++k)
    {
        auto& e = events[k];
        e.x = sx[k] / e.hits;
        e.y = sy[k] / e.hits;
        e.energy_loss_ev = axis.energy(e.x);
    }
    return events;
}

void correct_energy_drift(std::vector<ElectronEvent>& events, DriftCorrection const& opts)
{
    if (events.empty())
        return;
    if (!(opts.bin_duration > 0.0))
        throw DomainError("drift bin duration must be positive");
    FineTime const bin = std::max<FineTime>(1, to_fine(opts.bin_duration));
    auto in_window = [&](ElectronEvent const& e) {
        return e.energy_loss_ev >= opts.reference_lo_ev
               && e.energy_loss_ev <= opts.reference_hi_ev;
    };

    FineTime const t0 = std::min_element(events.begin(),
                                         events.end(),
                                         [](auto const& a, auto const& b) {
                                             return a.time < b.time;
                                         })->time;
    FineTime const t1 = std::max_element(events.begin(),
                                         events.end(),
                                         [](auto const& a, auto const& b) {
                                             return a.time < b.time;
                                         })->time;
    auto const nbins = static_cast<std::size_t>((t1 - t0) / bin + 1);
    std::vector<double> sum(nbins, 0.0);
    std::vector<std::uint32_t> count(nbins, 0);
    double total = 0.0;
    std::size_t total_count = 0;
    for (auto const& e : events)
    {
        if (!in_window(e))
            continue;
        auto const b = static_cast<std::size_t>((e.time - t0) / bin);
        sum[b] += e.energy_loss_ev;
        ++count[b];
        total += e.energy_loss_ev;
        ++total_count;
    }
    if (total_count == 0)
        return;
    double const reference = total / double(total_count);
    std::vector<double> shift(nbins, 0.0);
    double previous = 0.0;
    for (std::size_t b = 0; b < nbins; ++b)
    {
        if (count[b] >= opts.min_events)
            previous = sum[b] / count[b] - reference;
        shift[b] = previous;
    }
    for (auto& e : events)
        e.energy_loss_ev -= shift[static_cast<std::size_t>((e.time - t0) / bin)];
}
}  // namespace epair::analysis
