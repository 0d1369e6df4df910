#include "epair/analysis/histogram.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "epair/error.hpp"
#include "epair/io/csv.hpp"

namespace epair::analysis
{
HistogramAxes HistogramAxes::for_spectrometer(SpectrometerAxis const& axis,
                                              std::size_t pixels,
                                              double window)
{
    HistogramAxes a;
    a.window = window;
    a.energy_bin_ev = axis.dispersion_ev_per_px;
    a.energy_min_ev = axis.energy(-0.5);
    a.energy_bins = pixels;
    return a;
}

std::int64_t HistogramAxes::half_time_bins() const
{
    return std::max<std::int64_t>(1, (to_fine(window) + time_bin() - 1) / time_bin());
}

double HistogramAxes::time_edge(std::size_t bin) const
{
    return to_seconds((std::int64_t(bin) - half_time_bins()) * time_bin());
}

double HistogramAxes::time_center(std::size_t bin) const
{
    return time_edge(bin) + 0.5 * to_seconds(time_bin());
}

std::int64_t HistogramAxes::energy_index(double ev) const
{
    double const k = std::floor((ev - energy_min_ev) / energy_bin_ev);
    if (!(k >= 0.0) || k >= double(energy_bins))
        return -1;
    return static_cast<std::int64_t>(k);
}

CoincidenceHistogram::CoincidenceHistogram(HistogramAxes const& a)
    : axes(a)
    , counts(a.time_bins() * a.energy_bins, 0)
    , electron_spectrum(a.energy_bins, 0)
{
}

std::uint64_t CoincidenceHistogram::total() const
{
    std::uint64_t sum = 0;
    for (auto v : counts)
        sum += v;
    return sum;
}

CoincidenceHistogram& CoincidenceHistogram::operator+=(CoincidenceHistogram const& other)
{
    if (other.counts.size() != counts.size()
        || other.electron_spectrum.size() != electron_spectrum.size())
    {
        throw ContractError("histogram axes differ");
    }
    for (std::size_t i = 0; i < counts.size(); ++i)
        counts[i] += other.counts[i];
    for (std::size_t i = 0; i < electron_spectrum.size(); ++i)
        electron_spectrum[i] += other.electron_spectrum[i];
    electrons += other.electrons;
    in_window += other.in_window;
    return *this;
}

namespace
{
void accumulate(std::span<ElectronEvent const> electrons,
                std::span<FineTime const> photons,
                FineTime delay,
                CoincidenceHistogram& h)
{
    auto const& axes = h.axes;
    FineTime const bin = axes.time_bin();
    std::int64_t const half = axes.half_time_bins();
    FineTime const lo = -half * bin;
    FineTime const hi = half * bin;
    auto next = photons.begin();
    if (!electrons.empty())
        next = std::lower_bound(photons.begin(), photons.end(), electrons.front().time);
    for (auto const& e : electrons)
    {
        ++h.electrons;
        std::int64_t const eb = axes.energy_index(e.energy_loss_ev);
        if (eb >= 0)
            ++h.electron_spectrum[std::size_t(eb)];
        while (next != photons.end() && *next < e.time)
            ++next;
        if (photons.empty() || eb < 0)
            continue;
        // Nearest photon; the earlier one wins a tie.
        FineTime best;
        if (next == photons.end())
            best = *(next - 1);
        else if (next == photons.begin())
            best = *next;
        else
            best = (e.time - *(next - 1) <= *next - e.time) ? *(next - 1) : *next;
        FineTime const dt = best - e.time - delay;
        if (dt < lo || dt >= hi)
            continue;
        // Floor division onto the bin grid.
        FineTime const shifted = dt - lo;
        auto const tb = static_cast<std::size_t>(shifted / bin);
        ++h.at(tb, std::size_t(eb));
        ++h.in_window;
    }
}
}  // namespace

CoincidenceHistogram correlate(std::span<ElectronEvent const> electrons,
                               std::span<FineTime const> photons,
                               CorrelationOptions const& opts)
{
    if (!(opts.axes.window > 0.0) || !(opts.axes.energy_bin_ev > 0.0)
        || opts.axes.energy_bins == 0)
    {
        throw DomainError("invalid histogram axes");
    }
    for (std::size_t i = 1; i < electrons.size(); ++i)
    {
        if (electrons[i].time < electrons[i - 1].time)
            throw ContractError("electron events are not time-sorted");
    }
    FineTime const min_gap = 2 * to_fine(opts.axes.window);
    for (std::size_t i = 1; i < photons.size(); ++i)
    {
        if (photons[i] < photons[i - 1])
            throw ContractError("photon tags are not time-sorted");
        if (photons[i] - photons[i - 1] < min_gap)
            throw ContractError("photon tags closer than twice the correlation window");
    }

    FineTime const delay = to_fine(opts.delay);
    unsigned const nthreads = std::max(1u, opts.threads);
    std::size_t const chunk = (electrons.size() + nthreads - 1) / std::max(1u, nthreads);
    std::vector<CoincidenceHistogram> parts;
    for (unsigned k = 0; k < nthreads; ++k)
        parts.emplace_back(opts.axes);
    auto run = [&](unsigned k) {
        std::size_t const b = std::min(electrons.size(), k * chunk);
        std::size_t const e = std::min(electrons.size(), b + chunk);
        accumulate(electrons.subspan(b, e - b), photons, delay, parts[k]);
    };
    if (nthreads == 1)
    {
        run(0);
    }
    else
    {
        std::vector<std::thread> pool;
        for (unsigned k = 0; k < nthreads; ++k)
            pool.emplace_back(run, k);
        for (auto& t : pool)
            t.join();
    }
    CoincidenceHistogram h = std::move(parts[0]);
    for (unsigned k = 1; k < nthreads; ++k)
        h += parts[k];

    h.photons = photons.size();
    h.delay = opts.delay;
    h.duration = opts.duration;
    if (!(h.duration > 0.0))
    {
        FineTime first = INT64_MAX;
        FineTime last = INT64_MIN;
        if (!electrons.empty())
        {
            first = std::min(first, electrons.front().time);
            last = std::max(last, electrons.back().time);
        }
        if (!photons.empty())
        {
            first = std::min(first, photons.front());
            last = std::max(last, photons.back());
        }
        h.duration = last > first ? to_seconds(last - first) : 0.0;
    }
    return h;
}

std::vector<FineTime> photon_times(io::EventStream const& stream, std::uint8_t channel)
{
    std::vector<FineTime> out;
    for (auto const& p : stream.packets)
    {
        if (!p.is_hit() && p.channel == channel)
            out.push_back(packet_time(p));
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::string export_histogram_csv(CoincidenceHistogram const& h)
{
    std::string out = "time_bin,energy_bin,dt_s,energy_ev,counts\n";
    for (std::size_t t = 0; t < h.axes.time_bins(); ++t)
    {
        for (std::size_t e = 0; e < h.axes.energy_bins; ++e)
        {
            auto const n = h.at(t, e);
            if (n == 0)
                continue;
            out += std::to_string(t) + ',' + std::to_string(e) + ','
                   + io::format_number(h.axes.time_center(t)) + ','
                   + io::format_number(h.axes.energy_center(e)) + ','
                   + std::to_string(n) + '\n';
        }
    }
    return out;
}

CoincidenceHistogram import_histogram_csv(std::string const& text,
                                          HistogramAxes const& axes)
{
    CoincidenceHistogram h(axes);
    auto const lines = io::csv_lines(text);
    for (std::size_t i = 1; i < lines.size(); ++i)
    {
        auto const f = io::split_fields(lines[i]);
        if (f.size() != 5)
            throw ConfigError("histogram CSV row " + std::to_string(i)
                              + " needs 5 fields");
        auto const t = static_cast<std::size_t>(io::parse_number(f[0]));
        auto const e = static_cast<std::size_t>(io::parse_number(f[1]));
        if (t >= axes.time_bins() || e >= axes.energy_bins)
            throw ConfigError("histogram CSV row " + std::to_string(i)
                              + " outside the axes");
        auto const n = static_cast<std::uint64_t>(io::parse_number(f[4]));
        h.at(t, e) = n;
        h.in_window += n;
    }
    return h;
}
}  // namespace epair::analysis
