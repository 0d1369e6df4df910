#include "epair/cli/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "epair/io/csv.hpp"
#include "epair/physics/coupling.hpp"

namespace epair::cli
{
namespace
{
// Run f(i) for i in [0, n) on up to `threads` workers.
template<class F>
void parallel_for(std::size_t n, unsigned threads, F&& f)
{
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    auto worker = [&] {
        for (std::size_t i = next++; i < n && !failed; i = next++)
        {
            try
            {
                f(i);
            }
            catch (...)
            {
                if (!failed.exchange(true))
                    error = std::current_exception();
            }
        }
    };
    unsigned const nt = std::max(1u, std::min<unsigned>(threads, unsigned(std::max<std::size_t>(n, 1))));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < nt; ++t)
        pool.emplace_back(worker);
    worker();
    for (auto& t : pool)
        t.join();
    if (error)
        std::rethrow_exception(error);
}

physics::Trajectory trajectory_at(mc::SimConfig const& sim, double d, double x)
{
    auto t = sim.trajectory();
    t.impact_parameter = d;
    t.lateral_offset = x;
    return t;
}
}  // namespace

//---------------------------------------------------------------------------//
std::vector<double> parse_list(std::string const& text)
{
    std::vector<double> out;
    try
    {
        for (auto f : io::split_fields(text))
            out.push_back(io::parse_number(f));
    }
    catch (ConfigError const& e)
    {
        throw UsageError("invalid number list '" + text + "': " + e.what());
    }
    return out;
}

std::vector<double> parse_range(std::string const& text)
{
    auto const v = parse_list(text);
    if (v.size() != 3 || !std::isfinite(v[0]) || !std::isfinite(v[1]) || !(v[2] >= 0.0)
        || v[2] != std::floor(v[2]) || v[2] > 1e7)
        throw UsageError("range must be first,last,count with a non-negative integer count: '"
                         + text + "'");
    auto const n = std::size_t(v[2]);
    std::vector<double> out;
    for (std::size_t i = 0; i < n; ++i)
        out.push_back(n == 1 ? v[0] : v[0] + (v[1] - v[0]) * double(i) / double(n - 1));
    return out;
}

std::string couple_csv(mc::SimConfig const& sim, config::CoupleScan const& scan, unsigned threads)
{
    std::size_t const nx = scan.offsets.size();
    std::size_t const n = scan.distances.size() * nx;
    std::vector<std::string> blocks(n);
    parallel_for(n, threads, [&](std::size_t i) {
        double const d = scan.distances[i / nx];
        double const x = scan.offsets[i % nx];
        auto const r = physics::total_scattering_probability(
            sim.comb, trajectory_at(sim, d, x), sim.calibration);
        std::string& out = blocks[i];
        for (std::size_t m = 0; m < sim.comb.size(); ++m)
        {
            auto const g = r.per_mode[m];
            out += io::format_number(d) + ',' + io::format_number(x) + ','
                   + std::to_string(sim.comb[m].index) + ','
                   + io::format_number(sim.comb[m].wavelength() * 1e9) + ','
                   + io::format_number(std::abs(g)) + ',' + io::format_number(g.real()) + ','
                   + io::format_number(g.imag()) + ',' + io::format_number(std::norm(g)) + ','
                   + io::format_number(r.total_probability) + '\n';
        }
    });
    std::string out = "d_m,x_m,mode,wavelength_nm,g_abs,g_re,g_im,probability,total_probability\n";
    for (auto const& b : blocks)
        out += b;
    return out;
}

//---------------------------------------------------------------------------//
physics::SpectralEnvelope spectrum(mc::SimConfig const& sim)
{
    return physics::emission_spectrum(
        sim.comb, sim.trajectory(), sim.photon_chain, sim.sensitivity, sim.calibration);
}

SpectrumSummary summarize(physics::SpectralEnvelope const& env, double anchor_wavelength)
{
    SpectrumSummary s;
    s.uncovered_modes = env.uncovered.size();
    std::size_t const n = env.wavelength.size();
    if (n == 0)
        return s;
    std::size_t k = 0;
    for (std::size_t i = 1; i < n; ++i)
        if (std::abs(env.wavelength[i] - anchor_wavelength)
            < std::abs(env.wavelength[k] - anchor_wavelength))
            k = i;
    double sum = 0.0;
    int count = 0;
    if (k > 0)
    {
        sum += std::abs(env.wavelength[k - 1] - env.wavelength[k]);
        ++count;
    }
    if (k + 1 < n)
    {
        sum += std::abs(env.wavelength[k + 1] - env.wavelength[k]);
        ++count;
    }
    s.spacing_nm = count ? sum / count * 1e9 : 0.0;

    double lo = INFINITY, hi = -INFINITY;
    for (std::size_t i = 0; i < n; ++i)
    {
        if (env.probability[i] > 0.0)
        {
            lo = std::min(lo, env.wavelength[i]);
            hi = std::max(hi, env.wavelength[i]);
            ++s.detected_modes;
        }
    }
    if (s.detected_modes)
    {
        s.support_lo_nm = lo * 1e9;
        s.support_hi_nm = hi * 1e9;
    }
    return s;
}

std::string spectrum_csv(physics::SpectralEnvelope const& env)
{
    std::string out = "mode,wavelength_nm,coupling_probability,detected_probability\n";
    for (std::size_t i = 0; i < env.wavelength.size(); ++i)
        out += std::to_string(i) + ',' + io::format_number(env.wavelength[i] * 1e9) + ','
               + io::format_number(env.coupling_probability[i]) + ','
               + io::format_number(env.probability[i]) + '\n';
    return out;
}

LateralScan lateral_scan(mc::SimConfig const& sim,
                         physics::SpectralFilter const& filter,
                         std::vector<double> const& offsets,
                         unsigned threads)
{
    auto open = sim.photon_chain;
    open.filter.reset();
    auto gated = open;
    gated.filter = filter;

    LateralScan out;
    out.offsets = offsets;
    out.multimode.resize(offsets.size());
    out.single_mode.resize(offsets.size());
    parallel_for(offsets.size(), threads, [&](std::size_t i) {
        auto const r = physics::total_scattering_probability(
            sim.comb, trajectory_at(sim, sim.beam.impact_parameter, offsets[i]), sim.calibration);
        auto const a = physics::emission_spectrum(sim.comb, r, open, sim.sensitivity);
        auto const b = physics::emission_spectrum(sim.comb, r, gated, sim.sensitivity);
        for (double p : a.probability)
            out.multimode[i] += p;
        for (double p : b.probability)
            out.single_mode[i] += p;
    });
    return out;
}

std::size_t deep_minima(std::vector<double> const& v, double contrast)
{
    std::size_t count = 0;
    for (std::size_t i = 1; i + 1 < v.size(); ++i)
    {
        if (!(v[i] < v[i - 1] && v[i] <= v[i + 1]))
            continue;
        double const left = *std::max_element(v.begin(), v.begin() + std::ptrdiff_t(i));
        double const right = *std::max_element(v.begin() + std::ptrdiff_t(i) + 1, v.end());
        if (left >= contrast * v[i] && right >= contrast * v[i])
            ++count;
    }
    return count;
}

bool monotone_after_peak(std::vector<double> const& v, double tolerance)
{
    if (v.empty())
        return true;
    auto const peak = std::size_t(std::max_element(v.begin(), v.end()) - v.begin());
    for (std::size_t i = peak + 1; i < v.size(); ++i)
        if (v[i] > v[i - 1] * (1.0 + tolerance))
            return false;
    return true;
}

std::string lateral_csv(LateralScan const& scan)
{
    std::string out = "x_m,multimode,single_mode\n";
    for (std::size_t i = 0; i < scan.offsets.size(); ++i)
        out += io::format_number(scan.offsets[i]) + ',' + io::format_number(scan.multimode[i])
               + ',' + io::format_number(scan.single_mode[i]) + '\n';
    return out;
}

nlohmann::json spectrum_json(SpectrumSummary const& s, LateralScan const* lateral)
{
    nlohmann::json j;
    j["spacing_nm"] = s.spacing_nm;
    j["support_nm"] = {s.support_lo_nm, s.support_hi_nm};
    j["detected_modes"] = s.detected_modes;
    j["uncovered_modes"] = s.uncovered_modes;
    if (lateral)
    {
        j["lateral"] = {{"points", lateral->offsets.size()},
                        {"single_mode_deep_minima", deep_minima(lateral->single_mode)},
                        {"multimode_monotone_after_peak", monotone_after_peak(lateral->multimode)}};
    }
    return j;
}
}  // namespace epair::cli
