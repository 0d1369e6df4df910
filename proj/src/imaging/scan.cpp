#include "epair/imaging/scan.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include <Eigen/Dense>
#include <unsupported/Eigen/NonLinearOptimization>

#include "epair/analysis/histogram.hpp"
#include "epair/error.hpp"

namespace epair::imaging
{
namespace
{
constexpr std::uint64_t pixel_stream_base = 1'000'000;
//! Pooled delays beyond this do not take part in locating the peak
constexpr double peak_search_range = 50e-9;

struct PixelResult
{
    double eels = 0.0;
    double photons = 0.0;
    double live = 0.0;
    std::vector<analysis::FineTime> delays;  //!< gated electrons, |dt| <= outer
};

// Delay to the nearest photon; the earlier photon wins ties.
std::optional<analysis::FineTime> nearest_delay(std::span<analysis::FineTime const> photons,
                                                analysis::FineTime t)
{
    if (photons.empty())
        return std::nullopt;
    auto it = std::lower_bound(photons.begin(), photons.end(), t);
    if (it == photons.end())
        return photons.back() - t;
    if (it == photons.begin())
        return *it - t;
    auto const before = *(it - 1) - t;
    auto const after = *it - t;
    return -before <= after ? before : after;
}

PixelResult run_pixel(ScanGrid const& grid,
                      mc::SimConfig const& base,
                      ImagingGates const& gates,
                      std::size_t ix,
                      std::size_t iy)
{
    mc::SimConfig cfg = base;
    cfg.beam.impact_parameter = grid.distances[iy];
    cfg.beam.lateral_offset = grid.offsets[ix];
    cfg.duration = grid.dwell;
    cfg.threads = 1;
    cfg.record_ground_truth = false;
    cfg.seed = mc::derive_seed(base.seed, pixel_stream_base + iy * grid.nx() + ix);
    // A beam inside the chip never reaches the spectrometer.
    if (grid.clipped(iy))
        cfg.beam.electron_rate = 0.0;

    auto const model = mc::EmissionModel::build(cfg);
    auto const sim = mc::simulate_run(cfg, model);

    auto const* offsets = gates.offsets ? &*gates.offsets : nullptr;
    auto const electrons
        = analysis::cluster_hits(sim.stream.packets, gates.spectrometer, gates.cluster, offsets);
    auto const photons = analysis::photon_times(sim.stream, cfg.spad.channel);

    PixelResult r;
    r.photons = double(photons.size());
    r.live = std::max(0.0, grid.dwell - r.photons * cfg.spad.dead_time);
    auto const delay = analysis::to_fine(gates.delay);
    auto const outer = analysis::to_fine(gates.sidebands.outer);
    for (auto const& e : electrons)
    {
        double const E = e.energy_loss_ev;
        if (E >= gates.eels.lo_ev && E <= gates.eels.hi_ev)
            r.eels += 1.0;
        if (E < gates.coincidence.lo_ev || E > gates.coincidence.hi_ev)
            continue;
        if (auto dt = nearest_delay(photons, e.time))
        {
            auto const d = *dt - delay;
            if (std::abs(d) <= outer)
                r.delays.push_back(d);
        }
    }
    return r;
}

// Center of the densest 2*half_width span of pooled delays near zero.
double locate_peak(std::vector<PixelResult> const& pixels, double half_width)
{
    auto const bin = analysis::fine_per_tdc_tick;
    auto const range = analysis::to_fine(peak_search_range);
    std::int64_t const nb = 2 * range / bin;
    std::vector<double> h(std::size_t(nb), 0.0);
    for (auto const& p : pixels)
        for (auto d : p.delays)
            if (d >= -range && d < range)
                h[std::size_t((d + range) / bin)] += 1.0;
    auto const w = std::max<std::int64_t>(1, 2 * analysis::to_fine(half_width) / bin);
    if (w >= nb)
        return 0.0;
    double run = 0.0;
    for (std::int64_t i = 0; i < w; ++i)
        run += h[std::size_t(i)];
    double best = run;
    std::int64_t best_at = 0;
    for (std::int64_t i = 1; i + w <= nb; ++i)
    {
        run += h[std::size_t(i + w - 1)] - h[std::size_t(i - 1)];
        if (run > best)
        {
            best = run;
            best_at = i;
        }
    }
    if (best == 0.0)
        return 0.0;
    return analysis::to_seconds(best_at * bin - range + w * bin / 2);
}

//---------------------------------------------------------------------------//
// Residuals r_i = (A exp(-k (d_i - d_0)) + B - y_i) / s_i with d in nm.
struct DecayFunctor
{
    using Scalar = double;
    using InputType = Eigen::VectorXd;
    using ValueType = Eigen::VectorXd;
    using JacobianType = Eigen::MatrixXd;
    enum
    {
        InputsAtCompileTime = Eigen::Dynamic,
        ValuesAtCompileTime = Eigen::Dynamic
    };

    Eigen::VectorXd d, y, s;

    int inputs() const { return 3; }
    int values() const { return int(d.size()); }

    int operator()(Eigen::VectorXd const& p, Eigen::VectorXd& f) const
    {
        for (Eigen::Index i = 0; i < d.size(); ++i)
            f[i] = (p[0] * std::exp(-p[1] * d[i]) + p[2] - y[i]) / s[i];
        return 0;
    }

    int df(Eigen::VectorXd const& p, Eigen::MatrixXd& J) const
    {
        for (Eigen::Index i = 0; i < d.size(); ++i)
        {
            double const e = std::exp(-p[1] * d[i]);
            J(i, 0) = e / s[i];
            J(i, 1) = -p[0] * d[i] * e / s[i];
            J(i, 2) = 1.0 / s[i];
        }
        return 0;
    }
};
}  // namespace

//---------------------------------------------------------------------------//
ScanGrid ScanGrid::line(double d0, double d1, std::size_t n, double dwell, double x)
{
    ScanGrid g;
    g.offsets = {x};
    g.dwell = dwell;
    for (std::size_t i = 0; i < n; ++i)
        g.distances.push_back(n == 1 ? d0 : d0 + (d1 - d0) * double(i) / double(n - 1));
    return g;
}

void ScanGrid::validate() const
{
    if (!(dwell > 0.0))
        throw ConfigError("scan dwell time must be positive");
    if (distances.empty() || offsets.empty())
        throw ConfigError("scan grid is empty");
    for (double v : distances)
        if (!std::isfinite(v))
            throw ConfigError("scan distances must be finite");
    for (double v : offsets)
        if (!std::isfinite(v))
            throw ConfigError("scan offsets must be finite");
}

io::Map2D ScanMaps::corrected_photons() const
{
    io::Map2D out = photons;
    for (std::size_t i = 0; i < out.values.size(); ++i)
    {
        double const live = live_time.values[i];
        if (!(live > 0.0))
            throw SaturationError("photon channel has no live time at pixel "
                                  + std::to_string(i));
        out.values[i] *= dwell / live;
    }
    return out;
}

ScanMaps raster_simulate(ScanGrid const& grid,
                         mc::SimConfig const& cfg,
                         ImagingGates const& gates,
                         unsigned threads)
{
    grid.validate();
    cfg.validate();
    if (!(gates.time.half_width > 0.0))
        throw ConfigError("coincidence half width must be positive");
    if (!(gates.sidebands.outer > gates.sidebands.inner) || gates.sidebands.inner < 0.0)
        throw ConfigError("sidebands must satisfy 0 <= inner < outer");

    std::size_t const n = grid.pixels();
    std::vector<PixelResult> pixels(n);
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    auto worker = [&] {
        for (std::size_t i = next++; i < n && !failed; i = next++)
        {
            try
            {
                pixels[i] = run_pixel(grid, cfg, gates, i % grid.nx(), i / grid.nx());
            }
            catch (...)
            {
                if (!failed.exchange(true))
                    error = std::current_exception();
            }
        }
    };
    unsigned const nt = std::max(1u, std::min<unsigned>(threads, unsigned(n)));
    if (nt == 1)
    {
        worker();
    }
    else
    {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < nt; ++t)
            pool.emplace_back(worker);
        for (auto& t : pool)
            t.join();
    }
    if (error)
        std::rethrow_exception(error);

    ScanMaps maps;
    maps.dwell = grid.dwell;
    maps.half_width = gates.time.half_width;
    maps.time_center = gates.time.center ? *gates.time.center
                                         : locate_peak(pixels, gates.time.half_width);
    for (auto* m : {&maps.eels, &maps.photons, &maps.coincidences, &maps.accidentals,
                    &maps.live_time})
        *m = io::Map2D(grid.nx(), grid.ny());

    auto const center = analysis::to_fine(maps.time_center);
    auto const hw = analysis::to_fine(gates.time.half_width);
    auto const inner = analysis::to_fine(gates.sidebands.inner);
    double const side_scale = gates.time.half_width
                              / (gates.sidebands.outer - gates.sidebands.inner);
    for (std::size_t i = 0; i < n; ++i)
    {
        auto const& p = pixels[i];
        double coinc = 0.0;
        double side = 0.0;
        for (auto d : p.delays)
        {
            if (std::abs(d - center) <= hw)
                coinc += 1.0;
            if (std::abs(d) >= inner)
                side += 1.0;
        }
        maps.eels.values[i] = p.eels;
        maps.photons.values[i] = p.photons;
        maps.live_time.values[i] = p.live;
        maps.coincidences.values[i] = coinc;
        maps.accidentals.values[i] = side * side_scale;
    }
    return maps;
}

//---------------------------------------------------------------------------//
DistanceProfile distance_profile(io::Map2D const& map, ScanGrid const& grid)
{
    if (map.nx != grid.nx() || map.ny != grid.ny())
        throw ContractError("map does not match the scan grid");
    DistanceProfile p;
    for (std::size_t iy = 0; iy < grid.ny(); ++iy)
    {
        double sum = 0.0;
        for (std::size_t ix = 0; ix < grid.nx(); ++ix)
            sum += map.at(ix, iy);
        p.distance.push_back(grid.distances[iy]);
        p.counts.push_back(sum);
    }
    return p;
}

DecayFit decay_profile(DistanceProfile const& profile, std::span<double const> sigma)
{
    std::size_t const n = profile.distance.size();
    if (profile.counts.size() != n || (!sigma.empty() && sigma.size() != n))
        throw ContractError("profile arrays differ in length");
    if (n < 5)
        throw FitError("decay fit needs at least five points");

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i)
        order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) {
        return profile.distance[a] < profile.distance[b];
    });
    double const d0 = profile.distance[order.front()];

    DecayFunctor f;
    f.d.resize(Eigen::Index(n));
    f.y.resize(Eigen::Index(n));
    f.s.resize(Eigen::Index(n));
    for (std::size_t k = 0; k < n; ++k)
    {
        std::size_t const i = order[k];
        f.d[Eigen::Index(k)] = (profile.distance[i] - d0) * 1e9;
        f.y[Eigen::Index(k)] = profile.counts[i];
        f.s[Eigen::Index(k)] = sigma.empty() ? std::sqrt(std::max(profile.counts[i], 1.0))
                                             : sigma[i];
        if (!(f.s[Eigen::Index(k)] > 0.0))
            throw DomainError("fit uncertainties must be positive");
    }

    // Start from the tail level and a log-linear slope over the points above it.
    std::size_t const tail = std::max<std::size_t>(1, n / 5);
    double b0 = 0.0;
    for (std::size_t k = n - tail; k < n; ++k)
        b0 += f.y[Eigen::Index(k)];
    b0 /= double(tail);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t above = 0;
    for (std::size_t k = 0; k < n; ++k)
    {
        double const excess = f.y[Eigen::Index(k)] - b0;
        if (excess > 2.0 * f.s[Eigen::Index(k)])
        {
            double const x = f.d[Eigen::Index(k)];
            double const v = std::log(excess);
            sx += x;
            sy += v;
            sxx += x * x;
            sxy += x * v;
            ++above;
        }
    }
    if (above < 5)
        throw FitError("fewer than five points above the noise floor");
    double const slope = (double(above) * sxy - sx * sy) / (double(above) * sxx - sx * sx);
    double const icpt = (sy - slope * sx) / double(above);
    Eigen::VectorXd p(3);
    p << std::exp(icpt), std::max(-slope, 1e-6), b0;

    Eigen::LevenbergMarquardt<DecayFunctor> lm(f);
    lm.parameters.ftol = 1e-14;
    lm.parameters.xtol = 1e-14;
    lm.parameters.maxfev = 5000;
    auto const status = lm.minimize(p);

    DecayFit fit;
    Eigen::VectorXd r(f.values());
    f(p, r);
    fit.residuals.assign(r.data(), r.data() + r.size());
    for (auto& v : fit.residuals)
        v = -v;
    using namespace Eigen::LevenbergMarquardtSpace;
    if (status == ImproperInputParameters || status == TooManyFunctionEvaluation
        || !std::isfinite(p[1]) || !(p[1] > 0.0) || !std::isfinite(p[0]))
    {
        throw FitError("decay fit did not converge to a positive decay length",
                       fit.residuals);
    }

    Eigen::MatrixXd J(f.values(), 3);
    f.df(p, J);
    Eigen::Matrix3d const cov = (J.transpose() * J).inverse();
    fit.chi2 = r.squaredNorm();
    fit.ndf = n - 3;
    double const scale = fit.ndf > 0 ? std::max(1.0, fit.chi2 / double(fit.ndf)) : 1.0;

    fit.amplitude = p[0];
    fit.decay_length = 1e-9 / p[1];
    fit.offset = p[2];
    fit.amplitude_sigma = std::sqrt(cov(0, 0) * scale);
    fit.decay_length_sigma = 1e-9 * std::sqrt(cov(1, 1) * scale) / (p[1] * p[1]);
    fit.offset_sigma = std::sqrt(cov(2, 2) * scale);
    return fit;
}

DynamicRange dynamic_range(std::span<double const> counts, double floor)
{
    if (counts.empty())
        return {1.0, true};
    double const top = *std::max_element(counts.begin(), counts.end());
    double const denom = std::max(floor, 1.0);
    if (!(top > denom))
        return {1.0, true};
    return {top / denom, false};
}

std::string export_maps_csv(ScanMaps const& maps)
{
    std::string out = "x_idx,y_idx,channel,counts\n";
    auto emit = [&](io::Map2D const& m, char const* name) {
        for (std::size_t iy = 0; iy < m.ny; ++iy)
            for (std::size_t ix = 0; ix < m.nx; ++ix)
                out += std::to_string(ix) + ',' + std::to_string(iy) + ',' + name + ','
                       + io::format_number(m.at(ix, iy)) + '\n';
    };
    emit(maps.eels, "eels");
    emit(maps.photons, "photon");
    emit(maps.coincidences, "coincidence");
    emit(maps.accidentals, "accidental");
    emit(maps.live_time, "live_time");
    return out;
}

nlohmann::json imaging_summary(ScanMaps const& maps, ScanGrid const& grid)
{
    nlohmann::json j;
    j["dwell_s"] = maps.dwell;
    j["time_center_s"] = maps.time_center;
    j["half_width_s"] = maps.half_width;

    auto channel = [&](io::Map2D const& m) {
        auto const prof = distance_profile(m, grid);
        nlohmann::json c;
        c["distance_m"] = prof.distance;
        c["counts"] = prof.counts;
        double floor = 0.0;
        try
        {
            auto const fit = decay_profile(prof);
            c["fit"] = {{"decay_length_m", fit.decay_length},
                        {"decay_length_sigma_m", fit.decay_length_sigma},
                        {"amplitude", fit.amplitude},
                        {"amplitude_sigma", fit.amplitude_sigma},
                        {"offset", fit.offset},
                        {"offset_sigma", fit.offset_sigma},
                        {"chi2", fit.chi2},
                        {"ndf", fit.ndf}};
            floor = std::max(fit.offset, 0.0);
        }
        catch (FitError const& e)
        {
            c["fit"] = {{"error", e.what()}, {"residuals", e.residuals()}};
            std::size_t const tail = std::max<std::size_t>(1, prof.counts.size() / 5);
            for (std::size_t k = prof.counts.size() - tail; k < prof.counts.size(); ++k)
                floor += prof.counts[k] / double(tail);
        }
        auto const dr = dynamic_range(prof.counts, floor);
        c["floor"] = floor;
        c["dynamic_range"] = dr.value;
        c["flat"] = dr.flat;
        return c;
    };
    j["eels"] = channel(maps.eels);
    j["photon"] = channel(maps.corrected_photons());
    j["coincidence"] = channel(maps.coincidences);
    j["accidental_counts"] = distance_profile(maps.accidentals, grid).counts;
    j["dynamic_range_ratio"] = j["coincidence"]["dynamic_range"].get<double>()
                               / j["photon"]["dynamic_range"].get<double>();
    return j;
}
}  // namespace epair::imaging
