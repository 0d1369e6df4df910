#include "epair/mc/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

#include <boost/math/distributions/normal.hpp>

#include "json.hpp"

#include "epair/constants.hpp"
#include "epair/error.hpp"
#include "epair/physics/optical_mode.hpp"

namespace epair::mc
{
namespace c = constants;

namespace
{
constexpr double hit_ticks_per_s = 640e6;
constexpr double tdc_ticks_per_s = 3.84e9;
constexpr std::uint64_t slab_stream_base = 1000;

enum SeedStream : std::uint64_t
{
    offsets_stream = 1,
    jitter_stream = 2,
    pulsed_stream = 3,
};

std::uint64_t to_hit_ticks(double t)
{
    return static_cast<std::uint64_t>(std::floor(std::max(0.0, t) * hit_ticks_per_s));
}

std::uint64_t to_tdc_ticks(double t)
{
    return static_cast<std::uint64_t>(std::floor(std::max(0.0, t) * tdc_ticks_per_s));
}

template<class Int = std::uint64_t>
Int poisson(double mean, Rng& rng)
{
    return mean > 0.0 ? std::poisson_distribution<Int>(mean)(rng) : Int{0};
}

//! Avalanche candidate before dead time; photon < 0 marks a dark count.
struct Candidate
{
    double time;
    std::int64_t photon;
};

struct SlabOutput
{
    std::vector<io::Packet> hits;
    std::vector<Candidate> avalanches;
    std::vector<ElectronRecord> electrons;
    std::vector<PhotonRecord> photons;
    RunStats stats;
};

//---------------------------------------------------------------------------//
// Shared read-only state for all slabs.
class Generator
{
  public:
    Generator(SimConfig const& cfg, EmissionModel const& model)
        : cfg_(cfg), model_(model), det_(cfg.electron)
    {
        sigma_ = cfg.beam.zlp_fwhm_ev / c::fwhm_per_sigma;
        scatter_ = -std::expm1(-model.total);

        // Cumulative mode table for assigning photons of a scattered electron.
        cumulative_.resize(model.probability.size());
        double acc = 0.0;
        for (std::size_t i = 0; i < cumulative_.size(); ++i)
        {
            acc += model.probability[i];
            cumulative_[i] = acc;
        }
        // Zero-truncated Poisson(P) cumulative table.
        if (model.total > 0.0)
        {
            double p = std::exp(-model.total) * model.total / scatter_;
            double cum = 0.0;
            for (int n = 1; n <= 16; ++n)
            {
                cum += p;
                ztp_.push_back(cum);
                p *= model.total / (n + 1);
            }
            ztp_.back() = 1.0;
        }

        zlp_pass_lo_ = 1.0;
        zlp_pass_hi_ = 0.0;
        if (det_.slit && sigma_ > 0.0)
        {
            boost::math::normal_distribution<double> n(0.0, sigma_);
            zlp_pass_lo_ = det_.slit->lo_ev > -1e300 ? cdf(n, det_.slit->lo_ev) : 0.0;
            zlp_pass_hi_ = cdf(complement(n, det_.slit->hi_ev));
        }
        else if (det_.slit)
        {
            bool const blocked = det_.slit->blocks(0.0);
            zlp_pass_lo_ = blocked ? 0.0 : 1.0;
        }
        double const zlp_pass = zlp_pass_lo_ + zlp_pass_hi_;
        unscattered_detect_ = std::exp(-model.total) * zlp_pass * det_.efficiency;
        active_ = scatter_ + unscattered_detect_;

        // Expected hit rate for the saturation guard.
        double scatter_pass = 0.0;
        for (std::size_t i = 0; i < model.probability.size() && model.total > 0; ++i)
        {
            scatter_pass += model.probability[i] / model.total
                            * pass_probability(model.photon_energy_ev[i]);
        }
        double const electron_rate
            = cfg.beam.electron_rate
              * (scatter_ * scatter_pass * det_.efficiency + unscattered_detect_);
        expected_hit_rate_ = electron_rate * std::max(1.0, det_.mean_hits);
        keep_ = expected_hit_rate_ > det_.saturation_hits_per_s
                    ? det_.saturation_hits_per_s / expected_hit_rate_
                    : 1.0;
        offsets_ = pixel_offsets(cfg);
    }

    double expected_hit_rate() const { return expected_hit_rate_; }
    bool saturated() const { return keep_ < 1.0; }
    std::vector<double> const& offsets() const { return offsets_; }

    SlabOutput run_slab(std::uint64_t slab) const;

    // Append a hit cluster; returns the number of hits kept.
    std::uint32_t emit_cluster(double t,
                               double loss_ev,
                               Rng& rng,
                               std::vector<io::Packet>& out,
                               std::uint64_t& dropped) const;
    std::uint32_t emit_cluster_at(double t,
                                  long ix,
                                  long iy,
                                  Rng& rng,
                                  std::vector<io::Packet>& out,
                                  std::uint64_t& dropped) const;

  private:
    double pass_probability(double mean_loss) const
    {
        if (!det_.slit)
            return 1.0;
        if (sigma_ <= 0.0)
            return det_.slit->blocks(mean_loss) ? 0.0 : 1.0;
        boost::math::normal_distribution<double> n(mean_loss, sigma_);
        double const lo = det_.slit->lo_ev > -1e300 ? cdf(n, det_.slit->lo_ev) : 0.0;
        return lo + cdf(complement(n, det_.slit->hi_ev));
    }

    // ZLP loss of an unscattered electron conditioned on passing the slit.
    double sample_passing_zlp(Rng& rng) const
    {
        std::uniform_real_distribution<double> u01(0.0, 1.0);
        if (!det_.slit || sigma_ <= 0.0)
        {
            return sigma_ > 0.0 ? std::normal_distribution<double>(0.0, sigma_)(rng)
                                : 0.0;
        }
        boost::math::normal_distribution<double> n(0.0, sigma_);
        double const total = zlp_pass_lo_ + zlp_pass_hi_;
        double const u = u01(rng) * total;
        double v = u01(rng);
        v = std::clamp(v, 1e-300, 1.0 - 1e-16);
        if (u < zlp_pass_lo_)
            return quantile(n, v * zlp_pass_lo_);
        return quantile(complement(n, v * zlp_pass_hi_));
    }

    SimConfig const& cfg_;
    EmissionModel const& model_;
    ElectronDetectorSpec const& det_;
    double sigma_ = 0.0;
    double scatter_ = 0.0;
    double unscattered_detect_ = 0.0;
    double active_ = 0.0;
    double zlp_pass_lo_ = 0.0;
    double zlp_pass_hi_ = 0.0;
    double expected_hit_rate_ = 0.0;
    double keep_ = 1.0;
    std::vector<double> cumulative_;
    std::vector<double> ztp_;
    std::vector<double> offsets_;
};

std::uint32_t Generator::emit_cluster(double t,
                                      double loss_ev,
                                      Rng& rng,
                                      std::vector<io::Packet>& out,
                                      std::uint64_t& dropped) const
{
    int const r = det_.cluster_radius_px;
    long const ix = std::lround(det_.zlp_pixel + loss_ev / det_.dispersion_ev_per_px);
    std::uniform_int_distribution<long> row(r, det_.height - 1 - r);
    long const iy = row(rng);
    if (ix < 0 || ix >= det_.width)
        return 0;
    return emit_cluster_at(t, ix, iy, rng, out, dropped);
}

std::uint32_t Generator::emit_cluster_at(double t,
                                         long ix,
                                         long iy,
                                         Rng& rng,
                                         std::vector<io::Packet>& out,
                                         std::uint64_t& dropped) const
{
    int const r = det_.cluster_radius_px;
    std::uniform_int_distribution<int> spread(-r, r);
    std::uniform_real_distribution<double> skew(0.0, det_.skew_max);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    int const n = 1 + poisson<int>(det_.mean_hits - 1.0, rng);
    std::uint32_t kept = 0;
    for (int k = 0; k < n; ++k)
    {
        long const px = ix + spread(rng);
        long const py = iy + spread(rng);
        double const s = skew(rng);
        if (keep_ < 1.0 && u01(rng) >= keep_)
        {
            ++dropped;
            continue;
        }
        if (px < 0 || px >= det_.width || py < 0 || py >= det_.height)
            continue;
        double const time
            = t + det_.delay + offsets_[std::size_t(py) * det_.width + px] + s;
        out.push_back(io::Packet::hit(static_cast<std::uint16_t>(px),
                                      static_cast<std::uint16_t>(py),
                                      to_hit_ticks(time)));
        ++kept;
    }
    return kept;
}

SlabOutput Generator::run_slab(std::uint64_t slab) const
{
    SlabOutput out;
    Rng rng(derive_seed(cfg_.seed, slab_stream_base + slab));
    double const t0 = double(slab) * cfg_.slab_duration;
    double const t1 = std::min(cfg_.duration, t0 + cfg_.slab_duration);
    double const dt = t1 - t0;
    double const rate = cfg_.beam.electron_rate;
    bool const truth = cfg_.record_ground_truth;

    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::uniform_real_distribution<double> when(t0, t1);
    std::normal_distribution<double> zlp(0.0, 1.0);

    auto const silent = poisson(rate * (1.0 - active_) * dt, rng);
    auto const active = poisson(rate * active_ * dt, rng);
    std::vector<double> times(active);
    for (auto& t : times)
        t = when(rng);
    std::sort(times.begin(), times.end());

    out.stats.electrons = silent + active;
    out.stats.simulated_electrons = active;
    out.hits.reserve(std::size_t(double(active) * det_.mean_hits * 1.05) + 16);

    double const scatter_share = scatter_ / active_;
    for (double t : times)
    {
        ElectronRecord rec;
        rec.time = t;
        rec.first_photon = static_cast<std::uint32_t>(out.photons.size());
        bool detected = false;
        if (u01(rng) < scatter_share)
        {
            ++out.stats.scattered_electrons;
            double const u = u01(rng);
            int const n = 1 + int(std::upper_bound(ztp_.begin(), ztp_.end() - 1, u)
                                  - ztp_.begin());
            double loss = 0.0;
            for (int k = 0; k < n; ++k)
            {
                double const v = u01(rng) * cumulative_.back();
                auto const mode = static_cast<std::size_t>(
                    std::upper_bound(cumulative_.begin(), cumulative_.end() - 1, v)
                    - cumulative_.begin());
                loss += model_.photon_energy_ev[mode];
                bool const fired = u01(rng) < model_.detection[mode];
                double emitted = t;
                if (fired)
                {
                    emitted += std::exponential_distribution<double>(
                        1.0 / model_.lifetime[mode])(rng);
                    out.avalanches.push_back(
                        {emitted + cfg_.spad.delay,
                         static_cast<std::int64_t>(out.photons.size())});
                    ++out.stats.photons_detected;
                }
                ++out.stats.photons_emitted;
                out.photons.push_back({static_cast<std::uint32_t>(out.electrons.size()),
                                       static_cast<std::uint16_t>(mode),
                                       emitted,
                                       fired,
                                       false});
            }
            rec.energy_loss_ev = loss;
            rec.measured_loss_ev = loss + sigma_ * zlp(rng);
            bool const passes = !det_.slit || !det_.slit->blocks(rec.measured_loss_ev);
            detected = passes && u01(rng) < det_.efficiency;
        }
        else
        {
            rec.measured_loss_ev = sample_passing_zlp(rng);
            detected = true;
        }
        if (detected)
        {
            rec.hits = emit_cluster(
                t, rec.measured_loss_ev, rng, out.hits, out.stats.hits_dropped);
            rec.electron_detected = rec.hits > 0;
        }
        rec.photon_count = static_cast<std::uint32_t>(out.photons.size())
                           - rec.first_photon;
        out.stats.electrons_detected += rec.electron_detected;
        out.stats.hits += rec.hits;
        out.electrons.push_back(rec);
    }

    auto const darks = poisson(cfg_.spad.dark_rate * dt, rng);
    for (std::uint64_t k = 0; k < darks; ++k)
        out.avalanches.push_back({when(rng), -1});
    out.stats.dark_counts = darks;

    if (!truth)
    {
        // Keep only what the merge needs.
        out.electrons = {};
        out.photons = {};
        for (auto& a : out.avalanches)
            a.photon = -1;
    }
    return out;
}

std::string metadata_text(SimConfig const& cfg, RunStats const& stats)
{
    nlohmann::json j;
    j["generator"] = "epair simulate";
    j["seed"] = cfg.seed;
    j["duration_s"] = cfg.duration;
    j["electron_rate"] = cfg.beam.electron_rate;
    j["scattering_probability"] = stats.scattering_probability;
    j["saturated"] = stats.saturated;
    j["expected_hit_rate"] = stats.expected_hit_rate;
    j["hits_dropped"] = stats.hits_dropped;
    return j.dump();
}
}  // namespace

//---------------------------------------------------------------------------//
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream)
{
    // SplitMix64 finalizer over a Weyl sequence position.
    std::uint64_t z = seed + (stream + 1) * 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

double BeamSpec::rate_from_current(double amperes)
{
    return amperes / c::elementary_charge;
}

void BeamSpec::validate() const
{
    if (!(electron_rate >= 0.0) || !std::isfinite(electron_rate))
        throw ConfigError("beam electron rate must be non-negative");
    if (!(kinetic_energy_ev > 0.0))
        throw ConfigError("beam kinetic energy must be positive");
    if (!(zlp_fwhm_ev >= 0.0))
        throw ConfigError("ZLP FWHM must be non-negative");
}

void SpadSpec::validate() const
{
    if (!(efficiency >= 0.0 && efficiency <= 1.0))
        throw ConfigError("SPAD efficiency must be in [0,1]");
    if (!(dead_time > 0.0))
        throw ConfigError("SPAD dead time must be positive");
    if (!(dark_rate >= 0.0))
        throw ConfigError("dark count rate must be non-negative");
    if (!(jitter_fwhm >= 0.0))
        throw ConfigError("SPAD jitter must be non-negative");
    if (channel > 1)
        throw ConfigError("SPAD TDC channel must be 0 or 1");
}

void ElectronDetectorSpec::validate() const
{
    if (width == 0 || height == 0 || width > io::pixel_grid_size
        || height > io::pixel_grid_size)
        throw ConfigError("electron detector size must be within 1..512");
    if (!(dispersion_ev_per_px > 0.0))
        throw ConfigError("energy dispersion must be positive");
    if (!(mean_hits >= 1.0))
        throw ConfigError("mean hits per cluster must be at least 1");
    if (cluster_radius_px < 0 || 2 * cluster_radius_px + 1 > height)
        throw ConfigError("cluster radius does not fit the detector");
    if (!(skew_max >= 0.0) || !(offset_spread >= 0.0))
        throw ConfigError("timing spreads must be non-negative");
    if (!offset_map.empty())
    {
        if (offset_map.size() != std::size_t(width) * height)
            throw ConfigError("pixel offset map size does not match the detector");
        for (double v : offset_map)
            if (!std::isfinite(v))
                throw ConfigError("pixel offset map contains non-finite values");
    }
    if (!(saturation_hits_per_s > 0.0))
        throw ConfigError("saturation ceiling must be positive");
    if (!(efficiency >= 0.0 && efficiency <= 1.0))
        throw ConfigError("electron detection efficiency must be in [0,1]");
    if (slit && !(slit->hi_ev >= slit->lo_ev))
        throw ConfigError("slit window is inverted");
}

physics::Trajectory SimConfig::trajectory() const
{
    physics::Trajectory t;
    t.kinetic_energy_ev = beam.kinetic_energy_ev;
    t.impact_parameter = beam.impact_parameter;
    t.lateral_offset = beam.lateral_offset;
    t.geometry = geometry;
    return t;
}

void SimConfig::validate() const
{
    beam.validate();
    spad.validate();
    electron.validate();
    photon_chain.validate();
    if (comb.empty())
        throw ConfigError("mode comb is empty");
    if (!(duration > 0.0))
        throw ConfigError("duration must be positive");
    if (!(slab_duration > 0.0))
        throw ConfigError("slab duration must be positive");
    if (threads == 0)
        throw ConfigError("thread count must be at least 1");
}

EmissionModel EmissionModel::build(SimConfig const& cfg)
{
    return build(cfg,
                 physics::total_scattering_probability(
                     cfg.comb, cfg.trajectory(), cfg.calibration));
}

EmissionModel
EmissionModel::build(SimConfig const& cfg, physics::CouplingResult const& coupling)
{
    if (coupling.per_mode.size() != cfg.comb.size())
        throw ContractError("coupling result does not match the comb");
    EmissionModel m;
    m.clipped = coupling.clipped;
    std::size_t const n = cfg.comb.size();
    m.probability.resize(n);
    m.photon_energy_ev.resize(n);
    m.detection.resize(n);
    m.lifetime.resize(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        auto const& mode = cfg.comb[i];
        double const wl = mode.wavelength();
        m.probability[i] = std::norm(coupling.per_mode[i]);
        m.photon_energy_ev[i] = mode.photon_energy_ev();
        double const kappa = mode.total_loss_rate();
        double const eta = kappa > 0.0 ? physics::bus_coupling_efficiency(
                                             mode.intrinsic_loss_rate,
                                             mode.external_coupling_rate)
                                       : 1.0;
        if (!cfg.sensitivity.covers(wl))
            m.uncovered = true;
        m.detection[i] = eta * cfg.sensitivity(wl) * cfg.photon_chain.transmission(wl)
                         * cfg.spad.efficiency;
        m.lifetime[i] = kappa > 0.0 ? 1.0 / kappa : 0.0;
        m.total += m.probability[i];
    }
    return m;
}

std::vector<double> pixel_offsets(SimConfig const& cfg)
{
    auto const& det = cfg.electron;
    if (!det.offset_map.empty())
        return det.offset_map;
    std::vector<double> map(std::size_t(det.width) * det.height, 0.0);
    if (det.offset_spread > 0.0)
    {
        Rng rng(derive_seed(det.offset_seed, offsets_stream));
        std::uniform_real_distribution<double> u(-0.5 * det.offset_spread,
                                                 0.5 * det.offset_spread);
        for (auto& v : map)
            v = u(rng);
    }
    return map;
}

SimResult simulate_run(SimConfig const& cfg)
{
    cfg.validate();
    return simulate_run(cfg, EmissionModel::build(cfg));
}

SimResult simulate_run(SimConfig const& cfg, EmissionModel const& model)
{
    cfg.validate();
    if (model.probability.size() != cfg.comb.size())
        throw ContractError("emission model does not match the comb");
    if (!(model.total < 0.5))
    {
        throw ModelValidityError("per-electron emission probability "
                                 + std::to_string(model.total)
                                 + " is outside the weak-coupling regime");
    }
    for (double l : model.lifetime)
        if (!(l > 0.0))
            throw ConfigError("mode lifetime must be positive");

    Generator const gen(cfg, model);
    auto const slabs = static_cast<std::uint64_t>(
        std::ceil(cfg.duration / cfg.slab_duration - 1e-9));
    std::vector<SlabOutput> parts(slabs);
    std::atomic<std::uint64_t> next{0};
    auto worker = [&] {
        for (std::uint64_t s = next++; s < slabs; s = next++)
            parts[s] = gen.run_slab(s);
    };
    unsigned const nthreads
        = std::max(1u, std::min<unsigned>(cfg.threads, unsigned(slabs)));
    if (nthreads == 1)
    {
        worker();
    }
    else
    {
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < nthreads; ++i)
            pool.emplace_back(worker);
        for (auto& th : pool)
            th.join();
    }

    SimResult result;
    RunStats& st = result.stats;
    std::size_t total_hits = 0;
    std::size_t total_aval = 0;
    for (auto const& p : parts)
    {
        total_hits += p.hits.size();
        total_aval += p.avalanches.size();
    }
    std::vector<Candidate> avalanches;
    avalanches.reserve(total_aval);
    auto& packets = result.stream.packets;
    packets.reserve(total_hits + total_aval);
    for (auto& p : parts)
    {
        auto const photon_base = static_cast<std::int64_t>(result.truth.photons.size());
        auto const electron_base
            = static_cast<std::uint32_t>(result.truth.electrons.size());
        for (auto a : p.avalanches)
        {
            if (a.photon >= 0)
                a.photon += photon_base;
            avalanches.push_back(a);
        }
        for (auto e : p.electrons)
        {
            e.first_photon += static_cast<std::uint32_t>(photon_base);
            result.truth.electrons.push_back(e);
        }
        for (auto ph : p.photons)
        {
            ph.electron += electron_base;
            result.truth.photons.push_back(ph);
        }
        packets.insert(packets.end(), p.hits.begin(), p.hits.end());
        st.electrons += p.stats.electrons;
        st.simulated_electrons += p.stats.simulated_electrons;
        st.scattered_electrons += p.stats.scattered_electrons;
        st.photons_emitted += p.stats.photons_emitted;
        st.photons_detected += p.stats.photons_detected;
        st.dark_counts += p.stats.dark_counts;
        st.electrons_detected += p.stats.electrons_detected;
        st.hits += p.stats.hits;
        st.hits_dropped += p.stats.hits_dropped;
        p = SlabOutput{};
    }

    std::stable_sort(avalanches.begin(), avalanches.end(), [](auto const& a, auto const& b) {
        return a.time < b.time;
    });
    Rng jitter_rng(derive_seed(cfg.seed, jitter_stream));
    std::normal_distribution<double> jitter(0.0, cfg.spad.jitter_fwhm / c::fwhm_per_sigma);
    double last = -INFINITY;
    for (auto const& a : avalanches)
    {
        if (a.time - last < cfg.spad.dead_time)
            continue;
        last = a.time;
        ++st.avalanches;
        if (a.photon >= 0)
        {
            auto& ph = result.truth.photons[std::size_t(a.photon)];
            ph.registered = true;
            result.truth.electrons[ph.electron].photon_detected = true;
        }
        double t = a.time;
        if (cfg.spad.jitter_fwhm > 0.0)
            t += jitter(jitter_rng);
        packets.push_back(io::Packet::tdc(to_tdc_ticks(t), cfg.spad.channel));
    }
    std::sort(packets.begin(), packets.end(), io::time_order);

    st.expected_hit_rate = gen.expected_hit_rate();
    st.saturated = gen.saturated();
    st.scattering_probability = model.total;
    result.stream.metadata = metadata_text(cfg, st);
    return result;
}

io::EventStream simulate_pulsed(SimConfig const& cfg, PulsedSpec const& pulsed)
{
    cfg.validate();
    auto const& det = cfg.electron;
    if (!(pulsed.period > 0.0) || pulsed.roi_width == 0 || pulsed.roi_height == 0
        || pulsed.roi_x + pulsed.roi_width > det.width
        || pulsed.roi_y + pulsed.roi_height > det.height || pulsed.marker_channel > 1)
    {
        throw ConfigError("invalid pulsed acquisition settings");
    }
    EmissionModel empty;
    empty.probability.assign(cfg.comb.size(), 0.0);
    empty.photon_energy_ev.assign(cfg.comb.size(), 0.0);
    empty.detection.assign(cfg.comb.size(), 0.0);
    empty.lifetime.assign(cfg.comb.size(), 1.0);
    SimConfig quiet = cfg;
    quiet.electron.slit.reset();
    quiet.electron.efficiency = 1.0;
    quiet.beam.electron_rate = pulsed.electrons_per_pulse / pulsed.period;
    Generator const gen(quiet, empty);

    Rng rng(derive_seed(cfg.seed, pulsed_stream));
    std::uniform_int_distribution<long> col(pulsed.roi_x, pulsed.roi_x + pulsed.roi_width - 1);
    std::uniform_int_distribution<long> row(pulsed.roi_y,
                                            pulsed.roi_y + pulsed.roi_height - 1);
    io::EventStream s;
    std::uint64_t dropped = 0;
    for (std::uint64_t k = 0; k < pulsed.pulses; ++k)
    {
        // Pulse on an exact TDC tick so the marker carries no rounding.
        std::uint64_t const tick = std::llround(double(k + 1) * pulsed.period
                                                * tdc_ticks_per_s);
        double const tp = double(tick) / tdc_ticks_per_s;
        s.packets.push_back(io::Packet::tdc(tick, pulsed.marker_channel));
        int const n = poisson<int>(pulsed.electrons_per_pulse, rng);
        for (int e = 0; e < n; ++e)
        {
            long const ix = col(rng);
            long const iy = row(rng);
            gen.emit_cluster_at(tp, ix, iy, rng, s.packets, dropped);
        }
    }
    std::sort(s.packets.begin(), s.packets.end(), io::time_order);
    nlohmann::json j;
    j["generator"] = "epair pulsed reference";
    j["seed"] = cfg.seed;
    j["period_s"] = pulsed.period;
    j["pulses"] = pulsed.pulses;
    s.metadata = j.dump();
    return s;
}

std::vector<unsigned> sample_scattering(std::span<double const> probabilities, Rng& rng)
{
    std::vector<unsigned> counts(probabilities.size(), 0);
    for (std::size_t i = 0; i < probabilities.size(); ++i)
    {
        double const p = probabilities[i];
        if (!(p >= 0.0))
            throw DomainError("emission probability must be non-negative");
        counts[i] = poisson<unsigned>(p, rng);
    }
    return counts;
}

std::vector<double> apply_dead_time(std::span<double const> times, double dead_time)
{
    if (!(dead_time >= 0.0))
        throw DomainError("dead time must be non-negative");
    std::vector<double> kept;
    double last = -INFINITY;
    for (std::size_t i = 0; i < times.size(); ++i)
    {
        if (i > 0 && times[i] < times[i - 1])
            throw ContractError("event times are not sorted");
        if (i == 0 || times[i] - last >= dead_time)
        {
            kept.push_back(times[i]);
            last = times[i];
        }
    }
    return kept;
}

std::string ground_truth_csv(GroundTruth const& truth)
{
    std::ostringstream out;
    out.imbue(std::locale::classic());
    out.precision(17);
    out << "electron,time_s,energy_loss_ev,measured_loss_ev,photons,hits,"
           "electron_detected,photon_detected,modes\n";
    for (std::size_t i = 0; i < truth.electrons.size(); ++i)
    {
        auto const& e = truth.electrons[i];
        out << i << ',' << e.time << ',' << e.energy_loss_ev << ','
            << e.measured_loss_ev << ',' << e.photon_count << ',' << e.hits << ','
            << int(e.electron_detected) << ',' << int(e.photon_detected) << ',';
        for (std::uint32_t k = 0; k < e.photon_count; ++k)
        {
            if (k)
                out << ' ';
            out << truth.photons[e.first_photon + k].mode;
        }
        out << '\n';
    }
    return out.str();
}
}  // namespace epair::mc
