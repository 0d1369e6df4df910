#include "epair/config/settings.hpp"

#include <cmath>
#include <limits>

#include "epair/error.hpp"
#include "epair/io/csv.hpp"

namespace epair::config
{
namespace
{
std::string where(Config const& c, std::string const& key)
{
    return c.origin(key).str() + ": key '" + key + "'";
}

std::pair<double, double> pair_of(Config const& c, std::string const& key, std::pair<double, double> fallback)
{
    if (!c.has(key))
        return fallback;
    auto const v = c.numbers(key);
    if (v.size() != 2)
        throw ConfigError(where(c, key) + " expects two numbers");
    return {v[0], v[1]};
}

template<class T>
T narrow(Config const& c, std::string const& key, T fallback)
{
    auto const v = c.integer(key, fallback);
    if (v > std::uint64_t(std::numeric_limits<T>::max()))
        throw ConfigError(where(c, key) + " is out of range");
    return T(v);
}

// Explicit list under <base>s, or [first, last, count] under <base>_range.
std::vector<double> axis(Config const& c, std::string const& list, std::string const& range,
                         std::vector<double> fallback)
{
    if (c.has(list) && c.has(range))
        throw ConfigError(where(c, range) + " conflicts with '" + list + "'");
    if (c.has(list))
        return c.numbers(list);
    if (!c.has(range))
        return fallback;
    auto const v = c.numbers(range);
    if (v.size() != 3 || !(v[2] >= 1.0) || v[2] != std::floor(v[2]))
        throw ConfigError(where(c, range) + " expects [first, last, count]");
    auto const n = std::size_t(v[2]);
    std::vector<double> out;
    for (std::size_t i = 0; i < n; ++i)
        out.push_back(n == 1 ? v[0] : v[0] + (v[1] - v[0]) * double(i) / double(n - 1));
    return out;
}

template<class F>
void checked(Config const& c, std::string const& key, F&& validate)
{
    try
    {
        validate();
    }
    catch (ConfigError const& e)
    {
        if (c.has(key))
            throw ConfigError(where(c, key) + ": " + e.what());
        throw;
    }
}

physics::CombSpec comb_spec(Config const& c)
{
    physics::CombSpec s;
    s.anchor_wavelength = c.number("comb.anchor_wavelength", s.anchor_wavelength);
    s.free_spectral_range_hz = c.number("comb.free_spectral_range_hz", s.free_spectral_range_hz);
    s.min_wavelength = c.number("comb.min_wavelength", s.min_wavelength);
    s.max_wavelength = c.number("comb.max_wavelength", s.max_wavelength);
    s.dispersion.reference_wavelength
        = c.number("comb.dispersion_reference_wavelength", s.dispersion.reference_wavelength);
    s.dispersion.reference_index = c.number("comb.reference_index", s.dispersion.reference_index);
    s.dispersion.slope = c.number("comb.dispersion_slope", s.dispersion.slope);
    s.decay_length = c.number("comb.decay_length", s.decay_length);
    s.field_scale = c.number("comb.field_scale", s.field_scale);
    s.quality_factor = c.number("comb.quality_factor", s.quality_factor);
    s.coupling_efficiency = c.number("comb.coupling_efficiency", s.coupling_efficiency);
    s.coupling_efficiency_slope
        = c.number("comb.coupling_efficiency_slope", s.coupling_efficiency_slope);
    return s;
}

physics::PassGeometry geometry(Config const& c)
{
    auto const type = c.text("geometry.type", "ring");
    if (type == "ring")
    {
        physics::RingPass r;
        r.radius = c.number("geometry.radius", r.radius);
        r.waveguide_width = c.number("geometry.waveguide_width", r.waveguide_width);
        return r;
    }
    if (type == "straight")
    {
        physics::StraightPass s;
        s.length = c.number("geometry.length", s.length);
        return s;
    }
    throw ConfigError(where(c, "geometry.type") + " must be 'ring' or 'straight'");
}

physics::LossChain loss_chain(Config const& c, physics::SpectralFilter& f)
{
    physics::LossChain chain;
    if (c.has("chain.stages") || c.has("chain.transmissions"))
    {
        auto const names = c.texts("chain.stages");
        auto const values = c.numbers("chain.transmissions");
        if (names.size() != values.size())
            throw ConfigError(where(c, "chain.transmissions")
                              + " must list one value per entry of 'chain.stages'");
        for (std::size_t i = 0; i < names.size(); ++i)
            chain.stages.push_back({names[i], values[i]});
    }
    bool const any_filter = c.has("filter.center_wavelength") || c.has("filter.fwhm_hz")
                            || c.has("filter.peak_transmission");
    f.center_wavelength = c.number("filter.center_wavelength", f.center_wavelength);
    f.fwhm_hz = c.number("filter.fwhm_hz", f.fwhm_hz);
    f.peak_transmission = c.number("filter.peak_transmission", f.peak_transmission);
    if (c.flag("filter.enabled", any_filter))
    {
        chain.filter = f;
    }
    if (!(f.fwhm_hz > 0.0) || !(f.peak_transmission >= 0.0 && f.peak_transmission <= 1.0))
        throw ConfigError(c.name() + ": filter needs fwhm_hz > 0 and peak_transmission in [0,1]");
    checked(c, "chain.transmissions", [&] { chain.validate(); });
    return chain;
}

physics::SensitivityCurve sensitivity(Config const& c)
{
    int const given = int(c.has("sensitivity.csv")) + int(c.has("sensitivity.flat"))
                      + int(c.has("sensitivity.wavelengths_nm"));
    if (given > 1)
        throw ConfigError(c.name() + ": give only one of sensitivity.csv, sensitivity.flat, "
                          "sensitivity.wavelengths_nm");
    if (c.has("sensitivity.csv"))
    {
        auto const p = c.path("sensitivity.csv");
        try
        {
            return physics::SensitivityCurve::from_csv(io::read_text(p.string()));
        }
        catch (ConfigError const& e)
        {
            throw ConfigError(p.string() + ": " + e.what());
        }
    }
    if (c.has("sensitivity.flat"))
        return physics::SensitivityCurve::flat(c.number("sensitivity.flat"));
    if (c.has("sensitivity.wavelengths_nm"))
    {
        auto const wl = c.numbers("sensitivity.wavelengths_nm");
        auto const eff = c.numbers("sensitivity.efficiency");
        if (wl.size() != eff.size())
            throw ConfigError(where(c, "sensitivity.efficiency")
                              + " must match 'sensitivity.wavelengths_nm' in length");
        std::vector<std::pair<double, double>> pts;
        for (std::size_t i = 0; i < wl.size(); ++i)
            pts.emplace_back(wl[i] * 1e-9, eff[i]);
        return physics::SensitivityCurve(std::move(pts));
    }
    return physics::SensitivityCurve::flat();
}

mc::SimConfig sim_config(Config const& c, physics::SpectralFilter& filter)
{
    mc::SimConfig s;
    auto& b = s.beam;
    if (c.has("beam.current") && c.has("beam.electron_rate"))
        throw ConfigError(where(c, "beam.current") + " conflicts with 'beam.electron_rate'");
    b.electron_rate = c.has("beam.current")
                          ? mc::BeamSpec::rate_from_current(c.number("beam.current"))
                          : c.number("beam.electron_rate");
    b.impact_parameter = c.number("beam.impact_parameter");
    b.kinetic_energy_ev = c.number("beam.kinetic_energy_ev", b.kinetic_energy_ev);
    b.zlp_fwhm_ev = c.number("beam.zlp_fwhm_ev", b.zlp_fwhm_ev);
    b.lateral_offset = c.number("beam.lateral_offset", b.lateral_offset);

    s.comb = physics::ModeComb::generate(comb_spec(c));
    s.geometry = geometry(c);
    s.calibration.reference_coupling
        = c.number("coupling.reference_coupling", s.calibration.reference_coupling);
    s.calibration.reference_distance
        = c.number("coupling.reference_distance", s.calibration.reference_distance);
    s.calibration.reference_wavelength
        = c.number("coupling.reference_wavelength", s.calibration.reference_wavelength);
    s.photon_chain = loss_chain(c, filter);
    s.sensitivity = sensitivity(c);

    auto& p = s.spad;
    p.efficiency = c.number("spad.efficiency", p.efficiency);
    p.dead_time = c.number("spad.dead_time", p.dead_time);
    p.dark_rate = c.number("spad.dark_rate", p.dark_rate);
    p.jitter_fwhm = c.number("spad.jitter_fwhm", p.jitter_fwhm);
    p.delay = c.number("spad.delay", p.delay);
    p.channel = narrow<std::uint8_t>(c, "spad.channel", p.channel);

    auto& d = s.electron;
    d.width = narrow<std::uint16_t>(c, "detector.width", d.width);
    d.height = narrow<std::uint16_t>(c, "detector.height", d.height);
    d.dispersion_ev_per_px = c.number("detector.dispersion_ev_per_px", d.dispersion_ev_per_px);
    d.zlp_pixel = c.number("detector.zlp_pixel", d.zlp_pixel);
    d.mean_hits = c.number("detector.mean_hits", d.mean_hits);
    d.cluster_radius_px = int(narrow<std::uint16_t>(c, "detector.cluster_radius_px",
                                                    std::uint16_t(d.cluster_radius_px)));
    d.skew_max = c.number("detector.skew_max", d.skew_max);
    d.offset_spread = c.number("detector.offset_spread", d.offset_spread);
    d.offset_seed = c.integer("detector.offset_seed", d.offset_seed);
    d.saturation_hits_per_s = c.number("detector.saturation_hits_per_s", d.saturation_hits_per_s);
    d.efficiency = c.number("detector.efficiency", d.efficiency);
    d.delay = c.number("detector.delay", d.delay);
    if (c.has("detector.slit"))
    {
        auto const [lo, hi] = pair_of(c, "detector.slit", {});
        d.slit = mc::SlitWindow{lo, hi};
    }
    else
    {
        d.slit.reset();
    }

    s.duration = c.number("duration", s.duration);
    s.seed = c.integer("seed", s.seed);
    s.slab_duration = c.number("slab_duration", s.slab_duration);
    s.record_ground_truth = c.flag("ground_truth", s.record_ground_truth);
    s.threads = 1;

    try
    {
        s.validate();
    }
    catch (ConfigError const& e)
    {
        throw ConfigError(c.name() + ": " + e.what());
    }
    return s;
}
}  // namespace

//---------------------------------------------------------------------------//
Settings load_settings(Config const& c)
{
    Settings out;
    out.sim = sim_config(c, out.single_mode_filter);
    auto const& sim = out.sim;

    auto& pu = out.pulsed;
    pu.period = c.number("pulsed.period", pu.period);
    pu.pulses = c.integer("pulsed.pulses", pu.pulses);
    pu.electrons_per_pulse = c.number("pulsed.electrons_per_pulse", pu.electrons_per_pulse);
    pu.marker_channel = narrow<std::uint8_t>(c, "pulsed.marker_channel", pu.marker_channel);
    if (c.has("pulsed.roi"))
    {
        auto const roi = c.numbers("pulsed.roi");
        if (roi.size() != 4)
            throw ConfigError(where(c, "pulsed.roi") + " expects [x, y, width, height]");
        for (double v : roi)
            if (!(v >= 0.0 && v <= 65535.0) || v != std::floor(v))
                throw ConfigError(where(c, "pulsed.roi") + " expects integer pixels");
        pu.roi_x = std::uint16_t(roi[0]);
        pu.roi_y = std::uint16_t(roi[1]);
        pu.roi_width = std::uint16_t(roi[2]);
        pu.roi_height = std::uint16_t(roi[3]);
    }
    if (!(pu.period > 0.0) || !(pu.electrons_per_pulse > 0.0) || pu.pulses == 0)
        throw ConfigError(c.name() + ": pulsed period, pulses and electrons_per_pulse must be positive");

    out.calibration.min_hits
        = narrow<std::uint32_t>(c, "calibrate.min_hits", out.calibration.min_hits);
    out.calibration.marker_channel = pu.marker_channel;

    auto& a = out.analysis;
    a.spectrometer = {sim.electron.zlp_pixel, sim.electron.dispersion_ev_per_px};
    a.cluster.max_distance_px = c.number("analysis.max_distance_px", a.cluster.max_distance_px);
    a.cluster.max_time = c.number("analysis.max_time", a.cluster.max_time);
    a.window = c.number("analysis.window", a.window);
    a.delay = c.number("analysis.delay", a.delay);
    a.duration = c.number("analysis.duration", a.duration);
    a.photon_channel = sim.spad.channel;
    if (c.has("analysis.time_center"))
        a.time_gate.center = c.number("analysis.time_center");
    a.time_gate.half_width = c.number("analysis.half_width", a.time_gate.half_width);
    auto const eg = pair_of(c, "analysis.energy_gate", {a.energy_gate.lo_ev, a.energy_gate.hi_ev});
    a.energy_gate = {eg.first, eg.second};
    auto const sb = pair_of(c, "analysis.sidebands", {a.sidebands.inner, a.sidebands.outer});
    a.sidebands = {sb.first, sb.second};
    if (c.flag("analysis.drift", false))
    {
        analysis::DriftCorrection dc;
        dc.bin_duration = c.number("analysis.drift_bin_duration", dc.bin_duration);
        a.drift = dc;
    }
    a.efficiencies.electron_detector = sim.electron.efficiency;
    a.efficiencies.photon_detector = sim.spad.efficiency;
    a.efficiencies.electron_transmission
        = c.number("analysis.electron_transmission", a.efficiencies.electron_transmission);
    auto const& anchor = sim.comb[sim.comb.nearest(sim.calibration.reference_wavelength)];
    double const bus = physics::bus_coupling_efficiency(anchor.intrinsic_loss_rate,
                                                        anchor.external_coupling_rate);
    a.efficiencies.photon_transmission
        = c.number("analysis.photon_transmission", sim.photon_chain.total() * bus);
    if (!(a.time_gate.half_width > 0.0) || !(a.window > 0.0))
        throw ConfigError(c.name() + ": analysis window and half_width must be positive");
    if (!(a.energy_gate.hi_ev > a.energy_gate.lo_ev))
        throw ConfigError(where(c, "analysis.energy_gate") + " must be increasing");
    if (!(a.sidebands.outer > a.sidebands.inner) || a.sidebands.inner < 0.0)
        throw ConfigError(c.name() + ": analysis.sidebands must satisfy 0 <= inner < outer");

    if (c.has("analysis.offsets"))
    {
        out.offsets_file = c.path("analysis.offsets");
        a.offsets = analysis::import_offsets_csv(io::read_text(out.offsets_file->string()),
                                                 sim.electron.width, sim.electron.height);
    }

    auto& g = out.scan;
    g.distances = axis(c, "scan.distances", "scan.distance_range", {});
    if (g.distances.empty())
        g = imaging::ScanGrid::line(270e-9, 1470e-9, 25, g.dwell);
    g.offsets = axis(c, "scan.offsets", "scan.offset_range", {0.0});
    g.dwell = c.number("scan.dwell", g.dwell);
    checked(c, "scan.dwell", [&] { g.validate(); });

    auto& im = out.imaging;
    im.spectrometer = a.spectrometer;
    im.cluster = a.cluster;
    im.offsets = a.offsets;
    im.sidebands = a.sidebands;
    im.delay = a.delay;
    auto const ee = pair_of(c, "imaging.eels_gate", {im.eels.lo_ev, im.eels.hi_ev});
    im.eels = {ee.first, ee.second};
    auto const ce = pair_of(c, "imaging.coincidence_gate", {im.coincidence.lo_ev, im.coincidence.hi_ev});
    im.coincidence = {ce.first, ce.second};
    if (c.has("imaging.time_center"))
        im.time.center = c.number("imaging.time_center");
    im.time.half_width = c.number("imaging.half_width", im.time.half_width);
    if (!(im.time.half_width > 0.0))
        throw ConfigError(where(c, "imaging.half_width") + " must be positive");

    out.couple.distances
        = axis(c, "couple.distances", "couple.distance_range", out.couple.distances);
    out.couple.offsets = axis(c, "couple.offsets", "couple.offset_range", out.couple.offsets);
    if (out.couple.distances.empty() || out.couple.offsets.empty())
        throw ConfigError(c.name() + ": coupling scan is empty");

    c.require_all_used();
    out.snapshot = c.snapshot();
    return out;
}
}  // namespace epair::config
