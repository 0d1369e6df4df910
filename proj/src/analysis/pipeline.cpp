#include "epair/analysis/pipeline.hpp"

#include <cmath>

namespace epair::analysis
{
namespace
{
nlohmann::json measured(Measured const& m)
{
    return {{"value", m.value}, {"sigma", m.sigma}};
}

// JSON has no infinity; undefined values are written as null.
nlohmann::json finite_or_null(double v)
{
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}
}  // namespace

std::optional<double> metadata_duration(io::EventStream const& stream)
{
    auto const j = nlohmann::json::parse(stream.metadata, nullptr, false);
    if (j.is_object() && j.contains("duration_s") && j["duration_s"].is_number())
        return j["duration_s"].get<double>();
    return std::nullopt;
}

AnalysisResult analyze(io::EventStream const& stream, AnalysisOptions const& opts)
{
    AnalysisResult out;
    out.electrons = cluster_hits(stream.packets,
                                 opts.spectrometer,
                                 opts.cluster,
                                 opts.offsets ? &*opts.offsets : nullptr);
    if (opts.drift)
        correct_energy_drift(out.electrons, *opts.drift);

    CorrelationOptions copts;
    copts.axes = HistogramAxes::for_spectrometer(opts.spectrometer, 512, opts.window);
    copts.delay = opts.delay;
    copts.threads = opts.threads;
    copts.duration = opts.duration;
    if (!(copts.duration > 0.0))
        copts.duration = metadata_duration(stream).value_or(0.0);
    auto const photons = photon_times(stream, opts.photon_channel);
    out.histogram = correlate(out.electrons, photons, copts);
    out.report = heralding_report(
        out.histogram, opts.time_gate, opts.energy_gate, opts.efficiencies, opts.sidebands);
    return out;
}

nlohmann::json to_json(HeraldingReport const& r)
{
    nlohmann::json j;
    j["duration_s"] = r.duration;
    j["time_gate"] = {{"center_s", r.time_center}, {"half_width_s", r.half_width}};
    j["energy_gate_ev"] = {r.energy_gate.lo_ev, r.energy_gate.hi_ev};
    j["rates"] = {{"electron", measured(r.r_e)},
                  {"photon", measured(r.r_p)},
                  {"coincidence", measured(r.r_pe)},
                  {"accidental", measured(r.r_acc)}};
    j["car"] = {{"value", finite_or_null(r.car.value)},
                {"sigma", r.car.sigma},
                {"undefined", r.car_undefined}};
    j["klyshko"] = {{"photon", measured(r.eta_k_photon)},
                    {"electron", measured(r.eta_k_electron)},
                    {"undefined", r.klyshko_undefined}};
    j["intrinsic"] = {{"photon", measured(r.eta_i_photon)},
                      {"electron", measured(r.eta_i_electron)},
                      {"clamped", r.eta_i_clamped}};
    j["true_fraction"] = r.true_fraction;
    j["max_true_fraction"] = r.max_true_fraction;
    j["peak"] = {{"found", r.peak_found}, {"fwhm_s", r.fwhm}};
    return j;
}
}  // namespace epair::analysis
