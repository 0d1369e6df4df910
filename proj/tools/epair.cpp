#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "epair/analysis/pipeline.hpp"
#include "epair/cli/commands.hpp"
#include "epair/cli/manifest.hpp"
#include "epair/config/config.hpp"
#include "epair/config/settings.hpp"
#include "epair/error.hpp"
#include "epair/imaging/scan.hpp"
#include "epair/io/csv.hpp"
#include "epair/mc/simulation.hpp"

using namespace epair;

namespace
{
enum Exit : int
{
    ok = 0,
    failure = 1,
    usage = 2,
    io_failure = 3,
    parse_failure = 4,
    config_violation = 5
};

struct Common
{
    std::string config;
    std::vector<std::string> set;
    unsigned threads = 1;
    std::string manifest;
};

void add_common(CLI::App* cmd, Common& c)
{
    cmd->add_option("-c,--config", c.config, "Configuration file (default: $EPAIR_CONFIG)");
    cmd->add_option("--set", c.set, "Override a configuration entry, key=value")->allow_extra_args(false)->take_all();
    cmd->add_option("--threads", c.threads, "Worker threads")->check(CLI::Range(1u, 1024u));
    cmd->add_option("--manifest", c.manifest, "Write a run manifest (JSON)");
}

struct Loaded
{
    config::Config cfg;
    config::Settings settings;
    std::string file;
};

std::optional<Loaded> load(Common const& c, bool required)
{
    std::string file = c.config;
    if (file.empty())
        if (auto p = config::default_config_path())
            file = p->string();
    if (file.empty() && !required && c.set.empty())
        return std::nullopt;
    if (file.empty())
        throw cli::UsageError("no configuration: pass --config or set EPAIR_CONFIG");
    Loaded l{config::Config::load(file), {}, file};
    for (auto const& kv : c.set)
    {
        auto const eq = kv.find('=');
        if (eq == std::string::npos)
            throw cli::UsageError("--set expects key=value, got '" + kv + "'");
        l.cfg.set(kv.substr(0, eq), kv.substr(eq + 1), "--set");
    }
    l.settings = config::load_settings(l.cfg);
    l.settings.sim.threads = c.threads;
    l.settings.analysis.threads = c.threads;
    return l;
}

cli::RunManifest start_manifest(std::string const& command, Loaded const* l, int argc, char** argv)
{
    cli::RunManifest m(command);
    m.set_arguments(std::vector<std::string>(argv, argv + argc));
    if (l)
    {
        m.set_config(l->file, l->settings.snapshot);
        m.set_seed(l->settings.sim.seed);
    }
    return m;
}

void emit(std::string const& path, std::string const& text, cli::RunManifest& m)
{
    if (path.empty() || path == "-")
    {
        std::cout << text;
        return;
    }
    io::write_text(path, text);
    m.add_output(path);
}

void finish(cli::RunManifest const& m, std::string const& path)
{
    if (!path.empty())
        m.write(path);
}

std::pair<double, double> parse_pair(std::string const& text, char const* what)
{
    auto const v = cli::parse_list(text);
    if (v.size() != 2)
        throw cli::UsageError(std::string(what) + " expects lo,hi");
    return {v[0], v[1]};
}

//---------------------------------------------------------------------------//
int run(int argc, char** argv)
{
    CLI::App app{"Electron-photon pair simulation and analysis"};
    app.require_subcommand(1);
    app.set_version_flag("--version", cli::tool_version());

    // couple
    Common couple_c;
    std::string couple_out, couple_d, couple_dr, couple_x, couple_xr;
    auto* couple = app.add_subcommand("couple", "Coupling strengths over a (d, x) scan");
    add_common(couple, couple_c);
    auto* od = couple->add_option("--distances", couple_d, "Heights d [m], comma separated");
    couple->add_option("--d-range", couple_dr, "first,last,count heights [m]")->excludes(od);
    auto* ox = couple->add_option("--offsets", couple_x, "Lateral offsets x [m], comma separated");
    couple->add_option("--x-range", couple_xr, "first,last,count offsets [m]")->excludes(ox);
    couple->add_option("-o,--out", couple_out, "CSV output (default stdout)");

    // spectrum
    Common spec_c;
    std::string spec_out, spec_lateral, spec_summary;
    auto* spec = app.add_subcommand("spectrum", "Detected emission spectrum and lateral scan");
    add_common(spec, spec_c);
    spec->add_option("-o,--out", spec_out, "Envelope CSV (default stdout)");
    spec->add_option("--lateral", spec_lateral, "Lateral scan CSV over the couple offsets");
    spec->add_option("--summary", spec_summary, "Summary JSON");

    // simulate
    Common sim_c;
    std::string sim_out, sim_truth;
    std::optional<std::uint64_t> sim_seed;
    std::optional<double> sim_duration;
    bool sim_pulsed = false;
    auto* sim = app.add_subcommand("simulate", "Simulate an event stream");
    add_common(sim, sim_c);
    sim->add_option("--seed", sim_seed, "Master seed");
    sim->add_option("--duration", sim_duration, "Run length [s]")->check(CLI::PositiveNumber);
    sim->add_option("-o,--out", sim_out, "Event file")->required();
    sim->add_option("--truth", sim_truth, "Ground-truth CSV, one row per electron");
    sim->add_flag("--pulsed", sim_pulsed, "Pulsed-beam reference run for calibration");

    // calibrate
    Common cal_c;
    std::string cal_ref, cal_out;
    auto* cal = app.add_subcommand("calibrate", "Per-pixel time offsets from a pulsed reference");
    add_common(cal, cal_c);
    cal->add_option("reference", cal_ref, "Pulsed reference event file")->required();
    cal->add_option("-o,--out", cal_out, "Offsets CSV")->required();

    // analyze
    Common an_c;
    std::string an_in, an_report, an_hist, an_gate, an_offsets;
    std::optional<double> an_hw, an_center, an_window;
    auto* an = app.add_subcommand("analyze", "Cluster, correlate and report heralding metrics");
    add_common(an, an_c);
    an->add_option("events", an_in, "Event file")->required();
    an->add_option("--gate", an_gate, "Energy gate lo,hi [eV]");
    an->add_option("--half-width", an_hw, "Coincidence half width [s]")->check(CLI::PositiveNumber);
    an->add_option("--center", an_center, "Coincidence gate center [s]");
    an->add_option("--window", an_window, "Correlation half window [s]")->check(CLI::PositiveNumber);
    an->add_option("--offsets", an_offsets, "Pixel offsets CSV");
    an->add_option("--report", an_report, "Report JSON (default stdout)");
    an->add_option("--histogram", an_hist, "Coincidence histogram CSV");

    // image
    Common im_c;
    std::string im_maps, im_summary, im_dr;
    std::optional<double> im_dwell;
    auto* im = app.add_subcommand("image", "Raster scan maps, decay fits and dynamic range");
    add_common(im, im_c);
    im->add_option("--d-range", im_dr, "first,last,count heights [m]");
    im->add_option("--dwell", im_dwell, "Dwell per pixel [s]")->check(CLI::PositiveNumber);
    im->add_option("--maps", im_maps, "Maps CSV");
    im->add_option("--summary", im_summary, "Summary JSON (default stdout)");

    try
    {
        app.parse(argc, argv);
    }
    catch (CLI::ParseError const& e)
    {
        int const code = app.exit(e);
        return code == 0 ? ok : usage;
    }

    if (couple->parsed())
    {
        auto l = load(couple_c, true);
        auto scan = l->settings.couple;
        if (!couple_d.empty())
            scan.distances = cli::parse_list(couple_d);
        if (!couple_dr.empty())
            scan.distances = cli::parse_range(couple_dr);
        if (!couple_x.empty())
            scan.offsets = cli::parse_list(couple_x);
        if (!couple_xr.empty())
            scan.offsets = cli::parse_range(couple_xr);
        auto m = start_manifest("couple", &*l, argc, argv);
        auto const csv = m.stage("couple", [&] {
            return cli::couple_csv(l->settings.sim, scan, couple_c.threads);
        });
        emit(couple_out, csv, m);
        finish(m, couple_c.manifest);
    }
    else if (spec->parsed())
    {
        auto l = load(spec_c, true);
        auto const& s = l->settings;
        auto m = start_manifest("spectrum", &*l, argc, argv);
        auto const env = m.stage("spectrum", [&] { return cli::spectrum(s.sim); });
        std::optional<cli::LateralScan> lat;
        if (!spec_lateral.empty())
            lat = m.stage("lateral", [&] {
                return cli::lateral_scan(s.sim, s.single_mode_filter, s.couple.offsets, spec_c.threads);
            });
        emit(spec_out, cli::spectrum_csv(env), m);
        if (lat)
            emit(spec_lateral, cli::lateral_csv(*lat), m);
        if (!spec_summary.empty())
        {
            auto const j = cli::spectrum_json(
                cli::summarize(env, s.sim.calibration.reference_wavelength), lat ? &*lat : nullptr);
            emit(spec_summary, j.dump(2) + "\n", m);
        }
        finish(m, spec_c.manifest);
    }
    else if (sim->parsed())
    {
        auto l = load(sim_c, true);
        auto& s = l->settings;
        if (sim_seed)
            s.sim.seed = *sim_seed;
        if (sim_duration)
            s.sim.duration = *sim_duration;
        s.sim.record_ground_truth = !sim_truth.empty();
        auto m = start_manifest(sim_pulsed ? "simulate --pulsed" : "simulate", &*l, argc, argv);
        m.set_seed(s.sim.seed);
        if (sim_pulsed)
        {
            auto const stream = m.stage("simulate", [&] { return mc::simulate_pulsed(s.sim, s.pulsed); });
            m.stage("write", [&] { io::write_stream(stream, sim_out); });
            m.add_output(sim_out);
        }
        else
        {
            auto const result = m.stage("simulate", [&] { return mc::simulate_run(s.sim); });
            m.stage("write", [&] { io::write_stream(result.stream, sim_out); });
            m.add_output(sim_out);
            if (!sim_truth.empty())
            {
                io::write_text(sim_truth, mc::ground_truth_csv(result.truth));
                m.add_output(sim_truth);
            }
            auto const& st = result.stats;
            m.note("stats",
                   {{"electrons", st.electrons},
                    {"photons_emitted", st.photons_emitted},
                    {"avalanches", st.avalanches},
                    {"electrons_detected", st.electrons_detected},
                    {"hits", st.hits},
                    {"hits_dropped", st.hits_dropped},
                    {"saturated", st.saturated}});
            if (st.saturated)
                std::cerr << "warning: hit rate above the detector saturation ceiling; hits were dropped\n";
        }
        finish(m, sim_c.manifest.empty() ? sim_out + ".manifest.json" : sim_c.manifest);
    }
    else if (cal->parsed())
    {
        auto l = load(cal_c, false);
        analysis::CalibrationOptions opts = l ? l->settings.calibration : analysis::CalibrationOptions{};
        auto m = start_manifest("calibrate", l ? &*l : nullptr, argc, argv);
        m.add_input(cal_ref);
        auto const stream = m.stage("read", [&] { return io::read_stream(cal_ref); });
        auto const map = m.stage("calibrate", [&] { return analysis::calibrate_pixel_offsets(stream, opts); });
        emit(cal_out, analysis::export_offsets_csv(map), m);
        m.note("flagged_pixels", map.flagged_count());
        std::cerr << map.flagged_count() << " pixels flagged below " << opts.min_hits << " hits\n";
        finish(m, cal_c.manifest);
    }
    else if (an->parsed())
    {
        auto l = load(an_c, false);
        analysis::AnalysisOptions opts = l ? l->settings.analysis : analysis::AnalysisOptions{};
        opts.threads = an_c.threads;
        if (!an_gate.empty())
        {
            auto const [lo, hi] = parse_pair(an_gate, "--gate");
            if (!(hi > lo))
                throw cli::UsageError("--gate must be increasing");
            opts.energy_gate = {lo, hi};
        }
        if (an_hw)
            opts.time_gate.half_width = *an_hw;
        if (an_center)
            opts.time_gate.center = *an_center;
        if (an_window)
            opts.window = *an_window;
        auto m = start_manifest("analyze", l ? &*l : nullptr, argc, argv);
        if (!an_offsets.empty())
        {
            opts.offsets = analysis::import_offsets_csv(io::read_text(an_offsets));
            m.add_input(an_offsets);
        }
        m.add_input(an_in);
        auto const stream = m.stage("read", [&] { return io::read_stream(an_in); });
        auto const result = m.stage("analyze", [&] { return analysis::analyze(stream, opts); });
        auto j = analysis::to_json(result.report);
        j["electrons"] = result.electrons.size();
        if (!an_hist.empty())
            emit(an_hist, analysis::export_histogram_csv(result.histogram), m);
        emit(an_report, j.dump(2) + "\n", m);
        finish(m, an_c.manifest);
    }
    else if (im->parsed())
    {
        auto l = load(im_c, true);
        auto& s = l->settings;
        if (!im_dr.empty())
            s.scan.distances = cli::parse_range(im_dr);
        if (im_dwell)
            s.scan.dwell = *im_dwell;
        if (s.scan.distances.empty())
            throw cli::UsageError("image scan has no heights");
        auto m = start_manifest("image", &*l, argc, argv);
        auto const maps = m.stage("raster", [&] {
            return imaging::raster_simulate(s.scan, s.sim, s.imaging, im_c.threads);
        });
        auto const summary = m.stage("fit", [&] { return imaging::imaging_summary(maps, s.scan); });
        if (!im_maps.empty())
            emit(im_maps, imaging::export_maps_csv(maps), m);
        emit(im_summary, summary.dump(2) + "\n", m);
        finish(m, im_c.manifest);
    }
    return ok;
}
}  // namespace

int main(int argc, char** argv)
{
    try
    {
        return run(argc, argv);
    }
    catch (cli::UsageError const& e)
    {
        std::cerr << "usage error: " << e.what() << '\n';
        return usage;
    }
    catch (IoError const& e)
    {
        std::cerr << "I/O error: " << e.what() << '\n';
        return io_failure;
    }
    catch (ParseError const& e)
    {
        std::cerr << "parse error: " << e.what() << '\n';
        return parse_failure;
    }
    catch (SyntaxError const& e)
    {
        std::cerr << "parse error: " << e.what() << '\n';
        return parse_failure;
    }
    catch (ConfigError const& e)
    {
        std::cerr << "configuration error: " << e.what() << '\n';
        return config_violation;
    }
    catch (SaturationError const& e)
    {
        std::cerr << "configuration error: " << e.what() << '\n';
        return config_violation;
    }
    catch (std::exception const& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return failure;
    }
}
