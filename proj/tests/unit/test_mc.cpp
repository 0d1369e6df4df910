#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "epair/error.hpp"
#include "epair/mc/simulation.hpp"

using namespace epair;
using namespace epair::mc;

namespace
{
// Emission law with explicit per-mode values instead of the coupling model.
EmissionModel flat_model(SimConfig const& cfg, double p_each, double detection)
{
    EmissionModel m;
    for (auto const& mode : cfg.comb.modes())
    {
        m.probability.push_back(p_each);
        m.photon_energy_ev.push_back(mode.photon_energy_ev());
        m.detection.push_back(detection);
        m.lifetime.push_back(0.45e-9);
        m.total += p_each;
    }
    return m;
}

std::vector<std::uint64_t> tdc_ticks(io::EventStream const& s)
{
    std::vector<std::uint64_t> out;
    for (auto const& p : s.packets)
        if (!p.is_hit())
            out.push_back(p.ticks);
    return out;
}

SimConfig small_config()
{
    SimConfig cfg;
    cfg.beam.electron_rate = 1e6;
    cfg.duration = 0.02;
    cfg.electron.slit = SlitWindow{};
    return cfg;
}
}  // namespace

TEST_CASE("derived seeds are distinct and stable")
{
    CHECK(derive_seed(1, 0) == derive_seed(1, 0));
    CHECK(derive_seed(1, 0) != derive_seed(1, 1));
    CHECK(derive_seed(1, 0) != derive_seed(2, 0));
}

TEST_CASE("dead time filter")
{
    std::vector<double> t{0.0, 1.0, 4.9, 5.0, 5.1, 12.0};
    CHECK(apply_dead_time(t, 5.0) == std::vector<double>{0.0, 5.0, 12.0});
    CHECK(apply_dead_time(t, 0.0) == t);
    CHECK(apply_dead_time(std::vector<double>{}, 1.0).empty());
    std::vector<double> unsorted{1.0, 0.5};
    CHECK_THROWS_AS(apply_dead_time(unsorted, 1.0), ContractError);
}

TEST_CASE("per-mode scattering draws")
{
    Rng rng(17);
    std::vector<double> const p{0.3, 0.1, 0.0};
    int const n = 200'000;
    double s0 = 0, s1 = 0, s01 = 0, q0 = 0, q1 = 0;
    for (int i = 0; i < n; ++i)
    {
        auto const c = sample_scattering(p, rng);
        CHECK(c[2] == 0);
        s0 += c[0];
        s1 += c[1];
        s01 += double(c[0]) * c[1];
        q0 += double(c[0]) * c[0];
        q1 += double(c[1]) * c[1];
    }
    double const m0 = s0 / n, m1 = s1 / n;
    CHECK(std::abs(m0 - 0.3) < 5 * std::sqrt(0.3 / n));
    CHECK(std::abs(m1 - 0.1) < 5 * std::sqrt(0.1 / n));
    // Poisson variance equals the mean; modes are independent.
    CHECK((q0 / n - m0 * m0) == doctest::Approx(0.3).epsilon(0.02));
    double const corr = (s01 / n - m0 * m1)
                        / std::sqrt((q0 / n - m0 * m0) * (q1 / n - m1 * m1));
    CHECK(std::abs(corr) < 5 / std::sqrt(double(n)));
    std::vector<double> const bad{-0.1};
    CHECK_THROWS_AS(sample_scattering(bad, rng), DomainError);
}

TEST_CASE("zero coupling emits no photons")
{
    auto cfg = small_config();
    cfg.spad.dark_rate = 0.0;
    auto const r = simulate_run(cfg, flat_model(cfg, 0.0, 1.0));
    CHECK(r.stats.photons_emitted == 0);
    CHECK(tdc_ticks(r.stream).empty());
    CHECK(r.stats.scattered_electrons == 0);
    CHECK(r.stats.electrons > 0);
}

TEST_CASE("weak coupling regime is enforced")
{
    auto cfg = small_config();
    auto const m = flat_model(cfg, 0.6 / double(cfg.comb.size()), 0.1);
    CHECK_THROWS_AS(simulate_run(cfg, m), ModelValidityError);
    CHECK_THROWS_AS(simulate_run(cfg, m), ConfigError);
}

TEST_CASE("dark counts under dead time")
{
    auto cfg = small_config();
    cfg.beam.electron_rate = 0.0;
    cfg.spad.jitter_fwhm = 0.0;
    cfg.spad.dark_rate = 1e4;
    cfg.spad.dead_time = 50e-6;
    cfg.duration = 10.0;
    cfg.slab_duration = 0.01;
    auto const r = simulate_run(cfg, flat_model(cfg, 0.0, 0.0));
    auto const t = tdc_ticks(r.stream);
    double const rate = double(t.size()) / cfg.duration;
    double const expected = cfg.spad.dark_rate / (1 + cfg.spad.dark_rate * cfg.spad.dead_time);
    CHECK(rate < cfg.spad.dark_rate);
    CHECK(std::abs(rate - expected) < 5 * std::sqrt(expected / cfg.duration));
    auto const min_gap = static_cast<std::uint64_t>(cfg.spad.dead_time * 3.84e9) - 1;
    for (std::size_t i = 1; i < t.size(); ++i)
        REQUIRE(t[i] - t[i - 1] >= min_gap);
}

TEST_CASE("dark counts are a Poisson process")
{
    auto cfg = small_config();
    cfg.beam.electron_rate = 0.0;
    cfg.spad.jitter_fwhm = 0.0;
    cfg.spad.dark_rate = 2000.0;
    cfg.spad.dead_time = 1e-9;
    cfg.duration = 5.0;
    cfg.slab_duration = 0.05;
    auto const r = simulate_run(cfg, flat_model(cfg, 0.0, 0.0));
    auto const t = tdc_ticks(r.stream);
    REQUIRE(t.size() > 5000);
    std::vector<double> gaps;
    for (std::size_t i = 1; i < t.size(); ++i)
        gaps.push_back(double(t[i] - t[i - 1]) / 3.84e9);
    std::sort(gaps.begin(), gaps.end());
    double const rate = double(t.size()) / cfg.duration;
    double d = 0.0;
    double const n = double(gaps.size());
    for (std::size_t i = 0; i < gaps.size(); ++i)
    {
        double const f = -std::expm1(-rate * gaps[i]);
        d = std::max({d, std::abs(f - double(i) / n), std::abs(f - double(i + 1) / n)});
    }
    // Kolmogorov-Smirnov critical value at alpha = 0.001.
    CHECK(d < 1.95 / std::sqrt(n));
}

TEST_CASE("thinning bookkeeping")
{
    auto cfg = small_config();
    cfg.beam.electron_rate = 5e6;
    cfg.duration = 0.2;
    cfg.record_ground_truth = true;
    auto const model = flat_model(cfg, 0.1 / double(cfg.comb.size()), 0.5);
    auto const r = simulate_run(cfg, model);
    auto const& st = r.stats;
    double const n_exp = cfg.beam.electron_rate * cfg.duration;
    CHECK(std::abs(double(st.electrons) - n_exp) < 5 * std::sqrt(n_exp));

    double const ps = -std::expm1(-model.total);
    double const n = double(st.electrons);
    CHECK(std::abs(double(st.scattered_electrons) - n * ps)
          < 5 * std::sqrt(n * ps));
    double const per_scattered = model.total / ps;
    CHECK(double(st.photons_emitted) / double(st.scattered_electrons)
          == doctest::Approx(per_scattered).epsilon(0.01));
    CHECK(std::abs(double(st.photons_detected) - 0.5 * double(st.photons_emitted))
          < 5 * std::sqrt(0.25 * double(st.photons_emitted)));

    CHECK(r.truth.electrons.size() == st.simulated_electrons);
    CHECK(r.truth.photons.size() == st.photons_emitted);
    std::uint64_t detected = 0;
    std::uint64_t hits = 0;
    for (auto const& e : r.truth.electrons)
    {
        detected += e.electron_detected;
        hits += e.hits;
    }
    CHECK(detected == st.electrons_detected);
    CHECK(hits == st.hits);
    CHECK(std::count_if(r.stream.packets.begin(), r.stream.packets.end(),
                        [](auto const& p) { return p.is_hit(); })
          == std::ptrdiff_t(st.hits));
    CHECK(tdc_ticks(r.stream).size() == st.avalanches);
    CHECK(std::is_sorted(r.stream.packets.begin(), r.stream.packets.end(),
                         io::time_order));

    auto const csv = ground_truth_csv(r.truth);
    CHECK(std::count(csv.begin(), csv.end(), '\n')
          == std::ptrdiff_t(r.truth.electrons.size() + 1));
}

TEST_CASE("energy conservation per electron")
{
    auto cfg = small_config();
    cfg.record_ground_truth = true;
    cfg.beam.electron_rate = 2e6;
    cfg.duration = 0.05;
    auto const model = flat_model(cfg, 0.2 / double(cfg.comb.size()), 0.5);
    auto const r = simulate_run(cfg, model);
    double const sigma = cfg.beam.zlp_fwhm_ev / 2.3548200450309493;
    double sum = 0.0, sum2 = 0.0;
    std::size_t scattered = 0;
    for (auto const& e : r.truth.electrons)
    {
        double loss = 0.0;
        for (std::uint32_t k = 0; k < e.photon_count; ++k)
        {
            auto const& ph = r.truth.photons[e.first_photon + k];
            loss += model.photon_energy_ev[ph.mode];
            CHECK(ph.emission_time >= e.time);
        }
        REQUIRE(e.energy_loss_ev == doctest::Approx(loss).epsilon(1e-12));
        if (e.photon_count > 0)
        {
            double const d = e.measured_loss_ev - e.energy_loss_ev;
            sum += d;
            sum2 += d * d;
            ++scattered;
        }
        else
        {
            // Unscattered electrons in the stream passed the slit.
            CHECK_FALSE(cfg.electron.slit->blocks(e.measured_loss_ev));
        }
    }
    REQUIRE(scattered > 1000);
    double const mean = sum / double(scattered);
    CHECK(std::abs(mean) < 5 * sigma / std::sqrt(double(scattered)));
    CHECK(std::sqrt(sum2 / double(scattered)) == doctest::Approx(sigma).epsilon(0.05));
}

TEST_CASE("detected photons per electron follow the emission law")
{
    SimConfig cfg;
    cfg.beam.electron_rate = 1e8;
    cfg.duration = 0.1;
    cfg.electron.slit = SlitWindow{};
    cfg.photon_chain.stages = {{"forward", 0.5}, {"holder", 0.4}, {"fiber", 0.2165}};
    auto const model = EmissionModel::build(cfg);
    double expected = 0.0;
    for (std::size_t i = 0; i < model.probability.size(); ++i)
        expected += model.probability[i] * model.detection[i];
    auto const r = simulate_run(cfg, model);
    REQUIRE(r.stats.electrons >= 9'900'000);
    double const n = double(r.stats.electrons);
    double const k = double(r.stats.photons_detected);
    CHECK(std::abs(k / n - expected) < 4 * std::sqrt(expected / n));
}

TEST_CASE("identical seeds give identical streams for any thread count")
{
    auto cfg = small_config();
    cfg.beam.electron_rate = 2e6;
    cfg.duration = 0.03;
    auto const model = flat_model(cfg, 0.2 / double(cfg.comb.size()), 0.3);
    cfg.threads = 1;
    auto const a = simulate_run(cfg, model);
    cfg.threads = 3;
    auto const b = simulate_run(cfg, model);
    CHECK(a.stream == b.stream);
    CHECK(io::encode(a.stream) == io::encode(b.stream));
    cfg.seed = 2;
    auto const c = simulate_run(cfg, model);
    CHECK_FALSE(a.stream == c.stream);
}

TEST_CASE("hit saturation thins clusters")
{
    auto cfg = small_config();
    cfg.electron.slit.reset();
    cfg.beam.electron_rate = 1e8;
    cfg.duration = 2e-3;
    auto const r = simulate_run(cfg, flat_model(cfg, 0.0, 0.0));
    CHECK(r.stats.saturated);
    CHECK(r.stats.hits_dropped > 0);
    double const rate = double(r.stats.hits) / cfg.duration;
    CHECK(rate == doctest::Approx(cfg.electron.saturation_hits_per_s).epsilon(0.02));

    cfg.beam.electron_rate = 1e6;
    auto const ok = simulate_run(cfg, flat_model(cfg, 0.0, 0.0));
    CHECK_FALSE(ok.stats.saturated);
    CHECK(ok.stats.hits_dropped == 0);
}

TEST_CASE("pixel offsets")
{
    SimConfig cfg;
    auto const a = pixel_offsets(cfg);
    CHECK(a.size() == 512u * 512u);
    auto const [lo, hi] = std::minmax_element(a.begin(), a.end());
    CHECK(*lo >= -4e-9);
    CHECK(*hi <= 4e-9);
    cfg.seed = 99;
    CHECK(pixel_offsets(cfg) == a);
    cfg.electron.offset_seed = 2;
    CHECK_FALSE(pixel_offsets(cfg) == a);
    cfg.electron.offset_spread = 0.0;
    auto const z = pixel_offsets(cfg);
    CHECK(std::all_of(z.begin(), z.end(), [](double v) { return v == 0.0; }));
}

TEST_CASE("pulsed reference acquisition")
{
    SimConfig cfg;
    PulsedSpec p;
    p.pulses = 1000;
    p.roi_x = 10;
    p.roi_y = 20;
    auto const s = simulate_pulsed(cfg, p);
    std::size_t markers = 0;
    for (auto const& pk : s.packets)
    {
        if (pk.is_hit())
        {
            CHECK(pk.x >= 9);
            CHECK(pk.x <= 10 + 16);
            CHECK(pk.y >= 19);
            CHECK(pk.y <= 20 + 16);
        }
        else
        {
            CHECK(pk.channel == 1);
            ++markers;
        }
    }
    CHECK(markers == 1000);
    p.roi_x = 510;
    CHECK_THROWS_AS(simulate_pulsed(cfg, p), ConfigError);
}

TEST_CASE("configuration validation")
{
    SimConfig cfg;
    cfg.duration = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.spad.efficiency = 1.5;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.electron.offset_map = {1.0};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.electron.slit = SlitWindow{1.0, 0.0};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    CHECK(BeamSpec::rate_from_current(1.602176634e-19) == doctest::Approx(1.0));
}
