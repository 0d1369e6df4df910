#include "doctest.h"

#include <cmath>
#include <numeric>
#include <random>

#include "epair/constants.hpp"
#include "epair/error.hpp"
#include "epair/physics/coupling.hpp"
#include "epair/physics/kinematics.hpp"

using namespace epair;
using namespace epair::physics;
using epair::physics::complex;

namespace
{
constexpr double c0 = constants::speed_of_light;

// Closed form of int_a^b exp(i k z) dz.
complex exact_segment(double k, double a, double b)
{
    if (k == 0.0)
        return {b - a, 0.0};
    complex const i{0.0, 1.0};
    return (std::exp(i * k * b) - std::exp(i * k * a)) / (i * k);
}

SampledField constant_field(double a, double b, complex value, double rate)
{
    double const periods = std::abs(rate) * (b - a) / constants::two_pi;
    auto const n = static_cast<std::size_t>(std::ceil(45.0 * periods)) + 2;
    SampledField f;
    f.z_start = a;
    f.step = (b - a) / double(n - 1);
    f.values.assign(n, value);
    return f;
}

OpticalMode anchor_mode(double decay = 250e-9)
{
    OpticalMode m;
    m.angular_frequency = constants::two_pi * c0 / 1550e-9;
    m.effective_index = c0 / electron_velocity(120e3);
    m.decay_length = decay;
    return m;
}
}  // namespace

TEST_CASE("phase mismatch")
{
    OpticalMode m = anchor_mode();
    double const v = electron_velocity(120e3);
    CHECK(std::abs(phase_mismatch(m, v)) < 1e-9 * m.angular_frequency / v);

    m.effective_index = 1.0;
    CHECK(phase_mismatch(m, c0) == 0.0);

    m.effective_index = 1.704;
    double const v2 = 0.5867 * c0;
    double const dk = m.angular_frequency / v2 - 1.704 * m.angular_frequency / c0;
    CHECK(phase_mismatch(m, v2) == doctest::Approx(dk));
    CHECK((phase_mismatch(m, v2) > 0) == (1.704 < c0 / v2));
    CHECK_THROWS_AS(phase_mismatch(m, 0.0), DomainError);
}

TEST_CASE("phase-matching integral against the sinc closed form")
{
    double const length = 20e-6;
    auto flat = constant_field(0.0, length, 1.0, 0.0);
    flat.values.assign(101, 1.0);
    flat.step = length / 100;
    CHECK(phase_matching_integral(flat, 0.0, 1.0).real()
          == doctest::Approx(length).epsilon(1e-14));

    double const full = constants::two_pi / length;
    auto f = constant_field(0.0, length, 1.0, full);
    CHECK(std::abs(phase_matching_integral(f, full, 1.0)) < 1e-9 * length);

    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> len_dist(1e-6, 1e-4);
    std::uniform_real_distribution<double> kl_dist(-300.0, 300.0);
    for (int trial = 0; trial < 100; ++trial)
    {
        double const L = len_dist(rng);
        double const dk = kl_dist(rng) / L;
        auto field = constant_field(0.0, L, 1.0, dk);
        complex const got = phase_matching_integral(field, dk, 1.0);
        double const sinc_mag
            = dk == 0.0 ? L : L * std::abs(std::sin(0.5 * dk * L) / (0.5 * dk * L));
        CHECK(std::abs(std::abs(got) - sinc_mag) <= 1e-9 * sinc_mag);
        CHECK(std::abs(got - exact_segment(dk, 0.0, L)) <= 1e-9 * sinc_mag);
    }
}

TEST_CASE("piecewise-constant and linear-phase fields")
{
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial)
    {
        // Field exp(i k z) on [a, b]: integrand phase slope q - k.
        double const q = 5e6 + 1e7 * u(rng);
        double const k = 5e6 + 1e7 * u(rng);
        double const a = -20e-6 * u(rng);
        double const b = a + 1e-6 + 30e-6 * u(rng);
        double const rate = std::max(std::abs(q - k), k);
        auto n = static_cast<std::size_t>(std::ceil(45.0 * rate * (b - a)
                                                    / constants::two_pi))
                 + 2;
        SampledField f;
        f.z_start = a;
        f.step = (b - a) / double(n - 1);
        for (std::size_t i = 0; i < n; ++i)
            f.values.push_back(std::polar(1.0, k * (a + f.step * double(i))));
        complex const expect = exact_segment(q - k, a, b);
        complex const got = phase_matching_integral(f, q, 1.0);
        CHECK(std::abs(got - expect) <= 1e-9 * std::abs(expect));

        // Sum of constant segments with random complex amplitudes.
        complex total{};
        complex oracle{};
        double z = a;
        for (int s = 0; s < 4; ++s)
        {
            double const len = 1e-6 + 10e-6 * u(rng);
            complex const amp = std::polar(0.1 + u(rng), constants::two_pi * u(rng));
            total += phase_matching_integral(constant_field(z, z + len, amp, q), q, 1.0);
            oracle += std::conj(amp) * exact_segment(q, z, z + len);
            z += len;
        }
        CHECK(std::abs(total - oracle) <= 1e-9 * std::abs(oracle));
    }
}

TEST_CASE("under-resolved grid is refused")
{
    SampledField f;
    f.step = 1e-6;
    f.values.assign(50, 1.0);
    double const q = constants::two_pi / (20 * f.step);  // 20 samples per period
    CHECK_THROWS_AS(phase_matching_integral(f, q, 1.0), ResolutionError);
    double const ok = constants::two_pi / (41 * f.step);
    CHECK_NOTHROW(phase_matching_integral(f, ok, 1.0));
    CHECK_THROWS_AS(phase_matching_integral(f, q, -1.0), DomainError);
}

TEST_CASE("coupling calibration anchor and decay")
{
    Trajectory t;
    t.impact_parameter = 50e-9;
    auto const m = anchor_mode();
    CHECK(std::abs(coupling_strength(m, t).g) == doctest::Approx(0.03).epsilon(1e-9));

    t.impact_parameter = 1e-3;
    CHECK(std::abs(coupling_strength(m, t).g) == 0.0);

    t.impact_parameter = -1e-9;
    auto clipped = coupling_strength(m, t);
    CHECK(clipped.clipped);
    CHECK(clipped.g == complex{});

    // Ring coupling decreases with height.
    t.impact_parameter = 0.0;
    double prev = 1e9;
    for (double d = 0.0; d < 2e-6; d += 150e-9)
    {
        t.impact_parameter = d;
        double const g = std::abs(coupling_strength(m, t).g);
        CHECK(g < prev);
        prev = g;
    }
}

TEST_CASE("exponential evanescence for a straight pass")
{
    Trajectory t;
    t.geometry = StraightPass{};
    auto const m = anchor_mode(250e-9);
    std::vector<double> ds;
    std::vector<double> logs;
    for (int i = 0; i < 10; ++i)
    {
        t.impact_parameter = 20e-9 + 90e-9 * i;
        ds.push_back(t.impact_parameter);
        logs.push_back(std::log(std::abs(coupling_strength(m, t).g)));
    }
    for (int i = 1; i < 10; ++i)
    {
        double const ratio = std::exp(logs[i] - logs[0]);
        double const expect = std::exp(-(ds[i] - ds[0]) / m.decay_length);
        CHECK(std::abs(ratio - expect) <= 1e-6 * expect);
    }
    // Linear regression of log|g| on d.
    double const n = ds.size();
    double const mx = std::accumulate(ds.begin(), ds.end(), 0.0) / n;
    double const my = std::accumulate(logs.begin(), logs.end(), 0.0) / n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < ds.size(); ++i)
    {
        sxy += (ds[i] - mx) * (logs[i] - my);
        sxx += (ds[i] - mx) * (ds[i] - mx);
        syy += (logs[i] - my) * (logs[i] - my);
    }
    CHECK(sxy * sxy / (sxx * syy) > 0.999999);
    CHECK(sxy / sxx == doctest::Approx(-1.0 / m.decay_length).epsilon(1e-9));
}

TEST_CASE("total scattering probability")
{
    Trajectory t;
    auto const comb = ModeComb::generate(CombSpec{});
    auto const r = total_scattering_probability(comb, t);
    REQUIRE(r.per_mode.size() == comb.size());
    double sum = 0.0;
    for (complex g : r.per_mode)
        sum += std::norm(g);
    CHECK(r.total_probability == sum);
    CHECK(r.total_probability == doctest::Approx(0.025).epsilon(0.08));

    auto const p = r.probabilities();
    std::size_t significant = 0;
    double const peak = *std::max_element(p.begin(), p.end());
    for (double v : p)
        significant += v > 0.25 * peak;
    CHECK(significant >= 60);
    CHECK(significant <= 156);

    // Phase-matched straight pass: every mode couples equally.
    CombSpec flat;
    flat.dispersion.slope = 0.0;
    flat.dispersion.reference_index = c0 / electron_velocity(120e3);
    flat.min_wavelength = 1530e-9;
    auto const equal = ModeComb::generate(flat);
    std::vector<OpticalMode> modes(equal.modes().begin(), equal.modes().begin() + 100);
    ModeComb hundred(modes, equal.free_spectral_range_hz());
    Trajectory straight;
    straight.geometry = StraightPass{};
    auto const rs = total_scattering_probability(hundred, straight);
    double const p0 = std::norm(rs.per_mode[0]);
    for (complex g : rs.per_mode)
        CHECK(std::norm(g) == doctest::Approx(p0).epsilon(1e-9));
    CHECK(rs.total_probability == doctest::Approx(100 * p0).epsilon(1e-12));

    Trajectory clip;
    clip.impact_parameter = -10e-9;
    auto const rc = total_scattering_probability(comb, clip);
    CHECK(rc.clipped);
    CHECK(rc.total_probability == 0.0);
    CHECK_THROWS_AS(total_scattering_probability(ModeComb{}, t), DomainError);
}

TEST_CASE("ramsey composition")
{
    CHECK(ramsey_coupling({0.01, 0.02}, {}, 1.3) == complex{0.01, 0.02});
    CHECK(std::abs(ramsey_coupling(0.02, 0.02, constants::pi)) < 1e-17);

    auto const m = anchor_mode();
    Trajectory t;
    t.lateral_offset = 15e-6;
    auto const seg = chord_segments(m, t);
    REQUIRE(seg.separated);
    complex const full = coupling_strength(m, t).g;
    complex const composed = ramsey_coupling(seg.first, seg.second, seg.relative_phase);
    CHECK(std::abs(std::abs(composed) - std::abs(full)) < 0.01 * std::abs(full));
    // The two crossings are mirror images and couple equally.
    CHECK(std::abs(seg.first) == doctest::Approx(std::abs(seg.second)).epsilon(1e-6));

    t.lateral_offset = 0.0;
    CHECK_FALSE(chord_segments(m, t).separated);
}

TEST_CASE("ramsey oscillation period matches full quadrature")
{
    auto const m = anchor_mode();
    Trajectory t;
    double const dx = 0.01e-6;
    std::vector<double> xs;
    std::vector<double> g2;
    std::vector<double> phase;  // unwrapped segment-model interference phase
    for (double x = 13e-6; x <= 20e-6; x += dx)
    {
        t.lateral_offset = x;
        xs.push_back(x);
        g2.push_back(std::norm(coupling_strength(m, t).g));
        double p = chord_segments(m, t).interference_phase();
        if (!phase.empty())
            p = phase.back() + std::remainder(p - phase.back(), constants::two_pi);
        phase.push_back(p);
    }
    std::vector<double> peak_phase;
    for (std::size_t i = 1; i + 1 < g2.size(); ++i)
    {
        if (g2[i] > g2[i - 1] && g2[i] >= g2[i + 1])
        {
            double const den = g2[i - 1] - 2 * g2[i] + g2[i + 1];
            double const off = den != 0.0 ? 0.5 * (g2[i - 1] - g2[i + 1]) / den : 0.0;
            std::size_t const j = off < 0 ? i - 1 : i;
            double const frac = off < 0 ? 1.0 + off : off;
            peak_phase.push_back(phase[j] + frac * (phase[j + 1] - phase[j]));
        }
    }
    REQUIRE(peak_phase.size() >= 3);
    for (std::size_t i = 1; i < peak_phase.size(); ++i)
    {
        double const turn = std::abs(peak_phase[i] - peak_phase[i - 1]);
        CHECK(turn == doctest::Approx(constants::two_pi).epsilon(0.02));
    }
}

TEST_CASE("phase-matching bandwidth of the default dispersion")
{
    Trajectory t;
    double const fwhm = phase_matching_bandwidth(t, Dispersion{}, 250e-9, 0.6, 1.0);
    CHECK(fwhm > 0.040);
    CHECK(fwhm < 0.060);
    CHECK_THROWS_AS(phase_matching_bandwidth(t, Dispersion{}, 250e-9, 0.79, 0.81),
                    DomainError);
}
