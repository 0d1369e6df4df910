#include "doctest.h"

#include <cmath>

#include "epair/constants.hpp"
#include "epair/error.hpp"
#include "epair/physics/kinematics.hpp"
#include "epair/physics/optical_mode.hpp"
#include "epair/physics/rates.hpp"

using namespace epair;
using namespace epair::physics;

namespace
{
constexpr double c0 = constants::speed_of_light;
constexpr double mc2 = constants::electron_rest_energy_ev;
}  // namespace

TEST_CASE("electron velocity")
{
    CHECK(electron_velocity(0.0) == 0.0);

    // Independent form: beta = sqrt(1 - 1/gamma^2)
    double const gamma = 1.0 + 120e3 / mc2;
    double const beta = std::sqrt(1.0 - 1.0 / (gamma * gamma));
    CHECK(electron_velocity(120e3) / c0 == doctest::Approx(beta).epsilon(1e-12));
    CHECK(electron_velocity(120e3) / c0 == doctest::Approx(0.5867).epsilon(1e-3));

    double const classical = c0 * std::sqrt(2.0 * 1.0 / mc2);
    CHECK(std::abs(electron_velocity(1.0) - classical) / classical < 1e-5);

    double prev = 0.0;
    for (double e = 1.0; e < 1e8; e *= 3.7)
    {
        double const v = electron_velocity(e);
        CHECK(v > prev);
        CHECK(v < c0);
        prev = v;
    }
    CHECK_THROWS_AS(electron_velocity(-1.0), DomainError);
    CHECK_THROWS_AS(electron_velocity(std::nan("")), DomainError);
}

TEST_CASE("bus coupling efficiency")
{
    CHECK(bus_coupling_efficiency(1.0, 1.0) == 0.5);
    CHECK(bus_coupling_efficiency(1.0, 0.0) == 0.0);
    CHECK(bus_coupling_efficiency(0.83, 0.17) == doctest::Approx(0.17));
    CHECK_THROWS_AS(bus_coupling_efficiency(0.0, 0.0), DomainError);
    CHECK_THROWS_AS(bus_coupling_efficiency(-1.0, 1.0), DomainError);

    double prev = -1.0;
    for (double kex = 0.0; kex < 10.0; kex += 0.25)
    {
        double const eta = bus_coupling_efficiency(1.0, kex);
        CHECK(eta >= 0.0);
        CHECK(eta <= 1.0);
        CHECK(eta > prev);
        prev = eta;
    }
    prev = 2.0;
    for (double k0 = 0.0; k0 < 10.0; k0 += 0.25)
    {
        double const eta = bus_coupling_efficiency(k0, 1.0);
        CHECK(eta < prev);
        prev = eta;
    }
}

TEST_CASE("cavity lifetime")
{
    double const omega = constants::two_pi * c0 / 1550e-9;
    double const tau = cavity_lifetime(5.5e5, omega);
    CHECK(tau == doctest::Approx(5.5e5 / omega));
    CHECK(tau == doctest::Approx(0.45e-9).epsilon(0.01));
    CHECK(cavity_lifetime(11e5, omega) == doctest::Approx(2 * tau));
    CHECK(cavity_lifetime(5.5e5, 2 * omega) == doctest::Approx(tau / 2));
    CHECK_THROWS_AS(cavity_lifetime(0.0, omega), DomainError);
}

TEST_CASE("saturation correction")
{
    CHECK(saturation_correct(0.0, 10e-6) == 0.0);
    CHECK(saturation_correct(5e4, 10e-6) == doctest::Approx(1e5));
    CHECK_THROWS_AS(saturation_correct(1e5, 10e-6), SaturationError);
    CHECK_THROWS_AS(saturation_correct(-1.0, 10e-6), DomainError);

    double prev = -1.0;
    for (double r = 0.0; r < 9e4; r += 1e3)
    {
        double const t = saturation_correct(r, 10e-6);
        CHECK(t > prev);
        CHECK(saturation_correct(dead_time_throughput(t, 10e-6), 10e-6)
              == doctest::Approx(t));
        prev = t;
    }
}

TEST_CASE("mode comb")
{
    CombSpec spec;
    auto comb = ModeComb::generate(spec);
    REQUIRE(comb.size() > 100);
    for (std::size_t i = 0; i < comb.size(); ++i)
    {
        auto const& m = comb[i];
        CHECK(m.wavelength() >= spec.min_wavelength);
        CHECK(m.wavelength() <= spec.max_wavelength);
        CHECK(m.quality_factor() == doctest::Approx(spec.quality_factor).epsilon(1e-9));
        CHECK(bus_coupling_efficiency(m.intrinsic_loss_rate, m.external_coupling_rate)
              == doctest::Approx(0.17));
        if (i > 0)
        {
            CHECK(m.wavelength() < comb[i - 1].wavelength());
            CHECK(m.frequency_hz() - comb[i - 1].frequency_hz()
                  == doctest::Approx(spec.free_spectral_range_hz).epsilon(1e-6));
        }
    }
    auto anchor = comb[comb.nearest(1550e-9)];
    CHECK(anchor.index == 0);
    CHECK(anchor.wavelength() == doctest::Approx(1550e-9).epsilon(1e-12));

    std::vector<OpticalMode> bad{comb[0], comb[2]};
    CHECK_THROWS_AS(ModeComb(bad, spec.free_spectral_range_hz), ConfigError);

    OpticalMode m = comb[0];
    m.decay_length = 0.0;
    CHECK_THROWS_AS(validate(m), ConfigError);
}
