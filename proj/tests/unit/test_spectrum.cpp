#include "doctest.h"

#include <cmath>

#include "epair/constants.hpp"
#include "epair/error.hpp"
#include "epair/physics/spectrum.hpp"

using namespace epair;
using namespace epair::physics;

TEST_CASE("sensitivity curve interpolation")
{
    SensitivityCurve s({{1500e-9, 0.2}, {1600e-9, 0.4}, {1550e-9, 0.3}});
    CHECK(s(1500e-9) == doctest::Approx(0.2));
    CHECK(s(1525e-9) == doctest::Approx(0.25));
    CHECK(s(1600e-9) == doctest::Approx(0.4));
    CHECK(s(1601e-9) == 0.0);
    CHECK_FALSE(s.covers(1499e-9));
    CHECK(SensitivityCurve::flat()(123e-9) == 1.0);
    CHECK_THROWS_AS(SensitivityCurve({{1500e-9, 1.5}}), ConfigError);

    auto csv = SensitivityCurve::from_csv("wavelength_nm,efficiency\n1500,0.1\n1600,0.3\n");
    CHECK(csv(1550e-9) == doctest::Approx(0.2));
    CHECK_THROWS_AS(SensitivityCurve::from_csv("1500,0.1\nbad\n"), ConfigError);
}

TEST_CASE("loss chain")
{
    LossChain chain{{{"a", 0.5}, {"b", 0.4}}, {}};
    CHECK(chain.total() == doctest::Approx(0.2));
    CHECK(chain.transmission(1500e-9) == doctest::Approx(0.2));
    chain.filter = SpectralFilter{1550e-9, 100e9, 1.0};
    CHECK(chain.transmission(1550e-9) == doctest::Approx(0.2));
    double const c0 = constants::speed_of_light;
    double const half = c0 / (c0 / 1550e-9 + 50e9);
    CHECK(chain.transmission(half) == doctest::Approx(0.1));
    chain.stages.push_back({"bad", 1.2});
    CHECK_THROWS_AS(chain.validate(), ConfigError);
}

TEST_CASE("emission spectrum")
{
    CombSpec spec;
    spec.coupling_efficiency = 1.0;
    auto const comb = ModeComb::generate(spec);
    Trajectory t;
    auto const coupling = total_scattering_probability(comb, t);

    auto const ideal = emission_spectrum(comb, coupling, {}, SensitivityCurve::flat());
    for (std::size_t i = 0; i < comb.size(); ++i)
    {
        CHECK(ideal.probability[i] == std::norm(coupling.per_mode[i]));
    }
    CHECK_FALSE(ideal.uncovered_warning());

    // Detector response only between 1520 and 1620 nm.
    SensitivityCurve spad({{1400e-9, 0.0},
                           {1519.9e-9, 0.0},
                           {1520e-9, 0.8},
                           {1620e-9, 0.8},
                           {1620.1e-9, 0.0},
                           {1800e-9, 0.0}});
    LossChain chain{{{"fiber", 0.5}}, {}};
    auto const env = emission_spectrum(comb, coupling, chain, spad);
    for (std::size_t i = 0; i < comb.size(); ++i)
    {
        double const wl = env.wavelength[i];
        CHECK(env.probability[i] >= 0.0);
        CHECK(env.probability[i] <= env.coupling_probability[i]);
        if (wl < 1519.9e-9 || wl > 1620.1e-9)
            CHECK(env.probability[i] == 0.0);
        else if (wl > 1520e-9 && wl < 1620e-9)
            CHECK(env.probability[i] > 0.0);
    }

    SensitivityCurve narrow({{1540e-9, 0.5}, {1560e-9, 0.5}});
    auto const partial = emission_spectrum(comb, coupling, chain, narrow);
    CHECK(partial.uncovered_warning());
    for (auto i : partial.uncovered)
        CHECK(partial.probability[i] == 0.0);
}

TEST_CASE("comb spacing near 1550 nm")
{
    auto const comb = ModeComb::generate(CombSpec{});
    auto const i = comb.nearest(1550e-9);
    double const spacing = comb[i - 1].wavelength() - comb[i].wavelength();
    double const c0 = constants::speed_of_light;
    double const lam = 1550e-9;
    double const fsr = 194e9;
    CHECK(spacing == doctest::Approx(c0 / (c0 / lam - fsr) - lam).epsilon(1e-9));
    CHECK(spacing == doctest::Approx(1.58e-9).epsilon(0.02));
}
