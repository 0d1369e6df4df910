#include "doctest.h"

#include <cmath>

#include "epair/error.hpp"
#include "epair/physics/pair_state.hpp"

using namespace epair;
using namespace epair::physics;

TEST_CASE("vacuum coupling leaves the electron unscattered")
{
    auto const s = pair_state(0.0, 0.8, 8);
    CHECK(s.coefficients[0] == std::complex<double>(1.0, 0.0));
    for (int n = 1; n <= 8; ++n)
    {
        CHECK(s.coefficients[n] == std::complex<double>{});
        CHECK(s.probability(n) == 0.0);
    }
    CHECK(s.norm() == 1.0);
}

TEST_CASE("single-photon probability at g = 0.03")
{
    auto const s = pair_state(0.03, 0.8, 12);
    double const lambda = 9e-4;
    double const p1 = std::exp(-lambda) * lambda;
    CHECK(s.probability(1) == doctest::Approx(p1).epsilon(1e-14));
    CHECK(s.probability(1) == doctest::Approx(8.992e-4).epsilon(1e-4));
    CHECK(std::abs(s.probability(1) - lambda) < lambda * lambda);
    CHECK(std::abs(s.probability(1) / s.probability(0) - lambda) <= 1e-15 * lambda);
    CHECK(std::norm(s.coefficients[1]) == doctest::Approx(p1).epsilon(1e-14));
    CHECK(s.electron_energy(120e3, 1) == 120e3 - 0.8);
}

TEST_CASE("Poisson normalization and mean")
{
    for (double mag = 0.0; mag <= 0.3; mag += 0.01)
    {
        for (double phase : {0.0, 1.0, -2.5})
        {
            auto const g = std::polar(mag, phase);
            auto const s = pair_state(g, 0.8, 12);
            CHECK(s.norm() <= 1.0 + 1e-15);
            CHECK(s.norm() >= 1.0 - 1e-12);
            double coeff_norm = 0.0;
            for (auto c : s.coefficients)
                coeff_norm += std::norm(c);
            CHECK(coeff_norm == doctest::Approx(s.norm()).epsilon(1e-13));
            if (mag > 0.0)
            {
                CHECK(std::abs(s.mean_photon_number() - mag * mag)
                      <= 1e-10 * mag * mag);
            }
            // c_n phase is n * arg(g)
            CHECK(std::arg(s.coefficients[1] * std::conj(g)) == doctest::Approx(0.0));
        }
        CHECK(pair_state(mag, 0.8, 8).norm() >= 1.0 - 1e-12);
    }
}

TEST_CASE("truncation order validation")
{
    CHECK_THROWS_AS(pair_state(0.1, 0.8, 0), DomainError);
    auto const s = pair_state(0.1, 0.8, 1);
    CHECK(s.coefficients.size() == 2);
    CHECK(s.probability(2) == 0.0);
    CHECK(s.probability(-1) == 0.0);
}
