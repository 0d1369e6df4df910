#include "epair/physics/pair_state.hpp"

#include <cmath>

#include "epair/error.hpp"

namespace epair::physics
{
PairState pair_state(std::complex<double> g, double photon_energy_ev, int max_order)
{
    if (max_order < 1)
    {
        throw DomainError("pair state truncation order must be at least 1");
    }
    PairState s;
    s.g = g;
    s.max_order = max_order;
    s.photon_energy_ev = photon_energy_ev;
    s.coefficients.resize(max_order + 1);
    s.coefficients[0] = std::exp(-0.5 * std::norm(g));
    for (int n = 1; n <= max_order; ++n)
    {
        s.coefficients[n] = s.coefficients[n - 1] * g / std::sqrt(double(n));
    }
    return s;
}

double PairState::probability(int n) const
{
    if (n < 0 || n > max_order)
    {
        return 0.0;
    }
    // Poisson mass by recursion, so P(n)/P(n-1) = |g|^2/n to rounding.
    double const lambda = std::norm(g);
    double p = std::exp(-lambda);
    for (int k = 1; k <= n; ++k)
    {
        p *= lambda / k;
    }
    return p;
}

double PairState::norm() const
{
    double sum = 0.0;
    for (int n = max_order; n >= 0; --n)
    {
        sum += probability(n);
    }
    return sum;
}

double PairState::mean_photon_number() const
{
    double sum = 0.0;
    for (int n = max_order; n >= 1; --n)
    {
        sum += n * probability(n);
    }
    return sum;
}
}  // namespace epair::physics
