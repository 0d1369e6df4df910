#include "epair/physics/rates.hpp"

#include "epair/error.hpp"

namespace epair::physics
{
double saturation_correct(double measured_rate, double dead_time)
{
    if (!(measured_rate >= 0.0) || !(dead_time >= 0.0))
    {
        throw DomainError("rate and dead time must be non-negative");
    }
    double const occupancy = measured_rate * dead_time;
    if (occupancy >= 1.0)
    {
        throw SaturationError("measured rate saturates the detector");
    }
    return measured_rate / (1.0 - occupancy);
}

double dead_time_throughput(double true_rate, double dead_time)
{
    if (!(true_rate >= 0.0) || !(dead_time >= 0.0))
    {
        throw DomainError("rate and dead time must be non-negative");
    }
    return true_rate / (1.0 + true_rate * dead_time);
}
}  // namespace epair::physics
