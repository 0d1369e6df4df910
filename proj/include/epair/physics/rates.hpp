#pragma once

namespace epair::physics
{
// Invert non-paralyzable dead-time loss: R_meas / (1 - R_meas * tau).
// Throws SaturationError when R_meas * tau >= 1, DomainError on negative input.
double saturation_correct(double measured_rate, double dead_time);

// Expected measured rate for a true Poisson rate: R / (1 + R * tau).
double dead_time_throughput(double true_rate, double dead_time);
}  // namespace epair::physics
