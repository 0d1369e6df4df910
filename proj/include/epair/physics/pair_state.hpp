#pragma once

#include <complex>
#include <vector>

namespace epair::physics
{
//---------------------------------------------------------------------------//
/*!
 * Joint electron-photon state after one pass, truncated at max_order photons.
 *
 * Coefficient c_n multiplies |E - n hbar w>|n>; the photon number is Poisson
 * distributed with mean |g|^2.
 */
struct PairState
{
    std::complex<double> g{};
    int max_order = 8;
    double photon_energy_ev = 0.0;
    std::vector<std::complex<double>> coefficients;

    //! |c_n|^2, zero beyond the truncation order
    double probability(int n) const;
    //! Sum of |c_n|^2 over the retained orders
    double norm() const;
    double mean_photon_number() const;
    //! Electron energy accompanying n photons, for an initial energy [eV]
    double electron_energy(double initial_ev, int n) const
    {
        return initial_ev - n * photon_energy_ev;
    }
};

// Build the Poissonian pair state; throws DomainError if max_order < 1.
PairState pair_state(std::complex<double> g, double photon_energy_ev, int max_order = 8);
}  // namespace epair::physics
