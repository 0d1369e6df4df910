#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "histogram.hpp"

namespace epair::analysis
{
//! Coincidence time gate; the center is found from the peak when unset.
struct TimeGate
{
    std::optional<double> center;  //!< [s]
    double half_width = 2.5e-9;  //!< [s]
};

//! Energy-loss gate [eV], inclusive of bins whose centers fall inside.
struct EnergyGate
{
    double lo_ev = 0.5;
    double hi_ev = 1.2;
};

//! Delay ranges used to estimate the accidental floor: |Delta t| in [inner, outer].
struct Sidebands
{
    double inner = 200e-9;
    double outer = 600e-9;
};

//! Accidental floor per energy bin, in counts per time bin.
struct BackgroundEstimate
{
    std::vector<double> per_time_bin;
    std::size_t sideband_bins = 0;
};

// Throws EstimationError when the sidebands cover no histogram bins.
BackgroundEstimate background_estimate(CoincidenceHistogram const& h,
                                       Sidebands const& sb = {});

//! Gate-dependent true-coincidence fraction 1 - R_acc/R_pe.
struct FractionMap
{
    std::vector<double> half_widths;  //!< [s]
    std::vector<double> energy_widths;  //!< [eV], gates centered on the peak energy
    std::vector<double> fraction;  //!< row-major [half_width][energy_width]
    double best = 0.0;
    double best_half_width = 0.0;
    double best_energy_lo = 0.0;
    double best_energy_hi = 0.0;
};

FractionMap true_fraction_map(CoincidenceHistogram const& h,
                              BackgroundEstimate const& bg,
                              double time_center,
                              double energy_center,
                              std::span<double const> half_widths,
                              std::span<double const> energy_widths,
                              double min_counts = 100.0);

//! Coincidence-to-accidental ratio with an undefined flag for R_acc = 0.
struct CarValue
{
    double value = 0.0;
    bool undefined = false;
};
CarValue car(double r_pe, double r_acc);

//! Klyshko efficiencies: photon (R_pe/R_e) and electron (R_pe/R_p).
struct KlyshkoPair
{
    double photon = 0.0;
    double electron = 0.0;
};
KlyshkoPair klyshko(double r_pe, double r_e, double r_p);

//! eta_K/(eta_D T), clamped to 1 with a flag when it exceeds 1.
struct IntrinsicValue
{
    double value = 0.0;
    bool clamped = false;
};
IntrinsicValue intrinsic_heralding(double eta_k, double eta_d, double transmission);

//! Profile of counts per time bin and its bin width.
struct TimeProfile
{
    std::vector<double> counts;
    double bin_width = 0.0;  //!< [s]
    double origin = 0.0;  //!< lower edge of bin 0 [s]
};

// Counts summed over the energy gate, background subtracted when bg given.
TimeProfile time_profile(CoincidenceHistogram const& h,
                         EnergyGate const& gate,
                         BackgroundEstimate const* bg = nullptr);

// Centered moving average over an odd number of bins.
TimeProfile smooth(TimeProfile const& profile, std::size_t width);

//! Boxcar width applied before reading the FWHM off a histogram
inline constexpr std::size_t fwhm_smoothing_bins = 5;

// FWHM [s] by linear interpolation between half-maximum crossings.
// Throws DetectionError unless the peak exceeds 5 sigma of the floor.
double peak_fwhm(TimeProfile const& profile, double floor_sigma);
double peak_fwhm(CoincidenceHistogram const& h, EnergyGate const& gate);

// Exponential decay constant [s] of a background-free profile tail starting
// at bin `start`, by maximum likelihood for a truncated geometric law.
double decay_constant(TimeProfile const& profile, std::size_t start, std::size_t bins);

//! Known detection efficiencies used to turn eta_K into eta_I.
struct Efficiencies
{
    double electron_detector = 0.9;  //!< eta_D^e
    double electron_transmission = 1.0;  //!< T_e
    double photon_detector = 0.25;  //!< eta_D^p
    double photon_transmission = 0.00736;  //!< T_p
};

struct Measured
{
    double value = 0.0;
    double sigma = 0.0;
};

struct HeraldingReport
{
    double duration = 0.0;
    double time_center = 0.0;
    double half_width = 0.0;
    EnergyGate energy_gate;
    Measured r_e;  //!< gated electron rate [1/s]
    Measured r_p;  //!< photon rate [1/s]
    Measured r_pe;  //!< gated coincidence rate [1/s]
    Measured r_acc;  //!< accidental rate in the same gate [1/s]
    Measured car;
    bool car_undefined = false;
    Measured eta_k_photon;
    Measured eta_k_electron;
    Measured eta_i_photon;
    Measured eta_i_electron;
    bool eta_i_clamped = false;
    double true_fraction = 0.0;
    double max_true_fraction = 0.0;
    double fwhm = 0.0;  //!< [s]
    bool peak_found = false;
    bool klyshko_undefined = false;
};

HeraldingReport heralding_report(CoincidenceHistogram const& h,
                                 TimeGate const& tgate,
                                 EnergyGate const& egate,
                                 Efficiencies const& eff = {},
                                 Sidebands const& sb = {});
}  // namespace epair::analysis
