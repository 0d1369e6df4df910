#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "epair/io/event_stream.hpp"
#include "epair/physics/coupling.hpp"
#include "epair/physics/optical_mode.hpp"
#include "epair/physics/spectrum.hpp"
#include "epair/physics/trajectory.hpp"

namespace epair::mc
{
using Rng = std::mt19937_64;

// Independent 64-bit seed for a numbered sub-stream of a master seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

//---------------------------------------------------------------------------//
struct BeamSpec
{
    double electron_rate = 1e8;  //!< [1/s]
    double kinetic_energy_ev = 120e3;
    double zlp_fwhm_ev = 0.5;
    double impact_parameter = 160e-9;  //!< [m]
    double lateral_offset = 0.0;  //!< [m]

    static double rate_from_current(double amperes);
    void validate() const;
};

struct SpadSpec
{
    double efficiency = 0.25;
    double dead_time = 50e-6;  //!< [s]
    double dark_rate = 130.0;  //!< [1/s]
    double jitter_fwhm = 150e-12;  //!< [s]
    double delay = 0.0;  //!< fixed propagation and electronic delay [s]
    std::uint8_t channel = 0;

    void validate() const;
};

//! Energy-loss window blocked by the spectrometer slit [eV].
struct SlitWindow
{
    double lo_ev = -1e9;
    double hi_ev = 0.55;

    bool blocks(double loss_ev) const { return loss_ev >= lo_ev && loss_ev <= hi_ev; }
};

struct ElectronDetectorSpec
{
    std::uint16_t width = io::pixel_grid_size;
    std::uint16_t height = io::pixel_grid_size;
    double dispersion_ev_per_px = 0.11;
    double zlp_pixel = 100.0;  //!< x position of zero energy loss [px]
    double mean_hits = 4.0;  //!< per cluster, at least one
    int cluster_radius_px = 1;  //!< hits fall in a (2r+1)^2 neighborhood
    double skew_max = 13.5e-9;  //!< in-cluster hit delay ~ U[0, skew_max] [s]
    double offset_spread = 8e-9;  //!< full width of random pixel offsets [s]
    //! Per-pixel ToA offsets [s], row-major width x height; empty = random
    std::vector<double> offset_map;
    std::uint64_t offset_seed = 1;  //!< seeds the random offsets; fixed per device
    double saturation_hits_per_s = 120e6;
    std::optional<SlitWindow> slit;
    double efficiency = 0.9;  //!< eta_D^e
    double delay = 0.0;  //!< [s]

    void validate() const;
};

struct SimConfig
{
    BeamSpec beam;
    physics::ModeComb comb = physics::ModeComb::generate({});
    physics::PassGeometry geometry = physics::RingPass{};
    physics::CouplingCalibration calibration;
    physics::LossChain photon_chain;
    physics::SensitivityCurve sensitivity = physics::SensitivityCurve::flat();
    SpadSpec spad;
    ElectronDetectorSpec electron;
    double duration = 1.0;  //!< [s]
    std::uint64_t seed = 1;
    bool record_ground_truth = false;
    unsigned threads = 1;
    double slab_duration = 1e-3;  //!< fixed work unit [s]

    physics::Trajectory trajectory() const;
    void validate() const;
};

//---------------------------------------------------------------------------//
//! Per-mode emission and detection law for one beam position.
struct EmissionModel
{
    std::vector<double> probability;  //!< |g|^2
    std::vector<double> photon_energy_ev;
    std::vector<double> detection;  //!< P(avalanche | photon in mode)
    std::vector<double> lifetime;  //!< cavity photon lifetime [s]
    double total = 0.0;
    bool clipped = false;
    bool uncovered = false;  //!< some mode outside the sensitivity table

    static EmissionModel build(SimConfig const& cfg);
    static EmissionModel
    build(SimConfig const& cfg, physics::CouplingResult const& coupling);
};

//! One photon emitted by a simulated electron.
struct PhotonRecord
{
    std::uint32_t electron = 0;
    std::uint16_t mode = 0;
    double emission_time = 0.0;  //!< leaves the cavity [s]
    bool detected = false;  //!< survived the chain and fired the SPAD
    bool registered = false;  //!< also survived dead time
};

struct ElectronRecord
{
    double time = 0.0;  //!< passes the resonator [s]
    double energy_loss_ev = 0.0;  //!< sum of emitted photon energies
    double measured_loss_ev = 0.0;  //!< including ZLP broadening
    std::uint32_t first_photon = 0;
    std::uint32_t photon_count = 0;
    std::uint32_t hits = 0;
    bool electron_detected = false;
    bool photon_detected = false;  //!< any photon registered
};

struct GroundTruth
{
    std::vector<ElectronRecord> electrons;
    std::vector<PhotonRecord> photons;
};

struct RunStats
{
    std::uint64_t electrons = 0;  //!< all arrivals, including silent ones
    std::uint64_t simulated_electrons = 0;
    std::uint64_t scattered_electrons = 0;
    std::uint64_t photons_emitted = 0;
    std::uint64_t photons_detected = 0;  //!< before dead time
    std::uint64_t dark_counts = 0;  //!< before dead time
    std::uint64_t avalanches = 0;  //!< registered after dead time
    std::uint64_t electrons_detected = 0;
    std::uint64_t hits = 0;
    std::uint64_t hits_dropped = 0;
    double expected_hit_rate = 0.0;
    bool saturated = false;
    double scattering_probability = 0.0;
};

struct SimResult
{
    io::EventStream stream;
    GroundTruth truth;
    RunStats stats;
};

// Throws ModelValidityError when the summed emission probability is >= 0.5.
SimResult simulate_run(SimConfig const& cfg);
SimResult simulate_run(SimConfig const& cfg, EmissionModel const& model);

// Pixel offsets [s] actually used by a run with this config.
std::vector<double> pixel_offsets(SimConfig const& cfg);

//! Pulsed-beam reference acquisition for per-pixel time calibration.
struct PulsedSpec
{
    double period = 1e-6;  //!< [s]
    std::uint64_t pulses = 100000;
    double electrons_per_pulse = 1.0;  //!< Poisson mean
    std::uint16_t roi_x = 0;
    std::uint16_t roi_y = 0;
    std::uint16_t roi_width = 16;
    std::uint16_t roi_height = 16;
    std::uint8_t marker_channel = 1;
};

io::EventStream simulate_pulsed(SimConfig const& cfg, PulsedSpec const& pulsed);

//---------------------------------------------------------------------------//
// Independent Poisson draw per mode.
std::vector<unsigned>
sample_scattering(std::span<double const> probabilities, Rng& rng);

// Greedy non-paralyzable filter; throws ContractError if times are unsorted.
std::vector<double> apply_dead_time(std::span<double const> times, double dead_time);

// Ground truth as CSV, one row per simulated electron.
std::string ground_truth_csv(GroundTruth const& truth);
}  // namespace epair::mc
