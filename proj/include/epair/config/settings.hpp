#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "epair/analysis/calibration.hpp"
#include "epair/analysis/pipeline.hpp"
#include "epair/imaging/scan.hpp"
#include "epair/mc/simulation.hpp"

namespace epair::config
{
//! Beam positions for a coupling scan.
struct CoupleScan
{
    std::vector<double> distances{50e-9, 160e-9};  //!< [m]
    std::vector<double> offsets{0.0};  //!< [m]
};

//! Everything a configuration file can describe, with defaults filled in.
struct Settings
{
    mc::SimConfig sim;
    mc::PulsedSpec pulsed;
    analysis::AnalysisOptions analysis;
    analysis::CalibrationOptions calibration;
    std::optional<std::filesystem::path> offsets_file;
    imaging::ScanGrid scan;
    imaging::ImagingGates imaging;
    CoupleScan couple;
    //! Filter used for single-mode gating, whether or not the chain applies it
    physics::SpectralFilter single_mode_filter;
    //! Every key and raw value, for run manifests
    std::map<std::string, std::string> snapshot;
};

/*!
 * Build settings from a configuration.
 *
 * beam.impact_parameter and one of beam.electron_rate or beam.current are
 * required. Throws ConfigError naming the key for missing, mistyped, unknown
 * or physically invalid entries; an offsets file named by analysis.offsets is
 * read here.
 */
Settings load_settings(Config const& cfg);
}  // namespace epair::config
