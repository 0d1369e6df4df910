#pragma once

#include <optional>
#include <string>
#include <vector>

#include "calibration.hpp"
#include "clustering.hpp"
#include "histogram.hpp"
#include "metrics.hpp"
#include "json.hpp"

namespace epair::analysis
{
struct AnalysisOptions
{
    SpectrometerAxis spectrometer;
    ClusterOptions cluster;
    double window = 600e-9;  //!< correlation half-width [s]
    double delay = 0.0;  //!< [s]
    double duration = 0.0;  //!< [s]; 0 reads the stream metadata or data span
    std::uint8_t photon_channel = 0;
    unsigned threads = 1;
    std::optional<OffsetMap> offsets;
    std::optional<DriftCorrection> drift;
    TimeGate time_gate;
    EnergyGate energy_gate;
    Sidebands sidebands;
    Efficiencies efficiencies;
};

struct AnalysisResult
{
    std::vector<ElectronEvent> electrons;
    CoincidenceHistogram histogram;
    HeraldingReport report;
};

// Cluster, correlate, and summarize one event stream.
AnalysisResult analyze(io::EventStream const& stream, AnalysisOptions const& opts);

// Run duration recorded in the stream metadata, if any.
std::optional<double> metadata_duration(io::EventStream const& stream);

nlohmann::json to_json(HeraldingReport const& r);
}  // namespace epair::analysis
