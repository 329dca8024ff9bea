#pragma once

#include "qdeloc/config.hpp"
#include "qdeloc/series.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace qdeloc::harness {

struct RunResult {
    ObservableSeries series;
    /// Files written, the manifest last.
    std::vector<std::string> outputs;
    double wall_seconds = 0.0;
    nlohmann::json manifest;
};

/// Validate, dispatch to the engine and append rows to CSV as each grid point finishes.
/// Outputs and manifest.json go to config.run_dir (default: the output file's directory).
RunResult run(const ExperimentConfig &config);

/// Same dispatch without the manifest; appends the written files to `files`.
ObservableSeries run_series(const ExperimentConfig &config, std::vector<std::string> &files);

/// Library and compiler versions for manifests.
nlohmann::json build_versions();

/// Write manifest.json into dir. Returns its path.
std::string write_manifest(const std::string &dir, const nlohmann::json &manifest);

/// Where run() places its CSV for the given config.
std::string output_path(const ExperimentConfig &config);
std::string run_directory(const ExperimentConfig &config);

} // namespace qdeloc::harness
