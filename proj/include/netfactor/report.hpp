#pragma once

#include "netfactor/inference.hpp"
#include "netfactor/simulate.hpp"

#include <json.hpp>

#include <string>
#include <utility>
#include <vector>

namespace netfactor::report {

/// Provenance record written as manifest.json in every output directory.
/// Wall-clock timings are included only when recordTimings is set, so that
/// identical runs produce identical bytes by default.
struct RunManifest {
    std::string command;
    nlohmann::json options = nlohmann::json::object();
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, std::string>> inputs;  ///< path, digest
    std::vector<std::string> warnings;
    std::vector<std::pair<std::string, double>> timings;
    std::vector<std::string> outputs;
    bool recordTimings = false;
};

void ensure_directory(const std::string& dir);
void write_text(const std::string& path, const std::string& text);
void write_manifest(const std::string& dir, const RunManifest& manifest);

nlohmann::json test_report_json(const TestReport& report);

struct FitArtifactOptions {
    double ciLevel = 0.95;
    int topCount = 15;
    std::vector<std::string> columns;  ///< covariate names; numbered when empty
};

/// Loadings, factors, alpha, Psi, mu, EM trace, spectrum, confidence intervals,
/// top-loading tables and plots, and test_report.json. Returns the file names.
std::vector<std::string> write_fit_artifacts(const std::string& dir, const PipelineResult& result,
                                             const FitArtifactOptions& opts);

/// records.csv, summary.csv, dims_table.csv and trend plots (plots only when
/// there is at least one record). Returns the file names.
std::vector<std::string> write_benchmark(const std::string& dir, const BenchResult& result, bool recordTimings);

/// Ground-truth parameters of a simulated dataset as CSV files.
std::vector<std::string> write_truth(const std::string& dir, const ModelParams& truth);

}  // namespace netfactor::report
