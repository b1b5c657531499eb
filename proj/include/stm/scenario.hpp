#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "stm/config.hpp"
#include "stm/monitoring.hpp"
#include "stm/text_io.hpp"

namespace stm {

/// Inputs of one replicate. All randomness derives from the master seed and replicate
/// index, so the same replicate is identical across schemes and sweeps.
struct ReplicateSetup {
    std::size_t index = 0;
    std::uint64_t seed = 0;
    SyntheticFieldModel field;
    SensorDeployment deployment;
    std::uint64_t noise_seed = 0;
    std::uint64_t probe_seed = 0;
};

ReplicateSetup prepare_replicate(const ScenarioConfig& config, std::size_t replicate);

/// field_sequence[p] is the model shifted by (p + 1) * drift.
std::vector<SyntheticFieldModel> drift_sequence(const SyntheticFieldModel& start, ComponentSet drifting,
                                                double drift, std::size_t periods);

struct ReplicateResult {
    std::size_t replicate = 0;
    std::uint64_t seed = 0;
    MonitoringReport report;
};

struct ScenarioResult {
    std::vector<ReplicateResult> replicates;
};

/// Spatial then temporal monitoring for every replicate. With a non-empty output_dir,
/// writes manifest.txt, spatial.csv, temporal.csv and delta_trace.csv (the data tables
/// only when at least one replicate ran).
ScenarioResult run_scenario(const ScenarioConfig& config);

struct SchemeAverage {
    Scheme scheme = Scheme::LMSG;
    std::size_t n = 0;
    std::size_t samples = 0;
    double m = 0.0;
    double delta = 0.0;
    double reports = 0.0;
    double cumulative_cost = 0.0;
    double error_proxy = 0.0;
    double error_vs_truth = 0.0;
};

struct SchemeRuns {
    Scheme scheme = Scheme::LMSG;
    std::vector<ReplicateResult> replicates;
};

struct CompareResult {
    std::vector<SchemeRuns> runs;
    std::vector<SchemeAverage> averages;
};

/// Spatial monitoring for each scheme on identical replicates; averages per (scheme, n)
/// across replicates. Writes manifest.txt, compare.csv and compare_mean.csv.
CompareResult compare_schemes(const ScenarioConfig& config, std::span<const Scheme> schemes);

struct SweepResult {
    std::vector<double> scales;
    /// runs[s] holds the replicates started from scales[s] times the default initial Δ.
    std::vector<std::vector<ReplicateResult>> runs;
};

/// Spatial monitoring from several initial Δ values. Writes manifest.txt and sweep.csv.
SweepResult sweep_initial_delta(const ScenarioConfig& config, std::span<const double> scales);

/// Column schemas of the emitted tables.
CsvTable spatial_table(std::span<const ReplicateResult> results);
CsvTable temporal_table(std::span<const ReplicateResult> results);
CsvTable delta_trace_table(std::span<const ReplicateResult> results);
CsvTable compare_table(const CompareResult& result);
CsvTable compare_mean_table(const CompareResult& result);
CsvTable sweep_table(const SweepResult& result);

/// Resolved config followed by '#'-commented per-replicate seeds.
std::string manifest_text(const ScenarioConfig& config, std::string_view verb);

}  // namespace stm
