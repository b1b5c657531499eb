#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "stm/errors.hpp"
#include "stm/field.hpp"
#include "stm/quantization.hpp"
#include "stm/spline.hpp"

namespace stm {

/// Level-placement schemes.
///  USG:     uniform levels, adapted Δ, range discovered from reconstructions.
///  LMFixed: Lloyd-Max levels against the true pdf and range, Δ held constant.
///  LMSG:    Lloyd-Max levels against the estimated pdf, adapted Δ.
enum class Scheme { USG, LMFixed, LMSG };

std::string_view to_string(Scheme scheme);
Scheme parse_scheme(std::string_view text);

constexpr bool adapts_delta(Scheme s) { return s != Scheme::LMFixed; }
constexpr bool uses_lloyd_max(Scheme s) { return s != Scheme::USG; }
constexpr bool knows_truth(Scheme s) { return s == Scheme::LMFixed; }

struct DeltaState {
    double delta = 0.0;
    std::vector<double> error_history;
    /// Set to use the un-normalized step-size update instead of the normalized one.
    std::optional<double> mu;
};

struct Report {
    int sensor_id = 0;
    Point2 position;
    double value = 0.0;
    std::vector<std::size_t> matched_levels;
};

/// Sensors whose reading lies within Δ of at least one level. Each sensor appears once.
struct ReportingSet {
    std::vector<Report> reports;

    std::size_t cost() const { return reports.size(); }
};

/// Reads `probe_count` distinct, uniformly chosen sensors and returns (min, max) of their
/// readings. Throws ContractError when probe_count < 2 or exceeds the sensor count.
ValueRange initial_range_probe(const SensorDeployment& deployment, const ObservationSet& observations,
                               std::size_t probe_count, std::uint64_t rng_seed);

ReportingSet query_sensors(const SensorDeployment& deployment, const ObservationSet& observations,
                           const ContourLevelSet& levels, double delta);

/// Normalized update: delta_prev * (1 + (e1 - e2) / (e1 + e2)), where e1 is the most
/// recent error. Returns delta_prev unchanged when both errors are below 1e-12.
/// Throws ContractError for non-positive delta or errors.
double update_delta(double delta_prev, double err_prev, double err_prev2);

/// Step-size update: delta_prev * (1 + mu (e1 - e2)). A non-positive result is clamped to
/// `delta_floor` with a warning on std::clog.
double update_delta_mu(double delta_prev, double err_prev, double err_prev2, double mu,
                       double delta_floor);

inline constexpr double kZeroErrorGuard = 1e-12;

struct MonitoringConfig {
    Scheme scheme = Scheme::LMSG;
    std::size_t initial_m = 3;
    std::size_t m_max = 25;
    std::size_t probe_count = 2;
    /// Stop early once Error_n < eps_stop * (L_max - L_min) twice in a row. 0 disables.
    double eps_stop = 0.01;
    std::size_t pdf_bins = 64;
    GridSpec grid;
    /// Multiplies the half-spacing initial Δ; the Δ sweep varies this.
    double initial_delta_scale = 1.0;
    /// Δ is clamped below at this fraction of the current range.
    double delta_floor_fraction = 1e-6;
    /// Use the step-size (mu) update instead of the normalized one.
    std::optional<double> mu;
    /// Re-adapt Δ during temporal monitoring. Off: Δ stays at its spatial value.
    bool temporal_adapt_delta = false;
    LloydMaxOptions lloyd_max;
};

struct IterationRecord {
    std::size_t n = 0;
    std::size_t m = 0;
    double delta = 0.0;
    std::size_t reports = 0;
    std::size_t cumulative_cost = 0;
    double error_proxy = 0.0;
    double error_vs_truth = 0.0;
    double range_min = 0.0;
    double range_max = 0.0;
    bool reconstructed = false;
};

struct PeriodRecord {
    std::size_t period = 0;
    std::size_t m = 0;
    double delta = 0.0;
    std::size_t reports = 0;
    double fraction = 0.0;
    double error_proxy = 0.0;
    double error_vs_truth = 0.0;
};

struct MonitoringReport {
    std::size_t sensor_count = 0;
    std::vector<IterationRecord> iterations;
    std::vector<PeriodRecord> periods;
};

/// True field sampled on the monitoring grid, with its histogram pdf and range. Used for
/// error_vs_truth and as the known pdf/range of the LM-fixed scheme.
struct GroundTruth {
    Reconstruction grid;
    EmpiricalPdf pdf;
    ValueRange range;
};

GroundTruth ground_truth(const SyntheticFieldModel& model, const GridSpec& grid, std::size_t pdf_bins);

struct MonitoringState {
    Scheme scheme = Scheme::LMSG;
    ContourLevelSet level_set;
    DeltaState delta_state;
    std::optional<Reconstruction> last_reconstruction;
    std::optional<EmpiricalPdf> last_pdf;
    std::size_t iteration = 0;
    std::vector<std::size_t> cost_log;
    std::vector<IterationRecord> history;
    /// Reuses the spline factorization while the reporting sensors stay the same.
    SplineSolver solver;

    std::size_t m() const { return level_set.size(); }
    ValueRange range() const { return {level_set.range_min, level_set.range_max}; }
};

/// A failure inside a monitoring pass, with the state as it was before the pass.
class IterationError : public Error {
public:
    IterationError(const std::string& what, MonitoringState state)
        : Error(what), snapshot(std::move(state)) {}

    MonitoringState snapshot;
};

/// Steps 2-3: M uniform levels inside `initial_range` and Δ = scale * (l_2 - l_1) / 2.
MonitoringState initialize_monitoring(const MonitoringConfig& config, ValueRange initial_range);

struct IterationInputs {
    const SensorDeployment& deployment;
    const ObservationSet& observations;
    /// Required for LM-fixed; when present also fills error_vs_truth.
    const GroundTruth* truth = nullptr;
};

/// One pass of steps 4-11: query, reconstruct, error, range, pdf, Δ, M <- M + 1, levels.
MonitoringState spatial_iteration(const MonitoringConfig& config, MonitoringState state,
                                  const IterationInputs& inputs);

struct SpatialOutcome {
    MonitoringState state;
    MonitoringReport report;
};

/// Observation epoch numbering: the probe reads epoch 0, spatial iteration n reads epoch n,
/// temporal period p reads kTemporalEpochBase + p.
inline constexpr std::uint64_t kTemporalEpochBase = 1'000'000;

/// Steps 1-12: probe the range, initialize, iterate until M reaches m_max or the error
/// drops below eps_stop for two consecutive iterations.
SpatialOutcome run_spatial_monitoring(const MonitoringConfig& config, const SyntheticFieldModel& field,
                                      const SensorSimulator& sensors, std::uint64_t probe_seed);

/// Periodic tracking with M (and, by default, Δ) frozen. Period p observes
/// field_sequence[p - 1]. Returns the spatial report extended with period records.
MonitoringReport run_temporal_monitoring(const MonitoringConfig& config, MonitoringState state,
                                         std::span<const SyntheticFieldModel> field_sequence,
                                         const SensorSimulator& sensors, MonitoringReport report = {});

}  // namespace stm
