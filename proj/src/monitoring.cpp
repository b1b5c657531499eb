#include "stm/monitoring.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <iostream>
#include <limits>
#include <random>
#include <string>

#include "stm/errors.hpp"
#include "stm/metrics.hpp"

namespace stm {

namespace {

std::string lowercase_alnum(std::string_view text) {
    std::string out;
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        }
    }
    return out;
}

std::optional<Reconstruction> reconstruct(SplineSolver& solver, const ReportingSet& reports, const GridSpec& grid,
                                         std::size_t n) {
    if (reports.cost() < 2) return std::nullopt;
    std::vector<Point2> points;
    std::vector<double> values;
    points.reserve(reports.cost());
    values.reserve(reports.cost());
    for (const auto& r : reports.reports) {
        points.push_back(r.position);
        values.push_back(r.value);
    }
    try {
        Reconstruction recon = evaluate_spline(solver.fit(points, values), grid);
        recon.iteration = n;
        return recon;
    } catch (const DegenerateInputError&) {
        return std::nullopt;
    }
}

// Step 10 for both loops: M levels from the pdf (Lloyd-Max) or equally spaced.
ContourLevelSet place_levels(const MonitoringConfig& config, Scheme scheme, ValueRange range,
                             const EmpiricalPdf* pdf, std::size_t m) {
    ContourLevelSet initial = uniform_levels(range.min, range.max, m);
    if (!uses_lloyd_max(scheme) || pdf == nullptr) return initial;
    LloydMaxOptions options = config.lloyd_max;
    options.mse_trace = nullptr;
    ContourLevelSet levels;
    try {
        levels = lloyd_max_levels(*pdf, m, initial, options);
    } catch (const LloydMaxNonConvergence& e) {
        // The last iterate still has MSE no worse than the uniform start.
        levels = e.last_iterate;
    }
    levels.range_min = range.min;
    levels.range_max = range.max;
    levels.validate();
    return levels;
}

// Δ for the next query from the two most recent errors, floored at a fraction of the range.
double adapted_delta(const MonitoringConfig& config, const DeltaState& ds, ValueRange range) {
    const auto& h = ds.error_history;
    double delta = ds.delta;
    if (h.size() >= 2) {
        const double e1 = h[h.size() - 1];
        const double e2 = h[h.size() - 2];
        const double floor = config.delta_floor_fraction * range.span();
        if (ds.mu) {
            delta = update_delta_mu(delta, e1, e2, *ds.mu, floor);
        } else if (e1 > 0.0 && e2 > 0.0) {
            delta = update_delta(delta, e1, e2);
        }
        // One zero error (an unchanged reconstruction) leaves Δ where it is.
        delta = std::max(delta, floor);
    }
    return delta;
}

}  // namespace

std::string_view to_string(Scheme scheme) {
    switch (scheme) {
        case Scheme::USG: return "U-SG";
        case Scheme::LMFixed: return "LM-fixed";
        case Scheme::LMSG: return "LM-SG";
    }
    return "?";
}

Scheme parse_scheme(std::string_view text) {
    const std::string key = lowercase_alnum(text);
    if (key == "usg") return Scheme::USG;
    if (key == "lmfixed") return Scheme::LMFixed;
    if (key == "lmsg") return Scheme::LMSG;
    throw ParseError("unknown scheme '" + std::string(text) + "' (expected U-SG, LM-fixed or LM-SG)");
}

ValueRange initial_range_probe(const SensorDeployment& deployment, const ObservationSet& observations,
                               std::size_t probe_count, std::uint64_t rng_seed) {
    if (deployment.sensors.empty() || observations.readings.empty()) {
        throw ContractError("range probe needs a non-empty deployment");
    }
    if (probe_count < 2) throw ContractError("range probe needs at least two sensors");
    const std::size_t n = observations.readings.size();
    if (probe_count > n) {
        throw ContractError("range probe asks for " + std::to_string(probe_count) + " sensors but only " +
                            std::to_string(n) + " exist");
    }
    std::mt19937_64 rng(rng_seed);
    std::vector<std::size_t> pick(n);
    for (std::size_t k = 0; k < n; ++k) pick[k] = k;
    ValueRange range{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (std::size_t k = 0; k < probe_count; ++k) {
        std::uniform_int_distribution<std::size_t> choose(k, n - 1);
        std::swap(pick[k], pick[choose(rng)]);
        const double v = observations.readings[pick[k]].value;
        range.min = std::min(range.min, v);
        range.max = std::max(range.max, v);
    }
    return range;
}

ReportingSet query_sensors(const SensorDeployment& deployment, const ObservationSet& observations,
                           const ContourLevelSet& levels, double delta) {
    if (!(delta > 0.0)) throw ContractError("query margin must be positive");
    const auto index = index_sensors(deployment);
    ReportingSet out;
    for (const auto& reading : observations.readings) {
        const double s = reading.value;
        std::vector<std::size_t> matched;
        for (std::size_t i = 0; i < levels.levels.size(); ++i) {
            const double l = levels.levels[i];
            if (l - delta <= s && s <= l + delta) matched.push_back(i);
        }
        if (matched.empty()) continue;
        const auto it = index.find(reading.sensor_id);
        if (it == index.end()) {
            throw ContractError("reading from unknown sensor " + std::to_string(reading.sensor_id));
        }
        const Sensor& sensor = deployment.sensors[it->second];
        out.reports.push_back({sensor.id, {sensor.x, sensor.y}, s, std::move(matched)});
    }
    return out;
}

double update_delta(double delta_prev, double err_prev, double err_prev2) {
    if (!(delta_prev > 0.0)) throw ContractError("Δ must be positive");
    if (err_prev >= 0.0 && err_prev2 >= 0.0 && err_prev < kZeroErrorGuard && err_prev2 < kZeroErrorGuard) {
        return delta_prev;
    }
    if (!(err_prev > 0.0) || !(err_prev2 > 0.0)) {
        throw ContractError("the normalized Δ update needs positive errors");
    }
    // 1 + (e1 - e2) / (e1 + e2) == 2 e1 / (e1 + e2). The exact multiplier lies strictly
    // inside (0, 2); the clamps only undo rounding at extreme error ratios.
    const double multiplier = std::min(2.0 * err_prev / (err_prev + err_prev2), std::nextafter(2.0, 0.0));
    const double next = delta_prev * multiplier;
    return next > 0.0 ? next : std::numeric_limits<double>::denorm_min();
}

double update_delta_mu(double delta_prev, double err_prev, double err_prev2, double mu, double delta_floor) {
    if (!(delta_prev > 0.0)) throw ContractError("Δ must be positive");
    if (!(mu > 0.0)) throw ContractError("step size mu must be positive");
    const double raw = delta_prev * (1.0 + mu * (err_prev - err_prev2));
    if (!(raw > 0.0)) {
        std::clog << "warning: step-size Δ update gave " << raw << "; clamped to " << delta_floor << '\n';
        return delta_floor;
    }
    return raw;
}

GroundTruth ground_truth(const SyntheticFieldModel& model, const GridSpec& grid, std::size_t pdf_bins) {
    GroundTruth truth;
    truth.grid = sample_grid(grid, [&](double x, double y) { return evaluate_field(model, x, y); });
    truth.range = value_range(truth.grid);
    truth.pdf = estimate_pdf(truth.grid, pdf_bins);
    return truth;
}

MonitoringState initialize_monitoring(const MonitoringConfig& config, ValueRange initial_range) {
    if (!(config.initial_delta_scale > 0.0)) throw ContractError("initial Δ scale must be positive");
    MonitoringState state;
    state.scheme = config.scheme;
    state.level_set = uniform_levels(initial_range.min, initial_range.max, config.initial_m);
    const auto& l = state.level_set.levels;
    const double half_spacing =
        l.size() >= 2 ? 0.5 * (l[1] - l[0]) : 0.25 * (initial_range.max - initial_range.min);
    state.delta_state.delta = config.initial_delta_scale * half_spacing;
    state.delta_state.mu = config.mu;
    return state;
}

MonitoringState spatial_iteration(const MonitoringConfig& config, MonitoringState state,
                                  const IterationInputs& inputs) {
    if (knows_truth(state.scheme) && inputs.truth == nullptr) {
        throw ContractError("the LM-fixed scheme needs the true pdf and range");
    }
    const std::size_t n = state.iteration + 1;

    IterationRecord record;
    record.n = n;
    record.m = state.m();
    record.delta = state.delta_state.delta;

    // Step 4.
    const ReportingSet reports = query_sensors(inputs.deployment, inputs.observations, state.level_set,
                                               state.delta_state.delta);
    record.reports = reports.cost();
    state.cost_log.push_back(reports.cost());

    // Step 5.
    std::optional<Reconstruction> recon;
    try {
        recon = reconstruct(state.solver, reports, config.grid, n);
    } catch (const ConditioningError& e) {
        throw IterationError(std::string("iteration ") + std::to_string(n) + ": " + e.what(), state);
    }
    auto& history = state.delta_state.error_history;
    if (recon) {
        const Reconstruction previous =
            state.last_reconstruction ? *state.last_reconstruction : Reconstruction::zeros(config.grid);
        record.error_proxy = mean_abs_diff(*recon, previous);
        state.last_reconstruction = std::move(recon);
        record.reconstructed = true;
    } else {
        record.error_proxy = history.empty() ? 0.0 : history.back();
    }
    history.push_back(record.error_proxy);
    if (inputs.truth) {
        record.error_vs_truth = state.last_reconstruction
                                    ? mean_abs_diff(*state.last_reconstruction, inputs.truth->grid)
                                    : mean_abs_diff(Reconstruction::zeros(config.grid), inputs.truth->grid);
    } else {
        record.error_vs_truth = std::numeric_limits<double>::quiet_NaN();
    }

    // Steps 6-7.
    ValueRange range = state.range();
    const EmpiricalPdf* pdf = nullptr;
    if (knows_truth(state.scheme)) {
        range = inputs.truth->range;
        pdf = &inputs.truth->pdf;
    } else {
        if (record.reconstructed) {
            const ValueRange fresh = value_range(*state.last_reconstruction);
            if (fresh.span() > 0.0) {
                range = fresh;
                if (uses_lloyd_max(state.scheme)) state.last_pdf = estimate_pdf(*state.last_reconstruction, config.pdf_bins);
            }
        }
        if (uses_lloyd_max(state.scheme) && state.last_pdf) pdf = &*state.last_pdf;
    }

    // Step 8.
    if (adapts_delta(state.scheme)) {
        state.delta_state.delta = adapted_delta(config, state.delta_state, range);
    }

    // Steps 9-10.
    state.level_set = place_levels(config, state.scheme, range, pdf, state.m() + 1);

    record.range_min = range.min;
    record.range_max = range.max;
    record.cumulative_cost = (state.history.empty() ? 0 : state.history.back().cumulative_cost) + record.reports;
    state.iteration = n;
    state.history.push_back(record);
    return state;
}

SpatialOutcome run_spatial_monitoring(const MonitoringConfig& config, const SyntheticFieldModel& field,
                                      const SensorSimulator& sensors, std::uint64_t probe_seed) {
    if (config.m_max < config.initial_m) throw ContractError("M_max must be at least the initial M");
    const SensorDeployment& deployment = sensors.deployment();
    const GroundTruth truth = ground_truth(field, config.grid, config.pdf_bins);

    // Steps 1-3.
    ValueRange initial_range = truth.range;
    if (!knows_truth(config.scheme)) {
        const ObservationSet probe = sensors.acquire(field, 0);
        initial_range = initial_range_probe(deployment, probe, config.probe_count, probe_seed);
    }
    MonitoringState state = initialize_monitoring(config, initial_range);

    std::size_t quiet_iterations = 0;
    for (;;) {
        const std::size_t m_used = state.m();
        const ObservationSet obs = sensors.acquire(field, state.iteration + 1);
        state = spatial_iteration(config, std::move(state), {deployment, obs, &truth});

        const double error = state.history.back().error_proxy;
        const bool quiet = config.eps_stop > 0.0 && error < config.eps_stop * state.range().span();
        quiet_iterations = quiet ? quiet_iterations + 1 : 0;
        if (m_used >= config.m_max || quiet_iterations >= 2) break;
    }

    SpatialOutcome out;
    out.report.sensor_count = deployment.size();
    out.report.iterations = state.history;
    out.state = std::move(state);
    return out;
}

MonitoringReport run_temporal_monitoring(const MonitoringConfig& config, MonitoringState state,
                                         std::span<const SyntheticFieldModel> field_sequence,
                                         const SensorSimulator& sensors, MonitoringReport report) {
    const SensorDeployment& deployment = sensors.deployment();
    report.sensor_count = deployment.size();
    const std::size_t m = state.m();

    for (std::size_t p = 1; p <= field_sequence.size(); ++p) {
        const SyntheticFieldModel& field = field_sequence[p - 1];
        const GroundTruth truth = ground_truth(field, config.grid, config.pdf_bins);
        const ObservationSet obs = sensors.acquire(field, kTemporalEpochBase + p);

        PeriodRecord record;
        record.period = p;
        record.m = m;
        record.delta = state.delta_state.delta;

        const ReportingSet reports = query_sensors(deployment, obs, state.level_set, state.delta_state.delta);
        record.reports = reports.cost();
        record.fraction = reporting_fraction(reports.cost(), deployment.size());

        std::optional<Reconstruction> recon;
        try {
            recon = reconstruct(state.solver, reports, config.grid, state.iteration + p);
        } catch (const ConditioningError& e) {
            throw IterationError(std::string("period ") + std::to_string(p) + ": " + e.what(), state);
        }
        auto& history = state.delta_state.error_history;
        if (recon) {
            const Reconstruction previous =
                state.last_reconstruction ? *state.last_reconstruction : Reconstruction::zeros(config.grid);
            record.error_proxy = mean_abs_diff(*recon, previous);
            state.last_reconstruction = std::move(recon);
        } else {
            record.error_proxy = history.empty() ? 0.0 : history.back();
        }
        history.push_back(record.error_proxy);
        record.error_vs_truth = state.last_reconstruction
                                    ? mean_abs_diff(*state.last_reconstruction, truth.grid)
                                    : mean_abs_diff(Reconstruction::zeros(config.grid), truth.grid);

        ValueRange range = state.range();
        const EmpiricalPdf* pdf = nullptr;
        if (knows_truth(state.scheme)) {
            range = truth.range;
            pdf = &truth.pdf;
        } else if (state.last_reconstruction) {
            const ValueRange fresh = value_range(*state.last_reconstruction);
            if (fresh.span() > 0.0) {
                range = fresh;
                if (uses_lloyd_max(state.scheme)) state.last_pdf = estimate_pdf(*state.last_reconstruction, config.pdf_bins);
            }
            if (uses_lloyd_max(state.scheme) && state.last_pdf) pdf = &*state.last_pdf;
        }

        if (config.temporal_adapt_delta && adapts_delta(state.scheme)) {
            state.delta_state.delta = adapted_delta(config, state.delta_state, range);
        }
        state.level_set = place_levels(config, state.scheme, range, pdf, m);
        report.periods.push_back(record);
    }
    return report;
}

}  // namespace stm
