#include "stm/scenario.hpp"

#include <algorithm>
#include <filesystem>
#include <system_error>

#include "stm/errors.hpp"
#include "stm/seeds.hpp"

namespace stm {

namespace {

std::filesystem::path prepare_output(const ScenarioConfig& config) {
    const std::filesystem::path dir(config.output_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) {
        throw Error("cannot create output directory '" + dir.string() + "'" +
                    (ec ? ": " + ec.message() : std::string()));
    }
    return dir;
}

void write_table(const std::filesystem::path& dir, const char* name, const CsvTable& table) {
    write_file_atomic(dir / name, table.str());
}

MonitoringConfig resolved_monitoring(const ScenarioConfig& config, const SyntheticFieldModel& field) {
    MonitoringConfig m = config.monitoring;
    m.grid.width = field.field_width;
    m.grid.height = field.field_height;
    return m;
}

SensorSimulator simulator_for(const ScenarioConfig& config, const ReplicateSetup& setup) {
    return SensorSimulator(setup.deployment, config.noise_sigma, config.noise_taps, setup.noise_seed);
}

std::string fmt(double v) { return format_number(v); }
std::string fmt(std::size_t v) { return format_number(v); }

}  // namespace

ReplicateSetup prepare_replicate(const ScenarioConfig& config, std::size_t replicate) {
    ReplicateSetup s;
    s.index = replicate;
    s.seed = replicate_seed(config.master_seed, replicate);
    if (config.field_file.empty()) {
        s.field = synthesize_field(config.field, purpose_seed(s.seed, SeedPurpose::Field));
    } else {
        s.field = parse_field(read_file(config.field_file), config.field_file);
    }
    s.deployment = deploy_uniform(config.sensor_count, s.field.field_width, s.field.field_height,
                                  purpose_seed(s.seed, SeedPurpose::Deployment));
    s.noise_seed = purpose_seed(s.seed, SeedPurpose::Noise);
    s.probe_seed = purpose_seed(s.seed, SeedPurpose::Probe);
    return s;
}

std::vector<SyntheticFieldModel> drift_sequence(const SyntheticFieldModel& start, ComponentSet drifting,
                                                double drift, std::size_t periods) {
    std::vector<SyntheticFieldModel> seq;
    seq.reserve(periods);
    for (std::size_t p = 0; p < periods; ++p) {
        seq.push_back(shift_components(start, static_cast<double>(p + 1) * drift, drifting));
    }
    return seq;
}

ScenarioResult run_scenario(const ScenarioConfig& config) {
    validate(config);
    std::filesystem::path dir;
    if (!config.output_dir.empty()) {
        dir = prepare_output(config);
        write_file_atomic(dir / "manifest.txt", manifest_text(config, "run"));
    }

    ScenarioResult result;
    for (std::size_t r = 0; r < config.replicates; ++r) {
        const ReplicateSetup setup = prepare_replicate(config, r);
        const MonitoringConfig mc = resolved_monitoring(config, setup.field);
        const SensorSimulator sensors = simulator_for(config, setup);
        SpatialOutcome spatial = run_spatial_monitoring(mc, setup.field, sensors, setup.probe_seed);
        const auto sequence = drift_sequence(setup.field, config.drift_set, config.drift_per_period, config.periods);
        ReplicateResult rr;
        rr.replicate = r;
        rr.seed = setup.seed;
        rr.report = run_temporal_monitoring(mc, std::move(spatial.state), sequence, sensors, std::move(spatial.report));
        result.replicates.push_back(std::move(rr));
    }

    if (!dir.empty() && !result.replicates.empty()) {
        write_table(dir, "spatial.csv", spatial_table(result.replicates));
        write_table(dir, "temporal.csv", temporal_table(result.replicates));
        write_table(dir, "delta_trace.csv", delta_trace_table(result.replicates));
    }
    return result;
}

CompareResult compare_schemes(const ScenarioConfig& config, std::span<const Scheme> schemes) {
    validate(config);
    if (schemes.size() < 2) throw ContractError("compare needs at least two schemes");
    std::filesystem::path dir;
    if (!config.output_dir.empty()) {
        dir = prepare_output(config);
        write_file_atomic(dir / "manifest.txt", manifest_text(config, "compare"));
    }

    CompareResult result;
    for (Scheme s : schemes) result.runs.push_back({s, {}});
    for (std::size_t r = 0; r < config.replicates; ++r) {
        const ReplicateSetup setup = prepare_replicate(config, r);
        const SensorSimulator sensors = simulator_for(config, setup);
        for (auto& runs : result.runs) {
            MonitoringConfig mc = resolved_monitoring(config, setup.field);
            mc.scheme = runs.scheme;
            SpatialOutcome out = run_spatial_monitoring(mc, setup.field, sensors, setup.probe_seed);
            runs.replicates.push_back({r, setup.seed, std::move(out.report)});
        }
    }

    // Averages per (scheme, n). A replicate that stopped early keeps contributing its
    // final record, so averaged cumulative cost stays a prefix sum.
    for (const auto& runs : result.runs) {
        std::size_t longest = 0;
        for (const auto& rr : runs.replicates) longest = std::max(longest, rr.report.iterations.size());
        for (std::size_t k = 0; k < longest; ++k) {
            SchemeAverage avg;
            avg.scheme = runs.scheme;
            avg.n = k + 1;
            std::size_t counted = 0;
            for (const auto& rr : runs.replicates) {
                const auto& it = rr.report.iterations;
                if (it.empty()) continue;
                if (k < it.size()) ++avg.samples;
                const IterationRecord& rec = it[std::min(k, it.size() - 1)];
                avg.m += static_cast<double>(rec.m);
                avg.delta += rec.delta;
                avg.reports += k < it.size() ? static_cast<double>(rec.reports) : 0.0;
                avg.cumulative_cost += static_cast<double>(rec.cumulative_cost);
                avg.error_proxy += rec.error_proxy;
                avg.error_vs_truth += rec.error_vs_truth;
                ++counted;
            }
            const double c = static_cast<double>(counted);
            avg.m /= c;
            avg.delta /= c;
            avg.reports /= c;
            avg.cumulative_cost /= c;
            avg.error_proxy /= c;
            avg.error_vs_truth /= c;
            result.averages.push_back(avg);
        }
    }

    if (!dir.empty() && config.replicates > 0) {
        write_table(dir, "compare.csv", compare_table(result));
        write_table(dir, "compare_mean.csv", compare_mean_table(result));
    }
    return result;
}

SweepResult sweep_initial_delta(const ScenarioConfig& config, std::span<const double> scales) {
    validate(config);
    if (scales.empty()) throw ContractError("sweep needs at least one initial Δ scale");
    for (double s : scales) {
        if (!(s > 0.0)) throw ContractError("initial Δ scales must be positive");
    }
    std::filesystem::path dir;
    if (!config.output_dir.empty()) {
        dir = prepare_output(config);
        write_file_atomic(dir / "manifest.txt", manifest_text(config, "sweep"));
    }

    SweepResult result;
    result.scales.assign(scales.begin(), scales.end());
    result.runs.resize(scales.size());
    for (std::size_t r = 0; r < config.replicates; ++r) {
        const ReplicateSetup setup = prepare_replicate(config, r);
        const SensorSimulator sensors = simulator_for(config, setup);
        for (std::size_t s = 0; s < scales.size(); ++s) {
            MonitoringConfig mc = resolved_monitoring(config, setup.field);
            mc.initial_delta_scale = scales[s];
            SpatialOutcome out = run_spatial_monitoring(mc, setup.field, sensors, setup.probe_seed);
            result.runs[s].push_back({r, setup.seed, std::move(out.report)});
        }
    }

    if (!dir.empty() && config.replicates > 0) {
        write_table(dir, "sweep.csv", sweep_table(result));
    }
    return result;
}

CsvTable spatial_table(std::span<const ReplicateResult> results) {
    CsvTable t;
    t.header = {"replicate", "n",           "M",          "delta",     "reports",
                "cumulative_cost", "error_proxy", "error_vs_truth", "range_min", "range_max"};
    for (const auto& rr : results) {
        for (const auto& it : rr.report.iterations) {
            t.rows.push_back({fmt(rr.replicate), fmt(it.n), fmt(it.m), fmt(it.delta), fmt(it.reports),
                              fmt(it.cumulative_cost), fmt(it.error_proxy), fmt(it.error_vs_truth),
                              fmt(it.range_min), fmt(it.range_max)});
        }
    }
    return t;
}

CsvTable temporal_table(std::span<const ReplicateResult> results) {
    CsvTable t;
    t.header = {"replicate", "period", "reports", "fraction", "error_vs_truth", "error_proxy", "delta", "M"};
    for (const auto& rr : results) {
        for (const auto& p : rr.report.periods) {
            t.rows.push_back({fmt(rr.replicate), fmt(p.period), fmt(p.reports), fmt(p.fraction),
                              fmt(p.error_vs_truth), fmt(p.error_proxy), fmt(p.delta), fmt(p.m)});
        }
    }
    return t;
}

CsvTable delta_trace_table(std::span<const ReplicateResult> results) {
    CsvTable t;
    t.header = {"replicate", "n", "delta"};
    for (const auto& rr : results) {
        for (const auto& it : rr.report.iterations) {
            t.rows.push_back({fmt(rr.replicate), fmt(it.n), fmt(it.delta)});
        }
    }
    return t;
}

CsvTable compare_table(const CompareResult& result) {
    CsvTable t;
    t.header = {"scheme",          "replicate",   "n",             "M", "delta", "reports",
                "cumulative_cost", "error_proxy", "error_vs_truth"};
    for (const auto& runs : result.runs) {
        for (const auto& rr : runs.replicates) {
            for (const auto& it : rr.report.iterations) {
                t.rows.push_back({std::string(to_string(runs.scheme)), fmt(rr.replicate), fmt(it.n), fmt(it.m),
                                  fmt(it.delta), fmt(it.reports), fmt(it.cumulative_cost), fmt(it.error_proxy),
                                  fmt(it.error_vs_truth)});
            }
        }
    }
    return t;
}

CsvTable compare_mean_table(const CompareResult& result) {
    CsvTable t;
    t.header = {"scheme",  "n",       "samples",         "M",           "delta",
                "reports", "cumulative_cost", "error_proxy", "error_vs_truth"};
    for (const auto& a : result.averages) {
        t.rows.push_back({std::string(to_string(a.scheme)), fmt(a.n), fmt(a.samples), fmt(a.m), fmt(a.delta),
                          fmt(a.reports), fmt(a.cumulative_cost), fmt(a.error_proxy), fmt(a.error_vs_truth)});
    }
    return t;
}

CsvTable sweep_table(const SweepResult& result) {
    CsvTable t;
    t.header = {"delta_scale", "replicate", "n", "M", "delta", "reports", "error_proxy"};
    for (std::size_t s = 0; s < result.scales.size(); ++s) {
        for (const auto& rr : result.runs[s]) {
            for (const auto& it : rr.report.iterations) {
                t.rows.push_back({fmt(result.scales[s]), fmt(rr.replicate), fmt(it.n), fmt(it.m), fmt(it.delta),
                                  fmt(it.reports), fmt(it.error_proxy)});
            }
        }
    }
    return t;
}

std::string manifest_text(const ScenarioConfig& config, std::string_view verb) {
    std::string out = "# stm_sim " + std::string(verb) + "\n";
    out += format_config(config);
    for (std::size_t r = 0; r < config.replicates; ++r) {
        const std::uint64_t seed = replicate_seed(config.master_seed, r);
        out += "# replicate " + std::to_string(r) + " seed " + std::to_string(seed) + " field " +
               std::to_string(purpose_seed(seed, SeedPurpose::Field)) + " deployment " +
               std::to_string(purpose_seed(seed, SeedPurpose::Deployment)) + " noise " +
               std::to_string(purpose_seed(seed, SeedPurpose::Noise)) + " probe " +
               std::to_string(purpose_seed(seed, SeedPurpose::Probe)) + "\n";
    }
    return out;
}

}  // namespace stm
