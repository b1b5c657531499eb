// Command-line front end for the contour monitoring simulator.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "stm/config.hpp"
#include "stm/errors.hpp"
#include "stm/scenario.hpp"
#include "stm/text_io.hpp"

namespace {

struct Overrides {
    std::string config_file;
    std::map<std::string, std::string> values;
};

void add_config_options(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--config", o.config_file, "key = value config file");
    for (const auto& key : stm::config_keys()) {
        cmd->add_option("--" + key, o.values[key], "override " + key);
    }
}

stm::ScenarioConfig resolve(const Overrides& o) {
    stm::ScenarioConfig config;
    if (!o.config_file.empty()) {
        config = stm::parse_config(stm::read_file(o.config_file), o.config_file);
    }
    for (const auto& [key, value] : o.values) {
        if (!value.empty()) {
            try {
                stm::apply_setting(config, key, value);
            } catch (const stm::ParseError& e) {
                throw stm::ParseError(std::string("--") + e.what());
            }
        }
    }
    stm::validate(config);
    return config;
}

double mean_fraction(const stm::ScenarioResult& result) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& rr : result.replicates) {
        for (const auto& p : rr.report.periods) {
            sum += p.fraction;
            ++n;
        }
    }
    return n ? sum / static_cast<double>(n) : 0.0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Contour-based spatiotemporal monitoring simulator"};
    app.require_subcommand(1);

    Overrides run_o, compare_o, sweep_o, snap_o;
    auto* run = app.add_subcommand("run", "spatial then temporal monitoring for every replicate");
    add_config_options(run, run_o);

    auto* compare = app.add_subcommand("compare", "spatial monitoring of several schemes on identical replicates");
    add_config_options(compare, compare_o);
    std::vector<std::string> scheme_names{"U-SG", "LM-fixed", "LM-SG"};
    compare->add_option("--schemes", scheme_names, "schemes to compare (at least two)")->delimiter(',');

    auto* sweep = app.add_subcommand("sweep", "spatial monitoring from several initial margins");
    add_config_options(sweep, sweep_o);
    std::vector<double> scales{0.5, 1.0, 2.0};
    sweep->add_option("--delta-scales", scales, "multipliers of the default initial margin")->delimiter(',');

    auto* snapshot = app.add_subcommand("snapshot", "export one replicate's field, observations and truth grid");
    add_config_options(snapshot, snap_o);
    std::size_t snap_replicate = 0;
    snapshot->add_option("--replicate", snap_replicate, "replicate index");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            const auto config = resolve(run_o);
            const auto result = stm::run_scenario(config);
            std::cout << "replicates " << result.replicates.size() << ", mean temporal reporting fraction "
                      << mean_fraction(result) << "\n";
        } else if (*compare) {
            const auto config = resolve(compare_o);
            std::vector<stm::Scheme> schemes;
            for (const auto& name : scheme_names) schemes.push_back(stm::parse_scheme(name));
            const auto result = stm::compare_schemes(config, schemes);
            for (const auto& runs : result.runs) {
                const stm::SchemeAverage* last = nullptr;
                for (const auto& a : result.averages) {
                    if (a.scheme == runs.scheme) last = &a;
                }
                if (last) {
                    std::cout << stm::to_string(runs.scheme) << ": n " << last->n << ", cumulative cost "
                              << last->cumulative_cost << ", error " << last->error_vs_truth << "\n";
                }
            }
        } else if (*sweep) {
            const auto config = resolve(sweep_o);
            const auto result = stm::sweep_initial_delta(config, scales);
            for (std::size_t s = 0; s < result.scales.size(); ++s) {
                double sum = 0.0;
                for (const auto& rr : result.runs[s]) sum += rr.report.iterations.back().delta;
                const auto n = result.runs[s].size();
                std::cout << "scale " << result.scales[s] << ": mean final delta "
                          << (n ? sum / static_cast<double>(n) : 0.0) << "\n";
            }
        } else if (*snapshot) {
            const auto config = resolve(snap_o);
            if (config.output_dir.empty()) throw stm::Error("snapshot needs run.output");
            const std::filesystem::path dir(config.output_dir);
            std::filesystem::create_directories(dir);
            const auto setup = stm::prepare_replicate(config, snap_replicate);
            const stm::SensorSimulator sensors(setup.deployment, config.noise_sigma, config.noise_taps,
                                               setup.noise_seed);
            stm::GridSpec grid = config.monitoring.grid;
            grid.width = setup.field.field_width;
            grid.height = setup.field.field_height;
            const auto truth = stm::ground_truth(setup.field, grid, config.monitoring.pdf_bins);
            stm::write_file_atomic(dir / "field.txt", stm::serialize_field(setup.field));
            stm::write_file_atomic(dir / "observations.csv",
                                   stm::observations_csv(setup.deployment, sensors.acquire(setup.field, 0)).str());
            stm::write_file_atomic(dir / "truth.csv", stm::reconstruction_csv(truth.grid).str());
            stm::write_file_atomic(dir / "truth_pdf.csv", stm::pdf_csv(truth.pdf).str());
            std::cout << "wrote snapshot of replicate " << snap_replicate << " to " << dir.string() << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "stm_sim: " << e.what() << "\n";
        return EXIT_FAILURE;
    }
    return EXIT_SUCCESS;
}
