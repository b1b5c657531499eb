#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "stm/field.hpp"
#include "stm/monitoring.hpp"

namespace stm {

/// Everything needed to reproduce a batch of simulation runs. Defaults are the reference
/// scenario: 150 + 150 Gaussian terms (sigma 10 and 3) over 100 x 100, 5000 uniform
/// sensors, filtered noise std 0.3.
struct ScenarioConfig {
    FieldParams field;
    /// When non-empty, every replicate uses the field model stored at this path.
    std::string field_file;
    ComponentSet drift_set = ComponentSet::B;

    std::size_t sensor_count = 5000;

    /// Noise std after the moving-average filter, and the filter length.
    double noise_sigma = 0.3;
    std::size_t noise_taps = 4;

    MonitoringConfig monitoring;

    std::size_t periods = 20;
    double drift_per_period = 1.0;

    std::string output_dir = "out";
    std::uint64_t master_seed = 1;
    std::size_t replicates = 20;
};

/// Keys accepted by the config file and as --<key> flags, in manifest order.
const std::vector<std::string>& config_keys();

/// Sets one key. Throws ParseError naming the key on an unknown key or a bad value.
void apply_setting(ScenarioConfig& config, std::string_view key, std::string_view value);

/// Reads "key = value" lines ('#' starts a comment) on top of `base`, then validates.
/// Errors read "<source>:<line>: <message>".
ScenarioConfig parse_config(std::string_view text, std::string_view source = "<config>",
                            ScenarioConfig base = {});

/// One "key = value" line per key; parse_config(format_config(c)) == c.
std::string format_config(const ScenarioConfig& config);

/// Throws ParseError on the first out-of-range field, naming its key.
void validate(const ScenarioConfig& config);

bool same_settings(const ScenarioConfig& a, const ScenarioConfig& b);

}  // namespace stm
