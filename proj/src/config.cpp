#include "stm/config.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <utility>

#include "stm/errors.hpp"
#include "stm/text_io.hpp"

namespace stm {

namespace {

struct Binding {
    std::string key;
    std::function<std::string(const ScenarioConfig&)> get;
    std::function<void(ScenarioConfig&, std::string_view)> set;
};

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

template <typename Ref>
Binding count_key(std::string key, Ref ref) {
    return {key, [ref](const ScenarioConfig& c) { return format_number(ref(const_cast<ScenarioConfig&>(c))); },
            [ref](ScenarioConfig& c, std::string_view v) {
                const long long x = parse_integer(v);
                if (x < 0) throw ParseError("expected a non-negative integer, got '" + std::string(v) + "'");
                ref(c) = static_cast<std::size_t>(x);
            }};
}

template <typename Ref>
Binding real_key(std::string key, Ref ref) {
    return {key, [ref](const ScenarioConfig& c) { return format_number(ref(const_cast<ScenarioConfig&>(c))); },
            [ref](ScenarioConfig& c, std::string_view v) {
                const double x = parse_double(v);
                if (!std::isfinite(x)) throw ParseError("expected a finite number, got '" + std::string(v) + "'");
                ref(c) = x;
            }};
}

const std::vector<Binding>& bindings() {
    static const std::vector<Binding> table = [] {
        using C = ScenarioConfig;
        std::vector<Binding> b;
        b.push_back(count_key("field.n1", [](C& c) -> auto& { return c.field.n1; }));
        b.push_back(count_key("field.n2", [](C& c) -> auto& { return c.field.n2; }));
        b.push_back(real_key("field.sigma_a", [](C& c) -> auto& { return c.field.sigma_a; }));
        b.push_back(real_key("field.sigma_b", [](C& c) -> auto& { return c.field.sigma_b; }));
        b.push_back(real_key("field.amplitude_min", [](C& c) -> auto& { return c.field.amplitude_min; }));
        b.push_back(real_key("field.amplitude_max", [](C& c) -> auto& { return c.field.amplitude_max; }));
        b.push_back(real_key("field.width", [](C& c) -> auto& { return c.field.width; }));
        b.push_back(real_key("field.height", [](C& c) -> auto& { return c.field.height; }));
        b.push_back({"field.drift_set", [](const C& c) { return std::string(to_string(c.drift_set)); },
                     [](C& c, std::string_view v) { c.drift_set = parse_component_set(v); }});
        b.push_back({"field.file", [](const C& c) { return c.field_file; },
                     [](C& c, std::string_view v) { c.field_file = std::string(v); }});
        b.push_back(count_key("deploy.sensors", [](C& c) -> auto& { return c.sensor_count; }));
        b.push_back(real_key("noise.sigma", [](C& c) -> auto& { return c.noise_sigma; }));
        b.push_back(count_key("noise.taps", [](C& c) -> auto& { return c.noise_taps; }));
        b.push_back({"monitor.scheme", [](const C& c) { return std::string(to_string(c.monitoring.scheme)); },
                     [](C& c, std::string_view v) { c.monitoring.scheme = parse_scheme(v); }});
        b.push_back(count_key("monitor.initial_m", [](C& c) -> auto& { return c.monitoring.initial_m; }));
        b.push_back(count_key("monitor.m_max", [](C& c) -> auto& { return c.monitoring.m_max; }));
        b.push_back(count_key("monitor.probe_count", [](C& c) -> auto& { return c.monitoring.probe_count; }));
        b.push_back(real_key("monitor.eps_stop", [](C& c) -> auto& { return c.monitoring.eps_stop; }));
        b.push_back(count_key("monitor.pdf_bins", [](C& c) -> auto& { return c.monitoring.pdf_bins; }));
        b.push_back(count_key("monitor.grid_p", [](C& c) -> auto& { return c.monitoring.grid.p; }));
        b.push_back(count_key("monitor.grid_q", [](C& c) -> auto& { return c.monitoring.grid.q; }));
        b.push_back(real_key("monitor.initial_delta_scale",
                             [](C& c) -> auto& { return c.monitoring.initial_delta_scale; }));
        b.push_back(real_key("monitor.delta_floor_fraction",
                             [](C& c) -> auto& { return c.monitoring.delta_floor_fraction; }));
        b.push_back({"monitor.mu",
                     [](const C& c) { return format_number(c.monitoring.mu.value_or(0.0)); },
                     [](C& c, std::string_view v) {
                         const double mu = parse_double(v);
                         if (!(mu >= 0.0)) throw ParseError("mu must be >= 0 (0 selects the normalized update)");
                         c.monitoring.mu = mu > 0.0 ? std::optional<double>(mu) : std::nullopt;
                     }});
        b.push_back(real_key("monitor.lloyd_tolerance",
                             [](C& c) -> auto& { return c.monitoring.lloyd_max.relative_tolerance; }));
        b.push_back(count_key("monitor.lloyd_max_iters",
                              [](C& c) -> auto& { return c.monitoring.lloyd_max.max_iterations; }));
        b.push_back(count_key("temporal.periods", [](C& c) -> auto& { return c.periods; }));
        b.push_back(real_key("temporal.drift", [](C& c) -> auto& { return c.drift_per_period; }));
        b.push_back({"temporal.adapt_delta",
                     [](const C& c) { return std::string(c.monitoring.temporal_adapt_delta ? "true" : "false"); },
                     [](C& c, std::string_view v) {
                         if (v == "true" || v == "1") c.monitoring.temporal_adapt_delta = true;
                         else if (v == "false" || v == "0") c.monitoring.temporal_adapt_delta = false;
                         else throw ParseError("expected true or false, got '" + std::string(v) + "'");
                     }});
        b.push_back({"run.output", [](const C& c) { return c.output_dir; },
                     [](C& c, std::string_view v) { c.output_dir = std::string(v); }});
        b.push_back({"run.seed", [](const C& c) { return std::to_string(c.master_seed); },
                     [](C& c, std::string_view v) {
                         std::uint64_t s = 0;
                         const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), s);
                         if (ec != std::errc() || end != v.data() + v.size() || v.empty()) {
                             throw ParseError("expected an unsigned 64-bit seed, got '" + std::string(v) + "'");
                         }
                         c.master_seed = s;
                     }});
        b.push_back(count_key("run.replicates", [](C& c) -> auto& { return c.replicates; }));
        return b;
    }();
    return table;
}

const Binding& binding(std::string_view key) {
    for (const auto& b : bindings()) {
        if (b.key == key) return b;
    }
    throw ParseError("unknown key '" + std::string(key) + "'");
}

std::optional<std::pair<std::string, std::string>> first_violation(const ScenarioConfig& c) {
    using V = std::optional<std::pair<std::string, std::string>>;
    auto bad = [](std::string key, std::string msg) -> V { return std::make_pair(std::move(key), std::move(msg)); };
    if (c.field.n1 == 0) return bad("field.n1", "must be positive");
    if (c.field.n2 == 0) return bad("field.n2", "must be positive");
    if (!(c.field.sigma_a > 0.0)) return bad("field.sigma_a", "must be positive");
    if (!(c.field.sigma_b > 0.0)) return bad("field.sigma_b", "must be positive");
    if (!(c.field.amplitude_min >= 0.0)) return bad("field.amplitude_min", "must be non-negative");
    if (!(c.field.amplitude_max > c.field.amplitude_min)) {
        return bad("field.amplitude_max", "must exceed field.amplitude_min");
    }
    if (!(c.field.width > 0.0)) return bad("field.width", "must be positive");
    if (!(c.field.height > 0.0)) return bad("field.height", "must be positive");
    if (c.sensor_count == 0) return bad("deploy.sensors", "must be positive");
    if (!(c.noise_sigma >= 0.0)) return bad("noise.sigma", "must be non-negative");
    if (c.noise_taps == 0) return bad("noise.taps", "must be positive");
    const auto& m = c.monitoring;
    if (m.initial_m == 0) return bad("monitor.initial_m", "must be positive");
    if (m.m_max < m.initial_m) return bad("monitor.m_max", "must be at least monitor.initial_m");
    if (m.probe_count < 2) return bad("monitor.probe_count", "must be at least 2");
    if (m.probe_count > c.sensor_count) return bad("monitor.probe_count", "exceeds deploy.sensors");
    if (!(m.eps_stop >= 0.0)) return bad("monitor.eps_stop", "must be non-negative");
    if (m.pdf_bins == 0) return bad("monitor.pdf_bins", "must be positive");
    if (m.grid.p < 2) return bad("monitor.grid_p", "must be at least 2");
    if (m.grid.q < 2) return bad("monitor.grid_q", "must be at least 2");
    if (!(m.initial_delta_scale > 0.0)) return bad("monitor.initial_delta_scale", "must be positive");
    if (!(m.delta_floor_fraction > 0.0)) return bad("monitor.delta_floor_fraction", "must be positive");
    if (!(m.lloyd_max.relative_tolerance > 0.0)) return bad("monitor.lloyd_tolerance", "must be positive");
    if (m.lloyd_max.max_iterations == 0) return bad("monitor.lloyd_max_iters", "must be positive");
    return std::nullopt;
}

}  // namespace

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const auto& b : bindings()) k.push_back(b.key);
        return k;
    }();
    return keys;
}

void apply_setting(ScenarioConfig& config, std::string_view key, std::string_view value) {
    const Binding& b = binding(key);
    try {
        b.set(config, trim(value));
    } catch (const ParseError& e) {
        throw ParseError(std::string(key) + ": " + e.what());
    }
    // The reconstruction grid always spans the field rectangle.
    config.monitoring.grid.width = config.field.width;
    config.monitoring.grid.height = config.field.height;
}

void validate(const ScenarioConfig& config) {
    if (const auto v = first_violation(config)) {
        throw ParseError(v->first + ": " + v->second);
    }
}

ScenarioConfig parse_config(std::string_view text, std::string_view source, ScenarioConfig base) {
    std::map<std::string, std::size_t, std::less<>> line_of;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto end = text.find('\n', start);
        std::string_view line = text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
        start = end == std::string_view::npos ? text.size() + 1 : end + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto where = std::string(source) + ":" + std::to_string(line_no) + ": ";
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ParseError(where + "expected 'key = value'");
        const std::string key(trim(line.substr(0, eq)));
        try {
            apply_setting(base, key, line.substr(eq + 1));
        } catch (const ParseError& e) {
            throw ParseError(where + e.what());
        }
        line_of[key] = line_no;
    }
    if (const auto v = first_violation(base)) {
        const auto it = line_of.find(v->first);
        const std::string where =
            std::string(source) + (it != line_of.end() ? ":" + std::to_string(it->second) : std::string()) + ": ";
        throw ParseError(where + v->first + ": " + v->second);
    }
    return base;
}

std::string format_config(const ScenarioConfig& config) {
    std::string out;
    for (const auto& b : bindings()) {
        out += b.key + " = " + b.get(config) + "\n";
    }
    return out;
}

bool same_settings(const ScenarioConfig& a, const ScenarioConfig& b) {
    return format_config(a) == format_config(b);
}

}  // namespace stm
