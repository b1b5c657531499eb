#include "stm/field.hpp"

#include <cmath>
#include <random>
#include <string>

#include "stm/errors.hpp"
#include "stm/seeds.hpp"

namespace stm {

namespace {

void check_component(const GaussianComponent& c, double width, double height) {
    if (!(c.amplitude > 0.0) || !std::isfinite(c.amplitude)) {
        throw Error("Gaussian component amplitude must be positive and finite");
    }
    if (!(c.sigma > 0.0) || !std::isfinite(c.sigma)) {
        throw Error("Gaussian component sigma must be positive and finite");
    }
    if (!(c.mean_x >= 0.0 && c.mean_x <= width && c.mean_y >= 0.0 && c.mean_y <= height)) {
        throw Error("Gaussian component mean lies outside the field rectangle");
    }
}

double kernel_sum(const std::vector<GaussianComponent>& components, double x, double y) {
    double sum = 0.0;
    for (const auto& c : components) {
        const double dx = x - c.mean_x;
        const double dy = y - c.mean_y;
        sum += c.amplitude * std::exp(-(dx * dx + dy * dy) / (2.0 * c.sigma * c.sigma));
    }
    return sum;
}

std::vector<GaussianComponent> draw_components(std::size_t count, double sigma, const FieldParams& p,
                                               std::mt19937_64& rng) {
    // (min, max] for amplitudes: flip a [0, 1) draw.
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<GaussianComponent> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        GaussianComponent c;
        c.amplitude = p.amplitude_max - (p.amplitude_max - p.amplitude_min) * unit(rng);
        c.mean_x = p.width * unit(rng);
        c.mean_y = p.height * unit(rng);
        c.sigma = sigma;
        out.push_back(c);
    }
    return out;
}

}  // namespace

std::string_view to_string(ComponentSet set) {
    return set == ComponentSet::A ? "a" : "b";
}

ComponentSet parse_component_set(std::string_view text) {
    if (text == "a" || text == "A") return ComponentSet::A;
    if (text == "b" || text == "B") return ComponentSet::B;
    throw ParseError("component set must be 'a' or 'b', got '" + std::string(text) + "'");
}

void SyntheticFieldModel::validate() const {
    if (!(field_width > 0.0) || !(field_height > 0.0)) {
        throw Error("field dimensions must be positive");
    }
    for (const auto& c : components_a) check_component(c, field_width, field_height);
    for (const auto& c : components_b) check_component(c, field_width, field_height);
}

SyntheticFieldModel synthesize_field(const FieldParams& params, std::uint64_t seed) {
    if (!(params.amplitude_max > params.amplitude_min) || params.amplitude_min < 0.0) {
        throw Error("amplitude range must satisfy 0 <= min < max");
    }
    std::mt19937_64 rng(seed);
    SyntheticFieldModel model;
    model.field_width = params.width;
    model.field_height = params.height;
    model.components_a = draw_components(params.n1, params.sigma_a, params, rng);
    model.components_b = draw_components(params.n2, params.sigma_b, params, rng);
    model.validate();
    return model;
}

double evaluate_field(const SyntheticFieldModel& model, double x, double y) {
    return kernel_sum(model.components_a, x, y) + kernel_sum(model.components_b, x, y);
}

SyntheticFieldModel shift_components(const SyntheticFieldModel& model, double dx, ComponentSet drifting) {
    SyntheticFieldModel out = model;
    auto& moving = drifting == ComponentSet::A ? out.components_a : out.components_b;
    const double w = model.field_width;
    for (auto& c : moving) {
        double x = std::fmod(c.mean_x + dx, w);
        if (x < 0.0) x += w;
        c.mean_x = x;
    }
    return out;
}

void SensorDeployment::validate() const {
    std::unordered_map<int, std::size_t> seen;
    seen.reserve(sensors.size());
    for (std::size_t k = 0; k < sensors.size(); ++k) {
        const auto& s = sensors[k];
        if (!seen.emplace(s.id, k).second) {
            throw Error("duplicate sensor id " + std::to_string(s.id));
        }
        if (!(s.x >= 0.0 && s.x <= field_width && s.y >= 0.0 && s.y <= field_height)) {
            throw Error("sensor " + std::to_string(s.id) + " lies outside the field rectangle");
        }
    }
}

SensorDeployment deploy_uniform(std::size_t count, double width, double height, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    SensorDeployment d;
    d.field_width = width;
    d.field_height = height;
    d.sensors.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        const double x = width * unit(rng);
        const double y = height * unit(rng);
        d.sensors.push_back({static_cast<int>(k), x, y});
    }
    return d;
}

std::unordered_map<int, std::size_t> index_sensors(const SensorDeployment& deployment) {
    std::unordered_map<int, std::size_t> index;
    index.reserve(deployment.sensors.size());
    for (std::size_t k = 0; k < deployment.sensors.size(); ++k) {
        index.emplace(deployment.sensors[k].id, k);
    }
    return index;
}

ObservationSet observe(const SyntheticFieldModel& model, const SensorDeployment& deployment, double noise_sigma,
                       std::uint64_t rng_seed, std::uint64_t timestamp_index) {
    if (!(noise_sigma >= 0.0)) {
        throw ContractError("noise_sigma must be non-negative");
    }
    std::mt19937_64 rng(rng_seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    ObservationSet out;
    out.timestamp_index = timestamp_index;
    out.readings.reserve(deployment.sensors.size());
    for (const auto& s : deployment.sensors) {
        double value = evaluate_field(model, s.x, s.y);
        if (noise_sigma > 0.0) value += noise_sigma * noise(rng);
        out.readings.push_back({s.id, value});
    }
    return out;
}

ObservationSet moving_average(std::span<const ObservationSet> series, std::size_t taps) {
    if (taps == 0) {
        throw ContractError("moving average needs at least one tap");
    }
    if (series.size() < taps) {
        throw InsufficientHistoryError("moving average over " + std::to_string(taps) + " taps needs " +
                                       std::to_string(taps) + " observation sets, got " +
                                       std::to_string(series.size()));
    }
    const auto window = series.last(taps);
    const ObservationSet& latest = window.back();
    ObservationSet out;
    out.timestamp_index = latest.timestamp_index;
    out.readings = latest.readings;
    if (taps == 1) return out;

    for (const auto& set : window) {
        if (set.readings.size() != out.readings.size()) {
            throw ContractError("moving average inputs cover different sensors");
        }
    }
    // Averaged as an offset from the oldest tap, so identical taps reproduce the value bit-exactly.
    for (std::size_t k = 0; k < out.readings.size(); ++k) {
        const double anchor = window.front().readings[k].value;
        double offset = 0.0;
        for (const auto& set : window) {
            if (set.readings[k].sensor_id != out.readings[k].sensor_id) {
                throw ContractError("moving average inputs cover different sensors");
            }
            offset += set.readings[k].value - anchor;
        }
        out.readings[k].value = anchor + offset / static_cast<double>(taps);
    }
    return out;
}

SensorSimulator::SensorSimulator(const SensorDeployment& deployment, double filtered_sigma, std::size_t taps,
                                 std::uint64_t seed)
    : deployment_(&deployment),
      raw_sigma_(filtered_sigma * std::sqrt(static_cast<double>(taps))),
      taps_(taps),
      seed_(seed) {
    if (taps == 0) throw ContractError("sensor filter needs at least one tap");
    if (!(filtered_sigma >= 0.0)) throw ContractError("noise sigma must be non-negative");
}

ObservationSet SensorSimulator::acquire(const SyntheticFieldModel& model, std::uint64_t epoch) const {
    std::vector<ObservationSet> raw;
    raw.reserve(taps_);
    // Each tap draws from its own stream so the result does not depend on evaluation order.
    for (std::size_t t = 0; t < taps_; ++t) {
        raw.push_back(observe(model, *deployment_, raw_sigma_, derive_seed(seed_, {epoch, t}), epoch));
    }
    return moving_average(raw, taps_);
}

}  // namespace stm
