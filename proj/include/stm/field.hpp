#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace stm {

/// One isotropic, unnormalized Gaussian bump: amplitude * exp(-r^2 / (2 sigma^2)).
struct GaussianComponent {
    double amplitude = 1.0;
    double mean_x = 0.0;
    double mean_y = 0.0;
    double sigma = 1.0;

    friend bool operator==(const GaussianComponent&, const GaussianComponent&) = default;
};

enum class ComponentSet { A, B };

std::string_view to_string(ComponentSet set);
ComponentSet parse_component_set(std::string_view text);

/// Ground-truth field: a wide-kernel set and a narrow-kernel set of Gaussian terms
/// over the rectangle [0, field_width] x [0, field_height].
struct SyntheticFieldModel {
    std::vector<GaussianComponent> components_a;
    std::vector<GaussianComponent> components_b;
    double field_width = 100.0;
    double field_height = 100.0;

    /// Throws stm::Error if a component breaks the positivity or in-rectangle invariants.
    void validate() const;

    friend bool operator==(const SyntheticFieldModel&, const SyntheticFieldModel&) = default;
};

struct FieldParams {
    std::size_t n1 = 150;
    std::size_t n2 = 150;
    double sigma_a = 10.0;
    double sigma_b = 3.0;
    /// Amplitudes are drawn uniformly from (amplitude_min, amplitude_max].
    double amplitude_min = 0.0;
    double amplitude_max = 1.0;
    double width = 100.0;
    double height = 100.0;
};

/// Draws a random field: means uniform over the rectangle, amplitudes uniform in the
/// configured half-open range.
SyntheticFieldModel synthesize_field(const FieldParams& params, std::uint64_t seed);

double evaluate_field(const SyntheticFieldModel& model, double x, double y);

/// Moves the drifting component set horizontally by dx. Means wrap modulo the field width.
SyntheticFieldModel shift_components(const SyntheticFieldModel& model, double dx,
                                     ComponentSet drifting = ComponentSet::B);

struct Sensor {
    int id = 0;
    double x = 0.0;
    double y = 0.0;
};

struct SensorDeployment {
    std::vector<Sensor> sensors;
    double field_width = 100.0;
    double field_height = 100.0;

    std::size_t size() const { return sensors.size(); }
    void validate() const;
};

/// Scatters `count` sensors uniformly over the rectangle with ids 0..count-1.
SensorDeployment deploy_uniform(std::size_t count, double width, double height,
                                std::uint64_t seed);

struct Reading {
    int sensor_id = 0;
    double value = 0.0;
};

struct ObservationSet {
    std::vector<Reading> readings;
    std::uint64_t timestamp_index = 0;
};

/// Id -> position in `deployment.sensors`.
std::unordered_map<int, std::size_t> index_sensors(const SensorDeployment& deployment);

/// One noisy reading per sensor, in deployment order. Noise is i.i.d. N(0, noise_sigma^2)
/// and fully determined by `rng_seed`.
ObservationSet observe(const SyntheticFieldModel& model, const SensorDeployment& deployment,
                       double noise_sigma, std::uint64_t rng_seed,
                       std::uint64_t timestamp_index = 0);

/// Per-sensor mean over the last `taps` sets of `series`. All sets must list the same
/// sensors in the same order.
ObservationSet moving_average(std::span<const ObservationSet> series, std::size_t taps);

/// What the IFC receives from the field: each sensor averages `taps` raw samples whose
/// noise std is chosen so that the filtered reading has std `filtered_sigma`.
class SensorSimulator {
public:
    SensorSimulator(const SensorDeployment& deployment, double filtered_sigma, std::size_t taps,
                    std::uint64_t seed);

    /// Filtered observations of `model` for acquisition epoch `epoch`. Same epoch and
    /// seed give bit-identical output.
    ObservationSet acquire(const SyntheticFieldModel& model, std::uint64_t epoch) const;

    double raw_sigma() const { return raw_sigma_; }
    std::size_t taps() const { return taps_; }
    const SensorDeployment& deployment() const { return *deployment_; }

private:
    const SensorDeployment* deployment_;
    double raw_sigma_;
    std::size_t taps_;
    std::uint64_t seed_;
};

}  // namespace stm
