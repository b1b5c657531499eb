#include "stm/metrics.hpp"

#include <cmath>

#include "stm/errors.hpp"

namespace stm {

double mean_abs_diff(const Reconstruction& a, const Reconstruction& b) {
    if (!(a.grid == b.grid) || a.values.size() != b.values.size()) {
        throw ContractError("mean_abs_diff needs reconstructions on the same grid");
    }
    if (a.values.empty()) throw ContractError("mean_abs_diff of empty grids");
    double sum = 0.0;
    for (std::size_t k = 0; k < a.values.size(); ++k) {
        sum += std::abs(a.values[k] - b.values[k]);
    }
    return sum / static_cast<double>(a.values.size());
}

std::vector<std::size_t> cumulative_cost(std::span<const std::size_t> counts) {
    std::vector<std::size_t> totals;
    totals.reserve(counts.size());
    std::size_t running = 0;
    for (std::size_t c : counts) {
        running += c;
        totals.push_back(running);
    }
    return totals;
}

double reporting_fraction(std::size_t count, std::size_t total_sensors) {
    if (total_sensors == 0 || count > total_sensors) {
        throw ContractError("reporting_fraction needs 0 <= count <= total_sensors and total_sensors > 0");
    }
    return static_cast<double>(count) / static_cast<double>(total_sensors);
}

double error_db(double error, double reference) {
    if (!(reference > 0.0)) throw ContractError("dB reference must be positive");
    return 20.0 * std::log10(error / reference);
}

}  // namespace stm
