#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "stm/spline.hpp"

namespace stm {

/// Mean absolute difference between two reconstructions on the same grid.
double mean_abs_diff(const Reconstruction& a, const Reconstruction& b);

/// Running totals of per-iteration report counts.
std::vector<std::size_t> cumulative_cost(std::span<const std::size_t> counts);

double reporting_fraction(std::size_t count, std::size_t total_sensors);

/// 20 log10(error / reference). Plot convention: reference is the discovered signal range.
double error_db(double error, double reference);

}  // namespace stm
