#pragma once

#include <cstddef>
#include <vector>

#include "stm/errors.hpp"
#include "stm/spline.hpp"

namespace stm {

/// Ordered contour levels strictly inside (range_min, range_max).
struct ContourLevelSet {
    std::vector<double> levels;
    double range_min = 0.0;
    double range_max = 0.0;

    std::size_t size() const { return levels.size(); }
    /// Throws InvalidRangeError unless range_min < l_1 < ... < l_M < range_max and M >= 1.
    void validate() const;
};

/// Piecewise-constant density over strictly increasing bin edges.
struct EmpiricalPdf {
    std::vector<double> bin_edges;
    std::vector<double> densities;

    double support_min() const { return bin_edges.front(); }
    double support_max() const { return bin_edges.back(); }
    std::size_t bin_count() const { return densities.size(); }

    /// Normalizes non-negative per-bin weights into densities.
    static EmpiricalPdf from_weights(std::vector<double> edges, const std::vector<double>& weights);

    /// Probability mass over [a, b] (clipped to the support).
    double mass(double a, double b) const;
    /// Integral of x f(x) over [a, b].
    double first_moment(double a, double b) const;
    /// Integral of (x - c)^2 f(x) over [a, b].
    double squared_deviation(double a, double b, double c) const;

    void validate() const;
};

/// M levels l_i = lo + i (hi - lo) / (M + 1), i = 1..M. Throws InvalidRangeError if lo >= hi.
ContourLevelSet uniform_levels(double lo, double hi, std::size_t m);

/// Normalized histogram of the grid values over `bin_count` equal-width bins spanning
/// the value range. Throws DegeneratePdfError for a constant grid.
EmpiricalPdf estimate_pdf(const Reconstruction& recon, std::size_t bin_count = 64);

struct LloydMaxOptions {
    /// Stop when no level moves more than tolerance * (support width).
    double relative_tolerance = 1e-6;
    std::size_t max_iterations = 500;
    /// When set, receives the quantizer MSE of the initial levels followed by the MSE
    /// after every iteration.
    std::vector<double>* mse_trace = nullptr;
};

class LloydMaxNonConvergence : public Error {
public:
    LloydMaxNonConvergence(const std::string& what, ContourLevelSet last)
        : Error(what), last_iterate(std::move(last)) {}

    ContourLevelSet last_iterate;
};

/// Alternates midpoint cell boundaries and centroid levels against `pdf` starting from
/// `initial` (which must hold M levels inside the support). Cells with no probability
/// mass keep their level for that iteration. The result keeps `initial`'s range.
///
/// Throws LloydMaxNonConvergence (carrying the last iterate) after max_iterations, and
/// std::logic_error if the MSE ever increases.
ContourLevelSet lloyd_max_levels(const EmpiricalPdf& pdf, std::size_t m,
                                 const ContourLevelSet& initial,
                                 const LloydMaxOptions& options = {});

/// Sum over cells of the integral of (x - l_i)^2 f(x); cells are bounded by midpoints of
/// adjacent levels and by the pdf support.
double quantizer_mse(const EmpiricalPdf& pdf, const ContourLevelSet& levels);

}  // namespace stm
