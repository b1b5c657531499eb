#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace stm {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

/// Green's function of the 2-D biharmonic operator, r^2 (ln r - 1), with its limit 0 at r = 0.
double greens_function(double r);

/// Interpolant s(p) = sum_k coefficients[k] * greens_function(|p - centers[k]|).
struct SplineModel {
    std::vector<Point2> centers;
    std::vector<double> coefficients;
    /// Diagonal ridge that was needed to solve the system; 0 for a plain solve.
    double ridge = 0.0;
    /// Input points folded into another center by coincident-point merging.
    std::size_t merged_points = 0;
};

/// Regular P x Q lattice spanning [0, width] x [0, height], edges included.
struct GridSpec {
    std::size_t p = 101;
    std::size_t q = 101;
    double width = 100.0;
    double height = 100.0;

    double x_at(std::size_t i) const { return width * static_cast<double>(i) / static_cast<double>(p - 1); }
    double y_at(std::size_t j) const { return height * static_cast<double>(j) / static_cast<double>(q - 1); }
    std::size_t size() const { return p * q; }

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Field values on a GridSpec lattice, stored x-major: values[i * q + j] is (x_i, y_j).
struct Reconstruction {
    GridSpec grid;
    std::vector<double> values;
    std::size_t iteration = 0;

    double at(std::size_t i, std::size_t j) const { return values[i * grid.q + j]; }

    static Reconstruction zeros(const GridSpec& grid, std::size_t iteration = 0);

    /// Throws if P or Q < 2, the value count is wrong, or any value is non-finite.
    void validate() const;
};

struct ValueRange {
    double min = 0.0;
    double max = 0.0;

    double span() const { return max - min; }
};

/// Points closer than this are merged (values averaged) before fitting.
inline constexpr double kCoincidentDistance = 1e-9;

/// Solves G c = v with G[j][k] = greens_function(|p_j - p_k|). Falls back to iterative
/// refinement and then a small diagonal ridge when the plain LU solve misses the
/// exactness tolerance |s(p_k) - v_k| <= 1e-6 (1 + |v_k|).
///
/// Throws DegenerateInputError for fewer than two distinct points, and ConditioningError
/// when no attempt meets the tolerance.
SplineModel fit_biharmonic_spline(std::span<const Point2> points, std::span<const double> values);

/// Same fit, but keeps the factorization of the last point set. Fitting new values at
/// exactly the same points skips the O(n^3) solve. Copies share the cached factors.
class SplineSolver {
public:
    SplineModel fit(std::span<const Point2> points, std::span<const double> values);

    /// True when the previous fit reused a cached factorization.
    bool last_fit_reused() const { return reused_; }

private:
    struct Factors;
    std::shared_ptr<const Factors> factors_;
    bool reused_ = false;
};

double evaluate_spline(const SplineModel& model, Point2 at);

Reconstruction evaluate_spline(const SplineModel& model, const GridSpec& grid);

ValueRange value_range(const Reconstruction& recon);

/// Samples f(x, y) on the lattice.
template <typename F>
Reconstruction sample_grid(const GridSpec& grid, F&& f) {
    Reconstruction out;
    out.grid = grid;
    out.values.resize(grid.size());
    for (std::size_t i = 0; i < grid.p; ++i) {
        const double x = grid.x_at(i);
        for (std::size_t j = 0; j < grid.q; ++j) {
            out.values[i * grid.q + j] = f(x, grid.y_at(j));
        }
    }
    return out;
}

}  // namespace stm
