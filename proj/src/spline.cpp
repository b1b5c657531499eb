#include "stm/spline.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>

#include "stm/errors.hpp"

namespace stm {

namespace {

// r^2 (ln r - 1) written in terms of d2 = r^2, which avoids a sqrt per pair.
inline double greens_from_squared(double d2) {
    return d2 > 0.0 ? d2 * (0.5 * std::log(d2) - 1.0) : 0.0;
}

inline double squared_distance(Point2 a, Point2 b) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    return dx * dx + dy * dy;
}

// Coincident-point clusters: every input maps to one center, the earliest point of
// its cluster.
struct Clusters {
    std::vector<Point2> centers;
    std::vector<std::size_t> slot;
    std::vector<std::size_t> counts;
};

// Folds points closer than kCoincidentDistance into the earliest one.
Clusters cluster_points(std::span<const Point2> points) {
    const std::size_t n = points.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return points[a].x < points[b].x || (points[a].x == points[b].x && a < b);
    });

    std::vector<std::size_t> owner(n);
    std::iota(owner.begin(), owner.end(), 0);
    auto find = [&owner](std::size_t i) {
        while (owner[i] != i) i = owner[i] = owner[owner[i]];
        return i;
    };
    const double limit2 = kCoincidentDistance * kCoincidentDistance;
    for (std::size_t s = 0; s < n; ++s) {
        const std::size_t i = order[s];
        for (std::size_t t = s + 1; t < n; ++t) {
            const std::size_t j = order[t];
            if (points[j].x - points[i].x >= kCoincidentDistance) break;
            if (squared_distance(points[i], points[j]) < limit2) {
                const std::size_t a = find(i), b = find(j);
                owner[std::max(a, b)] = std::min(a, b);
            }
        }
    }

    Clusters out;
    out.slot.assign(n, n);
    std::vector<std::size_t> slot_of_root(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t r = find(i);
        if (slot_of_root[r] == n) {
            slot_of_root[r] = out.centers.size();
            out.centers.push_back(points[r]);
            out.counts.push_back(0);
        }
        out.slot[i] = slot_of_root[r];
        ++out.counts[slot_of_root[r]];
    }
    return out;
}

std::vector<double> cluster_means(const Clusters& clusters, std::span<const double> values) {
    std::vector<double> out(clusters.centers.size(), 0.0);
    for (std::size_t i = 0; i < values.size(); ++i) out[clusters.slot[i]] += values[i];
    for (std::size_t k = 0; k < out.size(); ++k) out[k] /= static_cast<double>(clusters.counts[k]);
    return out;
}

// v - G c accumulated in long double. A working-precision residual stalls refinement
// near eps * |G| |c|, which on clustered sensors is above the exactness tolerance.
Eigen::VectorXd extended_residual(const Eigen::MatrixXd& g, const Eigen::VectorXd& c, const Eigen::VectorXd& v) {
    Eigen::VectorXd r(v.size());
    for (Eigen::Index k = 0; k < v.size(); ++k) {
        // G is symmetric, so column k is row k in contiguous storage.
        const double* col = g.col(k).data();
        long double s = v[k];
        for (Eigen::Index j = 0; j < v.size(); ++j) s -= static_cast<long double>(col[j]) * c[j];
        r[k] = static_cast<double>(s);
    }
    return r;
}

double worst_ratio(const Eigen::VectorXd& r, const Eigen::VectorXd& v) {
    double worst = 0.0;
    for (Eigen::Index k = 0; k < r.size(); ++k) {
        worst = std::max(worst, std::abs(r[k]) / (1.0 + std::abs(v[k])));
    }
    return worst;
}

// Refinement target, well inside the public 1e-6 contract.
constexpr double kSolveTolerance = 1e-8;
// The ridge fallback runs only when the plain solve misses this.
constexpr double kFallbackTolerance = 1e-7;
constexpr double kExactnessTolerance = 1e-6;
constexpr int kMaxRefinementSteps = 30;

// Iterative refinement against G. With the ridge factorization as preconditioner the
// residual shrinks slowly on nearly singular systems, so refinement continues while it
// keeps improving and the best iterate is returned.
template <typename Factorization>
Eigen::VectorXd solve_refined(const Factorization& factor, const Eigen::MatrixXd& g, const Eigen::VectorXd& v,
                              double& worst) {
    Eigen::VectorXd c = factor.solve(v);
    Eigen::VectorXd r = extended_residual(g, c, v);
    worst = worst_ratio(r, v);
    for (int step = 0; step < kMaxRefinementSteps && worst > kSolveTolerance; ++step) {
        Eigen::VectorXd next = c + factor.solve(r);
        Eigen::VectorXd next_r = extended_residual(g, next, v);
        const double next_worst = worst_ratio(next_r, v);
        if (!(next_worst < worst)) break;
        c = std::move(next);
        r = std::move(next_r);
        worst = next_worst;
    }
    return c;
}

}  // namespace

double greens_function(double r) {
    return r > 0.0 ? r * r * (std::log(r) - 1.0) : 0.0;
}

Reconstruction Reconstruction::zeros(const GridSpec& grid, std::size_t iteration) {
    Reconstruction r;
    r.grid = grid;
    r.values.assign(grid.size(), 0.0);
    r.iteration = iteration;
    return r;
}

void Reconstruction::validate() const {
    if (grid.p < 2 || grid.q < 2) {
        throw ContractError("reconstruction grid needs P >= 2 and Q >= 2");
    }
    if (values.size() != grid.size()) {
        throw ContractError("reconstruction holds " + std::to_string(values.size()) + " values for a " +
                            std::to_string(grid.p) + "x" + std::to_string(grid.q) + " grid");
    }
    for (double v : values) {
        if (!std::isfinite(v)) throw ContractError("reconstruction contains a non-finite value");
    }
}

struct SplineSolver::Factors {
    std::vector<Point2> inputs;
    Clusters clusters;
    Eigen::MatrixXd g;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu;
    // Built on first need; shared by every copy of the solver.
    mutable std::mutex ridge_mutex;
    mutable std::optional<Eigen::PartialPivLU<Eigen::MatrixXd>> ridge_lu;
    double ridge = 0.0;
};

SplineModel fit_biharmonic_spline(std::span<const Point2> points, std::span<const double> values) {
    return SplineSolver().fit(points, values);
}

SplineModel SplineSolver::fit(std::span<const Point2> points, std::span<const double> values) {
    if (points.size() != values.size()) {
        throw ContractError("spline fit needs one value per point");
    }
    for (std::size_t k = 0; k < points.size(); ++k) {
        if (!std::isfinite(points[k].x) || !std::isfinite(points[k].y) || !std::isfinite(values[k])) {
            throw ContractError("spline fit inputs must be finite");
        }
    }

    reused_ = factors_ && factors_->inputs.size() == points.size() &&
              std::equal(points.begin(), points.end(), factors_->inputs.begin(),
                         [](Point2 a, Point2 b) { return a.x == b.x && a.y == b.y; });
    if (!reused_) {
        factors_.reset();
        Clusters clusters = cluster_points(points);
        const auto n = static_cast<Eigen::Index>(clusters.centers.size());
        if (n < 2) {
            throw DegenerateInputError("spline fit needs at least 2 distinct points, got " + std::to_string(n));
        }
        auto f = std::make_shared<Factors>();
        f->inputs.assign(points.begin(), points.end());
        f->g.resize(n, n);
        for (Eigen::Index k = 0; k < n; ++k) {
            f->g(k, k) = 0.0;
            for (Eigen::Index j = k + 1; j < n; ++j) {
                const double value =
                    greens_from_squared(squared_distance(clusters.centers[j], clusters.centers[k]));
                f->g(j, k) = value;
                f->g(k, j) = value;
            }
        }
        f->clusters = std::move(clusters);
        f->lu.compute(f->g);
        // The diagonal of G is identically zero, so the ridge is scaled by the mean
        // absolute entry instead of the trace.
        f->ridge = 1e-8 * f->g.cwiseAbs().sum() / static_cast<double>(n * n);
        factors_ = std::move(f);
    }
    const Factors& f = *factors_;
    const auto n = static_cast<Eigen::Index>(f.clusters.centers.size());
    const std::vector<double> merged_values = cluster_means(f.clusters, values);
    const Eigen::Map<const Eigen::VectorXd> v(merged_values.data(), n);

    SplineModel model;
    model.centers = f.clusters.centers;
    model.merged_points = points.size() - f.clusters.centers.size();

    double worst = 0.0;
    Eigen::VectorXd c = solve_refined(f.lu, f.g, v, worst);
    if (!(worst <= kFallbackTolerance)) {
        double ridge_worst = 0.0;
        Eigen::VectorXd ridge_c;
        {
            std::lock_guard<std::mutex> lock(f.ridge_mutex);
            if (!f.ridge_lu) {
                Eigen::MatrixXd shifted = f.g;
                shifted.diagonal().array() += f.ridge;
                f.ridge_lu.emplace(shifted);
            }
            // Refinement against the unshifted G drives the residual of the exact system down.
            ridge_c = solve_refined(*f.ridge_lu, f.g, v, ridge_worst);
        }
        if (!(std::min(worst, ridge_worst) <= kExactnessTolerance)) {
            std::ostringstream msg;
            msg << "biharmonic spline system is numerically singular: n=" << n
                << ", worst relative residual=" << std::min(worst, ridge_worst) << ", ridge=" << f.ridge;
            throw ConditioningError(msg.str(), static_cast<std::size_t>(n), std::min(worst, ridge_worst),
                                    f.ridge);
        }
        if (ridge_worst < worst) {
            c = std::move(ridge_c);
            model.ridge = f.ridge;
        }
    }
    model.coefficients.assign(c.data(), c.data() + n);
    return model;
}

// Sums accumulate in long double: with thousands of centers the terms are large and of
// mixed sign, and a double accumulator alone can miss the exactness tolerance.
double evaluate_spline(const SplineModel& model, Point2 at) {
    long double sum = 0.0L;
    for (std::size_t k = 0; k < model.centers.size(); ++k) {
        sum += static_cast<long double>(model.coefficients[k]) *
               greens_from_squared(squared_distance(at, model.centers[k]));
    }
    return static_cast<double>(sum);
}

Reconstruction evaluate_spline(const SplineModel& model, const GridSpec& grid) {
    Reconstruction out = Reconstruction::zeros(grid);
    const std::size_t n = model.centers.size();
    std::vector<double> dx2(n);
    for (std::size_t i = 0; i < grid.p; ++i) {
        const double x = grid.x_at(i);
        for (std::size_t k = 0; k < n; ++k) {
            const double dx = x - model.centers[k].x;
            dx2[k] = dx * dx;
        }
        for (std::size_t j = 0; j < grid.q; ++j) {
            const double y = grid.y_at(j);
            long double sum = 0.0L;
            for (std::size_t k = 0; k < n; ++k) {
                const double dy = y - model.centers[k].y;
                sum += static_cast<long double>(model.coefficients[k]) * greens_from_squared(dx2[k] + dy * dy);
            }
            out.values[i * grid.q + j] = static_cast<double>(sum);
        }
    }
    return out;
}

ValueRange value_range(const Reconstruction& recon) {
    if (recon.values.empty()) {
        throw ContractError("value range of an empty reconstruction");
    }
    const auto [lo, hi] = std::minmax_element(recon.values.begin(), recon.values.end());
    return {*lo, *hi};
}

}  // namespace stm
