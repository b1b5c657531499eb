#include "stm/quantization.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

namespace stm {

namespace {

// Cell boundaries: support start, midpoints of adjacent levels, support end.
std::vector<double> cell_boundaries(const EmpiricalPdf& pdf, const std::vector<double>& levels) {
    std::vector<double> b(levels.size() + 1);
    b.front() = pdf.support_min();
    b.back() = pdf.support_max();
    for (std::size_t i = 1; i < levels.size(); ++i) {
        b[i] = 0.5 * (levels[i - 1] + levels[i]);
    }
    return b;
}

double mse_for(const EmpiricalPdf& pdf, const std::vector<double>& levels) {
    const auto b = cell_boundaries(pdf, levels);
    double total = 0.0;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        total += pdf.squared_deviation(b[i], b[i + 1], levels[i]);
    }
    return total;
}

// Visits every bin overlapping [a, b] with the clipped sub-interval [lo, hi].
template <typename F>
void for_each_overlap(const EmpiricalPdf& pdf, double a, double b, F&& f) {
    a = std::max(a, pdf.support_min());
    b = std::min(b, pdf.support_max());
    if (!(b > a)) return;
    const auto& e = pdf.bin_edges;
    auto it = std::upper_bound(e.begin(), e.end(), a);
    std::size_t k = it == e.begin() ? 0 : static_cast<std::size_t>(it - e.begin()) - 1;
    for (; k < pdf.densities.size() && e[k] < b; ++k) {
        const double lo = std::max(a, e[k]);
        const double hi = std::min(b, e[k + 1]);
        if (hi > lo) f(pdf.densities[k], lo, hi);
    }
}

}  // namespace

void ContourLevelSet::validate() const {
    if (levels.empty()) {
        throw InvalidRangeError("a contour level set needs at least one level");
    }
    if (!(range_min < range_max)) {
        throw InvalidRangeError("contour range must satisfy L_min < L_max");
    }
    double prev = range_min;
    for (double l : levels) {
        if (!(l > prev)) {
            throw InvalidRangeError("contour levels must be strictly increasing inside (L_min, L_max)");
        }
        prev = l;
    }
    if (!(prev < range_max)) {
        throw InvalidRangeError("contour levels must be strictly increasing inside (L_min, L_max)");
    }
}

EmpiricalPdf EmpiricalPdf::from_weights(std::vector<double> edges, const std::vector<double>& weights) {
    if (edges.size() != weights.size() + 1 || weights.empty()) {
        throw ContractError("a pdf needs one weight per bin and bin_count + 1 edges");
    }
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw ContractError("pdf weights must be non-negative");
        total += w;
    }
    if (!(total > 0.0)) throw DegeneratePdfError("pdf weights sum to zero");
    EmpiricalPdf pdf;
    pdf.bin_edges = std::move(edges);
    pdf.densities.resize(weights.size());
    for (std::size_t k = 0; k < weights.size(); ++k) {
        const double width = pdf.bin_edges[k + 1] - pdf.bin_edges[k];
        if (!(width > 0.0)) throw ContractError("pdf bin edges must be strictly increasing");
        pdf.densities[k] = weights[k] / (total * width);
    }
    return pdf;
}

double EmpiricalPdf::mass(double a, double b) const {
    double m = 0.0;
    for_each_overlap(*this, a, b, [&](double d, double lo, double hi) { m += d * (hi - lo); });
    return m;
}

double EmpiricalPdf::first_moment(double a, double b) const {
    double m = 0.0;
    for_each_overlap(*this, a, b, [&](double d, double lo, double hi) { m += d * 0.5 * (hi - lo) * (hi + lo); });
    return m;
}

double EmpiricalPdf::squared_deviation(double a, double b, double c) const {
    double m = 0.0;
    for_each_overlap(*this, a, b, [&](double d, double lo, double hi) {
        const double u = hi - c;
        const double l = lo - c;
        m += d * (u * u * u - l * l * l) / 3.0;
    });
    return m;
}

void EmpiricalPdf::validate() const {
    if (densities.empty() || bin_edges.size() != densities.size() + 1) {
        throw ContractError("a pdf needs bin_count + 1 edges");
    }
    double integral = 0.0;
    for (std::size_t k = 0; k < densities.size(); ++k) {
        const double width = bin_edges[k + 1] - bin_edges[k];
        if (!(width > 0.0)) throw ContractError("pdf bin edges must be strictly increasing");
        if (!(densities[k] >= 0.0) || !std::isfinite(densities[k])) {
            throw ContractError("pdf densities must be non-negative and finite");
        }
        integral += densities[k] * width;
    }
    if (std::abs(integral - 1.0) > 1e-9) {
        throw ContractError("pdf does not integrate to one");
    }
}

ContourLevelSet uniform_levels(double lo, double hi, std::size_t m) {
    if (m == 0) throw ContractError("uniform_levels needs M >= 1");
    if (!(lo < hi)) {
        std::ostringstream msg;
        msg << "invalid signal range (" << lo << ", " << hi << "): L_min must be below L_max";
        throw InvalidRangeError(msg.str());
    }
    ContourLevelSet set;
    set.range_min = lo;
    set.range_max = hi;
    set.levels.resize(m);
    const double step = (hi - lo) / static_cast<double>(m + 1);
    for (std::size_t i = 0; i < m; ++i) {
        set.levels[i] = lo + static_cast<double>(i + 1) * step;
    }
    set.validate();
    return set;
}

EmpiricalPdf estimate_pdf(const Reconstruction& recon, std::size_t bin_count) {
    if (bin_count == 0) throw ContractError("estimate_pdf needs at least one bin");
    const ValueRange range = value_range(recon);
    if (!(range.max > range.min)) {
        throw DegeneratePdfError("cannot estimate a pdf from a constant reconstruction");
    }
    std::vector<double> edges(bin_count + 1);
    const double width = range.span() / static_cast<double>(bin_count);
    for (std::size_t k = 0; k < bin_count; ++k) {
        edges[k] = range.min + static_cast<double>(k) * width;
    }
    edges.back() = range.max;

    std::vector<double> counts(bin_count, 0.0);
    for (double v : recon.values) {
        auto k = static_cast<std::size_t>((v - range.min) / width);
        counts[std::min(k, bin_count - 1)] += 1.0;
    }
    return EmpiricalPdf::from_weights(std::move(edges), counts);
}

double quantizer_mse(const EmpiricalPdf& pdf, const ContourLevelSet& levels) {
    if (levels.levels.empty()) throw ContractError("quantizer_mse needs at least one level");
    return mse_for(pdf, levels.levels);
}

ContourLevelSet lloyd_max_levels(const EmpiricalPdf& pdf, std::size_t m, const ContourLevelSet& initial,
                                 const LloydMaxOptions& options) {
    pdf.validate();
    if (m == 0 || initial.size() != m) {
        throw ContractError("Lloyd-Max needs an initial set of exactly M levels");
    }
    for (std::size_t i = 0; i < m; ++i) {
        const double l = initial.levels[i];
        if (!(l >= pdf.support_min() && l <= pdf.support_max()) || (i > 0 && !(l > initial.levels[i - 1]))) {
            throw ContractError("Lloyd-Max initial levels must be strictly increasing inside the pdf support");
        }
    }

    const double tolerance = options.relative_tolerance * (pdf.support_max() - pdf.support_min());
    ContourLevelSet current = initial;
    double mse = mse_for(pdf, current.levels);
    if (options.mse_trace) {
        options.mse_trace->clear();
        options.mse_trace->push_back(mse);
    }

    for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
        const auto b = cell_boundaries(pdf, current.levels);
        double moved = 0.0;
        std::vector<double> next = current.levels;
        for (std::size_t i = 0; i < m; ++i) {
            const double mass = pdf.mass(b[i], b[i + 1]);
            if (mass > 0.0) {
                next[i] = pdf.first_moment(b[i], b[i + 1]) / mass;
            }
            moved = std::max(moved, std::abs(next[i] - current.levels[i]));
        }
        const double next_mse = mse_for(pdf, next);
        if (next_mse > mse * (1.0 + 1e-12) + 1e-300) {
            std::ostringstream msg;
            msg << "Lloyd-Max MSE increased from " << mse << " to " << next_mse << " at iteration " << iter + 1;
            throw std::logic_error(msg.str());
        }
        current.levels = std::move(next);
        mse = next_mse;
        if (options.mse_trace) options.mse_trace->push_back(mse);
        if (moved < tolerance) {
            current.validate();
            return current;
        }
    }
    std::ostringstream msg;
    msg << "Lloyd-Max did not converge within " << options.max_iterations << " iterations";
    throw LloydMaxNonConvergence(msg.str(), current);
}

}  // namespace stm
