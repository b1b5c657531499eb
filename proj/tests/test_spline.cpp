#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "stm/errors.hpp"
#include "stm/field.hpp"
#include "stm/spline.hpp"
#include "stm/text_io.hpp"

namespace {

using namespace stm;

std::vector<Point2> random_points(std::size_t n, std::uint64_t seed, double lo = 0.0, double hi = 100.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<Point2> pts(n);
    for (auto& p : pts) p = {u(rng), u(rng)};
    return pts;
}

std::vector<double> random_values(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(2.0, 1.5);
    std::vector<double> v(n);
    for (auto& x : v) x = g(rng);
    return v;
}

void expect_exact(const SplineModel& model, const std::vector<Point2>& pts, const std::vector<double>& v) {
    for (std::size_t k = 0; k < pts.size(); ++k) {
        EXPECT_LE(std::abs(evaluate_spline(model, pts[k]) - v[k]), 1e-6 * (1.0 + std::abs(v[k]))) << "point " << k;
    }
}

// ---------------------------------------------------------------------------
// greens_function
// ---------------------------------------------------------------------------

TEST(GreensFunction, KnownValues) {
    EXPECT_EQ(greens_function(0.0), 0.0);
    EXPECT_DOUBLE_EQ(greens_function(1.0), -1.0);
    EXPECT_NEAR(greens_function(std::exp(1.0)), 0.0, 1e-14);
    // 4 (ln 2 - 1)
    EXPECT_NEAR(greens_function(2.0), -1.2274112777602189, 1e-15);
}

TEST(GreensFunction, ContinuousAtZero) {
    EXPECT_LE(std::abs(greens_function(1e-12)), 1e-20);
}

// ---------------------------------------------------------------------------
// fit_biharmonic_spline
// ---------------------------------------------------------------------------

TEST(FitSpline, ZeroDataGivesZeroInterpolant) {
    const std::vector<Point2> pts{{10.0, 10.0}, {40.0, 70.0}};
    const std::vector<double> v{0.0, 0.0};
    const auto model = fit_biharmonic_spline(pts, v);
    EXPECT_EQ(evaluate_spline(model, pts[0]), 0.0);
    EXPECT_EQ(evaluate_spline(model, pts[1]), 0.0);
}

TEST(FitSpline, ReproducesPlaneAtNodes) {
    const auto pts = random_points(5, 21);
    std::vector<double> v;
    for (const auto& p : pts) v.push_back(0.1 * p.x + 0.2 * p.y);
    const auto model = fit_biharmonic_spline(pts, v);
    for (std::size_t k = 0; k < pts.size(); ++k) {
        EXPECT_NEAR(evaluate_spline(model, pts[k]), 0.1 * pts[k].x + 0.2 * pts[k].y, 1e-6);
    }
}

TEST(FitSpline, ExactAtFitPointsAcrossSizes) {
    for (std::size_t n : {2u, 3u, 17u, 120u, 600u}) {
        const auto pts = random_points(n, 100 + n);
        const auto v = random_values(n, 200 + n);
        const auto model = fit_biharmonic_spline(pts, v);
        EXPECT_EQ(model.centers.size(), n);
        expect_exact(model, pts, v);
    }
}

TEST(FitSpline, ClusteredPointsStayExact) {
    // A 6x6 block at 1e-2 spacing leaves G poorly conditioned.
    std::vector<Point2> pts;
    for (int i = 0; i < 6; ++i) {
        for (int j = 0; j < 6; ++j) pts.push_back({50.0 + 1e-2 * i, 50.0 + 1e-2 * j});
    }
    const auto far = random_points(30, 5);
    pts.insert(pts.end(), far.begin(), far.end());
    const auto v = random_values(pts.size(), 6);
    const auto model = fit_biharmonic_spline(pts, v);
    expect_exact(model, pts, v);
}

TEST(FitSpline, DenseNoisyDeploymentStaysExact) {
    // Thousands of noisy readings with a few near-coincident sensor pairs produce large
    // coefficients of mixed sign.
    auto pts = random_points(2000, 61);
    for (int k = 0; k < 20; ++k) pts.push_back({pts[k].x + 2e-3, pts[k].y - 1e-3});
    auto v = random_values(pts.size(), 62);
    std::mt19937_64 rng(63);
    std::normal_distribution<double> noise(0.0, 0.3);
    for (auto& x : v) x += noise(rng);
    const auto model = fit_biharmonic_spline(pts, v);
    expect_exact(model, pts, v);
}

TEST(FitSpline, CoincidentPointsMergeWithAveragedValues) {
    const std::vector<Point2> pts{{10.0, 10.0}, {10.0, 10.0 + 1e-12}, {60.0, 20.0}, {30.0, 80.0}};
    const std::vector<double> v{1.0, 3.0, 0.5, -1.0};
    const auto model = fit_biharmonic_spline(pts, v);
    EXPECT_EQ(model.merged_points, 1u);
    EXPECT_EQ(model.centers.size(), 3u);
    EXPECT_NEAR(evaluate_spline(model, pts[0]), 2.0, 1e-6 * 3.0);
    EXPECT_NEAR(evaluate_spline(model, pts[2]), 0.5, 1e-6 * 1.5);
}

TEST(FitSpline, MergeChainsTransitively) {
    // a~b and b~c are within the merge distance while a and c are not.
    const std::vector<Point2> pts{{10.0, 10.0}, {10.0 + 0.8e-9, 10.0}, {10.0 + 1.6e-9, 10.0}, {50.0, 50.0}};
    const std::vector<double> v{0.0, 3.0, 6.0, 1.0};
    const auto model = fit_biharmonic_spline(pts, v);
    EXPECT_EQ(model.centers.size(), 2u);
    EXPECT_NEAR(evaluate_spline(model, pts[0]), 3.0, 1e-5);
}

TEST(FitSpline, DegenerateInputsRejected) {
    const std::vector<Point2> one{{1.0, 1.0}};
    const std::vector<double> v1{1.0};
    EXPECT_THROW(fit_biharmonic_spline(one, v1), DegenerateInputError);
    const std::vector<Point2> same{{1.0, 1.0}, {1.0, 1.0}};
    const std::vector<double> v2{1.0, 2.0};
    EXPECT_THROW(fit_biharmonic_spline(same, v2), DegenerateInputError);
    const std::vector<double> short_values{1.0};
    EXPECT_THROW(fit_biharmonic_spline(same, short_values), ContractError);
}

TEST(FitSpline, Superposition) {
    const auto pts = random_points(80, 31);
    const auto v1 = random_values(80, 32);
    const auto v2 = random_values(80, 33);
    std::vector<double> sum(80);
    for (std::size_t k = 0; k < 80; ++k) sum[k] = v1[k] + v2[k];
    const auto m1 = fit_biharmonic_spline(pts, v1);
    const auto m2 = fit_biharmonic_spline(pts, v2);
    const auto ms = fit_biharmonic_spline(pts, sum);
    for (const auto& q : random_points(50, 34)) {
        const double expect = evaluate_spline(m1, q) + evaluate_spline(m2, q);
        EXPECT_NEAR(evaluate_spline(ms, q), expect, 1e-7 * (1.0 + std::abs(expect)));
    }
}

TEST(FitSpline, TranslationInvariance) {
    // Dyadic coordinates and offset keep the translated distances bit-identical.
    std::mt19937_64 rng(41);
    std::uniform_int_distribution<int> cell(0, 400);
    std::vector<Point2> pts, moved;
    for (int k = 0; k < 60; ++k) {
        const Point2 p{cell(rng) * 0.25, cell(rng) * 0.25};
        bool dup = false;
        for (const auto& q : pts) dup = dup || (q.x == p.x && q.y == p.y);
        if (dup) continue;
        pts.push_back(p);
        moved.push_back({p.x + 12.5, p.y - 7.75});
    }
    const auto v = random_values(pts.size(), 42);
    const auto a = fit_biharmonic_spline(pts, v);
    const auto b = fit_biharmonic_spline(moved, v);
    for (int k = 0; k < 40; ++k) {
        const Point2 q{cell(rng) * 0.25 + 0.125, cell(rng) * 0.25 + 0.375};
        EXPECT_NEAR(evaluate_spline(a, q), evaluate_spline(b, Point2{q.x + 12.5, q.y - 7.75}), 1e-9);
    }
}

TEST(SplineSolver, ReusedFactorizationMatchesFreshFit) {
    const auto pts = random_points(300, 51);
    const auto v1 = random_values(300, 52);
    const auto v2 = random_values(300, 53);
    SplineSolver solver;
    solver.fit(pts, v1);
    EXPECT_FALSE(solver.last_fit_reused());
    const auto reused = solver.fit(pts, v2);
    EXPECT_TRUE(solver.last_fit_reused());
    const auto fresh = fit_biharmonic_spline(pts, v2);
    EXPECT_EQ(reused.coefficients, fresh.coefficients);

    auto moved = pts;
    moved[7].x += 0.5;
    solver.fit(moved, v2);
    EXPECT_FALSE(solver.last_fit_reused());
}

// ---------------------------------------------------------------------------
// evaluate_spline on a grid and value_range
// ---------------------------------------------------------------------------

TEST(EvaluateGrid, ZeroCoefficientsGiveZeroGrid) {
    SplineModel m;
    m.centers = {{3.0, 4.0}, {50.0, 50.0}};
    m.coefficients = {0.0, 0.0};
    GridSpec g;
    g.p = 11;
    g.q = 7;
    const auto r = evaluate_spline(m, g);
    ASSERT_EQ(r.values.size(), 77u);
    for (double v : r.values) EXPECT_EQ(v, 0.0);
}

TEST(EvaluateGrid, LatticeSpansTheRectangle) {
    GridSpec g;
    EXPECT_EQ(g.x_at(0), 0.0);
    EXPECT_EQ(g.x_at(100), 100.0);
    EXPECT_EQ(g.y_at(37), 37.0);
    EXPECT_EQ(g.size(), 101u * 101u);
}

TEST(EvaluateGrid, UnitDistanceGivesMinusOne) {
    SplineModel m;
    m.centers = {{10.0, 20.0}};
    m.coefficients = {1.0};
    const GridSpec g;
    const auto r = evaluate_spline(m, g);
    EXPECT_DOUBLE_EQ(r.at(11, 20), -1.0);
    EXPECT_DOUBLE_EQ(r.at(10, 21), -1.0);
    EXPECT_EQ(r.at(10, 20), 0.0);
}

TEST(EvaluateGrid, MatchesPointEvaluationAndIsLinear) {
    const auto pts = random_points(40, 61);
    SplineModel m1, m2, ms;
    m1.centers = m2.centers = ms.centers = pts;
    const auto c1 = random_values(40, 62);
    const auto c2 = random_values(40, 63);
    m1.coefficients = c1;
    m2.coefficients = c2;
    for (std::size_t k = 0; k < 40; ++k) ms.coefficients.push_back(c1[k] + c2[k]);
    GridSpec g;
    g.p = 21;
    g.q = 31;
    const auto r1 = evaluate_spline(m1, g);
    const auto r2 = evaluate_spline(m2, g);
    const auto rs = evaluate_spline(ms, g);
    for (std::size_t i = 0; i < g.p; ++i) {
        for (std::size_t j = 0; j < g.q; ++j) {
            const double direct = evaluate_spline(m1, Point2{g.x_at(i), g.y_at(j)});
            EXPECT_NEAR(r1.at(i, j), direct, 1e-9 * (1.0 + std::abs(direct)));
            EXPECT_NEAR(rs.at(i, j), r1.at(i, j) + r2.at(i, j), 1e-9 * (1.0 + std::abs(rs.at(i, j))));
        }
    }
}

TEST(ValueRange, Extremes) {
    GridSpec g;
    g.p = 2;
    g.q = 2;
    auto r = Reconstruction::zeros(g);
    EXPECT_EQ(value_range(r).min, 0.0);
    EXPECT_EQ(value_range(r).max, 0.0);
    r.values = {-1.0, 0.0, 5.0, 0.0};
    EXPECT_EQ(value_range(r).min, -1.0);
    EXPECT_EQ(value_range(r).max, 5.0);
}

TEST(ValueRange, DenseReconstructionCoversTrueRange) {
    const auto field = synthesize_field(FieldParams{}, 71);
    const GridSpec g;
    const auto truth = sample_grid(g, [&](double x, double y) { return evaluate_field(field, x, y); });
    const auto d = deploy_uniform(1500, 100.0, 100.0, 72);
    std::vector<Point2> pts;
    std::vector<double> v;
    for (const auto& s : d.sensors) {
        pts.push_back({s.x, s.y});
        v.push_back(evaluate_field(field, s.x, s.y));
    }
    const auto recon = evaluate_spline(fit_biharmonic_spline(pts, v), g);
    const auto tr = value_range(truth);
    const auto rr = value_range(recon);
    const double covered = std::min(tr.max, rr.max) - std::max(tr.min, rr.min);
    EXPECT_GE(covered, 0.9 * tr.span());
}

TEST(ReconstructionCsv, ParsesBack) {
    SplineModel m;
    m.centers = {{10.0, 20.0}, {70.0, 30.0}};
    m.coefficients = {0.01, -0.02};
    GridSpec g;
    g.p = 5;
    g.q = 4;
    const auto r = evaluate_spline(m, g);
    const auto t = parse_csv(reconstruction_csv(r).str());
    ASSERT_EQ(t.rows.size(), 20u);
    const auto vi = t.column("value");
    for (std::size_t k = 0; k < 20; ++k) {
        const auto i = static_cast<std::size_t>(parse_integer(t.rows[k][t.column("i")]));
        const auto j = static_cast<std::size_t>(parse_integer(t.rows[k][t.column("j")]));
        EXPECT_EQ(parse_double(t.rows[k][vi]), r.at(i, j));
        EXPECT_EQ(parse_double(t.rows[k][t.column("x")]), g.x_at(i));
    }
}

}  // namespace
