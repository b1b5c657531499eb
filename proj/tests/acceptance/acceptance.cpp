// Acceptance runner. Each criterion prints one PASS/FAIL line; pass criterion numbers as
// arguments to run a subset. The exit status is nonzero when any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "acceptance/oracles.hpp"
#include "stm/config.hpp"
#include "stm/field.hpp"
#include "stm/monitoring.hpp"
#include "stm/quantization.hpp"
#include "stm/scenario.hpp"
#include "stm/seeds.hpp"
#include "stm/spline.hpp"

namespace fs = std::filesystem;

namespace {

using namespace stm;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

// Default scenario with nothing written to disk.
ScenarioConfig quiet_defaults() {
    ScenarioConfig c;
    c.output_dir.clear();
    return c;
}

// 1: mean per-period reporting fraction of LM-SG over 10 seeds and 20 periods.
Outcome temporal_cost_band() {
    ScenarioConfig c = quiet_defaults();
    c.monitoring.scheme = Scheme::LMSG;
    c.replicates = 10;
    c.periods = 20;
    const ScenarioResult result = run_scenario(c);

    std::vector<double> all;
    std::ostringstream per_seed;
    for (const auto& r : result.replicates) {
        std::vector<double> f;
        for (const auto& p : r.report.periods) f.push_back(p.fraction);
        all.insert(all.end(), f.begin(), f.end());
        per_seed << (per_seed.tellp() > 0 ? "," : "") << fmt(mean_of(f));
    }
    const double mean = mean_of(all);
    const bool complete = all.size() == c.replicates * c.periods;
    return {complete && mean >= 0.07 && mean <= 0.13,
            "mean fraction " + fmt(mean) + " over " + std::to_string(all.size()) +
                " periods, band [0.07, 0.13]; per seed " + per_seed.str()};
}

// Seed-averaged value of a column at the row whose averaged M is `m`.
const SchemeAverage* row_at_m(const CompareResult& result, Scheme scheme, double m) {
    for (const auto& a : result.averages) {
        if (a.scheme == scheme && std::abs(a.m - m) < 1e-9) return &a;
    }
    return nullptr;
}

const SchemeAverage* final_row(const CompareResult& result, Scheme scheme) {
    const SchemeAverage* last = nullptr;
    for (const auto& a : result.averages) {
        if (a.scheme == scheme && (!last || a.n > last->n)) last = &a;
    }
    return last;
}

// 2 and 3 share one 20-seed comparison.
struct ComparisonCriteria {
    Outcome cost;
    Outcome error;
};

ComparisonCriteria compare_criteria() {
    ScenarioConfig c = quiet_defaults();
    c.replicates = 20;
    const std::vector<Scheme> schemes{Scheme::USG, Scheme::LMFixed, Scheme::LMSG};
    const CompareResult result = compare_schemes(c, schemes);

    ComparisonCriteria out;
    const auto* usg = final_row(result, Scheme::USG);
    const auto* fixed = final_row(result, Scheme::LMFixed);
    const auto* lmsg = final_row(result, Scheme::LMSG);
    if (!usg || !fixed || !lmsg) {
        out.cost = {false, "comparison produced no rows"};
    } else {
        const double r_lmsg = lmsg->cumulative_cost / fixed->cumulative_cost;
        const double r_usg = usg->cumulative_cost / fixed->cumulative_cost;
        out.cost = {r_lmsg <= 0.85 && r_usg <= 0.85,
                    "final cumulative cost U-SG " + fmt(usg->cumulative_cost) + ", LM-fixed " +
                        fmt(fixed->cumulative_cost) + ", LM-SG " + fmt(lmsg->cumulative_cost) +
                        "; ratios to LM-fixed " + fmt(r_usg) + " and " + fmt(r_lmsg) + " (need <= 0.85)"};
    }

    bool all_lower = true;
    std::ostringstream detail;
    for (Scheme s : schemes) {
        const auto* at5 = row_at_m(result, s, 5.0);
        const auto* at20 = row_at_m(result, s, 20.0);
        detail << (detail.tellp() > 0 ? "; " : "") << to_string(s) << " ";
        if (!at5 || !at20) {
            all_lower = false;
            detail << "missing M=5 or M=20 row";
            continue;
        }
        all_lower = all_lower && at20->error_vs_truth < at5->error_vs_truth;
        detail << "M=5 " << fmt(at5->error_vs_truth) << " M=20 " << fmt(at20->error_vs_truth);
    }
    out.error = {all_lower, "seed-averaged error vs truth: " + detail.str()};
    return out;
}

// 4: final Δ after 20 noiseless LM-SG iterations from initial Δ scaled by 0.5, 1 and 2.
Outcome delta_convergence() {
    ScenarioConfig c = quiet_defaults();
    c.noise_sigma = 0.0;
    c.monitoring.scheme = Scheme::LMSG;
    c.monitoring.eps_stop = 0.0;
    c.monitoring.m_max = c.monitoring.initial_m + 19;
    const std::vector<double> scales{0.5, 1.0, 2.0};

    std::size_t tight = 0;
    std::ostringstream ratios;
    for (std::size_t r = 0; r < 10; ++r) {
        const ReplicateSetup setup = prepare_replicate(c, r);
        const SensorSimulator sensors(setup.deployment, c.noise_sigma, c.noise_taps, setup.noise_seed);
        double lo = INFINITY;
        double hi = 0.0;
        bool ran_twenty = true;
        for (double s : scales) {
            MonitoringConfig m = c.monitoring;
            m.initial_delta_scale = s;
            const SpatialOutcome out = run_spatial_monitoring(m, setup.field, sensors, setup.probe_seed);
            ran_twenty = ran_twenty && out.report.iterations.size() == 20;
            lo = std::min(lo, out.state.delta_state.delta);
            hi = std::max(hi, out.state.delta_state.delta);
        }
        const double ratio = hi / lo;
        if (ran_twenty && ratio <= 2.0) ++tight;
        ratios << (r ? "," : "") << fmt(ratio) << (ran_twenty ? "" : "(short)");
    }
    return {tight >= 8, std::to_string(tight) + " of 10 seeds within 2x (need >= 8); max/min final delta " +
                            ratios.str()};
}

// 5: Lloyd-Max against exhaustive search on step pdfs.
Outcome lloyd_max_oracle() {
    const std::vector<std::pair<std::vector<double>, std::vector<double>>> pdfs{
        {{0.0, 1.0}, {1.0}},
        {{0.0, 0.25, 0.5, 0.75, 1.0}, {1.0, 2.0, 3.0, 4.0}},
        {{0.0, 0.2, 0.4, 0.6, 0.8, 1.0}, {1.0, 3.0, 6.0, 3.0, 1.0}},
        {{-0.5, -0.3, 0.1, 0.25, 0.5}, {0.5, 4.0, 0.2, 2.0}},
        {{2.0, 2.125, 2.25, 2.375, 2.5, 2.625, 2.75, 2.875, 3.0}, {5.0, 1.0, 0.5, 0.3, 0.3, 0.5, 1.0, 2.0}},
    };
    double worst_rel = 0.0;
    double worst_consistency = 0.0;
    bool descent = true;
    std::size_t runs = 0;
    for (const auto& [edges, heights] : pdfs) {
        const oracle::StepPdf ref = oracle::make_step_pdf(edges, heights);
        const EmpiricalPdf pdf = EmpiricalPdf::from_weights(edges, [&] {
            std::vector<double> w;
            for (std::size_t k = 0; k < heights.size(); ++k) w.push_back(heights[k] * (edges[k + 1] - edges[k]));
            return w;
        }());
        for (std::size_t m = 1; m <= 3; ++m) {
            std::vector<double> trace;
            LloydMaxOptions opts;
            opts.relative_tolerance = 1e-12;
            opts.max_iterations = 20000;
            opts.mse_trace = &trace;
            const auto init = uniform_levels(edges.front(), edges.back(), m);
            ContourLevelSet levels;
            try {
                levels = lloyd_max_levels(pdf, m, init, opts);
            } catch (const LloydMaxNonConvergence& e) {
                levels = e.last_iterate;
            }
            for (std::size_t k = 1; k < trace.size(); ++k) {
                descent = descent && trace[k] <= trace[k - 1] * (1.0 + 1e-12) + 1e-300;
            }
            const double lm = quantizer_mse(pdf, levels);
            const double bf = oracle::brute_force_quantizer(ref, m, 1e-3).mse;
            const double independent = oracle::distortion(ref, levels.levels);
            worst_rel = std::max(worst_rel, std::abs(lm - bf) / bf);
            worst_consistency = std::max(worst_consistency, std::abs(lm - independent) / independent);
            ++runs;
        }
    }
    return {worst_rel <= 0.01 && worst_consistency <= 1e-9 && descent,
            std::to_string(runs) + " runs; worst relative gap to exhaustive search " + fmt(worst_rel) +
                " (need <= 0.01); worst mismatch with independent distortion " + fmt(worst_consistency) +
                "; MSE descent " + (descent ? "held" : "violated")};
}

// 6: 200 random fits, each exact at its fit points.
Outcome spline_exactness() {
    std::mt19937_64 rng(20250601);
    std::uniform_int_distribution<std::size_t> count(5, 200);
    std::uniform_real_distribution<double> coord(0.0, 100.0);
    std::normal_distribution<double> value(0.0, 2.0);
    std::size_t bad_fits = 0;
    double worst = 0.0;
    for (int fit = 0; fit < 200; ++fit) {
        const std::size_t n = count(rng);
        std::vector<Point2> pts(n);
        std::vector<double> v(n);
        for (std::size_t k = 0; k < n; ++k) {
            pts[k] = {coord(rng), coord(rng)};
            v[k] = value(rng);
        }
        const SplineModel model = fit_biharmonic_spline(pts, v);
        bool ok = true;
        for (std::size_t k = 0; k < n; ++k) {
            const double rel = std::abs(oracle::spline_value(model, pts[k]) - v[k]) / (1.0 + std::abs(v[k]));
            worst = std::max(worst, rel);
            ok = ok && rel <= 1e-6;
        }
        if (!ok) ++bad_fits;
    }
    return {bad_fits == 0, std::to_string(200 - bad_fits) + " of 200 fits exact; worst residual / (1 + |v|) " +
                               fmt(worst) + " (need <= 1e-6)"};
}

// 7: the normalized Δ update over log-uniform random triples.
Outcome delta_update_safety() {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> delta_exp(-6.0, 3.0);
    std::uniform_real_distribution<double> err_exp(-15.0, 3.0);
    std::size_t failures = 0;
    double lo = INFINITY;
    double hi = 0.0;
    for (int k = 0; k < 100000; ++k) {
        const double d = std::pow(10.0, delta_exp(rng));
        const double e1 = std::pow(10.0, err_exp(rng));
        const double e2 = std::pow(10.0, err_exp(rng));
        const double out = update_delta(d, e1, e2);
        const double mult = out / d;
        lo = std::min(lo, mult);
        hi = std::max(hi, mult);
        const bool fixed = update_delta(d, e1, e1) == d;
        if (!(out > 0.0) || !(mult > 0.0) || !(mult < 2.0) || !fixed) ++failures;
    }
    return {failures == 0, "100000 triples, " + std::to_string(failures) + " violations; multiplier range [" +
                               fmt(lo) + ", " + fmt(hi) + "]"};
}

// 8: 9-tap moving average of raw noise std 0.3 on a static field.
Outcome noise_reduction() {
    const ScenarioConfig c = quiet_defaults();
    const ReplicateSetup setup = prepare_replicate(c, 0);
    std::vector<ObservationSet> series;
    for (std::uint64_t t = 0; t < 9; ++t) {
        series.push_back(observe(setup.field, setup.deployment, 0.3, derive_seed(setup.noise_seed, {t}), t));
    }
    const ObservationSet filtered = moving_average(series, 9);
    std::vector<double> residual;
    for (std::size_t k = 0; k < setup.deployment.size(); ++k) {
        const Sensor& s = setup.deployment.sensors[k];
        residual.push_back(filtered.readings[k].value - evaluate_field(setup.field, s.x, s.y));
    }
    const double sd = oracle::sample_std(residual);
    const double rel = std::abs(sd - 0.1) / 0.1;
    return {rel <= 0.15, "residual std " + fmt(sd) + " vs 0.1, relative gap " + fmt(rel) + " (need <= 0.15)"};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// 9: two runs of the same config into separate directories.
Outcome determinism() {
    const fs::path root = fs::temp_directory_path() / ("stm_acceptance_" + std::to_string(std::random_device{}()));
    fs::remove_all(root);
    ScenarioConfig c;
    c.replicates = 2;
    c.periods = 3;
    c.master_seed = 99;
    c.output_dir = (root / "a").string();
    run_scenario(c);
    c.output_dir = (root / "b").string();
    run_scenario(c);

    std::size_t files = 0;
    std::size_t differing = 0;
    for (const auto& entry : fs::directory_iterator(root / "a")) {
        if (entry.path().extension() != ".csv") continue;
        ++files;
        const fs::path other = root / "b" / entry.path().filename();
        if (!fs::exists(other) || slurp(entry.path()) != slurp(other)) ++differing;
    }
    std::size_t files_b = 0;
    for (const auto& entry : fs::directory_iterator(root / "b")) files_b += entry.path().extension() == ".csv";
    fs::remove_all(root);
    return {files >= 3 && files == files_b && differing == 0,
            std::to_string(files) + " CSV files compared, " + std::to_string(differing) + " differ"};
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
    auto wanted = [&](int k) { return selected.empty() || selected.count(k) > 0; };

    std::map<int, Outcome> outcomes;
    auto run = [&](int k, const std::function<Outcome()>& f) {
        if (!wanted(k)) return;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = f();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        o.detail += " [" + fmt(secs) + " s]";
        std::cout << "criterion " << k << ": " << (o.pass ? "PASS" : "FAIL") << "  " << o.detail << std::endl;
        outcomes[k] = o;
    };

    run(5, lloyd_max_oracle);
    run(6, spline_exactness);
    run(7, delta_update_safety);
    run(8, noise_reduction);
    run(9, determinism);
    run(1, temporal_cost_band);
    run(4, delta_convergence);
    if (wanted(2) || wanted(3)) {
        const auto start = std::chrono::steady_clock::now();
        ComparisonCriteria cc;
        try {
            cc = compare_criteria();
        } catch (const std::exception& e) {
            cc.cost = cc.error = {false, std::string("threw: ") + e.what()};
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const std::string timing = " [shared run " + fmt(secs) + " s]";
        if (wanted(2)) {
            std::cout << "criterion 2: " << (cc.cost.pass ? "PASS" : "FAIL") << "  " << cc.cost.detail << timing
                      << std::endl;
            outcomes[2] = cc.cost;
        }
        if (wanted(3)) {
            std::cout << "criterion 3: " << (cc.error.pass ? "PASS" : "FAIL") << "  " << cc.error.detail << timing
                      << std::endl;
            outcomes[3] = cc.error;
        }
    }

    std::size_t failed = 0;
    for (const auto& [k, o] : outcomes) failed += o.pass ? 0 : 1;
    std::cout << outcomes.size() - failed << " of " << outcomes.size() << " criteria passed" << std::endl;
    return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
