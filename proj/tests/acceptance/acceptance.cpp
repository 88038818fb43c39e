// Acceptance suite: one pass/fail line per criterion, nonzero exit on failure.
// Heavy Monte-Carlo work (A3 in particular) runs for tens of minutes on a
// 2-core desktop; per-criterion seeds are fixed so reruns are reproducible.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ams/detect.hpp"
#include "ams/experiments.hpp"
#include "ams/parallel.hpp"
#include "ams/quantiles.hpp"
#include "ams/rng.hpp"
#include "support/oracles.hpp"

using namespace ams;

namespace {

int failures = 0;

void report(const std::string& name, bool pass, const std::string& detail) {
    std::printf("[%s] %s: %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

int threads() { return resolve_threads(0); }

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

// antitone least-squares projection via pool-adjacent-violators
std::vector<double> pava_antitone(const std::vector<double>& y) {
    std::vector<double> level;
    std::vector<double> weight;
    for (double v : y) {
        level.push_back(v);
        weight.push_back(1.0);
        while (level.size() > 1 && level[level.size() - 2] < level.back()) {
            const double w = weight[weight.size() - 2] + weight.back();
            const double merged =
                (level[level.size() - 2] * weight[weight.size() - 2] +
                 level.back() * weight.back()) / w;
            level.pop_back();
            weight.pop_back();
            level.back() = merged;
            weight.back() = w;
        }
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < level.size(); ++i)
        out.insert(out.end(), static_cast<std::size_t>(weight[i]), level[i]);
    return out;
}

// --------------------------------------------------------------------------

void a1_table1() {
    const auto system = build_rectangles(128, 2, 4, 14, Parity::EvenOnly);
    const auto cal = Calibration::dw(1.0, 2);
    const auto table =
        simulate_mn(system, cal, Sidedness::TwoSided, 2000, 20260810, threads());
    struct Row {
        double alpha;
        double expect;
        double tol;
    };
    const Row rows[] = {{0.2, 1.2906, 0.05},
                        {0.1, 1.4677, 0.05},
                        {0.05, 1.6278, 0.05},
                        {0.025, 1.7841, 0.06},
                        {0.01, 1.9768, 0.08}};
    bool pass = true;
    std::ostringstream detail;
    for (const auto& row : rows) {
        const double q = table.quantile_for_alpha(row.alpha);
        const bool ok = std::fabs(q - row.expect) <= row.tol;
        pass = pass && ok;
        detail << "q(1-" << row.alpha << ")=" << q << " (ref " << row.expect << "+-"
               << row.tol << (ok ? ") " : " MISS) ");
    }
    report("A1 reference quantiles", pass, detail.str());
}

void a2_fwer() {
    bool pass = true;
    std::ostringstream detail;
    for (const bool gaussian : {false, true}) {
        ExperimentConfig config;
        config.scenario =
            gaussian ? Scenario::GaussianLevelPower : Scenario::PoissonLevelPower;
        config.n = 128;
        config.d = 2;
        config.min_side = 4;
        config.max_side = 14;
        config.parity = Parity::EvenOnly;
        config.min_card = 16;
        config.max_card = 196;
        config.mc_runs = 2000;
        config.replicates = 500;
        config.seed = gaussian ? 411 : 412;
        config.alpha = 0.1;
        config.amplitudes = {1.0};
        config.threads = threads();
        const auto result = run_level_power(config);
        for (const auto& row : result.rows) {
            if (row.curve != "level" || row.method != "ams") continue;
            const bool ok = row.rate >= 0.07 && row.rate <= 0.13;
            pass = pass && ok;
            detail << (gaussian ? "gauss" : "poisson") << " level=" << row.rate
                   << (ok ? " " : " OUTSIDE [0.07,0.13] ");
        }
    }
    report("A2 empirical FWER at alpha=0.1", pass, detail.str());
}

void a3_plugin_failure() {
    ExperimentConfig config;
    config.scenario = Scenario::PluginFailure;
    config.n = 128;
    config.d = 2;
    config.replicates = 2000;
    config.seed = 314159;
    config.restricted_min_card = 16;
    config.restricted_max_card = 4096;
    config.threads = threads();
    const auto result = run_plugin_failure(config);
    const bool full_differs = result.ks_full > result.noise_floor;
    const bool restricted_close = result.ks_restricted < 2.0 * result.noise_floor;
    std::ostringstream detail;
    detail << "ks_full=" << result.ks_full << " ks_restricted=" << result.ks_restricted
           << " floor=" << result.noise_floor;
    report("A3 plug-in failure vs restricted AMS", full_differs && restricted_close,
           detail.str());
}

void a4_oracle_equivalence() {
    bool pass = true;
    std::ostringstream detail;
    // FFT sums vs naive summation on 100 randomized integer fields
    Rng rng(616);
    int checked = 0;
    double worst = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        const Field field = poisson_field(32, 2, 1.0 + 4.0 * (rep % 5), 1000 + rep);
        RegionSystem system = build_rectangles(32, 2, 1, 12);
        // a random subset of 6 scales keeps the naive oracle affordable
        std::vector<std::vector<int>> subset;
        for (int k = 0; k < 6; ++k)
            subset.push_back(system.scales[rng.next_u64() % system.scales.size()]);
        std::sort(subset.begin(), subset.end());
        subset.erase(std::unique(subset.begin(), subset.end()), subset.end());
        system.scales = subset;
        const auto fft = fft_scale_sums(field, system, threads());
        const auto naive = naive_scale_sums(field, system);
        for (std::size_t s = 0; s < fft.size(); ++s)
            for (std::size_t i = 0; i < fft[s].sums.size(); ++i) {
                worst = std::max(worst, std::fabs(fft[s].sums[i] - naive[s].sums[i]));
                ++checked;
            }
    }
    pass = pass && worst <= 1e-9;
    detail << "fft-vs-naive worst=" << worst << " over 100 fields; ";

    // scan_statistic vs direct per-region LRT evaluation, all four models
    const auto cal = Calibration::dw(1.0, 2);
    const auto system = build_rectangles(32, 2, 2, 6);
    Rng gen(515);
    Field reals(32, 2, Dtype::Reals);
    for (double& v : reals.data) v = 0.2 + 1.1 * gen.normal();
    Field counts = poisson_field(32, 2, 2.0, 52);
    Field gammas(32, 2, Dtype::Reals);
    for (double& v : gammas.data) v = gen.gamma(1.8, 0.9);
    struct Case {
        const Field* field;
        ModelFamily model;
        const char* name;
    };
    const Case cases[] = {
        {&reals, ModelFamily::gaussian_known(0.2, 1.21), "gauss-known"},
        {&reals, ModelFamily::gaussian_unknown(0.25, 1.1), "gauss-unknown"},
        {&counts, ModelFamily::poisson(2.0), "poisson"},
        {&gammas, ModelFamily::gamma(0.9, 1.8), "gamma"},
    };
    double worst_scan = 0.0;
    for (const auto& c : cases) {
        for (auto sided : {Sidedness::TwoSided, Sidedness::OneSidedUpper}) {
            const auto fast = scan_statistic(*c.field, system, c.model, cal, sided, false,
                                             threads());
            const double naive =
                ams::testing::naive_scan_statistic(*c.field, system, c.model, cal, sided);
            worst_scan = std::max(worst_scan, std::fabs(fast.t_n - naive));
        }
    }
    pass = pass && worst_scan <= 1e-9;
    detail << "scan-vs-naive worst=" << worst_scan << " over 4 models x 2 sidedness";
    report("A4 FFT and scan oracle equivalence", pass, detail.str());
}

void a5_identity() {
    double worst = 0.0;
    for (std::uint64_t seed : {21u, 22u, 23u}) {
        const Field noise = standard_normal_field(128, 2, seed);
        const auto system = build_rectangles(128, 2, 4, 14, Parity::EvenOnly);
        const auto cal = Calibration::dw(1.0, 2);
        const auto scan = scan_statistic(noise, system, ModelFamily::gaussian_known(0.0, 1.0),
                                         cal, Sidedness::TwoSided, false, threads());
        const double mn = surrogate_statistic(noise, system, cal, Sidedness::TwoSided,
                                              threads());
        worst = std::max(worst, std::fabs(scan.t_n - mn));
    }
    std::ostringstream detail;
    detail << "max |T_n - M_n| = " << worst << " over 3 fields (tol 1e-10)";
    report("A5 known-parameter identity", worst <= 1e-10, detail.str());
}

void a6_lrt_oracle() {
    Rng rng(0xacce97);
    double worst_rel = 0.0;
    std::int64_t checked = 0;
    auto check_family = [&](auto make_model, auto draw_ybar) {
        int done = 0;
        while (done < 1000) {
            const ModelFamily model = make_model(rng);
            const auto card = static_cast<std::int64_t>(1 + rng.next_u64() % 4096);
            const double ybar = draw_ybar(rng, model);
            const double closed = local_lrt(model, ybar * card, card);
            if (closed < 0.01) continue;
            const double oracle = ams::testing::oracle_lrt(model, ybar * card, card);
            worst_rel = std::max(worst_rel,
                                 std::fabs(closed - oracle) / std::max(1.0, std::fabs(oracle)));
            ++done;
            ++checked;
        }
    };
    check_family(
        [](Rng& r) {
            return ModelFamily::gaussian_known(4.0 * r.uniform01() - 2.0,
                                               0.25 + 4.0 * r.uniform01());
        },
        [](Rng& r, const ModelFamily& m) {
            return m.theta0[0] + 6.0 * (r.uniform01() - 0.5) * std::sqrt(m.xi[0]);
        });
    check_family(
        [](Rng& r) {
            return ModelFamily::gaussian_unknown(4.0 * r.uniform01() - 2.0,
                                                 0.25 + 4.0 * r.uniform01());
        },
        [](Rng& r, const ModelFamily& m) {
            return m.theta0[0] + 6.0 * (r.uniform01() - 0.5) * std::sqrt(m.xi[0]);
        });
    check_family([](Rng& r) { return ModelFamily::poisson(0.1 + 5.0 * r.uniform01()); },
                 [](Rng& r, const ModelFamily& m) {
                     const double lo = 0.2 * m.theta0[0];
                     const double hi = 4.0 * m.theta0[0] + 2.0;
                     return lo + (hi - lo) * r.uniform01();
                 });
    check_family(
        [](Rng& r) {
            return ModelFamily::gamma(0.5 + 3.0 * r.uniform01(), 0.5 + 3.0 * r.uniform01());
        },
        [](Rng& r, const ModelFamily& m) {
            return m.baseline_mean() * (0.25 + 3.0 * r.uniform01());
        });
    std::ostringstream detail;
    detail << "worst relative error " << worst_rel << " over " << checked
           << " tuples (tol 1e-8)";
    report("A6 closed-form LRT vs maximization oracle", worst_rel <= 1e-8, detail.str());
}

void a7_power() {
    ExperimentConfig config;
    config.scenario = Scenario::GaussianLevelPower;
    config.n = 128;
    config.d = 2;
    config.min_side = 4;
    config.max_side = 14;
    config.parity = Parity::EvenOnly;
    config.min_card = 16;
    config.max_card = 196;
    config.mc_runs = 2000;
    config.replicates = 500;
    config.seed = 777;
    config.alpha = 0.1;
    config.anomaly_size = 8;
    config.threads = threads();  // default sigma grid 0.5..2.5 step 0.1
    const auto result = run_level_power(config);

    std::vector<double> oracle;
    std::vector<double> ams_arm;
    for (const auto& row : result.rows) {
        if (row.curve != "power") continue;
        (row.method == "oracle" ? oracle : ams_arm).push_back(row.rate);
    }
    // monotone nonincreasing in sigma up to binomial MC noise (3 sigma at 500)
    const auto fit = pava_antitone(ams_arm);
    double iso_dev = 0.0;
    for (std::size_t i = 0; i < ams_arm.size(); ++i)
        iso_dev = std::max(iso_dev, std::fabs(ams_arm[i] - fit[i]));
    double arm_gap = 0.0;
    for (std::size_t i = 0; i < ams_arm.size(); ++i)
        arm_gap = std::max(arm_gap, std::fabs(ams_arm[i] - oracle[i]));
    std::ostringstream detail;
    detail << "isotonic deviation=" << iso_dev << " (tol 0.067), max |ams-oracle|="
           << arm_gap << " (tol 0.05), power(0.5)=" << ams_arm.front() << " power(2.5)="
           << ams_arm.back();
    report("A7 power curve sanity", iso_dev <= 0.067 && arm_gap <= 0.05, detail.str());
}

void a8_determinism() {
    bool pass = true;
    std::ostringstream detail;
    const auto base = std::filesystem::temp_directory_path() / "ams_acceptance_a8";
    std::filesystem::remove_all(base);
    std::filesystem::create_directories(base);

    // quantile simulation: cache files byte-identical across 1 and 8 workers
    {
        const auto system = build_rectangles(64, 2, 4, 8, Parity::EvenOnly);
        const auto cal = Calibration::dw(1.0, 2);
        const auto t1 = cache_lookup_or_simulate(base / "store1", system, cal,
                                                 Sidedness::TwoSided, 400, 5, 1);
        const auto t8 = cache_lookup_or_simulate(base / "store8", system, cal,
                                                 Sidedness::TwoSided, 400, 5, 8);
        const bool same = slurp(quantile_cache_path(base / "store1", t1.key)) ==
                          slurp(quantile_cache_path(base / "store8", t8.key));
        pass = pass && same && !t1.samples.empty();
        detail << "quantile-cache " << (same ? "identical; " : "DIFFERS; ");
    }

    // each experiment scenario: manifest replay, 1 vs 8 workers, byte-identical
    struct Job {
        const char* name;
        ExperimentConfig config;
        std::vector<std::string> outputs;
    };
    std::vector<Job> jobs;
    {
        ExperimentConfig c;
        c.scenario = Scenario::QuantileTable;
        c.n = 32;
        c.d = 2;
        c.min_side = 4;
        c.max_side = 8;
        c.parity = Parity::EvenOnly;
        c.mc_runs = 200;
        c.seed = 61;
        jobs.push_back({"quantile-table", c, {"samples.csv", "quantiles.csv", "manifest.json"}});
    }
    {
        ExperimentConfig c;
        c.scenario = Scenario::GaussianLevelPower;
        c.n = 32;
        c.d = 2;
        c.min_side = 2;
        c.max_side = 4;
        c.parity = Parity::All;
        c.mc_runs = 100;
        c.replicates = 40;
        c.seed = 62;
        c.amplitudes = {0.8, 1.2};
        jobs.push_back({"gauss-level-power", c, {"curves.csv", "summary.csv", "manifest.json"}});
    }
    {
        ExperimentConfig c;
        c.scenario = Scenario::PluginFailure;
        c.n = 32;
        c.d = 1;
        c.replicates = 100;
        c.seed = 63;
        c.restricted_min_card = 2;
        c.restricted_max_card = 16;
        jobs.push_back({"plugin-failure", c, {"samples.csv", "summary.csv", "manifest.json"}});
    }
    for (auto& job : jobs) {
        job.config.threads = 1;
        const auto dir1 = base / (std::string(job.name) + "_t1");
        run_experiment_to_dir(job.config, dir1);
        auto replayed = config_from_manifest(dir1 / "manifest.json");
        replayed.threads = 8;
        const auto dir8 = base / (std::string(job.name) + "_t8");
        run_experiment_to_dir(replayed, dir8);
        bool same = true;
        for (const auto& name : job.outputs)
            same = same && slurp(dir1 / name) == slurp(dir8 / name);
        pass = pass && same;
        detail << job.name << " " << (same ? "identical; " : "DIFFERS; ");
    }
    std::filesystem::remove_all(base);
    report("A8 byte-identical replay across worker counts", pass, detail.str());
}

}  // namespace

int main(int argc, char** argv) {
    // --fast skips the ~half-hour A3 run during development; the default
    // invocation (used by ctest) runs every criterion at full scale
    const bool fast = argc > 1 && std::string(argv[1]) == "--fast";
    if (fast) std::printf("note: --fast development run, not the acceptance configuration\n");

    std::printf("acceptance suite, %d worker threads\n", threads());
    a1_table1();
    a4_oracle_equivalence();
    a5_identity();
    a6_lrt_oracle();
    a8_determinism();
    a2_fwer();
    a7_power();
    if (!fast) a3_plugin_failure();
    std::printf("%s: %d criterion failure(s)\n", failures == 0 ? "SUCCESS" : "FAILURE",
                failures);
    return failures == 0 ? 0 : 1;
}
