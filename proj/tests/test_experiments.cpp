#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ams/experiments.hpp"

using namespace ams;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("ams_exp_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

}  // namespace

TEST_CASE("two-sample KS distance") {
    const std::vector<double> a{1, 2, 3, 4};
    CHECK(ks_distance(a, a) == 0.0);
    const std::vector<double> b{5, 6, 7, 8};
    CHECK(ks_distance(a, b) == 1.0);
    const std::vector<double> c{1, 3};
    const std::vector<double> d{2, 4};
    CHECK(ks_distance(c, d) == doctest::Approx(0.5));
}

TEST_CASE("same-distribution KS noise floor matches the asymptotic value") {
    // 95% two-sample KS quantile at m = n = 2000 is ~ 1.358*sqrt(2/2000) = 0.043
    const double floor = ks_noise_floor(2000, 200, 77);
    CHECK(floor > 0.032);
    CHECK(floor < 0.056);
}

TEST_CASE("config files parse and unknown keys are rejected") {
    TempDir dir;
    {
        std::ofstream out(dir.path / "exp.cfg");
        out << "# comment\n";
        out << "scenario = plugin-failure\n";
        out << "n = 64\nd = 1\n";
        out << "replicates = 123\n";
        out << "seed = 99\n";
        out << "amplitudes = 0.5, 1.0, 1.5\n";
    }
    const auto config = parse_experiment_config(dir.path / "exp.cfg");
    CHECK(config.scenario == Scenario::PluginFailure);
    CHECK(config.n == 64);
    CHECK(config.d == 1);
    CHECK(config.replicates == 123);
    CHECK(config.seed == 99);
    CHECK(config.amplitudes == std::vector<double>{0.5, 1.0, 1.5});

    {
        std::ofstream out(dir.path / "bad.cfg");
        out << "bogus_key = 1\n";
    }
    CHECK_THROWS_AS(parse_experiment_config(dir.path / "bad.cfg"), ConfigError);

    // scenario defaults when replicates are not given
    {
        std::ofstream out(dir.path / "defaults.cfg");
        out << "scenario = plugin-failure\n";
    }
    CHECK(parse_experiment_config(dir.path / "defaults.cfg").replicates == 2000);
    {
        std::ofstream out(dir.path / "defaults2.cfg");
        out << "scenario = gauss-level-power\n";
    }
    CHECK(parse_experiment_config(dir.path / "defaults2.cfg").replicates == 500);
}

TEST_CASE("plugin failure, d=1 mirror of the published comparison") {
    ExperimentConfig config;
    config.scenario = Scenario::PluginFailure;
    config.n = 128;
    config.d = 1;
    config.replicates = 500;
    config.seed = 2468;
    config.threads = 2;
    // restriction defaults to cardinalities [4, 64] in d=1

    const auto result = run_plugin_failure(config);
    REQUIRE(result.m_full.size() == 500);
    CHECK(result.noise_floor > 0.0);
    // all scales + plug-in estimates: the distribution visibly differs from M_n
    CHECK(result.ks_full > result.noise_floor);
    // Restriction improves the fit, but in d=1 a 128-point field leaves ~6%
    // noise in sigma-hat, which keeps the restricted statistic a visible
    // distance from M_n at any scale range; the within-noise-floor behaviour
    // needs n^d large and is covered by the d=2 acceptance criterion.
    CHECK(result.ks_restricted < result.ks_full);

    // identical config implies identical samples, and worker-count invariance
    ExperimentConfig serial = config;
    serial.threads = 1;
    const auto again = run_plugin_failure(serial);
    CHECK(again.m_full == result.m_full);
    CHECK(again.t_full == result.t_full);
    CHECK(again.ks_full == result.ks_full);
}

TEST_CASE("level and power smoke run") {
    ExperimentConfig config;
    config.scenario = Scenario::GaussianLevelPower;
    config.n = 32;
    config.d = 2;
    config.min_side = 2;
    config.max_side = 4;
    config.parity = Parity::All;
    config.mc_runs = 300;
    config.replicates = 60;
    config.seed = 1212;
    config.alpha = 0.1;
    config.anomaly_size = 8;
    config.amplitudes = {0.6};
    config.threads = 2;

    const auto result = run_level_power(config);
    REQUIRE(result.rows.size() == 4);  // level+power x oracle+ams
    for (const auto& row : result.rows) {
        CHECK(row.replicates == 60);
        if (row.curve == "level") {
            CHECK(row.rate <= 0.35);  // loose: 60 replicates
        } else {
            CHECK(row.rate >= 0.80);  // an 8x8 mean-1 block at sigma 0.6 is blatant
        }
    }
    // oracle and adjusted power agree closely on the same fields
    double oracle_power = -1.0;
    double ams_power = -1.0;
    for (const auto& row : result.rows)
        if (row.curve == "power")
            (row.method == "oracle" ? oracle_power : ams_power) = row.rate;
    CHECK(std::fabs(oracle_power - ams_power) <= 0.1);
}

TEST_CASE("experiment outputs replay byte-identically") {
    ExperimentConfig config;
    config.scenario = Scenario::QuantileTable;
    config.n = 16;
    config.d = 2;
    config.min_side = 2;
    config.max_side = 4;
    config.parity = Parity::All;
    config.mc_runs = 128;
    config.seed = 31;
    config.threads = 2;

    TempDir dir;
    const auto out1 = dir.path / "run1";
    const auto out2 = dir.path / "run2";
    run_experiment_to_dir(config, out1);

    // replay from the manifest, single-threaded
    auto replay = config_from_manifest(out1 / "manifest.json");
    replay.threads = 1;
    run_experiment_to_dir(replay, out2);
    for (const char* name : {"samples.csv", "quantiles.csv", "manifest.json"})
        CHECK(slurp(out1 / name) == slurp(out2 / name));
}
