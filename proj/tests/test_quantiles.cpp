#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ams/quantiles.hpp"

using namespace ams;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("ams_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_CASE("empirical quantile order-statistic rule") {
    const std::vector<double> five{1, 2, 3, 4, 5};
    CHECK(empirical_quantile(five, 0.9) == 5);   // ceil(4.5) = 5
    CHECK(empirical_quantile(five, 0.5) == 3);   // ceil(2.5) = 3
    const std::vector<double> one{7};
    CHECK(empirical_quantile(one, 0.01) == 7);
    CHECK(empirical_quantile(one, 0.99) == 7);
    const std::vector<double> two{1, 2};
    CHECK(empirical_quantile(two, 0.5) == 1);    // ceil(1) = 1
    CHECK_THROWS_AS(empirical_quantile(five, 0.0), DomainError);
    CHECK_THROWS_AS(empirical_quantile(five, 1.0), DomainError);
    CHECK_THROWS_AS(empirical_quantile(std::span<const double>{}, 0.5), DomainError);
}

TEST_CASE("simulate_mn basics") {
    const auto system = build_rectangles(16, 2, 2, 4, Parity::EvenOnly);
    const auto cal = Calibration::dw(1.0, 2);

    const auto single = simulate_mn(system, cal, Sidedness::TwoSided, 1, 42);
    CHECK(single.samples.size() == 1);
    for (const auto& [alpha, q] : single.quantiles) CHECK(q == single.samples[0]);

    CHECK_THROWS_AS(simulate_mn(system, cal, Sidedness::TwoSided, 0, 42), ConfigError);

    const auto table = simulate_mn(system, cal, Sidedness::TwoSided, 64, 42);
    CHECK(std::is_sorted(table.samples.begin(), table.samples.end()));
    CHECK(table.key.mc_runs == 64);
    // quantile monotonicity: smaller alpha -> larger threshold
    double prev = -1e300;
    for (double alpha : {0.2, 0.1, 0.05, 0.025, 0.01}) {
        CHECK(table.quantiles.at(alpha) >= prev);
        prev = table.quantiles.at(alpha);
    }
}

TEST_CASE("simulation is deterministic and partition-invariant") {
    const auto system = build_rectangles(16, 2, 2, 4);
    const auto cal = Calibration::dw(1.0, 2);
    const auto serial = simulate_mn(system, cal, Sidedness::TwoSided, 48, 7, 1);
    const auto parallel = simulate_mn(system, cal, Sidedness::TwoSided, 48, 7, 4);
    CHECK(serial.samples == parallel.samples);
    const auto again = simulate_mn(system, cal, Sidedness::TwoSided, 48, 7, 2);
    CHECK(serial.samples == again.samples);
    const auto other_seed = simulate_mn(system, cal, Sidedness::TwoSided, 48, 8, 1);
    CHECK(serial.samples != other_seed.samples);
}

TEST_CASE("doubling the run count tightens the q90 spread") {
    const auto system = build_rectangles(16, 2, 2, 4);
    const auto cal = Calibration::dw(1.0, 2);
    auto spread = [&](int runs) {
        double lo = 1e300;
        double hi = -1e300;
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            const auto table = simulate_mn(system, cal, Sidedness::TwoSided, runs, seed, 2);
            const double q = table.quantile_for_alpha(0.1);
            lo = std::min(lo, q);
            hi = std::max(hi, q);
        }
        return hi - lo;
    };
    CHECK(spread(400) < spread(100));
}

TEST_CASE("quantile cache round trip and key sensitivity") {
    TempDir dir;
    const auto system = build_rectangles(16, 2, 2, 4);
    const auto cal = Calibration::dw(1.0, 2);

    const auto first =
        cache_lookup_or_simulate(dir.path, system, cal, Sidedness::TwoSided, 32, 9, 1);
    const auto path = quantile_cache_path(dir.path, first.key);
    REQUIRE(std::filesystem::exists(path));
    const std::string bytes_before = slurp(path);

    const auto second =
        cache_lookup_or_simulate(dir.path, system, cal, Sidedness::TwoSided, 32, 9, 1);
    CHECK(second.samples == first.samples);
    CHECK(slurp(path) == bytes_before);  // untouched on a hit

    // a different nu is a different key and a different file
    const auto other = cache_lookup_or_simulate(dir.path, system, Calibration::dw(2.0, 2),
                                                Sidedness::TwoSided, 32, 9, 1);
    CHECK(other.key.calibration_digest != first.key.calibration_digest);
    CHECK(std::filesystem::exists(quantile_cache_path(dir.path, other.key)));
    CHECK(quantile_cache_path(dir.path, other.key) != path);

    // corrupt the payload: loader detects it, caller falls back to re-simulation
    {
        std::fstream f(path, std::ios::binary | std::ios::in | std::ios::out);
        f.seekp(-9, std::ios::end);
        char byte = 0;
        f.read(&byte, 1);
        f.seekp(-9, std::ios::end);
        byte = static_cast<char>(byte ^ 0x5a);
        f.write(&byte, 1);
    }
    CHECK_THROWS_AS(load_quantile_table(path), CacheCorrupt);
    std::ostringstream warnings;
    const auto repaired = cache_lookup_or_simulate(dir.path, system, cal,
                                                   Sidedness::TwoSided, 32, 9, 1, &warnings);
    CHECK(repaired.samples == first.samples);
    CHECK(warnings.str().find("corrupt") != std::string::npos);
    CHECK(slurp(path) == bytes_before);  // rewritten cleanly
}

TEST_CASE("load rejects truncated and alien files") {
    TempDir dir;
    const auto path = dir.path / "mn_bogus.amsq";
    {
        std::ofstream out(path, std::ios::binary);
        out << "not a cache file at all";
    }
    CHECK_THROWS_AS(load_quantile_table(path), CacheCorrupt);
    CHECK_THROWS_AS(load_quantile_table(dir.path / "missing.amsq"), IoError);
}
