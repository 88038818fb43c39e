#ifndef AMS_QUANTILES_HPP
#define AMS_QUANTILES_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ams/calibration.hpp"
#include "ams/regions.hpp"
#include "ams/statistic.hpp"

namespace ams {

struct QuantileKey {
    int n = 0;
    int d = 0;
    std::string system_digest;
    std::string calibration_digest;
    Sidedness sidedness = Sidedness::TwoSided;
    int mc_runs = 0;
    std::uint64_t seed = 0;

    std::string canonical() const;
    bool operator==(const QuantileKey&) const = default;
};

struct QuantileTable {
    QuantileKey key;
    std::vector<double> samples;          // sorted ascending
    std::map<double, double> quantiles;   // alpha -> q_{1-alpha}

    double quantile_for_alpha(double alpha) const;
};

// Order-statistic rule: index = ceil(p*N) (1-based, clamped); conservative in
// that it never interpolates below the empirical CDF.
double empirical_quantile(std::span<const double> sorted_samples, double p);

inline constexpr double kDefaultAlphas[] = {0.2, 0.1, 0.05, 0.025, 0.01};

// Draws mc_runs surrogate statistics from seeded per-replicate substreams
// (partition-invariant: worker count does not affect the draw for replicate r).
QuantileTable simulate_mn(const RegionSystem& system, const Calibration& cal,
                          Sidedness sidedness, int mc_runs, std::uint64_t seed,
                          int threads = 1,
                          std::span<const double> alphas = kDefaultAlphas);

std::filesystem::path quantile_cache_path(const std::filesystem::path& store,
                                          const QuantileKey& key);

// Versioned, checksummed binary table file; written via temp-file + rename.
void save_quantile_table(const std::filesystem::path& path, const QuantileTable& table);
QuantileTable load_quantile_table(const std::filesystem::path& path);

// Returns the cached table when the key matches exactly; otherwise simulates,
// persists and returns. A corrupt cache file triggers a warning on `warn` and
// a re-simulation.
QuantileTable cache_lookup_or_simulate(const std::filesystem::path& store,
                                       const RegionSystem& system, const Calibration& cal,
                                       Sidedness sidedness, int mc_runs, std::uint64_t seed,
                                       int threads = 1, std::ostream* warn = nullptr,
                                       std::span<const double> alphas = kDefaultAlphas);

}  // namespace ams

#endif
