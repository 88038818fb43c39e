#ifndef AMS_EXPERIMENTS_HPP
#define AMS_EXPERIMENTS_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ams/calibration.hpp"
#include "ams/models.hpp"
#include "ams/regions.hpp"
#include "ams/statistic.hpp"

namespace ams {

enum class Scenario { PluginFailure, QuantileTable, GaussianLevelPower, PoissonLevelPower };

// Declarative description of a simulation-study run. Parsed from key=value
// config files; serialized into run manifests for byte-identical replay.
struct ExperimentConfig {
    Scenario scenario = Scenario::QuantileTable;
    int n = 128;
    int d = 2;
    int min_side = 4;
    int max_side = 14;
    Parity parity = Parity::EvenOnly;
    std::int64_t min_card = -1;  // -1: min_side^d
    std::int64_t max_card = -1;  // -1: max_side^d
    CalibrationKind calibration = CalibrationKind::DW;
    double nu = 1.0;
    double pwm_c = 2.0;
    double pwm_cd = 1.0;
    Sidedness sidedness = Sidedness::TwoSided;
    int mc_runs = 2000;      // surrogate draws for thresholds / quantile tables
    int replicates = 500;    // per grid point (level/power) or per arm (plugin failure)
    std::uint64_t seed = 1;
    double alpha = 0.1;
    int anomaly_size = 8;    // planted block side length, centered
    std::vector<double> amplitudes;  // grid; empty -> scenario default
    // plugin-failure restriction window; -1 -> [4,64] for d=1, [16,4096] for d=2
    std::int64_t restricted_min_card = -1;
    std::int64_t restricted_max_card = -1;
    int threads = 1;

    Calibration make_calibration() const;
    std::string canonical() const;  // deterministic echo used in manifests
};

ExperimentConfig parse_experiment_config(const std::filesystem::path& path);
Scenario scenario_from_string(const std::string& s);
std::string to_string(Scenario s);

// Per-replicate statistics of the naive plug-in comparison: the surrogate arm
// and the estimated-parameter arm are evaluated on the full rectangle system
// and on its cardinality-restricted subsystem in a single pass each.
struct PluginFailureResult {
    std::vector<double> m_full;
    std::vector<double> m_restricted;
    std::vector<double> t_full;        // plug-in estimates, all scales
    std::vector<double> t_restricted;  // plug-in estimates, restricted scales
    double ks_full = 0.0;              // KS(t_full, m_full)
    double ks_restricted = 0.0;        // KS(t_restricted, m_restricted)
    double noise_floor = 0.0;          // 95% same-distribution KS quantile
};

PluginFailureResult run_plugin_failure(const ExperimentConfig& config);

struct LevelPowerRow {
    double param = 0.0;          // sigma (Gaussian) or lambda (Poisson)
    std::string method;          // "oracle" | "ams"
    std::string curve;           // "level" | "power"
    int rejections = 0;
    int replicates = 0;
    double rate = 0.0;
};

struct LevelPowerResult {
    std::vector<LevelPowerRow> rows;
    double q_alpha = 0.0;  // the shared M_n quantile threshold
};

LevelPowerResult run_level_power(const ExperimentConfig& config);

// Runs the configured scenario and writes its CSV outputs plus manifest.json
// into outdir. Identical config + seed reproduce the files byte-for-byte.
void run_experiment_to_dir(const ExperimentConfig& config,
                           const std::filesystem::path& outdir);

// Rebuilds the config recorded in a run manifest.
ExperimentConfig config_from_manifest(const std::filesystem::path& manifest);

// Two-sample Kolmogorov-Smirnov distance between sorted samples.
double ks_distance(std::span<const double> a_sorted, std::span<const double> b_sorted);

// Percentile of the two-sample KS statistic under equal distributions
// (distribution-free), estimated from seeded uniform samples.
double ks_noise_floor(std::size_t sample_size, int sims, std::uint64_t seed,
                      double percentile = 0.95);

}  // namespace ams

#endif
