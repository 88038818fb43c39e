#include "ams/experiments.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ams/digest.hpp"

#include "ams/format.hpp"
#include "ams/parallel.hpp"
#include "ams/quantiles.hpp"
#include "ams/rng.hpp"

#include "json.hpp"

namespace ams {

namespace {

std::string fmt(double v) { return format_double(v); }

std::string sidedness_name(Sidedness s) {
    return s == Sidedness::TwoSided ? "two-sided" : "one-sided-upper";
}

std::string calibration_name(CalibrationKind k) {
    switch (k) {
        case CalibrationKind::DW: return "dw";
        case CalibrationKind::SAC: return "sac";
        case CalibrationKind::PWM: return "pwm";
        case CalibrationKind::Unit: return "unit";
    }
    return "dw";
}

CalibrationKind calibration_from_string(const std::string& s) {
    if (s == "dw") return CalibrationKind::DW;
    if (s == "sac") return CalibrationKind::SAC;
    if (s == "pwm") return CalibrationKind::PWM;
    if (s == "unit") return CalibrationKind::Unit;
    throw ConfigError("unknown calibration '" + s + "'");
}

std::vector<double> default_amplitudes(Scenario scenario, bool level_curve) {
    std::vector<double> grid;
    if (scenario == Scenario::GaussianLevelPower) {
        for (int k = 0; k <= 20; ++k) grid.push_back(0.5 + 0.1 * k);
    } else if (level_curve) {
        for (int k = 0; k <= 18; ++k) grid.push_back(0.2 + 0.1 * k);
    } else {
        for (int k = 0; k <= 20; ++k) grid.push_back(1.0 + 0.05 * k);
    }
    return grid;
}

}  // namespace

Scenario scenario_from_string(const std::string& s) {
    if (s == "plugin-failure") return Scenario::PluginFailure;
    if (s == "quantile-table") return Scenario::QuantileTable;
    if (s == "gauss-level-power") return Scenario::GaussianLevelPower;
    if (s == "poisson-level-power") return Scenario::PoissonLevelPower;
    throw ConfigError("unknown scenario '" + s + "'");
}

std::string to_string(Scenario s) {
    switch (s) {
        case Scenario::PluginFailure: return "plugin-failure";
        case Scenario::QuantileTable: return "quantile-table";
        case Scenario::GaussianLevelPower: return "gauss-level-power";
        case Scenario::PoissonLevelPower: return "poisson-level-power";
    }
    return "quantile-table";
}

Calibration ExperimentConfig::make_calibration() const {
    switch (calibration) {
        case CalibrationKind::DW: return Calibration::dw(nu, d);
        case CalibrationKind::SAC: return Calibration::sac(d);
        case CalibrationKind::PWM: return Calibration::pwm(pwm_c, pwm_cd, d);
        case CalibrationKind::Unit: return Calibration::unit(d);
    }
    return Calibration::dw(nu, d);
}

namespace {

nlohmann::json config_to_json(const ExperimentConfig& c) {
    nlohmann::json j;
    j["scenario"] = to_string(c.scenario);
    j["n"] = c.n;
    j["d"] = c.d;
    j["min_side"] = c.min_side;
    j["max_side"] = c.max_side;
    j["parity"] = c.parity == Parity::EvenOnly ? "even" : "all";
    j["min_card"] = c.min_card;
    j["max_card"] = c.max_card;
    j["calibration"] = calibration_name(c.calibration);
    j["nu"] = c.nu;
    j["pwm_c"] = c.pwm_c;
    j["pwm_cd"] = c.pwm_cd;
    j["sidedness"] = sidedness_name(c.sidedness);
    j["mc_runs"] = c.mc_runs;
    j["replicates"] = c.replicates;
    j["seed"] = c.seed;
    j["alpha"] = c.alpha;
    j["anomaly_size"] = c.anomaly_size;
    j["amplitudes"] = c.amplitudes;
    j["restricted_min_card"] = c.restricted_min_card;
    j["restricted_max_card"] = c.restricted_max_card;
    return j;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    c.scenario = scenario_from_string(j.at("scenario").get<std::string>());
    c.n = j.at("n").get<int>();
    c.d = j.at("d").get<int>();
    c.min_side = j.at("min_side").get<int>();
    c.max_side = j.at("max_side").get<int>();
    c.parity = j.at("parity").get<std::string>() == "even" ? Parity::EvenOnly : Parity::All;
    c.min_card = j.at("min_card").get<std::int64_t>();
    c.max_card = j.at("max_card").get<std::int64_t>();
    c.calibration = calibration_from_string(j.at("calibration").get<std::string>());
    c.nu = j.at("nu").get<double>();
    c.pwm_c = j.at("pwm_c").get<double>();
    c.pwm_cd = j.at("pwm_cd").get<double>();
    c.sidedness = j.at("sidedness").get<std::string>() == "two-sided"
                      ? Sidedness::TwoSided
                      : Sidedness::OneSidedUpper;
    c.mc_runs = j.at("mc_runs").get<int>();
    c.replicates = j.at("replicates").get<int>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.alpha = j.at("alpha").get<double>();
    c.anomaly_size = j.at("anomaly_size").get<int>();
    c.amplitudes = j.at("amplitudes").get<std::vector<double>>();
    c.restricted_min_card = j.at("restricted_min_card").get<std::int64_t>();
    c.restricted_max_card = j.at("restricted_max_card").get<std::int64_t>();
    return c;
}

}  // namespace

std::string ExperimentConfig::canonical() const { return config_to_json(*this).dump(); }

ExperimentConfig parse_experiment_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    ExperimentConfig c;
    c.replicates = -1;  // resolved to a scenario default below
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        if (eq == std::string::npos)
            throw ParseError("config line " + std::to_string(lineno) + ": expected key=value");
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            if (key == "scenario") c.scenario = scenario_from_string(value);
            else if (key == "n") c.n = std::stoi(value);
            else if (key == "d") c.d = std::stoi(value);
            else if (key == "min_side") c.min_side = std::stoi(value);
            else if (key == "max_side") c.max_side = std::stoi(value);
            else if (key == "parity") c.parity = value == "even" ? Parity::EvenOnly : Parity::All;
            else if (key == "min_card") c.min_card = std::stoll(value);
            else if (key == "max_card") c.max_card = std::stoll(value);
            else if (key == "calibration") c.calibration = calibration_from_string(value);
            else if (key == "nu") c.nu = std::stod(value);
            else if (key == "pwm_c") c.pwm_c = std::stod(value);
            else if (key == "pwm_cd") c.pwm_cd = std::stod(value);
            else if (key == "sidedness")
                c.sidedness = value == "one-sided" || value == "one-sided-upper"
                                  ? Sidedness::OneSidedUpper
                                  : Sidedness::TwoSided;
            else if (key == "mc_runs") c.mc_runs = std::stoi(value);
            else if (key == "replicates") c.replicates = std::stoi(value);
            else if (key == "seed") c.seed = std::stoull(value);
            else if (key == "alpha") c.alpha = std::stod(value);
            else if (key == "anomaly_size") c.anomaly_size = std::stoi(value);
            else if (key == "restricted_min_card") c.restricted_min_card = std::stoll(value);
            else if (key == "restricted_max_card") c.restricted_max_card = std::stoll(value);
            else if (key == "amplitudes") {
                c.amplitudes.clear();
                std::stringstream ss(value);
                std::string token;
                while (std::getline(ss, token, ',')) c.amplitudes.push_back(std::stod(token));
            } else if (key == "threads") {
                c.threads = std::stoi(value);
            } else {
                throw ConfigError("unknown config key '" + key + "'");
            }
        } catch (const std::invalid_argument&) {
            throw ParseError("config line " + std::to_string(lineno) + ": bad value for " + key);
        }
    }
    if (c.replicates < 0)
        c.replicates = c.scenario == Scenario::PluginFailure ? 2000 : 500;
    return c;
}

double ks_distance(std::span<const double> a_sorted, std::span<const double> b_sorted) {
    if (a_sorted.empty() || b_sorted.empty())
        throw ConfigError("KS distance of an empty sample");
    const double na = static_cast<double>(a_sorted.size());
    const double nb = static_cast<double>(b_sorted.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double ks = 0.0;
    while (i < a_sorted.size() && j < b_sorted.size()) {
        const double x = std::min(a_sorted[i], b_sorted[j]);
        while (i < a_sorted.size() && a_sorted[i] <= x) ++i;
        while (j < b_sorted.size() && b_sorted[j] <= x) ++j;
        ks = std::max(ks, std::fabs(i / na - j / nb));
    }
    return ks;
}

double ks_noise_floor(std::size_t sample_size, int sims, std::uint64_t seed,
                      double percentile) {
    std::vector<double> stats(static_cast<std::size_t>(sims));
    for (int k = 0; k < sims; ++k) {
        Rng rng(substream_seed(seed, static_cast<std::uint64_t>(k)));
        std::vector<double> a(sample_size);
        std::vector<double> b(sample_size);
        for (double& v : a) v = rng.uniform01();
        for (double& v : b) v = rng.uniform01();
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        stats[static_cast<std::size_t>(k)] = ks_distance(a, b);
    }
    std::sort(stats.begin(), stats.end());
    return empirical_quantile(stats, percentile);
}

PluginFailureResult run_plugin_failure(const ExperimentConfig& config) {
    if (config.scenario != Scenario::PluginFailure)
        throw ConfigError("config scenario is not plugin-failure");
    const int n = config.n;
    const int d = config.d;
    const std::int64_t nd = grid_size(n, d);
    std::int64_t r_lo = config.restricted_min_card;
    std::int64_t r_hi = config.restricted_max_card;
    if (r_lo < 0) {
        r_lo = 1;
        for (int k = 0; k < d; ++k) r_lo *= 4;
    }
    if (r_hi < 0) {
        r_hi = 1;
        for (int k = 0; k < d; ++k) r_hi *= 64;
        r_hi = std::min(r_hi, nd);
    }

    const RegionSystem full = build_rectangles(n, d, 1, n, Parity::All);
    const Calibration cal = config.make_calibration();
    const CardWindow windows[2] = {{1, nd}, {r_lo, r_hi}};
    const int reps = config.replicates;

    PluginFailureResult result;
    result.m_full.resize(static_cast<std::size_t>(reps));
    result.m_restricted.resize(static_cast<std::size_t>(reps));
    result.t_full.resize(static_cast<std::size_t>(reps));
    result.t_restricted.resize(static_cast<std::size_t>(reps));

    const std::uint64_t m_arm = substream_seed(config.seed, 1);
    const std::uint64_t t_arm = substream_seed(config.seed, 2);

    parallel_for(2 * reps, config.threads, [&](std::int64_t task) {
        const auto r = static_cast<std::size_t>(task % reps);
        if (task < reps) {
            const Field noise = standard_normal_field(
                n, d, substream_seed(m_arm, static_cast<std::uint64_t>(r)));
            const auto vals =
                surrogate_statistic_multi(noise, full, cal, Sidedness::TwoSided, windows, 1);
            result.m_full[r] = vals[0];
            result.m_restricted[r] = vals[1];
        } else {
            const Field noise = standard_normal_field(
                n, d, substream_seed(t_arm, static_cast<std::uint64_t>(r)));
            const auto report = estimate_global(ModelKind::GaussianUnknownVariance, noise);
            const ModelFamily plugin = model_from_estimate(ModelKind::GaussianUnknownVariance, report);
            const auto vals = scan_statistic_multi(noise, full, {&plugin, 1}, cal,
                                                   Sidedness::TwoSided, windows, 1);
            result.t_full[r] = vals[0][0];
            result.t_restricted[r] = vals[0][1];
        }
    });

    auto sorted = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        return v;
    };
    result.ks_full = ks_distance(sorted(result.t_full), sorted(result.m_full));
    result.ks_restricted = ks_distance(sorted(result.t_restricted), sorted(result.m_restricted));
    result.noise_floor = ks_noise_floor(static_cast<std::size_t>(reps), 500,
                                        substream_seed(config.seed, 3));
    return result;
}

namespace {

bool in_center_block(std::int64_t idx, int n, int d, int block) {
    const int lo = (n - block) / 2;
    for (int k = d - 1; k >= 0; --k) {
        const int coord = static_cast<int>(idx % n);
        if (coord < lo || coord >= lo + block) return false;
        idx /= n;
    }
    return true;
}

}  // namespace

LevelPowerResult run_level_power(const ExperimentConfig& config) {
    const bool gaussian = config.scenario == Scenario::GaussianLevelPower;
    if (!gaussian && config.scenario != Scenario::PoissonLevelPower)
        throw ConfigError("config scenario is not a level/power scenario");
    if (config.anomaly_size > config.n)
        throw ConfigError("anomaly does not fit inside the grid");

    const int n = config.n;
    const int d = config.d;
    RegionSystem system = build_rectangles(n, d, config.min_side, config.max_side, config.parity);
    const std::int64_t r_lo = config.min_card >= 0 ? config.min_card : system.r_n;
    const std::int64_t r_hi = config.max_card >= 0 ? config.max_card : system.m_n;
    system = restrict_scales(system, r_lo, r_hi);
    const Calibration cal = config.make_calibration();

    const QuantileTable table =
        simulate_mn(system, cal, config.sidedness, config.mc_runs,
                    substream_seed(config.seed, 10), config.threads);
    const double q_alpha = table.quantile_for_alpha(config.alpha);

    const std::vector<double> level_grid =
        config.amplitudes.empty() ? default_amplitudes(config.scenario, true) : config.amplitudes;
    const std::vector<double> power_grid =
        config.amplitudes.empty() ? default_amplitudes(config.scenario, false) : config.amplitudes;

    // mean map of the planted anomaly (power curves only)
    const std::int64_t nd = grid_size(n, d);
    std::vector<std::uint8_t> block(static_cast<std::size_t>(nd), 0);
    for (std::int64_t i = 0; i < nd; ++i)
        block[static_cast<std::size_t>(i)] = in_center_block(i, n, d, config.anomaly_size) ? 1 : 0;

    const int reps = config.replicates;
    struct Curve {
        const std::vector<double>* grid;
        bool power;
    };
    const Curve curves[2] = {{&level_grid, false}, {&power_grid, true}};

    // rejections[curve][point][method(0=oracle,1=ams)][replicate]
    std::vector<std::vector<std::array<std::vector<std::uint8_t>, 2>>> rejections(2);
    for (int c = 0; c < 2; ++c) {
        rejections[c].resize(curves[c].grid->size());
        for (auto& point : rejections[c])
            for (auto& arm : point) arm.assign(static_cast<std::size_t>(reps), 0);
    }

    for (int c = 0; c < 2; ++c) {
        const auto& grid = *curves[c].grid;
        const bool power = curves[c].power;
        parallel_for(static_cast<std::int64_t>(grid.size()) * reps, config.threads,
                     [&](std::int64_t task) {
                         const auto p = static_cast<std::size_t>(task / reps);
                         const auto r = static_cast<std::size_t>(task % reps);
                         const double param = grid[p];
                         const std::uint64_t rep_seed = substream_seed(
                             config.seed, 100 + static_cast<std::uint64_t>(c) * 50000000 +
                                              static_cast<std::uint64_t>(task));
                         Rng rng(rep_seed);

                         Field field(n, d, gaussian ? Dtype::Reals : Dtype::Counts);
                         ModelFamily oracle = ModelFamily::poisson(1.0);
                         ModelKind est_kind = ModelKind::Poisson;
                         if (gaussian) {
                             // param is sigma; anomaly adds mean 1 on the block
                             for (std::int64_t i = 0; i < nd; ++i) {
                                 double mean = 0.0;
                                 if (power && block[static_cast<std::size_t>(i)]) mean = 1.0;
                                 field.data[static_cast<std::size_t>(i)] =
                                     mean + param * rng.normal();
                             }
                             oracle = ModelFamily::gaussian_known(0.0, param * param);
                             est_kind = ModelKind::GaussianUnknownVariance;
                         } else {
                             // level: baseline rate param; power: baseline 1, block rate param
                             const double lambda0 = power ? 1.0 : param;
                             for (std::int64_t i = 0; i < nd; ++i) {
                                 const double rate =
                                     power && block[static_cast<std::size_t>(i)] ? param : lambda0;
                                 field.data[static_cast<std::size_t>(i)] =
                                     static_cast<double>(rng.poisson(rate));
                             }
                             oracle = ModelFamily::poisson(lambda0);
                             est_kind = ModelKind::Poisson;
                         }

                         const auto report = estimate_global(est_kind, field);
                         const ModelFamily ams = model_from_estimate(est_kind, report);
                         const ModelFamily models[2] = {oracle, ams};
                         const CardWindow window{1, nd};
                         const auto values = scan_statistic_multi(
                             field, system, models, cal, config.sidedness, {&window, 1}, 1);
                         rejections[c][p][0][r] = values[0][0] >= q_alpha ? 1 : 0;
                         rejections[c][p][1][r] = values[1][0] >= q_alpha ? 1 : 0;
                     });
    }

    LevelPowerResult result;
    result.q_alpha = q_alpha;
    for (int c = 0; c < 2; ++c) {
        const auto& grid = *curves[c].grid;
        for (std::size_t p = 0; p < grid.size(); ++p) {
            for (int method = 0; method < 2; ++method) {
                LevelPowerRow row;
                row.param = grid[p];
                row.method = method == 0 ? "oracle" : "ams";
                row.curve = curves[c].power ? "power" : "level";
                row.replicates = reps;
                row.rejections = 0;
                for (std::uint8_t rej : rejections[c][p][method]) row.rejections += rej;
                row.rate = static_cast<double>(row.rejections) / reps;
                result.rows.push_back(std::move(row));
            }
        }
    }
    return result;
}

void run_experiment_to_dir(const ExperimentConfig& config,
                           const std::filesystem::path& outdir) {
    std::filesystem::create_directories(outdir);
    nlohmann::json manifest;
    manifest["tool"] = "ams simulate";
    manifest["format"] = 1;
    manifest["config"] = config_to_json(config);
    std::vector<std::string> outputs;

    switch (config.scenario) {
        case Scenario::PluginFailure: {
            const auto result = run_plugin_failure(config);
            {
                std::ofstream out(outdir / "samples.csv", std::ios::trunc);
                out << "replicate,m_full,m_restricted,t_full,t_restricted\n";
                for (std::size_t r = 0; r < result.m_full.size(); ++r)
                    out << r << "," << fmt(result.m_full[r]) << "," << fmt(result.m_restricted[r])
                        << "," << fmt(result.t_full[r]) << "," << fmt(result.t_restricted[r])
                        << "\n";
            }
            {
                std::ofstream out(outdir / "summary.csv", std::ios::trunc);
                out << "metric,value\n";
                out << "ks_full," << fmt(result.ks_full) << "\n";
                out << "ks_restricted," << fmt(result.ks_restricted) << "\n";
                out << "noise_floor," << fmt(result.noise_floor) << "\n";
            }
            outputs = {"samples.csv", "summary.csv"};
            break;
        }
        case Scenario::QuantileTable: {
            const RegionSystem system = restrict_scales(
                build_rectangles(config.n, config.d, config.min_side, config.max_side,
                                 config.parity),
                config.min_card >= 0 ? config.min_card : 1,
                config.max_card >= 0 ? config.max_card : grid_size(config.n, config.d));
            const auto table = simulate_mn(system, config.make_calibration(), config.sidedness,
                                           config.mc_runs, config.seed, config.threads);
            {
                std::ofstream out(outdir / "samples.csv", std::ios::trunc);
                out << "draw,m_n\n";
                for (std::size_t i = 0; i < table.samples.size(); ++i)
                    out << i << "," << fmt(table.samples[i]) << "\n";
            }
            {
                std::ofstream out(outdir / "quantiles.csv", std::ios::trunc);
                out << "alpha,q\n";
                for (const auto& [alpha, q] : table.quantiles)
                    out << fmt(alpha) << "," << fmt(q) << "\n";
            }
            outputs = {"samples.csv", "quantiles.csv"};
            break;
        }
        case Scenario::GaussianLevelPower:
        case Scenario::PoissonLevelPower: {
            const auto result = run_level_power(config);
            {
                std::ofstream out(outdir / "curves.csv", std::ios::trunc);
                out << "param,method,curve,rejections,replicates,rate\n";
                for (const auto& row : result.rows)
                    out << fmt(row.param) << "," << row.method << "," << row.curve << ","
                        << row.rejections << "," << row.replicates << "," << fmt(row.rate)
                        << "\n";
            }
            {
                std::ofstream out(outdir / "summary.csv", std::ios::trunc);
                out << "metric,value\n";
                out << "q_alpha," << fmt(result.q_alpha) << "\n";
            }
            outputs = {"curves.csv", "summary.csv"};
            break;
        }
    }

    manifest["outputs"] = outputs;
    std::ofstream out(outdir / "manifest.json", std::ios::trunc);
    out << manifest.dump(2) << "\n";
    if (!out) throw IoError("cannot write manifest in " + outdir.string());
}

ExperimentConfig config_from_manifest(const std::filesystem::path& manifest) {
    std::ifstream in(manifest);
    if (!in) throw IoError("cannot open manifest " + manifest.string());
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.contains("config"))
        throw ParseError("not a run manifest: " + manifest.string());
    return config_from_json(j.at("config"));
}

}  // namespace ams
