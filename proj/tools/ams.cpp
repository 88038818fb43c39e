// ams: multiscale scanning of grid data with simulated critical values.

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "ams/detect.hpp"
#include "ams/format.hpp"
#include "ams/digest.hpp"
#include "ams/experiments.hpp"
#include "ams/gridio.hpp"
#include "ams/parallel.hpp"
#include "ams/quantiles.hpp"

namespace {

using namespace ams;

std::string fmt(double v) { return format_double(v); }

struct SideSpec {
    int min_side = 0;
    int max_side = 0;
    Parity parity = Parity::All;
};

SideSpec parse_sides(const std::string& text) {
    SideSpec spec;
    std::string body = text;
    const auto colon = body.find(':');
    if (colon != std::string::npos) {
        const std::string suffix = body.substr(colon + 1);
        if (suffix == "even") spec.parity = Parity::EvenOnly;
        else if (suffix != "all") throw ConfigError("sides suffix must be :even or :all");
        body = body.substr(0, colon);
    }
    const auto dots = body.find("..");
    try {
        if (dots == std::string::npos) {
            spec.min_side = spec.max_side = std::stoi(body);
        } else {
            spec.min_side = std::stoi(body.substr(0, dots));
            spec.max_side = std::stoi(body.substr(dots + 2));
        }
    } catch (const std::exception&) {
        throw ConfigError("cannot parse --sides '" + text + "' (expected a..b[:even])");
    }
    return spec;
}

Sidedness parse_sidedness(bool one_sided) {
    return one_sided ? Sidedness::OneSidedUpper : Sidedness::TwoSided;
}

ModelKind parse_model(const std::string& name) {
    if (name == "poisson") return ModelKind::Poisson;
    if (name == "gauss-known") return ModelKind::GaussianKnownVariance;
    if (name == "gauss-unknown") return ModelKind::GaussianUnknownVariance;
    if (name == "gamma") return ModelKind::Gamma;
    throw ConfigError("unknown model '" + name + "'");
}

std::string model_name(ModelKind kind) {
    switch (kind) {
        case ModelKind::Poisson: return "poisson";
        case ModelKind::GaussianKnownVariance: return "gauss-known";
        case ModelKind::GaussianUnknownVariance: return "gauss-unknown";
        case ModelKind::Gamma: return "gamma";
    }
    return "poisson";
}

Calibration make_calibration(const std::string& kind, double nu, double pwm_c, double pwm_cd,
                             int dim) {
    if (kind == "dw") return Calibration::dw(nu, dim);
    if (kind == "sac") return Calibration::sac(dim);
    if (kind == "pwm") return Calibration::pwm(pwm_c, pwm_cd, dim);
    if (kind == "unit") return Calibration::unit(dim);
    throw ConfigError("unknown calibration '" + kind + "'");
}

std::uint64_t entropy_seed() {
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

std::string file_digest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return to_hex(fnv1a64(bytes));
}

// ---------------------------------------------------------------------------
// scan

struct ScanOptions {
    std::string input;
    std::string format;  // "", csv, pgm, raw
    std::string dtype;   // "", counts, reals
    std::string model = "poisson";
    std::vector<double> baseline;
    std::vector<double> nuisance;
    std::string sides = "4..14:even";
    std::int64_t min_card = -1;
    std::int64_t max_card = -1;
    std::string calibration = "dw";
    double nu = 1.0;
    double pwm_c = 2.0;
    double pwm_cd = 1.0;
    double alpha = 0.1;
    bool one_sided = false;
    std::string store;
    int mc_runs = 2000;
    std::uint64_t seed = 0;
    bool seed_given = false;
    double pixel_area = 0.0;
    std::string out = "scan";
    int threads = 0;
};

nlohmann::json scan_options_to_json(const ScanOptions& o) {
    nlohmann::json j;
    j["input"] = o.input;
    j["format"] = o.format;
    j["dtype"] = o.dtype;
    j["model"] = o.model;
    j["baseline"] = o.baseline;
    j["nuisance"] = o.nuisance;
    j["sides"] = o.sides;
    j["min_card"] = o.min_card;
    j["max_card"] = o.max_card;
    j["calibration"] = o.calibration;
    j["nu"] = o.nu;
    j["pwm_c"] = o.pwm_c;
    j["pwm_cd"] = o.pwm_cd;
    j["alpha"] = o.alpha;
    j["one_sided"] = o.one_sided;
    j["quantile_store"] = o.store;
    j["mc_runs"] = o.mc_runs;
    j["seed"] = o.seed;
    j["pixel_area"] = o.pixel_area;
    return j;
}

ScanOptions scan_options_from_json(const nlohmann::json& j) {
    ScanOptions o;
    o.input = j.at("input").get<std::string>();
    o.format = j.at("format").get<std::string>();
    o.dtype = j.at("dtype").get<std::string>();
    o.model = j.at("model").get<std::string>();
    o.baseline = j.at("baseline").get<std::vector<double>>();
    o.nuisance = j.at("nuisance").get<std::vector<double>>();
    o.sides = j.at("sides").get<std::string>();
    o.min_card = j.at("min_card").get<std::int64_t>();
    o.max_card = j.at("max_card").get<std::int64_t>();
    o.calibration = j.at("calibration").get<std::string>();
    o.nu = j.at("nu").get<double>();
    o.pwm_c = j.at("pwm_c").get<double>();
    o.pwm_cd = j.at("pwm_cd").get<double>();
    o.alpha = j.at("alpha").get<double>();
    o.one_sided = j.at("one_sided").get<bool>();
    o.store = j.at("quantile_store").get<std::string>();
    o.mc_runs = j.at("mc_runs").get<int>();
    o.seed = j.at("seed").get<std::uint64_t>();
    o.seed_given = true;
    o.pixel_area = j.at("pixel_area").get<double>();
    return o;
}

int run_scan(ScanOptions o) {
    if (!o.seed_given) {
        o.seed = entropy_seed();
        std::cerr << "note: no --seed given; using entropy seed " << o.seed
                  << " (recorded in the manifest)\n";
    }

    std::optional<GridFormat> format;
    if (o.format == "csv") format = GridFormat::CSV;
    else if (o.format == "pgm") format = GridFormat::PGM;
    else if (o.format == "raw") format = GridFormat::RawText;
    else if (!o.format.empty()) throw ConfigError("unknown --format '" + o.format + "'");
    std::optional<Dtype> dtype;
    if (o.dtype == "counts") dtype = Dtype::Counts;
    else if (o.dtype == "reals") dtype = Dtype::Reals;
    else if (!o.dtype.empty()) throw ConfigError("unknown --dtype '" + o.dtype + "'");

    const Field field = read_grid(o.input, format, dtype);
    const int n = field.n;
    const int d = field.d;
    const ModelKind kind = parse_model(o.model);

    // baseline/nuisance from flags when given, otherwise estimated globally
    if (kind == ModelKind::Poisson && !o.nuisance.empty())
        throw ConfigError("poisson has no nuisance parameter");
    if ((kind == ModelKind::GaussianUnknownVariance || kind == ModelKind::Gamma) &&
        o.baseline.empty() != o.nuisance.empty())
        throw ConfigError("give both --baseline and --nuisance, or neither (estimate)");
    ModelFamily model = ModelFamily::poisson(1.0);
    bool estimated = false;
    if (!o.baseline.empty() &&
        (kind == ModelKind::Poisson || !o.nuisance.empty())) {
        switch (kind) {
            case ModelKind::Poisson: model = ModelFamily::poisson(o.baseline.at(0)); break;
            case ModelKind::GaussianKnownVariance:
                model = ModelFamily::gaussian_known(o.baseline.at(0), o.nuisance.at(0));
                break;
            case ModelKind::GaussianUnknownVariance:
                model = ModelFamily::gaussian_unknown(o.baseline.at(0), o.nuisance.at(0));
                break;
            case ModelKind::Gamma:
                model = ModelFamily::gamma(o.baseline.at(0), o.nuisance.at(0));
                break;
        }
    } else {
        const auto report = estimate_global(kind, field);
        estimated = true;
        if (kind == ModelKind::GaussianKnownVariance) {
            if (o.nuisance.empty())
                throw ConfigError("gauss-known requires --nuisance <variance>");
            model = model_from_estimate(kind, report, o.nuisance);
        } else {
            model = model_from_estimate(kind, report);
        }
        std::cerr << "estimated " << model.describe() << " from " << report.sample_size
                  << " observations\n";
    }

    const SideSpec sides = parse_sides(o.sides);
    RegionSystem system = build_rectangles(n, d, sides.min_side, sides.max_side, sides.parity);
    std::int64_t min_card = o.min_card >= 0 ? o.min_card : system.r_n;
    std::int64_t max_card = o.max_card;
    const double s_n = std::pow(static_cast<double>(n), d / 2.0);
    if (max_card < 0) {
        max_card = system.m_n;
        if (estimated && static_cast<double>(max_card) > s_n) {
            max_card = static_cast<std::int64_t>(s_n);
            std::cerr << "advisory: estimated parameters require scales below n^(d/2) = "
                      << fmt(s_n) << "; capping --max-card at " << max_card
                      << " (pass --max-card to override)\n";
        }
    } else if (estimated && static_cast<double>(max_card) > s_n) {
        std::cerr << "advisory: --max-card " << max_card << " exceeds n^(d/2) = " << fmt(s_n)
                  << "; the Gaussian approximation degrades on the largest scales\n";
    }
    system = restrict_scales(system, min_card, max_card);

    const Calibration cal =
        make_calibration(o.calibration, o.nu, o.pwm_c, o.pwm_cd, d);
    const auto guard = min_scale_guard(cal, n, min_card);
    if (!guard.satisfied)
        std::cerr << "advisory: min cardinality " << min_card << " is below log^"
                  << guard.gamma << "(n) = " << fmt(guard.threshold)
                  << "; the invariance principle is asymptotic in this regime\n";

    const Sidedness sidedness = parse_sidedness(o.one_sided);
    if (o.store.empty()) throw ConfigError("--quantile-store is required");
    const int threads = resolve_threads(o.threads);
    const QuantileTable table = cache_lookup_or_simulate(
        o.store, system, cal, sidedness, o.mc_runs, o.seed, threads, &std::cerr);

    const auto result = scan_statistic(field, system, model, cal, sidedness, true, threads);
    const auto map = significance_map(
        result, table, o.alpha,
        o.pixel_area > 0.0 ? std::optional<double>(o.pixel_area) : std::nullopt);

    // outputs
    const std::string prefix = o.out;
    std::vector<std::string> outputs;
    {
        std::ofstream csv(prefix + ".regions.csv", std::ios::trunc);
        if (!csv) throw IoError("cannot write " + prefix + ".regions.csv");
        write_rejections_csv(csv, map, d);
        outputs.push_back(prefix + ".regions.csv");
    }
    if (d == 2) {
        write_sigmap_pgm(prefix + ".sigmap.pgm", map);
        outputs.push_back(prefix + ".sigmap.pgm");
        const auto seg = segment(map);
        write_mask_pgm(prefix + ".segmentation.pgm", seg.mask, n, d);
        outputs.push_back(prefix + ".segmentation.pgm");
        write_mask_pgm(prefix + ".union.pgm", union_mask(map), n, d);
        outputs.push_back(prefix + ".union.pgm");
    }

    nlohmann::json manifest;
    manifest["tool"] = "ams scan";
    manifest["format"] = 1;
    manifest["options"] = scan_options_to_json(o);
    manifest["input_digest"] = file_digest(o.input);
    manifest["n"] = n;
    manifest["d"] = d;
    manifest["model"] = model.describe();
    manifest["provenance"] = estimated ? "estimated" : "known";
    manifest["theta"] = model.theta0;
    manifest["xi"] = model.xi;
    manifest["effective_min_card"] = min_card;
    manifest["effective_max_card"] = max_card;
    manifest["eta"] = map.eta_used;
    manifest["q_alpha"] = map.eta_used;
    manifest["t_n"] = result.t_n;
    manifest["rejections"] = map.regions.size();
    manifest["outputs"] = outputs;
    {
        std::ofstream mf(prefix + ".manifest.json", std::ios::trunc);
        if (!mf) throw IoError("cannot write " + prefix + ".manifest.json");
        mf << manifest.dump(2) << "\n";
    }

    std::cout << "t_n = " << fmt(result.t_n) << "\n";
    std::cout << "eta = q_{1-alpha} = " << fmt(map.eta_used) << " (alpha = " << o.alpha
              << ")\n";
    std::cout << "significant regions: " << map.regions.size() << "\n";
    std::cout << "wrote " << prefix << ".manifest.json";
    for (const auto& f : outputs) std::cout << ", " << f;
    std::cout << "\n";
    return 0;
}

// ---------------------------------------------------------------------------

int run_quantile(int n, int d, const std::string& sides_text, const std::string& calibration,
                 double nu, double pwm_c, double pwm_cd, bool one_sided,
                 std::int64_t min_card, std::int64_t max_card, int runs, std::uint64_t seed,
                 const std::string& alpha_list, const std::string& store, int threads) {
    const SideSpec sides = parse_sides(sides_text);
    RegionSystem system = build_rectangles(n, d, sides.min_side, sides.max_side, sides.parity);
    system = restrict_scales(system, min_card >= 0 ? min_card : system.r_n,
                             max_card >= 0 ? max_card : system.m_n);
    const Calibration cal = make_calibration(calibration, nu, pwm_c, pwm_cd, d);
    const Sidedness sidedness = parse_sidedness(one_sided);

    std::vector<double> alphas(std::begin(kDefaultAlphas), std::end(kDefaultAlphas));
    if (!alpha_list.empty()) {
        alphas.clear();
        std::stringstream ss(alpha_list);
        std::string token;
        while (std::getline(ss, token, ',')) alphas.push_back(std::stod(token));
    }

    QuantileTable table;
    if (store.empty()) {
        table = simulate_mn(system, cal, sidedness, runs, seed, resolve_threads(threads),
                            alphas);
    } else {
        table = cache_lookup_or_simulate(store, system, cal, sidedness, runs, seed,
                                         resolve_threads(threads), &std::cerr, alphas);
    }
    for (double alpha : alphas) {
        char label[32];
        std::snprintf(label, sizeof label, "%g", alpha);
        std::cout << "alpha=" << label << " q=" << fmt(table.quantile_for_alpha(alpha))
                  << "\n";
    }
    return 0;
}

int run_simulate(const std::string& scenario, const std::string& config_path,
                 const std::string& replay, const std::string& out, std::uint64_t seed,
                 bool seed_given, int threads) {
    ExperimentConfig config;
    if (!replay.empty()) {
        config = config_from_manifest(replay);
    } else {
        if (config_path.empty()) throw ConfigError("--config or --replay is required");
        config = parse_experiment_config(config_path);
    }
    if (!scenario.empty()) {
        const Scenario wanted = scenario_from_string(scenario);
        if (replay.empty() && config_path.empty()) config.scenario = wanted;
        else if (wanted != config.scenario)
            throw ConfigError("--scenario disagrees with the config file");
    }
    if (seed_given) config.seed = seed;
    config.threads = resolve_threads(threads);
    run_experiment_to_dir(config, out);
    std::cout << "wrote " << (std::filesystem::path(out) / "manifest.json").string() << "\n";
    return 0;
}

int run_validate(const std::string& calibration, double nu, double pwm_c, double pwm_cd,
                 int n, int d, std::int64_t r_n) {
    const Calibration cal = make_calibration(calibration, nu, pwm_c, pwm_cd, d);
    const auto report = validate_growth(cal, n);
    std::cout << "calibration: " << cal.digest_string() << "\n";
    std::cout << "monotone omega: " << (report.monotone_omega ? "yes" : "no") << "\n";
    std::cout << "monotone omega~: " << (report.monotone_omega_tilde ? "yes" : "no") << "\n";
    std::cout << "fitted C_omega: " << fmt(report.c_omega) << "\n";
    std::cout << "fitted C_omega~: " << fmt(report.c_omega_tilde) << "\n";
    std::cout << "growth conditions: " << (report.pass ? "PASS" : "FAIL") << "\n";
    if (r_n >= 0) {
        const auto guard = min_scale_guard(cal, n, r_n);
        std::cout << "gamma = " << fmt(guard.gamma) << ", log^gamma(n) = "
                  << fmt(guard.threshold) << ", r_n = " << r_n << " -> "
                  << (guard.satisfied ? "ok" : "advisory: r_n below the asymptotic bound")
                  << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adjusted multiscale scanning of d-dimensional grids"};
    app.require_subcommand(1);

    // scan
    ScanOptions scan;
    std::string scan_replay;
    auto* scan_cmd = app.add_subcommand("scan", "Scan a grid file for anomalous regions");
    scan_cmd->add_option("--input", scan.input, "Grid file (csv, pgm, or ams-grid raw text)");
    scan_cmd->add_option("--replay", scan_replay, "Re-run a recorded scan manifest");
    scan_cmd->add_option("--format", scan.format, "Force input format: csv|pgm|raw");
    scan_cmd->add_option("--dtype", scan.dtype, "Force dtype: counts|reals");
    scan_cmd->add_option("--model", scan.model,
                         "poisson|gauss-known|gauss-unknown|gamma");
    scan_cmd->add_option("--baseline", scan.baseline, "Known baseline parameter");
    scan_cmd->add_option("--nuisance", scan.nuisance, "Known nuisance parameter");
    scan_cmd->add_option("--sides", scan.sides, "Side lengths a..b[:even]");
    scan_cmd->add_option("--min-card", scan.min_card, "Smallest region cardinality");
    scan_cmd->add_option("--max-card", scan.max_card, "Largest region cardinality");
    scan_cmd->add_option("--calibration", scan.calibration, "dw|sac|pwm|unit");
    scan_cmd->add_option("--nu", scan.nu, "DW calibration nu (>= 1)");
    scan_cmd->add_option("--pwm-c", scan.pwm_c, "PWM constant C (> 1)");
    scan_cmd->add_option("--pwm-cd", scan.pwm_cd, "PWM constant C_d");
    scan_cmd->add_option("--alpha", scan.alpha, "FWER level");
    scan_cmd->add_flag("--one-sided", scan.one_sided, "Detect elevated means only");
    scan_cmd->add_option("--quantile-store", scan.store, "Quantile cache directory");
    scan_cmd->add_option("--mc-runs", scan.mc_runs, "Monte-Carlo replicates for quantiles");
    auto* seed_opt = scan_cmd->add_option("--seed", scan.seed, "Master seed");
    scan_cmd->add_option("--pixel-area", scan.pixel_area,
                         "Physical area per pixel (display units)");
    scan_cmd->add_option("--out", scan.out, "Output prefix");
    scan_cmd->add_option("--threads", scan.threads, "Worker threads (0 = hardware)");

    // quantile
    int qn = 128;
    int qd = 2;
    std::string qsides = "4..14:even";
    std::string qcal = "dw";
    double qnu = 1.0;
    double qpwm_c = 2.0;
    double qpwm_cd = 1.0;
    bool qone = false;
    std::int64_t qmin_card = -1;
    std::int64_t qmax_card = -1;
    int qruns = 2000;
    std::uint64_t qseed = 1;
    std::string qalphas;
    std::string qstore;
    int qthreads = 0;
    auto* quant_cmd = app.add_subcommand("quantile", "Simulate surrogate quantiles q_{1-alpha}");
    quant_cmd->add_option("--n", qn, "Grid side length");
    quant_cmd->add_option("--d", qd, "Dimension");
    quant_cmd->add_option("--sides", qsides, "Side lengths a..b[:even]");
    quant_cmd->add_option("--calibration", qcal, "dw|sac|pwm|unit");
    quant_cmd->add_option("--nu", qnu, "DW nu");
    quant_cmd->add_option("--pwm-c", qpwm_c, "PWM C");
    quant_cmd->add_option("--pwm-cd", qpwm_cd, "PWM C_d");
    quant_cmd->add_flag("--one-sided", qone, "One-sided surrogate");
    quant_cmd->add_option("--min-card", qmin_card, "Smallest cardinality");
    quant_cmd->add_option("--max-card", qmax_card, "Largest cardinality");
    quant_cmd->add_option("--runs", qruns, "Monte-Carlo replicates");
    quant_cmd->add_option("--seed", qseed, "Master seed");
    quant_cmd->add_option("--alpha-list", qalphas, "Comma-separated alphas");
    quant_cmd->add_option("--store", qstore, "Quantile cache directory");
    quant_cmd->add_option("--threads", qthreads, "Worker threads (0 = hardware)");

    // simulate
    std::string sscenario;
    std::string sconfig;
    std::string sreplay;
    std::string sout = "experiment";
    std::uint64_t sseed = 0;
    int sthreads = 0;
    auto* sim_cmd = app.add_subcommand("simulate", "Run a simulation-study scenario");
    sim_cmd->add_option("--scenario", sscenario,
                        "plugin-failure|quantile-table|gauss-level-power|poisson-level-power");
    sim_cmd->add_option("--config", sconfig, "key=value config file");
    sim_cmd->add_option("--replay", sreplay, "Re-run a recorded manifest");
    sim_cmd->add_option("--out", sout, "Output directory");
    auto* sim_seed = sim_cmd->add_option("--seed", sseed, "Override the config seed");
    sim_cmd->add_option("--threads", sthreads, "Worker threads (0 = hardware)");

    // validate
    std::string vcal = "dw";
    double vnu = 1.0;
    double vpwm_c = 2.0;
    double vpwm_cd = 1.0;
    int vn = 128;
    int vd = 2;
    std::int64_t vr_n = -1;
    auto* val_cmd = app.add_subcommand("validate", "Check calibration growth conditions");
    val_cmd->add_option("--calibration", vcal, "dw|sac|pwm|unit");
    val_cmd->add_option("--nu", vnu, "DW nu");
    val_cmd->add_option("--pwm-c", vpwm_c, "PWM C");
    val_cmd->add_option("--pwm-cd", vpwm_cd, "PWM C_d");
    val_cmd->add_option("--n", vn, "Grid side length");
    val_cmd->add_option("--d", vd, "Dimension");
    val_cmd->add_option("--r-n", vr_n, "Minimum cardinality to check the guard for");

    CLI11_PARSE(app, argc, argv);

    try {
        if (scan_cmd->parsed()) {
            if (!scan_replay.empty()) {
                std::ifstream in(scan_replay);
                if (!in) throw IoError("cannot open manifest " + scan_replay);
                nlohmann::json manifest = nlohmann::json::parse(in, nullptr, false);
                if (manifest.is_discarded() || !manifest.contains("options"))
                    throw ParseError("not a scan manifest: " + scan_replay);
                ScanOptions replayed = scan_options_from_json(manifest.at("options"));
                if (scan_cmd->count("--out")) replayed.out = scan.out;
                replayed.threads = scan.threads;
                if (file_digest(replayed.input) !=
                    manifest.at("input_digest").get<std::string>())
                    std::cerr << "warning: input file changed since the manifest was written\n";
                return run_scan(replayed);
            }
            if (scan.input.empty()) throw ConfigError("--input is required");
            scan.seed_given = seed_opt->count() > 0;
            return run_scan(scan);
        }
        if (quant_cmd->parsed())
            return run_quantile(qn, qd, qsides, qcal, qnu, qpwm_c, qpwm_cd, qone, qmin_card,
                                qmax_card, qruns, qseed, qalphas, qstore, qthreads);
        if (sim_cmd->parsed())
            return run_simulate(sscenario, sconfig, sreplay, sout, sseed,
                                sim_seed->count() > 0, sthreads);
        if (val_cmd->parsed())
            return run_validate(vcal, vnu, vpwm_c, vpwm_cd, vn, vd, vr_n);
    } catch (const ams::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 5;
    }
    return 0;
}
