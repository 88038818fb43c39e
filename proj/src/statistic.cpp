#include "ams/statistic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ams/parallel.hpp"

namespace ams {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct ScaleExtremes {
    std::int64_t cardinality = 0;
    std::int64_t count = 0;
    double min_sum = 0.0;
    double max_sum = 0.0;
    std::int64_t argmin = 0;  // first offset attaining the extreme
    std::int64_t argmax = 0;
};

// T_R^2 is convex in the local mean for every shipped family, so per-scale
// maxima of the local statistic are attained at an extreme region sum. The
// naive per-region oracle in the tests pins this equivalence.
ScaleExtremes scan_extremes(std::span<const double> sums, std::int64_t cardinality) {
    ScaleExtremes e;
    e.cardinality = cardinality;
    e.count = static_cast<std::int64_t>(sums.size());
    e.min_sum = sums[0];
    e.max_sum = sums[0];
    for (std::int64_t i = 1; i < e.count; ++i) {
        const double v = sums[static_cast<std::size_t>(i)];
        if (v < e.min_sum) {
            e.min_sum = v;
            e.argmin = i;
        } else if (v > e.max_sum) {
            e.max_sum = v;
            e.argmax = i;
        }
    }
    return e;
}

struct GatedValue {
    double t = 0.0;
    std::int64_t offset = 0;
    bool qualified = true;  // false: excluded from the max entirely (surrogate one-sided)
};

GatedValue model_scale_max(const ModelFamily& model, double gate_mean, Sidedness sided,
                           const ScaleExtremes& e) {
    GatedValue out;
    if (sided == Sidedness::TwoSided) {
        const double t_lo = local_lrt(model, e.min_sum, e.cardinality);
        const double t_hi = local_lrt(model, e.max_sum, e.cardinality);
        if (t_lo > t_hi || (t_lo == t_hi && e.argmin < e.argmax)) {
            out.t = t_lo;
            out.offset = e.argmin;
        } else {
            out.t = t_hi;
            out.offset = e.argmax;
        }
        return out;
    }
    // one-sided upper: T~ = T if the local mean exceeds the baseline mean, else 0
    const double ybar_max = e.max_sum / static_cast<double>(e.cardinality);
    if (ybar_max > gate_mean) {
        out.t = local_lrt(model, e.max_sum, e.cardinality);
        out.offset = e.argmax;
    } else {
        out.t = 0.0;
        out.offset = 0;
    }
    return out;
}

GatedValue surrogate_scale_max(Sidedness sided, const ScaleExtremes& e) {
    GatedValue out;
    const double inv_root = 1.0 / std::sqrt(static_cast<double>(e.cardinality));
    if (sided == Sidedness::TwoSided) {
        const double t_lo = std::fabs(e.min_sum) * inv_root;
        const double t_hi = std::fabs(e.max_sum) * inv_root;
        if (t_lo > t_hi || (t_lo == t_hi && e.argmin < e.argmax)) {
            out.t = t_lo;
            out.offset = e.argmin;
        } else {
            out.t = t_hi;
            out.offset = e.argmax;
        }
        return out;
    }
    if (e.max_sum > 0.0) {
        out.t = e.max_sum * inv_root;
        out.offset = e.argmax;
    } else {
        out.qualified = false;
    }
    return out;
}

struct PenaltyPair {
    double omega_tilde = 1.0;
    double omega = 0.0;
};

std::vector<PenaltyPair> scale_penalties(const RegionSystem& system, const Calibration& cal) {
    std::vector<PenaltyPair> penalties(system.scales.size());
    for (std::size_t i = 0; i < system.scales.size(); ++i) {
        const double card = static_cast<double>(system.cardinality_of(system.scales[i]));
        penalties[i].omega_tilde = omega_tilde(cal, card, system.n);
        penalties[i].omega = omega(cal, card, system.n);
    }
    return penalties;
}

void require_scannable(const RegionSystem& system, const Field& field) {
    if (system.empty()) throw EmptySystem("region system has no scales");
    if (field.n != system.n || field.d != system.d)
        throw SizeError("field and region system disagree on (n, d)");
}

void require_nondegenerate(const ModelFamily& model) {
    const auto mv = mean_variance(model);
    if (!std::isfinite(mv.mean) || !std::isfinite(mv.variance))
        throw DomainError("model parameters must be finite");
    if (!(mv.variance > 0.0))
        throw DegenerateData("baseline variance is zero: " + model.describe());
}

}  // namespace

ScanResult scan_statistic(const Field& field, const RegionSystem& system,
                          const ModelFamily& model, const Calibration& cal,
                          Sidedness sidedness, bool keep_per_region, int threads) {
    require_scannable(system, field);
    require_nondegenerate(model);
    const double gate_mean = model.baseline_mean();
    const auto penalties = scale_penalties(system, cal);

    SumEngine engine(field);
    const std::size_t n_scales = system.scales.size();
    std::vector<ScaleExtremes> extremes(n_scales);
    std::vector<ScaleStats> per_region(keep_per_region ? n_scales : 0);

    parallel_for(static_cast<std::int64_t>(n_scales), threads, [&](std::int64_t i) {
        const auto& scale = system.scales[static_cast<std::size_t>(i)];
        static thread_local std::vector<double> sums;
        auto dims = engine.compute(scale, sums);
        extremes[static_cast<std::size_t>(i)] =
            scan_extremes(sums, system.cardinality_of(scale));
        if (keep_per_region) {
            auto& stats = per_region[static_cast<std::size_t>(i)];
            stats.scale = scale;
            stats.dims = std::move(dims);
            stats.cardinality = extremes[static_cast<std::size_t>(i)].cardinality;
            stats.t_values.resize(sums.size());
            stats.calibrated.resize(sums.size());
            const auto pen = penalties[static_cast<std::size_t>(i)];
            const double card = static_cast<double>(stats.cardinality);
            for (std::size_t j = 0; j < sums.size(); ++j) {
                double t = 0.0;
                if (sidedness == Sidedness::TwoSided ||
                    sums[j] / card > gate_mean) {
                    t = local_lrt(model, sums[j], stats.cardinality);
                }
                stats.t_values[j] = t;
                stats.calibrated[j] = pen.omega_tilde * (t - pen.omega);
            }
        }
    });

    // canonical-order reduction: scale-major, then offset order, ties first-wins
    ScanResult result;
    result.sidedness = sidedness;
    result.model_snapshot = model;
    result.calibration_snapshot = cal;
    result.n = system.n;
    result.d = system.d;
    result.t_n = kNegInf;
    std::size_t best_scale = 0;
    std::int64_t best_offset = 0;
    for (std::size_t i = 0; i < n_scales; ++i) {
        const auto gated = model_scale_max(model, gate_mean, sidedness, extremes[i]);
        const double cand = penalties[i].omega_tilde * (gated.t - penalties[i].omega);
        if (cand > result.t_n) {
            result.t_n = cand;
            best_scale = i;
            best_offset = gated.offset;
        }
    }
    result.argmax_region = region_at(system, best_scale, best_offset);
    result.per_region = std::move(per_region);
    return result;
}

std::vector<std::vector<double>> scan_statistic_multi(
    const Field& field, const RegionSystem& system, std::span<const ModelFamily> models,
    const Calibration& cal, Sidedness sidedness, std::span<const CardWindow> windows,
    int threads) {
    require_scannable(system, field);
    for (const auto& model : models) require_nondegenerate(model);
    const auto penalties = scale_penalties(system, cal);

    SumEngine engine(field);
    const std::size_t n_scales = system.scales.size();
    std::vector<ScaleExtremes> extremes(n_scales);
    parallel_for(static_cast<std::int64_t>(n_scales), threads, [&](std::int64_t i) {
        const auto& scale = system.scales[static_cast<std::size_t>(i)];
        static thread_local std::vector<double> sums;
        engine.compute(scale, sums);
        extremes[static_cast<std::size_t>(i)] =
            scan_extremes(sums, system.cardinality_of(scale));
    });

    std::vector<std::vector<double>> result(
        models.size(), std::vector<double>(windows.size(), kNegInf));
    for (std::size_t i = 0; i < n_scales; ++i) {
        const std::int64_t card = extremes[i].cardinality;
        for (std::size_t k = 0; k < models.size(); ++k) {
            const auto gated = model_scale_max(models[k], models[k].baseline_mean(),
                                               sidedness, extremes[i]);
            const double cand = penalties[i].omega_tilde * (gated.t - penalties[i].omega);
            for (std::size_t w = 0; w < windows.size(); ++w) {
                if (card >= windows[w].first && card <= windows[w].second &&
                    cand > result[k][w])
                    result[k][w] = cand;
            }
        }
    }
    return result;
}

double surrogate_statistic(const Field& noise, const RegionSystem& system,
                           const Calibration& cal, Sidedness sidedness, int threads) {
    const CardWindow window{std::numeric_limits<std::int64_t>::min(),
                            std::numeric_limits<std::int64_t>::max()};
    return surrogate_statistic_multi(noise, system, cal, sidedness, {&window, 1}, threads)[0];
}

std::vector<double> surrogate_statistic_multi(const Field& noise, const RegionSystem& system,
                                              const Calibration& cal, Sidedness sidedness,
                                              std::span<const CardWindow> windows,
                                              int threads) {
    require_scannable(system, noise);
    const auto penalties = scale_penalties(system, cal);

    SumEngine engine(noise);
    const std::size_t n_scales = system.scales.size();
    std::vector<ScaleExtremes> extremes(n_scales);
    parallel_for(static_cast<std::int64_t>(n_scales), threads, [&](std::int64_t i) {
        const auto& scale = system.scales[static_cast<std::size_t>(i)];
        static thread_local std::vector<double> sums;
        engine.compute(scale, sums);
        extremes[static_cast<std::size_t>(i)] =
            scan_extremes(sums, system.cardinality_of(scale));
    });

    std::vector<double> result(windows.size(), kNegInf);
    for (std::size_t i = 0; i < n_scales; ++i) {
        const auto gated = surrogate_scale_max(sidedness, extremes[i]);
        if (!gated.qualified) continue;
        const double cand = penalties[i].omega_tilde * (gated.t - penalties[i].omega);
        const std::int64_t card = extremes[i].cardinality;
        for (std::size_t w = 0; w < windows.size(); ++w) {
            if (card >= windows[w].first && card <= windows[w].second && cand > result[w])
                result[w] = cand;
        }
    }
    return result;
}

std::vector<Rejection> reject_regions(const ScanResult& result, double eta) {
    if (std::isnan(eta)) throw ConfigError("rejection threshold must not be NaN");
    if (result.per_region.empty() && result.n > 0) {
        // a max-only scan cannot enumerate rejections
        throw ConfigError("scan was run without per-region statistics");
    }
    RegionSystem system;
    system.n = result.n;
    system.d = result.d;
    std::vector<Rejection> rejections;
    for (std::size_t i = 0; i < result.per_region.size(); ++i) {
        const auto& stats = result.per_region[i];
        system.scales.push_back(stats.scale);
        const double card = static_cast<double>(stats.cardinality);
        const double omt = omega_tilde(result.calibration_snapshot, card, result.n);
        const double om = omega(result.calibration_snapshot, card, result.n);
        const double local_threshold = eta / omt + om;
        for (std::size_t j = 0; j < stats.calibrated.size(); ++j) {
            if (stats.calibrated[j] >= eta) {
                Rejection r;
                r.region = region_at(system, system.scales.size() - 1,
                                     static_cast<std::int64_t>(j));
                r.t_value = stats.t_values[j];
                r.calibrated = stats.calibrated[j];
                r.local_threshold = local_threshold;
                rejections.push_back(std::move(r));
            }
        }
    }
    return rejections;
}

}  // namespace ams
