#ifndef AMS_TESTS_ORACLES_HPP
#define AMS_TESTS_ORACLES_HPP

// Test-only oracles, deliberately independent of the implementation paths they
// check: the LRT oracle maximizes the log-likelihood numerically instead of
// using the closed forms, and the naive scan evaluates every region directly
// instead of going through the FFT engine and per-scale extremes.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "ams/calibration.hpp"
#include "ams/field.hpp"
#include "ams/models.hpp"
#include "ams/regions.hpp"
#include "ams/statistic.hpp"

namespace ams::testing {

inline double golden_max(const std::function<double(double)>& fn, double lo, double hi,
                         int iters = 300) {
    constexpr double phi = 0.6180339887498949;
    double a = lo;
    double b = hi;
    double c = b - phi * (b - a);
    double d = a + phi * (b - a);
    double fc = fn(c);
    double fd = fn(d);
    for (int i = 0; i < iters; ++i) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = fn(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = fn(d);
        }
    }
    const double mid = fn(0.5 * (a + b));
    return std::max({fn(a), fn(b), fc, fd, mid});
}

// 2*(loglik(theta) - loglik(theta0)) expressed through the sufficient
// statistic (sum, card); maximized numerically over theta.
inline double oracle_lrt(const ModelFamily& model, double sum, std::int64_t card) {
    const double nr = static_cast<double>(card);
    const double ybar = sum / nr;
    std::function<double(double)> lam;
    double lo = 0.0;
    double hi = 1.0;
    switch (model.kind) {
        case ModelKind::GaussianKnownVariance:
        case ModelKind::GaussianUnknownVariance: {
            const double mu0 = model.theta0[0];
            const double s2 = model.xi[0];
            lam = [=](double mu) {
                return (2.0 * (mu - mu0) * sum - nr * (mu * mu - mu0 * mu0)) / s2;
            };
            const double spread = 10.0 * (std::fabs(ybar - mu0) + std::sqrt(s2) + 1.0);
            lo = std::min(ybar, mu0) - spread;
            hi = std::max(ybar, mu0) + spread;
            break;
        }
        case ModelKind::Poisson: {
            const double l0 = model.theta0[0];
            lam = [=](double l) { return 2.0 * (sum * std::log(l / l0) - nr * (l - l0)); };
            const double scale = std::max({l0, ybar, 1.0});
            lo = 1e-13 * scale;
            hi = 10.0 * scale + 10.0;
            break;
        }
        case ModelKind::Gamma: {
            const double b0 = model.theta0[0];
            const double alpha = model.xi[0];
            lam = [=](double b) {
                return 2.0 * (nr * alpha * std::log(b / b0) - (b - b0) * sum);
            };
            const double scale = std::max({b0, alpha / ybar, 1.0});
            lo = 1e-13 * scale;
            hi = 10.0 * scale + 10.0;
            break;
        }
    }
    return std::sqrt(std::max(0.0, golden_max(lam, lo, hi)));
}

inline double region_sum(const Field& field, const Region& region) {
    const int d = field.d;
    const int n = field.n;
    std::vector<int> cell(static_cast<std::size_t>(d), 0);
    double total = 0.0;
    for (;;) {
        std::int64_t idx = 0;
        for (int k = 0; k < d; ++k)
            idx = idx * n + region.offset[static_cast<std::size_t>(k)] +
                  cell[static_cast<std::size_t>(k)];
        total += field.data[static_cast<std::size_t>(idx)];
        int k = d - 1;
        while (k >= 0 &&
               ++cell[static_cast<std::size_t>(k)] == region.extent[static_cast<std::size_t>(k)]) {
            cell[static_cast<std::size_t>(k)] = 0;
            --k;
        }
        if (k < 0) break;
    }
    return total;
}

// direct per-region evaluation of T_n, no FFT, no per-scale shortcuts
inline double naive_scan_statistic(const Field& field, const RegionSystem& system,
                                   const ModelFamily& model, const Calibration& cal,
                                   Sidedness sidedness) {
    const double gate = model.baseline_mean();
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < system.scales.size(); ++s) {
        const auto& scale = system.scales[s];
        const double card = static_cast<double>(system.cardinality_of(scale));
        const double omt = omega_tilde(cal, card, system.n);
        const double om = omega(cal, card, system.n);
        for_each_offset(system, scale, [&](std::span<const int> t, std::int64_t) {
            Region region;
            region.offset.assign(t.begin(), t.end());
            region.extent = scale;
            region.cardinality = static_cast<std::int64_t>(card);
            const double sum = region_sum(field, region);
            double tv = 0.0;
            if (sidedness == Sidedness::TwoSided || sum / card > gate)
                tv = local_lrt(model, sum, region.cardinality);
            best = std::max(best, omt * (tv - om));
        });
    }
    return best;
}

inline double naive_surrogate_statistic(const Field& noise, const RegionSystem& system,
                                        const Calibration& cal, Sidedness sidedness) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < system.scales.size(); ++s) {
        const auto& scale = system.scales[s];
        const double card = static_cast<double>(system.cardinality_of(scale));
        const double omt = omega_tilde(cal, card, system.n);
        const double om = omega(cal, card, system.n);
        for_each_offset(system, scale, [&](std::span<const int> t, std::int64_t) {
            Region region;
            region.offset.assign(t.begin(), t.end());
            region.extent = scale;
            region.cardinality = static_cast<std::int64_t>(card);
            const double sum = region_sum(noise, region);
            if (sidedness == Sidedness::OneSidedUpper) {
                if (!(sum > 0.0)) return;
                best = std::max(best, omt * (sum / std::sqrt(card) - om));
            } else {
                best = std::max(best, omt * (std::fabs(sum) / std::sqrt(card) - om));
            }
        });
    }
    return best;
}

}  // namespace ams::testing

#endif
