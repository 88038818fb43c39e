#include "ams/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ams/errors.hpp"
#include "ams/field.hpp"

namespace ams {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;  // log(sqrt(2*pi))

double log_ratio(double r, int n, int dim) {
    if (!(r >= 1.0)) throw DomainError("scale must satisfy r >= 1");
    const double nd = static_cast<double>(grid_size(n, dim));
    if (r > nd) throw DomainError("scale must satisfy r <= n^d");
    return std::log(nd / r);
}

}  // namespace

Calibration Calibration::dw(double nu, int dim) {
    if (!(nu >= 1.0)) throw DomainError("DW calibration requires nu >= 1");
    Calibration cal;
    cal.kind = CalibrationKind::DW;
    cal.nu = nu;
    cal.dim = dim;
    return cal;
}

Calibration Calibration::sac(int dim) {
    Calibration cal;
    cal.kind = CalibrationKind::SAC;
    cal.dim = dim;
    return cal;
}

Calibration Calibration::pwm(double c, double cd, int dim) {
    if (!(c > 1.0)) throw DomainError("PWM calibration requires C > 1");
    Calibration cal;
    cal.kind = CalibrationKind::PWM;
    cal.pwm_c = c;
    cal.pwm_cd = cd;
    cal.dim = dim;
    return cal;
}

Calibration Calibration::unit(int dim) {
    Calibration cal;
    cal.kind = CalibrationKind::Unit;
    cal.dim = dim;
    return cal;
}

Calibration Calibration::uncalibrated(int dim) {
    Calibration cal = unit(dim);
    cal.omega_zero = true;
    return cal;
}

Calibration::Exponents Calibration::exponents() const {
    switch (kind) {
        case CalibrationKind::DW:
            return {0.5, 0.0, -0.5, 0.0};
        case CalibrationKind::SAC:
        case CalibrationKind::PWM:
            return {0.5, 0.5, -0.5, -0.5};
        case CalibrationKind::Unit:
            return {0.0, 0.0, 0.0, 0.0};
    }
    return {0.0, 0.0, 0.0, 0.0};
}

std::string Calibration::digest_string() const {
    std::ostringstream out;
    switch (kind) {
        case CalibrationKind::DW: out << "dw nu=" << nu; break;
        case CalibrationKind::SAC: out << "sac"; break;
        case CalibrationKind::PWM: out << "pwm C=" << pwm_c << " Cd=" << pwm_cd; break;
        case CalibrationKind::Unit: out << "unit"; break;
    }
    out << " d=" << dim;
    if (omega_zero) out << " omega0";
    return out.str();
}

double omega(const Calibration& cal, double r, int n) {
    if (cal.omega_zero) {
        log_ratio(r, n, cal.dim);  // still enforce the domain
        return 0.0;
    }
    switch (cal.kind) {
        case CalibrationKind::DW:
            return std::sqrt(2.0 * cal.nu * log_ratio(r, n, cal.dim) + 1.0);
        case CalibrationKind::SAC: {
            const double two_log = 2.0 * log_ratio(r, n, cal.dim);
            if (two_log <= 1.0)
                throw DomainError("SAC penalty undefined: 2 log(n^d/r) <= 1 near r = n^d");
            const double root = std::sqrt(two_log);
            return root + ((4.0 * cal.dim - 1.0) * std::log(root) - kHalfLog2Pi) / root;
        }
        case CalibrationKind::PWM: {
            log_ratio(r, n, cal.dim);
            const double nd = static_cast<double>(grid_size(n, cal.dim));
            const double two_log = 2.0 * std::log(cal.pwm_c * nd / r);
            if (two_log <= 1.0)
                throw DomainError("PWM penalty undefined: 2 log(C n^d/r) <= 1");
            const double root = std::sqrt(two_log);
            return root + cal.pwm_cd * std::log(root) / root;
        }
        case CalibrationKind::Unit:
            log_ratio(r, n, cal.dim);
            return 1.0;
    }
    throw DomainError("unknown calibration kind");
}

double omega_tilde(const Calibration& cal, double r, int n) {
    switch (cal.kind) {
        case CalibrationKind::DW:
        case CalibrationKind::Unit:
            log_ratio(r, n, cal.dim);
            return 1.0;
        case CalibrationKind::SAC:
            return std::sqrt(2.0 * log_ratio(r, n, cal.dim));
        case CalibrationKind::PWM: {
            Calibration plain = cal;
            plain.omega_zero = false;
            return omega(plain, r, n);
        }
    }
    throw DomainError("unknown calibration kind");
}

GrowthValidation validate_growth(const std::function<double(double, int)>& om,
                                 const std::function<double(double, int)>& om_tilde,
                                 Calibration::Exponents exps, int n, int dim) {
    const double nd = static_cast<double>(grid_size(n, dim));
    const double r_hi = nd / 2.0;
    constexpr int kSamples = 10000;

    GrowthValidation report;
    report.monotone_omega = true;
    report.monotone_omega_tilde = true;
    double prev_om = 0.0;
    double prev_omt = 0.0;
    bool all_finite = true;

    const double log_lo = 0.0;
    const double log_hi = std::log(std::max(r_hi, 1.0));
    for (int i = 0; i < kSamples; ++i) {
        const double r = std::exp(log_lo + (log_hi - log_lo) * i / (kSamples - 1.0));
        const double log_term = std::log(nd / r);
        const double v_om = om(r, n);
        const double v_omt = om_tilde(r, n);
        if (!std::isfinite(v_om) || !std::isfinite(v_omt)) all_finite = false;
        if (i > 0) {
            if (v_om > prev_om + 1e-12) report.monotone_omega = false;
            if (v_omt > prev_omt + 1e-12) report.monotone_omega_tilde = false;
        }
        prev_om = v_om;
        prev_omt = v_omt;
        report.c_omega = std::max(report.c_omega, v_om / std::pow(log_term, exps.alpha));
        report.c_omega_tilde =
            std::max(report.c_omega_tilde, v_omt / std::pow(log_term, exps.alpha_tilde));
    }
    report.pass = report.monotone_omega && report.monotone_omega_tilde && all_finite &&
                  std::isfinite(report.c_omega) && std::isfinite(report.c_omega_tilde);
    return report;
}

GrowthValidation validate_growth(const Calibration& cal, int n) {
    return validate_growth(
        [&cal](double r, int nn) { return omega(cal, r, nn); },
        [&cal](double r, int nn) { return omega_tilde(cal, r, nn); },
        cal.exponents(), n, cal.dim);
}

ScaleGuardAdvisory min_scale_guard(const Calibration& cal, int n, std::int64_t r_n) {
    const auto e = cal.exponents();
    ScaleGuardAdvisory advisory;
    advisory.gamma = 12.0 + 6.0 * e.alpha_tilde +
                     2.0 * std::max({0.5, e.alpha, e.alpha_tilde}) +
                     2.0 * std::max({e.beta, e.beta_tilde, 0.0});
    advisory.threshold = std::pow(std::log(static_cast<double>(n)), advisory.gamma);
    advisory.r_n = r_n;
    // r_n >= n^d means the restriction is already maximal; nothing to advise
    const double nd = static_cast<double>(grid_size(n, cal.dim));
    advisory.satisfied = static_cast<double>(r_n) >= advisory.threshold ||
                         static_cast<double>(r_n) >= nd;
    return advisory;
}

}  // namespace ams
