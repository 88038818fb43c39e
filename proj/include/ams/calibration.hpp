#ifndef AMS_CALIBRATION_HPP
#define AMS_CALIBRATION_HPP

#include <cstdint>
#include <functional>
#include <string>

namespace ams {

enum class CalibrationKind { DW, SAC, PWM, Unit };

// Scale penalties (omega_tilde, omega) applied to local statistics, with the
// growth exponents (alpha, alpha~, beta, beta~) they are known to satisfy.
struct Calibration {
    CalibrationKind kind = CalibrationKind::DW;
    int dim = 2;            // d of the grid the penalties act on
    double nu = 1.0;        // DW
    double pwm_c = 2.0;     // PWM, C > 1
    double pwm_cd = 1.0;    // PWM, dimension-dependent constant
    bool omega_zero = false;  // test override: additive penalty forced to 0

    struct Exponents {
        double alpha;
        double alpha_tilde;
        double beta;
        double beta_tilde;
    };
    Exponents exponents() const;

    static Calibration dw(double nu, int dim);
    static Calibration sac(int dim);
    static Calibration pwm(double c, double cd, int dim);
    static Calibration unit(int dim);
    // omega_tilde == 1, omega == 0: the raw (uncalibrated) maximum
    static Calibration uncalibrated(int dim);

    std::string digest_string() const;
};

// Additive penalty omega(r, n); r is the scale (region cardinality), the grid
// has n^d points with d = cal.dim.
double omega(const Calibration& cal, double r, int n);

// Multiplicative penalty omega_tilde(r, n).
double omega_tilde(const Calibration& cal, double r, int n);

struct GrowthValidation {
    bool monotone_omega = false;
    bool monotone_omega_tilde = false;
    double c_omega = 0.0;        // fitted C s.t. omega(r,n) <= C log^alpha(n^d/r)
    double c_omega_tilde = 0.0;
    bool pass = false;
};

// Samples r over [1, n^d/2] and checks monotonicity plus the log-power bound
// shape with the calibration's recorded exponents.
GrowthValidation validate_growth(const Calibration& cal, int n);

// Overload on raw penalty functions so tests can validate doubles.
GrowthValidation validate_growth(const std::function<double(double, int)>& om,
                                 const std::function<double(double, int)>& om_tilde,
                                 Calibration::Exponents exps, int n, int dim);

struct ScaleGuardAdvisory {
    double gamma = 0.0;
    double threshold = 0.0;  // log^gamma(n)
    std::int64_t r_n = 0;
    bool satisfied = false;  // r_n >= threshold (or r_n already maximal)
};

// Advisory check of the minimum-scale condition r_n >> log^gamma(n); the
// condition is asymptotic, so failing it is a warning, not an error.
ScaleGuardAdvisory min_scale_guard(const Calibration& cal, int n, std::int64_t r_n);

}  // namespace ams

#endif
