#include "ams/models.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

namespace ams {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw DomainError(std::string(what) + " must be finite");
}

}  // namespace

ModelFamily ModelFamily::gaussian_known(double mu0, double sigma2, Provenance prov) {
    require_finite(mu0, "mu0");
    require_finite(sigma2, "sigma2");
    if (sigma2 <= 0.0) throw DomainError("gaussian variance must be positive");
    return ModelFamily{ModelKind::GaussianKnownVariance, {mu0}, {sigma2}, prov};
}

ModelFamily ModelFamily::gaussian_unknown(double mu0, double sigma2, Provenance prov) {
    require_finite(mu0, "mu0");
    require_finite(sigma2, "sigma2");
    if (sigma2 <= 0.0) throw DomainError("gaussian variance must be positive");
    return ModelFamily{ModelKind::GaussianUnknownVariance, {mu0}, {sigma2}, prov};
}

ModelFamily ModelFamily::poisson(double lambda0, Provenance prov) {
    require_finite(lambda0, "lambda0");
    if (lambda0 < 0.0) throw DomainError("poisson baseline must be nonnegative");
    return ModelFamily{ModelKind::Poisson, {lambda0}, {}, prov};
}

ModelFamily ModelFamily::gamma(double rate, double shape, Provenance prov) {
    require_finite(rate, "rate");
    require_finite(shape, "shape");
    if (rate <= 0.0 || shape <= 0.0) throw DomainError("gamma requires rate > 0 and shape > 0");
    return ModelFamily{ModelKind::Gamma, {rate}, {shape}, prov};
}

MeanVariance mean_variance(const ModelFamily& model, std::span<const double> theta,
                           std::span<const double> xi) {
    switch (model.kind) {
        case ModelKind::GaussianKnownVariance:
        case ModelKind::GaussianUnknownVariance: {
            if (theta.size() != 1 || xi.size() != 1)
                throw DomainError("gaussian expects theta = (mu), xi = (sigma2)");
            require_finite(theta[0], "mu");
            if (!(xi[0] > 0.0)) throw DomainError("gaussian variance must be positive");
            return {theta[0], xi[0]};
        }
        case ModelKind::Poisson: {
            if (theta.size() != 1) throw DomainError("poisson expects theta = (lambda)");
            require_finite(theta[0], "lambda");
            if (theta[0] < 0.0) throw DomainError("poisson rate must be nonnegative");
            return {theta[0], theta[0]};
        }
        case ModelKind::Gamma: {
            if (theta.size() != 1 || xi.size() != 1)
                throw DomainError("gamma expects theta = (rate), xi = (shape)");
            const double beta = theta[0];
            const double alpha = xi[0];
            if (!(beta > 0.0) || !(alpha > 0.0))
                throw DomainError("gamma requires rate > 0 and shape > 0");
            return {alpha / beta, alpha / (beta * beta)};
        }
    }
    throw DomainError("unknown model kind");
}

MeanVariance mean_variance(const ModelFamily& model) {
    return mean_variance(model, model.theta0, model.xi);
}

double ModelFamily::baseline_mean() const { return mean_variance(*this).mean; }
double ModelFamily::baseline_variance() const { return mean_variance(*this).variance; }

std::string ModelFamily::describe() const {
    switch (kind) {
        case ModelKind::GaussianKnownVariance:
            return "gauss-known(mu0=" + fmt(theta0[0]) + ",sigma2=" + fmt(xi[0]) + ")";
        case ModelKind::GaussianUnknownVariance:
            return "gauss-unknown(mu0=" + fmt(theta0[0]) + ",sigma2=" + fmt(xi[0]) + ")";
        case ModelKind::Poisson:
            return "poisson(lambda0=" + fmt(theta0[0]) + ")";
        case ModelKind::Gamma:
            return "gamma(rate=" + fmt(theta0[0]) + ",shape=" + fmt(xi[0]) + ")";
    }
    return "unknown";
}

namespace {

void check_lrt_inputs(const ModelFamily& model, double sum_r, std::int64_t count_r) {
    if (count_r < 1) throw DomainError("region cardinality must be >= 1");
    if (!std::isfinite(sum_r)) throw DomainError("region sum must be finite");
    if (model.kind == ModelKind::Poisson && sum_r < 0.0)
        throw DomainError("poisson region sum must be nonnegative");
}

// 2*(sup_theta loglik - baseline loglik) as a function of the local mean.
double lrt_squared(const ModelFamily& model, double ybar, std::int64_t count_r) {
    const double nr = static_cast<double>(count_r);
    switch (model.kind) {
        case ModelKind::GaussianKnownVariance:
        case ModelKind::GaussianUnknownVariance: {
            const double mu0 = model.theta0[0];
            const double dev = ybar - mu0;
            return nr * dev * dev / model.xi[0];
        }
        case ModelKind::Poisson: {
            const double lambda0 = model.theta0[0];
            if (lambda0 == 0.0) {
                if (ybar > 0.0)
                    throw DomainError("poisson LRT is infinite: lambda0 = 0 with positive counts");
                return 0.0;
            }
            const double xlogx = ybar > 0.0 ? ybar * std::log(ybar / lambda0) : 0.0;
            return std::max(0.0, 2.0 * nr * (lambda0 - ybar + xlogx));
        }
        case ModelKind::Gamma: {
            const double beta0 = model.theta0[0];
            const double alpha = model.xi[0];
            if (!(ybar > 0.0))
                throw DomainError("gamma LRT requires a positive region sum");
            return std::max(0.0, 2.0 * nr * (alpha * std::log(alpha / (beta0 * ybar)) +
                                             beta0 * ybar - alpha));
        }
    }
    throw DomainError("unknown model kind");
}

}  // namespace

double local_lrt(const ModelFamily& model, double sum_r, std::int64_t count_r) {
    check_lrt_inputs(model, sum_r, count_r);
    return std::sqrt(lrt_squared(model, sum_r / static_cast<double>(count_r), count_r));
}

double taylor_gap(const ModelFamily& model, double sum_r, std::int64_t count_r) {
    check_lrt_inputs(model, sum_r, count_r);
    const double ybar = sum_r / static_cast<double>(count_r);
    const auto mv = mean_variance(model);
    if (!(mv.variance > 0.0)) throw DomainError("baseline variance must be positive");
    const double z = (ybar - mv.mean) / std::sqrt(mv.variance);
    return std::fabs(lrt_squared(model, ybar, count_r) -
                     static_cast<double>(count_r) * z * z);
}

double digamma(double x) {
    if (!(x > 0.0)) throw DomainError("digamma implemented for x > 0");
    double result = 0.0;
    while (x < 12.0) {
        result -= 1.0 / x;
        x += 1.0;
    }
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    const double tail = inv2 * (1.0 / 12.0 -
                        inv2 * (1.0 / 120.0 -
                        inv2 * (1.0 / 252.0 -
                        inv2 * (1.0 / 240.0 -
                        inv2 * (1.0 / 132.0 -
                        inv2 * (691.0 / 32760.0))))));
    return result + std::log(x) - 0.5 * inv - tail;
}

double trigamma(double x) {
    if (!(x > 0.0)) throw DomainError("trigamma implemented for x > 0");
    double result = 0.0;
    while (x < 12.0) {
        result += 1.0 / (x * x);
        x += 1.0;
    }
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    return result + inv * (1.0 +
                    inv * (0.5 +
                    inv * (1.0 / 6.0 -
                    inv2 * (1.0 / 30.0 -
                    inv2 * (1.0 / 42.0 -
                    inv2 * (1.0 / 30.0 -
                    inv2 * (5.0 / 66.0)))))));
}

namespace {

// Profile MLE for Gamma(shape, rate): Newton on the shape equation
// log(alpha) - digamma(alpha) = log(mean) - mean(log Y).
std::pair<double, double> gamma_mle(const Field& field) {
    const double count = static_cast<double>(field.data.size());
    double sum = 0.0;
    double sum_log = 0.0;
    for (double v : field.data) {
        if (!(v > 0.0))
            throw DomainError("gamma MLE requires strictly positive observations");
        sum += v;
        sum_log += std::log(v);
    }
    const double mean = sum / count;
    const double s = std::log(mean) - sum_log / count;  // >= 0 by Jensen
    if (!(s > 0.0))
        throw DegenerateData("constant field: gamma shape is not identifiable");

    double alpha = (3.0 - s + std::sqrt((s - 3.0) * (s - 3.0) + 24.0 * s)) / (12.0 * s);
    for (int iter = 0; iter < 100; ++iter) {
        const double f = std::log(alpha) - digamma(alpha) - s;
        if (std::fabs(f) < 1e-10) break;
        const double fp = 1.0 / alpha - trigamma(alpha);
        double next = alpha - f / fp;
        if (!(next > 0.0)) next = alpha / 2.0;
        if (std::fabs(next - alpha) < 1e-12 * alpha) {
            alpha = next;
            break;
        }
        alpha = next;
    }
    return {alpha / mean, alpha};  // (rate, shape)
}

}  // namespace

EstimatorReport estimate_global(ModelKind kind, const Field& field) {
    const std::int64_t count = field.size();
    if (count < 1) throw ShapeError("cannot estimate from an empty field");
    double sum = 0.0;
    for (double v : field.data) sum += v;
    const double mean = sum / static_cast<double>(count);

    EstimatorReport report;
    report.sample_size = count;
    switch (kind) {
        case ModelKind::GaussianKnownVariance:
            report.theta_hat = {mean};
            report.method = EstimatorMethod::GlobalMean;
            return report;
        case ModelKind::Poisson:
            report.theta_hat = {mean};
            report.method = EstimatorMethod::GlobalMean;
            return report;
        case ModelKind::GaussianUnknownVariance: {
            if (count < 2) throw ShapeError("sample variance needs at least 2 entries");
            double ss = 0.0;
            for (double v : field.data) {
                const double dev = v - mean;
                ss += dev * dev;
            }
            const double var = ss / static_cast<double>(count - 1);
            if (!(var > 0.0))
                throw DegenerateData("constant field: sample variance is zero");
            report.theta_hat = {mean};
            report.xi_hat = {var};
            report.method = EstimatorMethod::SampleVariance;
            return report;
        }
        case ModelKind::Gamma: {
            if (count < 2) throw ShapeError("gamma MLE needs at least 2 entries");
            const auto [rate, shape] = gamma_mle(field);
            report.theta_hat = {rate};
            report.xi_hat = {shape};
            report.method = EstimatorMethod::MLE;
            return report;
        }
    }
    throw DomainError("unknown model kind");
}

ModelFamily model_from_estimate(ModelKind kind, const EstimatorReport& report,
                                std::span<const double> known_xi) {
    switch (kind) {
        case ModelKind::GaussianKnownVariance:
            if (known_xi.size() != 1)
                throw ConfigError("gauss-known needs the known variance as nuisance");
            return ModelFamily::gaussian_known(report.theta_hat.at(0), known_xi[0],
                                               Provenance::Estimated);
        case ModelKind::GaussianUnknownVariance:
            return ModelFamily::gaussian_unknown(report.theta_hat.at(0), report.xi_hat.at(0),
                                                 Provenance::Estimated);
        case ModelKind::Poisson:
            return ModelFamily::poisson(report.theta_hat.at(0), Provenance::Estimated);
        case ModelKind::Gamma:
            return ModelFamily::gamma(report.theta_hat.at(0), report.xi_hat.at(0),
                                      Provenance::Estimated);
    }
    throw DomainError("unknown model kind");
}

}  // namespace ams
