#ifndef AMS_MODELS_HPP
#define AMS_MODELS_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ams/field.hpp"

namespace ams {

enum class ModelKind { GaussianKnownVariance, GaussianUnknownVariance, Poisson, Gamma };
enum class Provenance { Known, Estimated };

// A distribution family F_{theta,xi} with baseline parameter theta0 and
// nuisance xi. Immutable after construction; safe to share across workers.
struct ModelFamily {
    ModelKind kind = ModelKind::GaussianKnownVariance;
    std::vector<double> theta0;  // baseline parameter, model units
    std::vector<double> xi;      // nuisance parameter, model units
    Provenance provenance = Provenance::Known;

    static ModelFamily gaussian_known(double mu0, double sigma2, Provenance prov = Provenance::Known);
    static ModelFamily gaussian_unknown(double mu0, double sigma2, Provenance prov = Provenance::Estimated);
    static ModelFamily poisson(double lambda0, Provenance prov = Provenance::Known);
    static ModelFamily gamma(double rate, double shape, Provenance prov = Provenance::Known);

    double baseline_mean() const;
    double baseline_variance() const;
    std::string describe() const;
};

struct MeanVariance {
    double mean;
    double variance;
};

// (m(theta,xi), v(theta,xi)) for the family, evaluated at arbitrary
// admissible parameters.
MeanVariance mean_variance(const ModelFamily& model, std::span<const double> theta,
                           std::span<const double> xi);
MeanVariance mean_variance(const ModelFamily& model);

// Local log-LRT statistic T_R = sqrt(2 log LR) computed in closed form from
// the sufficient statistic (sum over the region, region cardinality).
double local_lrt(const ModelFamily& model, double sum_r, std::int64_t count_r);

// |T_R^2 - |R|((Ybar - m)/sqrt(v))^2|, the gap between the LRT and its
// quadratic approximation in the standardized local mean.
double taylor_gap(const ModelFamily& model, double sum_r, std::int64_t count_r);

enum class EstimatorMethod { GlobalMean, SampleVariance, MLE };

struct EstimatorReport {
    std::vector<double> theta_hat;
    std::vector<double> xi_hat;
    std::int64_t sample_size = 0;
    EstimatorMethod method = EstimatorMethod::GlobalMean;
};

// Global plug-in estimators under the no-anomaly hypothesis:
//   GaussianKnownVariance   -> theta = global mean (xi left empty, it is known)
//   GaussianUnknownVariance -> theta = global mean, xi = sample variance
//   Poisson                 -> theta = global mean
//   Gamma                   -> (rate, shape) profile MLE, Newton on the shape
EstimatorReport estimate_global(ModelKind kind, const Field& field);

// Assembles a model from an estimate; `known_xi` supplies the nuisance for
// kinds whose xi is not estimated (GaussianKnownVariance).
ModelFamily model_from_estimate(ModelKind kind, const EstimatorReport& report,
                                std::span<const double> known_xi = {});

// digamma / trigamma, exposed for tests of the Gamma MLE path
double digamma(double x);
double trigamma(double x);

}  // namespace ams

#endif
