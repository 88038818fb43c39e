#ifndef AMS_STATISTIC_HPP
#define AMS_STATISTIC_HPP

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "ams/calibration.hpp"
#include "ams/field.hpp"
#include "ams/localmeans.hpp"
#include "ams/models.hpp"
#include "ams/regions.hpp"

namespace ams {

enum class Sidedness { TwoSided, OneSidedUpper };

// Local statistics for one scale, retained when detection output is needed.
struct ScaleStats {
    std::vector<int> scale;
    std::vector<int> dims;
    std::int64_t cardinality = 0;
    std::vector<double> t_values;    // gated local statistics T_R
    std::vector<double> calibrated;  // omega_tilde * (T_R - omega)
};

struct ScanResult {
    double t_n = 0.0;
    Region argmax_region;
    Sidedness sidedness = Sidedness::TwoSided;
    ModelFamily model_snapshot;
    Calibration calibration_snapshot;
    int n = 0;
    int d = 0;
    std::vector<ScaleStats> per_region;  // populated only when requested
};

// T_n(Y, R_n, theta, xi): the calibrated maximum of local LRT statistics over
// the system. Estimated parameters are frozen in `model` by the caller;
// deterministic given inputs (ties broken by scan order: scale-major,
// offsets row-major).
ScanResult scan_statistic(const Field& field, const RegionSystem& system,
                          const ModelFamily& model, const Calibration& cal,
                          Sidedness sidedness, bool keep_per_region = false,
                          int threads = 1);

// M_n: the same calibrated maximum applied to standardized box sums of an
// i.i.d. standard normal field. One-sided restricts the max to regions with
// positive local mean and returns -inf if none qualifies.
double surrogate_statistic(const Field& noise, const RegionSystem& system,
                           const Calibration& cal, Sidedness sidedness,
                           int threads = 1);

struct Rejection {
    Region region;
    double t_value = 0.0;
    double calibrated = 0.0;
    double local_threshold = 0.0;  // c_|R|(eta) = eta/omega_tilde + omega
};

// All regions whose calibrated value meets or exceeds eta, equivalently whose
// local statistic meets its scale-dependent threshold. Requires per-region
// stats retained in `result`.
std::vector<Rejection> reject_regions(const ScanResult& result, double eta);

// Cardinality windows evaluated in one pass over a shared set of box sums;
// used by the experiment drivers to get full and restricted maxima together.
using CardWindow = std::pair<std::int64_t, std::int64_t>;

// t_n for each (model, window) pair on one field; sums are computed once.
// Result is indexed [model][window].
std::vector<std::vector<double>> scan_statistic_multi(
    const Field& field, const RegionSystem& system,
    std::span<const ModelFamily> models, const Calibration& cal,
    Sidedness sidedness, std::span<const CardWindow> windows, int threads = 1);

// M_n for each window on one noise field.
std::vector<double> surrogate_statistic_multi(const Field& noise, const RegionSystem& system,
                                              const Calibration& cal, Sidedness sidedness,
                                              std::span<const CardWindow> windows,
                                              int threads = 1);

}  // namespace ams

#endif
