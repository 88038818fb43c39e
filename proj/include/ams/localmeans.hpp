#ifndef AMS_LOCALMEANS_HPP
#define AMS_LOCALMEANS_HPP

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "ams/field.hpp"
#include "ams/regions.hpp"

namespace ams {

// All region sums for one scale: sums[i] = sum of Y over the region at linear
// offset i (row-major over the per-axis placement counts).
struct ScaleSums {
    std::vector<int> scale;
    std::vector<int> dims;  // n - h_i + 1 per axis
    std::vector<double> sums;
    std::int64_t cardinality = 0;
};

// FFT box-sum engine: the field spectrum is transformed once and reused for
// every scale; each scale costs one kernel FFT, a spectrum product and one
// inverse transform, cropped to non-wrapping offsets. Thread-safe for
// concurrent per-scale queries after construction.
class SumEngine {
public:
    explicit SumEngine(const Field& field);
    ~SumEngine();
    SumEngine(const SumEngine&) = delete;
    SumEngine& operator=(const SumEngine&) = delete;

    int n() const;
    int d() const;
    Dtype dtype() const;

    // Sums for one scale; `out` is resized to the offset count. Returns dims.
    std::vector<int> compute(std::span<const int> scale, std::vector<double>& out) const;

    ScaleSums compute(std::span<const int> scale) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Per-scale sums for every scale of the system via the shared-spectrum FFT
// scheme; `threads` parallelizes over scales.
std::vector<ScaleSums> fft_scale_sums(const Field& field, const RegionSystem& system,
                                      int threads = 1);

// Direct nested-loop summation; the oracle for the FFT path.
std::vector<ScaleSums> naive_scale_sums(const Field& field, const RegionSystem& system);

}  // namespace ams

#endif
