#include "ams/localmeans.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>

#include "ams/parallel.hpp"

namespace ams {

namespace {

// FFTW's planner is not thread-safe; executions are.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

// Plans depend only on (n, d) and executions go through the new-array API, so
// one plan set per shape is shared by every engine in the process. Plans are
// created with FFTW_UNALIGNED, which keeps new-array execution valid for any
// buffer.
struct PlanSet {
    fftw_plan fwd = nullptr;
    fftw_plan inv = nullptr;
    fftw_plan kernel_1d = nullptr;  // length-n c2c for the per-axis box spectra
};

const PlanSet& plans_for(int n, int d, std::int64_t real_size, std::int64_t spec_size) {
    static std::map<std::pair<int, int>, PlanSet> cache;
    std::lock_guard lock(planner_mutex());
    auto it = cache.find({n, d});
    if (it != cache.end()) return it->second;

    std::vector<int> dims(static_cast<std::size_t>(d), n);
    std::vector<double> real_buf(static_cast<std::size_t>(real_size));
    std::vector<std::complex<double>> spec_buf(static_cast<std::size_t>(spec_size));
    std::vector<std::complex<double>> tmp_in(static_cast<std::size_t>(n));
    std::vector<std::complex<double>> tmp_out(static_cast<std::size_t>(n));
    PlanSet plans;
    plans.fwd = fftw_plan_dft_r2c(d, dims.data(), real_buf.data(),
                                  reinterpret_cast<fftw_complex*>(spec_buf.data()),
                                  FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans.inv = fftw_plan_dft_c2r(d, dims.data(),
                                  reinterpret_cast<fftw_complex*>(spec_buf.data()),
                                  real_buf.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans.kernel_1d = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(tmp_in.data()),
                                       reinterpret_cast<fftw_complex*>(tmp_out.data()),
                                       FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    return cache.emplace(std::pair{n, d}, plans).first->second;
}

using AxisSpectrum = std::shared_ptr<const std::vector<std::complex<double>>>;

// 1-d spectrum of the box indicator of length h on a ring of size n; the
// d-dim kernel spectrum is the tensor product across axes. Read-mostly and
// shared process-wide.
AxisSpectrum axis_spectrum(int n, int h, const PlanSet& plans) {
    static std::map<std::pair<int, int>, AxisSpectrum> cache;
    static std::shared_mutex mutex;
    {
        std::shared_lock lock(mutex);
        auto it = cache.find({n, h});
        if (it != cache.end()) return it->second;
    }
    std::vector<std::complex<double>> in(static_cast<std::size_t>(n), 0.0);
    auto out = std::make_shared<std::vector<std::complex<double>>>(
        static_cast<std::size_t>(n));
    for (int j = 0; j < h; ++j) in[static_cast<std::size_t>(j)] = 1.0;
    fftw_execute_dft(plans.kernel_1d, reinterpret_cast<fftw_complex*>(in.data()),
                     reinterpret_cast<fftw_complex*>(out->data()));
    std::unique_lock lock(mutex);
    return cache.emplace(std::pair{n, h}, std::move(out)).first->second;
}

}  // namespace

struct SumEngine::Impl {
    int n = 0;
    int d = 0;
    Dtype dtype = Dtype::Reals;
    std::int64_t real_size = 0;
    std::int64_t spec_size = 0;  // n^(d-1) * (n/2 + 1)
    std::vector<std::complex<double>> field_spec;
    const PlanSet* plans = nullptr;
};

SumEngine::SumEngine(const Field& field) : impl_(std::make_unique<Impl>()) {
    field.validate();
    impl_->n = field.n;
    impl_->d = field.d;
    impl_->dtype = field.dtype;
    impl_->real_size = grid_size(field.n, field.d);
    impl_->spec_size = impl_->real_size / field.n * (field.n / 2 + 1);
    impl_->plans = &plans_for(field.n, field.d, impl_->real_size, impl_->spec_size);

    std::vector<double> real_buf(static_cast<std::size_t>(impl_->real_size));
    impl_->field_spec.resize(static_cast<std::size_t>(impl_->spec_size));
    std::copy(field.data.begin(), field.data.end(), real_buf.begin());
    fftw_execute_dft_r2c(impl_->plans->fwd, real_buf.data(),
                         reinterpret_cast<fftw_complex*>(impl_->field_spec.data()));
}

SumEngine::~SumEngine() = default;

int SumEngine::n() const { return impl_->n; }
int SumEngine::d() const { return impl_->d; }
Dtype SumEngine::dtype() const { return impl_->dtype; }

std::vector<int> SumEngine::compute(std::span<const int> scale, std::vector<double>& out) const {
    const int n = impl_->n;
    const int d = impl_->d;
    if (static_cast<int>(scale.size()) != d)
        throw SizeError("scale dimensionality does not match the field");
    for (int h : scale)
        if (h < 1 || h > n) throw SizeError("scale side lengths must lie in [1, n]");

    // conjugated per-axis spectra: correlation, not convolution, so that the
    // cropped offsets are exactly the non-wrapping placements
    std::vector<AxisSpectrum> axis_refs(static_cast<std::size_t>(d));
    std::vector<const std::complex<double>*> axis(static_cast<std::size_t>(d));
    for (int k = 0; k < d; ++k) {
        axis_refs[static_cast<std::size_t>(k)] =
            axis_spectrum(n, scale[static_cast<std::size_t>(k)], *impl_->plans);
        axis[static_cast<std::size_t>(k)] = axis_refs[static_cast<std::size_t>(k)]->data();
    }

    static thread_local std::vector<std::complex<double>> spec_buf;
    static thread_local std::vector<double> real_buf;
    spec_buf.resize(static_cast<std::size_t>(impl_->spec_size));
    real_buf.resize(static_cast<std::size_t>(impl_->real_size));

    const int half = n / 2 + 1;
    const std::complex<double>* field = impl_->field_spec.data();
    const std::complex<double>* last_axis = axis[static_cast<std::size_t>(d - 1)];

    if (d == 1) {
        for (int k = 0; k < half; ++k)
            spec_buf[static_cast<std::size_t>(k)] = field[k] * std::conj(last_axis[k]);
    } else {
        // odometer over the leading d-1 axes; inner loop over the half axis
        std::vector<int> idx(static_cast<std::size_t>(d - 1), 0);
        std::vector<std::complex<double>> prefix(static_cast<std::size_t>(d), 1.0);
        for (int k = 0; k < d - 1; ++k)
            prefix[static_cast<std::size_t>(k + 1)] =
                prefix[static_cast<std::size_t>(k)] * std::conj(axis[static_cast<std::size_t>(k)][0]);
        std::int64_t base = 0;
        for (;;) {
            const std::complex<double> lead = prefix[static_cast<std::size_t>(d - 1)];
            for (int k = 0; k < half; ++k)
                spec_buf[static_cast<std::size_t>(base + k)] =
                    field[base + k] * (lead * std::conj(last_axis[k]));
            base += half;
            int k = d - 2;
            while (k >= 0 && ++idx[static_cast<std::size_t>(k)] == n) {
                idx[static_cast<std::size_t>(k)] = 0;
                --k;
            }
            if (k < 0) break;
            for (int j = k; j < d - 1; ++j)
                prefix[static_cast<std::size_t>(j + 1)] =
                    prefix[static_cast<std::size_t>(j)] *
                    std::conj(axis[static_cast<std::size_t>(j)][idx[static_cast<std::size_t>(j)]]);
        }
    }

    fftw_execute_dft_c2r(impl_->plans->inv, reinterpret_cast<fftw_complex*>(spec_buf.data()),
                         real_buf.data());

    // crop to valid offsets and normalize
    std::vector<int> dims(static_cast<std::size_t>(d));
    std::int64_t count = 1;
    for (int k = 0; k < d; ++k) {
        dims[static_cast<std::size_t>(k)] = n - scale[static_cast<std::size_t>(k)] + 1;
        count *= dims[static_cast<std::size_t>(k)];
    }
    out.resize(static_cast<std::size_t>(count));
    const double norm = 1.0 / static_cast<double>(impl_->real_size);
    const bool round_counts = impl_->dtype == Dtype::Counts;

    const int last_dim = dims[static_cast<std::size_t>(d - 1)];
    std::vector<int> t(static_cast<std::size_t>(d > 0 ? d - 1 : 0), 0);  // leading axes
    std::int64_t dst = 0;
    for (;;) {
        std::int64_t src = 0;
        for (int j = 0; j < d - 1; ++j)
            src = (src + t[static_cast<std::size_t>(j)]) * n;
        const double* row = real_buf.data() + src;
        if (round_counts) {
            for (int k = 0; k < last_dim; ++k) {
                const double v = std::nearbyint(row[k] * norm);
                out[static_cast<std::size_t>(dst + k)] = v < 0.0 ? 0.0 : v;
            }
        } else {
            for (int k = 0; k < last_dim; ++k)
                out[static_cast<std::size_t>(dst + k)] = row[k] * norm;
        }
        dst += last_dim;
        int k = d - 2;
        while (k >= 0 && ++t[static_cast<std::size_t>(k)] == dims[static_cast<std::size_t>(k)]) {
            t[static_cast<std::size_t>(k)] = 0;
            --k;
        }
        if (k < 0) break;
    }
    return dims;
}

ScaleSums SumEngine::compute(std::span<const int> scale) const {
    ScaleSums result;
    result.scale.assign(scale.begin(), scale.end());
    result.cardinality = 1;
    for (int h : scale) result.cardinality *= h;
    result.dims = compute(scale, result.sums);
    return result;
}

std::vector<ScaleSums> fft_scale_sums(const Field& field, const RegionSystem& system,
                                      int threads) {
    if (field.n != system.n || field.d != system.d)
        throw SizeError("field and region system disagree on (n, d)");
    if (!system.base_shape.is_full_cell())
        throw ConfigError("only the rectangle base shape is supported");
    SumEngine engine(field);
    std::vector<ScaleSums> result(system.scales.size());
    parallel_for(static_cast<std::int64_t>(system.scales.size()), threads,
                 [&](std::int64_t i) {
                     result[static_cast<std::size_t>(i)] =
                         engine.compute(system.scales[static_cast<std::size_t>(i)]);
                 });
    return result;
}

namespace {

// plain nested summation; the independent oracle for the FFT path
void naive_one_scale(const Field& field, const RegionSystem& system,
                     std::span<const int> scale, ScaleSums& out) {
    const int d = field.d;
    const int n = field.n;
    out.scale.assign(scale.begin(), scale.end());
    out.cardinality = system.cardinality_of(scale);
    out.dims.resize(static_cast<std::size_t>(d));
    std::int64_t count = 1;
    for (int k = 0; k < d; ++k) {
        out.dims[static_cast<std::size_t>(k)] = n - scale[static_cast<std::size_t>(k)] + 1;
        count *= out.dims[static_cast<std::size_t>(k)];
    }
    out.sums.assign(static_cast<std::size_t>(count), 0.0);

    std::vector<int> cell(static_cast<std::size_t>(d), 0);
    for_each_offset(system, scale, [&](std::span<const int> t, std::int64_t linear) {
        double total = 0.0;
        std::fill(cell.begin(), cell.end(), 0);
        for (;;) {
            std::int64_t idx = 0;
            for (int k = 0; k < d; ++k)
                idx = idx * n + (t[static_cast<std::size_t>(k)] + cell[static_cast<std::size_t>(k)]);
            total += field.data[static_cast<std::size_t>(idx)];
            int k = d - 1;
            while (k >= 0 && ++cell[static_cast<std::size_t>(k)] == scale[static_cast<std::size_t>(k)]) {
                cell[static_cast<std::size_t>(k)] = 0;
                --k;
            }
            if (k < 0) break;
        }
        out.sums[static_cast<std::size_t>(linear)] = total;
    });
}

}  // namespace

std::vector<ScaleSums> naive_scale_sums(const Field& field, const RegionSystem& system) {
    if (field.n != system.n || field.d != system.d)
        throw SizeError("field and region system disagree on (n, d)");
    field.validate();
    std::vector<ScaleSums> result(system.scales.size());
    for (std::size_t i = 0; i < system.scales.size(); ++i)
        naive_one_scale(field, system, system.scales[i], result[i]);
    return result;
}

}  // namespace ams
