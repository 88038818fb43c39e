#include "ams/field.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace ams {

std::int64_t grid_size(int n, int d) {
    if (n < 1 || d < 1) throw ConfigError("grid requires n >= 1 and d >= 1");
    std::int64_t size = 1;
    for (int i = 0; i < d; ++i) {
        if (size > std::numeric_limits<std::int64_t>::max() / n)
            throw ConfigError("grid size n^d overflows");
        size *= n;
    }
    return size;
}

Field::Field(int n_, int d_, Dtype dtype_) : n(n_), d(d_), dtype(dtype_) {
    data.assign(static_cast<std::size_t>(grid_size(n_, d_)), 0.0);
}

Field::Field(std::vector<double> data_, int n_, int d_, Dtype dtype_)
    : data(std::move(data_)), n(n_), d(d_), dtype(dtype_) {
    if (static_cast<std::int64_t>(data.size()) != grid_size(n_, d_))
        throw ShapeError("field payload length " + std::to_string(data.size()) +
                         " does not match n^d = " + std::to_string(grid_size(n_, d_)));
}

void Field::validate() const {
    if (static_cast<std::int64_t>(data.size()) != grid_size(n, d))
        throw ShapeError("field payload length does not match n^d");
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double v = data[i];
        if (!std::isfinite(v))
            throw ShapeError("field entry " + std::to_string(i) + " is not finite");
        if (dtype == Dtype::Counts && (v < 0.0 || v != std::floor(v)))
            throw NegativeCount("counts field entry " + std::to_string(i) +
                                " is not a nonnegative integer: " + std::to_string(v));
    }
}

}  // namespace ams
