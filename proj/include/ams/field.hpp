#ifndef AMS_FIELD_HPP
#define AMS_FIELD_HPP

#include <cstdint>
#include <vector>

#include "ams/errors.hpp"

namespace ams {

enum class Dtype { Counts, Reals };

// A d-dimensional grid of observations with side length n per axis,
// stored row-major (last axis fastest).
struct Field {
    std::vector<double> data;
    int n = 0;
    int d = 0;
    Dtype dtype = Dtype::Reals;

    Field() = default;
    Field(int n_, int d_, Dtype dtype_);
    Field(std::vector<double> data_, int n_, int d_, Dtype dtype_);

    std::int64_t size() const { return static_cast<std::int64_t>(data.size()); }

    // Enforces the type invariants: finite entries everywhere, and
    // nonnegative integers when dtype is Counts.
    void validate() const;
};

// n^d with overflow check.
std::int64_t grid_size(int n, int d);

}  // namespace ams

#endif
