#ifndef AMS_REGIONS_HPP
#define AMS_REGIONS_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace ams {

// One axis-aligned hyperrectangle: offset t (0-based) and extent h, with
// t_i + h_i <= n componentwise. Offsets are 1-based in exported CSV.
struct Region {
    std::vector<int> offset;
    std::vector<int> extent;
    std::int64_t cardinality = 0;
};

enum class Parity { All, EvenOnly };

// Base shape of the region family: a binary mask over a unit cell that gets
// rescaled to each extent and shifted across the grid. Only the full cell
// (every region a solid hyperrectangle) ships; the mask is the extension
// point for other shapes.
struct BaseShape {
    std::vector<int> cell{1};           // mask dimensions, one per axis or {1}
    std::vector<std::uint8_t> mask{1};  // row-major over cell

    bool is_full_cell() const;
    static BaseShape rectangle() { return BaseShape{}; }
};

// An enumerable family of hyperrectangles on the grid {0..n-1}^d, generated
// by shifting the per-scale extent vectors. Immutable after construction.
struct RegionSystem {
    int n = 0;
    int d = 0;
    std::vector<std::vector<int>> scales;  // distinct extent vectors, lexicographic order
    std::int64_t r_n = 1;                  // cardinality bounds [r_n, m_n]
    std::int64_t m_n = 0;
    Parity parity = Parity::All;
    BaseShape base_shape = BaseShape::rectangle();

    std::int64_t cardinality_of(std::span<const int> scale) const;
    std::int64_t offsets_per_scale(std::span<const int> scale) const;
    std::int64_t total_regions() const;
    bool empty() const { return scales.empty(); }

    // Canonical content string (n, d, parity, bounds, scale list); two systems
    // with equal digests enumerate identical regions.
    std::string digest_string() const;
};

// All extent vectors with every component in [min_side, max_side] (after the
// parity filter), bounds set to (min_side^d, max_side^d) unless restricted later.
RegionSystem build_rectangles(int n, int d, int min_side, int max_side,
                              Parity parity = Parity::All);

// Keeps only scales with cardinality in [r_n, m_n]; throws EmptySystem if
// nothing survives.
RegionSystem restrict_scales(const RegionSystem& system, std::int64_t r_n, std::int64_t m_n);

// Region for a (scale index, linear offset index) pair; offsets are row-major
// over the per-axis placement counts (last axis fastest).
Region region_at(const RegionSystem& system, std::size_t scale_idx, std::int64_t offset_idx);

// Calls fn(offset vector, linear index) for every placement of `scale`.
void for_each_offset(const RegionSystem& system, std::span<const int> scale,
                     const std::function<void(std::span<const int>, std::int64_t)>& fn);

struct GrowthReport {
    std::int64_t total_regions = 0;
    std::int64_t envelope = 0;      // n^(2d+1)
    double log_ratio = 0.0;         // log(total) / log(n)
    bool within_envelope = true;
};

// #(R_n) against the polynomial envelope n^(2d+1).
GrowthReport check_growth(const RegionSystem& system);

// CSV rows t_1..t_d,h_1..h_d,cardinality (offsets 1-based), one region per line.
void write_regions_csv(std::ostream& out, const RegionSystem& system);

}  // namespace ams

#endif
