#ifndef AMS_DETECT_HPP
#define AMS_DETECT_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "ams/quantiles.hpp"
#include "ams/statistic.hpp"

namespace ams {

// Raster of the smallest significant covering region per pixel. raster holds
// cardinalities in pixels with 0 as the "not covered" sentinel (cardinalities
// are >= 1, so 0 is unambiguous); unit_scale converts to physical units
// (e.g. nm^2 per pixel) for display.
struct SignificanceMap {
    int n = 0;
    int d = 0;
    std::vector<std::int64_t> raster;
    std::vector<Rejection> regions;
    double alpha = 0.0;
    double eta_used = 0.0;
    double unit_scale = 1.0;

    bool empty() const { return regions.empty(); }
    double physical_value(std::int64_t pixel) const { return raster[pixel] * unit_scale; }
};

struct Segmentation {
    int n = 0;
    int d = 0;
    std::vector<std::uint8_t> mask;      // 1 where covered at the smallest scale
    std::int64_t source_scale = 0;       // smallest cardinality present, 0 if empty
};

// Sets eta = q_{1-alpha} from the table, rejects regions, and rasterizes the
// minimum covering cardinality per pixel.
SignificanceMap significance_map(const ScanResult& result, const QuantileTable& table,
                                 double alpha, std::optional<double> pixel_area = std::nullopt);

// Mask of pixels covered at the smallest significant scale.
Segmentation segment(const SignificanceMap& map);

// Union of all significant rectangles (overlay mask).
std::vector<std::uint8_t> union_mask(const SignificanceMap& map);

// Region CSV: t_1..t_d,h_1..h_d,cardinality,t_value,calibrated,local_threshold
// (offsets 1-based).
void write_rejections_csv(std::ostream& out, const SignificanceMap& map, int d);

// 16-bit P5 raster of cardinalities (0 = not significant). 2-d maps only.
void write_sigmap_pgm(const std::filesystem::path& path, const SignificanceMap& map);

// 8-bit P5 mask (0/255). 2-d only.
void write_mask_pgm(const std::filesystem::path& path, std::span<const std::uint8_t> mask,
                    int n, int d);

}  // namespace ams

#endif
