#include "ams/detect.hpp"

#include "ams/format.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>

namespace ams {

namespace {

std::string fmt(double v) { return format_double(v); }

// fold one rectangle into the min-cardinality raster
void rasterize_min(std::vector<std::int64_t>& raster, int n, int d, const Region& region) {
    std::vector<int> cell(static_cast<std::size_t>(d), 0);
    for (;;) {
        std::int64_t idx = 0;
        for (int k = 0; k < d; ++k)
            idx = idx * n + region.offset[static_cast<std::size_t>(k)] +
                  cell[static_cast<std::size_t>(k)];
        auto& v = raster[static_cast<std::size_t>(idx)];
        if (v == 0 || region.cardinality < v) v = region.cardinality;
        int k = d - 1;
        while (k >= 0 &&
               ++cell[static_cast<std::size_t>(k)] == region.extent[static_cast<std::size_t>(k)]) {
            cell[static_cast<std::size_t>(k)] = 0;
            --k;
        }
        if (k < 0) break;
    }
}

}  // namespace

SignificanceMap significance_map(const ScanResult& result, const QuantileTable& table,
                                 double alpha, std::optional<double> pixel_area) {
    SignificanceMap map;
    map.n = result.n;
    map.d = result.d;
    map.alpha = alpha;
    map.eta_used = table.quantile_for_alpha(alpha);
    map.unit_scale = pixel_area.value_or(1.0);
    map.regions = reject_regions(result, map.eta_used);
    map.raster.assign(static_cast<std::size_t>(grid_size(result.n, result.d)), 0);
    for (const auto& rejection : map.regions)
        rasterize_min(map.raster, map.n, map.d, rejection.region);
    return map;
}

Segmentation segment(const SignificanceMap& map) {
    Segmentation seg;
    seg.n = map.n;
    seg.d = map.d;
    seg.mask.assign(map.raster.size(), 0);
    std::int64_t smallest = std::numeric_limits<std::int64_t>::max();
    for (std::int64_t v : map.raster)
        if (v > 0) smallest = std::min(smallest, v);
    if (smallest == std::numeric_limits<std::int64_t>::max()) return seg;  // empty map
    seg.source_scale = smallest;
    for (std::size_t i = 0; i < map.raster.size(); ++i)
        seg.mask[i] = map.raster[i] == smallest ? 1 : 0;
    return seg;
}

std::vector<std::uint8_t> union_mask(const SignificanceMap& map) {
    std::vector<std::uint8_t> mask(map.raster.size(), 0);
    for (std::size_t i = 0; i < map.raster.size(); ++i) mask[i] = map.raster[i] > 0 ? 1 : 0;
    return mask;
}

void write_rejections_csv(std::ostream& out, const SignificanceMap& map, int d) {
    for (int k = 1; k <= d; ++k) out << "t_" << k << ",";
    for (int k = 1; k <= d; ++k) out << "h_" << k << ",";
    out << "cardinality,t_value,calibrated,local_threshold\n";
    for (const auto& r : map.regions) {
        for (int v : r.region.offset) out << (v + 1) << ",";  // 1-based in exports
        for (int h : r.region.extent) out << h << ",";
        out << r.region.cardinality << "," << fmt(r.t_value) << "," << fmt(r.calibrated)
            << "," << fmt(r.local_threshold) << "\n";
    }
}

void write_sigmap_pgm(const std::filesystem::path& path, const SignificanceMap& map) {
    if (map.d != 2) throw ShapeError("PGM raster output requires a 2-d map");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << "P5\n" << map.n << " " << map.n << "\n65535\n";
    for (std::int64_t v : map.raster) {
        const auto clamped =
            static_cast<std::uint16_t>(std::clamp<std::int64_t>(v, 0, 65535));
        const unsigned char bytes[2] = {static_cast<unsigned char>(clamped >> 8),
                                        static_cast<unsigned char>(clamped & 0xff)};
        out.write(reinterpret_cast<const char*>(bytes), 2);
    }
    if (!out) throw IoError("short write on " + path.string());
}

void write_mask_pgm(const std::filesystem::path& path, std::span<const std::uint8_t> mask,
                    int n, int d) {
    if (d != 2) throw ShapeError("PGM mask output requires a 2-d mask");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << "P5\n" << n << " " << n << "\n255\n";
    for (std::uint8_t v : mask) {
        const unsigned char byte = v ? 255 : 0;
        out.write(reinterpret_cast<const char*>(&byte), 1);
    }
    if (!out) throw IoError("short write on " + path.string());
}

}  // namespace ams
