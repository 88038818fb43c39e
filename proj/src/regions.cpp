#include "ams/regions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "ams/errors.hpp"
#include "ams/field.hpp"

namespace ams {

bool BaseShape::is_full_cell() const {
    return std::all_of(mask.begin(), mask.end(), [](std::uint8_t v) { return v != 0; });
}

std::int64_t RegionSystem::cardinality_of(std::span<const int> scale) const {
    std::int64_t card = 1;
    for (int h : scale) card *= h;
    return card;
}

std::int64_t RegionSystem::offsets_per_scale(std::span<const int> scale) const {
    std::int64_t count = 1;
    for (int h : scale) count *= (n - h + 1);
    return count;
}

std::int64_t RegionSystem::total_regions() const {
    std::int64_t total = 0;
    for (const auto& scale : scales) total += offsets_per_scale(scale);
    return total;
}

std::string RegionSystem::digest_string() const {
    std::ostringstream out;
    out << "rects:1 n=" << n << " d=" << d
        << " parity=" << (parity == Parity::EvenOnly ? "even" : "all")
        << " bounds=[" << r_n << "," << m_n << "] scales=";
    for (std::size_t i = 0; i < scales.size(); ++i) {
        if (i) out << ";";
        for (int k = 0; k < d; ++k) {
            if (k) out << "x";
            out << scales[i][k];
        }
    }
    return out.str();
}

RegionSystem build_rectangles(int n, int d, int min_side, int max_side, Parity parity) {
    if (d < 1) throw ConfigError("dimension must be >= 1");
    if (!(1 <= min_side && min_side <= max_side && max_side <= n))
        throw ConfigError("side bounds must satisfy 1 <= min <= max <= n");
    grid_size(n, d);  // overflow check

    std::vector<int> sides;
    for (int h = min_side; h <= max_side; ++h) {
        if (parity == Parity::EvenOnly && h % 2 != 0) continue;
        sides.push_back(h);
    }
    if (sides.empty())
        throw ConfigError("parity filter removed every side length in [" +
                          std::to_string(min_side) + "," + std::to_string(max_side) + "]");

    RegionSystem system;
    system.n = n;
    system.d = d;
    system.parity = parity;

    // all d-tuples over `sides`, lexicographic
    std::vector<std::size_t> idx(static_cast<std::size_t>(d), 0);
    for (;;) {
        std::vector<int> scale(static_cast<std::size_t>(d));
        for (int k = 0; k < d; ++k) scale[static_cast<std::size_t>(k)] = sides[idx[static_cast<std::size_t>(k)]];
        system.scales.push_back(std::move(scale));
        int k = d - 1;
        while (k >= 0 && ++idx[static_cast<std::size_t>(k)] == sides.size()) {
            idx[static_cast<std::size_t>(k)] = 0;
            --k;
        }
        if (k < 0) break;
    }

    std::int64_t min_card = 1;
    std::int64_t max_card = 1;
    for (int k = 0; k < d; ++k) {
        min_card *= sides.front();
        max_card *= sides.back();
    }
    system.r_n = min_card;
    system.m_n = max_card;
    return system;
}

RegionSystem restrict_scales(const RegionSystem& system, std::int64_t r_n, std::int64_t m_n) {
    if (r_n > m_n) throw ConfigError("scale bounds must satisfy r_n <= m_n");
    RegionSystem out;
    out.n = system.n;
    out.d = system.d;
    out.parity = system.parity;
    out.r_n = r_n;
    out.m_n = m_n;
    for (const auto& scale : system.scales) {
        const std::int64_t card = system.cardinality_of(scale);
        if (card >= r_n && card <= m_n) out.scales.push_back(scale);
    }
    if (out.scales.empty())
        throw EmptySystem("no scale has cardinality in [" + std::to_string(r_n) + "," +
                          std::to_string(m_n) + "]");
    return out;
}

Region region_at(const RegionSystem& system, std::size_t scale_idx, std::int64_t offset_idx) {
    const auto& scale = system.scales.at(scale_idx);
    Region region;
    region.extent = scale;
    region.cardinality = system.cardinality_of(scale);
    region.offset.assign(static_cast<std::size_t>(system.d), 0);
    std::int64_t rem = offset_idx;
    for (int k = system.d - 1; k >= 0; --k) {
        const std::int64_t extent = system.n - scale[static_cast<std::size_t>(k)] + 1;
        region.offset[static_cast<std::size_t>(k)] = static_cast<int>(rem % extent);
        rem /= extent;
    }
    return region;
}

void for_each_offset(const RegionSystem& system, std::span<const int> scale,
                     const std::function<void(std::span<const int>, std::int64_t)>& fn) {
    const int d = system.d;
    std::vector<int> limit(static_cast<std::size_t>(d));
    for (int k = 0; k < d; ++k) limit[static_cast<std::size_t>(k)] = system.n - scale[static_cast<std::size_t>(k)] + 1;
    std::vector<int> t(static_cast<std::size_t>(d), 0);
    std::int64_t linear = 0;
    for (;;) {
        fn(t, linear);
        ++linear;
        int k = d - 1;
        while (k >= 0 && ++t[static_cast<std::size_t>(k)] == limit[static_cast<std::size_t>(k)]) {
            t[static_cast<std::size_t>(k)] = 0;
            --k;
        }
        if (k < 0) break;
    }
}

GrowthReport check_growth(const RegionSystem& system) {
    GrowthReport report;
    report.total_regions = system.total_regions();
    const double envelope = std::pow(static_cast<double>(system.n), 2 * system.d + 1);
    report.envelope = envelope < 9e18 ? static_cast<std::int64_t>(envelope)
                                      : std::numeric_limits<std::int64_t>::max();
    report.within_envelope = static_cast<double>(report.total_regions) <= envelope;
    report.log_ratio = system.n > 1 && report.total_regions > 0
                           ? std::log(static_cast<double>(report.total_regions)) /
                                 std::log(static_cast<double>(system.n))
                           : 0.0;
    return report;
}

void write_regions_csv(std::ostream& out, const RegionSystem& system) {
    for (int k = 1; k <= system.d; ++k) out << "t_" << k << ",";
    for (int k = 1; k <= system.d; ++k) out << "h_" << k << ",";
    out << "cardinality\n";
    for (const auto& scale : system.scales) {
        const std::int64_t card = system.cardinality_of(scale);
        for_each_offset(system, scale, [&](std::span<const int> t, std::int64_t) {
            for (int v : t) out << (v + 1) << ",";  // 1-based in exports
            for (int h : scale) out << h << ",";
            out << card << "\n";
        });
    }
}

}  // namespace ams
