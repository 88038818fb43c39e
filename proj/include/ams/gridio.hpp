#ifndef AMS_GRIDIO_HPP
#define AMS_GRIDIO_HPP

#include <filesystem>
#include <optional>

#include "ams/field.hpp"

namespace ams {

enum class GridFormat { CSV, PGM, RawText };

// Format by extension: .csv, .pgm, anything else RawText.
GridFormat sniff_format(const std::filesystem::path& path);

// Reads a grid file into a validated Field.
//   CSV:     comma-separated rows; one row -> d=1, n x n rows -> d=2.
//   PGM:     P2/P5, maxval <= 65535, square; always Counts.
//   RawText: "ams-grid 1 d=<d> n=<n> dtype=<counts|reals>" header line, then
//            n^d whitespace-separated values row-major.
// `dtype` overrides inference (CSV/RawText); CSV without an override infers
// Counts when every value is a nonnegative integer.
Field read_grid(const std::filesystem::path& path,
                std::optional<GridFormat> format = std::nullopt,
                std::optional<Dtype> dtype = std::nullopt);

void write_grid(const std::filesystem::path& path, const Field& field, GridFormat format);

}  // namespace ams

#endif
