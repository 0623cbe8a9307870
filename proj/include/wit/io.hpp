#pragma once

#include "wit/cell_complex.hpp"
#include "wit/types.hpp"

#include <nlohmann/json_fwd.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace wit::io {

/// Shortest round-trip decimal representation (deterministic output files).
std::string format_double(double v);

std::uint64_t fnv1a(const std::string& data);

void write_text(const std::filesystem::path& path, const std::string& text);

/// CSV with a header row; every cell already formatted.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

/// Complex description document (topology, sizes, per-degree cell counts).
std::string complex_description_json(const CellComplex& cc);

/// Coordinate-format triplet list (row, col, value) of a coboundary matrix.
void write_coboundary_csv(const std::filesystem::path& path, const SpMat& d);

}  // namespace wit::io
