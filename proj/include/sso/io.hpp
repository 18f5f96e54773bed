#pragma once

#include <filesystem>
#include <string>

#include "sso/grid.hpp"
#include "sso/sparse.hpp"

namespace sso {

/// Shortest round-trip decimal representation of a double.
std::string format_double(double v);

/// Writes content to path atomically (temp file in the same directory, then
/// rename). Throws std::runtime_error on I/O failure.
void atomic_write_text(const std::filesystem::path& path, const std::string& content);

/// GridFunction CSV contract: ny rows of nx comma-separated values, row j on
/// line j (y grows downward in the file), 17 significant digits.
std::string grid_csv(const GridFunction& f);
void write_grid_csv(const GridFunction& f, const std::filesystem::path& path);

/// Reads a CSV written by write_grid_csv back onto the given grid. Throws on
/// shape mismatch or unparsable values.
GridFunction read_grid_csv(const Grid& grid, const std::filesystem::path& path);

/// ASCII PGM (P2) heatmap, nx x ny pixels, values mapped linearly from
/// [min f, max f] to [0, 255]; a constant function maps to 128. The min and
/// max are recorded in a header comment.
std::string heatmap_pgm(const GridFunction& f);
void render_heatmap(const GridFunction& f, const std::filesystem::path& path);

/// Coordinate-format matrix dump ("row col value" per line, sorted).
void write_matrix_dump(const SparseSym& A, const std::filesystem::path& path);

} // namespace sso
