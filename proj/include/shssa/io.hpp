#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "shssa/shape.hpp"
#include "shssa/ssa.hpp"

namespace shssa::io {

namespace fs = std::filesystem;

/// Dense rows × cols table; row index is x, column index is y, both 1-based in shapes.
/// Absent cells are NaN.
struct Grid {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values; ///< row-major

    [[nodiscard]] double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

/// Shortest decimal string that parses back to the same double; "NaN", "inf", "-inf" otherwise.
std::string format_double(double v);

/// Parses a whole field (surrounding blanks allowed). Empty and "NaN" give NaN.
std::optional<double> parse_double(std::string_view field);

Grid parse_grid_csv(std::string_view text, const std::string& source = "<memory>");
Grid read_grid_csv(const fs::path& path);

/// 8-bit binary (P5) or ASCII (P2) graymap.
Grid read_pgm(const fs::path& path);

/// CSV by default, PGM for .pgm files.
Grid read_grid(const fs::path& path);

struct Mask {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::uint8_t> values;
};

Mask read_mask_csv(const fs::path& path);

/// Cells that are present in `grid` (and set in `mask`) as a shaped array under `topo`.
ShapedArray to_shaped(const Grid& grid, const Topology& topo, const Mask* mask = nullptr);
ShapedArray load_grid(const fs::path& path, const std::optional<fs::path>& mask_path, const Topology& topo);

/// `arr` placed in a rows × cols grid (NaN elsewhere).
Grid to_grid(const ShapedArray& arr, std::size_t rows, std::size_t cols);
/// Smallest grid holding the shape's bounding box from (1,1).
Grid to_grid(const ShapedArray& arr);

std::string format_grid_csv(const Grid& grid);
void write_grid_csv(const fs::path& path, const Grid& grid);

/// Writes to a sibling temporary file, then renames it over `path`.
void atomic_write(const fs::path& path, std::string_view content);

std::string read_text(const fs::path& path);

/// "1-6;7,8" → {{1..6}, {7, 8}}.
Grouping parse_groups(std::string_view text);

/// "24,inf" → Topology(24, ∞).
Topology parse_topology(std::string_view text);

struct WindowSpec {
    enum class Kind { rect, circle, mask } kind = Kind::rect;
    Coord lx = 0;
    Coord ly = 0;
    double radius = 0.0;
    fs::path mask;
};

/// "rect:LX,LY", "circle:R" or "mask:<path>".
WindowSpec parse_window(std::string_view text);
std::string to_string(const WindowSpec& w);

/// Window anchored so that its smallest coordinates are 1.
Shape build_window(const WindowSpec& spec, const Topology& topo);

} // namespace shssa::io
