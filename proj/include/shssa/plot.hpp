#pragma once

#include <filesystem>

#include "shssa/io.hpp"

namespace shssa::io {

/// Heatmap of a grid as an 8-bit RGB PNG; absent cells are drawn light gray. Each cell becomes
/// a square block so that the longer side is at least `min_side` pixels.
void write_heatmap_png(const fs::path& path, const Grid& grid, std::size_t min_side = 256);

} // namespace shssa::io
