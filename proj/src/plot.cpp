#include "shssa/plot.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "shssa/error.hpp"

namespace shssa::io {

namespace {

using Rgb = std::array<unsigned char, 3>;

/// Piecewise-linear approximation of the viridis colormap.
Rgb colormap(double t)
{
    static constexpr std::array<std::array<double, 3>, 5> stops{{
        {68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37},
    }};
    t = std::clamp(t, 0.0, 1.0) * (stops.size() - 1);
    const auto i = std::min<std::size_t>(static_cast<std::size_t>(t), stops.size() - 2);
    const double f = t - static_cast<double>(i);
    Rgb out{};
    for (int c = 0; c < 3; ++c) {
        out[static_cast<std::size_t>(c)]
            = static_cast<unsigned char>(std::lround(stops[i][static_cast<std::size_t>(c)] * (1 - f)
                                                     + stops[i + 1][static_cast<std::size_t>(c)] * f));
    }
    return out;
}

void append(png_structp png, png_bytep data, png_size_t n)
{
    auto* out = static_cast<std::string*>(png_get_io_ptr(png));
    out->append(reinterpret_cast<const char*>(data), n);
}

void no_flush(png_structp) {}

} // namespace

void write_heatmap_png(const fs::path& path, const Grid& grid, std::size_t min_side)
{
    if (grid.rows == 0 || grid.cols == 0) throw ShapeError("cannot plot an empty grid");
    double lo = INFINITY, hi = -INFINITY;
    for (double v : grid.values) {
        if (std::isfinite(v)) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    const double span = hi > lo ? hi - lo : 1.0;
    const std::size_t scale = std::max<std::size_t>(1, (min_side + std::max(grid.rows, grid.cols) - 1)
                                                           / std::max(grid.rows, grid.cols));
    const std::size_t height = grid.rows * scale;
    const std::size_t width = grid.cols * scale;

    std::vector<unsigned char> pixels(height * width * 3);
    for (std::size_t r = 0; r < grid.rows; ++r) {
        for (std::size_t c = 0; c < grid.cols; ++c) {
            const double v = grid.at(r, c);
            const Rgb rgb = std::isfinite(v) ? colormap((v - lo) / span) : Rgb{210, 210, 210};
            for (std::size_t dr = 0; dr < scale; ++dr) {
                for (std::size_t dc = 0; dc < scale; ++dc) {
                    auto* px = &pixels[((r * scale + dr) * width + c * scale + dc) * 3];
                    std::copy(rgb.begin(), rgb.end(), px);
                }
            }
        }
    }

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw FormatError("cannot initialize PNG writer");
    }
    std::string encoded;
    std::vector<png_bytep> rows(height);
    for (std::size_t r = 0; r < height; ++r) rows[r] = &pixels[r * width * 3];
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw FormatError("PNG encoding failed for " + path.string());
    }
    png_set_write_fn(png, &encoded, append, no_flush);
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    atomic_write(path, encoded);
}

} // namespace shssa::io
