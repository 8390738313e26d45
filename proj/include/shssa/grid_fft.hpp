#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "shssa/shape.hpp"

namespace shssa {

/// Smallest n' ≥ n of the form 2^a 3^b 5^c 7^d.
std::size_t next_fast_size(std::size_t n);

/// Periodic nx × ny grid (row-major, x is the row) that carries shapes for FFT convolution.
/// Cell (x, y) lives at offset (x-1)*ny + (y-1).
class EmbeddingGrid {
public:
    EmbeddingGrid(std::size_t nx, std::size_t ny);

    /// Grid for a topology: on a circular axis the size equals the period; on an infinite axis it is
    /// at least `required_x` / `required_y`, rounded up to a fast FFT size when `pad` is set.
    static EmbeddingGrid for_topology(const Topology& topo, Coord required_x, Coord required_y, bool pad = true);

    [[nodiscard]] std::size_t nx() const noexcept { return nx_; }
    [[nodiscard]] std::size_t ny() const noexcept { return ny_; }
    [[nodiscard]] std::size_t cells() const noexcept { return nx_ * ny_; }
    /// Length of the half-spectrum of a real grid: nx * (ny/2 + 1).
    [[nodiscard]] std::size_t spectrum_cells() const noexcept { return nx_ * (ny_ / 2 + 1); }

    [[nodiscard]] std::size_t offset(const IndexPair& p) const noexcept
    {
        return static_cast<std::size_t>(p.x - 1) * ny_ + static_cast<std::size_t>(p.y - 1);
    }

    /// Offsets of every index of `s`; throws TopologyError if an index falls outside the grid.
    [[nodiscard]] std::vector<std::size_t> offsets(const Shape& s) const;

    friend bool operator==(const EmbeddingGrid&, const EmbeddingGrid&) = default;

private:
    std::size_t nx_;
    std::size_t ny_;
};

/// Real-to-complex 2D FFT pair on an EmbeddingGrid. Plans are created once (under a global lock);
/// transforms may then be run concurrently from any thread.
class GridFft {
public:
    explicit GridFft(const EmbeddingGrid& grid);
    ~GridFft();
    GridFft(const GridFft&) = delete;
    GridFft& operator=(const GridFft&) = delete;

    [[nodiscard]] const EmbeddingGrid& grid() const noexcept { return grid_; }

    /// Unnormalized forward transform of a real grid into its half-spectrum.
    void forward(std::span<const double> in, std::span<std::complex<double>> out) const;

    /// Unnormalized inverse transform. Overwrites `in`.
    void inverse(std::span<std::complex<double>> in, std::span<double> out) const;

private:
    struct Plans;
    EmbeddingGrid grid_;
    std::unique_ptr<Plans> plans_;
};

/// FFTW-aligned scratch buffer.
template<class T>
class FftBuffer {
public:
    explicit FftBuffer(std::size_t n);
    ~FftBuffer();
    FftBuffer(const FftBuffer&) = delete;
    FftBuffer& operator=(const FftBuffer&) = delete;
    FftBuffer(FftBuffer&& o) noexcept : data_(o.data_), size_(o.size_) { o.data_ = nullptr; o.size_ = 0; }

    [[nodiscard]] std::span<T> span() noexcept { return {data_, size_}; }
    [[nodiscard]] std::span<const T> span() const noexcept { return {data_, size_}; }
    [[nodiscard]] T* data() noexcept { return data_; }
    [[nodiscard]] std::size_t size() const noexcept { return size_; }
    void zero() noexcept;

private:
    T* data_ = nullptr;
    std::size_t size_ = 0;
};

extern template class FftBuffer<double>;
extern template class FftBuffer<std::complex<double>>;

/// Data-parallel loops shared by the FFT operators. Each is a plain element-wise pass and is
/// parallelized with OpenMP above parallel::min_parallel_length.
namespace kernels {

/// out[k] = a[k] * conj(b[k])
void multiply_conj(std::span<const std::complex<double>> a, std::span<const std::complex<double>> b,
                   std::span<std::complex<double>> out);

/// out[k] = a[k] * b[k]
void multiply(std::span<const std::complex<double>> a, std::span<const std::complex<double>> b,
              std::span<std::complex<double>> out);

/// acc[k] += scale * a[k] * b[k]
void multiply_accumulate(std::span<const std::complex<double>> a, std::span<const std::complex<double>> b,
                         double scale, std::span<std::complex<double>> acc);

/// grid[offsets[i]] = values[i]; other cells untouched.
void scatter(std::span<const double> values, std::span<const std::size_t> offsets, std::span<double> grid);

/// out[i] = scale * grid[offsets[i]]
void gather(std::span<const double> grid, std::span<const std::size_t> offsets, double scale,
            std::span<double> out);

} // namespace kernels

/// Circular convolution of two real grids: out(a) = Σ_b f(b) g(a - b).
std::vector<double> circular_convolve(const GridFft& fft, std::span<const double> f, std::span<const double> g);

/// Circular correlation of two real grids: out(a) = Σ_b f(a + b) g(b).
std::vector<double> circular_correlate(const GridFft& fft, std::span<const double> f, std::span<const double> g);

/// Indicator grid of `s` (1 on the shape's cells).
std::vector<double> indicator(const EmbeddingGrid& grid, const Shape& s);

} // namespace shssa
