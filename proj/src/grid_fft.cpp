#include "shssa/grid_fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>

#include "shssa/parallel.hpp"

namespace shssa {

namespace {

// FFTW's planner is not re-entrant.
std::mutex& planner_mutex()
{
    static std::mutex m;
    return m;
}

fftw_complex* as_fftw(std::complex<double>* p) { return reinterpret_cast<fftw_complex*>(p); }

bool is_fast(std::size_t n)
{
    for (std::size_t f : {2u, 3u, 5u, 7u}) {
        while (n % f == 0) n /= f;
    }
    return n == 1;
}

} // namespace

std::size_t next_fast_size(std::size_t n)
{
    if (n <= 1) return 1;
    while (!is_fast(n)) ++n;
    return n;
}

EmbeddingGrid::EmbeddingGrid(std::size_t nx, std::size_t ny) : nx_(nx), ny_(ny)
{
    if (nx == 0 || ny == 0) throw ShapeError("embedding grid must be non-empty");
}

EmbeddingGrid EmbeddingGrid::for_topology(const Topology& topo, Coord required_x, Coord required_y, bool pad)
{
    auto axis = [pad](const std::optional<Coord>& period, Coord required, const char* name) -> std::size_t {
        if (period) {
            if (required > *period) {
                throw TopologyError(std::string("extent along ") + name + " (" + std::to_string(required)
                                    + ") exceeds the period " + std::to_string(*period));
            }
            return static_cast<std::size_t>(*period);
        }
        const auto n = static_cast<std::size_t>(std::max<Coord>(required, 1));
        return pad ? next_fast_size(n) : n;
    };
    return {axis(topo.period_x(), required_x, "x"), axis(topo.period_y(), required_y, "y")};
}

std::vector<std::size_t> EmbeddingGrid::offsets(const Shape& s) const
{
    std::vector<std::size_t> out;
    out.reserve(s.size());
    for (const auto& p : s) {
        if (p.x < 1 || p.y < 1 || static_cast<std::size_t>(p.x) > nx_ || static_cast<std::size_t>(p.y) > ny_) {
            throw TopologyError("index " + to_string(p) + " lies outside the " + std::to_string(nx_) + "x"
                                + std::to_string(ny_) + " embedding grid");
        }
        out.push_back(offset(p));
    }
    return out;
}

struct GridFft::Plans {
    fftw_plan forward = nullptr;
    fftw_plan inverse = nullptr;
};

GridFft::GridFft(const EmbeddingGrid& grid) : grid_(grid), plans_(std::make_unique<Plans>())
{
    FftBuffer<double> real(grid.cells());
    FftBuffer<std::complex<double>> spec(grid.spectrum_cells());
    const auto nx = static_cast<int>(grid.nx());
    const auto ny = static_cast<int>(grid.ny());
    // ESTIMATE keeps planning deterministic; UNALIGNED allows executing on caller-owned arrays.
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    std::lock_guard lock(planner_mutex());
    plans_->forward = fftw_plan_dft_r2c_2d(nx, ny, real.data(), as_fftw(spec.data()), flags);
    plans_->inverse = fftw_plan_dft_c2r_2d(nx, ny, as_fftw(spec.data()), real.data(), flags);
    if (!plans_->forward || !plans_->inverse) throw NumericalError("FFTW failed to create a plan");
}

GridFft::~GridFft()
{
    std::lock_guard lock(planner_mutex());
    if (plans_->forward) fftw_destroy_plan(plans_->forward);
    if (plans_->inverse) fftw_destroy_plan(plans_->inverse);
}

void GridFft::forward(std::span<const double> in, std::span<std::complex<double>> out) const
{
    if (in.size() != grid_.cells() || out.size() != grid_.spectrum_cells()) {
        throw ShapeError("forward FFT: buffer sizes do not match the grid");
    }
    // r2c without FFTW_DESTROY_INPUT leaves the input intact.
    fftw_execute_dft_r2c(plans_->forward, const_cast<double*>(in.data()), as_fftw(out.data()));
}

void GridFft::inverse(std::span<std::complex<double>> in, std::span<double> out) const
{
    if (in.size() != grid_.spectrum_cells() || out.size() != grid_.cells()) {
        throw ShapeError("inverse FFT: buffer sizes do not match the grid");
    }
    fftw_execute_dft_c2r(plans_->inverse, as_fftw(in.data()), out.data());
}

template<class T>
FftBuffer<T>::FftBuffer(std::size_t n) : data_(static_cast<T*>(fftw_malloc(sizeof(T) * std::max<std::size_t>(n, 1)))), size_(n)
{
    if (!data_) throw std::bad_alloc();
    zero();
}

template<class T>
FftBuffer<T>::~FftBuffer()
{
    if (data_) fftw_free(data_);
}

template<class T>
void FftBuffer<T>::zero() noexcept
{
    std::fill(data_, data_ + size_, T{});
}

template class FftBuffer<double>;
template class FftBuffer<std::complex<double>>;

namespace kernels {

using parallel::min_parallel_length;

void multiply_conj(std::span<const std::complex<double>> a, std::span<const std::complex<double>> b,
                   std::span<std::complex<double>> out)
{
    const auto n = static_cast<std::ptrdiff_t>(out.size());
#pragma omp parallel for schedule(static) if (out.size() > min_parallel_length)
    for (std::ptrdiff_t k = 0; k < n; ++k) out[k] = a[k] * std::conj(b[k]);
}

void multiply(std::span<const std::complex<double>> a, std::span<const std::complex<double>> b,
              std::span<std::complex<double>> out)
{
    const auto n = static_cast<std::ptrdiff_t>(out.size());
#pragma omp parallel for schedule(static) if (out.size() > min_parallel_length)
    for (std::ptrdiff_t k = 0; k < n; ++k) out[k] = a[k] * b[k];
}

void multiply_accumulate(std::span<const std::complex<double>> a, std::span<const std::complex<double>> b,
                         double scale, std::span<std::complex<double>> acc)
{
    const auto n = static_cast<std::ptrdiff_t>(acc.size());
#pragma omp parallel for schedule(static) if (acc.size() > min_parallel_length)
    for (std::ptrdiff_t k = 0; k < n; ++k) acc[k] += scale * (a[k] * b[k]);
}

void scatter(std::span<const double> values, std::span<const std::size_t> offsets, std::span<double> grid)
{
    const auto n = static_cast<std::ptrdiff_t>(values.size());
#pragma omp parallel for schedule(static) if (values.size() > min_parallel_length)
    for (std::ptrdiff_t i = 0; i < n; ++i) grid[offsets[i]] = values[i];
}

void gather(std::span<const double> grid, std::span<const std::size_t> offsets, double scale,
            std::span<double> out)
{
    const auto n = static_cast<std::ptrdiff_t>(out.size());
#pragma omp parallel for schedule(static) if (out.size() > min_parallel_length)
    for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = scale * grid[offsets[i]];
}

} // namespace kernels

namespace {

std::vector<double> spectral_product(const GridFft& fft, std::span<const double> f, std::span<const double> g,
                                     bool conjugate)
{
    const auto& grid = fft.grid();
    std::vector<std::complex<double>> fs(grid.spectrum_cells());
    std::vector<std::complex<double>> gs(grid.spectrum_cells());
    fft.forward(f, fs);
    fft.forward(g, gs);
    if (conjugate) {
        kernels::multiply_conj(fs, gs, fs);
    } else {
        kernels::multiply(fs, gs, fs);
    }
    std::vector<double> out(grid.cells());
    fft.inverse(fs, out);
    const double scale = 1.0 / static_cast<double>(grid.cells());
    for (auto& v : out) v *= scale;
    return out;
}

} // namespace

std::vector<double> circular_convolve(const GridFft& fft, std::span<const double> f, std::span<const double> g)
{
    return spectral_product(fft, f, g, false);
}

std::vector<double> circular_correlate(const GridFft& fft, std::span<const double> f, std::span<const double> g)
{
    return spectral_product(fft, f, g, true);
}

std::vector<double> indicator(const EmbeddingGrid& grid, const Shape& s)
{
    std::vector<double> out(grid.cells(), 0.0);
    for (auto off : grid.offsets(s)) out[off] = 1.0;
    return out;
}

} // namespace shssa
