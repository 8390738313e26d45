#pragma once

#include <complex>
#include <memory>
#include <span>
#include <vector>

#include "shssa/embedding.hpp"
#include "shssa/grid_fft.hpp"

namespace shssa {

/// Grid used to realize the trajectory matrix of `plan` as a 2D circulant: the period on circular
/// axes, the region's extent (padded to a fast FFT size) on infinite ones.
EmbeddingGrid circulant_grid(const EmbeddingPlan& plan, bool pad = true);

/// Implicit trajectory matrix X = P_𝔏ᵀ C P_𝔎 with C the circulant of the zero-padded data.
/// Products with X and Xᵀ cost two real FFTs each. Immutable after construction and safe to
/// share between threads; scratch space is allocated per call.
class CirculantOperator {
public:
    /// `arr` must be defined on the plan's region or covered cells.
    CirculantOperator(const ShapedArray& arr, EmbeddingPlan plan, bool pad = true);

    [[nodiscard]] std::size_t rows() const noexcept { return plan_.window_size(); }
    [[nodiscard]] std::size_t cols() const noexcept { return plan_.origin_count(); }
    [[nodiscard]] const EmbeddingPlan& plan() const noexcept { return plan_; }
    [[nodiscard]] const EmbeddingGrid& grid() const noexcept { return fft_->grid(); }

    /// out = X v, |v| = K, |out| = L.
    void matvec(std::span<const double> v, std::span<double> out) const;
    [[nodiscard]] std::vector<double> matvec(std::span<const double> v) const;

    /// out = Xᵀ u, |u| = L, |out| = K.
    void rmatvec(std::span<const double> u, std::span<double> out) const;
    [[nodiscard]] std::vector<double> rmatvec(std::span<const double> u) const;

private:
    void correlate(std::span<const double> in, std::span<const std::size_t> in_offsets,
                   std::span<const std::size_t> out_offsets, std::span<double> out) const;

    EmbeddingPlan plan_;
    std::shared_ptr<const GridFft> fft_;
    std::vector<std::complex<double>> spectrum_;
    std::vector<std::size_t> window_offsets_;
    std::vector<std::size_t> origin_offsets_;
};

/// Quasi-hankelization of Σ_k σ_k U_k V_kᵀ followed by unembedding, without forming any L×K
/// matrix: the spectra of the zero-padded U_k and V_k are multiplied and summed, one inverse
/// FFT yields the fiber sums, and each cell is divided by its weight.
class RankOneHankelizer {
public:
    explicit RankOneHankelizer(EmbeddingPlan plan, bool pad = true);

    [[nodiscard]] const EmbeddingPlan& plan() const noexcept { return plan_; }

    /// |sigma| terms; u[k] has L values, v[k] has K values.
    [[nodiscard]] ShapedArray sum(std::span<const double> sigma, std::span<const std::span<const double>> u,
                                  std::span<const std::span<const double>> v) const;

private:
    EmbeddingPlan plan_;
    std::shared_ptr<const GridFft> fft_;
    std::vector<std::size_t> window_offsets_;
    std::vector<std::size_t> origin_offsets_;
    std::vector<std::size_t> covered_offsets_;
};

/// unembed(project_quasi_hankel(σ U Vᵀ)) via convolution.
ShapedArray rank_one_unembed(double sigma, const ShapedArray& u, const ShapedArray& v, const EmbeddingPlan& plan);

/// Cell weights as the convolution of the window and origin indicators, rounded to integers.
/// Throws NumericalError if any value is more than 0.25 away from an integer.
CountArray weights_via_convolution(const EmbeddingPlan& plan);

/// Direct O(L·K) products that touch neither FFTs nor dense matrices. Serial; kept as the
/// reference the FFT path is tested and benchmarked against.
namespace serial {

std::vector<double> matvec(const ShapedArray& arr, const EmbeddingPlan& plan, std::span<const double> v);
std::vector<double> rmatvec(const ShapedArray& arr, const EmbeddingPlan& plan, std::span<const double> u);

} // namespace serial

} // namespace shssa
