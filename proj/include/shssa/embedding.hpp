#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "shssa/shape.hpp"

namespace shssa {

/// Inverse map of (i, j) ↦ ℓ_i ⊕ κ_j: for every trajectory-matrix entry (column-major, i + j*L)
/// the position of its cell in the covered region, plus the per-cell entry lists in CSR form.
struct FiberIndex {
    std::vector<std::int32_t> entry_cell;
    std::vector<std::size_t> cell_offsets; ///< size covered+1
    std::vector<std::size_t> cell_entries; ///< entries grouped by cell
};

struct PlanOptions {
    /// Fibers are precomputed when L*K is at most this.
    std::size_t fiber_limit = 1'000'000;
    /// Origins and weights are found by direct enumeration while N*L (resp. L*K) stays below this,
    /// by FFT indicator correlation above it.
    std::size_t direct_limit = 10'000'000;
};

/// Region, window, admissible origins and cell weights for one embedding. Immutable; copies share storage.
class EmbeddingPlan {
public:
    [[nodiscard]] const Shape& region() const noexcept { return d_->region; }
    [[nodiscard]] const Shape& window() const noexcept { return d_->window; }
    [[nodiscard]] const Shape& origins() const noexcept { return d_->origins; }
    /// 𝔏 ⊕ 𝔎, the part of the region the embedding sees.
    [[nodiscard]] const Shape& covered() const noexcept { return d_->covered; }
    /// Region cells no window placement reaches; empty when the embedding is injective.
    [[nodiscard]] const std::vector<IndexPair>& dropped() const noexcept { return d_->dropped; }
    /// Number of (i, j) with ℓ_i ⊕ κ_j = α for each covered α.
    [[nodiscard]] const CountArray& weights() const noexcept { return d_->weights; }
    [[nodiscard]] const Topology& topology() const noexcept { return d_->region.topology(); }

    [[nodiscard]] std::size_t window_size() const noexcept { return d_->window.size(); }
    [[nodiscard]] std::size_t origin_count() const noexcept { return d_->origins.size(); }
    [[nodiscard]] bool injective() const noexcept { return d_->dropped.empty(); }

    /// Precomputed fibers, or nullptr when the plan is above PlanOptions::fiber_limit.
    [[nodiscard]] const FiberIndex* fibers() const noexcept { return d_->fibers.get(); }
    /// Precomputed fibers, or a freshly built index for large plans.
    [[nodiscard]] std::shared_ptr<const FiberIndex> fiber_index() const;

    /// ‖T(X)‖²_F = Σ_α w(α) x_α² for an array over the region or the covered cells.
    [[nodiscard]] double trajectory_norm_sq(const ShapedArray& arr) const;

private:
    friend EmbeddingPlan plan(const Shape&, const Shape&, const PlanOptions&);

    struct Data {
        Shape region;
        Shape window;
        Shape origins;
        Shape covered;
        std::vector<IndexPair> dropped;
        CountArray weights;
        std::shared_ptr<const FiberIndex> fibers;
    };
    explicit EmbeddingPlan(std::shared_ptr<const Data> d) : d_(std::move(d)) {}
    std::shared_ptr<const Data> d_;
};

/// Builds the plan of `window` inside `region`. The window need not lie inside the region; only the
/// origin set 𝔎 = {κ ∈ 𝔑 | 𝔏 ⊕ {κ} ⊂ 𝔑} must be non-empty (else WindowError).
EmbeddingPlan plan(const Shape& region, const Shape& window, const PlanOptions& options = {});

/// Origins by exhaustive membership testing, independent of the plan's search path.
std::vector<IndexPair> enumerate_origins(const Shape& region, const Shape& window);

/// Dense L×K trajectory matrix; column j is the vectorized window copy at origin κ_j.
/// `arr` must be defined on the region or at least on the covered cells.
Eigen::MatrixXd embed_dense(const ShapedArray& arr, const EmbeddingPlan& plan);
Eigen::MatrixXcd embed_dense(const ComplexShapedArray& arr, const EmbeddingPlan& plan);

/// Frobenius-orthogonal projection onto the quasi-Hankel matrices: every fiber is replaced by its mean.
Eigen::MatrixXd project_quasi_hankel(const Eigen::MatrixXd& mat, const EmbeddingPlan& plan);

/// Array over the covered cells whose embedding is `mat`. Fibers that disagree by more than
/// `rel_tol` · max|mat| raise StructureError.
ShapedArray unembed(const Eigen::MatrixXd& mat, const EmbeddingPlan& plan, double rel_tol = 1e-12);

} // namespace shssa
