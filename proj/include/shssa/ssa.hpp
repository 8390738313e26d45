#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "shssa/embedding.hpp"
#include "shssa/shape.hpp"

namespace shssa {

/// σ, its window-shaped left vector (eigenarray) and origin-shaped right vector (factor vector).
struct Eigentriple {
    std::size_t index = 0; ///< 1-based rank position
    double sigma = 0.0;
    ShapedArray u;
    ShapedArray v;
    double residual = 0.0; ///< max(‖Xv − σu‖, ‖Xᵀu − σv‖)
    bool converged = true;
};

enum class SvdMethod { dense, lanczos };

std::string to_string(SvdMethod m);

struct DecomposeOptions {
    std::size_t neig = 10;
    double tol = 1e-9;
    std::size_t max_iter = 500; ///< restart cycles of the iterative solver
    std::uint64_t seed = 20240601;
    /// Full dense SVD when min(L, K) ≤ dense_threshold and L·K ≤ dense_entry_limit.
    std::size_t dense_threshold = 64;
    std::size_t dense_entry_limit = std::size_t{1} << 22;
    std::optional<SvdMethod> force_method;
    PlanOptions plan;
};

struct Decomposition {
    EmbeddingPlan plan;
    std::vector<Eigentriple> triples;
    double frobenius_sq = 0.0; ///< ‖X‖²_F of the trajectory matrix
    std::uint64_t seed = 0;
    SvdMethod method = SvdMethod::dense;
    std::size_t restarts = 0;
    std::size_t products = 0;
};

/// Raised when the iterative solver exhausts max_iter; carries what it had.
class ConvergenceError : public NumericalError {
public:
    ConvergenceError(const std::string& what, Decomposition partial)
        : NumericalError(what), partial_(std::move(partial)) {}

    [[nodiscard]] const Decomposition& partial() const noexcept { return partial_; }

private:
    Decomposition partial_;
};

/// Leading `neig` eigentriples of the trajectory matrix of `arr` with window `window`.
/// Large problems see the matrix only through FFT products.
Decomposition decompose(const ShapedArray& arr, const Shape& window, const DecomposeOptions& options = {});
Decomposition decompose(const ShapedArray& arr, const EmbeddingPlan& plan, const DecomposeOptions& options = {});

/// 1-based eigentriple numbers per group.
using Grouping = std::vector<std::vector<std::size_t>>;

/// One array over the covered cells per group: Σ_{i∈I} 𝒯⁻¹ℋ(σ_i u_i v_iᵀ).
std::vector<ShapedArray> reconstruct(const Decomposition& dec, const Grouping& groups);

/// σ_i² / ‖X‖²_F · 100 for every computed triple.
std::vector<double> contributions(const Decomposition& dec);

} // namespace shssa
