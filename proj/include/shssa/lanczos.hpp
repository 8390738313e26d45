#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace shssa {

/// y = A x for a linear map known only through its action.
using LinearMap = std::function<void(std::span<const double> x, std::span<double> y)>;

struct LanczosOptions {
    std::size_t rank = 1;
    /// Converged when ‖Aᵀu − σv‖ ≤ tol·σ₁ (Av = σu holds by construction).
    double tol = 1e-9;
    /// Restart cycles before giving up.
    std::size_t max_restarts = 500;
    /// Krylov basis size; 0 picks max(2·rank + 10, 24), capped by the matrix dimensions.
    std::size_t krylov_dim = 0;
    std::uint64_t seed = 20240601;
};

struct LanczosResult {
    Eigen::VectorXd sigma;
    Eigen::MatrixXd u; ///< rows × rank
    Eigen::MatrixXd v; ///< cols × rank
    std::vector<double> residuals;
    std::vector<bool> converged;
    std::size_t restarts = 0;
    std::size_t products = 0; ///< calls of A plus calls of Aᵀ
    bool all_converged = false;
};

/// Leading singular triplets of the rows × cols operator given by `apply` (A) and `apply_t` (Aᵀ),
/// by thick-restart Golub–Kahan–Lanczos bidiagonalization with full reorthogonalization.
/// Never throws on non-convergence; inspect `all_converged`.
LanczosResult lanczos_svd(std::size_t rows, std::size_t cols, const LinearMap& apply, const LinearMap& apply_t,
                          const LanczosOptions& options);

} // namespace shssa
