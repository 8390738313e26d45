#include "shssa/lanczos.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "shssa/error.hpp"

namespace shssa {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Two passes of classical Gram–Schmidt against the first `count` columns of `basis`.
void orthogonalize(VectorXd& w, const MatrixXd& basis, Index count)
{
    if (count == 0) return;
    const auto q = basis.leftCols(count);
    for (int pass = 0; pass < 2; ++pass) w.noalias() -= q * (q.transpose() * w);
}

VectorXd random_unit(Index n, std::mt19937_64& rng)
{
    std::normal_distribution<double> dist;
    VectorXd w(n);
    for (Index i = 0; i < n; ++i) w[i] = dist(rng);
    return w.normalized();
}

/// Random unit vector orthogonal to the first `count` columns of `basis`, or zero if they span everything.
VectorXd random_orthogonal(const MatrixXd& basis, Index count, std::mt19937_64& rng)
{
    const Index n = basis.rows();
    if (count >= n) return VectorXd::Zero(n);
    for (int attempt = 0; attempt < 4; ++attempt) {
        VectorXd w = random_unit(n, rng);
        orthogonalize(w, basis, count);
        const double nw = w.norm();
        if (nw > 1e-8) return w / nw;
    }
    return VectorXd::Zero(n);
}

} // namespace

LanczosResult lanczos_svd(std::size_t rows, std::size_t cols, const LinearMap& apply, const LinearMap& apply_t,
                          const LanczosOptions& options)
{
    const auto m = static_cast<Index>(rows);
    const auto n = static_cast<Index>(cols);
    const auto nev = static_cast<Index>(options.rank);
    const Index dmin = std::min(m, n);
    if (nev < 1 || nev > dmin) {
        throw ConfigError("requested " + std::to_string(nev) + " singular triplets of a " + std::to_string(m) + "x"
                          + std::to_string(n) + " operator");
    }
    Index k = options.krylov_dim ? static_cast<Index>(options.krylov_dim) : std::max<Index>(2 * nev + 10, 24);
    k = std::clamp(k, nev, dmin);

    std::mt19937_64 rng(options.seed);
    MatrixXd V = MatrixXd::Zero(n, k + 1);
    MatrixXd U = MatrixXd::Zero(m, k);
    MatrixXd B = MatrixXd::Zero(k, k);
    V.col(0) = random_unit(n, rng);

    // Norms below this fraction of the largest coefficient seen count as breakdown.
    constexpr double breakdown = 1e-12;
    double anorm = 0.0;
    double beta_last = 0.0;
    Index start = 0;

    LanczosResult res;
    VectorXd p(m);
    VectorXd r(n);

    for (std::size_t cycle = 0;; ++cycle) {
        for (Index j = start; j < k; ++j) {
            apply(std::span<const double>(V.col(j).data(), static_cast<std::size_t>(n)),
                  std::span<double>(p.data(), static_cast<std::size_t>(m)));
            ++res.products;
            if (j == start && start > 0) {
                p.noalias() -= U.leftCols(start) * B.col(start).head(start);
            } else if (j > 0) {
                p -= B(j - 1, j) * U.col(j - 1);
            }
            orthogonalize(p, U, j);
            double alpha = p.norm();
            anorm = std::max(anorm, alpha);
            if (alpha <= breakdown * anorm) {
                alpha = 0.0;
                p = random_orthogonal(U, j, rng);
            } else {
                p /= alpha;
            }
            U.col(j) = p;
            B(j, j) = alpha;

            apply_t(std::span<const double>(U.col(j).data(), static_cast<std::size_t>(m)),
                    std::span<double>(r.data(), static_cast<std::size_t>(n)));
            ++res.products;
            r -= alpha * V.col(j);
            orthogonalize(r, V, j + 1);
            double beta = r.norm();
            anorm = std::max(anorm, beta);
            if (beta <= breakdown * anorm) {
                beta = 0.0;
                r = random_orthogonal(V, j + 1, rng);
            } else {
                r /= beta;
            }
            V.col(j + 1) = r;
            if (j + 1 < k) {
                B(j, j + 1) = beta;
            } else {
                beta_last = beta;
            }
        }

        if (k == dmin) {
            // U or V spans its whole space, so A = U [B | β e_k] V_{k+1}ᵀ holds exactly.
            MatrixXd Bhat = MatrixXd::Zero(k, k + 1);
            Bhat.leftCols(k) = B;
            Bhat(k - 1, k) = beta_last;
            Eigen::JacobiSVD<MatrixXd> full(Bhat, Eigen::ComputeThinU | Eigen::ComputeThinV);
            res.restarts = cycle;
            res.all_converged = true;
            res.residuals.assign(static_cast<std::size_t>(nev), 0.0);
            res.converged.assign(static_cast<std::size_t>(nev), true);
            res.sigma = full.singularValues().head(nev);
            res.u = U * full.matrixU().leftCols(nev);
            res.v = V * full.matrixV().leftCols(nev);
            return res;
        }

        Eigen::JacobiSVD<MatrixXd> svd(B, Eigen::ComputeFullU | Eigen::ComputeFullV);
        const VectorXd& s = svd.singularValues();
        const MatrixXd& P = svd.matrixU();
        const MatrixXd& Q = svd.matrixV();

        res.residuals.assign(static_cast<std::size_t>(nev), 0.0);
        res.converged.assign(static_cast<std::size_t>(nev), false);
        bool done = true;
        for (Index i = 0; i < nev; ++i) {
            const double rho = std::abs(beta_last * P(k - 1, i));
            res.residuals[static_cast<std::size_t>(i)] = rho;
            const bool ok = rho <= options.tol * s[0];
            res.converged[static_cast<std::size_t>(i)] = ok;
            done = done && ok;
        }
        res.restarts = cycle;

        if (done || cycle >= options.max_restarts) {
            res.all_converged = done;
            res.sigma = s.head(nev);
            res.u = U * P.leftCols(nev);
            res.v = V.leftCols(k) * Q.leftCols(nev);
            return res;
        }

        // Thick restart: keep the leading Ritz vectors plus the residual direction.
        const Index keep = std::min(nev + (k - nev) / 2, k - 1);
        const MatrixXd vk = V.leftCols(k) * Q.leftCols(keep);
        const MatrixXd uk = U * P.leftCols(keep);
        const VectorXd vnext = V.col(k);
        V.leftCols(keep) = vk;
        V.col(keep) = vnext;
        U.leftCols(keep) = uk;
        B.setZero();
        for (Index i = 0; i < keep; ++i) {
            B(i, i) = s[i];
            B(i, keep) = beta_last * P(k - 1, i);
        }
        start = keep;
    }
}

} // namespace shssa
