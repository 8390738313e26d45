#include "shssa/ssa.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "shssa/fast_ops.hpp"
#include "shssa/lanczos.hpp"

namespace shssa {

std::string to_string(SvdMethod m)
{
    return m == SvdMethod::dense ? "dense" : "lanczos";
}

namespace {

/// Fixes the sign so the largest-magnitude entry of u is positive.
void orient(Eigen::Ref<Eigen::VectorXd> u, Eigen::Ref<Eigen::VectorXd> v)
{
    Eigen::Index at = 0;
    u.cwiseAbs().maxCoeff(&at);
    if (u[at] < 0) {
        u = -u;
        v = -v;
    }
}

std::vector<double> to_std(const Eigen::VectorXd& x) { return {x.data(), x.data() + x.size()}; }

void fill_triples(Decomposition& dec, const Eigen::VectorXd& sigma, Eigen::MatrixXd& u, Eigen::MatrixXd& v,
                  const std::vector<double>& residuals, const std::vector<bool>& converged)
{
    const auto& plan = dec.plan;
    dec.triples.clear();
    for (Eigen::Index i = 0; i < sigma.size(); ++i) {
        orient(u.col(i), v.col(i));
        Eigentriple t{
            static_cast<std::size_t>(i + 1),
            sigma[i],
            ShapedArray(plan.window(), to_std(u.col(i))),
            ShapedArray(plan.origins(), to_std(v.col(i))),
            residuals[static_cast<std::size_t>(i)],
            converged[static_cast<std::size_t>(i)],
        };
        dec.triples.push_back(std::move(t));
    }
}

} // namespace

Decomposition decompose(const ShapedArray& arr, const Shape& window, const DecomposeOptions& options)
{
    return decompose(arr, plan(arr.shape(), window, options.plan), options);
}

Decomposition decompose(const ShapedArray& arr, const EmbeddingPlan& pl, const DecomposeOptions& options)
{
    const std::size_t L = pl.window_size();
    const std::size_t K = pl.origin_count();
    const std::size_t dmin = std::min(L, K);
    if (options.neig < 1 || options.neig > dmin) {
        throw ConfigError("number of eigentriples must be in [1, " + std::to_string(dmin) + "], got "
                          + std::to_string(options.neig));
    }

    Decomposition dec{pl, {}, pl.trajectory_norm_sq(arr), options.seed, SvdMethod::dense, 0, 0};
    const bool small = dmin <= options.dense_threshold && L * K <= options.dense_entry_limit;
    dec.method = options.force_method.value_or(small ? SvdMethod::dense : SvdMethod::lanczos);
    const auto nev = static_cast<Eigen::Index>(options.neig);

    if (dec.method == SvdMethod::dense) {
        const Eigen::MatrixXd X = embed_dense(arr, pl);
        Eigen::BDCSVD<Eigen::MatrixXd> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
        Eigen::VectorXd sigma = svd.singularValues().head(nev);
        Eigen::MatrixXd u = svd.matrixU().leftCols(nev);
        Eigen::MatrixXd v = svd.matrixV().leftCols(nev);
        std::vector<double> res(options.neig);
        for (Eigen::Index i = 0; i < nev; ++i) {
            res[static_cast<std::size_t>(i)] = std::max((X * v.col(i) - sigma[i] * u.col(i)).norm(),
                                                        (X.transpose() * u.col(i) - sigma[i] * v.col(i)).norm());
        }
        fill_triples(dec, sigma, u, v, res, std::vector<bool>(options.neig, true));
        return dec;
    }

    const CirculantOperator op(arr, pl);
    const LinearMap apply = [&op](std::span<const double> x, std::span<double> y) { op.matvec(x, y); };
    const LinearMap apply_t = [&op](std::span<const double> x, std::span<double> y) { op.rmatvec(x, y); };
    LanczosOptions lo;
    lo.rank = options.neig;
    lo.tol = options.tol;
    lo.max_restarts = options.max_iter;
    lo.seed = options.seed;
    auto lr = lanczos_svd(L, K, apply, apply_t, lo);
    dec.restarts = lr.restarts;
    dec.products = lr.products;

    std::vector<double> res(options.neig);
    std::vector<bool> conv(options.neig);
    const double scale = lr.sigma.size() ? lr.sigma[0] : 0.0;
    for (Eigen::Index i = 0; i < nev; ++i) {
        const auto xv = op.matvec(std::span<const double>(lr.v.col(i).data(), K));
        const auto xtu = op.rmatvec(std::span<const double>(lr.u.col(i).data(), L));
        const double r1 = (Eigen::Map<const Eigen::VectorXd>(xv.data(), static_cast<Eigen::Index>(L))
                           - lr.sigma[i] * lr.u.col(i)).norm();
        const double r2 = (Eigen::Map<const Eigen::VectorXd>(xtu.data(), static_cast<Eigen::Index>(K))
                           - lr.sigma[i] * lr.v.col(i)).norm();
        res[static_cast<std::size_t>(i)] = std::max(r1, r2);
        // The iteration's residual estimate decides convergence; the explicit one is reported.
        conv[static_cast<std::size_t>(i)] = lr.converged[static_cast<std::size_t>(i)]
                                            || res[static_cast<std::size_t>(i)] <= options.tol * scale;
    }
    dec.products += 2 * options.neig;
    fill_triples(dec, lr.sigma, lr.u, lr.v, res, conv);

    if (!std::ranges::all_of(conv, [](bool b) { return b; })) {
        const auto n_ok = static_cast<std::size_t>(std::ranges::count(conv, true));
        throw ConvergenceError("truncated SVD did not converge within " + std::to_string(options.max_iter)
                                   + " restarts (" + std::to_string(n_ok) + " of " + std::to_string(options.neig)
                                   + " triples converged)",
                               std::move(dec));
    }
    return dec;
}

std::vector<ShapedArray> reconstruct(const Decomposition& dec, const Grouping& groups)
{
    std::vector<bool> used(dec.triples.size(), false);
    for (const auto& g : groups) {
        if (g.empty()) throw ConfigError("empty group in grouping");
        for (auto i : g) {
            if (i < 1 || i > dec.triples.size()) {
                throw ConfigError("eigentriple " + std::to_string(i) + " out of range [1, "
                                  + std::to_string(dec.triples.size()) + "]");
            }
            if (used[i - 1]) throw ConfigError("eigentriple " + std::to_string(i) + " appears in two groups");
            used[i - 1] = true;
        }
    }
    if (groups.empty()) return {};

    const RankOneHankelizer h(dec.plan);
    std::vector<std::optional<ShapedArray>> out(groups.size());
    const auto n = static_cast<std::ptrdiff_t>(groups.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t gi = 0; gi < n; ++gi) {
        const auto& g = groups[static_cast<std::size_t>(gi)];
        std::vector<double> sigma;
        std::vector<std::span<const double>> us;
        std::vector<std::span<const double>> vs;
        for (auto i : g) {
            const auto& t = dec.triples[i - 1];
            sigma.push_back(t.sigma);
            us.push_back(t.u.values());
            vs.push_back(t.v.values());
        }
        out[static_cast<std::size_t>(gi)] = h.sum(sigma, us, vs);
    }
    std::vector<ShapedArray> result;
    result.reserve(out.size());
    for (auto& r : out) result.push_back(std::move(*r));
    return result;
}

std::vector<double> contributions(const Decomposition& dec)
{
    std::vector<double> c;
    c.reserve(dec.triples.size());
    for (const auto& t : dec.triples) {
        c.push_back(dec.frobenius_sq > 0 ? 100.0 * t.sigma * t.sigma / dec.frobenius_sq : 0.0);
    }
    return c;
}

} // namespace shssa
