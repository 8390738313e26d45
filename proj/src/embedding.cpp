#include "shssa/embedding.hpp"

#include <algorithm>
#include <cmath>

#include "shssa/grid_fft.hpp"
#include "shssa/parallel.hpp"

namespace shssa {

namespace {

/// Grid-backed lookup from index to shape position.
class CellLookup {
public:
    explicit CellLookup(const Shape& s)
        : grid_(EmbeddingGrid::for_topology(s.topology(), s.bounds().max.x, s.bounds().max.y, false)),
          pos_(grid_.cells(), -1)
    {
        for (std::size_t k = 0; k < s.size(); ++k) pos_[grid_.offset(s[k])] = static_cast<std::int32_t>(k);
    }

    [[nodiscard]] std::int32_t find(const IndexPair& p) const noexcept
    {
        if (p.x < 1 || p.y < 1 || static_cast<std::size_t>(p.x) > grid_.nx()
            || static_cast<std::size_t>(p.y) > grid_.ny()) {
            return -1;
        }
        return pos_[grid_.offset(p)];
    }

private:
    EmbeddingGrid grid_;
    std::vector<std::int32_t> pos_;
};

std::int64_t round_count(double v)
{
    const double r = std::round(v);
    if (std::abs(v - r) > 0.25) {
        throw NumericalError("FFT count residual " + std::to_string(std::abs(v - r)) + " exceeds 0.25");
    }
    return static_cast<std::int64_t>(r);
}

std::vector<IndexPair> origins_direct(const Shape& region, const Shape& window)
{
    const CellLookup lookup(region);
    const auto& topo = region.topology();
    std::vector<IndexPair> out;
    for (const auto& kappa : region) {
        bool inside = true;
        for (const auto& ell : window) {
            if (lookup.find(cyclic_add(ell, kappa, topo)) < 0) {
                inside = false;
                break;
            }
        }
        if (inside) out.push_back(kappa);
    }
    return out;
}

std::vector<IndexPair> origins_fft(const Shape& region, const Shape& window)
{
    const auto& rb = region.bounds();
    const auto& wb = window.bounds();
    // Planar axes need room for every ℓ + κ - 1 without wrapping; circular ones wrap by definition.
    const auto& topo = region.topology();
    auto need_axis = [](Coord extent, const std::optional<Coord>& period) {
        return period ? std::min(extent, *period) : extent;
    };
    const auto grid = EmbeddingGrid::for_topology(topo, need_axis(rb.max.x + wb.max.x - 1, topo.period_x()),
                                                  need_axis(rb.max.y + wb.max.y - 1, topo.period_y()));
    const GridFft fft(grid);
    const auto counts = circular_correlate(fft, indicator(grid, region), indicator(grid, window));
    const auto need = static_cast<std::int64_t>(window.size());
    std::vector<IndexPair> out;
    for (const auto& kappa : region) {
        if (round_count(counts[grid.offset(kappa)]) == need) out.push_back(kappa);
    }
    return out;
}

std::vector<std::int64_t> weights_direct(const Shape& region, const Shape& window, const Shape& origins)
{
    const CellLookup lookup(region);
    const auto& topo = region.topology();
    std::vector<std::int64_t> w(region.size(), 0);
    for (const auto& kappa : origins) {
        for (const auto& ell : window) ++w[static_cast<std::size_t>(lookup.find(cyclic_add(ell, kappa, topo)))];
    }
    return w;
}

std::vector<std::int64_t> weights_fft(const Shape& region, const Shape& window, const Shape& origins)
{
    const auto grid = EmbeddingGrid::for_topology(region.topology(), region.bounds().max.x, region.bounds().max.y);
    const GridFft fft(grid);
    const auto conv = circular_convolve(fft, indicator(grid, window), indicator(grid, origins));
    std::vector<std::int64_t> w(region.size());
    for (std::size_t k = 0; k < region.size(); ++k) w[k] = round_count(conv[grid.offset(region[k])]);
    return w;
}

std::shared_ptr<const FiberIndex> build_fibers(const Shape& window, const Shape& origins, const Shape& covered)
{
    const CellLookup lookup(covered);
    const auto& topo = covered.topology();
    const std::size_t L = window.size();
    const std::size_t K = origins.size();
    auto f = std::make_shared<FiberIndex>();
    f->entry_cell.resize(L * K);
    f->cell_offsets.assign(covered.size() + 1, 0);
    for (std::size_t j = 0; j < K; ++j) {
        for (std::size_t i = 0; i < L; ++i) {
            const auto c = lookup.find(cyclic_add(window[i], origins[j], topo));
            f->entry_cell[i + j * L] = c;
            ++f->cell_offsets[static_cast<std::size_t>(c) + 1];
        }
    }
    for (std::size_t c = 0; c < covered.size(); ++c) f->cell_offsets[c + 1] += f->cell_offsets[c];
    f->cell_entries.resize(L * K);
    std::vector<std::size_t> fill(f->cell_offsets.begin(), f->cell_offsets.end() - 1);
    for (std::size_t e = 0; e < L * K; ++e) f->cell_entries[fill[static_cast<std::size_t>(f->entry_cell[e])]++] = e;
    return f;
}

/// Position in `arr` of every covered cell.
std::vector<std::size_t> covered_positions(const Shape& arr_shape, const Shape& covered)
{
    std::vector<std::size_t> pos(covered.size());
    if (arr_shape == covered) {
        for (std::size_t k = 0; k < pos.size(); ++k) pos[k] = k;
        return pos;
    }
    for (std::size_t k = 0; k < covered.size(); ++k) {
        auto p = arr_shape.position(covered[k]);
        if (!p) throw ShapeError("array does not cover embedding cell " + to_string(covered[k]));
        pos[k] = *p;
    }
    return pos;
}

template<class Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> embed_impl(const BasicShapedArray<Scalar>& arr,
                                                                 const EmbeddingPlan& plan)
{
    if (arr.shape().topology() != plan.topology()) throw TopologyError("array topology differs from the plan");
    const auto fibers = plan.fiber_index();
    const auto pos = covered_positions(arr.shape(), plan.covered());
    const auto L = static_cast<Eigen::Index>(plan.window_size());
    const auto K = static_cast<Eigen::Index>(plan.origin_count());
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> m(L, K);
    Scalar* out = m.data();
    const auto n = static_cast<std::ptrdiff_t>(L * K);
#pragma omp parallel for schedule(static) if (static_cast<std::size_t>(n) > parallel::min_parallel_length)
    for (std::ptrdiff_t e = 0; e < n; ++e) out[e] = arr[pos[static_cast<std::size_t>(fibers->entry_cell[e])]];
    return m;
}

void check_dims(const Eigen::MatrixXd& mat, const EmbeddingPlan& plan)
{
    if (static_cast<std::size_t>(mat.rows()) != plan.window_size()
        || static_cast<std::size_t>(mat.cols()) != plan.origin_count()) {
        throw ShapeError("matrix is " + std::to_string(mat.rows()) + "x" + std::to_string(mat.cols())
                         + ", plan expects " + std::to_string(plan.window_size()) + "x"
                         + std::to_string(plan.origin_count()));
    }
}

/// Mean of every fiber.
std::vector<double> fiber_means(const Eigen::MatrixXd& mat, const FiberIndex& f, std::size_t cells)
{
    std::vector<double> mean(cells);
    const double* data = mat.data();
    const auto n = static_cast<std::ptrdiff_t>(cells);
#pragma omp parallel for schedule(static) if (cells > parallel::min_parallel_length)
    for (std::ptrdiff_t c = 0; c < n; ++c) {
        const auto b = f.cell_offsets[static_cast<std::size_t>(c)];
        const auto e = f.cell_offsets[static_cast<std::size_t>(c) + 1];
        double s = 0.0;
        for (auto k = b; k < e; ++k) s += data[f.cell_entries[k]];
        mean[static_cast<std::size_t>(c)] = s / static_cast<double>(e - b);
    }
    return mean;
}

} // namespace

std::shared_ptr<const FiberIndex> EmbeddingPlan::fiber_index() const
{
    if (d_->fibers) return d_->fibers;
    return build_fibers(d_->window, d_->origins, d_->covered);
}

double EmbeddingPlan::trajectory_norm_sq(const ShapedArray& arr) const
{
    const auto pos = covered_positions(arr.shape(), d_->covered);
    double s = 0.0;
    for (std::size_t k = 0; k < pos.size(); ++k) {
        const double x = arr[pos[k]];
        s += static_cast<double>(d_->weights[k]) * x * x;
    }
    return s;
}

std::vector<IndexPair> enumerate_origins(const Shape& region, const Shape& window)
{
    std::vector<IndexPair> out;
    for (const auto& kappa : region) {
        const bool inside = std::ranges::all_of(window, [&](const IndexPair& ell) {
            return region.contains(cyclic_add(ell, kappa, region.topology()));
        });
        if (inside) out.push_back(kappa);
    }
    return out;
}

EmbeddingPlan plan(const Shape& region, const Shape& window, const PlanOptions& options)
{
    if (region.topology() != window.topology()) {
        throw TopologyError("window topology " + to_string(window.topology()) + " differs from region topology "
                            + to_string(region.topology()));
    }
    const std::size_t N = region.size();
    const std::size_t L = window.size();

    auto kappas = N * L <= options.direct_limit ? origins_direct(region, window) : origins_fft(region, window);
    if (kappas.empty()) {
        throw WindowError("window of " + std::to_string(L) + " cells has no admissible origin in the region");
    }
    Shape origins(region.topology(), std::move(kappas));
    const std::size_t K = origins.size();

    const auto w = L * K <= options.direct_limit ? weights_direct(region, window, origins)
                                                 : weights_fft(region, window, origins);
    std::vector<IndexPair> covered_idx;
    std::vector<std::int64_t> covered_w;
    std::vector<IndexPair> dropped;
    for (std::size_t k = 0; k < N; ++k) {
        if (w[k] > 0) {
            covered_idx.push_back(region[k]);
            covered_w.push_back(w[k]);
        } else {
            dropped.push_back(region[k]);
        }
    }
    Shape covered(region.topology(), std::move(covered_idx));
    CountArray weights(covered, std::move(covered_w));
    std::shared_ptr<const FiberIndex> fibers;
    if (L * K <= options.fiber_limit) fibers = build_fibers(window, origins, covered);

    return EmbeddingPlan(std::make_shared<const EmbeddingPlan::Data>(EmbeddingPlan::Data{
        region, window, std::move(origins), std::move(covered), std::move(dropped), std::move(weights),
        std::move(fibers)}));
}

Eigen::MatrixXd embed_dense(const ShapedArray& arr, const EmbeddingPlan& plan) { return embed_impl(arr, plan); }

Eigen::MatrixXcd embed_dense(const ComplexShapedArray& arr, const EmbeddingPlan& plan)
{
    return embed_impl(arr, plan);
}

Eigen::MatrixXd project_quasi_hankel(const Eigen::MatrixXd& mat, const EmbeddingPlan& plan)
{
    check_dims(mat, plan);
    const auto fibers = plan.fiber_index();
    const auto mean = fiber_means(mat, *fibers, plan.covered().size());
    Eigen::MatrixXd out(mat.rows(), mat.cols());
    double* o = out.data();
    const auto n = static_cast<std::ptrdiff_t>(out.size());
#pragma omp parallel for schedule(static) if (static_cast<std::size_t>(n) > parallel::min_parallel_length)
    for (std::ptrdiff_t e = 0; e < n; ++e) o[e] = mean[static_cast<std::size_t>(fibers->entry_cell[e])];
    return out;
}

ShapedArray unembed(const Eigen::MatrixXd& mat, const EmbeddingPlan& plan, double rel_tol)
{
    check_dims(mat, plan);
    const auto fibers = plan.fiber_index();
    const auto mean = fiber_means(mat, *fibers, plan.covered().size());
    const double scale = mat.size() > 0 ? mat.cwiseAbs().maxCoeff() : 0.0;
    const double* data = mat.data();
    for (std::size_t e = 0; e < static_cast<std::size_t>(mat.size()); ++e) {
        const auto c = static_cast<std::size_t>(fibers->entry_cell[e]);
        if (std::abs(data[e] - mean[c]) > rel_tol * scale) {
            const auto i = e % plan.window_size();
            const auto j = e / plan.window_size();
            throw StructureError("matrix is not quasi-Hankel: entry (" + std::to_string(i + 1) + ","
                                 + std::to_string(j + 1) + ") differs from its fiber mean at cell "
                                 + to_string(plan.covered()[c]));
        }
    }
    return {plan.covered(), mean};
}

} // namespace shssa
