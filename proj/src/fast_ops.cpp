#include "shssa/fast_ops.hpp"

#include <cmath>

namespace shssa {

namespace {

std::vector<double> values_on_grid(const EmbeddingGrid& grid, const ShapedArray& arr, const Shape& covered)
{
    std::vector<double> g(grid.cells(), 0.0);
    if (arr.shape() == covered) {
        const auto off = grid.offsets(covered);
        kernels::scatter(arr.values(), off, g);
        return g;
    }
    for (const auto& p : covered) g[grid.offset(p)] = arr.at(p);
    return g;
}

void check_size(std::size_t got, std::size_t want, const char* what)
{
    if (got != want) {
        throw ShapeError(std::string(what) + ": expected length " + std::to_string(want) + ", got "
                         + std::to_string(got));
    }
}

} // namespace

EmbeddingGrid circulant_grid(const EmbeddingPlan& plan, bool pad)
{
    const auto& b = plan.region().bounds();
    return EmbeddingGrid::for_topology(plan.topology(), b.max.x, b.max.y, pad);
}

CirculantOperator::CirculantOperator(const ShapedArray& arr, EmbeddingPlan plan, bool pad)
    : plan_(std::move(plan)), fft_(std::make_shared<const GridFft>(circulant_grid(plan_, pad)))
{
    if (arr.shape().topology() != plan_.topology()) throw TopologyError("array topology differs from the plan");
    const auto& grid = fft_->grid();
    const auto data = values_on_grid(grid, arr, plan_.covered());
    spectrum_.resize(grid.spectrum_cells());
    fft_->forward(data, spectrum_);
    window_offsets_ = grid.offsets(plan_.window());
    origin_offsets_ = grid.offsets(plan_.origins());
}

void CirculantOperator::correlate(std::span<const double> in, std::span<const std::size_t> in_offsets,
                                  std::span<const std::size_t> out_offsets, std::span<double> out) const
{
    const auto& grid = fft_->grid();
    std::vector<double> g(grid.cells(), 0.0);
    std::vector<std::complex<double>> s(grid.spectrum_cells());
    kernels::scatter(in, in_offsets, g);
    fft_->forward(g, s);
    // (Xv)(ℓ) = Σ_κ x(ℓ+κ-1) v(κ): a circular cross-correlation of the data with the scattered vector.
    kernels::multiply_conj(spectrum_, s, s);
    fft_->inverse(s, g);
    kernels::gather(g, out_offsets, 1.0 / static_cast<double>(grid.cells()), out);
}

void CirculantOperator::matvec(std::span<const double> v, std::span<double> out) const
{
    check_size(v.size(), cols(), "matvec input");
    check_size(out.size(), rows(), "matvec output");
    correlate(v, origin_offsets_, window_offsets_, out);
}

std::vector<double> CirculantOperator::matvec(std::span<const double> v) const
{
    std::vector<double> out(rows());
    matvec(v, out);
    return out;
}

void CirculantOperator::rmatvec(std::span<const double> u, std::span<double> out) const
{
    check_size(u.size(), rows(), "rmatvec input");
    check_size(out.size(), cols(), "rmatvec output");
    correlate(u, window_offsets_, origin_offsets_, out);
}

std::vector<double> CirculantOperator::rmatvec(std::span<const double> u) const
{
    std::vector<double> out(cols());
    rmatvec(u, out);
    return out;
}

RankOneHankelizer::RankOneHankelizer(EmbeddingPlan plan, bool pad)
    : plan_(std::move(plan)), fft_(std::make_shared<const GridFft>(circulant_grid(plan_, pad)))
{
    const auto& grid = fft_->grid();
    window_offsets_ = grid.offsets(plan_.window());
    origin_offsets_ = grid.offsets(plan_.origins());
    covered_offsets_ = grid.offsets(plan_.covered());
}

ShapedArray RankOneHankelizer::sum(std::span<const double> sigma, std::span<const std::span<const double>> u,
                                   std::span<const std::span<const double>> v) const
{
    if (u.size() != sigma.size() || v.size() != sigma.size()) {
        throw ShapeError("rank-one sum: sigma, U and V term counts differ");
    }
    const auto& grid = fft_->grid();
    std::vector<std::complex<double>> acc(grid.spectrum_cells(), {0.0, 0.0});
    std::vector<std::complex<double>> us(grid.spectrum_cells());
    std::vector<std::complex<double>> vs(grid.spectrum_cells());
    std::vector<double> g(grid.cells());
    for (std::size_t k = 0; k < sigma.size(); ++k) {
        check_size(u[k].size(), plan_.window_size(), "left vector");
        check_size(v[k].size(), plan_.origin_count(), "right vector");
        std::fill(g.begin(), g.end(), 0.0);
        kernels::scatter(u[k], window_offsets_, g);
        fft_->forward(g, us);
        std::fill(g.begin(), g.end(), 0.0);
        kernels::scatter(v[k], origin_offsets_, g);
        fft_->forward(g, vs);
        kernels::multiply_accumulate(us, vs, sigma[k], acc);
    }
    fft_->inverse(acc, g);
    std::vector<double> out(plan_.covered().size());
    kernels::gather(g, covered_offsets_, 1.0 / static_cast<double>(grid.cells()), out);
    const auto& w = plan_.weights();
    for (std::size_t k = 0; k < out.size(); ++k) out[k] /= static_cast<double>(w[k]);
    return {plan_.covered(), std::move(out)};
}

ShapedArray rank_one_unembed(double sigma, const ShapedArray& u, const ShapedArray& v, const EmbeddingPlan& plan)
{
    if (!(u.shape() == plan.window())) throw ShapeError("left vector must be shaped like the window");
    if (!(v.shape() == plan.origins())) throw ShapeError("right vector must be shaped like the origin set");
    const RankOneHankelizer h(plan);
    const double s[] = {sigma};
    const std::span<const double> us[] = {u.values()};
    const std::span<const double> vs[] = {v.values()};
    return h.sum(s, us, vs);
}

CountArray weights_via_convolution(const EmbeddingPlan& plan)
{
    const auto grid = circulant_grid(plan);
    const GridFft fft(grid);
    const auto conv = circular_convolve(fft, indicator(grid, plan.window()), indicator(grid, plan.origins()));
    const auto& covered = plan.covered();
    std::vector<std::int64_t> w(covered.size());
    for (std::size_t k = 0; k < covered.size(); ++k) {
        const double c = conv[grid.offset(covered[k])];
        const double r = std::round(c);
        if (std::abs(c - r) > 0.25) {
            throw NumericalError("weight convolution residual " + std::to_string(std::abs(c - r))
                                 + " at cell " + to_string(covered[k]));
        }
        w[k] = static_cast<std::int64_t>(r);
    }
    return {covered, std::move(w)};
}

namespace serial {

namespace {

struct DirectTerms {
    EmbeddingGrid grid;
    std::vector<double> values;
};

DirectTerms direct_terms(const ShapedArray& arr, const EmbeddingPlan& plan)
{
    auto grid = circulant_grid(plan, false);
    auto values = values_on_grid(grid, arr, plan.covered());
    return {grid, std::move(values)};
}

} // namespace

std::vector<double> matvec(const ShapedArray& arr, const EmbeddingPlan& plan, std::span<const double> v)
{
    check_size(v.size(), plan.origin_count(), "matvec input");
    const auto t = direct_terms(arr, plan);
    const auto& topo = plan.topology();
    std::vector<double> out(plan.window_size(), 0.0);
    for (std::size_t i = 0; i < out.size(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < v.size(); ++j) {
            s += t.values[t.grid.offset(cyclic_add(plan.window()[i], plan.origins()[j], topo))] * v[j];
        }
        out[i] = s;
    }
    return out;
}

std::vector<double> rmatvec(const ShapedArray& arr, const EmbeddingPlan& plan, std::span<const double> u)
{
    check_size(u.size(), plan.window_size(), "rmatvec input");
    const auto t = direct_terms(arr, plan);
    const auto& topo = plan.topology();
    std::vector<double> out(plan.origin_count(), 0.0);
    for (std::size_t j = 0; j < out.size(); ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            s += t.values[t.grid.offset(cyclic_add(plan.window()[i], plan.origins()[j], topo))] * u[i];
        }
        out[j] = s;
    }
    return out;
}

} // namespace serial

} // namespace shssa
