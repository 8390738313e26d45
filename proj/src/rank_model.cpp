#include "shssa/rank_model.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "shssa/embedding.hpp"
#include "shssa/error.hpp"
#include "shssa/grid_fft.hpp"

namespace shssa {

namespace {

std::string describe(Complex z)
{
    return "(" + std::to_string(z.real()) + (z.imag() < 0 ? "" : "+") + std::to_string(z.imag()) + "i)";
}

/// zᵉ by modulus and argument; keeps |z| = 1 bases on the unit circle.
Complex power(Complex z, Coord e)
{
    if (e == 0) return {1.0, 0.0};
    const auto de = static_cast<double>(e);
    return std::polar(std::pow(std::abs(z), de), std::arg(z) * de);
}

Coord reduce(Coord c, const std::optional<Coord>& period)
{
    return period ? c % *period : c;
}

template<class Matrix>
std::vector<double> singular_values(const Matrix& X)
{
    const auto s = Eigen::BDCSVD<Matrix>(X).singularValues();
    return {s.data(), s.data() + s.size()};
}

std::size_t count_above(const std::vector<double>& s)
{
    if (s.empty() || s[0] == 0.0) return 0;
    return static_cast<std::size_t>(std::ranges::count_if(s, [&](double v) { return v > rank_tol * s[0]; }));
}

} // namespace

ExponentialComponent ExponentialComponent::constant(Complex mu, Complex nu, Complex amplitude)
{
    return {mu, nu, {{{0, 0}, amplitude}}};
}

ComponentList real_harmonic(double fx, double fy, double amplitude, double phase, double rate_x, double rate_y)
{
    const double two_pi = 2.0 * std::numbers::pi;
    const Complex mu = std::polar(std::exp(rate_x), two_pi * fx);
    const Complex nu = std::polar(std::exp(rate_y), two_pi * fy);
    const Complex a = std::polar(amplitude / 2.0, phase);
    if (std::abs(mu.imag()) <= 1e-13 && std::abs(nu.imag()) <= 1e-13) {
        // Real bases: the pair would coincide, so fold it into one real term.
        return {ExponentialComponent::constant(mu.real(), nu.real(), 2.0 * a.real())};
    }
    return {ExponentialComponent::constant(mu, nu, a),
            ExponentialComponent::constant(std::conj(mu), std::conj(nu), std::conj(a))};
}

void validate(std::span<const ExponentialComponent> components, const Topology& topo)
{
    for (std::size_t k = 0; k < components.size(); ++k) {
        const auto& c = components[k];
        const std::string who = "component " + std::to_string(k + 1);
        if (c.poly.empty()) throw ConfigError(who + " has no polynomial coefficients");
        for (const auto& [deg, coef] : c.poly) {
            (void)coef;
            if (deg.first < 0 || deg.second < 0 || deg.first + deg.second > max_poly_degree) {
                throw ConfigError(who + ": polynomial degree (" + std::to_string(deg.first) + ","
                                  + std::to_string(deg.second) + ") outside total degree 0.."
                                  + std::to_string(max_poly_degree));
            }
            if (topo.circular_x() && deg.first > 0) {
                throw TopologyError(who + ": polynomial in l is not periodic along the circular x axis");
            }
            if (topo.circular_y() && deg.second > 0) {
                throw TopologyError(who + ": polynomial in n is not periodic along the circular y axis");
            }
        }
        if (auto t = topo.period_x(); t && std::abs(power(c.mu, *t) - 1.0) > periodicity_tol) {
            throw TopologyError(who + ": mu" + describe(c.mu) + "^" + std::to_string(*t) + " != 1 on the circular x axis");
        }
        if (auto t = topo.period_y(); t && std::abs(power(c.nu, *t) - 1.0) > periodicity_tol) {
            throw TopologyError(who + ": nu" + describe(c.nu) + "^" + std::to_string(*t) + " != 1 on the circular y axis");
        }
        for (std::size_t j = 0; j < k; ++j) {
            const auto& o = components[j];
            if (std::max(std::abs(o.mu - c.mu), std::abs(o.nu - c.nu)) <= 1e-12) {
                throw ConfigError("components " + std::to_string(j + 1) + " and " + std::to_string(k + 1)
                                  + " share the pair (mu, nu)");
            }
        }
    }
}

ComplexShapedArray generate_complex(std::span<const ExponentialComponent> components, const Shape& region)
{
    const auto& topo = region.topology();
    validate(components, topo);
    std::vector<Complex> out(region.size(), Complex{});
    for (const auto& c : components) {
        for (std::size_t i = 0; i < region.size(); ++i) {
            const auto& p = region[i];
            const Coord el = reduce(p.x, topo.period_x());
            const Coord en = reduce(p.y, topo.period_y());
            Complex amp{};
            for (const auto& [deg, coef] : c.poly) {
                amp += coef * std::pow(static_cast<double>(p.x), deg.first) * std::pow(static_cast<double>(p.y), deg.second);
            }
            out[i] += amp * power(c.mu, el) * power(c.nu, en);
        }
    }
    return {region, std::move(out)};
}

ShapedArray generate(std::span<const ExponentialComponent> components, const Shape& region)
{
    const auto z = generate_complex(components, region);
    double scale = 1.0;
    double worst = 0.0;
    for (const auto& v : z.values()) {
        scale = std::max(scale, std::abs(v.real()));
        worst = std::max(worst, std::abs(v.imag()));
    }
    if (worst > 1e-10 * scale) {
        throw ConfigError("generated array is complex (max |imag| = " + std::to_string(worst)
                          + "); components must come in conjugate pairs for real output");
    }
    std::vector<double> re(z.size());
    std::ranges::transform(z.values(), re.begin(), [](Complex v) { return v.real(); });
    return {region, std::move(re)};
}

std::vector<double> trajectory_spectrum(const ShapedArray& arr, const Shape& window)
{
    return singular_values(embed_dense(arr, plan(arr.shape(), window)));
}

std::size_t shaped_rank(const ShapedArray& arr, const Shape& window)
{
    return count_above(trajectory_spectrum(arr, window));
}

std::size_t shaped_rank(const ComplexShapedArray& arr, const Shape& window)
{
    return count_above(singular_values(embed_dense(arr, plan(arr.shape(), window))));
}

ComponentList dft_rank_decomposition(const ShapedArray& arr)
{
    const auto& region = arr.shape();
    const auto& topo = region.topology();
    if (topo.kind() != TopologyKind::toroidal) {
        throw TopologyError("DFT decomposition needs a toroidal topology, got " + to_string(topo));
    }
    const auto tx = static_cast<std::size_t>(*topo.period_x());
    const auto ty = static_cast<std::size_t>(*topo.period_y());
    if (region.size() != tx * ty) {
        throw ShapeError("DFT decomposition needs the full " + std::to_string(tx) + "x" + std::to_string(ty)
                         + " grid, got " + std::to_string(region.size()) + " cells");
    }
    const EmbeddingGrid grid(tx, ty);
    const GridFft fft(grid);
    // Region order is x-major, which is the grid's storage order.
    FftBuffer<double> in(grid.cells());
    std::ranges::copy(arr.values(), in.span().begin());
    FftBuffer<Complex> spec(grid.spectrum_cells());
    fft.forward(in.span(), spec.span());

    const std::size_t half = ty / 2 + 1;
    auto coefficient = [&](std::size_t p, std::size_t q) {
        if (q < half) return spec.span()[p * half + q];
        return std::conj(spec.span()[((tx - p) % tx) * half + (ty - q)]);
    };
    const double two_pi = 2.0 * std::numbers::pi;
    const double norm = 1.0 / static_cast<double>(tx * ty);
    std::vector<std::pair<std::pair<std::size_t, std::size_t>, Complex>> terms;
    double peak = 0.0;
    for (std::size_t p = 0; p < tx; ++p) {
        for (std::size_t q = 0; q < ty; ++q) {
            const Complex c = coefficient(p, q) * norm;
            peak = std::max(peak, std::abs(c));
            terms.push_back({{p, q}, c});
        }
    }
    ComponentList out;
    if (peak == 0.0) return out;
    for (const auto& [pq, c] : terms) {
        if (std::abs(c) <= 1e-10 * peak) continue;
        const double ax = two_pi * static_cast<double>(pq.first) / static_cast<double>(tx);
        const double ay = two_pi * static_cast<double>(pq.second) / static_cast<double>(ty);
        // The DFT is indexed from 0 while arrays start at 1, hence the μ⁻¹ν⁻¹ factor.
        const Complex a = c * std::polar(1.0, -ax - ay);
        out.push_back(ExponentialComponent::constant(std::polar(1.0, ax), std::polar(1.0, ay), a));
    }
    return out;
}

} // namespace shssa
