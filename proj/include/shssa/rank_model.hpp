#pragma once

#include <complex>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "shssa/shape.hpp"

namespace shssa {

using Complex = std::complex<double>;

/// P(l, n) μˡ νⁿ. The polynomial maps (degree in l, degree in n) to its coefficient.
struct ExponentialComponent {
    Complex mu{1.0, 0.0};
    Complex nu{1.0, 0.0};
    std::map<std::pair<int, int>, Complex> poly{{{0, 0}, Complex{1.0, 0.0}}};

    /// A μˡ νⁿ.
    static ExponentialComponent constant(Complex mu, Complex nu, Complex amplitude);
};

using ComponentList = std::vector<ExponentialComponent>;

inline constexpr int max_poly_degree = 4;
inline constexpr double periodicity_tol = 1e-10;
inline constexpr double rank_tol = 1e-8;

/// amplitude · cos(2π(fx·l + fy·n) + phase) · exp(rate_x·l + rate_y·n) as a conjugate pair.
ComponentList real_harmonic(double fx, double fy, double amplitude, double phase = 0.0, double rate_x = 0.0,
                            double rate_y = 0.0);

/// Throws TopologyError when a base is not a root of unity of a finite period or the polynomial
/// depends on a circular coordinate, ConfigError for duplicate (μ, ν) pairs or degree > 4.
void validate(std::span<const ExponentialComponent> components, const Topology& topo);

/// Σₖ Pₖ(l, n) μₖˡ νₖⁿ on `region`. Exponents along circular axes are reduced modulo the period.
ComplexShapedArray generate_complex(std::span<const ExponentialComponent> components, const Shape& region);

/// Real part of generate_complex; ConfigError if the imaginary part exceeds 1e-10 · max(1, ‖s‖∞).
ShapedArray generate(std::span<const ExponentialComponent> components, const Shape& region);

/// Number of singular values of the dense trajectory matrix above 1e-8 · σ₁ (0 for a zero array).
std::size_t shaped_rank(const ShapedArray& arr, const Shape& window);
std::size_t shaped_rank(const ComplexShapedArray& arr, const Shape& window);

/// Singular values of the dense trajectory matrix, descending.
std::vector<double> trajectory_spectrum(const ShapedArray& arr, const Shape& window);

/// Nonzero 2D DFT terms of an array on the full toroidal grid, as components A μˡ νⁿ with
/// μ = e^{2πip/Tx}, ν = e^{2πiq/Ty}. Terms with |A| ≤ 1e-10 · max|A| are dropped.
ComponentList dft_rank_decomposition(const ShapedArray& arr);

} // namespace shssa
