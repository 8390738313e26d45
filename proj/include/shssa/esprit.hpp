#pragma once

#include <Eigen/Dense>

#include <complex>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "shssa/shape.hpp"
#include "shssa/ssa.hpp"

namespace shssa {

using Complex = std::complex<double>;

/// Points of a shape whose right neighbour along x (resp. y) is also in the shape.
struct ShiftSets {
    Shape window;
    Shape m_x;
    Shape m_y;
    /// Positions in `window` of m, and of m ⊕ (2,1) (resp. m ⊕ (1,2)), for each m in order.
    std::vector<std::size_t> from_x, to_x, from_y, to_y;
};

/// Throws WindowError if either set is empty.
ShiftSets shift_sets(const Shape& window);

struct ShiftedMatrices {
    Eigen::MatrixXcd p_x, q_x, p_y, q_y;
};

/// Column k holds basis[k] restricted to m_x, then to m_x ⊕ (2,1); likewise along y.
ShiftedMatrices shifted_matrices(std::span<const ShapedArray> basis, const ShiftSets& sets);
ShiftedMatrices shifted_matrices(std::span<const ComplexShapedArray> basis, const ShiftSets& sets);

enum class EspritMethod { ls, tls };

std::string to_string(EspritMethod m);
EspritMethod parse_esprit_method(const std::string& s);

/// r×r M with P M ≈ Q. Throws RankDeficiencyError when σ_r(P) ≤ 1e-10 · σ₁(P).
Eigen::MatrixXcd solve_shift_matrix(const Eigen::MatrixXcd& p, const Eigen::MatrixXcd& q, EspritMethod method);

struct Pairing {
    std::vector<std::pair<Complex, Complex>> pairs; ///< ordered by |μ|, then arg μ
    double condition = 1.0;                         ///< of the eigenvector matrix
    double min_gap = 0.0;                           ///< smallest distance between two μ
    bool degenerate = false;                        ///< min_gap < 1e-6
};

inline constexpr double max_eigvec_condition = 1e8;
inline constexpr double min_eigen_gap = 1e-6;

/// M_x = T diag(μ) T⁻¹, ν = diag(T⁻¹ M_y T). Throws PairingError if cond(T) > 1e8.
Pairing pair_and_extract(const Eigen::MatrixXcd& m_x, const Eigen::MatrixXcd& m_y);

/// One physical component. For real signals the conjugate pair is folded into one entry with
/// f_x ∈ (0, 0.5] (or f_x = 0 and f_y ∈ [0, 0.5]).
struct EspritComponent {
    Complex mu;
    Complex nu;
    double freq_x = 0.0;   ///< arg μ / 2π ∈ (−0.5, 0.5]
    double freq_y = 0.0;
    double period_x = 0.0; ///< 1 / f_x; ±infinity when f_x = 0
    double period_y = 0.0;
    double rate_x = 0.0;   ///< ln |μ|
    double rate_y = 0.0;
    std::optional<double> angle_deg; ///< atan(|t_x| / |t_y|) in degrees
    std::optional<double> width;     ///< |t_x t_y| / √(t_x² + t_y²)
};

/// Parameters of each pair. With `fold_conjugates`, pairs equal to the conjugate of another
/// are merged and every pair is reported by its representative with non-negative frequency.
std::vector<EspritComponent> to_parameters(std::span<const std::pair<Complex, Complex>> pairs,
                                           bool fold_conjugates = true);

/// Strip geometry from a pair of periods.
EspritComponent from_periods(double period_x, double period_y, double rate_x = 0.0, double rate_y = 0.0);

enum class ConditionLevel {
    squares,  ///< 𝔏 holds an (r+1)×(r+1) square and 𝔎 an r×r square
    rank_only ///< only rank P_x = rank P_y = r was verified
};

std::string to_string(ConditionLevel c);

struct EspritOptions {
    std::size_t r = 2;
    EspritMethod method = EspritMethod::ls;
    std::vector<std::size_t> basis; ///< 1-based eigentriples; empty means 1..r
    bool row_space = false;         ///< use factor vectors on 𝔎 instead of eigenarrays on 𝔏
    bool fold_conjugates = true;
};

struct EspritResult {
    Pairing pairing;
    std::vector<EspritComponent> components;
    Eigen::MatrixXcd m_x, m_y;
    double residual_x = 0.0; ///< ‖P_x M_x − Q_x‖_F / ‖Q_x‖_F
    double residual_y = 0.0;
    ConditionLevel level = ConditionLevel::rank_only;
    std::vector<std::string> warnings;
};

/// Shift chain on a basis of arrays sharing one shape.
EspritResult esprit_from_basis(std::span<const ComplexShapedArray> basis, EspritMethod method,
                               bool fold_conjugates = true);
EspritResult esprit_from_basis(std::span<const ShapedArray> basis, EspritMethod method, bool fold_conjugates = true);

/// Shift chain on the eigentriples of an existing decomposition.
EspritResult esprit(const Decomposition& dec, const EspritOptions& options);

/// Decompose with enough eigentriples for `options.basis`, then run the shift chain.
EspritResult esprit(const ShapedArray& arr, const Shape& window, const EspritOptions& options,
                    DecomposeOptions decompose_options = {});

/// Plain-text table with columns t_x, t_y, width, angle, rate_x, rate_y.
std::string format_table(std::span<const EspritComponent> components);

} // namespace shssa
