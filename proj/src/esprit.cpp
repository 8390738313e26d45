#include "shssa/esprit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>

#include "shssa/error.hpp"

namespace shssa {

namespace {

constexpr double rank_ratio = 1e-10;
constexpr double zero_freq = 1e-12;

struct Direction {
    std::vector<IndexPair> points;
    std::vector<std::size_t> from;
    std::vector<std::size_t> to;
};

Direction shiftable(const Shape& window, IndexPair step)
{
    Direction d;
    const auto& topo = window.topology();
    for (std::size_t k = 0; k < window.size(); ++k) {
        const auto& ell = window[k];
        // Coordinates near the int64 limit cannot be shifted on an infinite axis and have no neighbour.
        if ((!topo.circular_x() && ell.x >= std::numeric_limits<Coord>::max() - 1)
            || (!topo.circular_y() && ell.y >= std::numeric_limits<Coord>::max() - 1)) {
            continue;
        }
        if (auto pos = window.position(cyclic_add(ell, step, topo))) {
            d.points.push_back(ell);
            d.from.push_back(k);
            d.to.push_back(*pos);
        }
    }
    return d;
}

template<class T>
ShiftedMatrices gather(std::span<const BasicShapedArray<T>> basis, const ShiftSets& sets)
{
    if (basis.empty()) throw ConfigError("ESPRIT needs at least one basis array");
    const auto r = static_cast<Eigen::Index>(basis.size());
    ShiftedMatrices m{Eigen::MatrixXcd(static_cast<Eigen::Index>(sets.from_x.size()), r),
                      Eigen::MatrixXcd(static_cast<Eigen::Index>(sets.to_x.size()), r),
                      Eigen::MatrixXcd(static_cast<Eigen::Index>(sets.from_y.size()), r),
                      Eigen::MatrixXcd(static_cast<Eigen::Index>(sets.to_y.size()), r)};
    for (Eigen::Index k = 0; k < r; ++k) {
        const auto& b = basis[static_cast<std::size_t>(k)];
        if (b.shape() != sets.window) {
            throw ShapeError("basis array " + std::to_string(k + 1) + " is not defined on the shift-set window");
        }
        auto fill = [&](Eigen::MatrixXcd& mat, const std::vector<std::size_t>& rows) {
            for (std::size_t i = 0; i < rows.size(); ++i) mat(static_cast<Eigen::Index>(i), k) = b[rows[i]];
        };
        fill(m.p_x, sets.from_x);
        fill(m.q_x, sets.to_x);
        fill(m.p_y, sets.from_y);
        fill(m.q_y, sets.to_y);
    }
    return m;
}

double frequency(Complex z)
{
    double f = std::arg(z) / (2.0 * std::numbers::pi);
    if (f <= -0.5) f += 1.0;
    if (std::abs(f) < zero_freq) f = 0.0;
    return f;
}

void fill_geometry(EspritComponent& c)
{
    c.period_x = c.freq_x == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / c.freq_x;
    c.period_y = c.freq_y == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / c.freq_y;
    if (c.freq_x == 0.0 && c.freq_y == 0.0) {
        c.angle_deg.reset();
        c.width.reset();
        return;
    }
    c.angle_deg = std::atan2(std::abs(c.period_x), std::abs(c.period_y)) * 180.0 / std::numbers::pi;
    // |t_x t_y| / √(t_x² + t_y²) = 1 / √(f_x² + f_y²), which stays finite when one period is infinite.
    c.width = 1.0 / std::hypot(c.freq_x, c.freq_y);
}

double relative_residual(const Eigen::MatrixXcd& p, const Eigen::MatrixXcd& m, const Eigen::MatrixXcd& q)
{
    const double nq = q.norm();
    const double d = (p * m - q).norm();
    return nq > 0 ? d / nq : d;
}

std::string fmt(const char* f, double v)
{
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

} // namespace

ShiftSets shift_sets(const Shape& window)
{
    auto x = shiftable(window, {2, 1});
    auto y = shiftable(window, {1, 2});
    if (x.points.empty() || y.points.empty()) {
        throw WindowError(std::string("degenerate window: no point has a neighbour along ")
                          + (x.points.empty() ? "x" : "y") + " inside the window");
    }
    const auto& topo = window.topology();
    return {window,
            Shape(topo, std::move(x.points)),
            Shape(topo, std::move(y.points)),
            std::move(x.from),
            std::move(x.to),
            std::move(y.from),
            std::move(y.to)};
}

ShiftedMatrices shifted_matrices(std::span<const ShapedArray> basis, const ShiftSets& sets)
{
    return gather(basis, sets);
}

ShiftedMatrices shifted_matrices(std::span<const ComplexShapedArray> basis, const ShiftSets& sets)
{
    return gather(basis, sets);
}

std::string to_string(EspritMethod m)
{
    return m == EspritMethod::ls ? "ls" : "tls";
}

EspritMethod parse_esprit_method(const std::string& s)
{
    if (s == "ls") return EspritMethod::ls;
    if (s == "tls") return EspritMethod::tls;
    throw ConfigError("unknown ESPRIT method '" + s + "' (expected ls or tls)");
}

std::string to_string(ConditionLevel c)
{
    return c == ConditionLevel::squares ? "squares" : "rank_only";
}

Eigen::MatrixXcd solve_shift_matrix(const Eigen::MatrixXcd& p, const Eigen::MatrixXcd& q, EspritMethod method)
{
    const Eigen::Index r = p.cols();
    if (q.rows() != p.rows() || q.cols() != r || r == 0) {
        throw ShapeError("shifted matrices must have equal, non-empty shapes");
    }
    if (p.rows() < r) {
        throw RankDeficiencyError("shift set has " + std::to_string(p.rows()) + " points, fewer than r = "
                                  + std::to_string(r));
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(p, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    if (s[r - 1] <= rank_ratio * s[0]) {
        throw RankDeficiencyError("shifted basis matrix is rank deficient (sigma_r / sigma_1 = "
                                  + std::to_string(s[0] > 0 ? s[r - 1] / s[0] : 0.0)
                                  + "); the window does not meet the rank conditions for r = " + std::to_string(r));
    }
    if (method == EspritMethod::ls) return svd.solve(q);

    Eigen::MatrixXcd pq(p.rows(), 2 * r);
    pq << p, q;
    Eigen::JacobiSVD<Eigen::MatrixXcd> full(pq, Eigen::ComputeFullV);
    const Eigen::MatrixXcd& v = full.matrixV();
    const Eigen::MatrixXcd v12 = v.block(0, r, r, r);
    const Eigen::MatrixXcd v22 = v.block(r, r, r, r);
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(v22);
    if (!lu.isInvertible()) throw RankDeficiencyError("total least squares system is singular");
    return -v12 * lu.inverse();
}

Pairing pair_and_extract(const Eigen::MatrixXcd& m_x, const Eigen::MatrixXcd& m_y)
{
    const Eigen::Index r = m_x.rows();
    if (m_x.cols() != r || m_y.rows() != r || m_y.cols() != r) throw ShapeError("shift matrices must be r×r");
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(m_x);
    if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition of the x shift matrix failed");
    const Eigen::MatrixXcd& t = es.eigenvectors();
    const auto sv = Eigen::JacobiSVD<Eigen::MatrixXcd>(t).singularValues();
    Pairing out;
    out.condition = sv[r - 1] > 0 ? sv[0] / sv[r - 1] : std::numeric_limits<double>::infinity();
    if (!(out.condition <= max_eigvec_condition)) {
        throw PairingError("eigenvector matrix of the x shift matrix is ill-conditioned (cond = "
                               + std::to_string(out.condition) + "); pairing is unreliable",
                           out.condition);
    }
    const Eigen::VectorXcd nu = t.partialPivLu().solve(m_y * t).diagonal();
    const Eigen::VectorXcd& mu = es.eigenvalues();
    for (Eigen::Index k = 0; k < r; ++k) out.pairs.emplace_back(mu[k], nu[k]);
    std::ranges::sort(out.pairs, [](const auto& a, const auto& b) {
        const double ma = std::abs(a.first), mb = std::abs(b.first);
        if (ma != mb) return ma < mb;
        return std::arg(a.first) < std::arg(b.first);
    });
    out.min_gap = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < r; ++i) {
        for (Eigen::Index j = i + 1; j < r; ++j) out.min_gap = std::min(out.min_gap, std::abs(mu[i] - mu[j]));
    }
    out.degenerate = out.min_gap < min_eigen_gap;
    return out;
}

std::vector<EspritComponent> to_parameters(std::span<const std::pair<Complex, Complex>> pairs, bool fold_conjugates)
{
    std::vector<EspritComponent> out;
    for (const auto& [mu0, nu0] : pairs) {
        Complex mu = mu0, nu = nu0;
        EspritComponent c;
        c.freq_x = frequency(mu);
        c.freq_y = frequency(nu);
        if (fold_conjugates && (c.freq_x < 0.0 || (c.freq_x == 0.0 && c.freq_y < 0.0))) {
            mu = std::conj(mu);
            nu = std::conj(nu);
            c.freq_x = frequency(mu);
            c.freq_y = frequency(nu);
        }
        c.mu = mu;
        c.nu = nu;
        c.rate_x = std::log(std::abs(mu));
        c.rate_y = std::log(std::abs(nu));
        fill_geometry(c);
        if (fold_conjugates) {
            const double tol = 1e-8 * std::max({1.0, std::abs(mu), std::abs(nu)});
            const bool seen = std::ranges::any_of(out, [&](const EspritComponent& o) {
                return std::abs(o.mu - mu) <= tol && std::abs(o.nu - nu) <= tol;
            });
            if (seen) continue;
        }
        out.push_back(c);
    }
    return out;
}

EspritComponent from_periods(double period_x, double period_y, double rate_x, double rate_y)
{
    EspritComponent c;
    c.freq_x = std::isinf(period_x) ? 0.0 : 1.0 / period_x;
    c.freq_y = std::isinf(period_y) ? 0.0 : 1.0 / period_y;
    c.rate_x = rate_x;
    c.rate_y = rate_y;
    c.mu = std::polar(std::exp(rate_x), 2.0 * std::numbers::pi * c.freq_x);
    c.nu = std::polar(std::exp(rate_y), 2.0 * std::numbers::pi * c.freq_y);
    fill_geometry(c);
    return c;
}

EspritResult esprit_from_basis(std::span<const ComplexShapedArray> basis, EspritMethod method, bool fold_conjugates)
{
    if (basis.empty()) throw ConfigError("ESPRIT needs at least one basis array");
    const auto sets = shift_sets(basis[0].shape());
    const auto m = shifted_matrices(basis, sets);
    EspritResult res;
    res.m_x = solve_shift_matrix(m.p_x, m.q_x, method);
    res.m_y = solve_shift_matrix(m.p_y, m.q_y, method);
    res.residual_x = relative_residual(m.p_x, res.m_x, m.q_x);
    res.residual_y = relative_residual(m.p_y, res.m_y, m.q_y);
    res.pairing = pair_and_extract(res.m_x, res.m_y);
    if (res.pairing.degenerate) {
        res.warnings.push_back("x shift eigenvalues nearly coincide (gap " + std::to_string(res.pairing.min_gap)
                               + "); the pairing with y may be wrong");
    }
    res.components = to_parameters(res.pairing.pairs, fold_conjugates);
    return res;
}

EspritResult esprit_from_basis(std::span<const ShapedArray> basis, EspritMethod method, bool fold_conjugates)
{
    std::vector<ComplexShapedArray> z;
    z.reserve(basis.size());
    for (const auto& b : basis) {
        std::vector<Complex> v(b.values().begin(), b.values().end());
        z.emplace_back(b.shape(), std::move(v));
    }
    return esprit_from_basis(std::span<const ComplexShapedArray>(z), method, fold_conjugates);
}

EspritResult esprit(const Decomposition& dec, const EspritOptions& options)
{
    std::vector<std::size_t> idx = options.basis;
    if (idx.empty()) {
        for (std::size_t i = 1; i <= options.r; ++i) idx.push_back(i);
    }
    if (options.r < 1 || idx.size() != options.r) {
        throw ConfigError("ESPRIT basis must list exactly r = " + std::to_string(options.r) + " eigentriples");
    }
    std::vector<ShapedArray> basis;
    for (std::size_t n = 0; n < idx.size(); ++n) {
        const auto i = idx[n];
        if (i < 1 || i > dec.triples.size()) {
            throw ConfigError("ESPRIT basis index " + std::to_string(i) + " outside the " + std::to_string(dec.triples.size())
                              + " computed eigentriples");
        }
        if (std::find(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n), i) != idx.begin() + static_cast<std::ptrdiff_t>(n)) {
            throw ConfigError("ESPRIT basis index " + std::to_string(i) + " repeated");
        }
        const auto& t = dec.triples[i - 1];
        basis.push_back(options.row_space ? t.v : t.u);
    }
    auto res = esprit_from_basis(std::span<const ShapedArray>(basis), options.method, options.fold_conjugates);

    const auto& big = options.row_space ? dec.plan.origins() : dec.plan.window();
    const auto& other = options.row_space ? dec.plan.window() : dec.plan.origins();
    const auto r = static_cast<Coord>(options.r);
    if (contains_square(big, r + 1) && contains_square(other, r)) {
        res.level = ConditionLevel::squares;
    } else {
        res.warnings.push_back("square conditions not met for r = " + std::to_string(options.r)
                               + "; only the rank conditions were verified");
    }
    const auto& region = dec.plan.region();
    const auto& topo = region.topology();
    if (topo.kind() == TopologyKind::toroidal
        && region.size() == static_cast<std::size_t>(*topo.period_x() * *topo.period_y())) {
        res.warnings.push_back("array covers the full torus; a 2D DFT gives the frequencies directly");
    }
    return res;
}

EspritResult esprit(const ShapedArray& arr, const Shape& window, const EspritOptions& options,
                    DecomposeOptions decompose_options)
{
    std::size_t need = options.r;
    for (auto i : options.basis) need = std::max(need, i);
    decompose_options.neig = need;
    return esprit(decompose(arr, window, decompose_options), options);
}

std::string format_table(std::span<const EspritComponent> components)
{
    std::ostringstream os;
    os << "  k       t_x       t_y     Width   alpha, deg      Rate_x      Rate_y\n";
    for (std::size_t k = 0; k < components.size(); ++k) {
        const auto& c = components[k];
        char line[160];
        std::snprintf(line, sizeof line, "%3zu %9s %9s %9s %12s %11s %11s\n", k + 1, fmt("%.1f", c.period_x).c_str(),
                      fmt("%.1f", c.period_y).c_str(), c.width ? fmt("%.1f", *c.width).c_str() : "-",
                      c.angle_deg ? fmt("%.0f", *c.angle_deg).c_str() : "-", fmt("%.4f", c.rate_x).c_str(),
                      fmt("%.4f", c.rate_y).c_str());
        os << line;
    }
    return os.str();
}

} // namespace shssa
