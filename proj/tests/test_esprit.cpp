#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "shssa/esprit.hpp"
#include "shssa/rank_model.hpp"
#include "test_support.hpp"

using namespace shssa;

namespace {

const Topology planar;
const double two_pi = 2.0 * std::numbers::pi;

using Pairs = std::vector<std::pair<Complex, Complex>>;

/// Largest distance after matching each expected pair with its closest unused found pair.
double match_error(const Pairs& expected, const Pairs& found)
{
    if (expected.size() != found.size()) return std::numeric_limits<double>::infinity();
    std::vector<bool> used(found.size(), false);
    double worst = 0.0;
    for (const auto& e : expected) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t at = 0;
        for (std::size_t j = 0; j < found.size(); ++j) {
            if (used[j]) continue;
            const double d = std::max(std::abs(e.first - found[j].first), std::abs(e.second - found[j].second));
            if (d < best) {
                best = d;
                at = j;
            }
        }
        used[at] = true;
        worst = std::max(worst, best);
    }
    return worst;
}

Pairs pairs_of(const ComponentList& c)
{
    Pairs p;
    for (const auto& x : c) p.emplace_back(x.mu, x.nu);
    return p;
}

ComplexShapedArray exponential(const Shape& s, Complex mu, Complex nu)
{
    return generate_complex(ComponentList{ExponentialComponent::constant(mu, nu, 1.0)}, s);
}

} // namespace

TEST(ShiftSets, Rectangle)
{
    const auto sets = shift_sets(shapes::rectangle(4, 3, planar));
    EXPECT_EQ(sets.m_x, shapes::rectangle(3, 3, planar));
    EXPECT_EQ(sets.m_y, shapes::rectangle(4, 2, planar));
    EXPECT_EQ(sets.from_x.size(), 9u);
}

TEST(ShiftSets, WrapOnFullBand)
{
    const Topology torus(5, 7);
    const auto band = shapes::rectangle(5, 3, torus);
    const auto sets = shift_sets(band);
    EXPECT_EQ(sets.m_x, band);
    EXPECT_EQ(sets.m_y, shapes::rectangle(5, 2, torus));
    // The last row shifts onto the first.
    EXPECT_EQ(sets.window[sets.to_x[band.position({5, 2}).value()]], (IndexPair{1, 2}));
}

TEST(ShiftSets, DiscByEnumeration)
{
    const auto disc = shapes::disc({3, 3}, 2.0, planar);
    const auto sets = shift_sets(disc);
    std::vector<IndexPair> mx, my;
    for (const auto& p : disc) {
        if (disc.contains({p.x + 1, p.y})) mx.push_back(p);
        if (disc.contains({p.x, p.y + 1})) my.push_back(p);
    }
    EXPECT_EQ(std::vector<IndexPair>(sets.m_x.begin(), sets.m_x.end()), mx);
    EXPECT_EQ(std::vector<IndexPair>(sets.m_y.begin(), sets.m_y.end()), my);
}

TEST(ShiftSets, Degenerate)
{
    EXPECT_THROW(shift_sets(shapes::rectangle(1, 4, planar)), WindowError);
    EXPECT_THROW(shift_sets(Shape(planar, {{1, 1}, {2, 2}})), WindowError);
}

TEST(ShiftedMatrices, ExponentialShift)
{
    const auto w = shapes::rectangle(4, 2, planar);
    const Complex mu = std::polar(0.97, 0.4), nu = std::polar(1.02, -1.1);
    const std::vector<ComplexShapedArray> basis{exponential(w, mu, nu)};
    const auto m = shifted_matrices(basis, shift_sets(w));
    EXPECT_LT((m.q_x - mu * m.p_x).norm(), 1e-14);
    EXPECT_LT((m.q_y - nu * m.p_y).norm(), 1e-14);

    const std::vector<ShapedArray> c{ShapedArray(w, std::vector<double>(8, 2.0))};
    const auto mc = shifted_matrices(c, shift_sets(w));
    EXPECT_EQ(mc.p_x, mc.q_x);
    EXPECT_TRUE((mc.p_x.array() == Complex(2.0)).all());
}

TEST(ShiftedMatrices, RandomBasisMatchesIndexing)
{
    std::mt19937_64 rng(3);
    const auto disc = shapes::disc({4, 4}, 3.0, planar);
    std::vector<ShapedArray> basis;
    for (int k = 0; k < 3; ++k) basis.emplace_back(disc, shssa::testing::random_vector(rng, disc.size()));
    const auto sets = shift_sets(disc);
    const auto m = shifted_matrices(basis, sets);
    ASSERT_EQ(static_cast<std::size_t>(m.p_x.rows()), sets.m_x.size());
    for (std::size_t i = 0; i < sets.m_x.size(); ++i) {
        const auto p = sets.m_x[i];
        for (int k = 0; k < 3; ++k) {
            EXPECT_EQ(m.p_x(static_cast<Eigen::Index>(i), k).real(), basis[static_cast<std::size_t>(k)].at(p));
            EXPECT_EQ(m.q_x(static_cast<Eigen::Index>(i), k).real(), basis[static_cast<std::size_t>(k)].at({p.x + 1, p.y}));
        }
    }
    const std::vector<ShapedArray> wrong{ShapedArray::zeros(shapes::rectangle(3, 3, planar))};
    EXPECT_THROW(shifted_matrices(wrong, sets), ShapeError);
}

TEST(SolveShiftMatrix, Examples)
{
    const Eigen::MatrixXcd p = Eigen::MatrixXcd::Constant(5, 1, 3.0);
    for (auto m : {EspritMethod::ls, EspritMethod::tls}) {
        EXPECT_LT(std::abs(solve_shift_matrix(p, p, m)(0, 0) - 1.0), 1e-14);
        const Complex mu = std::polar(0.9, 0.3);
        Eigen::MatrixXcd e(6, 1);
        for (int l = 0; l < 6; ++l) e(l, 0) = std::pow(mu, l + 1);
        EXPECT_LT(std::abs(solve_shift_matrix(e.topRows(5), e.bottomRows(5), m)(0, 0) - mu), 1e-13);
    }
    Eigen::MatrixXcd deficient(4, 2);
    deficient.col(0).setConstant(1.0);
    deficient.col(1).setConstant(2.0);
    EXPECT_THROW(solve_shift_matrix(deficient, deficient, EspritMethod::ls), RankDeficiencyError);
    EXPECT_THROW(solve_shift_matrix(Eigen::MatrixXcd::Ones(1, 2), Eigen::MatrixXcd::Ones(1, 2), EspritMethod::ls),
                 RankDeficiencyError);
}

TEST(SolveShiftMatrix, LeastSquaresOracle)
{
    std::mt19937_64 rng(10);
    std::normal_distribution<double> d;
    Eigen::MatrixXcd p(30, 3), q(30, 3);
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        p.data()[i] = {d(rng), d(rng)};
        q.data()[i] = {d(rng), d(rng)};
    }
    const Eigen::MatrixXcd normal = (p.adjoint() * p).ldlt().solve(p.adjoint() * q);
    EXPECT_LT((solve_shift_matrix(p, q, EspritMethod::ls) - normal).norm(), 1e-12);

    // TLS minimizes the perpendicular residual: [P Q] [M; -I] is orthogonal to the top r right singular vectors.
    const Eigen::MatrixXcd m = solve_shift_matrix(p, q, EspritMethod::tls);
    Eigen::MatrixXcd pq(30, 6);
    pq << p, q;
    Eigen::MatrixXcd stacked(6, 3);
    stacked << m, -Eigen::MatrixXcd::Identity(3, 3);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(pq, Eigen::ComputeFullV);
    EXPECT_LT((svd.matrixV().leftCols(3).adjoint() * stacked).norm(), 1e-10 * stacked.norm());
}

TEST(Pairing, Examples)
{
    Eigen::MatrixXcd mx(1, 1), my(1, 1);
    mx << Complex(0.5, 0.1);
    my << Complex(2.0, 0.0);
    const auto one = pair_and_extract(mx, my);
    ASSERT_EQ(one.pairs.size(), 1u);
    EXPECT_EQ(one.pairs[0].second, Complex(2.0));
    EXPECT_FALSE(one.degenerate);

    // Conjugated diagonal pair.
    Eigen::MatrixXcd t(2, 2);
    t << 1.0, 2.0, -0.5, 1.5;
    Eigen::MatrixXcd dx = Eigen::MatrixXcd::Zero(2, 2), dy = dx;
    dx.diagonal() << 0.8, 1.1;
    dy.diagonal() << Complex(0, 1), -0.3;
    const auto two = pair_and_extract(t * dx * t.inverse(), t * dy * t.inverse());
    EXPECT_LT(match_error({{0.8, Complex(0, 1)}, {1.1, -0.3}}, two.pairs), 1e-12);

    dx.diagonal() << 0.8, 0.8;
    EXPECT_TRUE(pair_and_extract(t * dx * t.inverse(), t * dy * t.inverse()).degenerate);

    Eigen::MatrixXcd jordan(2, 2);
    jordan << 1.0, 1.0, 0.0, 1.0 + 1e-13;
    EXPECT_THROW(pair_and_extract(jordan, Eigen::MatrixXcd::Identity(2, 2)), PairingError);
}

TEST(ToParameters, ReferencePeriodPairs)
{
    const auto a = from_periods(8.1, 6.9);
    EXPECT_NEAR(*a.angle_deg, 50.0, 0.5);
    EXPECT_NEAR(*a.width, 5.2, 0.1);
    const auto b = from_periods(5.1, 6.8);
    EXPECT_NEAR(*b.angle_deg, 37.0, 0.5);
    EXPECT_NEAR(*b.width, 4.1, 0.1);
    const auto c = from_periods(7.0, 7.0);
    EXPECT_NEAR(*c.angle_deg, 45.0, 1e-12);
    EXPECT_NEAR(*c.width, 7.0 / std::sqrt(2.0), 1e-12);
    const auto flat = from_periods(std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity());
    EXPECT_FALSE(flat.angle_deg.has_value());
    EXPECT_FALSE(flat.width.has_value());
}

TEST(ToParameters, FoldsConjugates)
{
    const Complex mu = std::polar(0.99, two_pi * 0.125), nu = std::polar(1.01, -two_pi * 0.2);
    const Pairs p{{mu, nu}, {std::conj(mu), std::conj(nu)}, {0.95, 1.0}};
    const auto folded = to_parameters(p);
    ASSERT_EQ(folded.size(), 2u);
    EXPECT_NEAR(folded[0].freq_x, 0.125, 1e-14);
    EXPECT_NEAR(folded[0].freq_y, -0.2, 1e-14);
    EXPECT_NEAR(folded[0].period_x, 8.0, 1e-12);
    EXPECT_NEAR(folded[0].period_y, -5.0, 1e-12);
    EXPECT_NEAR(folded[0].rate_x, std::log(0.99), 1e-14);
    EXPECT_EQ(folded[1].period_x, std::numeric_limits<double>::infinity());
    EXPECT_EQ(to_parameters(p, false).size(), 3u);
}

namespace {

struct ChainCase {
    const char* name;
    Shape region;
    Shape window;
    ComponentList truth;
};

std::vector<ChainCase> chain_cases()
{
    std::vector<ChainCase> cases;
    auto damped = real_harmonic(0.11, 0.07, 1.0, 0.3, -0.01, 0.005);
    damped.push_back(ExponentialComponent::constant(0.97, 1.02, 0.8));
    cases.push_back({"planar rectangle", shapes::rectangle(16, 14, planar), shapes::rectangle(6, 5, planar), damped});

    const auto lshape = difference(shapes::rectangle(7, 7, planar), shapes::rectangle(3, 3, planar, {5, 5}));
    cases.push_back({"planar L", shapes::rectangle(18, 18, planar), lshape, damped});
    cases.push_back({"planar disc", shapes::disc({10, 10}, 9.5, planar), shapes::disc({4, 4}, 3.0, planar), damped});

    const Topology cyl(12, std::nullopt);
    auto periodic = real_harmonic(2.0 / 12.0, 0.13, 1.0, 0.1, 0.0, -0.01);
    const auto more = real_harmonic(5.0 / 12.0, -0.21, 0.7, 1.2);
    periodic.insert(periodic.end(), more.begin(), more.end());
    cases.push_back({"cylinder band", shapes::rectangle(12, 20, cyl), shapes::rectangle(12, 6, cyl), periodic});
    cases.push_back({"cylinder rectangle", shapes::rectangle(12, 20, cyl), shapes::rectangle(6, 6, cyl), periodic});
    return cases;
}

} // namespace

TEST(Esprit, NoiselessRecovery)
{
    for (const auto& c : chain_cases()) {
        const auto s = generate(c.truth, c.region);
        for (auto method : {EspritMethod::ls, EspritMethod::tls}) {
            EspritOptions o;
            o.r = c.truth.size();
            o.method = method;
            const auto res = esprit(s, c.window, o);
            EXPECT_LT(match_error(pairs_of(c.truth), res.pairing.pairs), 1e-8) << c.name << " " << to_string(method);
            EXPECT_LT(res.residual_x, 1e-10) << c.name;
            EXPECT_LT(res.residual_y, 1e-10) << c.name;
        }
    }
}

TEST(Esprit, RowSpaceAgrees)
{
    for (const auto& c : chain_cases()) {
        const auto s = generate(c.truth, c.region);
        EspritOptions o;
        o.r = c.truth.size();
        o.row_space = true;
        const auto res = esprit(s, c.window, o);
        EXPECT_LT(match_error(pairs_of(c.truth), res.pairing.pairs), 1e-8) << c.name;
    }
}

TEST(Esprit, BasisInvariance)
{
    std::mt19937_64 rng(21);
    std::normal_distribution<double> d;
    for (const auto& c : chain_cases()) {
        const auto s = generate(c.truth, c.region);
        DecomposeOptions dopt;
        dopt.neig = c.truth.size();
        const auto dec = decompose(s, c.window, dopt);
        const auto r = static_cast<Eigen::Index>(c.truth.size());
        Eigen::MatrixXd g;
        do {
            g = Eigen::MatrixXd::NullaryExpr(r, r, [&] { return d(rng); });
        } while (Eigen::JacobiSVD<Eigen::MatrixXd>(g).singularValues().eval()(r - 1) < 0.2);
        std::vector<ShapedArray> mixed;
        for (Eigen::Index k = 0; k < r; ++k) {
            std::vector<double> v(dec.plan.window_size(), 0.0);
            for (Eigen::Index j = 0; j < r; ++j) {
                for (std::size_t i = 0; i < v.size(); ++i) v[i] += g(j, k) * dec.triples[static_cast<std::size_t>(j)].u[i];
            }
            mixed.emplace_back(dec.plan.window(), v);
        }
        EspritOptions o;
        o.r = c.truth.size();
        const auto a = esprit(dec, o);
        const auto b = esprit_from_basis(std::span<const ShapedArray>(mixed), EspritMethod::ls);
        EXPECT_LT(match_error(a.pairing.pairs, b.pairing.pairs), 1e-8) << c.name;
    }
}

TEST(Esprit, WrapMatchesUnrolledPlanarBasis)
{
    const Coord tx = 8;
    const Topology cyl(tx, std::nullopt);
    const auto band = shapes::rectangle(tx, 4, cyl);
    const auto unrolled = shapes::rectangle(tx + 1, 4, planar);
    std::mt19937_64 rng(6);
    std::vector<ShapedArray> wrap, flat;
    for (int k = 0; k < 3; ++k) {
        const ShapedArray b(band, shssa::testing::random_vector(rng, band.size()));
        std::vector<double> ext;
        for (const auto& p : unrolled) ext.push_back(b.at({(p.x - 1) % tx + 1, p.y}));
        wrap.push_back(b);
        flat.emplace_back(unrolled, ext);
    }
    const auto mw = shifted_matrices(wrap, shift_sets(band));
    const auto mf = shifted_matrices(flat, shift_sets(unrolled));
    EXPECT_EQ(mw.p_x, mf.p_x);
    EXPECT_EQ(mw.q_x, mf.q_x);
    EXPECT_LT((solve_shift_matrix(mw.p_x, mw.q_x, EspritMethod::ls) - solve_shift_matrix(mf.p_x, mf.q_x, EspritMethod::ls))
                  .norm(),
              1e-12);
}

TEST(Esprit, ConditionReportingAndWarnings)
{
    auto truth = real_harmonic(0.1, 0.2, 1.0);
    const auto s = generate(truth, shapes::rectangle(12, 12, planar));
    EspritOptions o;
    o.r = 2;
    EXPECT_EQ(esprit(s, shapes::rectangle(3, 3, planar), o).level, ConditionLevel::squares);
    // A 2-row window lacks a 3×3 square but still meets the rank conditions here.
    const auto weak = esprit(s, shapes::rectangle(2, 6, planar), o);
    EXPECT_EQ(weak.level, ConditionLevel::rank_only);
    EXPECT_FALSE(weak.warnings.empty());
    EXPECT_LT(match_error(pairs_of(truth), weak.pairing.pairs), 1e-8);

    const Topology torus(10, 10);
    const auto grid = shapes::rectangle(10, 10, torus);
    const auto ts = generate(real_harmonic(0.1, 0.2, 1.0), grid);
    const auto tr = esprit(ts, shapes::rectangle(4, 4, torus), o);
    EXPECT_TRUE(std::ranges::any_of(tr.warnings, [](const std::string& w) { return w.find("DFT") != std::string::npos; }));

    o.basis = {1, 1};
    DecomposeOptions two;
    two.neig = 2;
    EXPECT_THROW(esprit(decompose(s, shapes::rectangle(3, 3, planar), two), o), ConfigError);
    EXPECT_THROW(parse_esprit_method("music"), ConfigError);
}

TEST(Esprit, NoisySinesWithinTolerance)
{
    std::mt19937_64 rng(2);
    std::normal_distribution<double> noise(0.0, 0.1);
    auto truth = real_harmonic(0.1, 0.05, 1.0);
    const auto second = real_harmonic(0.23, -0.12, 1.0, 0.7);
    truth.insert(truth.end(), second.begin(), second.end());
    const auto region = shapes::rectangle(50, 50, planar);
    auto s = generate(truth, region);
    std::vector<double> v(s.values().begin(), s.values().end());
    for (auto& x : v) x += noise(rng);
    EspritOptions o;
    o.r = 4;
    const auto res = esprit(ShapedArray(region, v), shapes::rectangle(20, 20, planar), o);
    ASSERT_EQ(res.components.size(), 2u);
    std::vector<std::pair<double, double>> f;
    for (const auto& c : res.components) f.emplace_back(c.freq_x, c.freq_y);
    std::ranges::sort(f);
    EXPECT_NEAR(f[0].first, 0.1, 5e-3);
    EXPECT_NEAR(f[0].second, 0.05, 5e-3);
    EXPECT_NEAR(f[1].first, 0.23, 5e-3);
    EXPECT_NEAR(f[1].second, -0.12, 5e-3);
    const auto table = format_table(res.components);
    EXPECT_NE(table.find("Rate_x"), std::string::npos);
}
