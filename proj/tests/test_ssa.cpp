#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <numbers>
#include <random>

#include "shssa/ssa.hpp"
#include "test_support.hpp"

using namespace shssa;
using shssa::testing::rel_err;

namespace {

const Topology planar;

ShapedArray sine_series(std::size_t n)
{
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = std::sin(2.0 * std::numbers::pi * 0.12 * static_cast<double>(i) + 0.3);
    return {shapes::rectangle(static_cast<Coord>(n), 1, planar), v};
}

} // namespace

TEST(Decompose, SineHasRankTwo)
{
    const auto x = sine_series(50);
    DecomposeOptions o;
    o.neig = 4;
    const auto dec = decompose(x, shapes::rectangle(20, 1, planar), o);
    EXPECT_EQ(dec.method, SvdMethod::dense);
    ASSERT_EQ(dec.triples.size(), 4u);
    EXPECT_GT(dec.triples[1].sigma, 1.0);
    EXPECT_LT(dec.triples[2].sigma, 1e-10 * dec.triples[0].sigma);

    const auto rec = reconstruct(dec, {{1, 2}});
    ASSERT_EQ(rec.size(), 1u);
    EXPECT_LT(rel_err(rec[0].values(), x.values()), 1e-12);

    const auto c = contributions(dec);
    EXPECT_NEAR(c[0] + c[1], 100.0, 1e-9);
}

TEST(Decompose, DenseAndIterativeAgree)
{
    std::mt19937_64 rng(44);
    for (int t = 0; t < 12; ++t) {
        const auto inst = shssa::testing::random_instance(rng, t, 16);
        const auto pl = plan(inst.region, inst.window);
        const std::size_t r = std::min<std::size_t>(3, std::min(pl.window_size(), pl.origin_count()));
        DecomposeOptions o;
        o.neig = r;
        o.tol = 1e-11;
        o.force_method = SvdMethod::dense;
        const auto a = decompose(inst.data, pl, o);
        o.force_method = SvdMethod::lanczos;
        const auto b = decompose(inst.data, pl, o);
        EXPECT_EQ(b.method, SvdMethod::lanczos);
        for (std::size_t i = 0; i < r; ++i) {
            EXPECT_NEAR(a.triples[i].sigma, b.triples[i].sigma, 1e-9 * a.triples[0].sigma);
            EXPECT_LT(b.triples[i].residual, 1e-9 * a.triples[0].sigma);
        }
        // Only the leading triple is compared as a subspace; later ones may be near-degenerate.
        const double gap = a.triples[0].sigma - (r > 1 ? a.triples[1].sigma : 0.0);
        if (gap > 1e-3 * a.triples[0].sigma) {
            EXPECT_LT(rel_err(reconstruct(a, {{1}})[0].values(), reconstruct(b, {{1}})[0].values()), 1e-6);
        }
        EXPECT_NEAR(a.frobenius_sq, b.frobenius_sq, 1e-12 * a.frobenius_sq);
    }
}

TEST(Decompose, FullSetReconstructsData)
{
    std::mt19937_64 rng(8);
    for (int t = 0; t < 20; ++t) {
        const auto inst = shssa::testing::random_instance(rng, t, 10);
        const auto pl = plan(inst.region, inst.window);
        DecomposeOptions o;
        o.neig = std::min(pl.window_size(), pl.origin_count());
        const auto dec = decompose(inst.data, pl, o);
        Grouping all(1);
        for (std::size_t i = 1; i <= o.neig; ++i) all[0].push_back(i);
        const auto rec = reconstruct(dec, all);
        EXPECT_LT(rel_err(rec[0].values(), shssa::testing::on_covered(inst.data, pl).values()), 1e-11);
        const auto c = contributions(dec);
        EXPECT_NEAR(std::accumulate(c.begin(), c.end(), 0.0), 100.0, 1e-8);

        // Groups add up.
        if (o.neig >= 2) {
            const auto parts = reconstruct(dec, {{1}, {2}});
            const auto both = reconstruct(dec, {{1, 2}});
            std::vector<double> sum(parts[0].size());
            for (std::size_t k = 0; k < sum.size(); ++k) sum[k] = parts[0][k] + parts[1][k];
            EXPECT_LT(rel_err(sum, both[0].values()), 1e-12);
        }
    }
}

TEST(Decompose, TriplesAreOriented)
{
    std::mt19937_64 rng(12);
    const auto inst = shssa::testing::random_instance(rng, 1);
    const auto pl = plan(inst.region, inst.window);
    DecomposeOptions o;
    o.neig = std::min<std::size_t>(3, std::min(pl.window_size(), pl.origin_count()));
    for (const auto& t : decompose(inst.data, pl, o).triples) {
        const auto& u = t.u.values();
        const auto it = std::ranges::max_element(u, {}, [](double a) { return std::abs(a); });
        EXPECT_GT(*it, 0.0);
        EXPECT_EQ(t.u.shape(), pl.window());
        EXPECT_EQ(t.v.shape(), pl.origins());
    }
}

TEST(Decompose, Errors)
{
    const auto x = sine_series(30);
    const auto w = shapes::rectangle(10, 1, planar);
    DecomposeOptions o;
    o.neig = 11;
    EXPECT_THROW(decompose(x, w, o), ConfigError);
    o.neig = 0;
    EXPECT_THROW(decompose(x, w, o), ConfigError);
    o.neig = 2;
    const auto dec = decompose(x, w, o);
    EXPECT_THROW(reconstruct(dec, {{1}, {1}}), ConfigError);
    EXPECT_THROW(reconstruct(dec, {{3}}), ConfigError);
    EXPECT_THROW(reconstruct(dec, {{}}), ConfigError);
    EXPECT_TRUE(reconstruct(dec, {}).empty());
}

TEST(Decompose, ReportsNonConvergence)
{
    std::mt19937_64 rng(99);
    const auto region = shapes::rectangle(60, 40, planar);
    const ShapedArray x(region, shssa::testing::random_vector(rng, region.size()));
    DecomposeOptions o;
    o.neig = 8;
    o.max_iter = 0;
    o.tol = 1e-14;
    o.force_method = SvdMethod::lanczos;
    try {
        (void)decompose(x, shapes::rectangle(20, 15, planar), o);
        FAIL() << "expected ConvergenceError";
    } catch (const ConvergenceError& e) {
        EXPECT_EQ(e.kind(), ErrorKind::numerical);
        EXPECT_EQ(e.partial().triples.size(), 8u);
    }
}
