#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include <random>

#include "shssa/embedding.hpp"
#include "shssa/fast_ops.hpp"
#include "shssa/parallel.hpp"

using namespace shssa;

namespace {

const int all_threads = parallel::max_threads();

struct Problem {
    ShapedArray arr;
    EmbeddingPlan plan;
    std::vector<double> v;
};

Problem make(Coord n, Coord l)
{
    const Topology planar;
    const auto region = shapes::rectangle(n, n, planar);
    std::mt19937_64 rng(1);
    std::normal_distribution<double> d;
    std::vector<double> vals(region.size());
    for (auto& x : vals) x = d(rng);
    ShapedArray arr(region, std::move(vals));
    auto pl = plan(region, shapes::rectangle(l, l, planar));
    std::vector<double> v(pl.origin_count());
    for (auto& x : v) x = d(rng);
    return {std::move(arr), std::move(pl), std::move(v)};
}

void args(benchmark::internal::Benchmark* b)
{
    for (Coord n : {64, 128, 256}) b->Args({n, n / 3});
}

void BM_FftMatvec(benchmark::State& state)
{
    const auto p = make(state.range(0), state.range(1));
    const int threads = state.range(2) > 0 ? static_cast<int>(state.range(2)) : all_threads;
    parallel::set_max_threads(threads);
    const CirculantOperator op(p.arr, p.plan);
    std::vector<double> out(op.rows());
    for (auto _ : state) {
        op.matvec(p.v, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.counters["threads"] = threads;
    parallel::set_max_threads(all_threads);
}

void BM_SerialMatvec(benchmark::State& state)
{
    const auto p = make(state.range(0), state.range(1));
    for (auto _ : state) {
        auto out = serial::matvec(p.arr, p.plan, p.v);
        benchmark::DoNotOptimize(out.data());
    }
}

void BM_DenseMatvec(benchmark::State& state)
{
    const auto p = make(state.range(0), state.range(1));
    const Eigen::MatrixXd X = embed_dense(p.arr, p.plan);
    const Eigen::Map<const Eigen::VectorXd> v(p.v.data(), static_cast<Eigen::Index>(p.v.size()));
    Eigen::VectorXd out(X.rows());
    for (auto _ : state) {
        out.noalias() = X * v;
        benchmark::DoNotOptimize(out.data());
    }
}

} // namespace

BENCHMARK(BM_FftMatvec)->Apply([](benchmark::internal::Benchmark* b) {
    for (Coord n : {64, 128, 256}) {
        for (int t : {1, 0}) b->Args({n, n / 3, t});
    }
})->ArgNames({"n", "l", "threads"})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_SerialMatvec)->Apply(args)->ArgNames({"n", "l"})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_DenseMatvec)->Args({64, 21})->Args({128, 42})->ArgNames({"n", "l"})->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
