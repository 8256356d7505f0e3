#include <bdecomp/copula.hpp>
#include <bdecomp/decomposition.hpp>
#include <bdecomp/density.hpp>
#include <bdecomp/grid.hpp>

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

namespace {

using namespace bdecomp;

Density random_density(GridPtr m, std::uint64_t seed) {
    std::mt19937_64 eng(seed);
    std::vector<double> values(m->size());
    for (auto& v : values)
        v = 0.1 + static_cast<double>(eng() >> 11) * 0x1.0p-53;
    return Density(std::move(m), std::move(values));
}

GridPtr cube(std::initializer_list<std::size_t> sizes) {
    std::vector<Axis> axes;
    int i = 0;
    for (std::size_t n : sizes)
        axes.push_back(uniform_axis(n, 0.0, 1.0, "x" + std::to_string(++i)));
    return make_grid(std::move(axes));
}

void BM_clr(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    Density f = random_density(cube({n, n}), 1);
    for (auto _ : state) benchmark::DoNotOptimize(clr(f));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.size()));
}
BENCHMARK(BM_clr)->Arg(64)->Arg(256);

void BM_decompose_2d(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    Density f = random_density(cube({n, n}), 2);
    for (auto _ : state) benchmark::DoNotOptimize(decompose(f));
}
BENCHMARK(BM_decompose_2d)->Arg(64)->Arg(128);

void BM_decompose_3d(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    Density f = random_density(cube({n, n, n}), 3);
    for (auto _ : state) benchmark::DoNotOptimize(decompose(f));
}
BENCHMARK(BM_decompose_3d)->Arg(16)->Arg(32);

void BM_decompose_4d(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    Density f = random_density(cube({n, n, n, n}), 4);
    for (auto _ : state) benchmark::DoNotOptimize(decompose(f));
}
BENCHMARK(BM_decompose_4d)->Arg(8)->Arg(12);

void BM_inner_product(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    auto m = cube({n, n});
    Density f = random_density(m, 4);
    Density g = random_density(m, 5);
    for (auto _ : state) benchmark::DoNotOptimize(inner_product(f, g));
}
BENCHMARK(BM_inner_product)->Arg(64)->Arg(128);

void BM_inner_product_direct(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    auto m = cube({n, n});
    Density f = random_density(m, 4);
    Density g = random_density(m, 5);
    for (auto _ : state) benchmark::DoNotOptimize(inner_product_direct(f, g));
}
BENCHMARK(BM_inner_product_direct)->Arg(16)->Arg(32);

void BM_gaussian_copula(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    auto sigma = CorrelationMatrix::exchangeable(2, 0.5);
    auto m = cube({n, n});
    for (auto _ : state) benchmark::DoNotOptimize(gaussian_copula_density(sigma, m));
}
BENCHMARK(BM_gaussian_copula)->Arg(64)->Arg(256);

}  // namespace

BENCHMARK_MAIN();
