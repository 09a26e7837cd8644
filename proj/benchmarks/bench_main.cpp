#include <benchmark/benchmark.h>

#include <random>

#include "primeforms/arith.hpp"
#include "primeforms/counting.hpp"
#include "primeforms/gowers.hpp"
#include "primeforms/gysieve.hpp"
#include "primeforms/local_factors.hpp"

using namespace primeforms;

namespace {

const ArithTables& tables() {
    static const ArithTables t = build_tables(4'000'000);
    return t;
}

void BM_BuildTables(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(build_tables(static_cast<std::uint64_t>(state.range(0))));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BuildTables)->Arg(100'000)->Arg(1'000'000)->Unit(benchmark::kMillisecond);

void BM_LocalFactor(benchmark::State& state) {
    auto sys = ap_system(static_cast<int>(state.range(0)));
    for (auto _ : state)
        for (std::uint64_t p : {2u, 3u, 5u, 7u, 97u, 997u}) benchmark::DoNotOptimize(local_factor(sys, p));
}
BENCHMARK(BM_LocalFactor)->DenseRange(3, 6);

void BM_SingularSeries(benchmark::State& state) {
    auto sys = ap_system(4);
    for (auto _ : state) benchmark::DoNotOptimize(singular_series(sys, static_cast<std::uint64_t>(state.range(0))));
}
BENCHMARK(BM_SingularSeries)->Arg(10'000)->Arg(1'000'000)->Unit(benchmark::kMillisecond);

void BM_WeightedCountAP3(benchmark::State& state) {
    const auto N = state.range(0);
    const auto& t = tables();
    auto sys = ap_system(3);
    auto body = progression_body(3, N);
    std::vector<Weight> w(3, Weight::von_mangoldt());
    for (auto _ : state) benchmark::DoNotOptimize(weighted_count(sys, body, w, t));
}
BENCHMARK(BM_WeightedCountAP3)->Arg(10'000)->Arg(30'000)->Unit(benchmark::kMillisecond);

void BM_PrimePointCountAP4(benchmark::State& state) {
    const auto N = state.range(0);
    const auto& t = tables();
    auto sys = ap_system(4);
    auto body = progression_body(4, N);
    for (auto _ : state) benchmark::DoNotOptimize(prime_point_count(sys, body, t));
}
BENCHMARK(BM_PrimePointCountAP4)->Arg(10'000)->Arg(100'000)->Unit(benchmark::kMillisecond);

std::vector<cplx> random_signal(std::size_t n) {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g;
    std::vector<cplx> v(n);
    for (auto& z : v) z = {g(rng), g(rng)};
    return v;
}

void BM_GowersU2Fourier(benchmark::State& state) {
    auto f = random_signal(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(gowers_norm_cyclic(f, 1, GowersMethod::fourier));
}
BENCHMARK(BM_GowersU2Fourier)->RangeMultiplier(10)->Range(1'000, 1'000'000);

void BM_GowersU3Recursive(benchmark::State& state) {
    auto f = random_signal(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(gowers_norm_cyclic(f, 2, GowersMethod::recursive));
}
BENCHMARK(BM_GowersU3Recursive)->Arg(256)->Arg(1024)->Arg(4096)->Unit(benchmark::kMillisecond);

void BM_GowersU2Naive(benchmark::State& state) {
    auto f = random_signal(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(gowers_norm_cyclic(f, 1, GowersMethod::naive));
}
BENCHMARK(BM_GowersU2Naive)->Arg(32)->Arg(64);

void BM_EnvelopingSieve(benchmark::State& state) {
    const auto& t = tables();
    auto residues = w_trick(5).residues;
    for (auto _ : state) benchmark::DoNotOptimize(build_enveloping_sieve(state.range(0), 0.05, 5, residues, 20, t));
}
BENCHMARK(BM_EnvelopingSieve)->Arg(10'000)->Arg(100'000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
